"""Curvature of the configuration-space metric and conformal-flatness verdicts.

The kinetic term of H defines a diagonal metric g_ii = 1/g^{ii}. Its jet up to
third order comes from nested dual numbers; Christoffel symbols, Riemann,
Ricci, Cotton (n = 3) and Weyl (n >= 4) tensors follow by einsum contractions.

Index conventions:
    gamma[a, b, c]        Γ^a_{bc}
    dgamma[a, b, c, k]    ∂_k Γ^a_{bc}
    riemann_up[a, b, c, d] R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}
    ricci[b, d]           R^a_{bad}
    cotton[i, j, k]       ∇_k R_ij − ∇_j R_ik + (∇_j R g_ik − ∇_k R g_ij) / (2(n−1))
"""

from collections.abc import Sequence
from dataclasses import dataclass, replace
from itertools import combinations_with_replacement

import numpy as np

from src.autodiff import dual
from src.chain.hamiltonian import ChainError, check_domain, metric_entries
from src.chain.models import ChainSystem
from src.chain.sampling import make_rng, sample_coordinates
from src.utils.logging import get_logger

logger = get_logger(__name__)

FLATNESS_THRESHOLD = 1e-7
DEFAULT_SAMPLES = 20
_GEOMETRY_STREAM = 4


class UnsupportedDimensionError(ChainError):
    """No conformal obstruction tensor is defined for this dimension."""

    pass


@dataclass(frozen=True)
class MetricJet:
    """Diagonal metric and its derivatives at one point.

    dg[i, k] = ∂_k g_ii, d2g[i, k, l], d3g[i, k, l, m].
    """

    q: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray
    d3g: np.ndarray
    asymmetry: float = 0.0

    @property
    def n(self) -> int:
        return len(self.g)

    def scaled(self, factor: float) -> "MetricJet":
        """Jet of factor·g."""
        return replace(
            self, g=factor * self.g, dg=factor * self.dg, d2g=factor * self.d2g, d3g=factor * self.d3g
        )


def metric_jet(system: ChainSystem, q: Sequence[float]) -> MetricJet:
    """Metric derivatives to third order by nested forward differentiation."""
    q = np.asarray(q, dtype=float)
    check_domain(system, q)
    n = system.n
    g = np.array([float(v) for v in metric_entries(system, q)])

    dg = np.zeros((n, n))
    for i, entry in enumerate(metric_entries(system, dual.seed_vector(q))):
        if isinstance(entry, dual.Dual):
            dg[i] = entry.eps

    d2g = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            entries = metric_entries(system, dual.seed_nested(q, (a, b)))
            d2g[:, a, b] = [dual.perturbation(e, 2) for e in entries]
    asymmetry = float(np.max(np.abs(d2g - d2g.transpose(0, 2, 1)))) if n else 0.0
    d2g = 0.5 * (d2g + d2g.transpose(0, 2, 1))

    d3g = np.zeros((n, n, n, n))
    for a, b, c in combinations_with_replacement(range(n), 3):
        entries = metric_entries(system, dual.seed_nested(q, (a, b, c)))
        values = [dual.perturbation(e, 3) for e in entries]
        for x, y, z in {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}:
            d3g[:, x, y, z] = values
    return MetricJet(q=q, g=g, dg=dg, d2g=d2g, d3g=d3g, asymmetry=asymmetry)


@dataclass(frozen=True)
class CurvatureReport:
    """Curvature tensors at one point (all-lower Riemann)."""

    q: np.ndarray
    metric: np.ndarray
    gamma: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    riemann_up: np.ndarray
    nabla_ricci: np.ndarray
    d_scalar: np.ndarray
    cotton: np.ndarray | None = None
    weyl: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.q)

    def _frame(self, tensor: np.ndarray) -> np.ndarray:
        """Orthonormal-frame components of an all-lower tensor."""
        inv_root = 1.0 / np.sqrt(np.diag(self.metric))
        out = tensor
        for axis in range(tensor.ndim):
            shape = [1] * tensor.ndim
            shape[axis] = -1
            out = out * inv_root.reshape(shape)
        return out

    @property
    def riemann_norm(self) -> float:
        return float(np.max(np.abs(self._frame(self.riemann)))) if self.n else 0.0

    @property
    def obstruction(self) -> np.ndarray | None:
        return self.cotton if self.n == 3 else self.weyl

    @property
    def obstruction_norm(self) -> float:
        tensor = self.obstruction
        if tensor is None:
            raise UnsupportedDimensionError(f"no conformal obstruction in dimension {self.n}")
        return float(np.max(np.abs(self._frame(tensor))))

    def symmetry_residual(self) -> float:
        """Worst violation of the Riemann pair symmetries and the first Bianchi identity."""
        r = self._frame(self.riemann)
        residuals = [
            r + r.transpose(1, 0, 2, 3),
            r + r.transpose(0, 1, 3, 2),
            r - r.transpose(2, 3, 0, 1),
            r + r.transpose(0, 2, 3, 1) + r.transpose(0, 3, 1, 2),
        ]
        return max(float(np.max(np.abs(x))) for x in residuals)

    def einstein_divergence(self) -> np.ndarray:
        """∇^i G_ij = g^{ik} ∇_k R_ij − ½ ∂_j R."""
        ginv = np.linalg.inv(self.metric)
        return np.einsum("ik,ijk->j", ginv, self.nabla_ricci) - 0.5 * self.d_scalar

    def weyl_trace_residual(self) -> float:
        if self.weyl is None:
            raise UnsupportedDimensionError(f"no Weyl tensor in dimension {self.n}")
        ginv = np.linalg.inv(self.metric)
        traces = [
            np.einsum("ac,abcd->bd", ginv, self.weyl),
            np.einsum("ad,abcd->bc", ginv, self.weyl),
            np.einsum("bc,abcd->ad", ginv, self.weyl),
        ]
        return max(float(np.max(np.abs(t))) for t in traces)

    def weyl_mixed(self) -> np.ndarray:
        """W^a_{bcd}."""
        if self.weyl is None:
            raise UnsupportedDimensionError(f"no Weyl tensor in dimension {self.n}")
        return np.einsum("ae,ebcd->abcd", np.linalg.inv(self.metric), self.weyl)


def curvature_from_jet(jet: MetricJet) -> CurvatureReport:
    n = jet.n
    eye = np.eye(n)
    G = np.diag(jet.g)
    Ginv = np.diag(1.0 / jet.g)
    # ∂ of the full metric matrix: dG[a, b, k] = δ_ab ∂_k g_aa
    dG = np.einsum("ab,ak->abk", eye, jet.dg)
    ddG = np.einsum("ab,akl->abkl", eye, jet.d2g)
    dddG = np.einsum("ab,aklm->abklm", eye, jet.d3g)

    dGinv = -np.einsum("ac,cdk,db->abk", Ginv, dG, Ginv)
    ddGinv = -(
        np.einsum("acl,cdk,db->abkl", dGinv, dG, Ginv)
        + np.einsum("ac,cdkl,db->abkl", Ginv, ddG, Ginv)
        + np.einsum("ac,cdk,dbl->abkl", Ginv, dG, dGinv)
    )

    # Γ_{dbc} = ½(∂_b g_dc + ∂_c g_bd − ∂_d g_bc) and its derivatives
    low = _christoffel_lower(dG)
    dlow = _christoffel_lower(ddG)
    ddlow = _christoffel_lower(dddG)

    gamma = np.einsum("ad,dbc->abc", Ginv, low)
    dgamma = np.einsum("adk,dbc->abck", dGinv, low) + np.einsum("ad,dbck->abck", Ginv, dlow)
    ddgamma = (
        np.einsum("adkl,dbc->abckl", ddGinv, low)
        + np.einsum("adk,dbcl->abckl", dGinv, dlow)
        + np.einsum("adl,dbck->abckl", dGinv, dlow)
        + np.einsum("ad,dbckl->abckl", Ginv, ddlow)
    )

    riemann_up = (
        np.einsum("adbc->abcd", dgamma)
        - np.einsum("acbd->abcd", dgamma)
        + np.einsum("ace,edb->abcd", gamma, gamma)
        - np.einsum("ade,ecb->abcd", gamma, gamma)
    )
    d_riemann_up = (
        np.einsum("adbce->abcde", ddgamma)
        - np.einsum("acbde->abcde", ddgamma)
        + np.einsum("acfe,fdb->abcde", dgamma, gamma)
        + np.einsum("acf,fdbe->abcde", gamma, dgamma)
        - np.einsum("adfe,fcb->abcde", dgamma, gamma)
        - np.einsum("adf,fcbe->abcde", gamma, dgamma)
    )
    riemann = np.einsum("ae,ebcd->abcd", G, riemann_up)
    ricci = np.einsum("abad->bd", riemann_up)
    d_ricci = np.einsum("abade->bde", d_riemann_up)
    scalar = float(np.einsum("bd,bd->", Ginv, ricci))
    d_scalar = np.einsum("bde,bd->e", dGinv, ricci) + np.einsum("bd,bde->e", Ginv, d_ricci)

    # ∇_k R_ij stored as nabla_ricci[i, j, k]
    nabla_ricci = (
        d_ricci
        - np.einsum("mki,mj->ijk", gamma, ricci)
        - np.einsum("mkj,im->ijk", gamma, ricci)
    )

    cotton = weyl = None
    if n == 3:
        c = 1.0 / (2 * (n - 1))
        cotton = (
            nabla_ricci
            - nabla_ricci.transpose(0, 2, 1)
            + c * (np.einsum("j,ik->ijk", d_scalar, G) - np.einsum("k,ij->ijk", d_scalar, G))
        )
    elif n >= 4:
        weyl = (
            riemann
            - (
                np.einsum("ac,bd->abcd", ricci, G)
                - np.einsum("ad,bc->abcd", ricci, G)
                + np.einsum("bd,ac->abcd", ricci, G)
                - np.einsum("bc,ad->abcd", ricci, G)
            )
            / (n - 2)
            + scalar
            / ((n - 1) * (n - 2))
            * (np.einsum("ac,bd->abcd", G, G) - np.einsum("ad,bc->abcd", G, G))
        )

    return CurvatureReport(
        q=jet.q,
        metric=G,
        gamma=gamma,
        riemann=riemann,
        ricci=ricci,
        scalar=scalar,
        riemann_up=riemann_up,
        nabla_ricci=nabla_ricci,
        d_scalar=d_scalar,
        cotton=cotton,
        weyl=weyl,
    )


def _christoffel_lower(t: np.ndarray) -> np.ndarray:
    """½(∂_b g_dc + ∂_c g_bd − ∂_d g_bc) from t[x, y, z, ...] = ∂_z (∂...) g_xy.

    The result is indexed [d, b, c, ...] with any extra derivative axes kept
    in place after the first three.
    """
    extra = tuple(range(3, t.ndim))
    # t[d, c, b] = ∂_b g_dc ; t[b, d, c] = ∂_c g_bd ; t[b, c, d] = ∂_d g_bc
    term1 = t.transpose(0, 2, 1, *extra)
    term2 = t.transpose(1, 0, 2, *extra)
    term3 = t.transpose(2, 0, 1, *extra)
    return 0.5 * (term1 + term2 - term3)


def curvature(system: ChainSystem, q: Sequence[float]) -> CurvatureReport:
    return curvature_from_jet(metric_jet(system, q))


@dataclass(frozen=True)
class FlatnessVerdict:
    conformally_flat: bool
    flat: bool
    max_obstruction: float
    max_riemann: float
    points: int
    threshold: float


def flatness_verdict(
    system: ChainSystem,
    sample_count: int = DEFAULT_SAMPLES,
    seed: int = 0,
    threshold: float = FLATNESS_THRESHOLD,
) -> FlatnessVerdict:
    """Flat / conformally flat verdict from the worst frame components over seeded points."""
    if system.n < 3:
        raise UnsupportedDimensionError(f"conformal flatness is automatic in dimension {system.n}")
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    coords = sample_coordinates(system, make_rng(seed, _GEOMETRY_STREAM), sample_count)
    max_obstruction = max_riemann = 0.0
    for q in coords:
        report = curvature(system, q)
        max_obstruction = max(max_obstruction, report.obstruction_norm)
        max_riemann = max(max_riemann, report.riemann_norm)
    verdict = FlatnessVerdict(
        conformally_flat=max_obstruction <= threshold,
        flat=max_riemann <= threshold,
        max_obstruction=max_obstruction,
        max_riemann=max_riemann,
        points=sample_count,
        threshold=threshold,
    )
    logger.info(
        "flatness_verdict",
        n=system.n,
        conformally_flat=verdict.conformally_flat,
        flat=verdict.flat,
        max_obstruction=max_obstruction,
    )
    return verdict
