"""Forward-mode differentiation and Poisson-bracket machinery."""
