# Space-time norms and time quadrature
