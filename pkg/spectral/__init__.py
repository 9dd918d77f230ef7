# Spectral geometry: torus, states, regions, propagator
