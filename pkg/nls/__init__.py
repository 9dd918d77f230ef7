# Nonlinear Schrodinger solver
