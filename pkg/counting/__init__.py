# Lattice counting and exponential sums
