# Experiment drivers and run orchestration
