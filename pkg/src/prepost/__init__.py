"""Pre- and post-selected ensembles, weak measurements and the quantum
time-translation machine, with a Jones-calculus model of the two-filter
retarder experiment."""

__version__ = "0.1.0"
