"""Multi-connectivity channel assignment simulator and algorithm library.

Subpackages cover the SIR/outage radio model, scenario generation,
capacity/utility valuation, the eleven allocation algorithms (random,
selection-based, matching-based and auction-based families), an exact
0-1 solver for the winner determination problem, evaluation metrics and
a reproducible Monte Carlo harness with a CLI front end.
"""

__version__ = "0.1.0"
