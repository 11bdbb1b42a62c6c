"""medid: exact causal mediation analysis on finite structural models.

The package computes ground-truth potential-outcome means by exhaustive
counterfactual enumeration, evaluates the corresponding nonparametric
identification formulas from the observed law alone, assembles and audits
the assumption sets each estimand needs, and provides a seeded sampler with
plug-in estimation.
"""

__version__ = "1.0.0"
