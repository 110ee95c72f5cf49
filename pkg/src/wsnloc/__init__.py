"""Deterministic range-based localization simulator for sensor networks.

Subpackages:

- ``core``: grid/geometry primitives shared by every scheme.
- ``bayes``: grid-based Bayesian constraint processing (the hybrid scheme's
  estimation core).
- ``mdsmap``: centralized multidimensional-scaling baseline.
- ``baselines``: decentralized baselines (diffusion, bounding box).
- ``network``: node roles, energy, messaging, failover, and the round loop.
- ``experiments``: run/sweep harness, error metrics, CSV output.
- ``service`` / ``cli``: HTTP service wrapper and its command-line client.
"""

__version__ = "0.1.0"
