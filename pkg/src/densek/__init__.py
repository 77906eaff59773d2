"""densek: a numerical laboratory for densest K-subgraph extremes of
weighted random graphs.

Subpackages by concern: disorder (instances), solver (exact/heuristic
maxima), asymptotics (closed forms), bounds (tail bounds and moment
estimators), lindeberg (smooth-max interpolation), ogp (overlap-gap
experiments), experiment/results (seeded sweeps and persistence).
"""

__version__ = "0.1.0"
