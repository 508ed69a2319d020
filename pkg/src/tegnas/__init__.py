"""Training-free scoring and search for desk-scale neural architectures.

Subpackages and modules:

- ``numkit``     float64 numerics: symmetric eigensolver, SPD solves, PCA,
                 seeded splittable RNG, and the conv/pool kernels (compiled
                 extension when available, numpy fallback otherwise).
- ``netgen``     search spaces, architecture encoding, and compilation of
                 architectures into small ReLU conv nets with exact
                 reverse-mode Jacobians.
- ``indicators`` the three training-free scores: NTK condition number,
                 linear-region count, last-layer kernel-regression error.
- ``search``     reward shaping and the three search drivers (policy
                 gradient, aging evolution, adaptive-batch policy search).
- ``landscape``  checkpoint forking, trajectory projection, interpolation
                 profiles.
- ``bench``      toy ground-truth training, rank correlation, indicator
                 preference analysis.
- ``cli``        the ``tegnas`` command line tool.
"""

__version__ = "0.1.0"
