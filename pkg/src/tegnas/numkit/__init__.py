"""Float64 numerics: kernels, eigensolver, SPD solves, PCA, seeded RNG.

The conv/pool/Jacobi kernels exist twice: a compiled Cython extension and
a vectorized numpy fallback. `backend_name()` reports which one this
process is using; TEGNAS_BACKEND=python|compiled overrides the choice.
All operations are pure functions on immutable inputs.
"""
from . import _active
from .linalg import EigResult, solve_spd, sym_eig
from .pca import Projection, pca_fit, pca_project
from .rng import Rng, kaiming_normal

kernels = _active.kernels


def backend_name() -> str:
    return _active.name


def conv2d_forward(x, w):
    return _active.kernels.conv2d_forward(x, w)


def conv2d_grad_input(g, w):
    return _active.kernels.conv2d_grad_input(g, w)


def conv2d_grad_weight(x, g, kh, kw):
    return _active.kernels.conv2d_grad_weight(x, g, kh, kw)


def conv2d_grad_weight_batched(x, g, kh, kw):
    return _active.kernels.conv2d_grad_weight_batched(x, g, kh, kw)


def avgpool3x3_forward(x):
    return _active.kernels.avgpool3x3_forward(x)


def avgpool3x3_grad(g):
    return _active.kernels.avgpool3x3_grad(g)


__all__ = [
    "EigResult",
    "Projection",
    "Rng",
    "avgpool3x3_forward",
    "avgpool3x3_grad",
    "backend_name",
    "conv2d_forward",
    "conv2d_grad_input",
    "conv2d_grad_weight",
    "conv2d_grad_weight_batched",
    "kaiming_normal",
    "kernels",
    "pca_fit",
    "pca_project",
    "solve_spd",
    "sym_eig",
]
