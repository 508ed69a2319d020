"""The three training-free indicators and their aggregator.

Each indicator is an expectation over fresh parameter draws: every repeat
recompiles the net with a fresh seed and draws fresh batches, then the
repeats are averaged. Repeat i of any indicator derives all its randomness
from base_seed + i, so single indicators and the combined evaluate() see
identical values and reports are reproducible bit-for-bit.

- kappa:   condition number (largest/smallest eigenvalue) of the empirical
           NTK Gram J J^T built from per-sample Jacobian rows. Numerically
           singular kernels are capped, not errors.
- regions: number of distinct relu sign patterns over a probe batch, a
           linear-region count of the input space carved by the net.
- reg_mse: kernel regression through the last-layer feature Gram (+1 per
           entry for the classifier bias): fit train logits exactly up to
           ridge, report the mean L2 error on a held-out batch.

Failures inside a repeat (singular solve, eigensolver stall, non-finite
gradients) become capped sentinel values plus a flag; a search step never
aborts on them.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .data import BlobDataset
from .errors import DegenerateKernel, NoConvergence, NonFiniteGradient, SingularSystem
from .netgen import Architecture, CompiledNet, SearchSpace, arch_to_string
from .numkit import Rng, solve_spd, sym_eig
from .parallel import parallel_map

_KAPPA_STREAM, _REGION_STREAM, _MSE_STREAM = 0, 1, 2


@dataclass(frozen=True)
class IndicatorConfig:
    repeats: int = 3
    batch_train: int = 64
    batch_test: int = 64
    region_batch: int = 256
    ridge_rel: float = 1e-6
    kappa_cap: float = 1e12
    base_seed: int = 0
    region_inputs: str = "data"  # or "noise"
    mse_norm: str = "l2"         # or "sq"

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.batch_train < 2 or self.batch_test < 1 or self.region_batch < 1:
            raise ValueError("batch sizes out of range")
        if self.ridge_rel < 0:
            raise ValueError("ridge_rel must be >= 0")
        if self.region_inputs not in ("data", "noise"):
            raise ValueError(f"region_inputs must be data|noise, got {self.region_inputs!r}")
        if self.mse_norm not in ("l2", "sq"):
            raise ValueError(f"mse_norm must be l2|sq, got {self.mse_norm!r}")


@dataclass
class IndicatorReport:
    arch: str
    kappa: float
    regions: float
    mse: float
    per_repeat: dict = field(default_factory=dict)
    seeds: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "IndicatorReport":
        return cls(**json.loads(text))


# ---- pure numeric cores (unit-tested against hand arithmetic) ----

def condition_number(theta: np.ndarray, cap: float = 1e12) -> float:
    """lambda_max / lambda_min of a PSD kernel; capped when the smallest
    eigenvalue is within 1e-12 of numerically zero. A non-positive largest
    eigenvalue means the caller built the kernel wrong."""
    eig = sym_eig(theta)
    lam_max = float(eig.values[0])
    lam_min = float(eig.values[-1])
    if lam_max <= 0.0:
        raise DegenerateKernel(f"lambda_max = {lam_max:.3e} is not positive")
    if lam_min <= 1e-12 * lam_max:
        return cap
    return lam_max / lam_min


def count_patterns(bits: np.ndarray) -> int:
    """Distinct rows of a (B, N) boolean matrix; (B, 0) counts as one."""
    if bits.shape[0] == 0:
        raise ValueError("need at least one sample")
    if bits.shape[1] == 0:
        return 1
    packed = np.packbits(bits, axis=1)
    return int(np.unique(packed, axis=0).shape[0])


def kernel_regression_mse(
    f_train: np.ndarray,
    y_train: np.ndarray,
    f_test: np.ndarray,
    y_test: np.ndarray,
    ridge_rel: float = 1e-6,
    norm: str = "l2",
) -> float:
    """Last-layer NTK regression: predict test targets from the train Gram.

    Gram entries are f_i . f_j + 1 (the +1 is the classifier bias
    contribution). Ridge is ridge_rel * trace(G)/B. Error is the mean
    L2 norm over test rows ("sq" switches to mean squared norm).
    """
    b = f_train.shape[0]
    gram = f_train @ f_train.T + 1.0
    k_test = f_test @ f_train.T + 1.0
    ridge = ridge_rel * float(np.trace(gram)) / b
    alpha = solve_spd(gram, y_train, ridge)
    resid = k_test @ alpha - y_test
    norms = np.sqrt(np.sum(resid * resid, axis=1))
    if norm == "sq":
        return float(np.mean(norms ** 2))
    return float(np.mean(norms))


# ---- per-repeat bodies ----

def _repeat_rng(cfg: IndicatorConfig, repeat: int, stream: int) -> Rng:
    return Rng(cfg.base_seed + repeat, path=(stream,))


def _kappa_once(space, arch, data, cfg, repeat) -> float:
    rng = _repeat_rng(cfg, repeat, _KAPPA_STREAM)
    net = CompiledNet(space, arch, rng.child(0))
    x, _ = data.train_batch(rng.child(1), cfg.batch_train)
    jac = net.jacobian(x)
    theta = jac @ jac.T
    return condition_number(theta, cfg.kappa_cap)


def _regions_once(space, arch, data, cfg, repeat) -> float:
    rng = _repeat_rng(cfg, repeat, _REGION_STREAM)
    net = CompiledNet(space, arch, rng.child(0))
    x = data.region_batch(rng.child(1), cfg.region_batch, cfg.region_inputs)
    _, bits = net.forward(x)
    return float(count_patterns(bits))


def _mse_once(space, arch, data, cfg, repeat) -> float:
    rng = _repeat_rng(cfg, repeat, _MSE_STREAM)
    net = CompiledNet(space, arch, rng.child(0))
    x_tr, y_tr = data.train_batch(rng.child(1), cfg.batch_train)
    x_te, y_te = data.test_batch(rng.child(2), cfg.batch_test)
    return kernel_regression_mse(
        net.last_layer_features(x_tr),
        data.one_hot(y_tr),
        net.last_layer_features(x_te),
        data.one_hot(y_te),
        cfg.ridge_rel,
        cfg.mse_norm,
    )


_RECOVERABLE = (SingularSystem, NoConvergence, NonFiniteGradient)


def _guard(fn, space, arch, data, cfg, repeat, label, flags) -> float:
    try:
        return fn(space, arch, data, cfg, repeat)
    except _RECOVERABLE as err:
        flags.append(f"{label}_r{repeat}:{type(err).__name__}")
        return cfg.kappa_cap


# ---- public indicator ops ----

def kappa(arch, space, data, cfg: IndicatorConfig = IndicatorConfig()):
    """Mean NTK condition number over repeats; (value, per_repeat, flags)."""
    flags: list = []
    vals = [
        _guard(_kappa_once, space, arch, data, cfg, i, "kappa", flags)
        for i in range(cfg.repeats)
    ]
    return float(np.mean(vals)), vals, flags


def regions(arch, space, data, cfg: IndicatorConfig = IndicatorConfig()):
    """Mean distinct-activation-pattern count over repeats."""
    flags: list = []
    vals = [
        _guard(_regions_once, space, arch, data, cfg, i, "regions", flags)
        for i in range(cfg.repeats)
    ]
    return float(np.mean(vals)), vals, flags


def reg_mse(arch, space, data, cfg: IndicatorConfig = IndicatorConfig()):
    """Mean held-out kernel-regression error over repeats."""
    flags: list = []
    vals = [
        _guard(_mse_once, space, arch, data, cfg, i, "mse", flags)
        for i in range(cfg.repeats)
    ]
    return float(np.mean(vals)), vals, flags


def evaluate(
    arch: Architecture,
    space: SearchSpace,
    data: BlobDataset,
    cfg: IndicatorConfig = IndicatorConfig(),
    threads: int = 1,
) -> IndicatorReport:
    """All three indicators on one architecture.

    Repeats run as independent tasks (parallel if threads > 1) and merge by
    repeat index, so the report does not depend on scheduling.
    """

    def one_repeat(i: int):
        fl: list = []
        k = _guard(_kappa_once, space, arch, data, cfg, i, "kappa", fl)
        r = _guard(_regions_once, space, arch, data, cfg, i, "regions", fl)
        m = _guard(_mse_once, space, arch, data, cfg, i, "mse", fl)
        return k, r, m, fl

    rows = parallel_map(one_repeat, range(cfg.repeats), threads)
    ks = [r[0] for r in rows]
    rs = [r[1] for r in rows]
    ms = [r[2] for r in rows]
    flags = [f for r in rows for f in r[3]]
    return IndicatorReport(
        arch=arch_to_string(arch, space),
        kappa=float(np.mean(ks)),
        regions=float(np.mean(rs)),
        mse=float(np.mean(ms)),
        per_repeat={"kappa": ks, "regions": rs, "mse": ms},
        seeds=[cfg.base_seed + i for i in range(cfg.repeats)],
        flags=flags,
    )


class Evaluator:
    """Callable bundle of (space, data, config) used by the search loop."""

    def __init__(self, space: SearchSpace, data: BlobDataset, cfg: IndicatorConfig, threads: int = 1):
        self.space = space
        self.data = data
        self.cfg = cfg
        self.threads = threads

    def evaluate(self, arch: Architecture) -> IndicatorReport:
        return evaluate(arch, self.space, self.data, self.cfg, self.threads)


class TableEvaluator:
    """Evaluator backed by a precomputed {arch string: (kappa, regions, mse)}
    table; exact, instant, used for oracle-driven search tests."""

    def __init__(self, space: SearchSpace, table: dict):
        self.space = space
        self.table = table

    def evaluate(self, arch: Architecture) -> IndicatorReport:
        key = arch_to_string(arch, self.space)
        k, r, m = self.table[key]
        return IndicatorReport(
            arch=key, kappa=float(k), regions=float(r), mse=float(m),
            per_repeat={"kappa": [k], "regions": [r], "mse": [m]},
            seeds=[], flags=[],
        )


def table_from_reports(reports) -> dict:
    return {rep.arch: (rep.kappa, rep.regions, rep.mse) for rep in reports}
