"""Search-landscape analysis: spawn paired child searches from a parent
checkpoint, project their policy/population trajectories to 2D with PCA,
score a background grid of architectures in the same basis, and profile
the indicator values along the straight-line interpolation between two
architecture distributions.

Everything here emits plot-ready numbers (landscape.csv, variance.json);
rendering is left to downstream tools.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCovariance, InvalidArch, NoCheckpoint
from .netgen import (
    arch_from_choices,
    arch_to_string,
    enumerate_archs,
    policy_blocks,
    random_arch,
    tokens,
)
from .numkit import Rng, pca_fit
from .search import Checkpoint, PolicyState, SearchResult, default_stop, run_search


@dataclass
class TrajectoryLog:
    """Ordered policy-distribution points of one run (or run segment)."""

    points: list
    steps: list
    run_id: str
    spawn: dict = None  # {"parent_step": t, "child_seed": s} for children

    def __post_init__(self):
        if len(self.points) != len(self.steps):
            raise ValueError("points and steps must align")

    def matrix(self) -> np.ndarray:
        return np.asarray(self.points, dtype=np.float64)


def check_trajectory(log: TrajectoryLog, space, tol: float = 1e-9) -> None:
    """Every per-block slice of every point must sum to 1 (a distribution)."""
    blocks = policy_blocks(space)
    offs = np.cumsum([0] + blocks)
    pts = log.matrix()
    for b in range(len(blocks)):
        sums = np.sum(pts[:, offs[b] : offs[b + 1]], axis=1)
        if np.any(np.abs(sums - 1.0) > tol):
            raise ValueError(f"block {b} of {log.run_id} is not normalized")


def trajectory_from_result(
    result: SearchResult, run_id: str, step0: int = 0, spawn: dict = None
) -> TrajectoryLog:
    """Wrap a SearchResult's trajectory; point i is the state after step
    step0 + i (point 0 is the initial or resumed state)."""
    steps = list(range(step0, step0 + len(result.trajectory)))
    return TrajectoryLog(
        points=list(result.trajectory), steps=steps, run_id=run_id, spawn=spawn
    )


def spawn_children(
    space, evaluator, ckpt: Checkpoint, seeds, steps: int, **kw
) -> tuple:
    """Resume a checkpointed search once per seed; the continuations share
    the checkpoint state exactly and diverge only through their RNG."""
    if ckpt is None:
        raise NoCheckpoint("no checkpoint to spawn from")
    runs = []
    for s in seeds:
        stop = default_stop(ckpt.method, hard_cap=steps)
        runs.append(
            run_search(
                ckpt.method,
                space,
                evaluator,
                stop=stop,
                rng=Rng(int(s)),
                resume=ckpt,
                **kw,
            )
        )
    return tuple(runs)


def one_hot_vector(space, arch) -> np.ndarray:
    """Concatenated one-hot blocks; an arch as a degenerate distribution."""
    blocks = policy_blocks(space)
    offs = np.cumsum([0] + blocks)
    v = np.zeros(offs[-1], dtype=np.float64)
    for b, c in enumerate(tokens(arch)):
        v[offs[b] + c] = 1.0
    return v


def grid_archs(space, n: int, seed: int = 0) -> list:
    """Deterministic background sample: the whole space when it enumerates
    to <= n archs, otherwise n distinct random draws."""
    if space.kind != "graph101":
        full = list(enumerate_archs(space))
        if len(full) <= n:
            return full
    rng = Rng(seed, path=(811,))
    seen = {}
    i = 0
    while len(seen) < n and i < 100 * n:
        arch = random_arch(space, rng.child(i))
        seen.setdefault(arch_to_string(arch, space), arch)
        i += 1
    return list(seen.values())


@dataclass
class ProjectedLandscape:
    projection: object
    ratios: np.ndarray
    paths: list  # (n_i, dims) arrays aligned with the input logs
    grid_keys: list
    grid_coords: np.ndarray


def project_trajectories(
    logs: list, grid: list, space, dims: int = 2
) -> ProjectedLandscape:
    """Fit PCA on the union of all trajectory points, then place both the
    trajectories and the one-hot-encoded grid archs in that basis."""
    for log in logs:
        check_trajectory(log, space)
    pts = np.vstack([log.matrix() for log in logs])
    proj = pca_fit(pts, dims=dims)
    if proj.degenerate:
        raise DegenerateCovariance("all trajectory points identical")
    paths = [proj.transform(log.matrix()) for log in logs]
    if grid:
        gvecs = np.vstack([one_hot_vector(space, a) for a in grid])
        gcoords = proj.transform(gvecs)
    else:
        gcoords = np.zeros((0, dims))
    keys = [arch_to_string(a, space) for a in grid]
    return ProjectedLandscape(
        projection=proj,
        ratios=proj.ratios,
        paths=paths,
        grid_keys=keys,
        grid_coords=gcoords,
    )


def _argmax_arch_of(space, mix: np.ndarray, fallback_seed: int):
    """Round a distribution vector to its per-block argmax arch; invalid
    graph roundings fall back to the best valid policy sample."""
    blocks = policy_blocks(space)
    offs = np.cumsum([0] + blocks)
    choices = [
        int(np.argmax(mix[offs[b] : offs[b + 1]])) for b in range(len(blocks))
    ]
    try:
        return arch_from_choices(space, choices)
    except InvalidArch:
        st = PolicyState(space, lr=0.0)
        st.logits = [
            np.log(np.maximum(mix[offs[b] : offs[b + 1]], 1e-12))
            for b in range(len(blocks))
        ]
        return st.argmax_arch(fallback_seed=fallback_seed)


def interpolation_profile(
    dist_a: np.ndarray, dist_b: np.ndarray, n: int, space, evaluator
) -> list:
    """Score the archs obtained by argmax-rounding the straight-line mix
    (1-alpha)a + alpha b at n evenly spaced alphas. Consecutive repeats of
    the same arch are not re-evaluated: their rows copy the previous values
    and carry collapsed=True."""
    if n < 2:
        raise ValueError("need at least the two endpoints")
    a = np.asarray(dist_a, dtype=np.float64)
    b = np.asarray(dist_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("endpoint distributions differ in dimension")
    rows = []
    prev_key = None
    prev_vals = None
    for i in range(n):
        alpha = i / (n - 1)
        mix = (1.0 - alpha) * a + alpha * b
        arch = _argmax_arch_of(space, mix, fallback_seed=i)
        key = arch_to_string(arch, space)
        if key == prev_key:
            vals = prev_vals
            collapsed = True
        else:
            rep = evaluator.evaluate(arch)
            vals = (rep.kappa, rep.regions, rep.mse)
            collapsed = False
        rows.append(
            {
                "alpha": alpha,
                "arch": key,
                "kappa": vals[0],
                "regions": vals[1],
                "mse": vals[2],
                "point": mix,
                "collapsed": collapsed,
            }
        )
        prev_key, prev_vals = key, vals
    return rows


# ---- plot-ready emission ----


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


@dataclass
class LandscapeRows:
    """Accumulates landscape.csv rows: arch,x,y,kappa,regions,mse,source."""

    rows: list = field(default_factory=list)

    def add(self, arch: str, xy, kappa, regions, mse, source: str) -> None:
        self.rows.append(
            (
                arch,
                _fmt(xy[0]),
                _fmt(xy[1]),
                _fmt(kappa),
                _fmt(regions),
                _fmt(mse),
                source,
            )
        )

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("arch,x,y,kappa,regions,mse,source\n")
            for row in self.rows:
                fh.write(",".join(row) + "\n")
