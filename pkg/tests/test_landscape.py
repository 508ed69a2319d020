"""Landscape analysis tests.

Trajectory projection is checked on synthetic distribution paths whose
geometry is known in closed form (a straight segment in distribution
space must land on a single principal axis), and child spawning is
checked for the exact share-then-diverge contract.
"""
import numpy as np
import pytest

import tegnas.landscape as ls
import tegnas.netgen as ng
import tegnas.search as se
from tegnas.errors import DegenerateCovariance, NoCheckpoint
from tegnas.indicators import TableEvaluator
from tegnas.numkit import Rng


def synth_table(space):
    table = {}
    for arch in ng.enumerate_archs(space):
        a, b, c = ng.tokens(arch)
        key = ng.arch_to_string(arch, space)
        table[key] = (100.0 - 10.0 * (a + b + c) + a, float(a + b + c), 10.0 - (b + c))
    return table


@pytest.fixture(scope="module")
def table_eval(toy_space):
    return TableEvaluator(toy_space, synth_table(toy_space))


def dist_point(per_block):
    """Concatenate per-block distributions into one trajectory point."""
    return np.concatenate([np.asarray(p, dtype=np.float64) for p in per_block])


def segment_log(u, v, n, run_id="seg"):
    pts = [(1 - a) * u + a * v for a in np.linspace(0.0, 1.0, n)]
    return ls.TrajectoryLog(points=pts, steps=list(range(n)), run_id=run_id)


U = dist_point([[1.0, 0.0, 0.0]] * 3)
V = dist_point([[0.0, 0.0, 1.0]] * 3)
W = dist_point([[0.0, 1.0, 0.0], [1 / 3, 1 / 3, 1 / 3], [0.5, 0.5, 0.0]])


# ---- trajectory containers ----

def test_trajectory_log_requires_aligned_steps():
    with pytest.raises(ValueError):
        ls.TrajectoryLog(points=[U, V], steps=[0], run_id="bad")


def test_check_trajectory_rejects_unnormalized_blocks(toy_space):
    log = ls.TrajectoryLog(points=[U + 0.1], steps=[0], run_id="bad")
    with pytest.raises(ValueError, match="not normalized"):
        ls.check_trajectory(log, toy_space)
    ls.check_trajectory(segment_log(U, V, 5), toy_space)  # mixes stay valid


def test_trajectory_from_result_offsets_steps(table_eval, toy_space):
    res = se.run_search(
        "reinforce", toy_space, table_eval,
        stop=se.StopRule(patience=100, hard_cap=5), rng=Rng(0),
    )
    log = ls.trajectory_from_result(res, "parent", step0=7)
    assert log.steps == [7, 8, 9, 10, 11, 12]
    assert len(log.points) == 6


# ---- one-hot helpers and grids ----

def test_one_hot_vector_round_trip(toy_space):
    a = ng.arch_from_string("|nor_conv_3x3~0|+|none~0|skip_connect~1|", toy_space)
    v = ls.one_hot_vector(toy_space, a)
    assert v.shape == (9,)
    assert np.array_equal(v.reshape(3, 3).argmax(axis=1),
                          np.array(ng.choices_from_arch(a)))
    assert np.all(v.reshape(3, 3).sum(axis=1) == 1.0)


def test_grid_archs_enumerates_small_spaces(toy_space):
    grid = ls.grid_archs(toy_space, 512)
    assert len(grid) == 27
    keys = [ng.arch_to_string(a, toy_space) for a in grid]
    assert len(set(keys)) == 27
    sub = ls.grid_archs(toy_space, 10)
    assert len(sub) == 10
    assert len({ng.arch_to_string(a, toy_space) for a in sub}) == 10


def test_grid_archs_graph_draws_distinct(graph_space):
    grid = ls.grid_archs(graph_space, 20, seed=3)
    assert len(grid) == 20
    keys = {ng.arch_to_string(a, graph_space) for a in grid}
    assert len(keys) == 20
    again = ls.grid_archs(graph_space, 20, seed=3)
    assert [ng.arch_to_string(a, graph_space) for a in again] == [
        ng.arch_to_string(a, graph_space) for a in grid
    ]


# ---- projection ----

def test_straight_segment_projects_to_one_axis(toy_space):
    log = segment_log(U, V, 9)
    land = ls.project_trajectories([log], [], toy_space)
    assert land.ratios[0] == pytest.approx(1.0, abs=1e-12)
    assert land.ratios[1] == pytest.approx(0.0, abs=1e-12)
    path = land.paths[0]
    assert np.max(np.abs(path[:, 1])) < 1e-9
    # evenly spaced alphas stay evenly spaced under a linear map
    gaps = np.diff(path[:, 0])
    assert np.allclose(gaps, gaps[0], atol=1e-9)


def test_projection_consistent_between_paths_and_grid(toy_space, table_eval):
    # a grid arch whose one-hot vector equals a trajectory point must land
    # on the same 2-D coordinates
    arch = ng.arch_from_string("|none~0|+|none~0|none~1|", toy_space)
    hot = ls.one_hot_vector(toy_space, arch)
    log = ls.TrajectoryLog(
        points=[hot, U, V, W], steps=[0, 1, 2, 3], run_id="p"
    )
    land = ls.project_trajectories([log], ls.grid_archs(toy_space, 27), toy_space)
    key = ng.arch_to_string(arch, toy_space)
    gi = land.grid_keys.index(key)
    assert np.allclose(land.grid_coords[gi], land.paths[0][0], atol=1e-9)


def test_projection_ignores_input_order(toy_space):
    pts = [U, V, W, dist_point([[0.2, 0.3, 0.5]] * 3)]
    a = ls.project_trajectories(
        [ls.TrajectoryLog(points=pts, steps=[0, 1, 2, 3], run_id="a")], [], toy_space
    )
    b = ls.project_trajectories(
        [ls.TrajectoryLog(points=pts[::-1], steps=[0, 1, 2, 3], run_id="b")], [], toy_space
    )
    # same point set, same covariance: identical basis and ratios
    assert np.allclose(a.ratios, b.ratios, atol=1e-12)
    assert np.allclose(a.paths[0], b.paths[0][::-1], atol=1e-9)


def test_projection_multiple_logs_share_basis(toy_space):
    l1 = segment_log(U, V, 5, "one")
    l2 = segment_log(U, W, 5, "two")
    land = ls.project_trajectories([l1, l2], [], toy_space)
    assert len(land.paths) == 2
    # both paths start at the same point
    assert np.allclose(land.paths[0][0], land.paths[1][0], atol=1e-12)
    assert land.ratios[0] >= land.ratios[1] >= 0.0


def test_degenerate_trajectories_raise(toy_space):
    log = ls.TrajectoryLog(points=[U, U, U], steps=[0, 1, 2], run_id="const")
    with pytest.raises(DegenerateCovariance):
        ls.project_trajectories([log], [], toy_space)


# ---- spawning ----

def parent_run(table_eval, toy_space, seed=42, cap=20, every=10):
    return se.run_search(
        "reinforce", toy_space, table_eval,
        stop=se.StopRule(patience=100, hard_cap=cap),
        rng=Rng(seed), checkpoint_every=every,
    )


def test_spawn_requires_checkpoint(toy_space, table_eval):
    with pytest.raises(NoCheckpoint):
        ls.spawn_children(toy_space, table_eval, None, [1, 2], 5)


def test_spawn_children_share_then_diverge(toy_space, table_eval):
    full = parent_run(table_eval, toy_space)
    ck = full.checkpoints[0]
    c1, c2 = ls.spawn_children(toy_space, table_eval, ck, [1, 2], 10)
    # both children resume from the identical state vector
    assert np.array_equal(c1.trajectory[0], c2.trajectory[0])
    assert np.array_equal(c1.trajectory[0], full.trajectory[ck.t])
    # different seeds diverge after the first step (with overwhelming
    # probability; this instance is pinned by the seeds)
    assert not np.array_equal(c1.trajectory[1], c2.trajectory[1])
    assert c1.steps == c2.steps == 10


def test_spawn_same_seed_twice_identical(toy_space, table_eval):
    full = parent_run(table_eval, toy_space)
    ck = full.checkpoints[0]
    a, = ls.spawn_children(toy_space, table_eval, ck, [5], 8)
    b, = ls.spawn_children(toy_space, table_eval, ck, [5], 8)
    assert [e.to_json() for e in a.log.entries] == [e.to_json() for e in b.log.entries]
    assert all(np.array_equal(x, y) for x, y in zip(a.trajectory, b.trajectory))
    assert a.best_arch == b.best_arch


def test_spawn_with_parent_seed_replays_parent(toy_space, table_eval):
    full = parent_run(table_eval, toy_space, seed=42, cap=20, every=10)
    ck = full.checkpoints[0]
    child, = ls.spawn_children(toy_space, table_eval, ck, [42], 10)
    tail = [e.to_json() for e in full.log.entries if e.t > 10]
    assert [e.to_json() for e in child.log.entries] == tail


# ---- interpolation ----

def test_interpolation_endpoints_match_oracle(toy_space, table_eval):
    a = ng.arch_from_string("|none~0|+|none~0|none~1|", toy_space)
    b = ng.arch_from_string(
        "|nor_conv_3x3~0|+|nor_conv_3x3~0|nor_conv_3x3~1|", toy_space
    )
    rows = ls.interpolation_profile(
        ls.one_hot_vector(toy_space, a), ls.one_hot_vector(toy_space, b),
        5, toy_space, table_eval,
    )
    assert len(rows) == 5
    assert rows[0]["arch"] == ng.arch_to_string(a, toy_space)
    assert rows[-1]["arch"] == ng.arch_to_string(b, toy_space)
    table = synth_table(toy_space)
    for row in rows:
        k, r, m = table[row["arch"]]
        assert (row["kappa"], row["regions"], row["mse"]) == (k, r, m)
    assert [row["alpha"] for row in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert not rows[0]["collapsed"]


def test_interpolation_same_endpoints_collapse(toy_space, table_eval):
    v = ls.one_hot_vector(
        toy_space, ng.arch_from_string("|skip_connect~0|+|none~0|skip_connect~1|", toy_space)
    )
    rows = ls.interpolation_profile(v, v, 4, toy_space, table_eval)
    assert [row["collapsed"] for row in rows] == [False, True, True, True]
    assert len({row["arch"] for row in rows}) == 1
    vals = {(row["kappa"], row["regions"], row["mse"]) for row in rows}
    assert len(vals) == 1


def test_interpolation_midpoint_tie_takes_first_argmax(toy_space, table_eval):
    a = ng.arch_from_string("|none~0|+|none~0|none~1|", toy_space)
    b = ng.arch_from_string(
        "|nor_conv_3x3~0|+|nor_conv_3x3~0|nor_conv_3x3~1|", toy_space
    )
    rows = ls.interpolation_profile(
        ls.one_hot_vector(toy_space, a), ls.one_hot_vector(toy_space, b),
        3, toy_space, table_eval,
    )
    # alpha = 0.5 mixes 0.5/0.5 per block; np.argmax takes the first index,
    # which is the 'none' op
    assert rows[1]["arch"] == ng.arch_to_string(a, toy_space)
    assert rows[1]["collapsed"] is True


def test_interpolation_rejects_bad_inputs(toy_space, table_eval):
    v = ls.one_hot_vector(
        toy_space, ng.arch_from_string("|none~0|+|none~0|none~1|", toy_space)
    )
    with pytest.raises(ValueError):
        ls.interpolation_profile(v, v, 1, toy_space, table_eval)
    with pytest.raises(ValueError):
        ls.interpolation_profile(v, v[:6], 3, toy_space, table_eval)


# ---- csv emission ----

def test_landscape_rows_format(tmp_path):
    rows = ls.LandscapeRows()
    rows.add("|none~0|+|none~0|none~1|", (0.125, -2.0), 1e12, 1.0, 0.5, "grid")
    path = tmp_path / "landscape.csv"
    rows.write_csv(path)
    text = path.read_text().splitlines()
    assert text[0] == "arch,x,y,kappa,regions,mse,source"
    assert text[1] == "|none~0|+|none~0|none~1|,0.125,-2,1000000000000,1,0.5,grid"
