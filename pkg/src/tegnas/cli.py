"""Command-line front end: score archs, run searches, map landscapes,
train the toy benchmark and analyze correlations, with strict JSON
configuration and byte-reproducible artifacts.

Exit codes: 0 ok, 2 arch/CSV parse error, 3 config error, 4 runtime
error, 5 missing artifact. Every command honors --seed; wall-clock time
goes to a timing.json sidecar so artifact files stay byte-identical
across reruns and thread counts.
"""

import argparse
import copy
import json
import os
import sys
import time

import numpy as np

from . import __version__
from . import bench as bench_mod
from . import landscape as ls
from . import search as se
from .data import BlobDataset, DataConfig
from .errors import (
    ConfigError,
    NoCheckpoint,
    ParseError,
    TegnasError,
)
from .indicators import Evaluator, IndicatorConfig, IndicatorReport
from .netgen import (
    MacroConfig,
    arch_from_string,
    arch_to_string,
    enumerate_archs,
    random_arch,
    space_by_kind,
)
from .numkit import Rng
from .parallel import parallel_map, resolve_threads

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONFIG = 3
EXIT_RUNTIME = 4
EXIT_MISSING = 5

SPACES = ("cell201", "toyenum", "graph101")
METHODS = tuple(se.METHOD_DEFAULTS)

DEFAULTS = {
    "space": "toyenum",
    "threads": None,  # None -> TEGNAS_THREADS or 1
    "data": {
        "kind": "blobs",
        "n_train": 512,
        "n_test": 512,
        "classes": 10,
        "channels": 3,
        "size": 8,
        "noise": 0.25,
        "seed": 0,
    },
    "macro": {
        "in_channels": 3,
        "image_size": 8,
        "stem_channels": 8,
        "cells": 1,
        "classes": 10,
    },
    "indicators": {
        "repeats": 3,
        "batch_train": 64,
        "batch_test": 64,
        "region_batch": 256,
        "ridge_rel": 1e-6,
        "kappa_cap": 1e12,
        "base_seed": 0,
        "region_inputs": "data",
        "mse_norm": "l2",
    },
    "search": {
        "method": "reinforce",
        "seed": 0,
        "lr": None,  # None -> per-method default
        "lam": 0.25,
        "capacity": 256,
        "tournament": 64,
        "patience": 50,
        "min_rel_decrease": 1e-3,
        "hard_cap": None,  # None -> per-method default
        "literal_signs": False,
        "checkpoint_every": 50,
    },
    "landscape": {
        "grid": 512,
        "grid_seed": 0,
        "interp_points": 9,
        "spawn_step": 50,
        "child_seeds": [1, 2],
        "child_steps": 50,
    },
    "train": {
        "epochs": 8,
        "batch": 64,
        "lr": 0.1,
        "seeds": 5,
        "seed": 9000,
        "max_archs": 0,  # 0 = whole space (enumerable spaces only)
    },
}


# ---- config plumbing ----


def _check_section(defaults, given, path):
    if not isinstance(given, dict):
        raise ConfigError(f"{path or 'config'} must be an object")
    for key, val in given.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {path + key!r}")
        ref = defaults[key]
        if isinstance(ref, dict):
            _check_section(ref, val, path + key + ".")
        elif ref is None or val is None:
            continue
        elif isinstance(ref, bool):
            if not isinstance(val, bool):
                raise ConfigError(f"{path + key} must be a boolean")
        elif isinstance(ref, (int, float)):
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{path + key} must be a number")
        elif isinstance(ref, str):
            if not isinstance(val, str):
                raise ConfigError(f"{path + key} must be a string")
        elif isinstance(ref, list):
            if not isinstance(val, list):
                raise ConfigError(f"{path + key} must be a list")


def _deep_merge(base: dict, extra: dict) -> dict:
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(base.get(key), dict):
            _deep_merge(base[key], val)
        else:
            base[key] = val
    return base


def load_config(path=None, overrides=None) -> dict:
    """DEFAULTS <- config file <- flag overrides, strictly validated."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                file_cfg = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}")
        _check_section(DEFAULTS, file_cfg, "")
        _deep_merge(cfg, file_cfg)
    if overrides:
        _check_section(DEFAULTS, overrides, "")
        _deep_merge(cfg, overrides)
    if cfg["space"] not in SPACES:
        raise ConfigError(f"space must be one of {SPACES}, got {cfg['space']!r}")
    if cfg["search"]["method"] not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}")
    if cfg["macro"]["classes"] != cfg["data"]["classes"]:
        raise ConfigError("macro.classes must equal data.classes")
    return cfg


def build_stack(cfg: dict):
    """Config dict -> (space, data, indicator config); value errors from
    the dataclasses surface as config errors."""
    try:
        macro = MacroConfig(**cfg["macro"])
        space = space_by_kind(cfg["space"], macro)
        data = BlobDataset(DataConfig(**cfg["data"]))
        icfg = IndicatorConfig(**cfg["indicators"])
    except (ValueError, KeyError) as e:
        raise ConfigError(str(e))
    return space, data, icfg


def _collect_overrides(args, mapping) -> dict:
    """Map flag attributes into nested config keys when present."""
    out = {}
    for attr, path in mapping.items():
        val = getattr(args, attr, None)
        if val is None:
            continue
        node = out
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = val
    return out


def _archs_for(space, max_archs: int, seed: int) -> list:
    """The whole space when enumerable (and under any cap), else a
    deterministic sample of max_archs distinct archs."""
    if space.kind != "graph101":
        full = list(enumerate_archs(space))
        if max_archs and len(full) > max_archs:
            keys = Rng(seed, path=(813,)).permutation(len(full))[:max_archs]
            return [full[int(i)] for i in sorted(keys)]
        return full
    if not max_archs:
        raise ConfigError("graph101 does not enumerate; set train.max_archs")
    rng = Rng(seed, path=(813,))
    seen = {}
    i = 0
    while len(seen) < max_archs and i < 100 * max_archs:
        arch = random_arch(space, rng.child(i))
        seen.setdefault(arch_to_string(arch, space), arch)
        i += 1
    return list(seen.values())


# ---- commands ----


def _threads(args, cfg) -> int:
    """--threads flag, then TEGNAS_THREADS, then the config file, then 1."""
    if args.threads is not None:
        return resolve_threads(args.threads)
    if os.environ.get("TEGNAS_THREADS"):
        return resolve_threads(None)
    if cfg["threads"] is not None:
        return resolve_threads(cfg["threads"])
    return 1


def cmd_score(args) -> int:
    overrides = _collect_overrides(
        args,
        {
            "space": ("space",),
            "seed": ("indicators", "base_seed"),
            "repeats": ("indicators", "repeats"),
        },
    )
    cfg = load_config(args.config, overrides)
    threads = _threads(args, cfg)
    space, data, icfg = build_stack(cfg)
    ev = Evaluator(space, data, icfg, threads)

    if args.all:
        archs = _archs_for(space, args.max_archs or 0, icfg.base_seed)
        lines = parallel_map(
            lambda a: ev.evaluate(a).to_json(), archs, threads=1
        )
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
            print(f"scored {len(lines)} archs -> {args.out}")
        else:
            sys.stdout.write(text)
        return EXIT_OK

    if not args.arch:
        raise ConfigError("provide an arch string or --all")
    arch = arch_from_string(args.arch, space)
    print(ev.evaluate(arch).to_json())
    return EXIT_OK


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _search_artifacts(out_dir, cfg, result, wall: float) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _write_json(os.path.join(out_dir, "config.json"), cfg)
    result.log.write_jsonl(os.path.join(out_dir, "runlog.jsonl"))
    _write_json(
        os.path.join(out_dir, "result.json"),
        {
            "best_arch": result.best_arch,
            "stop_reason": result.stop_reason,
            "evaluations": result.evaluations,
        },
    )
    with open(os.path.join(out_dir, "trajectory.jsonl"), "w") as fh:
        start = result.log.entries[-1].t - result.steps if result.log.entries else 0
        for i, point in enumerate(result.trajectory):
            fh.write(
                json.dumps({"t": start + i, "point": list(map(float, point))})
                + "\n"
            )
    with open(os.path.join(out_dir, "checkpoints.jsonl"), "w") as fh:
        for ck in result.checkpoints:
            fh.write(ck.to_json() + "\n")
    _write_json(
        os.path.join(out_dir, "manifest.json"),
        {
            "version": __version__,
            "config": "config.json",
            "runlog": "runlog.jsonl",
            "result": "result.json",
            "trajectory": "trajectory.jsonl",
            "checkpoints": "checkpoints.jsonl",
        },
    )
    _write_json(os.path.join(out_dir, "timing.json"), {"wall_seconds": wall})


def cmd_search(args) -> int:
    overrides = _collect_overrides(
        args,
        {
            "space": ("space",),
            "method": ("search", "method"),
            "seed": ("search", "seed"),
            "steps": ("search", "hard_cap"),
            "lam": ("search", "lam"),
        },
    )
    cfg = load_config(args.config, overrides)
    threads = _threads(args, cfg)
    space, data, icfg = build_stack(cfg)
    ev = Evaluator(space, data, icfg, threads)
    sc = cfg["search"]
    method = sc["method"]
    stop = se.StopRule(
        metric=se.METHOD_DEFAULTS[method][0],
        patience=sc["patience"],
        min_rel_decrease=sc["min_rel_decrease"],
        hard_cap=int(sc["hard_cap"] or se.METHOD_DEFAULTS[method][1]),
    )
    t_start = time.perf_counter()
    result = se.run_search(
        method,
        space,
        ev,
        stop=stop,
        rng=Rng(int(sc["seed"])),
        lr=sc["lr"],
        lam=sc["lam"],
        capacity=int(sc["capacity"]),
        tournament=int(sc["tournament"]),
        literal_signs=bool(sc["literal_signs"]),
        checkpoint_every=int(sc["checkpoint_every"]),
    )
    wall = time.perf_counter() - t_start
    _search_artifacts(args.out, cfg, result, wall)
    print(f"derived {result.best_arch}")
    print(f"evaluations {result.evaluations}")
    print(f"stop {result.stop_reason}")
    return EXIT_OK


def _read_jsonl(path) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _arch_at_step(entries: list) -> dict:
    """Last logged evaluation per step index."""
    by_t = {}
    for e in entries:
        by_t[e["t"]] = e
    return by_t


def cmd_landscape(args) -> int:
    overrides = _collect_overrides(
        args,
        {
            "spawn_step": ("landscape", "spawn_step"),
            "grid": ("landscape", "grid"),
            "interp_points": ("landscape", "interp_points"),
            "child_steps": ("landscape", "child_steps"),
        },
    )
    if args.child_seeds is not None:
        overrides.setdefault("landscape", {})["child_seeds"] = args.child_seeds

    run_dir = args.run
    cfg_path = os.path.join(run_dir, "config.json")
    if not os.path.isfile(cfg_path):
        raise NoCheckpoint(f"no run artifact at {run_dir!r}")
    cfg = load_config(cfg_path, overrides)
    threads = _threads(args, cfg)
    space, data, icfg = build_stack(cfg)
    ev = Evaluator(space, data, icfg, threads)
    lc = cfg["landscape"]
    spawn_step = int(lc["spawn_step"])

    cks = [
        se.Checkpoint.from_json(json.dumps(d))
        for d in _read_jsonl(os.path.join(run_dir, "checkpoints.jsonl"))
    ]
    ckpt = next((c for c in cks if c.t == spawn_step), None)
    if ckpt is None:
        raise NoCheckpoint(
            f"no checkpoint at step {spawn_step} in {run_dir!r} "
            f"(available: {[c.t for c in cks]})"
        )

    seeds = list(lc["child_seeds"])[:2]
    child_steps = int(lc["child_steps"])
    c1, c2 = ls.spawn_children(space, ev, ckpt, seeds, steps=child_steps)

    traj_rows = _read_jsonl(os.path.join(run_dir, "trajectory.jsonl"))
    parent_pts = [
        np.asarray(r["point"]) for r in traj_rows if r["t"] <= spawn_step
    ]
    parent_log = _arch_at_step(_read_jsonl(os.path.join(run_dir, "runlog.jsonl")))

    tp = ls.TrajectoryLog(parent_pts, list(range(len(parent_pts))), "parent")
    t1 = ls.trajectory_from_result(
        c1, "child1", step0=spawn_step,
        spawn={"parent_step": spawn_step, "child_seed": seeds[0]},
    )
    t2 = ls.trajectory_from_result(
        c2, "child2", step0=spawn_step,
        spawn={"parent_step": spawn_step, "child_seed": seeds[1]},
    )

    grid = ls.grid_archs(space, int(lc["grid"]), seed=int(lc["grid_seed"]))
    proj = ls.project_trajectories([tp, t1, t2], grid, space)

    rows = ls.LandscapeRows()
    grid_reports = [ev.evaluate(a) for a in grid]
    for key, xy, rep in zip(proj.grid_keys, proj.grid_coords, grid_reports):
        rows.add(key, xy, rep.kappa, rep.regions, rep.mse, "grid")

    for t in range(1, len(parent_pts)):
        e = parent_log.get(t)
        if e is None:
            continue
        rows.add(
            e["arch"], proj.paths[0][t], e["kappa"], e["regions"], e["mse"],
            "parent",
        )
    for name, res, path in (("child1", c1, proj.paths[1]), ("child2", c2, proj.paths[2])):
        log = _arch_at_step([json.loads(e.to_json()) for e in res.log.entries])
        for i in range(1, len(res.trajectory)):
            e = log.get(spawn_step + i)
            if e is None:
                continue
            rows.add(
                e["arch"], path[i], e["kappa"], e["regions"], e["mse"], name
            )

    va = ls.one_hot_vector(space, arch_from_string(c1.best_arch, space))
    vb = ls.one_hot_vector(space, arch_from_string(c2.best_arch, space))
    profile = ls.interpolation_profile(
        va, vb, int(lc["interp_points"]), space, ev
    )
    for r in profile:
        xy = proj.projection.transform(r["point"][None, :])[0]
        rows.add(r["arch"], xy, r["kappa"], r["regions"], r["mse"], "interp")

    os.makedirs(args.out, exist_ok=True)
    rows.write_csv(os.path.join(args.out, "landscape.csv"))
    _write_json(
        os.path.join(args.out, "variance.json"),
        {"explained_variance_ratios": [float(r) for r in proj.ratios]},
    )
    print(f"rows {len(rows.rows)}")
    print("evr " + " ".join(f"{r:.12g}" for r in proj.ratios))
    return EXIT_OK


def cmd_analyze(args) -> int:
    overrides = _collect_overrides(args, {"space": ("space",)})
    cfg = load_config(args.config, overrides)
    space, _, _ = build_stack(cfg)
    reports = {}
    for d in _read_jsonl(args.scores):
        rep = IndicatorReport(**d)
        reports[rep.arch] = rep
    if args.bench:
        bench = bench_mod.load_tabular(args.bench, space)
        out = bench_mod.assemble_analysis(bench, reports, space)
    else:
        subs = bench_mod.exclusive_subsets(reports)
        out = {
            "n": len(reports),
            "subsets": {
                "kappa": subs.a_kappa,
                "regions": subs.a_regions,
                "mse": subs.a_mse,
                "thresholds": {
                    "kappa": subs.thresholds.kappa,
                    "regions": subs.thresholds.regions,
                    "mse": subs.thresholds.mse,
                },
            },
            "preference": {
                name: (
                    bench_mod.preference_stats(members, space)
                    if members
                    else None
                )
                for name, members in (
                    ("kappa", subs.a_kappa),
                    ("regions", subs.a_regions),
                    ("mse", subs.a_mse),
                )
            },
        }
    text = json.dumps(out, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"analysis -> {args.out}")
    else:
        print(text)
    return EXIT_OK


def cmd_bench_train(args) -> int:
    overrides = _collect_overrides(
        args,
        {
            "space": ("space",),
            "seed": ("train", "seed"),
            "epochs": ("train", "epochs"),
            "train_seeds": ("train", "seeds"),
            "max_archs": ("train", "max_archs"),
        },
    )
    cfg = load_config(args.config, overrides)
    threads = _threads(args, cfg)
    space, data, _ = build_stack(cfg)
    tc = cfg["train"]
    archs = _archs_for(space, int(tc["max_archs"]), int(tc["seed"]))

    def train_one(arch):
        trs, tes = [], []
        for s in range(int(tc["seeds"])):
            r = bench_mod.toy_train(
                arch,
                space,
                data,
                epochs=int(tc["epochs"]),
                rng=Rng(int(tc["seed"]) + s),
                batch=int(tc["batch"]),
                lr=float(tc["lr"]),
            )
            trs.append(r["train_acc"])
            tes.append(r["test_acc"])
        return (
            arch_to_string(arch, space),
            (float(np.mean(trs)), float(np.mean(tes))),
        )

    pairs = parallel_map(train_one, archs, threads)
    bench = bench_mod.TabularBench(space_id=space.kind, rows=dict(pairs))
    bench.save(args.out)
    print(f"rows {len(bench.rows)} -> {args.out}")
    return EXIT_OK


# ---- argument parsing ----


def _common(p, out_default=None):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--space", choices=SPACES, help="search space")
    p.add_argument("--seed", type=int, help="master seed for this command")
    p.add_argument(
        "--threads",
        type=int,
        help="worker threads (default: TEGNAS_THREADS or 1)",
    )
    if out_default is not None:
        p.add_argument("--out", default=out_default, help="output path")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tegnas",
        description="training-free architecture scoring, search and analysis",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="compute the three indicators")
    p.add_argument("arch", nargs="?", help="architecture string")
    p.add_argument("--all", action="store_true", help="score the whole space")
    p.add_argument("--max-archs", type=int, help="cap for --all sampling")
    p.add_argument("--repeats", type=int, help="indicator repeats")
    _common(p)
    p.add_argument("--out", help="write JSONL here instead of stdout")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("search", help="run one architecture search")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--steps", type=int, help="hard cap on steps")
    p.add_argument("--lam", type=float, help="fpnas sampling factor")
    _common(p, out_default="run")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("landscape", help="spawn children and map the space")
    p.add_argument("--run", required=True, help="parent search artifact dir")
    p.add_argument("--spawn-step", type=int, dest="spawn_step")
    p.add_argument("--child-seeds", type=int, nargs=2, dest="child_seeds")
    p.add_argument("--child-steps", type=int, dest="child_steps")
    p.add_argument("--grid", type=int, help="background grid size")
    p.add_argument("--interp-points", type=int, dest="interp_points")
    _common(p, out_default="landscape_out")
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("analyze", help="correlations and exclusive subsets")
    p.add_argument("--scores", required=True, help="IndicatorReport JSONL")
    p.add_argument("--bench", help="tabular benchmark CSV")
    _common(p)
    p.add_argument("--out", help="write the analysis JSON here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench-train", help="train a space into a CSV table")
    p.add_argument("--epochs", type=int)
    p.add_argument("--train-seeds", type=int, dest="train_seeds")
    p.add_argument("--max-archs", type=int, dest="max_archs")
    _common(p, out_default="bench.csv")
    p.set_defaults(func=cmd_bench_train)

    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NoCheckpoint as e:
        print(f"missing artifact: {e}", file=sys.stderr)
        return EXIT_MISSING
    except FileNotFoundError as e:
        print(f"missing artifact: {e}", file=sys.stderr)
        return EXIT_MISSING
    except TegnasError as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
