"""Ground truth and analysis: a deterministic toy trainer for real
accuracies, a tabular-benchmark CSV loader, tie-corrected Kendall tau,
and the exclusive-subset / operator-preference analyses that probe what
each indicator selects for.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllTied,
    EmptySubset,
    LengthMismatch,
    ParseError,
    TooFewArchs,
    UnknownArch,
)
from .netgen import (
    CellArch,
    arch_from_string,
    cell_depth,
    compile_arch,
)
from .numkit import Rng
from .search import rank_sums


# ---- toy trainer ----


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - np.max(z, axis=1, keepdims=True))
    return e / np.sum(e, axis=1, keepdims=True)


def _accuracy(net, x: np.ndarray, labels: np.ndarray, batch: int = 128) -> float:
    hits = 0
    for i in range(0, len(x), batch):
        logits, _ = net.forward(x[i : i + batch])
        hits += int(np.sum(np.argmax(logits, axis=1) == labels[i : i + batch]))
    return 100.0 * hits / len(x)


def toy_train(
    arch,
    space,
    data,
    epochs: int = 8,
    rng: Rng = None,
    batch: int = 64,
    lr: float = 0.1,
) -> dict:
    """SGD with a cosine learning-rate schedule on the compiled net.

    Deterministic given rng: the init seed and every epoch's sample order
    derive from it. A non-finite loss aborts and returns a diverged row
    with zero accuracies instead of raising.
    """
    if rng is None:
        rng = Rng(0)
    net = compile_arch(space, arch, int(rng.child(0).integers(0, 2**31)))
    x_tr, y_tr = data.train_batch(rng.child(1), data.cfg.n_train)
    x_te, y_te = data.test_batch(rng.child(2), data.cfg.n_test)
    y_hot = data.one_hot(y_tr)

    theta = net.param_vector()
    steps_per_epoch = max(1, len(x_tr) // batch)
    total = epochs * steps_per_epoch
    step = 0
    for epoch in range(epochs):
        order = rng.child(3, epoch).permutation(len(x_tr))
        for s in range(steps_per_epoch):
            idx = order[s * batch : (s + 1) * batch]
            xb, yb = x_tr[idx], y_hot[idx]
            with np.errstate(all="ignore"):  # divergence handled below, not a warning
                logits, _ = net.forward(xb)
                probs = _softmax_rows(logits)
                loss = -float(np.mean(np.sum(yb * np.log(probs + 1e-12), axis=1)))
            if not math.isfinite(loss):
                return {"train_acc": 0.0, "test_acc": 0.0, "diverged": True}
            dlogits = (probs - yb) / len(xb)
            grads = net.grads(xb, dlogits)
            flat = np.concatenate([g.ravel() for g in grads])
            cur = lr * 0.5 * (1.0 + math.cos(math.pi * step / total))
            theta = theta - cur * flat
            net.set_param_vector(theta)
            step += 1

    return {
        "train_acc": _accuracy(net, x_tr, y_tr),
        "test_acc": _accuracy(net, x_te, y_te),
        "diverged": False,
    }


# ---- Kendall tau ----


def kendall_tau(xs, ys) -> float:
    """Tau-b (tie-corrected) by direct pair counting.

    Quadratic in n; fine for benchmark-table sizes. A variable with all
    values tied has no defined tau, which is an error here rather than NaN.
    """
    xs = [float(v) for v in xs]  # numpy scalars break bool arithmetic below
    ys = [float(v) for v in ys]
    if len(xs) != len(ys):
        raise LengthMismatch(f"{len(xs)} xs vs {len(ys)} ys")
    n = len(xs)
    if n < 2:
        raise AllTied("tau undefined for fewer than 2 points")
    conc = disc = tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = (xs[i] > xs[j]) - (xs[i] < xs[j])
            dy = (ys[i] > ys[j]) - (ys[i] < ys[j])
            if dx == 0 and dy == 0:
                tx += 1
                ty += 1
            elif dx == 0:
                tx += 1
            elif dy == 0:
                ty += 1
            elif dx == dy:
                conc += 1
            else:
                disc += 1
    n0 = n * (n - 1) // 2
    if tx == n0 or ty == n0:
        raise AllTied("one variable has all values tied")
    denom = math.sqrt(float(n0 - tx) * float(n0 - ty))
    return (conc - disc) / denom


# ---- exclusive subsets ----


@dataclass
class SubsetThresholds:
    kappa: float
    regions: float
    mse: float


@dataclass
class ExclusiveSubsets:
    a_kappa: list
    a_regions: list
    a_mse: list
    thresholds: SubsetThresholds
    pass_kappa: list = field(default_factory=list)
    pass_regions: list = field(default_factory=list)
    pass_mse: list = field(default_factory=list)


def _triple(rep) -> tuple:
    if isinstance(rep, tuple):
        return rep
    return (rep.kappa, rep.regions, rep.mse)


def exclusive_subsets(reports: dict) -> ExclusiveSubsets:
    """Split the top-10% sets of the three indicators into exclusive parts.

    The per-indicator pass set is the first ceil(0.1 N) archs sorted by
    (value, arch string) - best first, string order breaking value ties -
    and A_kappa keeps the kappa passers that pass neither of the other two
    (likewise for the others), so the three are disjoint by construction.
    """
    n = len(reports)
    if n < 10:
        raise TooFewArchs(f"need >= 10 archs, got {n}")
    m = math.ceil(0.1 * n)
    triples = {a: _triple(r) for a, r in reports.items()}

    by_kappa = sorted(triples, key=lambda a: (triples[a][0], a))[:m]
    by_regions = sorted(triples, key=lambda a: (-triples[a][1], a))[:m]
    by_mse = sorted(triples, key=lambda a: (triples[a][2], a))[:m]

    thresholds = SubsetThresholds(
        kappa=triples[by_kappa[-1]][0],
        regions=triples[by_regions[-1]][1],
        mse=triples[by_mse[-1]][2],
    )
    sk, sr, sm = set(by_kappa), set(by_regions), set(by_mse)
    return ExclusiveSubsets(
        a_kappa=sorted(sk - sr - sm),
        a_regions=sorted(sr - sk - sm),
        a_mse=sorted(sm - sk - sr),
        thresholds=thresholds,
        pass_kappa=by_kappa,
        pass_regions=by_regions,
        pass_mse=by_mse,
    )


def preference_stats(subset, space) -> dict:
    """Operator makeup of a subset: per-op fraction over all op slots plus
    the mean none-excluded longest-path depth."""
    archs = [
        arch_from_string(a, space) if isinstance(a, str) else a for a in subset
    ]
    if not archs:
        raise EmptySubset("no archs to profile")
    counts = {op: 0 for op in space.op_vocab}
    slots = 0
    for arch in archs:
        ops = arch.edge_ops if isinstance(arch, CellArch) else arch.vertex_ops
        for c in ops:
            counts[space.op_vocab[c]] += 1
            slots += 1
    depths = [cell_depth(a, space) for a in archs]
    return {
        "op_fractions": {op: counts[op] / slots for op in space.op_vocab},
        "mean_depth": float(np.mean(depths)),
    }


# ---- tabular benchmark ----


@dataclass
class TabularBench:
    space_id: str
    rows: dict  # arch string -> (train_acc, test_acc), insertion-ordered

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("arch,train_acc,test_acc\n")
            for arch, (tr, te) in self.rows.items():
                fh.write(f"{arch},{tr:.17g},{te:.17g}\n")


def load_tabular(path, space) -> TabularBench:
    """Read `arch,train_acc,test_acc` rows; every arch must parse in the
    declared space and accuracies must be percentages."""
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["arch", "train_acc", "test_acc"]:
            raise ParseError(f"bad header {header!r}", 0)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"row {lineno}: expected 3 fields", lineno)
            key, tr_s, te_s = row
            arch_from_string(key, space)  # raises ParseError on bad arch
            try:
                tr, te = float(tr_s), float(te_s)
            except ValueError:
                raise ParseError(f"row {lineno}: non-numeric accuracy", lineno)
            if not (0.0 <= tr <= 100.0 and 0.0 <= te <= 100.0):
                raise ParseError(
                    f"row {lineno}: accuracy outside [0, 100]", lineno
                )
            rows[key] = (tr, te)
    return TabularBench(space_id=space.kind, rows=rows)


def correlation_report(bench: TabularBench, reports: dict) -> dict:
    """Tau-b of each indicator (and of negated rank-sum) against both
    accuracies, over the archs present in `reports`.

    Rank-sum is negated so that, like regions, larger is predicted-better;
    an indicator with all values tied yields null taus instead of failing
    the whole report.
    """
    archs = list(reports)
    if len(archs) < 2:
        raise TooFewArchs("need >= 2 scored archs")
    for a in archs:
        if a not in bench.rows:
            raise UnknownArch(f"{a!r} missing from benchmark table")
    triples = [_triple(reports[a]) for a in archs]
    neg_rank = [-s for s in rank_sums(triples)]
    series = {
        "kappa": [t[0] for t in triples],
        "regions": [t[1] for t in triples],
        "mse": [t[2] for t in triples],
        "ranksum": neg_rank,
    }
    accs = {
        "train": [bench.rows[a][0] for a in archs],
        "test": [bench.rows[a][1] for a in archs],
    }
    taus = {}
    for name, vals in series.items():
        taus[name] = {}
        for which, acc in accs.items():
            try:
                taus[name][which] = kendall_tau(vals, acc)
            except AllTied:
                taus[name][which] = None
    return {"n": len(archs), "taus": taus}


def assemble_analysis(bench: TabularBench, reports: dict, space) -> dict:
    """Full analysis bundle: correlations, exclusive subsets, and the
    operator-preference profile of each subset."""
    out = correlation_report(bench, reports)
    try:
        subs = exclusive_subsets(reports)
    except TooFewArchs:
        out["subsets"] = None
        out["preference"] = None
        return out
    out["subsets"] = {
        "kappa": subs.a_kappa,
        "regions": subs.a_regions,
        "mse": subs.a_mse,
        "thresholds": {
            "kappa": subs.thresholds.kappa,
            "regions": subs.thresholds.regions,
            "mse": subs.thresholds.mse,
        },
    }
    pref = {}
    for name, members in (
        ("kappa", subs.a_kappa),
        ("regions", subs.a_regions),
        ("mse", subs.a_mse),
    ):
        try:
            pref[name] = preference_stats(members, space)
        except EmptySubset:
            pref[name] = None
    out["preference"] = pref
    return out
