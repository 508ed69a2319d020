"""Unified training-free architecture search driver.

Three methods share one loop skeleton (sample -> score -> update -> stop
check) and consume IndicatorReports as their only feedback: a REINFORCE
policy gradient over factorized categorical logits, aging evolution with
rank-sum tournaments, and FP-NAS style batched likelihood ascent. Rewards
are running-range-normalized deltas of the three indicators; by default
low kappa, high region count and low mse are good.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArch, NonFiniteGradient, SamplingExhausted
from .netgen import (
    arch_from_choices,
    arch_from_string,
    arch_to_string,
    choices_from_arch,
    mutate,
    policy_blocks,
    random_arch,
    tokens,
)
from .numkit import Rng

# reward orientation: kappa and mse fall as quality rises, regions climbs
DEFAULT_SIGNS = {"kappa": -1.0, "regions": 1.0, "mse": -1.0}

# per-method defaults: (stop metric, hard cap, policy learning rate)
METHOD_DEFAULTS = {
    "reinforce": ("policy_entropy", 500, 0.04),
    "evolution": ("population_diversity", 1000, None),
    "fpnas": ("arch_param_entropy", 100, 0.1),
}


class RewardNormalizer:
    """Running-range delta normalizer for the composite reward.

    Each indicator contributes sign * (v_t - v_{t-1}) / (max_t - min_t)
    where max/min run over the whole history including the current value.
    First observation and zero-range cases contribute 0; every term is
    clamped to [-1, 1]. State is a pure function of the observation
    sequence, so replaying a run log reproduces rewards bit-exactly.
    """

    def __init__(self, literal_signs: bool = False):
        # literal_signs keeps the raw printed orientation (all +1) for ablation
        if literal_signs:
            self.signs = {k: 1.0 for k in DEFAULT_SIGNS}
        else:
            self.signs = dict(DEFAULT_SIGNS)
        self._state = {}  # name -> [prev, vmin, vmax]

    def term(self, name: str, value: float) -> float:
        value = float(value)
        st = self._state.get(name)
        if st is None:
            self._state[name] = [value, value, value]
            return 0.0
        prev, vmin, vmax = st
        vmin = min(vmin, value)
        vmax = max(vmax, value)
        self._state[name] = [value, vmin, vmax]
        spread = vmax - vmin
        if spread < 1e-12:
            return 0.0
        raw = (value - prev) / spread
        return self.signs[name] * max(-1.0, min(1.0, raw))

    def observe(self, report) -> float:
        return (
            self.term("kappa", report.kappa)
            + self.term("regions", report.regions)
            + self.term("mse", report.mse)
        )

    def to_dict(self) -> dict:
        return {
            "signs": dict(self.signs),
            "state": {k: list(v) for k, v in self._state.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RewardNormalizer":
        norm = cls()
        norm.signs = dict(d["signs"])
        norm._state = {k: [float(x) for x in v] for k, v in d["state"].items()}
        return norm


def teg_reward(norm: RewardNormalizer, report) -> float:
    """Composite reward r = r_kappa + r_regions + r_mse for one report."""
    return norm.observe(report)


def _softmax(logits: np.ndarray) -> np.ndarray:
    e = np.exp(logits - np.max(logits))
    return e / np.sum(e)


def block_entropy(probs: list) -> float:
    """Entropy of a factorized distribution: sum over blocks of -sum p ln p."""
    h = 0.0
    for p in probs:
        p = np.asarray(p, dtype=float)
        nz = p[p > 0.0]
        h -= float(np.sum(nz * np.log(nz)))
    return h


class PolicyState:
    """Factorized categorical policy: one logit vector per edge/bit/op slot."""

    def __init__(self, space, lr: float, baseline: float = 0.0, decay: float = 0.9):
        self.space = space
        self.blocks = policy_blocks(space)
        self.logits = [np.zeros(k, dtype=np.float64) for k in self.blocks]
        self.lr = float(lr)
        self.baseline = float(baseline)
        self.decay = float(decay)
        self.step = 0

    def probs(self) -> list:
        return [_softmax(v) for v in self.logits]

    def entropy(self) -> float:
        return block_entropy(self.probs())

    def vector(self) -> np.ndarray:
        """Concatenated per-block softmax; the trajectory coordinate."""
        return np.concatenate(self.probs())

    def sample(self, rng: Rng, max_tries: int = 1000):
        """Draw an arch from the policy; invalid graph draws are rejected."""
        probs = self.probs()
        for _ in range(max_tries):
            us = rng.uniform(size=len(probs))
            choices = [
                int(np.searchsorted(np.cumsum(p), u, side="right"))
                for p, u in zip(probs, us)
            ]
            choices = [min(c, len(p) - 1) for c, p in zip(choices, probs)]
            try:
                return arch_from_choices(self.space, choices)
            except InvalidArch:
                continue
        raise SamplingExhausted(f"no valid draw in {max_tries} tries")

    def argmax_arch(self, fallback_seed: int = 0, draws: int = 512):
        """Most probable choice per block; for constrained graph spaces an
        invalid argmax falls back to the best of `draws` valid policy samples
        (deterministic given fallback_seed)."""
        choices = [int(np.argmax(v)) for v in self.logits]
        try:
            return arch_from_choices(self.space, choices)
        except InvalidArch:
            pass
        probs = self.probs()
        rng = Rng(fallback_seed, path=(977,))
        best, best_lp = None, -math.inf
        for _ in range(draws):
            try:
                arch = self.sample(rng.child(_))
            except SamplingExhausted:
                continue
            lp = sum(
                math.log(p[c]) for p, c in zip(probs, choices_from_arch(arch))
            )
            if lp > best_lp:
                best, best_lp = arch, lp
        if best is None:
            raise SamplingExhausted("no valid arch found for derivation")
        return best

    def apply_gradient(self, weighted_choices: list) -> None:
        """theta += lr * sum_i w_i * (onehot(choices_i) - p) per block."""
        probs = self.probs()
        for b, p in enumerate(probs):
            g = np.zeros_like(p)
            for choices, w in weighted_choices:
                onehot = np.zeros_like(p)
                onehot[choices[b]] = 1.0
                g += w * (onehot - p)
            self.logits[b] = self.logits[b] + self.lr * g
            if not np.all(np.isfinite(self.logits[b])):
                raise NonFiniteGradient(f"policy block {b} left finite range")

    def to_dict(self) -> dict:
        return {
            "logits": [v.tolist() for v in self.logits],
            "lr": self.lr,
            "baseline": self.baseline,
            "decay": self.decay,
            "step": self.step,
        }

    @classmethod
    def from_dict(cls, space, d: dict) -> "PolicyState":
        st = cls(space, lr=d["lr"], baseline=d["baseline"], decay=d["decay"])
        st.logits = [np.asarray(v, dtype=np.float64) for v in d["logits"]]
        st.step = int(d["step"])
        return st


def reinforce_step(state: PolicyState, report, norm: RewardNormalizer):
    """One policy-gradient update; returns (state, reward).

    Baseline EMA updates first (b <- 0.9 b + 0.1 r), then the advantage
    r - b uses the fresh baseline; the log-prob gradient of the sampled
    arch is scaled by it.
    """
    r = teg_reward(norm, report)
    state.baseline = state.decay * state.baseline + (1.0 - state.decay) * r
    adv = r - state.baseline
    choices = choices_from_arch(arch_from_string(report.arch, state.space))
    state.apply_gradient([(choices, adv)])
    state.step += 1
    return state, r


class FpState(PolicyState):
    """Policy state plus FP-NAS batch-size rule: |A_t| = max(1, round(lam*H))."""

    def __init__(self, space, lr: float = 0.1, lam: float = 0.25):
        super().__init__(space, lr=lr)
        self.lam = float(lam)

    def batch_size(self) -> int:
        h = self.entropy()
        # round half away from zero so the count is platform-stable
        return max(1, int(math.floor(self.lam * h + 0.5)))

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["lam"] = self.lam
        return d

    @classmethod
    def from_dict(cls, space, d: dict) -> "FpState":
        st = cls(space, lr=d["lr"], lam=d["lam"])
        st.logits = [np.asarray(v, dtype=np.float64) for v in d["logits"]]
        st.baseline = float(d["baseline"])
        st.step = int(d["step"])
        return st


def fp_step(state: FpState, space, evaluator, norm: RewardNormalizer, rng: Rng):
    """One FP-NAS epoch: sample a batch, weight rewards by softmax within
    the batch, ascend the weighted log-likelihood. Returns
    (state, [(report, reward)]). Draws are iid so repeats can occur."""
    n = state.batch_size()
    archs = [state.sample(rng.child(i)) for i in range(n)]
    reports = [evaluator.evaluate(a) for a in archs]
    rewards = [teg_reward(norm, rep) for rep in reports]
    w = _softmax(np.asarray(rewards, dtype=np.float64))
    state.apply_gradient(
        [(choices_from_arch(a), float(wi)) for a, wi in zip(archs, w)]
    )
    state.step += 1
    return state, list(zip(reports, rewards))


# ---- aging evolution ----


@dataclass
class Member:
    arch: object
    key: str
    kappa: float
    regions: float
    mse: float
    age: int


def _avg_ranks(values: list) -> list:
    """1-based average ranks, ascending; equal values share their mean rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def rank_sums(triples: list) -> list:
    """Rank-sum fitness per (kappa, regions, mse) triple; lower is better.

    kappa ascending + regions descending + mse ascending, average ranks
    on ties. This single definition serves the tournament, final-arch
    derivation and the benchmark correlation report.
    """
    ks = _avg_ranks([t[0] for t in triples])
    rs = _avg_ranks([-t[1] for t in triples])
    ms = _avg_ranks([t[2] for t in triples])
    return [a + b + c for a, b, c in zip(ks, rs, ms)]


def best_by_rank_sum(members: list) -> "Member":
    """Winner under rank-sum; ties broken by lower kappa then string order."""
    sums = rank_sums([(m.kappa, m.regions, m.mse) for m in members])
    best_i = min(
        range(len(members)),
        key=lambda i: (sums[i], members[i].kappa, members[i].key),
    )
    return members[best_i]


class Population:
    """Aging queue of members; push appends, the oldest falls off the front."""

    def __init__(self, capacity: int = 256, tournament: int = 64):
        if tournament > capacity:
            raise ValueError("tournament size exceeds capacity")
        self.capacity = capacity
        self.tournament = tournament
        self.members: list = []
        self._next_age = 0

    def push(self, arch, space, report) -> None:
        self.members.append(
            Member(
                arch=arch,
                key=arch_to_string(arch, space),
                kappa=report.kappa,
                regions=report.regions,
                mse=report.mse,
                age=self._next_age,
            )
        )
        self._next_age += 1
        if len(self.members) > self.capacity:
            self.members.pop(0)

    def vector(self, space) -> np.ndarray:
        """Mean one-hot encoding of the members; the trajectory coordinate."""
        blocks = policy_blocks(space)
        offs = np.cumsum([0] + blocks)
        v = np.zeros(offs[-1], dtype=np.float64)
        for m in self.members:
            for b, c in enumerate(tokens(m.arch)):
                v[offs[b] + c] += 1.0
        return v / max(1, len(self.members))

    def to_dict(self, space) -> dict:
        return {
            "capacity": self.capacity,
            "tournament": self.tournament,
            "next_age": self._next_age,
            "members": [
                [m.key, m.kappa, m.regions, m.mse, m.age] for m in self.members
            ],
        }

    @classmethod
    def from_dict(cls, space, d: dict) -> "Population":
        pop = cls(capacity=d["capacity"], tournament=d["tournament"])
        pop._next_age = int(d["next_age"])
        for key, k, r, m, age in d["members"]:
            pop.members.append(
                Member(
                    arch=arch_from_string(key, space),
                    key=key,
                    kappa=float(k),
                    regions=float(r),
                    mse=float(m),
                    age=int(age),
                )
            )
        return pop


def diversity(pop: Population) -> float:
    """Mean pairwise Hamming distance between member token vectors."""
    n = len(pop.members)
    if n < 2:
        return 0.0
    toks = np.asarray([tokens(m.arch) for m in pop.members], dtype=np.int64)
    total = 0.0
    for col in range(toks.shape[1]):
        counts = np.bincount(toks[:, col])
        total += (n * n - float(np.sum(counts * counts))) / 2.0
    return total / (n * (n - 1) / 2.0)


def evolution_step(pop: Population, space, evaluator, rng: Rng):
    """One aging-evolution step: tournament of 64 without replacement,
    mutate the rank-sum winner, evaluate the child, push it, drop the
    oldest member. Returns (pop, child_arch, child_report)."""
    idx = rng.child(0).choice_without_replacement(
        len(pop.members), pop.tournament
    )
    entrants = [pop.members[int(i)] for i in idx]
    parent = best_by_rank_sum(entrants)
    child = mutate(parent.arch, space, rng.child(1))
    report = evaluator.evaluate(child)
    pop.push(child, space, report)
    return pop, child, report


def entropy(dist) -> float:
    """Entropy of a policy state or of a list of per-block distributions."""
    if isinstance(dist, PolicyState):
        return dist.entropy()
    return block_entropy(list(dist))


# ---- stop rule ----


@dataclass
class StopRule:
    """Patience window on a monitored metric plus an unconditional hard cap.

    After step t the run stops with reason "patience" when the metric has
    not decreased by at least min_rel_decrease (relative) over the last
    `patience` steps, or with reason "hard_cap" at t == hard_cap.
    """

    metric: str = "policy_entropy"
    patience: int = 50
    min_rel_decrease: float = 1e-3
    hard_cap: int = 500

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.hard_cap < 1:
            raise ValueError("hard_cap must be >= 1")
        self._history: list = []

    def start(self, value: float) -> None:
        self._history = [float(value)]

    def check(self, t: int, value: float):
        """Record the metric after step t (1-based); return a stop reason
        string or None."""
        self._history.append(float(value))
        if t >= self.hard_cap:
            return "hard_cap"
        if t >= self.patience:
            old = self._history[t - self.patience]
            new = self._history[t]
            floor = self.min_rel_decrease * max(abs(old), 1e-12)
            if old - new < floor:
                return "patience"
        return None


def default_stop(method: str, hard_cap=None) -> StopRule:
    metric, cap, _ = METHOD_DEFAULTS[method]
    return StopRule(metric=metric, hard_cap=int(hard_cap or cap))


# ---- run log ----


@dataclass
class LogEntry:
    t: int
    arch: str
    kappa: float
    regions: float
    mse: float
    reward: float
    method: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "t": self.t,
                "arch": self.arch,
                "kappa": self.kappa,
                "regions": self.regions,
                "mse": self.mse,
                "reward": self.reward,
                "method": self.method,
            }
        )


class RunLog:
    """Append-only record of every evaluation, one JSONL line each."""

    def __init__(self):
        self.entries: list = []

    def add(self, t: int, report, reward: float, method: str) -> None:
        self.entries.append(
            LogEntry(
                t=t,
                arch=report.arch,
                kappa=float(report.kappa),
                regions=float(report.regions),
                mse=float(report.mse),
                reward=float(reward),
                method=method,
            )
        )

    def __len__(self) -> int:
        return len(self.entries)

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for e in self.entries:
                fh.write(e.to_json() + "\n")

    @classmethod
    def read_jsonl(cls, path) -> "RunLog":
        log = cls()
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    log.entries.append(LogEntry(**json.loads(line)))
        return log

    def replay_rewards(self, literal_signs: bool = False) -> list:
        """Recompute rewards from the logged indicator triples in order;
        bit-equal to the logged rewards for an untampered log."""
        norm = RewardNormalizer(literal_signs=literal_signs)
        out = []
        for e in self.entries:
            out.append(
                norm.term("kappa", e.kappa)
                + norm.term("regions", e.regions)
                + norm.term("mse", e.mse)
            )
        return out


# ---- checkpoints & the unified driver ----


@dataclass
class Checkpoint:
    method: str
    t: int
    state: dict
    norm: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "method": self.method,
                "t": self.t,
                "state": self.state,
                "norm": self.norm,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Checkpoint":
        d = json.loads(text)
        return cls(
            method=d["method"], t=int(d["t"]), state=d["state"], norm=d["norm"]
        )


@dataclass
class SearchResult:
    best_arch: str
    stop_reason: str
    evaluations: int
    log: RunLog
    trajectory: list = field(default_factory=list)
    steps: int = 0
    checkpoints: list = field(default_factory=list)


def _restore(method, space, ckpt: Checkpoint):
    if method == "reinforce":
        return PolicyState.from_dict(space, ckpt.state)
    if method == "fpnas":
        return FpState.from_dict(space, ckpt.state)
    return Population.from_dict(space, ckpt.state)


def _snapshot(method, space, state, norm, t) -> Checkpoint:
    sd = state.to_dict(space) if method == "evolution" else state.to_dict()
    return Checkpoint(method=method, t=t, state=sd, norm=norm.to_dict())


def run_search(
    method: str,
    space,
    evaluator,
    stop: StopRule = None,
    rng: Rng = None,
    *,
    lr: float = None,
    lam: float = 0.25,
    capacity: int = 256,
    tournament: int = 64,
    literal_signs: bool = False,
    checkpoint_every: int = 0,
    resume: Checkpoint = None,
) -> SearchResult:
    """Drive one search: sample -> evaluate -> update until the stop rule
    fires. Returns the derived best arch (argmax policy for reinforce and
    fpnas, rank-sum best member for evolution), the evaluation log, the
    trajectory of policy/population vectors (one per step, starting at the
    initial or resumed point) and any checkpoints taken.

    The step at index t draws its randomness from rng.child(t), so a resumed
    run with the parent's rng replays the parent and a different rng diverges
    from the shared state; thread count never changes the stream.
    """
    if method not in METHOD_DEFAULTS:
        raise ValueError(f"unknown method {method!r}")
    if rng is None:
        rng = Rng(0)
    if stop is None:
        stop = default_stop(method)
    if lr is None:
        lr = METHOD_DEFAULTS[method][2]

    log = RunLog()
    checkpoints = []
    trajectory = []

    if resume is not None:
        if resume.method != method:
            raise ValueError(
                f"checkpoint is for {resume.method!r}, not {method!r}"
            )
        state = _restore(method, space, resume)
        norm = RewardNormalizer.from_dict(resume.norm)
        t0 = resume.t
    else:
        norm = RewardNormalizer(literal_signs=literal_signs)
        t0 = 0
        if method == "evolution":
            state = Population(capacity=capacity, tournament=tournament)
            warm = rng.child(0)
            for i in range(capacity):
                arch = random_arch(space, warm.child(i))
                report = evaluator.evaluate(arch)
                r = teg_reward(norm, report)
                log.add(0, report, r, method)
                state.push(arch, space, report)
        elif method == "fpnas":
            state = FpState(space, lr=lr, lam=lam)
        else:
            state = PolicyState(space, lr=lr)

    def metric_value():
        if method == "evolution":
            return diversity(state)
        return state.entropy()

    def state_vector():
        if method == "evolution":
            return state.vector(space)
        return state.vector()

    stop.start(metric_value())
    trajectory.append(state_vector())

    stop_reason = "hard_cap"
    t = t0
    while True:
        t += 1
        step_rng = rng.child(t)
        if method == "reinforce":
            arch = state.sample(step_rng)
            report = evaluator.evaluate(arch)
            state, r = reinforce_step(state, report, norm)
            log.add(t, report, r, method)
        elif method == "fpnas":
            state, batch = fp_step(state, space, evaluator, norm, step_rng)
            for report, r in batch:
                log.add(t, report, r, method)
        else:
            state, child, report = evolution_step(
                state, space, evaluator, step_rng
            )
            r = teg_reward(norm, report)
            log.add(t, report, r, method)

        trajectory.append(state_vector())
        if checkpoint_every and t % checkpoint_every == 0:
            checkpoints.append(_snapshot(method, space, state, norm, t))

        reason = stop.check(t - t0, metric_value())
        if reason is not None:
            stop_reason = reason
            break

    if method == "evolution":
        best = best_by_rank_sum(state.members).key
    else:
        best = arch_to_string(state.argmax_arch(), space)

    return SearchResult(
        best_arch=best,
        stop_reason=stop_reason,
        evaluations=len(log),
        log=log,
        trajectory=trajectory,
        steps=t - t0,
        checkpoints=checkpoints,
    )
