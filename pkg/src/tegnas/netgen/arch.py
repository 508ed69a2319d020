"""Architecture values, their string codec, sampling, and mutation.

Cell architectures serialize to the pipe/tilde string form
``|op~0|+|op~0|op~1|+...`` (one group per node, one token per incoming
edge, source indices in order). Graph architectures serialize to the 28
row-major upper-triangle adjacency bits (diagonal included, always 0)
followed by the 5 intermediate-vertex op names, colon-separated.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Union

from ..errors import InvalidArch, ParseError, SamplingExhausted, UnknownOp
from ..numkit import Rng
from .space import GRAPH101_MAX_EDGES, SearchSpace


@dataclass(frozen=True)
class CellArch:
    space: str
    edge_ops: tuple  # op index per edge slot, aligned with SearchSpace.edges


@dataclass(frozen=True)
class GraphArch:
    space: str
    bits: tuple        # strict upper-triangle adjacency, row-major, len 21
    vertex_ops: tuple  # op index per intermediate vertex, len 5


Architecture = Union[CellArch, GraphArch]

_TOKEN_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz0123456789_~")


def validate(arch: Architecture, space: SearchSpace) -> None:
    """Raise InvalidArch unless arch is a member of space."""
    if arch.space != space.kind:
        raise InvalidArch(f"arch belongs to {arch.space!r}, not {space.kind!r}")
    k = len(space.op_vocab)
    if isinstance(arch, CellArch):
        if len(arch.edge_ops) != space.n_edges:
            raise InvalidArch(
                f"expected {space.n_edges} edge ops, got {len(arch.edge_ops)}"
            )
        if any(not (0 <= op < k) for op in arch.edge_ops):
            raise InvalidArch(f"op index out of range for vocab of {k}")
        return
    # graph: edge budget, and every vertex must sit on an input->output path
    n = space.nodes
    if len(arch.bits) != n * (n - 1) // 2:
        raise InvalidArch(f"expected {n * (n - 1) // 2} adjacency bits")
    if len(arch.vertex_ops) != n - 2:
        raise InvalidArch(f"expected {n - 2} vertex ops")
    if any(b not in (0, 1) for b in arch.bits):
        raise InvalidArch("adjacency bits must be 0/1")
    if any(not (0 <= op < k) for op in arch.vertex_ops):
        raise InvalidArch(f"op index out of range for vocab of {k}")
    if sum(arch.bits) > GRAPH101_MAX_EDGES:
        raise InvalidArch(f"more than {GRAPH101_MAX_EDGES} edges")
    adj = _adjacency(arch, n)
    from_input = _reach(adj, 0, forward=True)
    to_output = _reach(adj, n - 1, forward=False)
    for vertex in range(n):
        if not (from_input[vertex] and to_output[vertex]):
            raise InvalidArch(f"vertex {vertex} is not on any input->output path")


def _bit_index(i: int, j: int, n: int) -> int:
    # strict upper triangle, row-major
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def _adjacency(arch: GraphArch, n: int):
    adj = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if arch.bits[_bit_index(i, j, n)]:
                adj[i][j] = True
    return adj

def _reach(adj, start: int, forward: bool):
    n = len(adj)
    seen = [False] * n
    seen[start] = True
    stack = [start]
    while stack:
        u = stack.pop()
        for w in range(n):
            hit = adj[u][w] if forward else adj[w][u]
            if hit and not seen[w]:
                seen[w] = True
                stack.append(w)
    return seen


# ---- string codec ----

def arch_to_string(arch: Architecture, space: SearchSpace) -> str:
    validate(arch, space)
    if isinstance(arch, GraphArch):
        return _graph_to_string(arch, space)
    vocab = space.op_vocab
    groups = []
    e = 0
    for j in range(1, space.nodes):
        toks = []
        for i in range(j):
            toks.append(f"{vocab[arch.edge_ops[e]]}~{i}")
            e += 1
        groups.append("|" + "|".join(toks) + "|")
    return "+".join(groups)


def _graph_to_string(arch: GraphArch, space: SearchSpace) -> str:
    n = space.nodes
    bits = []
    for i in range(n):
        for j in range(i, n):
            bits.append("0" if i == j else str(arch.bits[_bit_index(i, j, n)]))
    ops = [space.op_vocab[o] for o in arch.vertex_ops]
    return "".join(bits) + ":" + ":".join(ops)


def arch_from_string(text: str, space: SearchSpace) -> Architecture:
    """Parse and validate; malformed input raises ParseError with the byte
    offset of the first offending character."""
    if space.kind == "graph101":
        return _graph_from_string(text, space)

    pos = 0
    n = len(text)
    groups = [[]]
    if pos >= n or text[pos] != "|":
        raise ParseError("expected '|' at start of node group", pos)
    pos += 1
    while True:
        start = pos
        while pos < n and text[pos] in _TOKEN_CHARS:
            pos += 1
        if pos == start:
            raise ParseError("empty op token", pos)
        if pos >= n or text[pos] != "|":
            raise ParseError("expected '|' after op token", pos)
        groups[-1].append((text[start:pos], start))
        pos += 1
        if pos >= n:
            break
        if text[pos] == "+":
            pos += 1
            if pos >= n or text[pos] != "|":
                raise ParseError("expected '|' after '+'", pos)
            pos += 1
            groups.append([])
        # otherwise the next token continues the current group

    if len(groups) != space.nodes - 1:
        raise ParseError(
            f"expected {space.nodes - 1} node groups, got {len(groups)}", n
        )
    edge_ops = []
    for j, group in enumerate(groups, start=1):
        if len(group) != j:
            raise ParseError(
                f"node {j} group needs {j} tokens, got {len(group)}", group[0][1]
            )
        for want_src, (token, off) in enumerate(group):
            name, tilde, src = token.rpartition("~")
            if not tilde or not src.isdigit():
                raise ParseError(f"token {token!r} is not 'op~src'", off)
            if name not in space.op_vocab:
                raise ParseError(
                    f"unknown op {name!r}, vocabulary: {', '.join(space.op_vocab)}", off
                )
            if int(src) != want_src:
                raise ParseError(
                    f"token {token!r} should have source {want_src}", off
                )
            edge_ops.append(space.op_vocab.index(name))
    arch = CellArch(space.kind, tuple(edge_ops))
    validate(arch, space)
    return arch


def _graph_from_string(text: str, space: SearchSpace) -> GraphArch:
    n = space.nodes
    n_tri = n * (n + 1) // 2
    parts = text.split(":")
    if len(parts) != 1 + (n - 2):
        raise ParseError(
            f"expected {1 + (n - 2)} colon-separated fields, got {len(parts)}",
            len(parts[0]) if parts else 0,
        )
    bitstr = parts[0]
    if len(bitstr) != n_tri:
        raise ParseError(f"expected {n_tri} adjacency bits, got {len(bitstr)}", 0)
    for off, ch in enumerate(bitstr):
        if ch not in "01":
            raise ParseError(f"adjacency bit must be 0/1, got {ch!r}", off)
    bits = [0] * (n * (n - 1) // 2)
    pos = 0
    for i in range(n):
        for j in range(i, n):
            if i == j:
                if bitstr[pos] != "0":
                    raise ParseError("diagonal adjacency bit must be 0", pos)
            else:
                bits[_bit_index(i, j, n)] = int(bitstr[pos])
            pos += 1
    vertex_ops = []
    off = len(bitstr) + 1
    for token in parts[1:]:
        if token not in space.op_vocab:
            raise ParseError(
                f"unknown op {token!r}, vocabulary: {', '.join(space.op_vocab)}", off
            )
        vertex_ops.append(space.op_vocab.index(token))
        off += len(token) + 1
    arch = GraphArch(space.kind, tuple(bits), tuple(vertex_ops))
    validate(arch, space)
    return arch


# ---- sampling and mutation ----

def random_arch(space: SearchSpace, rng: Rng, max_tries: int = 1000) -> Architecture:
    """Uniform per-edge draw for cell spaces.

    Graphs are built constructively (blind rejection almost never hits the
    every-vertex-on-a-path constraint): a random spine path from input to
    output, off-spine vertices attached with one incoming and one outgoing
    edge, then random extra edges up to the edge budget.
    """
    k = len(space.op_vocab)
    if space.kind != "graph101":
        ops = tuple(int(v) for v in rng.integers(0, k, space.n_edges))
        return CellArch(space.kind, ops)

    n = space.nodes
    inner = list(range(1, n - 1))
    for _ in range(max_tries):
        spine_len = int(rng.integers(2, len(inner) + 1))
        picks = rng.choice_without_replacement(len(inner), spine_len)
        spine = [0] + sorted(inner[i] for i in picks) + [n - 1]
        edges = {(spine[i], spine[i + 1]) for i in range(len(spine) - 1)}
        for v in inner:
            if v in spine:
                continue
            below = [u for u in spine if u < v]
            above = [u for u in spine if u > v]
            edges.add((below[int(rng.integers(0, len(below)))], v))
            edges.add((v, above[int(rng.integers(0, len(above)))]))
        budget = GRAPH101_MAX_EDGES - len(edges)
        if budget > 0:
            free = [
                (i, j)
                for i in range(n)
                for j in range(i + 1, n)
                if (i, j) not in edges
            ]
            extra = int(rng.integers(0, budget + 1))
            for idx in rng.choice_without_replacement(len(free), min(extra, len(free))):
                edges.add(free[idx])
        bits = [0] * (n * (n - 1) // 2)
        for i, j in edges:
            bits[_bit_index(i, j, n)] = 1
        vops = tuple(int(v) for v in rng.integers(0, k, n - 2))
        arch = GraphArch(space.kind, tuple(bits), vops)
        try:
            validate(arch, space)
        except InvalidArch:  # pragma: no cover - construction keeps it valid
            continue
        return arch
    raise SamplingExhausted(f"no valid graph in {max_tries} draws")


def mutate(arch: Architecture, space: SearchSpace, rng: Rng, max_tries: int = 1000) -> Architecture:
    """One-point mutation: a uniformly chosen slot is resampled away from
    its current value (graphs are revalidated, invalid children rejected)."""
    validate(arch, space)
    k = len(space.op_vocab)
    if isinstance(arch, CellArch):
        e = int(rng.integers(0, space.n_edges))
        cur = arch.edge_ops[e]
        new = int(rng.integers(0, k - 1))
        if new >= cur:
            new += 1
        ops = list(arch.edge_ops)
        ops[e] = new
        return CellArch(space.kind, tuple(ops))
    n_bits = len(arch.bits)
    n_slots = n_bits + len(arch.vertex_ops)
    for _ in range(max_tries):
        slot = int(rng.integers(0, n_slots))
        if slot < n_bits:
            bits = list(arch.bits)
            bits[slot] ^= 1
            child = GraphArch(space.kind, tuple(bits), arch.vertex_ops)
        else:
            vi = slot - n_bits
            cur = arch.vertex_ops[vi]
            new = int(rng.integers(0, k - 1))
            if new >= cur:
                new += 1
            vops = list(arch.vertex_ops)
            vops[vi] = new
            child = GraphArch(space.kind, arch.bits, tuple(vops))
        try:
            validate(child, space)
        except InvalidArch:
            continue
        return child
    raise SamplingExhausted(f"no valid mutation in {max_tries} tries")


def enumerate_archs(space: SearchSpace) -> Iterator[Architecture]:
    """All architectures of a cell space, lexicographic in edge-op indices."""
    if space.kind == "graph101":
        raise ValueError("graph101 is not enumerable here")
    k = len(space.op_vocab)
    for combo in itertools.product(range(k), repeat=space.n_edges):
        yield CellArch(space.kind, combo)


# ---- structural metrics and policy views ----

def cell_depth(arch: Architecture, space: SearchSpace) -> int:
    """Edges on the longest input->output path (none-edges excluded for
    cells); 0 when the output is unreachable."""
    validate(arch, space)
    n = space.nodes
    unreachable = -1
    depth = [unreachable] * n
    depth[0] = 0
    if isinstance(arch, CellArch):
        none_idx = space.op_vocab.index("none") if "none" in space.op_vocab else -1
        live = {
            space.edges[e]: True
            for e, op in enumerate(arch.edge_ops)
            if op != none_idx
        }
        for j in range(1, n):
            best = unreachable
            for i in range(j):
                if (i, j) in live and depth[i] != unreachable:
                    best = max(best, depth[i] + 1)
            depth[j] = best
    else:
        adj = _adjacency(arch, n)
        for j in range(1, n):
            best = unreachable
            for i in range(j):
                if adj[i][j] and depth[i] != unreachable:
                    best = max(best, depth[i] + 1)
            depth[j] = best
    return depth[n - 1] if depth[n - 1] != unreachable else 0


def tokens(arch: Architecture) -> tuple:
    """Discrete slot vector (used for Hamming distances)."""
    if isinstance(arch, CellArch):
        return arch.edge_ops
    return arch.bits + arch.vertex_ops


def policy_blocks(space: SearchSpace) -> list:
    """Categorical block sizes a factorized policy needs for this space."""
    k = len(space.op_vocab)
    if space.kind != "graph101":
        return [k] * space.n_edges
    n_bits = space.nodes * (space.nodes - 1) // 2
    return [2] * n_bits + [k] * (space.nodes - 2)


def arch_from_choices(space: SearchSpace, choices) -> Architecture:
    """Inverse of choices_from_arch; may raise InvalidArch for graphs."""
    choices = tuple(int(c) for c in choices)
    if space.kind != "graph101":
        arch = CellArch(space.kind, choices)
    else:
        n_bits = space.nodes * (space.nodes - 1) // 2
        arch = GraphArch(space.kind, choices[:n_bits], choices[n_bits:])
    validate(arch, space)
    return arch


def choices_from_arch(arch: Architecture) -> tuple:
    return tokens(arch)
