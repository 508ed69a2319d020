"""Compilation of architectures into runnable conv nets.

A compiled net is a straight-line plan of primitive steps (conv, relu,
pool, add) over value slots, followed by global average pooling and a
dense classifier. Conv ops are relu -> conv (no batch norm anywhere, no
conv biases; the classifier carries the only bias, initialized to zero),
so a net without conv edges on live paths is exactly affine.

All arrays float64. Weight tensors are drawn N(0, 2/fan_in) in plan order
from a single seeded stream, so compile(space, arch, seed) is bit-
deterministic. `jacobian` returns exact reverse-mode gradients of each
sample's summed logits with respect to every parameter, one row per
sample; `grads` returns batch-summed gradients for training.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .. import numkit as nk
from ..errors import NonFiniteGradient, ShapeMismatch
from ..numkit import Rng, kaiming_normal
from .arch import Architecture, CellArch, GraphArch, _adjacency, _bit_index, validate
from .space import SearchSpace


@dataclass
class _Conv:
    src: int
    dst: int
    pidx: int
    ksize: int


@dataclass
class _Relu:
    src: int
    dst: int


@dataclass
class _Pool:
    src: int
    dst: int


@dataclass
class _Add:
    srcs: tuple
    dst: int


_Step = Union[_Conv, _Relu, _Pool, _Add]


class CompiledNet:
    def __init__(self, space: SearchSpace, arch: Architecture, seed):
        validate(arch, space)
        self.space = space
        self.arch = arch
        self.macro = space.macro
        self.steps: list = []
        self.param_shapes: list = []
        self.param_fanin: list = []
        self._n_slots = 1  # slot 0 is the input batch
        self._relu_of: dict = {}  # value slot -> relu slot (shared per node)

        final = self._build()
        self.feature_slot = final

        c = self.macro.stem_channels
        self.param_shapes.append((c, self.macro.classes))  # classifier weight
        self.param_fanin.append(c)
        self.param_shapes.append((self.macro.classes,))  # classifier bias
        self.param_fanin.append(0)

        offsets = [0]
        for shape in self.param_shapes:
            offsets.append(offsets[-1] + int(np.prod(shape)))
        self.param_offsets = offsets
        self.n_params = offsets[-1]

        rng = seed if isinstance(seed, Rng) else Rng(int(seed))
        self.params = []
        for shape, fan in zip(self.param_shapes, self.param_fanin):
            if fan == 0:  # the zero-init classifier bias
                self.params.append(np.zeros(shape))
            else:
                self.params.append(kaiming_normal(rng, fan, shape))

        self.relu_neurons = self._count_relu_neurons()

    def _count_relu_neurons(self) -> int:
        per_slot = self.macro.stem_channels * self.macro.image_size ** 2
        return sum(per_slot for s in self.steps if isinstance(s, _Relu))

    # ---- plan construction ----

    def _new_slot(self) -> int:
        slot = self._n_slots
        self._n_slots += 1
        return slot

    def _add_conv(self, src: int, cin: int, cout: int, ksize: int) -> int:
        pidx = len(self.param_shapes)
        self.param_shapes.append((cout, cin, ksize, ksize))
        self.param_fanin.append(cin * ksize * ksize)
        dst = self._new_slot()
        self.steps.append(_Conv(src, dst, pidx, ksize))
        return dst

    def _relu(self, src: int) -> int:
        # a node feeding several conv edges shares one relu (same neurons)
        if src not in self._relu_of:
            dst = self._new_slot()
            self.steps.append(_Relu(src, dst))
            self._relu_of[src] = dst
        return self._relu_of[src]

    def _apply_op(self, name: str, src: int, channels: int) -> int:
        if name == "skip_connect":
            return src
        if name in ("avg_pool_3x3", "avgpool3x3"):
            dst = self._new_slot()
            self.steps.append(_Pool(src, dst))
            return dst
        if name in ("nor_conv_3x3", "conv3x3"):
            return self._add_conv(self._relu(src), channels, channels, 3)
        if name in ("nor_conv_1x1", "conv1x1"):
            return self._add_conv(self._relu(src), channels, channels, 1)
        raise AssertionError(f"unhandled op {name!r}")

    def _build(self) -> int:
        m = self.macro
        stem_out = self._add_conv(0, m.in_channels, m.stem_channels, 3)
        cur = stem_out
        if isinstance(self.arch, CellArch):
            for _ in range(m.cells):
                cur = self._build_cell(cur, m.stem_channels)
            return cur
        return self._build_graph(cur, m.stem_channels)

    def _build_cell(self, cell_in: int, channels: int) -> int:
        space, arch = self.space, self.arch
        vocab = space.op_vocab
        node_slots = [cell_in]
        e = 0
        for j in range(1, space.nodes):
            contribs = []
            for i in range(j):
                name = vocab[arch.edge_ops[e]]
                e += 1
                if name == "none":
                    continue  # contributes an exact zero tensor
                contribs.append(self._apply_op(name, node_slots[i], channels))
            dst = self._new_slot()
            self.steps.append(_Add(tuple(contribs), dst))
            node_slots.append(dst)
        return node_slots[-1]

    def _build_graph(self, stem_out: int, channels: int) -> int:
        space, arch = self.space, self.arch
        n = space.nodes
        adj = _adjacency(arch, n)
        vertex_slot = [stem_out] + [None] * (n - 1)
        for j in range(1, n):
            incoming = [vertex_slot[i] for i in range(j) if adj[i][j]]
            dst = self._new_slot()
            self.steps.append(_Add(tuple(incoming), dst))
            if j < n - 1:  # intermediate vertices apply their op to the sum
                name = space.op_vocab[arch.vertex_ops[j - 1]]
                vertex_slot[j] = self._apply_op(name, dst, channels)
            else:
                vertex_slot[j] = dst
        return vertex_slot[n - 1]

    # ---- execution ----

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        m = self.macro
        want = (m.in_channels, m.image_size, m.image_size)
        if x.ndim != 4 or x.shape[1:] != want:
            raise ShapeMismatch(f"expected (B, {want[0]}, {want[1]}, {want[2]}), got {x.shape}")
        return x

    def _run(self, x: np.ndarray):
        """Forward pass keeping every slot value (needed for backward)."""
        b = x.shape[0]
        m = self.macro
        values = [None] * self._n_slots
        values[0] = x
        shape = (b, m.stem_channels, m.image_size, m.image_size)
        for step in self.steps:
            if isinstance(step, _Conv):
                values[step.dst] = nk.conv2d_forward(values[step.src], self.params[step.pidx])
            elif isinstance(step, _Relu):
                values[step.dst] = np.maximum(values[step.src], 0.0)
            elif isinstance(step, _Pool):
                values[step.dst] = nk.avgpool3x3_forward(values[step.src])
            else:
                if step.srcs:
                    acc = values[step.srcs[0]].copy()
                    for s in step.srcs[1:]:
                        acc += values[s]
                    values[step.dst] = acc
                else:
                    values[step.dst] = np.zeros(shape)
        feat = values[self.feature_slot].mean(axis=(2, 3))
        logits = feat @ self.params[-2] + self.params[-1]
        return values, feat, logits

    def forward(self, x: np.ndarray):
        """Returns (logits (B, classes), activation_bits (B, relu_neurons)).

        Bit = 1 iff the pre-activation is strictly positive; zero inputs to
        a relu give 0 bits. Nets with no relu steps return (B, 0) bits.
        """
        x = self._check_input(x)
        values, _, logits = self._run(x)
        b = x.shape[0]
        blocks = [
            (values[s.src] > 0.0).reshape(b, -1)
            for s in self.steps
            if isinstance(s, _Relu)
        ]
        bits = np.concatenate(blocks, axis=1) if blocks else np.zeros((b, 0), dtype=bool)
        return logits, bits

    def last_layer_features(self, x: np.ndarray) -> np.ndarray:
        """Post-pooling inputs to the dense classifier, (B, stem_channels)."""
        x = self._check_input(x)
        _, feat, _ = self._run(x)
        return feat

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """(B, P): row i is d(sum of logits of sample i)/d(all parameters)."""
        x = self._check_input(x)
        values, feat, _ = self._run(x)
        b = x.shape[0]
        classes = self.macro.classes
        jac = np.zeros((b, self.n_params))

        dlogits = np.ones((b, classes))
        w_off = self.param_offsets[-3]
        b_off = self.param_offsets[-2]
        jac[:, b_off:b_off + classes] = dlogits
        jac[:, w_off:b_off] = np.einsum("bf,bc->bfc", feat, dlogits).reshape(b, -1)
        dfeat = dlogits @ self.params[-2].T

        dval = [None] * self._n_slots
        hw = self.macro.image_size ** 2
        dval[self.feature_slot] = np.broadcast_to(
            (dfeat / hw)[:, :, None, None],
            values[self.feature_slot].shape,
        ).copy()

        def bump(slot, grad):
            if dval[slot] is None:
                dval[slot] = grad.copy()
            else:
                dval[slot] += grad

        for step in reversed(self.steps):
            g = dval[step.dst]
            if g is None:
                continue  # slot never influenced the output
            if isinstance(step, _Conv):
                off = self.param_offsets[step.pidx]
                gw = nk.conv2d_grad_weight_batched(values[step.src], g, step.ksize, step.ksize)
                jac[:, off:off + gw[0].size] += gw.reshape(b, -1)
                bump(step.src, nk.conv2d_grad_input(g, self.params[step.pidx]))
            elif isinstance(step, _Relu):
                bump(step.src, g * (values[step.src] > 0.0))
            elif isinstance(step, _Pool):
                bump(step.src, nk.avgpool3x3_grad(g))
            else:
                for s in step.srcs:
                    bump(s, g)

        if not np.isfinite(jac).all():
            raise NonFiniteGradient("jacobian contains non-finite entries")
        return jac

    def grads(self, x: np.ndarray, dlogits: np.ndarray) -> list:
        """Batch-summed parameter gradients for a given upstream dlogits
        (B, classes); aligned with self.params. Used by the toy trainer."""
        x = self._check_input(x)
        values, feat, _ = self._run(x)
        out = [np.zeros(s) for s in self.param_shapes]
        out[-1] = dlogits.sum(axis=0)
        out[-2] = feat.T @ dlogits
        dfeat = dlogits @ self.params[-2].T

        dval = [None] * self._n_slots
        hw = self.macro.image_size ** 2
        dval[self.feature_slot] = np.broadcast_to(
            (dfeat / hw)[:, :, None, None],
            values[self.feature_slot].shape,
        ).copy()

        def bump(slot, grad):
            if dval[slot] is None:
                dval[slot] = grad.copy()
            else:
                dval[slot] += grad

        for step in reversed(self.steps):
            g = dval[step.dst]
            if g is None:
                continue
            if isinstance(step, _Conv):
                out[step.pidx] += nk.conv2d_grad_weight(values[step.src], g, step.ksize, step.ksize)
                bump(step.src, nk.conv2d_grad_input(g, self.params[step.pidx]))
            elif isinstance(step, _Relu):
                bump(step.src, g * (values[step.src] > 0.0))
            elif isinstance(step, _Pool):
                bump(step.src, nk.avgpool3x3_grad(g))
            else:
                for s in step.srcs:
                    bump(s, g)
        return out

    # ---- parameter vector view ----

    def param_vector(self) -> np.ndarray:
        return np.concatenate([p.reshape(-1) for p in self.params])

    def set_param_vector(self, vec: np.ndarray) -> None:
        if vec.shape != (self.n_params,):
            raise ShapeMismatch(f"expected ({self.n_params},), got {vec.shape}")
        for i, shape in enumerate(self.param_shapes):
            lo, hi = self.param_offsets[i], self.param_offsets[i + 1]
            self.params[i] = vec[lo:hi].reshape(shape).copy()


def compile_arch(space: SearchSpace, arch: Architecture, seed) -> CompiledNet:
    """Build a runnable net with fresh seeded parameters."""
    return CompiledNet(space, arch, seed)
