"""Dense float64 tensors with tape-based reverse-mode differentiation.

A Tape records op nodes in execution (= topological) order; backward walks
them once in reverse. Tapes live for a single forward/backward pass.
Tensors without a tape are constants. All buffers are float64; segment ops
treat a node's in-edge set as one segment.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np


class ShapeMismatch(ValueError):
    pass


class EmptySegment(ValueError):
    """A segment id in range received no rows (an isolated node leaked in)."""


class Tensor:
    __slots__ = ("data", "tape", "node_id")

    def __init__(self, data, tape: "Tape | None" = None,
                 node_id: int | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.tape = tape
        self.node_id = node_id

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, tracked={self.tape is not None})"


class Tape:
    """Topologically ordered op records plus the gradient map."""

    def __init__(self) -> None:
        self._backwards: list[tuple[int, Callable[[np.ndarray], None]]] = []
        self._next_id = 0
        self.gradients: dict[int, np.ndarray] = {}
        self.names: dict[int, str] = {}

    def leaf(self, data, name: str | None = None) -> Tensor:
        """Register a differentiable input (parameter) on the tape."""
        t = Tensor(data, self, self._fresh())
        if name is not None:
            self.names[t.node_id] = name
        return t

    def _fresh(self) -> int:
        i = self._next_id
        self._next_id += 1
        return i

    def _record(self, out_data: np.ndarray,
                backward: Callable[[np.ndarray], None]) -> Tensor:
        t = Tensor(out_data, self, self._fresh())
        self._backwards.append((t.node_id, backward))
        return t

    def accumulate(self, node_id: int | None, grad: np.ndarray) -> None:
        # stored gradients are never mutated in place (accumulation builds a
        # new array), so aliasing the incoming buffer is safe; treat values
        # in `gradients` as read-only
        if node_id is None:
            return
        if node_id in self.gradients:
            self.gradients[node_id] = self.gradients[node_id] + grad
        else:
            self.gradients[node_id] = grad

    def backward(self, loss: Tensor) -> dict[int, np.ndarray]:
        """Reverse sweep from a scalar loss; returns node id -> gradient."""
        if loss.tape is not self:
            raise ValueError("loss does not live on this tape")
        if loss.data.size != 1:
            raise ShapeMismatch("backward starts from a scalar")
        self.gradients.clear()
        self.gradients[loss.node_id] = np.ones_like(loss.data)
        for node_id, backward in reversed(self._backwards):
            grad = self.gradients.get(node_id)
            if grad is None:
                continue
            backward(grad)
        return self.gradients

    def grads_by_name(self) -> dict[str, np.ndarray]:
        return {name: self.gradients[nid]
                for nid, name in self.names.items() if nid in self.gradients}


def _tape_of(*tensors: Tensor) -> Tape | None:
    tape = None
    for t in tensors:
        if t.tape is not None:
            if tape is not None and tape is not t.tape:
                raise ValueError("tensors live on different tapes")
            tape = t.tape
    return tape


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


def constant(data) -> Tensor:
    return Tensor(data)


def _scatter_add_rows(n: int, idx: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Sum rows of `vals` into an [n, d] array at row positions `idx`.

    bincount over flattened positions outruns np.add.at by a wide margin.
    """
    if vals.ndim == 1:
        return np.bincount(idx, weights=vals, minlength=n)
    m, d = vals.shape
    flat_idx = (idx[:, None] * d + np.arange(d)).ravel()
    flat = np.bincount(flat_idx, weights=vals.ravel(), minlength=n * d)
    return flat.reshape(n, d)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ShapeMismatch(f"matmul {a.shape} @ {b.shape}")
    tape = _tape_of(a, b)
    out = a.data @ b.data
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(a.node_id, g @ b.data.T)
        tape.accumulate(b.node_id, a.data.T @ g)

    return tape._record(out, backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    tape = _tape_of(a, b)
    out = a.data + b.data
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(a.node_id, _unbroadcast(g, a.data.shape))
        tape.accumulate(b.node_id, _unbroadcast(g, b.data.shape))

    return tape._record(out, backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    tape = _tape_of(a, b)
    out = a.data * b.data
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(a.node_id, _unbroadcast(g * b.data, a.data.shape))
        tape.accumulate(b.node_id, _unbroadcast(g * a.data, b.data.shape))

    return tape._record(out, backward)


def scale(a: Tensor, c: float) -> Tensor:
    tape = _tape_of(a)
    out = a.data * c
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(a.node_id, g * c)

    return tape._record(out, backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tape = _tape_of(*tensors)
    out = np.concatenate([t.data for t in tensors], axis=axis)
    if tape is None:
        return Tensor(out)
    sizes = [t.data.shape[axis] for t in tensors]

    def backward(g: np.ndarray) -> None:
        start = 0
        for t, size in zip(tensors, sizes):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(start, start + size)
            tape.accumulate(t.node_id, g[tuple(sl)])
            start += size

    return tape._record(out, backward)


def row_gather(a: Tensor, idx: np.ndarray) -> Tensor:
    idx = np.asarray(idx, dtype=np.int64)
    tape = _tape_of(a)
    out = a.data[idx]
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(a.node_id,
                        _scatter_add_rows(a.data.shape[0], idx, g))

    return tape._record(out, backward)


def segment_sum(a: Tensor, segment_ids: np.ndarray, num_segments: int) -> Tensor:
    """Sum rows of `a` grouped by segment id; empty segments give zero rows."""
    segment_ids = np.asarray(segment_ids, dtype=np.int64)
    if a.data.shape[0] != segment_ids.shape[0]:
        raise ShapeMismatch("one segment id per row required")
    tape = _tape_of(a)
    out = _scatter_add_rows(num_segments, segment_ids, a.data)
    if a.data.ndim > 2:
        raise ShapeMismatch("segment_sum wants 1-d or 2-d input")
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(a.node_id, g[segment_ids])

    return tape._record(out, backward)


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    tape = _tape_of(a)
    factor = np.where(a.data > 0, 1.0, slope)
    out = a.data * factor
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(a.node_id, g * factor)

    return tape._record(out, backward)


def elu(a: Tensor, alpha: float = 1.0) -> Tensor:
    tape = _tape_of(a)
    neg = alpha * (np.exp(np.minimum(a.data, 0.0)) - 1.0)
    out = np.where(a.data > 0, a.data, neg)
    if tape is None:
        return Tensor(out)
    deriv = np.where(a.data > 0, 1.0, neg + alpha)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(a.node_id, g * deriv)

    return tape._record(out, backward)


def exp(a: Tensor) -> Tensor:
    tape = _tape_of(a)
    out = np.exp(a.data)
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(a.node_id, g * out)

    return tape._record(out, backward)


def log(a: Tensor) -> Tensor:
    if np.any(a.data <= 0):
        raise ValueError("log of a non-positive value")
    tape = _tape_of(a)
    out = np.log(a.data)
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(a.node_id, g / a.data)

    return tape._record(out, backward)


def softmax_by_segment(logits: Tensor, segment_ids: np.ndarray,
                       num_segments: int) -> Tensor:
    """Softmax normalised within each segment (a node's in-edge set).

    Accepts [m], [m,1] or [m,k] logits (k independent channels, e.g. one
    per attention head). Raises EmptySegment when a segment in
    [0, num_segments) has no rows; isolated nodes must be handled
    (bypassed) upstream.
    """
    segment_ids = np.asarray(segment_ids, dtype=np.int64)
    x = logits.data
    cols = x.reshape(x.shape[0], -1) if x.ndim > 1 else x.reshape(-1, 1)
    if cols.shape[0] != segment_ids.shape[0]:
        raise ShapeMismatch("one segment id per logit row required")
    counts = np.bincount(segment_ids, minlength=num_segments)
    if num_segments > 0 and counts.min() == 0:
        empty = int(np.argmin(counts))
        raise EmptySegment(f"segment {empty} has no members")

    # per-segment max for numerical stability
    k = cols.shape[1]
    seg_max = np.full((num_segments, k), -np.inf)
    np.maximum.at(seg_max, segment_ids, cols)
    e = np.exp(cols - seg_max[segment_ids])
    denom = _scatter_add_rows(num_segments, segment_ids, e)
    s = e / denom[segment_ids]
    out = s.reshape(x.shape)

    tape = _tape_of(logits)
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        gc = g.reshape(cols.shape)
        tmp = gc * s
        seg_dot = _scatter_add_rows(num_segments, segment_ids, tmp)
        dx = tmp - s * seg_dot[segment_ids]
        tape.accumulate(logits.node_id, dx.reshape(x.shape))

    return tape._record(out, backward)


def mse_loss(pred: Tensor, target: Tensor) -> Tensor:
    if pred.data.shape != target.data.shape:
        raise ShapeMismatch(f"mse {pred.shape} vs {target.shape}")
    tape = _tape_of(pred, target)
    diff = pred.data - target.data
    out = np.asarray((diff ** 2).mean())
    if tape is None:
        return Tensor(out)
    n = diff.size

    def backward(g: np.ndarray) -> None:
        tape.accumulate(pred.node_id, g * 2.0 * diff / n)
        tape.accumulate(target.node_id, -g * 2.0 * diff / n)

    return tape._record(out, backward)


def bce_with_logits_loss(logits: Tensor, targets: Tensor,
                         mask: np.ndarray | None = None) -> Tensor:
    """Mean binary cross-entropy over unmasked entries, numerically stable."""
    if logits.data.shape != targets.data.shape:
        raise ShapeMismatch(f"bce {logits.shape} vs {targets.shape}")
    x, t = logits.data, targets.data
    m = np.ones_like(x) if mask is None else np.asarray(mask, dtype=np.float64)
    count = m.sum()
    if count == 0:
        raise ValueError("all targets are masked out")
    per = np.maximum(x, 0) - x * t + np.log1p(np.exp(-np.abs(x)))
    out = np.asarray((per * m).sum() / count)
    tape = _tape_of(logits, targets)
    if tape is None:
        return Tensor(out)
    sig = 1.0 / (1.0 + np.exp(-x))

    def backward(g: np.ndarray) -> None:
        tape.accumulate(logits.node_id, g * (sig - t) * m / count)
        tape.accumulate(targets.node_id, g * (-x) * m / count)

    return tape._record(out, backward)


def row_slice(a: Tensor, start: int, stop: int) -> Tensor:
    """Rows [start, stop) of a 2-d tensor."""
    tape = _tape_of(a)
    out = a.data[start:stop]
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        acc = np.zeros_like(a.data)
        acc[start:stop] = g
        tape.accumulate(a.node_id, acc)

    return tape._record(out, backward)


def per_head_scores(x: Tensor, a: Tensor, heads: int) -> Tensor:
    """Blockwise dot products: x is [m, H*d] (head-blocked columns), a is
    [H*d, 1]; out[i, h] = x[i, h*d:(h+1)*d] . a[h*d:(h+1)*d]."""
    m, hd = x.data.shape
    if hd % heads or a.data.shape != (hd, 1):
        raise ShapeMismatch(f"per_head_scores {x.shape} vs {a.shape} heads={heads}")
    d = hd // heads
    xr = x.data.reshape(m, heads, d)
    ar = a.data.reshape(heads, d)
    out = np.einsum("mhd,hd->mh", xr, ar)
    tape = _tape_of(x, a)
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(x.node_id,
                        np.einsum("mh,hd->mhd", g, ar).reshape(m, hd))
        tape.accumulate(a.node_id,
                        np.einsum("mh,mhd->hd", g, xr).reshape(hd, 1))

    return tape._record(out, backward)


def head_scale(x: Tensor, s: Tensor, heads: int) -> Tensor:
    """Scale each head block of x [m, H*d] by the matching column of s [m, H]."""
    m, hd = x.data.shape
    if hd % heads or s.data.shape != (m, heads):
        raise ShapeMismatch(f"head_scale {x.shape} vs {s.shape} heads={heads}")
    d = hd // heads
    xr = x.data.reshape(m, heads, d)
    out = (xr * s.data[:, :, None]).reshape(m, hd)
    tape = _tape_of(x, s)
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        gr = g.reshape(m, heads, d)
        tape.accumulate(x.node_id, (gr * s.data[:, :, None]).reshape(m, hd))
        tape.accumulate(s.node_id, np.einsum("mhd,mhd->mh", gr, xr))

    return tape._record(out, backward)


def mean_heads(x: Tensor, heads: int) -> Tensor:
    """Average the head blocks of x [n, H*d] down to [n, d]."""
    n, hd = x.data.shape
    if hd % heads:
        raise ShapeMismatch(f"mean_heads {x.shape} heads={heads}")
    d = hd // heads
    out = x.data.reshape(n, heads, d).mean(axis=1)
    tape = _tape_of(x)
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        expanded = np.repeat(g / heads, heads, axis=0).reshape(n, heads, d)
        tape.accumulate(x.node_id, expanded.reshape(n, hd))

    return tape._record(out, backward)


def total_sum(a: Tensor) -> Tensor:
    tape = _tape_of(a)
    out = np.asarray(a.data.sum())
    if tape is None:
        return Tensor(out)

    def backward(g: np.ndarray) -> None:
        tape.accumulate(a.node_id, np.full_like(a.data, float(g)))

    return tape._record(out, backward)


# ---------------------------------------------------------------------------
# optimizer

def adam_init(params: dict[str, np.ndarray]) -> dict:
    return {
        "step": 0,
        "m": {k: np.zeros_like(v) for k, v in params.items()},
        "v": {k: np.zeros_like(v) for k, v in params.items()},
    }


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: dict, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8,
              weight_decay: float = 0.0,
              no_decay: frozenset[str] = frozenset()) -> None:
    """One Adam update, in place. Parameters without a gradient are skipped.

    `weight_decay` applies decoupled decay (skipped for names in
    `no_decay`, typically biases).
    """
    state["step"] += 1
    t = state["step"]
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    for key, p in params.items():
        g = grads.get(key)
        if g is None:
            g = np.zeros_like(p)
        if g.shape != p.shape:
            raise ShapeMismatch(f"gradient shape {g.shape} != param {p.shape} ({key})")
        m = state["m"][key]
        v = state["v"][key]
        m *= beta1
        m += (1 - beta1) * g
        v *= beta2
        v += (1 - beta2) * g * g
        if weight_decay and key not in no_decay:
            p *= 1.0 - lr * weight_decay
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


# ---------------------------------------------------------------------------
# seeded PRNG for initialization (splitmix64)

class SplitMix64:
    """Tiny deterministic PRNG; enough for weight initialization."""

    def __init__(self, seed: int):
        self._state = seed & 0xFFFFFFFFFFFFFFFF

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        return z ^ (z >> 31)

    def uniform(self, shape: tuple[int, ...], low: float = 0.0,
                high: float = 1.0) -> np.ndarray:
        n = int(np.prod(shape)) if shape else 1
        vals = np.array([self.next_u64() / 2.0 ** 64 for _ in range(n)])
        return (low + (high - low) * vals).reshape(shape)

    def normal(self, shape: tuple[int, ...]) -> np.ndarray:
        n = int(np.prod(shape)) if shape else 1
        m = (n + 1) // 2
        u1 = np.array([max(self.next_u64() / 2.0 ** 64, 1e-300) for _ in range(m)])
        u2 = np.array([self.next_u64() / 2.0 ** 64 for _ in range(m)])
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2 * math.pi * u2),
                            r * np.sin(2 * math.pi * u2)])[:n]
        return z.reshape(shape)

    def glorot(self, fan_in: int, fan_out: int,
               shape: tuple[int, ...] | None = None) -> np.ndarray:
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        return self.uniform(shape or (fan_in, fan_out), -limit, limit)
