"""Minimal float64 function approximators with hand-written reverse mode.

Provides a feed-forward net (tanh hidden layers, linear or softmax head),
a gated recurrent cell with backpropagation through time, an adaptive-moment
optimizer, and a text persistence format for named parameter segments.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ParamVector", "Mlp", "GruCell", "unroll", "unroll_backward",
           "Adam", "softmax", "log_softmax", "save_params", "load_params",
           "PARAMS_MAGIC"]

PARAMS_MAGIC = "twtlrl-params v1"


class ParamVector:
    """Named, shaped float64 segments with a flat view."""

    def __init__(self, segments: dict[str, np.ndarray]):
        self.segments = {k: np.asarray(v, dtype=float) for k, v in segments.items()}

    def __getitem__(self, name: str) -> np.ndarray:
        return self.segments[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        self.segments[name] = np.asarray(value, dtype=float)

    def __contains__(self, name: str) -> bool:
        return name in self.segments

    def keys(self):
        return self.segments.keys()

    def items(self):
        return self.segments.items()

    @property
    def size(self) -> int:
        return sum(v.size for v in self.segments.values())

    def copy(self) -> "ParamVector":
        return ParamVector({k: v.copy() for k, v in self.segments.items()})

    def zeros_like(self) -> "ParamVector":
        return ParamVector({k: np.zeros_like(v) for k, v in self.segments.items()})

    def to_flat(self) -> np.ndarray:
        if not self.segments:
            return np.zeros(0)
        return np.concatenate([v.ravel() for v in self.segments.values()])

    def from_flat(self, flat: np.ndarray) -> "ParamVector":
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.size:
            raise ValueError(f"flat size {flat.size} != {self.size}")
        out: dict[str, np.ndarray] = {}
        i = 0
        for k, v in self.segments.items():
            out[k] = flat[i:i + v.size].reshape(v.shape).copy()
            i += v.size
        return ParamVector(out)

    def add_(self, other: "ParamVector", scale: float = 1.0) -> None:
        for k, v in other.items():
            self.segments[k] += scale * v


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


class Mlp:
    """Feed-forward net: tanh hidden layers, 'linear' or 'softmax' head.

    ``forward`` accepts a single vector or a (B, in) batch and returns the
    output plus a cache sufficient for the exact reverse pass.  For a
    softmax head the forward output is the probability vector but the
    backward entry point takes gradients with respect to the *logits*
    (callers apply the softmax Jacobian, which is cheap and exact).
    """

    def __init__(self, sizes: list[int], head: str, params: ParamVector):
        if head not in ("linear", "softmax"):
            raise ValueError(f"unknown head {head!r}")
        self.sizes = list(sizes)
        self.head = head
        self.params = params

    @classmethod
    def init(cls, sizes: list[int], head: str, rng: np.random.Generator) -> "Mlp":
        segs: dict[str, np.ndarray] = {}
        for i, (nin, nout) in enumerate(zip(sizes[:-1], sizes[1:])):
            segs[f"W{i}"] = rng.normal(0.0, 1.0 / np.sqrt(nin), size=(nin, nout))
            segs[f"b{i}"] = np.zeros(nout)
        return cls(sizes, head, ParamVector(segs))

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def forward(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = x.reshape(1, -1) if single else x
        if h.shape[1] != self.sizes[0]:
            raise ValueError(f"input dim {h.shape[1]} != {self.sizes[0]}")
        acts = [h]
        p = self.params
        for i in range(self.n_layers):
            h = h @ p[f"W{i}"] + p[f"b{i}"]
            if i < self.n_layers - 1:
                h = np.tanh(h)
            acts.append(h)
        out = softmax(h) if self.head == "softmax" else h
        if single:
            out = out[0]
        return out, (acts, single)

    def backward(self, cache, dout: np.ndarray):
        """Reverse pass; ``dout`` is d(loss)/d(logits or linear output)."""
        acts, single = cache
        g = np.asarray(dout, dtype=float)
        if single:
            g = g.reshape(1, -1)
        grads: dict[str, np.ndarray] = {}
        p = self.params
        for i in reversed(range(self.n_layers)):
            a_in = acts[i]
            grads[f"W{i}"] = a_in.T @ g
            grads[f"b{i}"] = g.sum(axis=0)
            g = g @ p[f"W{i}"].T
            if i > 0:
                g = g * (1.0 - acts[i] ** 2)  # acts[i] is post-tanh
        if single:
            g = g[0]
        return ParamVector(grads), g


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


class GruCell:
    """Single-gate-set recurrent cell (update/reset gates, tanh candidate)."""

    def __init__(self, input_size: int, hidden_size: int, params: ParamVector):
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.params = params

    @classmethod
    def init(cls, input_size: int, hidden_size: int,
             rng: np.random.Generator) -> "GruCell":
        segs: dict[str, np.ndarray] = {}
        si, sh = 1.0 / np.sqrt(input_size), 1.0 / np.sqrt(hidden_size)
        for gate in ("z", "r", "h"):
            segs[f"W{gate}"] = rng.normal(0.0, si, size=(input_size, hidden_size))
            segs[f"U{gate}"] = rng.normal(0.0, sh, size=(hidden_size, hidden_size))
            segs[f"b{gate}"] = np.zeros(hidden_size)
        return cls(input_size, hidden_size, ParamVector(segs))

    def step(self, x: np.ndarray, h: np.ndarray):
        p = self.params
        z = _sigmoid(x @ p["Wz"] + h @ p["Uz"] + p["bz"])
        r = _sigmoid(x @ p["Wr"] + h @ p["Ur"] + p["br"])
        rh = r * h
        c = np.tanh(x @ p["Wh"] + rh @ p["Uh"] + p["bh"])
        h_new = (1.0 - z) * h + z * c
        return h_new, (x, h, z, r, rh, c)

    def step_backward(self, cache, dh_new: np.ndarray, grads: ParamVector):
        """Accumulates parameter grads in place; returns (dx, dh)."""
        x, h, z, r, rh, c = cache
        p = self.params
        dz = dh_new * (c - h)
        dc = dh_new * z
        dh = dh_new * (1.0 - z)
        dac = dc * (1.0 - c ** 2)
        drh = dac @ p["Uh"].T
        dr = drh * h
        dh = dh + drh * r
        dar = dr * r * (1.0 - r)
        daz = dz * z * (1.0 - z)
        dx = daz @ p["Wz"].T + dar @ p["Wr"].T + dac @ p["Wh"].T
        dh = dh + daz @ p["Uz"].T + dar @ p["Ur"].T
        grads.segments["Wz"] += x.T @ daz
        grads.segments["Uz"] += h.T @ daz
        grads.segments["bz"] += daz.sum(axis=0)
        grads.segments["Wr"] += x.T @ dar
        grads.segments["Ur"] += h.T @ dar
        grads.segments["br"] += dar.sum(axis=0)
        grads.segments["Wh"] += x.T @ dac
        grads.segments["Uh"] += rh.T @ dac
        grads.segments["bh"] += dac.sum(axis=0)
        return dx, dh


def unroll(cell: GruCell, xs: np.ndarray, h0: np.ndarray | None = None):
    """Run the cell over a (T, B, in) sequence; returns (T, B, hidden) states."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 3:
        raise ValueError("xs must have shape (T, B, input_size)")
    T, B, _ = xs.shape
    h = np.zeros((B, cell.hidden_size)) if h0 is None else np.asarray(h0, float)
    hs = np.empty((T, B, cell.hidden_size))
    caches = []
    for t in range(T):
        h, cache = cell.step(xs[t], h)
        hs[t] = h
        caches.append(cache)
    return hs, caches


def unroll_backward(cell: GruCell, caches, dhs: np.ndarray):
    """Exact BPTT.  ``dhs``: gradient w.r.t. every hidden state, (T, B, h).

    Returns (param grads, dxs, dh0).
    """
    T = len(caches)
    grads = cell.params.zeros_like()
    B = dhs.shape[1]
    dxs = np.empty((T, B, cell.input_size))
    dh = np.zeros((B, cell.hidden_size))
    for t in reversed(range(T)):
        dxs[t], dh = cell.step_backward(caches[t], dhs[t] + dh, grads)
    return grads, dxs, dh


class Adam:
    """Adaptive-moment optimizer with bias correction (gradient descent)."""

    def __init__(self, params: ParamVector, lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = params.zeros_like()
        self.v = params.zeros_like()

    def step(self, grads: ParamVector) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for k, g in grads.items():
            m = self.m.segments[k]
            v = self.v.segments[k]
            m += (1.0 - b1) * (g - m)
            v += (1.0 - b2) * (g * g - v)
            self.params.segments[k] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


# --- persistence ------------------------------------------------------------

def save_params(path, kind: str, params: ParamVector) -> None:
    lines = [f"{PARAMS_MAGIC} {kind}"]
    for name, arr in params.items():
        shape = "x".join(str(d) for d in arr.shape) if arr.ndim else "scalar"
        values = " ".join(repr(float(v)) for v in np.asarray(arr).ravel())
        lines.append(f"{name} {shape} {values}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_params(path) -> tuple[str, ParamVector]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(PARAMS_MAGIC + " "):
        raise ValueError(f"{path}: not a {PARAMS_MAGIC} file")
    kind = lines[0][len(PARAMS_MAGIC) + 1:]
    segs: dict[str, np.ndarray] = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        name, shape_s, *values = line.split()
        data = np.array([float(v) for v in values])
        if shape_s == "scalar":
            segs[name] = data.reshape(())
        else:
            segs[name] = data.reshape(tuple(int(d) for d in shape_s.split("x")))
    return kind, ParamVector(segs)
