"""Recurrent cells with quantum or classical cores and a scalar linear readout.

Quantum kinds replace the affine maps of RNN/GRU/LSTM with the shared
4-qubit circuit (1, 3 and 6 circuits respectively); hidden size is 3 and
the QLSTM carries a 4-dimensional internal state. Classical baselines use
hidden size 5 with two bias vectors per gate block, which matches the
quantum models' parameter budgets (40/120/160 recurrent parameters).

Full-optimization gradients are truncated: credit flows through the
same-step elementwise algebra and the readout, but never through a
circuit's input vector and never into earlier time steps. Quantum angle
gradients therefore come from the parameter-shift rule applied at the
final step only.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import vqc

QUANTUM_KINDS = ("qrnn", "qgru", "qlstm")
CLASSICAL_KINDS = ("rnn", "gru", "lstm")
ALL_KINDS = QUANTUM_KINDS + CLASSICAL_KINDS

N_VQCS = {"qrnn": 1, "qgru": 3, "qlstm": 6}
QUANTUM_HIDDEN = 3
QLSTM_CELL = 4
CLASSICAL_HIDDEN = 5
# Gate blocks per classical cell, stacked in the order given here.
CLASSICAL_GATES = {"rnn": ("h",), "gru": ("r", "z", "n"), "lstm": ("i", "f", "g", "o")}

HEAD_SIZE = {
    "qrnn": QUANTUM_HIDDEN,
    "qgru": QUANTUM_HIDDEN,
    "qlstm": QLSTM_CELL,
    "rnn": CLASSICAL_HIDDEN,
    "gru": CLASSICAL_HIDDEN,
    "lstm": CLASSICAL_HIDDEN,
}


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


@dataclass
class CellWeights:
    """All parameters of one cell: circuit angles or recurrent matrices, plus the readout."""

    kind: str
    vqc_params: list = field(default_factory=list)  # one (depth, 4, 3) array per circuit
    w_ih: np.ndarray | None = None  # (gates*hidden, 1)
    w_hh: np.ndarray | None = None  # (gates*hidden, hidden)
    b_ih: np.ndarray | None = None
    b_hh: np.ndarray | None = None
    head_w: np.ndarray | None = None
    head_b: float = 0.0

    @property
    def depth(self) -> int:
        return self.vqc_params[0].shape[0] if self.vqc_params else 0

    def quantum_param_count(self) -> int:
        return sum(p.size for p in self.vqc_params)

    def recurrent_param_count(self) -> int:
        if self.kind in QUANTUM_KINDS:
            return self.quantum_param_count()
        return self.w_ih.size + self.w_hh.size + self.b_ih.size + self.b_hh.size

    def head_param_count(self) -> int:
        return self.head_w.size + 1

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "head_w": self.head_w.tolist(), "head_b": self.head_b}
        if self.kind in QUANTUM_KINDS:
            d["vqc_params"] = [p.tolist() for p in self.vqc_params]
        else:
            for name in ("w_ih", "w_hh", "b_ih", "b_hh"):
                d[name] = getattr(self, name).tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CellWeights":
        kind = d["kind"]
        w = cls(kind=kind, head_w=np.array(d["head_w"], dtype=float), head_b=float(d["head_b"]))
        if kind in QUANTUM_KINDS:
            w.vqc_params = [np.array(p, dtype=float) for p in d["vqc_params"]]
        else:
            for name in ("w_ih", "w_hh", "b_ih", "b_hh"):
                setattr(w, name, np.array(d[name], dtype=float))
        return w


def init_weights(kind: str, depth: int, seed: int) -> CellWeights:
    """Deterministic random initialization from one experiment seed."""
    if kind not in ALL_KINDS:
        raise ValueError(f"unknown cell kind {kind!r}")
    ss = np.random.SeedSequence(seed)
    rng_q, rng_c, rng_head = (np.random.default_rng(s) for s in ss.spawn(3))
    w = CellWeights(kind=kind)
    if kind in QUANTUM_KINDS:
        w.vqc_params = [vqc.init_params(depth, rng_q) for _ in range(N_VQCS[kind])]
    else:
        h = CLASSICAL_HIDDEN
        gates = len(CLASSICAL_GATES[kind])
        bound = 1.0 / np.sqrt(h)
        w.w_ih = rng_c.uniform(-bound, bound, size=(gates * h, 1))
        w.w_hh = rng_c.uniform(-bound, bound, size=(gates * h, h))
        w.b_ih = rng_c.uniform(-bound, bound, size=gates * h)
        w.b_hh = rng_c.uniform(-bound, bound, size=gates * h)
    head_in = HEAD_SIZE[kind]
    bound = 1.0 / np.sqrt(head_in)
    w.head_w = rng_head.uniform(-bound, bound, size=head_in)
    w.head_b = float(rng_head.uniform(-bound, bound))
    return w


def linear_head(w: CellWeights, features) -> float:
    features = np.asarray(features, dtype=float)
    if features.shape != w.head_w.shape:
        raise ValueError(
            f"head expects {w.head_w.size} features, got {features.size}"
        )
    return float(w.head_w @ features + w.head_b)


# --- quantum cells -----------------------------------------------------------

def qrnn_step(w: CellWeights, h_prev, x_t: float, backend=None) -> np.ndarray:
    """h_t = tanh(VQC(concat(h_prev, x_t)))."""
    v_t = np.concatenate([h_prev, [x_t]])
    return np.tanh(vqc.vqc_forward(w.vqc_params[0], v_t, n_meas=3, backend=backend))


def qgru_step(w: CellWeights, h_prev, x_t: float, backend=None) -> np.ndarray:
    v_t = np.concatenate([h_prev, [x_t]])
    r_t = sigmoid(vqc.vqc_forward(w.vqc_params[0], v_t, n_meas=3, backend=backend))
    z_t = sigmoid(vqc.vqc_forward(w.vqc_params[1], v_t, n_meas=3, backend=backend))
    o_t = np.concatenate([[x_t], r_t * h_prev])
    h_tilde = np.tanh(vqc.vqc_forward(w.vqc_params[2], o_t, n_meas=3, backend=backend))
    return z_t * h_prev + (1.0 - z_t) * h_tilde


def qlstm_step(w: CellWeights, h_prev, c_prev, x_t: float, backend=None):
    """Returns (h_t, c_t, y_tilde); y_tilde feeds the readout at the last step."""
    v_t = np.concatenate([h_prev, [x_t]])
    f_t = sigmoid(vqc.vqc_forward(w.vqc_params[0], v_t, n_meas=4, backend=backend))
    i_t = sigmoid(vqc.vqc_forward(w.vqc_params[1], v_t, n_meas=4, backend=backend))
    c_tilde = np.tanh(vqc.vqc_forward(w.vqc_params[2], v_t, n_meas=4, backend=backend))
    c_t = f_t * c_prev + i_t * c_tilde
    o_t = sigmoid(vqc.vqc_forward(w.vqc_params[3], v_t, n_meas=4, backend=backend))
    gated = o_t * np.tanh(c_t)
    h_t = vqc.vqc_forward(w.vqc_params[4], gated, n_meas=3, backend=backend)
    y_tilde = vqc.vqc_forward(w.vqc_params[5], gated, n_meas=4, backend=backend)
    return h_t, c_t, y_tilde


# --- classical cells ---------------------------------------------------------

def _gate_slices(kind: str):
    h = CLASSICAL_HIDDEN
    return {name: slice(i * h, (i + 1) * h) for i, name in enumerate(CLASSICAL_GATES[kind])}


def _preactivations(w: CellWeights, h_prev, x_t: float) -> np.ndarray:
    return w.w_ih[:, 0] * x_t + w.b_ih + w.w_hh @ h_prev + w.b_hh


def classical_step(w: CellWeights, state, x_t: float):
    """One step of the matched-size RNN/GRU/LSTM; state is h or (h, c)."""
    if w.kind == "rnn":
        h_prev = state
        return np.tanh(_preactivations(w, h_prev, x_t))
    if w.kind == "gru":
        h_prev = state
        s = _gate_slices("gru")
        ih = w.w_ih[:, 0] * x_t + w.b_ih
        hh = w.w_hh @ h_prev + w.b_hh
        r = sigmoid(ih[s["r"]] + hh[s["r"]])
        z = sigmoid(ih[s["z"]] + hh[s["z"]])
        n = np.tanh(ih[s["n"]] + r * hh[s["n"]])
        return z * h_prev + (1.0 - z) * n
    if w.kind == "lstm":
        h_prev, c_prev = state
        s = _gate_slices("lstm")
        pre = _preactivations(w, h_prev, x_t)
        i = sigmoid(pre[s["i"]])
        f = sigmoid(pre[s["f"]])
        g = np.tanh(pre[s["g"]])
        o = sigmoid(pre[s["o"]])
        c = f * c_prev + i * g
        return np.tanh(c) * o, c
    raise ValueError(f"not a classical kind: {w.kind!r}")


# --- rollout -----------------------------------------------------------------

def window_features(w: CellWeights, window, backend=None) -> np.ndarray:
    """Readout input at the final step of a window, starting from zero state."""
    window = np.asarray(window, dtype=float)
    kind = w.kind
    if kind == "qrnn":
        h = np.zeros(QUANTUM_HIDDEN)
        for x_t in window:
            h = qrnn_step(w, h, x_t, backend)
        return h
    if kind == "qgru":
        h = np.zeros(QUANTUM_HIDDEN)
        for x_t in window:
            h = qgru_step(w, h, x_t, backend)
        return h
    if kind == "qlstm":
        h = np.zeros(QUANTUM_HIDDEN)
        c = np.zeros(QLSTM_CELL)
        y_tilde = np.zeros(QLSTM_CELL)
        for x_t in window:
            h, c, y_tilde = qlstm_step(w, h, c, x_t, backend)
        return y_tilde
    if kind == "rnn" or kind == "gru":
        h = np.zeros(CLASSICAL_HIDDEN)
        for x_t in window:
            h = classical_step(w, h, x_t)
        return h
    if kind == "lstm":
        h = np.zeros(CLASSICAL_HIDDEN)
        c = np.zeros(CLASSICAL_HIDDEN)
        for x_t in window:
            h, c = classical_step(w, (h, c), x_t)
        return h
    raise ValueError(f"unknown cell kind {kind!r}")


def rollout(w: CellWeights, window, backend=None) -> float:
    """Scalar prediction for one input window."""
    return linear_head(w, window_features(w, window, backend))


# --- gradients (full-optimization mode) --------------------------------------

@dataclass
class CellGrads:
    """Gradients in the same shapes as CellWeights' trainable arrays."""

    vqc_params: list = field(default_factory=list)
    w_ih: np.ndarray | None = None
    w_hh: np.ndarray | None = None
    b_ih: np.ndarray | None = None
    b_hh: np.ndarray | None = None
    head_w: np.ndarray | None = None
    head_b: float = 0.0


def _final_step_state(w: CellWeights, window, backend):
    """Run the window and return what the final step's gradient needs."""
    window = np.asarray(window, dtype=float)
    kind = w.kind
    if kind in ("qrnn", "qgru"):
        h = np.zeros(QUANTUM_HIDDEN)
        for x_t in window[:-1]:
            h = qrnn_step(w, h, x_t, backend) if kind == "qrnn" else qgru_step(w, h, x_t, backend)
        return h, window[-1]
    if kind == "qlstm":
        h = np.zeros(QUANTUM_HIDDEN)
        c = np.zeros(QLSTM_CELL)
        for x_t in window[:-1]:
            h, c, _ = qlstm_step(w, h, c, x_t, backend)
        return (h, c), window[-1]
    if kind in ("rnn", "gru"):
        h = np.zeros(CLASSICAL_HIDDEN)
        for x_t in window[:-1]:
            h = classical_step(w, h, x_t)
        return h, window[-1]
    h = np.zeros(CLASSICAL_HIDDEN)
    c = np.zeros(CLASSICAL_HIDDEN)
    for x_t in window[:-1]:
        h, c = classical_step(w, (h, c), x_t)
    return (h, c), window[-1]


def window_gradient(w: CellWeights, window, dloss_dy: float, backend=None) -> CellGrads:
    """Gradient of dloss_dy * y(window) w.r.t. all full-mode trainable parameters."""
    g = CellGrads()
    kind = w.kind
    if kind == "qrnn":
        h_prev, x_t = _final_step_state(w, window, backend)
        v_t = np.concatenate([h_prev, [x_t]])
        e = vqc.vqc_forward(w.vqc_params[0], v_t, n_meas=3, backend=backend)
        h_t = np.tanh(e)
        g.head_w = dloss_dy * h_t
        g.head_b = dloss_dy
        upstream = dloss_dy * w.head_w * (1.0 - h_t**2)
        g.vqc_params = [
            vqc.parameter_shift_gradient(
                w.vqc_params[0], v_t, 3, upstream, backend
            ).reshape(w.vqc_params[0].shape)
        ]
        return g
    if kind == "qgru":
        h_prev, x_t = _final_step_state(w, window, backend)
        v_t = np.concatenate([h_prev, [x_t]])
        r_t = sigmoid(vqc.vqc_forward(w.vqc_params[0], v_t, n_meas=3, backend=backend))
        z_t = sigmoid(vqc.vqc_forward(w.vqc_params[1], v_t, n_meas=3, backend=backend))
        o_t = np.concatenate([[x_t], r_t * h_prev])
        h_tilde = np.tanh(vqc.vqc_forward(w.vqc_params[2], o_t, n_meas=3, backend=backend))
        h_t = z_t * h_prev + (1.0 - z_t) * h_tilde
        g.head_w = dloss_dy * h_t
        g.head_b = dloss_dy
        dh = dloss_dy * w.head_w
        # r only reaches h_t through circuit 3's input, which is a cut edge.
        up_r = np.zeros(QUANTUM_HIDDEN)
        up_z = dh * (h_prev - h_tilde) * z_t * (1.0 - z_t)
        up_n = dh * (1.0 - z_t) * (1.0 - h_tilde**2)
        g.vqc_params = [
            vqc.parameter_shift_gradient(w.vqc_params[0], v_t, 3, up_r, backend).reshape(
                w.vqc_params[0].shape
            ),
            vqc.parameter_shift_gradient(w.vqc_params[1], v_t, 3, up_z, backend).reshape(
                w.vqc_params[1].shape
            ),
            vqc.parameter_shift_gradient(w.vqc_params[2], o_t, 3, up_n, backend).reshape(
                w.vqc_params[2].shape
            ),
        ]
        return g
    if kind == "qlstm":
        (h_prev, c_prev), x_t = _final_step_state(w, window, backend)
        v_t = np.concatenate([h_prev, [x_t]])
        f_t = sigmoid(vqc.vqc_forward(w.vqc_params[0], v_t, n_meas=4, backend=backend))
        i_t = sigmoid(vqc.vqc_forward(w.vqc_params[1], v_t, n_meas=4, backend=backend))
        c_tilde = np.tanh(vqc.vqc_forward(w.vqc_params[2], v_t, n_meas=4, backend=backend))
        c_t = f_t * c_prev + i_t * c_tilde
        o_t = sigmoid(vqc.vqc_forward(w.vqc_params[3], v_t, n_meas=4, backend=backend))
        gated = o_t * np.tanh(c_t)
        y_tilde = vqc.vqc_forward(w.vqc_params[5], gated, n_meas=4, backend=backend)
        g.head_w = dloss_dy * y_tilde
        g.head_b = dloss_dy
        # Gates 1-4 feed circuits 5/6 only through their input (cut), and the
        # recurrent h_t from circuit 5 is unused at the last step.
        up_zero3 = np.zeros(3)
        up_zero4 = np.zeros(4)
        up_y = dloss_dy * w.head_w
        inputs = [v_t, v_t, v_t, v_t, gated, gated]
        upstreams = [up_zero4, up_zero4, up_zero4, up_zero4, up_zero3, up_y]
        n_meas_list = [4, 4, 4, 4, 3, 4]
        g.vqc_params = [
            vqc.parameter_shift_gradient(p, xin, m, up, backend).reshape(p.shape)
            for p, xin, m, up in zip(w.vqc_params, inputs, n_meas_list, upstreams)
        ]
        return g
    if kind == "rnn":
        h_prev, x_t = _final_step_state(w, window, backend)
        h_t = classical_step(w, h_prev, x_t)
        g.head_w = dloss_dy * h_t
        g.head_b = dloss_dy
        da = dloss_dy * w.head_w * (1.0 - h_t**2)
        g.w_ih = (da * x_t)[:, None]
        g.w_hh = np.outer(da, h_prev)
        g.b_ih = da.copy()
        g.b_hh = da.copy()
        return g
    if kind == "gru":
        h_prev, x_t = _final_step_state(w, window, backend)
        s = _gate_slices("gru")
        ih = w.w_ih[:, 0] * x_t + w.b_ih
        hh = w.w_hh @ h_prev + w.b_hh
        r = sigmoid(ih[s["r"]] + hh[s["r"]])
        z = sigmoid(ih[s["z"]] + hh[s["z"]])
        n = np.tanh(ih[s["n"]] + r * hh[s["n"]])
        h_t = z * h_prev + (1.0 - z) * n
        g.head_w = dloss_dy * h_t
        g.head_b = dloss_dy
        dh = dloss_dy * w.head_w
        dz = dh * (h_prev - n) * z * (1.0 - z)
        dn = dh * (1.0 - z) * (1.0 - n**2)
        dr = dn * hh[s["n"]] * r * (1.0 - r)
        da_i = np.concatenate([dr, dz, dn])          # input-side preactivations
        da_h = np.concatenate([dr, dz, dn * r])      # hidden-side preactivations
        g.w_ih = (da_i * x_t)[:, None]
        g.b_ih = da_i
        g.w_hh = da_h[:, None] * h_prev[None, :]
        g.b_hh = da_h
        return g
    if kind == "lstm":
        (h_prev, c_prev), x_t = _final_step_state(w, window, backend)
        s = _gate_slices("lstm")
        pre = _preactivations(w, h_prev, x_t)
        i = sigmoid(pre[s["i"]])
        f = sigmoid(pre[s["f"]])
        gg = np.tanh(pre[s["g"]])
        o = sigmoid(pre[s["o"]])
        c_t = f * c_prev + i * gg
        tc = np.tanh(c_t)
        h_t = o * tc
        g.head_w = dloss_dy * h_t
        g.head_b = dloss_dy
        dh = dloss_dy * w.head_w
        do = dh * tc * o * (1.0 - o)
        dc = dh * o * (1.0 - tc**2)
        di = dc * gg * i * (1.0 - i)
        df = dc * c_prev * f * (1.0 - f)
        dg = dc * i * (1.0 - gg**2)
        da = np.concatenate([di, df, dg, do])
        g.w_ih = (da * x_t)[:, None]
        g.b_ih = da
        g.w_hh = da[:, None] * h_prev[None, :]
        g.b_hh = da.copy()
        return g
    raise ValueError(f"unknown cell kind {kind!r}")


# --- trainable parameter flattening ------------------------------------------

def trainable_vector(w: CellWeights, mode: str) -> np.ndarray:
    """Flat view of the parameters trained in the given mode (reservoir: readout only)."""
    parts = []
    if mode == "full":
        if w.kind in QUANTUM_KINDS:
            parts.extend(p.ravel() for p in w.vqc_params)
        else:
            parts.extend([w.w_ih.ravel(), w.w_hh.ravel(), w.b_ih, w.b_hh])
    elif mode != "reservoir":
        raise ValueError(f"unknown mode {mode!r}")
    parts.extend([w.head_w, np.array([w.head_b])])
    return np.concatenate(parts)


def set_trainable_vector(w: CellWeights, mode: str, vec: np.ndarray) -> None:
    """Write a flat vector (same layout as trainable_vector) back into the weights."""
    pos = 0

    def take(shape):
        nonlocal pos
        size = int(np.prod(shape))
        out = vec[pos : pos + size].reshape(shape)
        pos += size
        return out

    if mode == "full":
        if w.kind in QUANTUM_KINDS:
            w.vqc_params = [take(p.shape).copy() for p in w.vqc_params]
        else:
            w.w_ih = take(w.w_ih.shape).copy()
            w.w_hh = take(w.w_hh.shape).copy()
            w.b_ih = take(w.b_ih.shape).copy()
            w.b_hh = take(w.b_hh.shape).copy()
    elif mode != "reservoir":
        raise ValueError(f"unknown mode {mode!r}")
    w.head_w = take(w.head_w.shape).copy()
    w.head_b = float(take((1,))[0])
    if pos != vec.size:
        raise ValueError("trainable vector length does not match the model")


def gradient_vector(g: CellGrads, w: CellWeights, mode: str) -> np.ndarray:
    """Flatten CellGrads in the trainable_vector layout."""
    parts = []
    if mode == "full":
        if w.kind in QUANTUM_KINDS:
            parts.extend(p.ravel() for p in g.vqc_params)
        else:
            parts.extend([g.w_ih.ravel(), g.w_hh.ravel(), g.b_ih, g.b_hh])
    parts.extend([g.head_w, np.array([g.head_b])])
    return np.concatenate(parts)
