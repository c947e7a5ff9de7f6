"""The 4-qubit variational circuit shared by all recurrent cells.

Layout per forward pass: dense two-angle encoding (H, R_y(arctan x),
R_z(arctan x^2) per qubit), then `depth` repetitions of an 8-CNOT
entangler followed by a general ZYZ rotation on every qubit, then
Pauli-Z expectations on the first ``n_meas`` wires.

Every circuit execution bumps a global counter; parameter-shift
evaluations are tallied separately so reservoir-mode training can be
audited to cost zero gradient circuits.
"""
from __future__ import annotations

import threading
from functools import lru_cache

import numpy as np

from . import noise as qnoise
from . import statevector as sv

N_QUBITS = 4
STATE_DIM = 2**N_QUBITS

# CNOT wiring of one entangling block, in application order.
ENTANGLER_PAIRS = ((0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3), (2, 0), (3, 1))

_CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


class EvalCounter:
    """Thread-safe tally of circuit executions (total and parameter-shift)."""

    def __init__(self):
        self._lock = threading.Lock()
        self.total = 0
        self.shift = 0

    def add(self, n: int = 1) -> None:
        with self._lock:
            self.total += n

    def mark_shift(self, n: int) -> None:
        with self._lock:
            self.shift += n

    def snapshot(self) -> tuple[int, int]:
        with self._lock:
            return self.total, self.shift

    def reset(self) -> None:
        with self._lock:
            self.total = 0
            self.shift = 0


EVALS = EvalCounter()


def param_count(depth: int) -> int:
    return depth * N_QUBITS * 3


def init_params(depth: int, rng: np.random.Generator) -> np.ndarray:
    """Angles i.i.d. Uniform(-pi, pi), shape (depth, 4, 3)."""
    if depth < 1:
        raise ValueError("depth must be positive")
    return rng.uniform(-np.pi, np.pi, size=(depth, N_QUBITS, 3))


def _check_params(params: np.ndarray) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    if params.ndim != 3 or params.shape[1:] != (N_QUBITS, 3) or params.shape[0] < 1:
        raise ValueError(f"params must have shape (depth, 4, 3), got {params.shape}")
    return params


def encode(x) -> np.ndarray:
    """Product state from H, R_y(arctan x_i), R_z(arctan x_i^2) on each qubit."""
    x = np.asarray(x, dtype=float)
    if x.shape != (N_QUBITS,):
        raise ValueError(f"encoding input must be a length-4 vector, got shape {x.shape}")
    ground = np.array([1.0, 0.0], dtype=complex)
    qubits = [
        sv.rz(np.arctan(xi**2)) @ sv.ry(np.arctan(xi)) @ sv.HADAMARD @ ground
        for xi in x
    ]
    return np.einsum("a,b,c,d->abcd", *qubits).reshape(-1)


def entangle_block(state: np.ndarray) -> np.ndarray:
    """The fixed 8-CNOT wiring of one variational block."""
    if state.size != STATE_DIM:
        raise ValueError("entangler expects a 4-qubit state")
    for control, target in ENTANGLER_PAIRS:
        state = sv.apply_cnot(state, control, target)
    return state


def _entangler_matrix() -> np.ndarray:
    mat = np.zeros((STATE_DIM, STATE_DIM), dtype=complex)
    for col in range(STATE_DIM):
        basis = np.zeros(STATE_DIM, dtype=complex)
        basis[col] = 1.0
        mat[:, col] = entangle_block(basis)
    return mat


ENTANGLER_MATRIX = _entangler_matrix()

# Z-expectation sign tables, one row per qubit (qubit 0 = MSB).
_Z_SIGNS = np.array(
    [[1.0 if not (b >> (N_QUBITS - 1 - q)) & 1 else -1.0 for b in range(STATE_DIM)]
     for q in range(N_QUBITS)]
)


def _kron4(mats) -> np.ndarray:
    return np.einsum("ai,bj,ck,dl->abcdijkl", *mats).reshape(STATE_DIM, STATE_DIM)


def _rotation_layer(block_angles: np.ndarray) -> np.ndarray:
    return _kron4([sv.rot_zyz(*block_angles[q]) for q in range(N_QUBITS)])


@lru_cache(maxsize=64)
def _variational_unitary_cached(params_bytes: bytes, depth: int) -> np.ndarray:
    params = np.frombuffer(params_bytes, dtype=float).reshape(depth, N_QUBITS, 3)
    unitary = np.eye(STATE_DIM, dtype=complex)
    for block in range(depth):
        unitary = _rotation_layer(params[block]) @ ENTANGLER_MATRIX @ unitary
    unitary.setflags(write=False)
    return unitary


def variational_unitary(params: np.ndarray) -> np.ndarray:
    params = _check_params(params)
    return _variational_unitary_cached(
        np.ascontiguousarray(params).tobytes(), params.shape[0]
    )


class NoiselessBackend:
    """Analytic statevector expectations."""

    deterministic = True

    def expectations(self, params: np.ndarray, x, n_meas: int) -> np.ndarray:
        EVALS.add(1)
        psi = variational_unitary(params) @ encode(x)
        probs = np.abs(psi) ** 2
        return _Z_SIGNS[:n_meas] @ probs


class NoisyBackend:
    """Density-matrix expectations under a sampled hardware noise model.

    With ``shots`` set, each expectation is estimated from a binomial draw
    instead of reported analytically.
    """

    def __init__(
        self,
        noise: qnoise.NoiseModelParams,
        shots: int | None = None,
        seed: int | None = None,
        depolarize_first: bool = False,
    ):
        if noise.n_qubits != N_QUBITS:
            raise ValueError(f"noise model must cover {N_QUBITS} qubits")
        self.noise = noise
        self.shots = shots
        self.depolarize_first = depolarize_first
        self._rng = np.random.default_rng(seed)

    @property
    def deterministic(self) -> bool:
        return self.shots is None

    def _gate(self, rho, name, matrix, targets):
        return qnoise.noisy_apply_gate(
            rho, name, matrix, targets, self.noise, self.depolarize_first
        )

    def expectations(self, params: np.ndarray, x, n_meas: int) -> np.ndarray:
        EVALS.add(1)
        params = _check_params(params)
        x = np.asarray(x, dtype=float)
        if x.shape != (N_QUBITS,):
            raise ValueError("encoding input must be a length-4 vector")
        rho = qnoise.zero_density(N_QUBITS)
        for q in range(N_QUBITS):
            rho = self._gate(rho, "h", sv.HADAMARD, (q,))
            rho = self._gate(rho, "ry", sv.ry(np.arctan(x[q])), (q,))
            rho = self._gate(rho, "rz", sv.rz(np.arctan(x[q] ** 2)), (q,))
        for block in range(params.shape[0]):
            for control, target in ENTANGLER_PAIRS:
                rho = self._gate(rho, "cnot", _CNOT_MATRIX, (control, target))
            for q in range(N_QUBITS):
                rho = self._gate(rho, "rot", sv.rot_zyz(*params[block, q]), (q,))
        rho = qnoise.measurement_relaxation(rho, self.noise)
        values = np.array(
            [qnoise.pauli_z_expectation_dm(rho, q) for q in range(n_meas)]
        )
        if self.shots is not None:
            p_up = np.clip((1.0 + values) / 2.0, 0.0, 1.0)
            counts = self._rng.binomial(self.shots, p_up)
            values = 2.0 * counts / self.shots - 1.0
        return values


NOISELESS = NoiselessBackend()


def vqc_forward(params, x, n_meas: int = 4, backend=None) -> np.ndarray:
    """Expectations <Z_0..Z_{n_meas-1}> of the full circuit."""
    if n_meas not in (3, 4):
        raise ValueError("n_meas must be 3 or 4")
    params = _check_params(params)
    backend = backend or NOISELESS
    return backend.expectations(params, x, n_meas)


def _shift_jacobian_noiseless(params: np.ndarray, x, n_meas: int) -> np.ndarray:
    """dE_j/d(theta_k) for the analytic backend, (P, n_meas).

    Each of the 2P shifted circuits reuses the unshifted prefix state and
    suffix operator of its block, so one evaluation costs a single rotation
    layer rebuild plus two matvecs. The circuit-evaluation count is
    unchanged: every shifted expectation is one execution.
    """
    depth = params.shape[0]
    signs = _Z_SIGNS[:n_meas]
    rots = [[sv.rot_zyz(*params[b, q]) for q in range(N_QUBITS)] for b in range(depth)]

    # prefix[b]: state entering block b's rotation layer (entangler applied).
    prefix = []
    state = encode(x)
    for b in range(depth):
        state = ENTANGLER_MATRIX @ state
        prefix.append(state)
        state = _kron4(rots[b]) @ state
    # suffix[b]: operator applied after block b's rotation layer.
    suffix = [None] * depth
    op = np.eye(STATE_DIM, dtype=complex)
    for b in range(depth - 1, -1, -1):
        suffix[b] = op
        if b > 0:
            op = op @ _kron4(rots[b]) @ ENTANGLER_MATRIX

    jac = np.empty((params.size, n_meas))
    k = 0
    for b in range(depth):
        for q in range(N_QUBITS):
            for i in range(3):
                shifted = [None, None]
                for sign_idx, delta in enumerate((np.pi / 2, -np.pi / 2)):
                    angles = params[b, q].copy()
                    angles[i] += delta
                    layer = list(rots[b])
                    layer[q] = sv.rot_zyz(*angles)
                    psi = suffix[b] @ (_kron4(layer) @ prefix[b])
                    EVALS.add(1)
                    shifted[sign_idx] = signs @ (np.abs(psi) ** 2)
                EVALS.mark_shift(2)
                jac[k] = (shifted[0] - shifted[1]) / 2.0
                k += 1
    return jac


def parameter_shift_gradient(params, x, n_meas: int, upstream, backend=None) -> np.ndarray:
    """d(upstream . E)/d(theta) via E(theta +- pi/2), two evaluations per angle.

    Returns a flat vector over the (depth, 4, 3) angle layout.
    """
    params = _check_params(params)
    upstream = np.asarray(upstream, dtype=float)
    if upstream.shape != (n_meas,):
        raise ValueError(f"upstream must have length {n_meas}")
    backend = backend or NOISELESS
    if isinstance(backend, NoiselessBackend):
        return _shift_jacobian_noiseless(params, x, n_meas) @ upstream
    flat = params.ravel().copy()
    grad = np.zeros_like(flat)
    for k in range(flat.size):
        shifted = flat.copy()
        shifted[k] = flat[k] + np.pi / 2
        e_plus = backend.expectations(shifted.reshape(params.shape), x, n_meas)
        shifted[k] = flat[k] - np.pi / 2
        e_minus = backend.expectations(shifted.reshape(params.shape), x, n_meas)
        EVALS.mark_shift(2)
        grad[k] = upstream @ (e_plus - e_minus) / 2.0
    return grad
