"""Exact statevector simulation of small qubit registers.

Qubit 0 is the most significant bit of the basis index: for n qubits the
basis state |q0 q1 ... q_{n-1}> sits at index q0*2^(n-1) + ... + q_{n-1},
so ``state.reshape([2]*n)`` puts qubit q on axis q.

All operations are value-semantic: inputs are never mutated.
"""
from __future__ import annotations

import numpy as np

MAX_QUBITS = 12

_SQRT2_INV = 1.0 / np.sqrt(2.0)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def rx(theta: float) -> np.ndarray:
    """exp(-i*theta*X/2)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    """exp(-i*theta*Y/2)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    """exp(-i*theta*Z/2)."""
    return np.array(
        [[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]], dtype=complex
    )


X90 = rx(np.pi / 2)


def rot_zyz(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """General single-qubit rotation R_z(gamma) R_y(beta) R_z(alpha), alpha applied first."""
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    plus, minus = np.exp(-0.5j * (alpha + gamma)), np.exp(0.5j * (alpha - gamma))
    return np.array(
        [[c * plus, -s * minus], [s * np.conj(minus), c * np.conj(plus)]]
    )


def zero_state(n_qubits: int) -> np.ndarray:
    """All-qubits-ground state |0...0> of an n-qubit register."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    state = np.zeros(2**n_qubits, dtype=complex)
    state[0] = 1.0
    return state


def n_qubits_of(state: np.ndarray) -> int:
    n = int(round(np.log2(state.size)))
    if 2**n != state.size:
        raise ValueError(f"state length {state.size} is not a power of two")
    return n


def _check_unitary(gate: np.ndarray) -> None:
    dim = gate.shape[0]
    if gate.shape != (dim, dim):
        raise ValueError(f"gate must be square, got shape {gate.shape}")
    defect = np.max(np.abs(gate.conj().T @ gate - np.eye(dim)))
    if defect > 1e-12:
        raise ValueError(f"gate is not unitary (defect {defect:.2e})")


def apply_1q(state: np.ndarray, gate: np.ndarray, target: int) -> np.ndarray:
    """Apply a 2x2 unitary to one qubit; returns a new state."""
    n = n_qubits_of(state)
    if not 0 <= target < n:
        raise ValueError(f"target {target} out of range for {n} qubits")
    _check_unitary(gate)
    tensor = state.reshape([2] * n)
    out = np.tensordot(gate, tensor, axes=([1], [target]))
    return np.moveaxis(out, 0, target).reshape(-1)


def apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    """Apply CNOT(control -> target); returns a new state."""
    n = n_qubits_of(state)
    if control == target:
        raise ValueError("control and target must differ")
    for q in (control, target):
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    tensor = state.reshape([2] * n).copy()

    def block(c_bit, t_bit):
        idx = [slice(None)] * n
        idx[control], idx[target] = c_bit, t_bit
        return tuple(idx)

    tensor[block(1, 0)], tensor[block(1, 1)] = (
        tensor[block(1, 1)].copy(),
        tensor[block(1, 0)].copy(),
    )
    return tensor.reshape(-1)


def pauli_z_expectation(state: np.ndarray, qubit: int) -> float:
    """<Z_q> = sum_b (-1)^bit_q(b) |amp_b|^2."""
    n = n_qubits_of(state)
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n} qubits")
    probs = np.abs(state) ** 2
    probs = probs.reshape([2] * n)
    other_axes = tuple(a for a in range(n) if a != qubit)
    p0, p1 = probs.sum(axis=other_axes)
    return float(p0 - p1)
