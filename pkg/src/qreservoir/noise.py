"""Density-matrix simulation under thermal relaxation and depolarizing noise.

The noise model mirrors superconducting hardware conventions: per-qubit
T1/T2 coherence times, fixed instruction durations, and depolarizing
error rates for single-qubit pulses (p1) and CNOTs (p2). Single-qubit
rotations are priced in X90 pulses; R_z is a virtual gate and is free.
Every priced pulse applies thermal relaxation for its duration followed
by a depolarizing kick (order switchable via ``depolarize_first``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .statevector import IDENTITY_2, PAULI_X, PAULI_Y, PAULI_Z, n_qubits_of

# Instruction durations in seconds (R_z is virtual).
GATE_DURATIONS = {
    "rz": 0.0,
    "x90": 20e-9,
    "cnot": 300e-9,
    "measure": 700e-9,
    "reset": 800e-9,
}

# Number of X90 pulses behind each logical single-qubit gate:
# H = Rz.X90.Rz, Ry and the general ZYZ rotation = Rz.X90.Rz.X90.Rz.
X90_PULSES = {"rz": 0, "x90": 1, "h": 1, "ry": 2, "rot": 2}

_T1_MEAN, _T1_STD = 500e-6, 50e-6
_T2_MEAN, _T2_STD = 400e-6, 40e-6
_P1_MEAN, _P1_STD = 1e-4, 1e-5
_P2_MEAN, _P2_STD = 1e-3, 1e-4


@dataclass(frozen=True)
class NoiseModelParams:
    """Per-qubit relaxation times and depolarizing rates, plus instruction durations."""

    t1: tuple[float, ...]
    t2: tuple[float, ...]
    p1: tuple[float, ...]
    p2: float
    durations: dict = field(default_factory=lambda: dict(GATE_DURATIONS))
    seed: int | None = None

    def __post_init__(self):
        if len(self.t1) != len(self.t2) or len(self.t1) != len(self.p1):
            raise ValueError("t1, t2, p1 must have one entry per qubit")
        for q, (t1, t2) in enumerate(zip(self.t1, self.t2)):
            if t1 <= 0 or t2 <= 0:
                raise ValueError(f"qubit {q}: T1 and T2 must be positive")
            if t2 > 2 * t1:
                raise ValueError(f"qubit {q}: T2 must not exceed 2*T1")
        for p in (*self.p1, self.p2):
            if not 0 <= p <= 1:
                raise ValueError("depolarizing probabilities must lie in [0, 1]")
        for name, d in self.durations.items():
            if d < 0:
                raise ValueError(f"duration for {name!r} must be nonnegative")

    @property
    def n_qubits(self) -> int:
        return len(self.t1)

    @classmethod
    def mean(cls, n_qubits: int = 4) -> "NoiseModelParams":
        """Distribution means instead of sampled values."""
        return cls(
            t1=(_T1_MEAN,) * n_qubits,
            t2=(_T2_MEAN,) * n_qubits,
            p1=(_P1_MEAN,) * n_qubits,
            p2=_P2_MEAN,
        )

    @classmethod
    def noiseless(cls, n_qubits: int = 4) -> "NoiseModelParams":
        """Zero error rates and zero durations: density-matrix evolution equals the pure one."""
        return cls(
            t1=(_T1_MEAN,) * n_qubits,
            t2=(_T2_MEAN,) * n_qubits,
            p1=(0.0,) * n_qubits,
            p2=0.0,
            durations={name: 0.0 for name in GATE_DURATIONS},
        )

    def to_dict(self) -> dict:
        return {
            "t1": list(self.t1),
            "t2": list(self.t2),
            "p1": list(self.p1),
            "p2": self.p2,
            "durations": dict(self.durations),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModelParams":
        return cls(
            t1=tuple(d["t1"]),
            t2=tuple(d["t2"]),
            p1=tuple(d["p1"]),
            p2=float(d["p2"]),
            durations=dict(d.get("durations", GATE_DURATIONS)),
            seed=d.get("seed"),
        )


def _positive_normal(rng: np.random.Generator, mean: float, std: float) -> float:
    # Resample rather than clamp: a zero coherence time is singular.
    while True:
        x = rng.normal(mean, std)
        if x > 0:
            return float(x)


def sample_noise_model(seed: int, n_qubits: int = 4) -> NoiseModelParams:
    """Draw per-qubit T1/T2 and error rates; T2 is capped at 2*T1 for physicality."""
    rng = np.random.default_rng(seed)
    t1 = [_positive_normal(rng, _T1_MEAN, _T1_STD) for _ in range(n_qubits)]
    t2 = [
        min(_positive_normal(rng, _T2_MEAN, _T2_STD), 2 * t1[q])
        for q in range(n_qubits)
    ]
    p1 = [_positive_normal(rng, _P1_MEAN, _P1_STD) for _ in range(n_qubits)]
    p2 = _positive_normal(rng, _P2_MEAN, _P2_STD)
    return NoiseModelParams(t1=tuple(t1), t2=tuple(t2), p1=tuple(p1), p2=p2, seed=seed)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A CPTP map given by its Kraus operators; completeness is checked on construction."""

    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        dim = self.operators[0].shape[0]
        total = sum(k.conj().T @ k for k in self.operators)
        defect = np.max(np.abs(total - np.eye(dim)))
        if defect > 1e-10:
            raise ValueError(f"Kraus completeness violated (defect {defect:.2e})")
        for k in self.operators:
            k.setflags(write=False)

    @property
    def arity(self) -> int:
        return int(round(np.log2(self.operators[0].shape[0])))


def amplitude_damping_ops(gamma: float) -> list[np.ndarray]:
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return [k0, k1]


def phase_damping_ops(lam: float) -> list[np.ndarray]:
    k0 = np.array([[1, 0], [0, np.sqrt(1 - lam)]], dtype=complex)
    k1 = np.array([[0, 0], [0, np.sqrt(lam)]], dtype=complex)
    return [k0, k1]


@lru_cache(maxsize=512)
def thermal_relaxation_channel(t1: float, t2: float, duration: float) -> KrausChannel:
    """Amplitude damping composed with pure dephasing over one instruction duration.

    gamma = 1 - exp(-duration/T1); the pure dephasing rate is
    1/T_phi = 1/T2 - 1/(2*T1), giving lambda = 1 - exp(-duration/T_phi).
    Requires T2 <= 2*T1.
    """
    if t1 <= 0 or t2 <= 0:
        raise ValueError("T1 and T2 must be positive")
    if t2 > 2 * t1:
        raise ValueError("T2 must not exceed 2*T1")
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    gamma = 1.0 - np.exp(-duration / t1)
    dephasing_rate = 1.0 / t2 - 1.0 / (2.0 * t1)
    lam = 1.0 - np.exp(-duration * dephasing_rate)
    ops = [
        p @ a
        for p in phase_damping_ops(lam)
        for a in amplitude_damping_ops(gamma)
        if np.max(np.abs(p @ a)) > 0.0
    ]
    return KrausChannel(operators=tuple(ops))


def _pauli_products(arity: int) -> list[np.ndarray]:
    singles = [IDENTITY_2, PAULI_X, PAULI_Y, PAULI_Z]
    mats = []
    for combo in product(singles, repeat=arity):
        m = combo[0]
        for factor in combo[1:]:
            m = np.kron(m, factor)
        mats.append(m)
    return mats


@lru_cache(maxsize=64)
def depolarizing_channel(p: float, arity: int) -> KrausChannel:
    """rho -> (1-p) rho + p I/2^arity over `arity` qubits."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if arity not in (1, 2):
        raise ValueError("arity must be 1 or 2")
    n_paulis = 4**arity
    # Weight p/4^k on every non-identity Pauli reproduces the uniform mixture.
    paulis = _pauli_products(arity)
    ops = [np.sqrt(1 - p + p / n_paulis) * paulis[0]]
    if p > 0:
        ops.extend(np.sqrt(p / n_paulis) * m for m in paulis[1:])
    return KrausChannel(operators=tuple(ops))


def zero_density(n_qubits: int) -> np.ndarray:
    rho = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def density_from_statevector(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


@lru_cache(maxsize=4096)
def _embed_cached(op_bytes: bytes, dim: int, targets: tuple[int, ...], n: int) -> np.ndarray:
    op = np.frombuffer(op_bytes, dtype=complex).reshape(dim, dim)
    k = len(targets)
    rest = [q for q in range(n) if q not in targets]
    full = np.kron(op, np.eye(2 ** (n - k), dtype=complex))
    # Axes currently hold qubits (targets..., rest...); permute into wire order.
    slot_order = list(targets) + rest
    perm = [slot_order.index(q) for q in range(n)]
    full = full.reshape([2] * (2 * n))
    full = full.transpose(perm + [n + a for a in perm])
    full = full.reshape(2**n, 2**n)
    full.setflags(write=False)
    return full


def embed_operator(op: np.ndarray, targets: tuple[int, ...], n_qubits: int) -> np.ndarray:
    """Lift a k-qubit operator acting on `targets` to the full 2^n space."""
    if len(set(targets)) != len(targets):
        raise ValueError("targets must be distinct")
    for q in targets:
        if not 0 <= q < n_qubits:
            raise ValueError(f"target {q} out of range for {n_qubits} qubits")
    if op.shape[0] != 2 ** len(targets):
        raise ValueError("operator dimension does not match target count")
    op = np.ascontiguousarray(op, dtype=complex)
    return _embed_cached(op.tobytes(), op.shape[0], tuple(targets), n_qubits)


def apply_unitary_dm(rho: np.ndarray, gate: np.ndarray, targets: tuple[int, ...]) -> np.ndarray:
    n = n_qubits_of(rho[0])
    full = embed_operator(gate, tuple(targets), n)
    return full @ rho @ full.conj().T


def apply_channel(rho: np.ndarray, channel: KrausChannel, targets: tuple[int, ...]) -> np.ndarray:
    """rho' = sum_K K rho K^dagger with K acting on `targets`."""
    if channel.arity != len(targets):
        raise ValueError(
            f"channel arity {channel.arity} does not match {len(targets)} targets"
        )
    n = n_qubits_of(rho[0])
    out = np.zeros_like(rho)
    for k in channel.operators:
        full = embed_operator(k, tuple(targets), n)
        out += full @ rho @ full.conj().T
    return out


def pauli_z_expectation_dm(rho: np.ndarray, qubit: int) -> float:
    """<Z_q> = trace(Z_q rho)."""
    n = n_qubits_of(rho[0])
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n} qubits")
    diag = np.diag(rho).reshape([2] * n)
    other_axes = tuple(a for a in range(n) if a != qubit)
    p0, p1 = diag.sum(axis=other_axes)
    value = p0 - p1
    if abs(value.imag) > 1e-12:
        raise ValueError(f"expectation has imaginary residue {value.imag:.2e}")
    return float(value.real)


def _pulse_noise(rho, qubit, noise, duration, p, depolarize_first):
    relax = thermal_relaxation_channel(noise.t1[qubit], noise.t2[qubit], duration)
    depol = depolarizing_channel(p, 1)
    first, second = (depol, relax) if depolarize_first else (relax, depol)
    rho = apply_channel(rho, first, (qubit,))
    return apply_channel(rho, second, (qubit,))


def noisy_apply_gate(
    rho: np.ndarray,
    name: str,
    gate: np.ndarray,
    targets: tuple[int, ...],
    noise: NoiseModelParams,
    depolarize_first: bool = False,
) -> np.ndarray:
    """Ideal unitary followed by the per-pulse noise of the priced gate set."""
    targets = tuple(targets)
    rho = apply_unitary_dm(rho, gate, targets)
    if name == "cnot":
        depol = depolarizing_channel(noise.p2, 2)
        if depolarize_first:
            rho = apply_channel(rho, depol, targets)
        for q in targets:
            relax = thermal_relaxation_channel(
                noise.t1[q], noise.t2[q], noise.durations["cnot"]
            )
            rho = apply_channel(rho, relax, (q,))
        if not depolarize_first:
            rho = apply_channel(rho, depol, targets)
        return rho
    if name not in X90_PULSES:
        raise ValueError(f"unknown gate name {name!r}")
    (qubit,) = targets
    for _ in range(X90_PULSES[name]):
        rho = _pulse_noise(
            rho, qubit, noise, noise.durations["x90"], noise.p1[qubit], depolarize_first
        )
    return rho


def measurement_relaxation(rho: np.ndarray, noise: NoiseModelParams) -> np.ndarray:
    """Relaxation during the measurement instruction, applied to every qubit."""
    n = n_qubits_of(rho[0])
    for q in range(n):
        relax = thermal_relaxation_channel(
            noise.t1[q], noise.t2[q], noise.durations["measure"]
        )
        rho = apply_channel(rho, relax, (q,))
    return rho
