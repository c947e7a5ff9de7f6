import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qreservoir import statevector as sv
from qreservoir import vqc
from qreservoir.noise import NoiseModelParams
from qreservoir.vqc import (
    EVALS,
    NoisyBackend,
    encode,
    entangle_block,
    parameter_shift_gradient,
    vqc_forward,
)


def gate_by_gate_forward(params, x, n_meas):
    """Independent route: explicit per-gate statevector evolution."""
    psi = encode(x)
    for block in range(params.shape[0]):
        psi = entangle_block(psi)
        for q in range(4):
            psi = sv.apply_1q(psi, sv.rot_zyz(*params[block, q]), q)
    return np.array([sv.pauli_z_expectation(psi, q) for q in range(n_meas)])


# --- encoding --------------------------------------------------------------------

def test_encode_zero_input_uniform():
    psi = encode(np.zeros(4))
    assert np.allclose(psi, np.full(16, 0.25))


def test_encode_matches_per_qubit_gate_oracle():
    rng = np.random.default_rng(8)
    for _ in range(10):
        x = rng.uniform(-2.5, 2.5, 4)
        psi = sv.zero_state(4)
        for q in range(4):
            psi = sv.apply_1q(psi, sv.HADAMARD, q)
            psi = sv.apply_1q(psi, sv.ry(np.arctan(x[q])), q)
            psi = sv.apply_1q(psi, sv.rz(np.arctan(x[q] ** 2)), q)
        assert np.max(np.abs(encode(x) - psi)) < 1e-12


def test_encode_explicit_amplitudes():
    # single-qubit closed form: [e^{-ig/2} cos(f/2+pi/4), e^{ig/2} sin(f/2+pi/4)]
    x = np.array([0.5, -0.5, 2.0, -2.0])
    qubits = []
    for xi in x:
        f, g = np.arctan(xi), np.arctan(xi**2)
        qubits.append(
            np.array(
                [
                    np.exp(-0.5j * g) * np.cos(f / 2 + np.pi / 4),
                    np.exp(0.5j * g) * np.sin(f / 2 + np.pi / 4),
                ]
            )
        )
    expected = np.kron(np.kron(np.kron(qubits[0], qubits[1]), qubits[2]), qubits[3])
    assert np.max(np.abs(encode(x) - expected)) < 1e-12


def test_encode_rejects_wrong_length():
    with pytest.raises(ValueError):
        encode(np.zeros(3))


# --- entangler -------------------------------------------------------------------

def test_entangler_fixes_ground_state():
    psi = entangle_block(sv.zero_state(4))
    assert np.allclose(psi, sv.zero_state(4))


def test_entangler_preserves_uniform_superposition():
    uniform = np.full(16, 0.25, dtype=complex)
    assert np.allclose(entangle_block(uniform), uniform)


def test_entangler_basis_cascade_oracle():
    # independently trace each basis index through the CNOT wiring b bit-ops
    for start in range(16):
        bits = [(start >> (3 - q)) & 1 for q in range(4)]
        for control, target in vqc.ENTANGLER_PAIRS:
            bits[target] ^= bits[control]
        end = sum(bit << (3 - q) for q, bit in enumerate(bits))
        psi = np.zeros(16, dtype=complex)
        psi[start] = 1.0
        out = entangle_block(psi)
        assert out[end] == pytest.approx(1.0)
    # spot check from the same oracle: |1000> -> |1110>
    psi = np.zeros(16, dtype=complex)
    psi[0b1000] = 1.0
    assert entangle_block(psi)[0b1110] == pytest.approx(1.0)


def test_entangler_rejects_wrong_register():
    with pytest.raises(ValueError):
        entangle_block(sv.zero_state(3))


# --- forward ---------------------------------------------------------------------

def test_forward_zero_params_zero_input():
    out = vqc_forward(np.zeros((2, 4, 3)), np.zeros(4), 4)
    assert np.allclose(out, 0.0, atol=1e-12)


def test_forward_matches_gate_by_gate():
    rng = np.random.default_rng(11)
    for depth in (1, 2, 4):
        params = rng.uniform(-np.pi, np.pi, (depth, 4, 3))
        x = rng.uniform(-2, 2, 4)
        assert np.max(np.abs(vqc_forward(params, x, 4) - gate_by_gate_forward(params, x, 4))) < 1e-12


def test_forward_truncation_consistency():
    rng = np.random.default_rng(12)
    params = rng.uniform(-np.pi, np.pi, (2, 4, 3))
    x = rng.uniform(-1, 1, 4)
    full = vqc_forward(params, x, 4)
    three = vqc_forward(params, x, 3)
    assert np.array_equal(full[:3], three)


def test_forward_two_pi_periodicity():
    rng = np.random.default_rng(13)
    params = rng.uniform(-np.pi, np.pi, (2, 4, 3))
    x = rng.uniform(-1, 1, 4)
    base = vqc_forward(params, x, 4)
    for flat_index in (0, 7, 23):
        shifted = params.copy()
        shifted.ravel()[flat_index] += 2 * np.pi
        assert np.max(np.abs(vqc_forward(shifted, x, 4) - base)) < 1e-10


@given(seed=st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_forward_outputs_bounded(seed):
    rng = np.random.default_rng(seed)
    params = rng.uniform(-np.pi, np.pi, (2, 4, 3))
    x = rng.uniform(-5, 5, 4)
    out = vqc_forward(params, x, 4)
    assert np.all(out >= -1.0) and np.all(out <= 1.0)


def test_forward_rejects_bad_n_meas():
    with pytest.raises(ValueError):
        vqc_forward(np.zeros((1, 4, 3)), np.zeros(4), 2)


# --- gradients ------------------------------------------------------------------

def test_gradient_zero_upstream():
    params = np.random.default_rng(0).uniform(-np.pi, np.pi, (2, 4, 3))
    grad = parameter_shift_gradient(params, np.zeros(4), 3, np.zeros(3))
    assert np.allclose(grad, 0.0)


def test_gradient_matches_finite_difference():
    rng = np.random.default_rng(14)
    for _ in range(5):
        params = rng.uniform(-np.pi, np.pi, (2, 4, 3))
        x = rng.uniform(-1.5, 1.5, 4)
        upstream = rng.uniform(-1, 1, 3)
        grad = parameter_shift_gradient(params, x, 3, upstream)
        eps = 1e-5
        flat = params.ravel()
        for k in rng.choice(flat.size, size=6, replace=False):
            up, dn = flat.copy(), flat.copy()
            up[k] += eps
            dn[k] -= eps
            fd = (
                upstream @ vqc_forward(up.reshape(params.shape), x, 3)
                - upstream @ vqc_forward(dn.reshape(params.shape), x, 3)
            ) / (2 * eps)
            assert abs(grad[k] - fd) < 1e-6


def test_gradient_fast_path_matches_generic_backend_loop():
    class PassThrough:  # not a NoiselessBackend: forces the generic 2-evals loop
        deterministic = True

        def expectations(self, params, x, n_meas):
            return vqc.NOISELESS.expectations(params, x, n_meas)

    rng = np.random.default_rng(15)
    params = rng.uniform(-np.pi, np.pi, (2, 4, 3))
    x = rng.uniform(-1, 1, 4)
    upstream = rng.uniform(-1, 1, 4)
    fast = parameter_shift_gradient(params, x, 4, upstream)
    slow = parameter_shift_gradient(params, x, 4, upstream, backend=PassThrough())
    assert np.max(np.abs(fast - slow)) < 1e-12


def test_gradient_evaluation_accounting():
    params = np.random.default_rng(1).uniform(-np.pi, np.pi, (2, 4, 3))
    total0, shift0 = EVALS.snapshot()
    parameter_shift_gradient(params, np.zeros(4), 3, np.ones(3))
    total, shift = EVALS.snapshot()
    assert total - total0 == 48  # 2 x 24 parameters
    assert shift - shift0 == 48


def test_forward_counts_one_evaluation():
    total0, shift0 = EVALS.snapshot()
    vqc_forward(np.zeros((1, 4, 3)), np.zeros(4), 4)
    total, shift = EVALS.snapshot()
    assert (total - total0, shift - shift0) == (1, 0)


def test_gradient_length_matches_parameter_count():
    grad = parameter_shift_gradient(
        np.zeros((2, 4, 3)), np.zeros(4), 4, np.ones(4)
    )
    assert grad.shape == (24,)


# --- noisy backend ---------------------------------------------------------------

def test_noisy_backend_zero_noise_matches_statevector():
    backend = NoisyBackend(NoiseModelParams.noiseless(4))
    rng = np.random.default_rng(16)
    for _ in range(3):
        params = rng.uniform(-np.pi, np.pi, (2, 4, 3))
        x = rng.uniform(-1.5, 1.5, 4)
        assert np.max(np.abs(vqc_forward(params, x, 4, backend) - vqc_forward(params, x, 4))) < 1e-9


def test_noisy_backend_shots_reproducible_and_bounded():
    backend = NoisyBackend(NoiseModelParams.mean(4), shots=256, seed=5)
    params = np.random.default_rng(2).uniform(-np.pi, np.pi, (2, 4, 3))
    a = vqc_forward(params, np.zeros(4), 4, backend)
    backend2 = NoisyBackend(NoiseModelParams.mean(4), shots=256, seed=5)
    b = vqc_forward(params, np.zeros(4), 4, backend2)
    assert np.array_equal(a, b)
    assert np.all(np.abs(a) <= 1.0)
    assert not backend.deterministic


def test_noisy_gradient_uses_same_rule():
    backend = NoisyBackend(NoiseModelParams.mean(4))
    params = np.random.default_rng(3).uniform(-np.pi, np.pi, (1, 4, 3))
    x = np.array([0.1, -0.2, 0.3, 0.0])
    upstream = np.ones(3)
    grad = parameter_shift_gradient(params, x, 3, upstream, backend=backend)
    eps = 1e-5
    flat = params.ravel()
    k = 4
    up, dn = flat.copy(), flat.copy()
    up[k] += eps
    dn[k] -= eps
    fd = (
        upstream @ vqc_forward(up.reshape(params.shape), x, 3, backend)
        - upstream @ vqc_forward(dn.reshape(params.shape), x, 3, backend)
    ) / (2 * eps)
    assert abs(grad[k] - fd) < 1e-6
