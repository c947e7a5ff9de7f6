import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qreservoir import noise
from qreservoir import statevector as sv
from qreservoir.noise import (
    KrausChannel,
    NoiseModelParams,
    apply_channel,
    depolarizing_channel,
    density_from_statevector,
    embed_operator,
    measurement_relaxation,
    noisy_apply_gate,
    pauli_z_expectation_dm,
    sample_noise_model,
    thermal_relaxation_channel,
    zero_density,
)


def completeness_defect(channel: KrausChannel) -> float:
    dim = channel.operators[0].shape[0]
    total = sum(k.conj().T @ k for k in channel.operators)
    return float(np.max(np.abs(total - np.eye(dim))))


# --- noise model sampling -----------------------------------------------------

def test_sampled_model_positive_and_physical():
    for seed in range(20):
        m = sample_noise_model(seed)
        assert all(t > 0 for t in m.t1)
        assert all(t > 0 for t in m.t2)
        assert all(t2 <= 2 * t1 for t1, t2 in zip(m.t1, m.t2))
        assert all(p > 0 for p in m.p1) and m.p2 > 0


def test_sampling_is_deterministic():
    assert sample_noise_model(123) == sample_noise_model(123)
    assert sample_noise_model(123) != sample_noise_model(124)


def test_mean_model_matches_distribution_means():
    m = NoiseModelParams.mean(4)
    assert m.t1 == (500e-6,) * 4
    assert m.t2 == (400e-6,) * 4
    assert m.p1 == (1e-4,) * 4
    assert m.p2 == 1e-3


def test_gate_durations_fixed():
    m = NoiseModelParams.mean(4)
    assert m.durations == {
        "rz": 0.0, "x90": 20e-9, "cnot": 300e-9, "measure": 700e-9, "reset": 800e-9,
    }


def test_model_validation():
    with pytest.raises(ValueError):
        NoiseModelParams(t1=(1e-4,), t2=(3e-4,), p1=(0.0,), p2=0.0)  # T2 > 2 T1
    with pytest.raises(ValueError):
        NoiseModelParams(t1=(1e-4,), t2=(1e-4,), p1=(1.5,), p2=0.0)


def test_model_dict_roundtrip():
    m = sample_noise_model(7)
    assert NoiseModelParams.from_dict(m.to_dict()) == m


# --- thermal relaxation ---------------------------------------------------------

def test_relaxation_zero_duration_is_identity():
    ch = thermal_relaxation_channel(500e-6, 400e-6, 0.0)
    assert len(ch.operators) == 1
    assert np.allclose(ch.operators[0], np.eye(2))


def test_relaxation_infinite_t1_is_pure_dephasing():
    ch = thermal_relaxation_channel(np.inf, 400e-6, 300e-9)
    # no amplitude transfer |1> -> |0>: populations preserved
    rho = density_from_statevector(np.array([0, 1], dtype=complex))
    out = apply_channel(rho, ch, (0,))
    assert out[1, 1] == pytest.approx(1.0)
    # coherences shrink by exp(-d/T2)
    plus = density_from_statevector(np.array([1, 1], dtype=complex) / np.sqrt(2))
    out = apply_channel(plus, ch, (0,))
    assert out[0, 1].real == pytest.approx(0.5 * np.exp(-300e-9 / 400e-6))


def test_relaxation_rates_closed_form():
    t1, t2, d = 500e-6, 400e-6, 300e-9
    gamma = 1 - np.exp(-d / t1)
    lam = 1 - np.exp(-d * (1 / t2 - 1 / (2 * t1)))
    ch = thermal_relaxation_channel(t1, t2, d)
    one = density_from_statevector(np.array([0, 1], dtype=complex))
    out = apply_channel(one, ch, (0,))
    assert out[0, 0].real == pytest.approx(gamma, rel=1e-12)
    plus = density_from_statevector(np.array([1, 1], dtype=complex) / np.sqrt(2))
    out = apply_channel(plus, ch, (0,))
    assert out[0, 1].real == pytest.approx(
        0.5 * np.sqrt((1 - gamma) * (1 - lam)), rel=1e-12
    )


def test_relaxation_rejects_unphysical_t2():
    with pytest.raises(ValueError):
        thermal_relaxation_channel(1e-4, 3e-4, 1e-9)


@given(
    t1=st.floats(1e-6, 1e-2),
    ratio=st.floats(0.05, 2.0),
    duration=st.floats(0.0, 1e-3),
)
@settings(max_examples=80, deadline=None)
def test_relaxation_completeness(t1, ratio, duration):
    ch = thermal_relaxation_channel(t1, ratio * t1, duration)
    assert completeness_defect(ch) < 1e-10


# --- depolarizing ---------------------------------------------------------------

def test_depolarizing_zero_probability_identity():
    ch = depolarizing_channel(0.0, 1)
    assert len(ch.operators) == 1
    assert np.allclose(ch.operators[0], np.eye(2))


def test_depolarizing_full_mixes():
    ch = depolarizing_channel(1.0, 1)
    rng = np.random.default_rng(0)
    psi = sv.apply_1q(sv.zero_state(1), sv.rot_zyz(*rng.uniform(-3, 3, 3)), 0)
    out = apply_channel(density_from_statevector(psi), ch, (0,))
    assert np.allclose(out, np.eye(2) / 2, atol=1e-12)


def test_depolarizing_two_qubit_diagonal():
    p = 1e-3
    out = apply_channel(zero_density(2), depolarizing_channel(p, 2), (0, 1))
    expected = np.diag([1 - p + p / 4, p / 4, p / 4, p / 4]).astype(complex)
    assert np.max(np.abs(out - expected)) < 1e-15


def test_depolarizing_rejects_bad_probability():
    with pytest.raises(ValueError):
        depolarizing_channel(-0.1, 1)
    with pytest.raises(ValueError):
        depolarizing_channel(1.1, 2)


@given(p=st.floats(0.0, 1.0), arity=st.sampled_from([1, 2]))
@settings(max_examples=60, deadline=None)
def test_depolarizing_completeness(p, arity):
    assert completeness_defect(depolarizing_channel(p, arity)) < 1e-10


# --- channel application --------------------------------------------------------

def _random_rho(rng, n):
    psi = sv.zero_state(n)
    for q in range(n):
        psi = sv.apply_1q(psi, sv.rot_zyz(*rng.uniform(-3, 3, 3)), q)
    for q in range(n - 1):
        psi = sv.apply_cnot(psi, q, q + 1)
    return density_from_statevector(psi)


def test_apply_channel_identity():
    rho = _random_rho(np.random.default_rng(1), 2)
    ch = KrausChannel(operators=(np.eye(2, dtype=complex),))
    assert np.allclose(apply_channel(rho, ch, (1,)), rho)


def test_full_amplitude_damping_resets_qubit():
    ch = thermal_relaxation_channel(1e-6, 1e-6, 1.0)  # duration >> T1
    rho = _random_rho(np.random.default_rng(2), 2)
    out = apply_channel(rho, ch, (0,))
    assert pauli_z_expectation_dm(out, 0) == pytest.approx(1.0, abs=1e-9)


def test_depolarizing_half_shrinks_bloch_vector():
    plus = density_from_statevector(np.array([1, 1], dtype=complex) / np.sqrt(2))
    out = apply_channel(plus, depolarizing_channel(0.5, 1), (0,))
    # <X> goes from 1 to 1-p
    assert (out[0, 1] + out[1, 0]).real == pytest.approx(0.5, rel=1e-12)


def test_apply_channel_arity_mismatch():
    with pytest.raises(ValueError):
        apply_channel(zero_density(2), depolarizing_channel(0.1, 2), (0,))


@given(seed=st.integers(0, 5000), p=st.floats(0, 1))
@settings(max_examples=50, deadline=None)
def test_channels_preserve_trace_hermiticity_psd(seed, p):
    rng = np.random.default_rng(seed)
    rho = _random_rho(rng, 2)
    rho = apply_channel(rho, depolarizing_channel(p, 1), (int(rng.integers(0, 2)),))
    rho = apply_channel(
        rho, thermal_relaxation_channel(500e-6, 400e-6, rng.uniform(0, 1e-3)), (0,)
    )
    assert abs(np.trace(rho).real - 1.0) < 1e-10
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
    assert np.linalg.eigvalsh(rho).min() > -1e-9


# --- expectations and noisy gates ----------------------------------------------

def test_expectation_dm_examples():
    assert pauli_z_expectation_dm(zero_density(1), 0) == pytest.approx(1.0)
    mixed = np.eye(4, dtype=complex) / 4
    assert pauli_z_expectation_dm(mixed, 1) == pytest.approx(0.0)


def test_expectation_after_full_decay():
    one = density_from_statevector(np.array([0, 1], dtype=complex))
    out = apply_channel(one, thermal_relaxation_channel(1e-6, 1e-6, 1.0), (0,))
    assert pauli_z_expectation_dm(out, 0) == pytest.approx(1.0, abs=1e-9)


def test_rz_is_noise_free():
    m = NoiseModelParams.mean(1)
    rho = density_from_statevector(
        sv.apply_1q(sv.zero_state(1), sv.HADAMARD, 0)
    )
    gate = sv.rz(0.9)
    noisy = noisy_apply_gate(rho, "rz", gate, (0,), m)
    ideal = gate @ rho @ gate.conj().T
    assert np.max(np.abs(noisy - ideal)) < 1e-15


def test_zero_noise_gates_match_pure_conjugation():
    m = NoiseModelParams.noiseless(2)
    rho = zero_density(2)
    rho = noisy_apply_gate(rho, "h", sv.HADAMARD, (0,), m)
    rho = noisy_apply_gate(rho, "cnot", np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex), (0, 1), m)
    psi = sv.apply_cnot(sv.apply_1q(sv.zero_state(2), sv.HADAMARD, 0), 0, 1)
    assert np.max(np.abs(rho - density_from_statevector(psi))) < 1e-12


def test_x90_with_mean_noise_loses_purity():
    m = NoiseModelParams.mean(1)
    rho = noisy_apply_gate(zero_density(1), "x90", sv.X90, (0,), m)
    assert abs(np.trace(rho).real - 1.0) < 1e-10
    purity = np.trace(rho @ rho).real
    assert purity < 1.0
    assert purity > 0.99  # mean-parameter noise is weak


def test_measurement_relaxation_costs_700ns():
    m = NoiseModelParams.mean(1)
    one = density_from_statevector(np.array([0, 1], dtype=complex))
    out = measurement_relaxation(one, m)
    expected = -(1 - 2 * (1 - np.exp(-700e-9 / 500e-6)))
    assert pauli_z_expectation_dm(out, 0) == pytest.approx(expected, rel=1e-9)
    assert pauli_z_expectation_dm(out, 0) > -1.0


def test_embed_operator_matches_kron():
    rng = np.random.default_rng(3)
    gate = sv.rot_zyz(*rng.uniform(-3, 3, 3))
    full = embed_operator(gate, (1,), 3)
    expected = np.kron(np.kron(np.eye(2), gate), np.eye(2))
    assert np.max(np.abs(full - expected)) < 1e-15


def test_depolarize_first_switch_changes_composition_order():
    m = NoiseModelParams.mean(1)
    rho0 = density_from_statevector(np.array([0, 1], dtype=complex))
    a = noisy_apply_gate(rho0, "x90", sv.X90, (0,), m, depolarize_first=False)
    b = noisy_apply_gate(rho0, "x90", sv.X90, (0,), m, depolarize_first=True)
    assert abs(np.trace(a).real - 1.0) < 1e-10
    assert abs(np.trace(b).real - 1.0) < 1e-10
    assert not np.allclose(a, b, atol=1e-12)  # orders differ measurably
