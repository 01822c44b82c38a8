import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from switchsim.channels import bit_flip, kraus_choi, pauli_channel, phase_flip
from switchsim.closed_forms import FlipParams, PauliParams, switches_for
from switchsim.linalg import I2, KET_0, KET_1, KET_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, ket_to_dm, tensor
from switchsim.protocol import (
    MeasurementBasis, classify_outcome, pauli_label, run_protocol, success_probability,
    target_channel, verify_input_independence,
)
from switchsim.sampling import haar_state, random_density_matrix, random_unitary
from switchsim.switch import quantum_switch

PP = tensor(KET_PLUS, KET_PLUS)


def test_classify_pauli_conjugation():
    u = classify_outcome(kraus_choi([np.sqrt(0.3) * SIGMA_X]))
    assert u is not None
    assert pauli_label(u) == "X"
    assert np.allclose(u @ SIGMA_X, np.eye(2))


def test_classify_rank_two_is_noisy():
    ops = [np.sqrt(0.2) * I2, np.sqrt(0.2) * SIGMA_Z]
    assert classify_outcome(kraus_choi(ops)) is None


def test_classify_generic_unitary():
    theta = 0.37
    rot = np.cos(theta) * I2 - 1j * np.sin(theta) * SIGMA_X
    u = classify_outcome(kraus_choi([0.5 * rot]))
    assert pauli_label(u) is None
    m = u @ rot
    assert np.allclose(m, m[0, 0] * np.eye(2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-6, 1))
def test_correction_inverts_random_unitary(seed, q):
    v = random_unitary(2, seed)
    u = classify_outcome(kraus_choi([np.sqrt(q) * v]))
    assert u is not None
    m = u @ v
    assert np.allclose(m, m[0, 0] * np.eye(2), atol=1e-9)
    flat = u.reshape(-1)
    first = flat[np.argmax(np.abs(flat) > 1e-8)]
    assert abs(first.imag) < 1e-12 and first.real > 0


def test_pauli_switch_outcomes():
    res = run_protocol(quantum_switch(pauli_channel(1 / 3, 1 / 3, 1 / 3), pauli_channel(1 / 3, 1 / 3, 1 / 3)))
    assert [o.label for o in res.outcomes] == ["+", "-"]
    assert res.perfect_labels == ["-"]
    minus = res.outcome("-")
    assert abs(minus.probability - 2 / 9) < 1e-12
    assert minus.correction_label == "X"
    assert res.outcome("+").classification == "noisy"
    assert abs(res.success_probability - 2 / 9) < 1e-12


def test_example2_minus_minus_noisy():
    _, h = switches_for(2, FlipParams(0.3, 0.4))
    res = run_protocol(h, PP)
    assert res.perfect_labels == ["+-", "-+"]
    assert all(res.outcome(k).correction_label == "Y" for k in ("+-", "-+"))
    assert res.outcome("--").classification == "noisy"


def test_useless_switch_any_control():
    rng = np.random.default_rng(1)
    sw = quantum_switch(bit_flip(0.35), bit_flip(0.35))
    for w in [KET_PLUS, KET_0, haar_state(2, rng), random_density_matrix(2, rng)]:
        assert success_probability(sw, w) == 0.0


def test_zero_probability_outcome_is_noisy():
    sw = quantum_switch(phase_flip(0.0), phase_flip(0.0))
    res = run_protocol(sw, KET_PLUS)
    assert res.outcome("-").probability < 1e-12
    assert res.outcome("-").classification == "noisy"
    assert res.outcome("+").perfect and res.outcome("+").correction_label == "I"


def test_mixed_control_is_convex_combination():
    _, h = switches_for(1, PauliParams(0.5, 0.3, 0.2))
    rng = np.random.default_rng(2)
    a, b = haar_state(4, rng), haar_state(4, rng)
    mixed = 0.25 * ket_to_dm(a) + 0.75 * ket_to_dm(b)
    outs = {o.label: o.probability for o in run_protocol(h, mixed).outcomes}
    oa = {o.label: o.probability for o in run_protocol(h, a).outcomes}
    ob = {o.label: o.probability for o in run_protocol(h, b).outcomes}
    for k in outs:
        assert abs(outs[k] - (0.25 * oa[k] + 0.75 * ob[k])) < 1e-12


def test_computational_basis_measurement():
    sw = quantum_switch(bit_flip(0.2), phase_flip(0.3))
    res = run_protocol(sw, KET_PLUS, MeasurementBasis.computational(1))
    assert [o.label for o in res.outcomes] == ["0", "1"]
    assert all(abs(o.probability - 0.5) < 1e-12 for o in res.outcomes)


def test_basis_validation():
    with pytest.raises(ValueError):
        MeasurementBasis.from_vectors([(KET_0, KET_PLUS)])
    sw = quantum_switch(bit_flip(0.2), phase_flip(0.3))
    with pytest.raises(ValueError):
        run_protocol(sw, KET_PLUS, MeasurementBasis.plus_minus(2))
    with pytest.raises(ValueError):
        run_protocol(sw, PP)
    with pytest.raises(ValueError):
        run_protocol(sw, np.array([1.0, 1.0]))


def test_classical_controls_give_fixed_order():
    e, f = bit_flip(0.2), pauli_channel(0.5, 0.3, 0.2)
    sw = quantum_switch(e, f)
    rho = random_density_matrix(2, 4)
    assert np.allclose(target_channel(sw, KET_0)(rho), e(f(rho)))
    assert np.allclose(target_channel(sw, KET_1)(rho), f(e(rho)))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_input_independence(seed):
    rng = np.random.default_rng(seed)
    r, s = rng.uniform(0.05, 0.95, 2)
    _, h = switches_for(3, FlipParams(r, s))
    samples = [random_density_matrix(2, rng) for _ in range(5)]
    assert verify_input_independence(h, PP, None, samples) < 1e-12


def test_report_json():
    _, h = switches_for(2, FlipParams(0.25, 0.25))
    res = run_protocol(h, PP)
    d = res.to_dict()
    assert abs(d["success_probability"] - 0.140625) < 1e-12
    text = json.dumps(d)
    assert json.dumps(json.loads(text)) == text
    row = d["outcomes"][1]
    assert row["class"] == "perfect" and row["correction"] == "Y"
    m = np.array([complex(*z) for z in row["correction_matrix"]]).reshape(2, 2)
    prod = m @ SIGMA_Y
    assert np.allclose(prod, prod[0, 0] * np.eye(2)) and abs(abs(prod[0, 0]) - 1) < 1e-12
