"""Acceptance suite. Each test carries a ``criterion`` marker; the terminal
summary prints one PASS/FAIL line per criterion."""
import time
from fractions import Fraction

import numpy as np
import pytest

from switchsim import closed_forms as cf
from switchsim.channels import (
    KrausChannel,
    bit_flip,
    choi,
    choi_distance,
    compose,
    pauli_channel,
    phase_flip,
    remix_kraus,
    validate_cptp,
)
from switchsim.linalg import KET_0, KET_1, KET_PLUS, KET_PLUS_I, fidelity, ket_to_dm, tensor
from switchsim.optimize import haar_control_values, optimize_control
from switchsim.protocol import run_protocol, success_probability, target_channel
from switchsim.sampling import haar_state, random_isometry
from switchsim.switch import expected_kraus_count, higher_order_switch, nested_switch, quantum_switch

PP = tensor(KET_PLUS, KET_PLUS)


def interior_pauli(rng):
    while True:
        p = rng.dirichlet([1.0, 1.0, 1.0])
        if p.min() > 1e-3:
            return cf.PauliParams(*p)


def interior_flip(rng):
    r, s = rng.uniform(0.01, 0.99, size=2)
    return cf.FlipParams(r, s)


def random_channel(rng, m=2):
    v = random_isometry(2 * m, 2, rng)
    return KrausChannel(tuple(v.reshape(m, 2, 2)), label=f"random{m}")


@pytest.mark.criterion(1, "plain Pauli switch heralds with probability 2 p1 p2 (1e-10, <5 s)")
def test_pauli_switch_closed_form(rng):
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        p = interior_pauli(rng)
        ch = pauli_channel(p.p0, p.p1, p.p2)
        got = success_probability(quantum_switch(ch, ch), KET_PLUS)
        worst = max(worst, abs(got - 2 * p.p1 * p.p2))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-10
    assert elapsed < 5.0


@pytest.mark.criterion(2, "higher-order Pauli table, q2 q3 q4 u1 u2 (1e-9, <30 s)")
def test_pauli_higher_table(rng):
    t0 = time.perf_counter()
    sigma = {"Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1.0 + 0j, -1.0])}
    for _ in range(50):
        p = interior_pauli(rng)
        report = cf.verify_example_table(1, p)
        assert report.passed, report.to_dict()

        p0, p1, p2 = p.p0, p.p1, p.p2
        _, hsw = cf.switches_for(1, p)
        res = run_protocol(hsw, PP)
        q = {o.label: o.probability for o in res.outcomes}
        assert abs(q["+-"] - 8 * p0**2 * p1 * p2) < 1e-9
        assert abs(q["-+"] - 4 * p1 * p2 * (p0**2 + p1**2 + p2**2)) < 1e-9
        assert abs(q["--"] - 8 * p0 * p1 * p2 * (p1 + p2)) < 1e-9

        # Pauli weights of the "++" branch read straight off its Choi matrix
        j = res.outcome("++").conditional_choi
        j = j / np.trace(j).real
        weight = {k: (s.T.reshape(-1).conj() @ j @ s.T.reshape(-1)).real / 2 for k, s in sigma.items()}
        table = cf.pauli_table(p)
        assert abs(weight["Y"] - table["u1"]) < 1e-9
        assert abs(weight["Z"] - table["u2"]) < 1e-9
    assert time.perf_counter() - t0 < 30.0


@pytest.mark.criterion(3, "Pauli advantage region on a 200x200 grid agrees with the sign of Delta")
def test_pauli_region():
    samples = cf.scan_region(1, 200, check_every=10)
    checked = [s for s in samples if s.checked]
    assert len(checked) >= len(samples) // 10
    for s in checked:
        assert s.check_error < 1e-9
        assert s.bf_advantage_flag == (cf.pauli_delta(s.param1, s.param2) > 0)
        assert s.advantage_flag == s.bf_advantage_flag

    edge = 1 - 1 / np.sqrt(6)
    for p1 in np.linspace(0.01, edge - 0.01, 25):
        p = cf.PauliParams.from_p1_p2(p1, edge - p1)
        assert abs(p.p0 - 1 / np.sqrt(6)) < 1e-12
        assert cf.pauli_delta(p.p1, p.p2) > 0
        assert cf.closed_form_advantage(1, p) > 0
        base, high = cf.brute_force_probs(1, p)
        assert high - base > 0


@pytest.mark.criterion(4, "bit/phase-flip example: rs, 4rs(1-r)(1-s), exact boundary, r,s<1/2 region")
def test_bitphase(rng):
    for _ in range(100):
        fp = interior_flip(rng)
        base, high = cf.brute_force_probs(2, fp)
        assert abs(base - fp.r * fp.s) < 1e-10
        assert abs(high - 4 * fp.r * fp.s * (1 - fp.r) * (1 - fp.s)) < 1e-10

    boundary = [(Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 4), Fraction(2, 3)), (Fraction(1, 3), Fraction(5, 8))]
    for r, s in boundary:
        assert (1 - r) * (1 - s) == Fraction(1, 4)
        fp = cf.FlipParams(r, s)
        assert cf.closed_form_advantage(2, fp) == 0
        sample = cf.RegionSample(float(r), float(s), *map(float, cf.closed_form_probs(2, fp)))
        assert sample.advantage_flag is False
        base, high = cf.brute_force_probs(2, fp)
        assert abs(high - base) < 1e-12

    samples = cf.scan_region(2, 100, check_every=7)
    inside = [s for s in samples if s.param1 < 0.5 and s.param2 < 0.5]
    assert len(inside) == 50 * 50
    assert all(s.advantage_flag for s in inside)
    assert all(s.bf_advantage_flag for s in inside if s.checked)
    exact = [cf.closed_form_advantage(2, cf.FlipParams(Fraction(i, 40), Fraction(j, 40))) for i in range(1, 20) for j in range(1, 20)]
    assert all(a > 0 for a in exact)


@pytest.mark.criterion(5, "S(B,B) and S(G,G) never herald; their higher-order switch gives 4rs(1-r)(1-s)")
def test_useless_switches(rng):
    controls = [KET_PLUS, KET_0, KET_1, KET_PLUS_I, np.eye(2) / 2] + [haar_state(2, rng) for _ in range(10)]
    for _ in range(10):
        fp = interior_flip(rng)
        b, g = bit_flip(fp.r), phase_flip(fp.s)
        for sw in (quantum_switch(b, b), quantum_switch(g, g)):
            for w in controls:
                res = run_protocol(sw, w)
                assert res.success_probability == 0.0
                assert not [o for o in res.outcomes if o.perfect and o.probability > 1e-12]

    for _ in range(100):
        fp = interior_flip(rng)
        _, hsw = cf.switches_for(3, fp)
        got = success_probability(hsw, PP)
        expected = 4 * fp.r * fp.s * (1 - fp.r) * (1 - fp.s)
        assert expected > 0
        assert abs(got - expected) < 1e-10


@pytest.mark.criterion(6, "negative case capped at 1/4: Haar controls and optimizer restarts (<5 min)")
def test_negative_result():
    t0 = time.perf_counter()
    half = Fraction(1, 2)
    _, hsw = cf.switches_for(2, cf.FlipParams(half, half))
    assert abs(success_probability(hsw, PP) - 0.25) < 1e-9

    haar = haar_control_values(hsw, 1000, seed=12345)
    assert len(haar) == 1000
    assert haar.max() <= 0.25 + 1e-6

    opt = optimize_control(hsw, restarts=50, seed=12345)
    assert opt.restarts_used == 50
    assert all(v <= 0.25 + 1e-6 for _, v in opt.history)
    assert opt.best_value <= 0.25 + 1e-6
    assert time.perf_counter() - t0 < 300.0


@pytest.mark.criterion(7, "every switch is CPTP (<1e-9); Kraus counts 4, 16, 256")
def test_supermap_sanity(rng):
    switches = []
    for ex, params in ((1, interior_pauli(rng)), (2, interior_flip(rng)), (3, interior_flip(rng))):
        plain, higher = cf.switches_for(ex, params)
        switches += plain + [higher]
    e, f = random_channel(rng), random_channel(rng)
    switches.append(higher_order_switch(quantum_switch(e, f), quantum_switch(f, e)))
    for n, count in ((1, 4), (2, 16), (3, 256)):
        sw = nested_switch(n, e, f)
        assert sw.kraus_count == count == expected_kraus_count(n, 2)
        switches.append(sw)
    for sw in switches:
        rep = validate_cptp(sw.channel)
        assert rep.passed
        assert rep.max_completeness_residual < 1e-9


@pytest.mark.criterion(8, "switch Choi matrices and success probabilities ignore the Kraus decomposition")
def test_decomposition_independence(rng):
    fp = interior_flip(rng)
    b, g = bit_flip(fp.r), phase_flip(fp.s)
    s_ref = quantum_switch(b, g)
    h_ref = higher_order_switch(s_ref, s_ref)
    j_s, j_h = choi(s_ref.channel), choi(h_ref.channel)
    p_s, p_h = success_probability(s_ref, KET_PLUS), success_probability(h_ref, PP)
    for _ in range(20):
        b2 = remix_kraus(b, random_isometry(3, 2, rng))
        g2 = remix_kraus(g, random_isometry(2, 2, rng))
        s = quantum_switch(b2, g2)
        h = higher_order_switch(s, s)
        assert np.max(np.abs(choi(s.channel) - j_s)) < 1e-9
        assert np.max(np.abs(choi(h.channel) - j_h)) < 1e-9
        assert abs(success_probability(s, KET_PLUS) - p_s) < 1e-9
        assert abs(success_probability(h, PP) - p_h) < 1e-9


@pytest.mark.criterion(9, "probabilities sum to 1, corrected branches are exact, classical controls give fixed orders")
def test_protocol_properties(rng):
    cases = []
    for ex, params in ((1, interior_pauli(rng)), (2, interior_flip(rng)), (3, interior_flip(rng))):
        plain, higher = cf.switches_for(ex, params)
        cases += [(sw, KET_PLUS) for sw in plain] + [(higher, PP), (higher, haar_state(4, rng))]
    e, f = random_channel(rng), random_channel(rng, 3)
    cases.append((quantum_switch(e, f), haar_state(2, rng)))

    inputs = [haar_state(2, rng) for _ in range(20)]
    n_perfect = 0
    for sw, w in cases:
        res = run_protocol(sw, w)
        assert abs(sum(o.probability for o in res.outcomes) - 1) < 1e-9
        for o in res.outcomes:
            if not o.perfect:
                continue
            n_perfect += 1
            for psi in inputs:
                out = o.conditional_state(ket_to_dm(psi))
                fixed = o.correction @ out @ o.correction.conj().T
                assert fidelity(fixed, ket_to_dm(psi)) > 1 - 1e-9
    assert n_perfect > 0

    for a, b in ((e, f), (bit_flip(0.3), phase_flip(0.6)), (pauli_channel(0.5, 0.2, 0.3), bit_flip(0.1))):
        sw = quantum_switch(a, b)
        assert choi_distance(target_channel(sw, KET_0), compose(a, b)) < 1e-9
        assert choi_distance(target_channel(sw, KET_1), compose(b, a)) < 1e-9
