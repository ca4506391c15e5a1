"""Spectral-radius moments, bound evaluators, supporting statistics."""

import numpy as np
import pytest

from conftest import dense_observable, embed, random_unit_rows
from quatopt.bpstats import (
    RunningMoments,
    epsilon,
    haar_block_second_moment,
    haar_sandwich_moment,
    reduced_density_matrix,
    second_moment_spectral_radius,
    smatrix_from_environment,
    theorem1_bound,
    theorem2_bound,
    varsigma_set,
)
from quatopt.circuits import (
    EvalCounter,
    brickwork_light_cones,
    build_template,
    light_cones,
)
from quatopt.models import local_z_observable, mixed_field_ising, observable_cost
from quatopt.randhaar import make_rng
from quatopt.simcore import Observable, PauliString, StateVector
from quatopt.smatrix import build_fqs_matrix


def test_epsilon_closed_forms():
    assert epsilon(np.eye(4)) == pytest.approx(0.0, abs=1e-15)
    assert epsilon(np.array([[1, 0], [0, -1.0]])) == pytest.approx(2.0)
    assert epsilon(np.eye(8) / 8) == pytest.approx(0.0, abs=1e-15)
    word = PauliString("XZ")
    assert epsilon(word.dense()) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        epsilon(np.ones((2, 3)))


def test_epsilon_positive_definite_characterization():
    rng = np.random.default_rng(0)
    for _ in range(20):
        raw = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        herm = raw + raw.conj().T
        assert epsilon(herm) >= -1e-12
    assert epsilon(3.7 * np.eye(5)) == pytest.approx(0.0, abs=1e-12)


def test_reduced_density_matrix_against_dense_oracle():
    rng = np.random.default_rng(1)
    n = 4
    amps = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    amps /= np.linalg.norm(amps)
    state = StateVector(n, amps)
    rho_full = np.outer(amps, amps.conj())
    # trace out qubits 1 and 3, keep (2, 0) in that order
    keep = [2, 0]
    rho = reduced_density_matrix(state, keep)
    oracle = np.zeros((4, 4), dtype=complex)
    for a in range(4):
        for b in range(4):
            for rest in range(4):
                r1, r3 = rest & 1, (rest >> 1) & 1
                row = ((a >> 1) & 1) * 1 + (a & 1) * 4 + r1 * 2 + r3 * 8
                col = ((b >> 1) & 1) * 1 + (b & 1) * 4 + r1 * 2 + r3 * 8
                oracle[a, b] += rho_full[row, col]
    assert np.allclose(rho, oracle, atol=1e-12)
    assert np.trace(rho) == pytest.approx(1.0)
    assert epsilon(rho) <= 1.0 - 1.0 / 4 + 1e-12


def test_reduced_density_of_product_state_is_pure():
    state = StateVector.zero_state(5)
    for keep in ([0], [1, 2], [4, 0, 2]):
        rho = reduced_density_matrix(state, keep)
        d = 2 ** len(keep)
        assert epsilon(rho) == pytest.approx(1.0 - 1.0 / d, abs=1e-12)


def test_running_moments_matches_numpy_and_merging():
    rng = np.random.default_rng(2)
    xs = rng.standard_normal(257)
    acc = RunningMoments()
    for x in xs:
        acc.add(float(x))
    assert acc.mean == pytest.approx(xs.mean(), abs=1e-12)
    assert acc.stderr == pytest.approx(xs.std(ddof=1) / np.sqrt(len(xs)), abs=1e-12)
    merged = RunningMoments()
    for chunk in np.array_split(xs, 7):
        part = RunningMoments()
        for x in chunk:
            part.add(float(x))
        merged.merge(part)
    assert merged.mean == pytest.approx(acc.mean, abs=1e-12)
    assert merged.stderr == pytest.approx(acc.stderr, abs=1e-12)


def test_varsigma_sets():
    full = varsigma_set(4)
    assert len(full) == 4 and np.allclose(full[0], np.eye(2))
    axis_only = varsigma_set(3)
    assert np.allclose(axis_only[0], full[1])
    fixed = varsigma_set(2, axis=(0, 0, 1))
    assert np.allclose(fixed[1], full[3])
    with pytest.raises(ValueError):
        varsigma_set(2)
    with pytest.raises(ValueError):
        varsigma_set(5)


def test_smatrix_from_environment_matches_evaluation_protocol():
    # the trace-based matrix must equal the ten-evaluation build
    rng = np.random.default_rng(3)
    template = build_template("alternating", 3, 2)
    obs = mixed_field_ising(3)
    cost = observable_cost(obs)
    params = random_unit_rows(rng, template.num_slots)
    for slot_id in (0, 4, 11):
        built = build_fqs_matrix(template, params, slot_id, cost, EvalCounter())
        pos = template.slot_position(slot_id)
        psi1 = template.prefix_amplitudes(params, slot_id)
        h_dense = dense_observable(obs, 3)
        s = smatrix_from_environment(
            psi1,
            3,
            template.slot(slot_id).qubit,
            lambda v: template._run_elements(v, params, pos + 1, len(template.elements)),
            lambda v: h_dense @ v,
            p=4,
        )
        assert np.allclose(s, built, atol=1e-10)


def test_second_moment_local_cost_small_circuit_is_order_one():
    est = second_moment_spectral_radius("alternating", 2, 1, "local", samples=200, seed=5)
    assert est.mean > 0.2
    assert est.stderr > 0
    assert est.config["cost"] == "local"


def test_second_moment_independent_of_worker_count():
    a = second_moment_spectral_radius("alternating", 2, 1, "global", samples=130, seed=9, jobs=1)
    b = second_moment_spectral_radius("alternating", 2, 1, "global", samples=130, seed=9, jobs=2)
    assert a.mean == b.mean and a.stderr == b.stderr


def test_theorem1_bound_passes_both_branches_small():
    obs = mixed_field_ising(2)
    state = StateVector.zero_state(2)
    for branch in ("U1", "U2"):
        report = theorem1_bound(
            branch, 2, obs, state, p=4, samples=1500, bound_samples=800, seed=12
        )
        assert report.side == "upper"
        assert report.passed, report
        assert report.estimate.mean <= report.bound_value + 3 * report.estimate.stderr


def test_theorem1_bound_inner_average_agrees_with_closed_form():
    # the Haar average inside the bound has an exact second-moment expression;
    # cross-check the Monte Carlo path against it for one operator pair
    from quatopt.randhaar import weingarten_expectation

    n, p = 2, 4
    obs = local_z_observable(n)
    state = StateVector.zero_state(n)
    report = theorem1_bound("U1", n, obs, state, p=p, samples=400, bound_samples=3000, seed=1)
    h = dense_observable(obs, n)
    vs = varsigma_set(p)
    total = 0.0
    for mu in range(p):
        for nu in range(p):
            m_embed = embed(vs[mu] @ vs[nu].conj().T, 0, n)
            coef = p * (-1.0) ** (1 - (mu == nu)) - 2.0
            val = 2.0 * weingarten_expectation(h, m_embed, h, m_embed.conj().T).real
            total += coef * val
    d = 2**n
    delta = 1.0 - 1.0 / d
    lead = p**2 * np.trace(h @ h).real * delta / (2 * (d**2 - 1))
    exact_bound = lead + delta / (4 * p * (d**2 - 1)) * total
    assert report.bound_value == pytest.approx(exact_bound, abs=4 * report.bound_stderr + 1e-9)


def test_theorem1_bound_rejects_bad_input():
    obs = local_z_observable(2)
    state = StateVector.zero_state(2)
    with pytest.raises(ValueError):
        theorem1_bound("U3", 2, obs, state)
    with pytest.raises(ValueError):
        theorem1_bound("U1", 9, local_z_observable(9), StateVector.zero_state(9))


def test_theorem2_bound_value_and_epsilon_bookkeeping():
    n = 4
    cones = brickwork_light_cones(n, 2, column=0, qubit=0)
    bound = theorem2_bound(
        n, 2, 2, 1, 4, local_z_observable(n), StateVector.zero_state(n), cones
    )
    # prefactor 144/112500 times sum 39/8 x eps(Z) = 39/4
    assert bound == pytest.approx(0.00624, abs=1e-15)


def test_theorem2_bound_rejects_wide_terms():
    n = 4
    cones = brickwork_light_cones(n, 2, column=0, qubit=0)
    wide = Observable.build(0.0, [(1.0, "ZZZI")])
    with pytest.raises(ValueError):
        theorem2_bound(n, 2, 2, 1, 4, wide, StateVector.zero_state(n), cones)


def test_theorem2_bound_skips_terms_outside_forward_cone():
    n = 6
    # single column: the forward cone of block (0,1) is just {0,1}
    cones = brickwork_light_cones(n, 1, column=0, qubit=0)
    assert cones.forward_qubits == frozenset({0, 1})
    far_term = Observable.build(0.0, [(1.0, "IIIIZZ")])
    bound = theorem2_bound(
        n, 2, 1, 1, 4, far_term, StateVector.zero_state(n), cones
    )
    assert bound == 0.0


def test_haar_block_moment_beats_lower_bound_small_run():
    n = 4
    obs = local_z_observable(n)
    cones = brickwork_light_cones(n, 2, column=0, qubit=0)
    bound = theorem2_bound(n, 2, 2, 1, 4, obs, StateVector.zero_state(n), cones)
    est = haar_block_second_moment(n, 2, obs, samples=800, seed=21)
    assert est.mean >= bound - 3 * est.stderr
    assert est.mean > 10 * bound  # the bound is loose; the moment is order 0.25


def test_haar_sandwich_matches_template_free_construction():
    # p=2 and p=3 sandwich matrices are contractions of the p=4 matrix
    n = 2
    obs = mixed_field_ising(n)
    state = StateVector.zero_state(n)
    rng = make_rng(31)
    from quatopt.randhaar import haar_unitary
    from quatopt.smatrix import nft_contraction

    h = dense_observable(obs, n)
    u1, u2 = haar_unitary(4, rng), haar_unitary(4, rng)
    psi1 = u1 @ state.amplitudes
    s4 = smatrix_from_environment(psi1, n, 0, lambda v: u2 @ v, lambda v: h @ v, p=4)
    s3 = smatrix_from_environment(psi1, n, 0, lambda v: u2 @ v, lambda v: h @ v, p=3)
    axis = np.array([1.0, 0, 0])
    s2 = smatrix_from_environment(psi1, n, 0, lambda v: u2 @ v, lambda v: h @ v, p=2, axis=axis)
    assert np.allclose(s3, s4[1:, 1:], atol=1e-10)
    assert np.allclose(s2, nft_contraction(s4, axis), atol=1e-10)


def test_trace_of_probe_matrix_is_slot_independent():
    # Haar averaging over every slot makes E[tr S] the same at each probe
    template = build_template("alternating", 3, 2)
    obs = local_z_observable(3)
    cost = observable_cost(obs)
    samples = 400
    traces = []
    for slot_id in (0, 7):
        acc = RunningMoments()
        for k in range(samples):
            rng = make_rng(55, stream=k)
            params = np.asarray(
                [v / np.linalg.norm(v) for v in rng.standard_normal((template.num_slots, 4))]
            )
            s = build_fqs_matrix(template, params, slot_id, cost, EvalCounter())
            acc.add(float(np.trace(s)))
        traces.append(acc)
    diff = abs(traces[0].mean - traces[1].mean)
    sigma = np.hypot(traces[0].stderr, traces[1].stderr)
    assert diff < 4 * sigma


def test_second_moment_nonnegative_samples():
    est = second_moment_spectral_radius("cyclic", 2, 1, "local", samples=50, seed=3)
    assert est.mean >= 0.0


def test_bound_reports_reproduce_bit_identically():
    obs = local_z_observable(2)
    state = StateVector.zero_state(2)
    a = theorem1_bound("U2", 2, obs, state, p=3, samples=200, bound_samples=100, seed=77)
    b = theorem1_bound("U2", 2, obs, state, p=3, samples=200, bound_samples=100, seed=77)
    assert a.bound_value == b.bound_value
    assert a.estimate.mean == b.estimate.mean
    assert a.estimate.stderr == b.estimate.stderr
