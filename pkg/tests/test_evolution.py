import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import basis_dm, random_config, random_dm
from qkick.evolution import (DivergenceError, Generator, KickSchedule, KickSpec, Rotation,
                             Stepper, apply_kick, integrate, kick_unitary, liouville_rhs,
                             propagate, step_convergence)
from qkick.oracle import expm_propagate
from qkick.observables import purity
from qkick.spin_chain import InvalidInputError, build_hamiltonian, canonical_config

PI = math.pi


# ------------------------------------------------------------------ rhs


def test_rhs_ground_state_zero_temperature(canonical0):
    h = build_hamiltonian(canonical0)
    np.testing.assert_array_equal(liouville_rhs(basis_dm(1), canonical0, h), 0)


def test_rhs_diagonal_states_stationary_without_bath(rng):
    cfg = canonical_config(1.0, beta=0.0)
    h = build_hamiltonian(cfg)
    rho = np.diag(rng.dirichlet(np.ones(8))).astype(complex)
    np.testing.assert_array_equal(liouville_rhs(rho, cfg, h), 0)


def test_rhs_coherence_precesses_at_transition_frequency():
    cfg = canonical_config(0.0, beta=0.0)
    h = build_hamiltonian(cfg)
    plus = np.array([1, 1]) / math.sqrt(2)
    rho = np.kron(np.outer(plus, plus), np.diag([1.0, 0, 0, 0])).astype(complex)
    d = liouville_rhs(rho, cfg, h)
    gap = abs(-0.975 - 0.15)  # E(|000>) - E(|100>)
    assert abs(d[0, 4]) == pytest.approx(gap * abs(rho[0, 4]), rel=1e-12)


def test_rhs_shape_mismatch(canonical0):
    with pytest.raises(ValueError):
        liouville_rhs(np.eye(4), canonical0, build_hamiltonian(canonical0))


@pytest.mark.parametrize("backend", ["numba", "numpy"])
def test_kernel_rhs_matches_dense(rng, canonical, backend):
    gen = Generator(canonical)
    for _ in range(10):
        rho = random_dm(rng)
        np.testing.assert_allclose(gen.rhs(rho, backend), liouville_rhs(rho, canonical, gen.h),
                                   atol=1e-14)


# ------------------------------------------------------------ integrate


def test_integrate_zero_duration(rng, canonical0):
    rho = random_dm(rng)
    np.testing.assert_array_equal(integrate(rho, 0.0, canonical0), rho)


def test_integrate_negative_duration(canonical0):
    with pytest.raises(ValueError):
        integrate(basis_dm(8), -1.0, canonical0)


@pytest.mark.parametrize("temp", [0.0, 1.0])
def test_integrate_matches_expm_oracle(rng, temp):
    cfg = random_config(rng, temp)
    rho = random_dm(rng)
    got = integrate(rho, 10.0, cfg)
    ref = expm_propagate(rho, 10.0, cfg)
    assert np.max(np.abs(got - ref)) < 1e-6


def test_backends_agree(rng, canonical):
    rho = random_dm(rng)
    a = integrate(rho, 5.0, canonical, stepper=Stepper(backend="numba"))
    b = integrate(rho, 5.0, canonical, stepper=Stepper(backend="numpy"))
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_step_halving_self_check(canonical):
    assert step_convergence(basis_dm(8), 20.0, canonical) < 1e-8


def test_trace_and_hermiticity_over_long_run(rng, canonical):
    rho = integrate(random_dm(rng), 200.0, canonical)
    assert abs(np.trace(rho) - 1) < 1e-9
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-10


def test_unitary_limit_conserves_purity(rng):
    cfg = canonical_config(1.0, beta=0.0)
    rho = random_dm(rng, rank=2)
    out = integrate(rho, 100.0, cfg)
    assert abs(purity(out) - purity(rho)) < 1e-9


def test_divergence_reported_with_step():
    cfg = canonical_config(1.0, beta=50.0)
    with pytest.raises(DivergenceError, match="step"):
        integrate(basis_dm(8), 2000.0, cfg, stepper=Stepper(dt=1.0, min_steps=1))


def test_stepper_step_count():
    s = Stepper()
    assert s.n_steps(PI / 2) == 200
    assert s.n_steps(4 * PI) == math.ceil(4 * PI / 0.01)
    assert s.n_steps(0.0) == 0
    with pytest.raises(InvalidInputError):
        Stepper(method="euler")


# ------------------------------------------------------------------ kicks


def test_zero_angle_is_identity():
    np.testing.assert_allclose(kick_unitary(KickSpec.single(1, "y", 0.0), 3), np.eye(8))


def test_half_pi_x_kick_on_ground():
    u = kick_unitary(KickSpec.single(0, "x", PI / 2), 1)
    np.testing.assert_allclose(u @ [1, 0], np.array([1, 1j]) / math.sqrt(2), atol=1e-15)


def test_composite_kick_x_then_y():
    u = kick_unitary(KickSpec(((0, "x", PI), (0, "y", PI / 2))), 1)
    np.testing.assert_allclose(u @ [1, 0], 1j / math.sqrt(2) * np.array([1, 1]), atol=1e-15)


def test_full_turn_is_minus_identity(rng):
    u = kick_unitary(KickSpec.single(2, "x", 2 * PI), 3)
    np.testing.assert_allclose(u, -np.eye(8), atol=1e-15)
    rho = random_dm(rng)
    np.testing.assert_allclose(apply_kick(rho, u), rho, atol=1e-15)


def test_pi_kick_flips_qubit_c():
    u = kick_unitary(KickSpec.single(2, "x", PI), 3)
    np.testing.assert_allclose(apply_kick(basis_dm(1), u), basis_dm(2), atol=1e-15)


def test_identity_kick(rng):
    rho = random_dm(rng)
    np.testing.assert_array_equal(apply_kick(rho, np.eye(8)), rho)


def test_kick_preserves_spectrum(rng):
    rho = random_dm(rng)
    u = kick_unitary(KickSpec(((0, "x", 1.0), (2, "y", 2.0))), 3)
    out = apply_kick(rho, u)
    np.testing.assert_allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-14)
    assert abs(np.trace(out) - 1) < 1e-14


rotation = st.tuples(st.integers(0, 2), st.sampled_from("xyz"), st.floats(0, 2 * PI))


@settings(max_examples=100)
@given(st.lists(rotation, min_size=1, max_size=4))
def test_kick_unitarity(rots):
    u = kick_unitary(KickSpec(tuple(rots)), 3)
    assert np.max(np.abs(u @ u.conj().T - np.eye(8))) < 1e-12


@pytest.mark.parametrize("bad", [(0, "w", 1.0), (0, "x", -0.1), (0, "x", 7.0)])
def test_bad_rotation(bad):
    with pytest.raises(InvalidInputError):
        Rotation(*bad)


def test_kicked_qubit_out_of_range():
    with pytest.raises(InvalidInputError):
        kick_unitary(KickSpec.single(3), 3)


def test_schedule_from_q():
    assert KickSchedule.from_q(8, KickSpec(), 1).tau_k == pytest.approx(PI / 2)
    with pytest.raises(InvalidInputError):
        KickSchedule.from_q(0, KickSpec(), 1)


# ----------------------------------------------------------- propagate


def test_propagate_without_kicks_keeps_initial_state(canonical0):
    traj = propagate(basis_dm(8), KickSchedule(1.0, KickSpec(), 0), canonical0)
    assert traj.n_kicks == 0
    assert traj.energy_pre[0] == pytest.approx(0.775)


def test_first_kick_after_one_period(canonical0):
    spec = KickSpec.single(0, "x", PI)
    traj = propagate(basis_dm(1), KickSchedule(2.0, spec, 1), canonical0, store_states=True)
    # ground is dark, so nothing happens before the kick
    np.testing.assert_allclose(traj.states_pre[1], basis_dm(1), atol=1e-15)
    np.testing.assert_allclose(traj.states_post[1], basis_dm(5), atol=1e-15)


def test_post_kick_is_single_conjugation(rng, canonical1):
    spec = KickSpec.single(1, "x", 1.1)
    u = kick_unitary(spec, 3)
    traj = propagate(random_dm(rng), KickSchedule(1.3, spec, 4), canonical1, store_states=True)
    for pre, post in zip(traj.states_pre[1:], traj.states_post[1:]):
        np.testing.assert_allclose(post, apply_kick(pre, u), atol=1e-15)


@pytest.mark.parametrize("angle", [0.0, 2 * PI])
def test_trivial_kicks_match_no_kick(canonical, angle):
    ref = propagate(basis_dm(8), KickSchedule(PI / 2, KickSpec(), 40), canonical)
    got = propagate(basis_dm(8), KickSchedule(PI / 2, KickSpec.single(0, "x", angle), 40),
                    canonical)
    assert np.max(np.abs(got.final_state - ref.final_state)) < 1e-10
    assert np.max(np.abs(got.energy_pre - ref.energy_pre)) < 1e-10


def test_identity_kicks_relax_to_gibbs(canonical1):
    from qkick.observables import gibbs_state
    traj = propagate(basis_dm(8), KickSchedule(PI, KickSpec(), 200), canonical1)
    gibbs = np.diag(gibbs_state(build_hamiltonian(canonical1), 1.0)).real
    np.testing.assert_allclose(traj.populations_pre[-1], gibbs, atol=1e-4)


def test_kicked_c_pattern_zero_temperature(canonical0):
    traj = propagate(basis_dm(8), KickSchedule(PI / 2, KickSpec.single(2), 1500), canonical0)
    rho = traj.final_state
    pops = np.diag(rho).real
    assert set(np.argsort(pops)[-2:]) == {0, 1}
    assert pops[0] + pops[1] > 0.99
    assert abs(rho[0, 1]) > 0.1


def test_purity_bounded_along_trajectory(rng, canonical):
    spec = KickSpec(((0, "x", PI / 2), (2, "y", 0.7)))
    traj = propagate(random_dm(rng), KickSchedule(1.7, spec, 100), canonical)
    assert traj.purity_pre.max() <= 1 + 1e-9
    assert traj.purity_post.max() <= 1 + 1e-9


def test_positivity_monitor_warns():
    cfg = canonical_config(0.0)
    traj = propagate(basis_dm(8), KickSchedule(PI / 2, KickSpec.single(2), 100), cfg)
    # the bath term is not of Lindblad form; small negative eigenvalues are reported
    if traj.min_eig.min() < -1e-6:
        assert any("positivity" in w for w in traj.warnings)
    else:
        assert not traj.warnings


def test_stop_predicate_ends_run(canonical0):
    calls = []

    def stop(e_pre, e_post):
        calls.append(len(e_pre))
        return len(e_pre) > 5

    traj = propagate(basis_dm(8), KickSchedule(1.0, KickSpec.single(0), 100), canonical0,
                     stop=stop)
    assert traj.n_kicks == 5
