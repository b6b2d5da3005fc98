import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consensim.calculus import (
    AffineFunction,
    BarrierLagrangian,
    QuadraticFunction,
    barrier_partials,
)
from consensim.graph import path_graph, projector
from consensim.protocols_double import (
    DatStateDouble,
    SigConsensusParams,
    control_double_common,
    control_double_dat,
    dat_rhs_double,
    dat_signals_double,
    nominal_double_rhs,
    nominal_energy,
    sig_consensus,
    sig_pow,
)
from helpers import fd_time


# ------------------------------------------------------------------ sig_pow

@pytest.mark.parametrize("y,q,expect", [
    (0.0, 0.5, 0.0),
    (-4.0, 0.5, -2.0),
    (9.0, 0.5, 3.0),
])
def test_sig_pow_scalars(y, q, expect):
    assert sig_pow(np.array([y]), q)[0] == pytest.approx(expect)


def test_sig_pow_vector_cube_root():
    np.testing.assert_allclose(sig_pow(np.array([-1.0, 8.0]), 1.0 / 3.0),
                               [-1.0, 2.0])


def test_sig_pow_rejects_bad_exponent():
    with pytest.raises(ValueError):
        sig_pow(np.ones(2), 0.0)


@settings(max_examples=80, deadline=None)
@given(st.floats(-50, 50, allow_nan=False), st.floats(0.1, 0.95))
def test_sig_pow_odd(y, q):
    arr = np.array([y])
    np.testing.assert_allclose(sig_pow(-arr, q), -sig_pow(arr, q), atol=1e-12)


# ------------------------------------------------------------------- params

def test_sig_params_derived_velocity_exponent():
    params = SigConsensusParams(gamma1=2.0, gamma2=1.0, q=0.5)
    assert params.p == pytest.approx(2.0 * 0.5 / 1.5)
    for q in (0.2, 0.5, 0.8):
        p = SigConsensusParams(1.0, 1.0, q).p
        assert 0.0 < p < 1.0


@pytest.mark.parametrize("bad_q", [0.0, 1.0, -0.3, 1.5])
def test_sig_params_q_range(bad_q):
    with pytest.raises(ValueError):
        SigConsensusParams(1.0, 1.0, bad_q)


def test_sig_params_positivity():
    with pytest.raises(ValueError):
        SigConsensusParams(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        SigConsensusParams(1.0, -1.0, 0.5)


# ------------------------------------------------------------ consensus term

def test_sig_consensus_zero_at_rest_consensus():
    params = SigConsensusParams(2.0, 1.0, 0.5)
    x = np.full((4, 2), -0.4)
    v = np.zeros((4, 2))
    np.testing.assert_array_equal(sig_consensus(params, path_graph(4), x, v),
                                  np.zeros((4, 2)))


def test_sig_consensus_p2_example():
    params = SigConsensusParams(1.0, 1.0, 0.5)
    r = sig_consensus(params, path_graph(2),
                      np.array([[1.0], [0.0]]), np.zeros((2, 1)))
    np.testing.assert_allclose(r, [[-1.0], [1.0]])


def test_sig_consensus_position_part_antisymmetric():
    rng = np.random.default_rng(4)
    params = SigConsensusParams(3.0, 2.0, 0.7)
    x = rng.normal(size=(8, 2)) * 3.0
    r_full = sig_consensus(params, path_graph(8), x, np.zeros((8, 2)))
    assert np.abs(r_full.sum(axis=0)).max() < 1e-12
    # with velocities the per-agent damping breaks the cancellation
    v = rng.normal(size=(8, 2))
    r_v = sig_consensus(params, path_graph(8), x, v)
    damping = r_v - r_full
    np.testing.assert_allclose(damping,
                               -params.gamma2 * sig_pow(v, params.p),
                               atol=1e-12)


# --------------------------------------------------------- nominal system

def test_nominal_equilibrium():
    params = SigConsensusParams(1.0, 1.0, 0.5)
    x = np.full((3, 1), 2.0)
    v = np.zeros((3, 1))
    xdot, vdot = nominal_double_rhs(params, path_graph(3), x, v)
    np.testing.assert_array_equal(xdot, np.zeros((3, 1)))
    np.testing.assert_array_equal(vdot, np.zeros((3, 1)))


def test_nominal_energy_decays_along_trajectory():
    rng = np.random.default_rng(12)
    params = SigConsensusParams(2.0, 1.5, 0.6)
    g = path_graph(5)
    x = rng.normal(size=(5, 1)) * 2.0
    v = rng.normal(size=(5, 1))
    dt = 1e-3
    prev = nominal_energy(params, g, x, v)
    for _ in range(9000):
        xdot, vdot = nominal_double_rhs(params, g, x, v)
        x = x + dt * xdot
        v = v + dt * vdot
        cur = nominal_energy(params, g, x, v)
        assert cur <= prev + 1e-6
        prev = cur
    assert prev < 1e-12  # finite-time consensus actually lands


def test_nominal_energy_zero_only_at_rest_consensus():
    params = SigConsensusParams(1.0, 1.0, 0.5)
    g = path_graph(3)
    assert nominal_energy(params, g, np.full((3, 1), 5.0), np.zeros((3, 1))) == 0.0
    assert nominal_energy(params, g, np.array([[0.0], [1.0], [0.0]]),
                          np.zeros((3, 1))) > 0.0


# ------------------------------------- projector/sig inequality machinery

@settings(max_examples=200, deadline=None)
@given(st.integers(2, 10), st.floats(0.15, 0.95),
       st.lists(st.floats(-20, 20, allow_nan=False), min_size=2, max_size=10))
def test_projector_sig_inequality_on_disagreement_vectors(N, q, vals):
    # on zero-mean v the product v' Pi sig(v)^p collapses to the (p+1)-norm
    # power itself, which dominates the (N-1)/N multiple of it
    p = 2.0 * q / (q + 1.0)
    v = np.resize(np.asarray(vals, dtype=float), N)
    v = v - v.mean()
    Pi = projector(N)
    lhs = float(v @ Pi @ sig_pow(v, p))
    norm_pow = float(np.sum(np.abs(v) ** (p + 1.0)))
    assert lhs >= ((N - 1) / N) * norm_pow - 1e-9 * max(1.0, norm_pow)
    assert lhs == pytest.approx(norm_pow, rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 8), st.floats(0.15, 0.95),
       st.lists(st.floats(-20, 20, allow_nan=False), min_size=2, max_size=8))
def test_projector_sig_product_nonnegative_for_any_v(N, q, vals):
    # v and sig(v)^p are similarly ordered, so the centered inner product is
    # nonnegative for every v (zero-mean or not) by the Chebyshev sum
    # inequality; this is what the consensus Lyapunov argument actually needs
    p = 2.0 * q / (q + 1.0)
    v = np.resize(np.asarray(vals, dtype=float), N)
    lhs = float(v @ projector(N) @ sig_pow(v, p))
    assert lhs >= -1e-10 * max(1.0, float(np.abs(v).max()) ** (p + 1.0))


def test_projector_sig_inequality_fails_off_the_disagreement_subspace():
    # the all-ones vector kills Pi sig(v)^p while the norm side stays
    # positive: the (N-1)/N bound only holds on zero-mean input
    v = np.ones(4)
    lhs = float(v @ projector(4) @ sig_pow(v, 0.5))
    assert lhs == pytest.approx(0.0, abs=1e-12)
    assert lhs < (3.0 / 4.0) * np.sum(np.abs(v) ** 1.5)


# ----------------------------------------------------- common double law

def planar_barrier():
    return BarrierLagrangian(QuadraticFunction(center=[4.0, 5.0]),
                             AffineFunction([1.0, 1.0], -5.0), 2.0)


def test_control_double_common_recomposition():
    from consensim.calculus import k_total_derivative

    b = planar_barrier()
    x = np.array([-1.0, 1.0])
    v = np.array([0.1, -0.2])
    r = np.array([0.3, 0.9])
    t = 1.0
    p = barrier_partials(b, x, t)
    _, k_dot = k_total_derivative(b, x, v, t)
    np.testing.assert_allclose(control_double_common(b, x, v, t, r),
                               -k_dot - p.lxx @ p.lx + r, atol=0.0)


def test_control_double_common_matches_fd_reconstruction():
    # u = -dk/dt - Lxx Lx + r with dk/dt replaced by a central difference of
    # k along the straight-line motion x(t) = x0 + (t-t0) v
    b = planar_barrier()
    x0 = np.array([-1.0, 1.0])
    v = np.array([0.1, -0.2])
    t0 = 1.0

    def k_of(t):
        p = barrier_partials(b, x0 + (t - t0) * v, t)
        return np.linalg.solve(p.lxx, p.lx + p.ltx)

    p0 = barrier_partials(b, x0, t0)
    expect = -fd_time(k_of, t0, h=1e-5) - p0.lxx @ p0.lx
    got = control_double_common(b, x0, v, t0, np.zeros(2))
    np.testing.assert_allclose(got, expect, atol=1e-3)


# ------------------------------------------------------------ DAT payloads

def test_dat_signals_zero_velocity_blocks():
    b = planar_barrier()
    x = np.array([-1.0, 1.0])
    t = 0.5
    chi, mu = dat_signals_double(b, x, np.zeros(2), t)
    p = barrier_partials(b, x, t)
    np.testing.assert_array_equal(chi[:2], p.lx)
    np.testing.assert_array_equal(chi[2:4], p.ltx)
    np.testing.assert_array_equal(chi[4:6], p.ltx)   # d(Lx)/dt at v=0
    np.testing.assert_array_equal(chi[6:8], p.lttx)  # d(Ltx)/dt at v=0
    np.testing.assert_array_equal(mu[:4].reshape(2, 2), p.lxx)
    np.testing.assert_array_equal(mu[4:].reshape(2, 2), p.lxxt)


def test_dat_signal_derivative_blocks_match_fd():
    # chi3/chi4/mu2 are total time derivatives of Lx/Ltx/Lxx along the motion
    b = planar_barrier()
    x0 = np.array([-1.0, 1.0])
    v = np.array([0.1, -0.2])
    t0 = 1.0
    chi, mu = dat_signals_double(b, x0, v, t0)

    def block(t, which):
        p = barrier_partials(b, x0 + (t - t0) * v, t)
        return getattr(p, which)

    np.testing.assert_allclose(
        chi[4:6], fd_time(lambda t: block(t, "lx"), t0, h=1e-5), atol=1e-4)
    np.testing.assert_allclose(
        chi[6:8], fd_time(lambda t: block(t, "ltx"), t0, h=1e-5), atol=1e-4)
    np.testing.assert_allclose(
        mu[4:].reshape(2, 2),
        fd_time(lambda t: block(t, "lxx"), t0, h=1e-5), atol=1e-4)


def test_dat_rhs_double_agreement_and_conservation():
    state = DatStateDouble(zeta=np.zeros((3, 4)), xi=np.zeros((3, 2)),
                           a=10.0, b=10.0)
    g = path_graph(3)
    chi_eq = np.tile([1.0, 2.0, 3.0, 4.0], (3, 1))
    mu_eq = np.tile([5.0, 6.0], (3, 1))
    zdot, xdot = dat_rhs_double(state, g, chi_eq, mu_eq)
    np.testing.assert_array_equal(zdot, np.zeros((3, 4)))
    np.testing.assert_array_equal(xdot, np.zeros((3, 2)))
    rng = np.random.default_rng(9)
    zdot, xdot = dat_rhs_double(state, g, rng.normal(size=(3, 4)),
                                rng.normal(size=(3, 2)))
    np.testing.assert_allclose(zdot.sum(axis=0), 0.0, atol=1e-14)
    np.testing.assert_allclose(xdot.sum(axis=0), 0.0, atol=1e-14)


def test_dat_rhs_double_p2_ordering():
    state = DatStateDouble(zeta=np.zeros((2, 4)), xi=np.zeros((2, 2)),
                           a=3.0, b=7.0)
    chi = np.array([[1.0] * 4, [0.0] * 4])
    mu = np.array([[0.0] * 2, [1.0] * 2])
    zdot, xdot = dat_rhs_double(state, path_graph(2), chi, mu)
    np.testing.assert_array_equal(zdot, [[-3.0] * 4, [3.0] * 4])
    np.testing.assert_array_equal(xdot, [[7.0] * 2, [-7.0] * 2])


def test_dat_state_gain_validation():
    with pytest.raises(ValueError):
        DatStateDouble(zeta=np.zeros((2, 4)), xi=np.zeros((2, 2)), a=0.0, b=1.0)


# --------------------------------------------------------------- DAT law

def test_control_double_dat_equals_common_on_own_payload():
    b = planar_barrier()
    rng = np.random.default_rng(1)
    for _ in range(5):
        x = np.array([-1.0, 1.0]) + rng.normal(size=2) * 0.3
        v = rng.normal(size=2) * 0.5
        t = float(rng.uniform(0.0, 3.0))
        r = rng.normal(size=2)
        chi, mu = dat_signals_double(b, x, v, t)
        np.testing.assert_allclose(control_double_dat(chi, mu, r),
                                   control_double_common(b, x, v, t, r),
                                   rtol=1e-9, atol=1e-10)


def test_control_double_dat_zero_at_converged_stationary_point():
    # chi = 0 and invertible H leaves only the consensus term
    n = 2
    chi = np.zeros(4 * n)
    mu = np.concatenate([np.eye(n).ravel(), np.zeros(n * n)])
    r = np.array([0.25, -1.5])
    np.testing.assert_allclose(control_double_dat(chi, mu, r), r)


def test_control_double_dat_payload_guards():
    with pytest.raises(ValueError):
        control_double_dat(np.zeros(7), np.zeros(8), np.zeros(2))
    with pytest.raises(ValueError):
        control_double_dat(np.zeros(8), np.zeros(9), np.zeros(2))
    from consensim.calculus import SingularHessianError

    with pytest.raises(SingularHessianError):
        control_double_dat(np.zeros(8), np.zeros(8), np.zeros(2))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
