import numpy as np
import pytest

from fixorder import plants
from fixorder.analysis import (
    dc_gain,
    eig_triple,
    hamiltonian,
    has_imaginary_eigenvalue,
    hinf_norm,
    sigma,
    spectral_abscissa,
    step_response,
)
from fixorder.errors import NumericalError, SingularFrequencyError
from fixorder.statespace import RationalSiso, StateSpaceModel, close_loop, static_gain, tf_to_ss

from oracles import grid_hinf, random_stable, sigma_max_grid

LAG = tf_to_ss(RationalSiso([1], [1, 1]))


# --- spectral abscissa -------------------------------------------------------


def test_abscissa_diagonal():
    alpha, et = spectral_abscissa(np.diag([-1.0, -2.0]))
    assert alpha == -1.0
    assert et.values.size == 2


def test_abscissa_open_loop_two_mass_spring():
    alpha, _ = spectral_abscissa(plants.two_mass_spring())
    assert abs(alpha) < 1e-7


def test_abscissa_first_printed_controller():
    cl = close_loop(plants.two_mass_spring(), tf_to_ss(plants.MASS_SPRING_K_FIRST))
    assert spectral_abscissa(cl)[0] == pytest.approx(-0.7073, abs=1e-3)


def test_eig_triple_left_and_right_vectors():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((6, 6))
    et = eig_triple(A)
    nA = np.linalg.norm(A, 2)
    for i, lam in enumerate(et.values):
        x, y = et.right_vectors[:, i], et.left_vectors[:, i]
        assert np.linalg.norm(A @ x - lam * x) <= 1e-8 * nA
        assert np.linalg.norm(y.conj() @ A - lam * y.conj()) <= 1e-8 * nA
    vals = np.sort_complex(et.values)
    np.testing.assert_allclose(vals, np.sort_complex(vals.conj()), atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_abscissa_similarity_invariance(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((5, 5))
    Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    T = Q @ np.diag(rng.uniform(1, 3, 5))
    Ti = np.linalg.inv(T)
    a1 = spectral_abscissa(A)[0]
    a2 = spectral_abscissa(T @ A @ Ti)[0]
    assert abs(a1 - a2) <= 1e-8 * np.linalg.cond(T) * np.linalg.norm(A, 2)


# --- H-infinity ----------------------------------------------------------------


def test_hinf_first_order_lag():
    r = hinf_norm(LAG)
    assert r.norm == pytest.approx(1.0, rel=1e-9)
    assert r.peak_frequency == pytest.approx(0.0, abs=1e-6)


def test_hinf_static_gain():
    r = hinf_norm(static_gain([[3.0, 4.0]]))
    assert r.norm == pytest.approx(5.0)


def test_hinf_unstable_is_infinite():
    r = hinf_norm(tf_to_ss(plants.KWAK_G))
    assert r.norm == np.inf


def test_hinf_resonant_peak():
    zeta, wn = 0.05, 2.0
    g = tf_to_ss(RationalSiso([wn ** 2], [1, 2 * zeta * wn, wn ** 2]))
    r = hinf_norm(g)
    assert r.norm == pytest.approx(1 / (2 * zeta * np.sqrt(1 - zeta ** 2)), rel=1e-8)
    assert r.peak_frequency == pytest.approx(wn * np.sqrt(1 - 2 * zeta ** 2), rel=1e-5)


def test_hinf_peak_at_infinity_equals_d_floor():
    g = tf_to_ss(RationalSiso([2, 1], [1, 1]))     # 2 - 1/(s+1): sup is 2 at w -> inf
    r = hinf_norm(g)
    assert r.norm == pytest.approx(2.0, rel=1e-6)
    assert r.norm >= 2.0 - 1e-12


def test_hinf_four_disk_k1():
    cl = close_loop(plants.four_disk(), tf_to_ss(plants.FOUR_DISK_K1))
    assert hinf_norm(cl).norm == pytest.approx(1.42558, rel=1e-3)


def test_hinf_gahinet_k2():
    cl = close_loop(plants.gahinet(), tf_to_ss(plants.GAHINET_K2.to_rational()))
    assert hinf_norm(cl).norm == pytest.approx(21.5284, rel=1e-2)


@pytest.mark.parametrize("seed", range(20))
def test_hinf_matches_grid_oracle(seed):
    rng = np.random.default_rng(1000 + seed)
    n, p, m = int(rng.integers(1, 9)), int(rng.integers(1, 4)), int(rng.integers(1, 4))
    A, B, C, D = random_stable(rng, n, p, m)
    r = hinf_norm(StateSpaceModel(A, B, C, D))
    ref = grid_hinf(A, B, C, D, n_grid=20_000)
    assert r.norm == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("seed", range(10))
def test_hinf_result_invariants(seed):
    rng = np.random.default_rng(2000 + seed)
    A, B, C, D = random_stable(rng, 5, 2, 2)
    sys = StateSpaceModel(A, B, C, D)
    tol = 1e-6
    r = hinf_norm(sys, tol=tol)
    # attained at the reported frequency, never below the D floor
    if np.isfinite(r.peak_frequency):
        peak = sigma_max_grid(A, B, C, D, np.array([r.peak_frequency]))[0]
    else:
        peak = np.linalg.norm(D, 2)
    assert peak >= r.norm * (1 - 2 * tol)
    assert r.norm >= np.linalg.norm(D, 2) - 1e-12
    # no grid point exceeds it
    grid = sigma_max_grid(A, B, C, D, np.logspace(-3, 3, 3000))
    assert np.all(grid <= r.norm * (1 + tol))


@pytest.mark.parametrize("seed", range(10))
def test_hamiltonian_certificate_consistency(seed):
    rng = np.random.default_rng(3000 + seed)
    A, B, C, D = random_stable(rng, 4, 2, 2, with_d=False)
    sys = StateSpaceModel(A, B, C, D)
    tol = 1e-6
    g = hinf_norm(sys, tol=tol).norm
    assert not has_imaginary_eigenvalue(sys, g * (1 + 5 * tol))
    assert has_imaginary_eigenvalue(sys, g * (1 - 5 * tol))


def test_hamiltonian_is_hamiltonian():
    rng = np.random.default_rng(5)
    sys = StateSpaceModel(*random_stable(rng, 3, 2, 2))
    H = hamiltonian(sys, 10.0)
    J = np.block([[np.zeros((3, 3)), np.eye(3)], [-np.eye(3), np.zeros((3, 3))]])
    np.testing.assert_allclose(J @ H, (J @ H).T, atol=1e-10)


def test_hinf_nonconvergence_reports_partial():
    zeta, wn = 0.05, 2.0
    g = tf_to_ss(RationalSiso([wn ** 2], [1, 2 * zeta * wn, wn ** 2]))
    with pytest.raises(NumericalError) as info:
        hinf_norm(g, tol=1e-14, max_iter=1)
    assert info.value.partial is not None
    assert info.value.partial.norm > 1.0


# --- sigma and step ------------------------------------------------------------


def test_sigma_static_gain():
    np.testing.assert_allclose(sigma(static_gain([[2.0]]), [0.0, 1.0, 100.0]), [[2.0]] * 3)


def test_sigma_lag_at_one():
    assert sigma(LAG, [1.0])[0, 0] == pytest.approx(1 / np.sqrt(2))


def test_sigma_rows_descending():
    rng = np.random.default_rng(8)
    sv = sigma(StateSpaceModel(*random_stable(rng, 4, 3, 2)), np.logspace(-1, 1, 7))
    assert sv.shape == (7, 2)
    assert np.all(np.diff(sv, axis=1) <= 0)


def test_sigma_on_a_pole_raises():
    integ = tf_to_ss(RationalSiso([1], [1, 0]))
    with pytest.raises(SingularFrequencyError) as info:
        sigma(integ, [1.0, 0.0])
    assert info.value.index == 1


def test_sigma_rejects_negative_frequency():
    with pytest.raises(ValueError):
        sigma(LAG, [-1.0])


def test_four_disk_controller_valleys_at_plant_peaks():
    omega = np.logspace(-1, 1, 100)
    K8 = tf_to_ss(plants.FOUR_DISK_K8.to_rational())
    P33 = plants.four_disk().channel(2, 2)
    k = sigma(K8, omega)[:, 0]
    p = sigma(P33, omega)[:, 0]
    peaks = [i for i in range(1, 99) if p[i] > p[i - 1] and p[i] > p[i + 1]]
    valleys = [i for i in range(1, 99) if k[i] < k[i - 1] and k[i] < k[i + 1]]
    assert len(valleys) >= 2
    # every controller valley sits on a flexible-mode peak of the plant
    for j in valleys:
        assert min(abs(i - j) for i in peaks) <= 1


def test_step_first_order_lag():
    t, y = step_response(LAG, 5.0, 101)
    np.testing.assert_allclose(y[:, 0, 0], 1 - np.exp(-t), atol=1e-9)


def test_step_integrator_ramp():
    t, y = step_response(tf_to_ss(RationalSiso([1], [1, 0])), 3.0, 31)
    np.testing.assert_allclose(y[:, 0, 0], t, atol=1e-9)


def test_step_feedthrough_channels():
    sys = StateSpaceModel(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((1, 0)), [[1.0, -2.0]])
    _, y = step_response(sys, 1.0, 5)
    np.testing.assert_allclose(y[:, 0], [[1.0, -2.0]] * 5)


@pytest.mark.parametrize("seed", range(5))
def test_step_converges_to_dc_gain(seed):
    rng = np.random.default_rng(40 + seed)
    A, B, C, D = random_stable(rng, 4, 2, 2, margin=(0.5, 1.0))
    sys = StateSpaceModel(A, B, C, D)
    alpha = spectral_abscissa(sys)[0]
    _, y = step_response(sys, 40.0 / abs(alpha), 400)
    np.testing.assert_allclose(y[-1], dc_gain(sys), atol=1e-6)


def test_step_rejects_bad_arguments():
    with pytest.raises(ValueError):
        step_response(LAG, 1.0, 1)
    with pytest.raises(ValueError):
        step_response(LAG, 0.0, 10)


def test_step_overflow_is_numerical_error():
    with pytest.raises(NumericalError):
        step_response(tf_to_ss(RationalSiso([1], [1, -50])), 100.0, 50)
