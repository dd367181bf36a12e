import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from gfperc import gaussian as G
from gfperc.kernels import Kernel


def random_cov(rng, n, diag=1.0):
    a = rng.standard_normal((n, n))
    c = a @ a.T + 0.5 * np.eye(n)
    d = np.sqrt(np.diag(c))
    return diag * c / np.outer(d, d)


# -- models and regression ------------------------------------------------------

def test_model_rejects_bad_covariances():
    with pytest.raises(G.GaussianError):
        G.GaussianVectorModel([[1.0, 0.2], [0.3, 1.0]])
    with pytest.raises(G.GaussianError):
        G.GaussianVectorModel([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(G.GaussianError):
        G.GaussianVectorModel(np.ones((2, 3)))


def test_regression_bivariate_example():
    m = G.GaussianVectorModel([[1.0, 0.5], [0.5, 1.0]])
    c = G.regression(m, [1], [2.0])
    assert c.mean[0] == pytest.approx(1.0)
    assert c.cov[0, 0] == pytest.approx(0.75)


def test_regression_matches_precision_matrix_route():
    rng = np.random.default_rng(3)
    S = random_cov(rng, 3)
    mu = np.array([0.3, -0.2, 1.0])
    m = G.GaussianVectorModel(S, mu)
    c = G.regression(m, [2], [0.7])
    # conditional law from the precision matrix: cov = P_rr^-1, mean shift = -P_rr^-1 P_ro (y - mu_o)
    P = np.linalg.inv(S)
    Prr = P[:2, :2]
    cov = np.linalg.inv(Prr)
    mean = mu[:2] - cov @ P[:2, 2] * (0.7 - mu[2])
    np.testing.assert_allclose(c.cov, cov, atol=1e-12)
    np.testing.assert_allclose(c.mean, mean, atol=1e-12)


def test_regression_three_dim_conditional_mean_by_quadrature():
    S = np.array([[1.0, 0.3, 0.5], [0.3, 1.0, -0.2], [0.5, -0.2, 1.0]])
    y = (0.4, -0.6)
    c = G.regression(G.GaussianVectorModel(S), [1, 2], y)

    def joint(x):
        return G.gaussian_density(S, np.array([x, *y]))

    z, _ = integrate.quad(joint, -12, 12)
    m1, _ = integrate.quad(lambda x: x * joint(x), -12, 12)
    m2, _ = integrate.quad(lambda x: x * x * joint(x), -12, 12)
    assert c.mean[0] == pytest.approx(m1 / z, abs=1e-9)
    assert c.cov[0, 0] == pytest.approx(m2 / z - (m1 / z) ** 2, abs=1e-9)


def test_regression_errors():
    m = G.GaussianVectorModel(np.ones((2, 2)))
    with pytest.raises(G.DegenerateError):
        G.regression(G.GaussianVectorModel([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
                     [0, 1], [0.0, 0.0])
    with pytest.raises(G.GaussianError):
        G.regression(m, [0, 0], [0.0, 0.0])


def test_gaussian_density_matches_scipy():
    rng = np.random.default_rng(1)
    S = random_cov(rng, 3)
    x = rng.standard_normal((5, 3))
    np.testing.assert_allclose(G.gaussian_density(S, x),
                               stats.multivariate_normal(np.zeros(3), S).pdf(x), rtol=1e-12)


def test_sample_moments():
    S = np.array([[2.0, 0.6], [0.6, 1.0]])
    x = G.GaussianVectorModel(S, [1.0, -1.0]).sample(np.random.default_rng(0), 200_000)
    np.testing.assert_allclose(x.mean(axis=0), [1.0, -1.0], atol=0.015)
    np.testing.assert_allclose(np.cov(x.T), S, atol=0.03)


def test_interpolated_cov_examples():
    S = np.array([[1.0, 0.4, 0.2], [0.4, 1.0, 0.6], [0.2, 0.6, 1.0]])
    out = G.interpolated_cov(S, 1, 2, 0.25)
    np.testing.assert_allclose(out[0, 1:], [0.1, 0.05])
    np.testing.assert_allclose(out[1:, 1:], S[1:, 1:])
    np.testing.assert_allclose(G.interpolated_cov(S, 1, 2, 1.0), S)
    np.testing.assert_allclose(G.interpolated_cov(S, 1, 2, 0.0)[0, 1:], 0.0)
    with pytest.raises(G.GaussianError):
        G.interpolated_cov(S, 2, 2, 0.5)
    with pytest.raises(G.GaussianError):
        G.interpolated_cov(S, 1, 2, 1.5)


@given(st.integers(0, 10_000), st.floats(0, 1))
def test_interpolated_cov_is_the_coupled_law(seed, t):
    # sqrt(t) X + sqrt(1-t) Y with Y an independent-blocks copy has the scaled cross block
    rng = np.random.default_rng(seed)
    S = random_cov(rng, 4)
    indep = S.copy()
    indep[:2, 2:] = indep[2:, :2] = 0
    np.testing.assert_allclose(G.interpolated_cov(S, 2, 2, t), t * S + (1 - t) * indep, atol=1e-14)


# -- threshold events and pivotal sets -------------------------------------------

def test_threshold_event_indicator():
    U = G.ThresholdEvent.from_function([0.0, 1.0], lambda s: s[0] and not s[1])
    x = np.array([[0.5, 0.5], [0.5, 1.5], [-0.5, 0.5]])
    assert U.indicator(x).tolist() == [True, False, False]
    with pytest.raises(G.EventSpecError):
        G.ThresholdEvent([0.0], [True, False, True])


def test_piv_set_examples():
    q = [0.0, 0.0]
    conj = G.ThresholdEvent.from_function(q, lambda s: s[0] and s[1])
    assert G.piv_set(conj, 0).table.tolist() == [False, True]
    xor = G.ThresholdEvent.from_function(q, lambda s: s[0] != s[1])
    assert G.piv_set(xor, 1).table.all()
    half = G.ThresholdEvent.half_space(q, 0)
    assert not G.piv_set(half, 1).table.any()
    assert not half.depends_on(1) and half.depends_on(0)
    with pytest.raises(G.EventSpecError):
        G.piv_set(half, 2)


def test_piv_set_as_event_is_constant_in_its_coordinate():
    U = G.ThresholdEvent.from_function([0.0] * 3, lambda s: (s[0] and s[1]) or s[2])
    ev = G.piv_set(U, 1).as_event()
    t0, t1 = ev.section(1)
    np.testing.assert_array_equal(t0, t1)
    np.testing.assert_array_equal(t0, G.piv_set(U, 1).table)


@given(st.integers(0, 10_000), st.integers(1, 5))
def test_piv_set_properties(seed, n):
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(n)
    U = G.ThresholdEvent.random(q, rng)
    V = G.ThresholdEvent.random(q, rng)
    for i in range(n):
        p = G.piv_set(U, i).table
        np.testing.assert_array_equal(p, G.piv_set(U.complement(), i).table)
        pv = G.piv_set(V, i).table
        assert not (G.piv_set(U | V, i).table & ~(p | pv)).any()
        assert not (G.piv_set(U & V, i).table & ~(p | pv)).any()


# -- interpolation bound ---------------------------------------------------------

ORTHANT = G.GaussianVectorModel([[1.0, 0.5], [0.5, 1.0]])
UP = G.ThresholdEvent.half_space([0.0], 0)


def test_orthant_upper_arcsine_formula():
    assert G.orthant_upper(0.5, 0.0, 0.0) == pytest.approx(1 / 3)
    val = G.orthant_upper(0.3, 0.2, -0.4)
    ref = stats.multivariate_normal([0, 0], [[1, 0.3], [0.3, 1]]).cdf([-0.2, 0.4])
    assert val == pytest.approx(ref, abs=1e-6)


def test_qi_orthant_values():
    lhs = G.qi_lhs(ORTHANT, UP, UP)
    assert lhs.method == "exact"
    assert lhs.value == pytest.approx(1 / 12, abs=1e-12)
    rhs = G.qi_rhs(ORTHANT, UP, UP)
    assert rhs.value == pytest.approx(0.5 / (2 * math.pi * math.sqrt(0.75)), abs=1e-12)
    assert rhs.value == pytest.approx(0.09189, abs=1e-3)
    assert lhs.value <= rhs.value


def test_qi_exact_density_route_on_orthant():
    # the time average of the pair density at q = 0 is asin(rho) / (2 pi rho)
    rhs = G.qi_rhs(ORTHANT, UP, UP, nodes=24, density="exact")
    assert rhs.value == pytest.approx(math.asin(0.5) / (2 * math.pi), abs=1e-8)
    assert rhs.value == pytest.approx(1 / 12, abs=1e-8)


def test_qi_block_diagonal_is_zero():
    S = np.eye(4)
    S[0, 1] = S[1, 0] = 0.3
    m = G.GaussianVectorModel(S)
    U = G.ThresholdEvent.from_function([0.1, -0.2], lambda s: s[0] or s[1])
    V = G.ThresholdEvent.from_function([0.0, 0.5], lambda s: s[0] and s[1])
    assert G.qi_rhs(m, U, V).value == 0.0
    lhs = G.qi_lhs(m, U, V, n_mc=50_000)
    assert lhs.value <= 4 * lhs.stderr + 1e-3


def test_qi_trivial_events_and_errors():
    full = G.ThresholdEvent.full([0.0])
    assert G.qi_lhs(ORTHANT, full, UP).value == 0.0
    with pytest.raises(G.EventSpecError):
        G.qi_rhs(G.GaussianVectorModel(ORTHANT.cov, [1.0, 0.0]), UP, UP)
    with pytest.raises(G.EventSpecError):
        G.qi_lhs(G.GaussianVectorModel(np.eye(3)), UP, UP)
    with pytest.raises(ValueError):
        G.qi_rhs(ORTHANT, UP, UP, density="other")


def test_qi_full_dimension_events_with_block_split():
    S = np.array([[1.0, 0.4], [0.4, 1.0]])
    m = G.GaussianVectorModel(S)
    U = G.ThresholdEvent.half_space([0.0, 0.0], 0)
    V = G.ThresholdEvent.half_space([0.0, 0.0], 1)
    assert G.qi_lhs(m, U, V, k1=1).value == pytest.approx(math.asin(0.4) / (2 * math.pi))
    with pytest.raises(G.EventSpecError):
        G.qi_lhs(m, V, U, k1=1)


def test_qi_lhs_monte_carlo_matches_exact_in_higher_dimension():
    # a third independent coordinate forces the Monte Carlo route
    S = np.eye(3)
    S[0, 2] = S[2, 0] = 0.5
    m = G.GaussianVectorModel(S)
    U = G.ThresholdEvent.half_space([0.0, 0.0], 0)
    V = G.ThresholdEvent.half_space([0.0], 0)
    est = G.qi_lhs(m, U, V, n_mc=200_000)
    assert est.method == "mc"
    assert abs(est.value - 1 / 12) <= 4 * est.stderr


def test_qi_exact_density_bounds_random_cases():
    rng = np.random.default_rng(11)
    for case in range(4):
        S = random_cov(rng, 4) * 0.8 + 0.2 * np.eye(4)
        q = rng.normal(scale=0.5, size=4)
        U = G.ThresholdEvent.from_function(q[:2], lambda s: s[0] or s[1])
        V = G.ThresholdEvent.from_function(q[2:], lambda s: s[0] and not s[1])
        m = G.GaussianVectorModel(S)
        lhs = G.qi_lhs(m, U, V, n_mc=100_000, seed=case)
        rhs = G.qi_rhs(m, U, V, n_mc=5_000, seed=case, density="exact")
        assert lhs.value <= rhs.value + 3 * math.hypot(lhs.stderr, rhs.stderr)


# -- identities --------------------------------------------------------------------

def test_heat_identity_examples():
    S = np.array([[1.0, 0.3], [0.3, 2.0]])
    assert G.heat_identity_residual(S, [0.2, -0.5], 0, 1) < 1e-6
    with pytest.raises(G.GaussianError):
        G.heat_identity_residual(S, [0.2, -0.5], 1, 0)
    with pytest.raises(G.DegenerateError):
        G.heat_identity_residual(np.ones((2, 2)), [0.0, 0.0], 0, 1)


def test_heat_residual_shrinks_quadratically_in_step():
    S = np.array([[1.0, 0.3, 0.1], [0.3, 1.5, 0.2], [0.1, 0.2, 1.0]])
    x = [0.4, -0.3, 0.8]
    r1 = G.heat_identity_residual(S, x, 0, 2, h=0.02)
    r2 = G.heat_identity_residual(S, x, 0, 2, h=0.01)
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)


@given(st.integers(0, 10_000))
def test_heat_identity_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    S = random_cov(rng, n)
    i, j = sorted(rng.choice(n, 2, replace=False))
    assert G.heat_identity_residual(S, rng.standard_normal(n), int(i), int(j)) < 1e-6


def test_threshold_identity_one_dimensional():
    # int_q^inf phi' = -phi(q), and the pivotal side carries sign -1
    S = np.array([[2.0]])
    U = G.ThresholdEvent.half_space([0.7], 0)
    assert G.threshold_identity_residual(S, U, 0) < 1e-10
    assert G.threshold_identity_residual(S, U.complement(), 0) < 1e-10


def test_threshold_identity_full_space_is_zero():
    S = np.array([[1.0, 0.2], [0.2, 1.0]])
    assert G.threshold_identity_residual(S, G.ThresholdEvent.full([0.3, -0.1]), 1) < 1e-10


def test_threshold_identity_errors():
    U = G.ThresholdEvent.half_space([0.0] * 5, 0)
    with pytest.raises(G.EventSpecError):
        G.threshold_identity_residual(np.eye(5), U, 0)
    with pytest.raises(G.EventSpecError):
        G.threshold_identity_residual(np.eye(3), U, 0)


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.integers(2, 3))
def test_threshold_identity_random(seed, n):
    rng = np.random.default_rng(seed)
    S = random_cov(rng, n)
    U = G.ThresholdEvent.random(rng.normal(scale=0.7, size=n), rng)
    assert G.threshold_identity_residual(S, U, int(rng.integers(n))) < 1e-6


# -- product moments --------------------------------------------------------------

def test_prod_moment_constant():
    assert G.prod_moment_constant(1) == 2
    assert G.prod_moment_constant(2) == 32


def test_abs_moments_match_simulation():
    rng = np.random.default_rng(0)
    z = rng.standard_normal((400_000, 2))
    x = 0.5 + 2 * z[:, 0]
    assert G.abs_normal_mean(0.5, 2.0) == pytest.approx(np.abs(x).mean(), rel=5e-3)
    r = 0.6
    y = r * z[:, 0] + math.sqrt(1 - r * r) * z[:, 1]
    assert G.abs_product_mean(1.0, 3.0, r) == pytest.approx(np.abs(z[:, 0] * 3 * y).mean(), rel=5e-3)
    assert G.abs_normal_mean(-1.5, 0.0) == 1.5
    assert G.abs_product_mean(1.0, 1.0, 0.0) == pytest.approx(2 / math.pi)


def test_prod_moment_bound_holds():
    rng = np.random.default_rng(5)
    S = random_cov(rng, 4)
    b = G.prod_moment_bound(G.GaussianVectorModel(S), [0, 1], [0.5, -1.0], n_mc=50_000)
    assert b.holds and b.lhs > 0
    # one coordinate: E|X| given Y is the closed-form folded normal mean
    S2 = np.array([[1.0, 0.6], [0.6, 1.0]])
    b1 = G.prod_moment_bound(G.GaussianVectorModel(S2), [0], [1.0], n_mc=200_000)
    assert b1.lhs == pytest.approx(G.abs_normal_mean(0.6, 0.8), abs=4 * b1.lhs_stderr)


# -- Kac-Rice ----------------------------------------------------------------------

BF = Kernel.bargmann_fock()


def test_kac_rice_bargmann_fock_line():
    assert G.kac_rice_zeros(BF, (1, 0), math.pi) == pytest.approx(1.0, abs=1e-12)
    assert G.kac_rice_zeros(BF, (1, 1), math.pi, method="quadrature") == pytest.approx(1.0, abs=1e-8)
    assert G.kac_rice_zeros(BF, (1, 0), 0.0) == 0.0


def test_kac_rice_cauchy():
    k = Kernel.cauchy(3.0)
    closed = G.kac_rice_zeros(k, (1, 0), 1.0)
    assert closed == pytest.approx(math.sqrt(6) / math.pi, abs=1e-12)
    assert closed == pytest.approx(0.7797, abs=1e-3)
    assert G.kac_rice_zeros(k, (0, 1), 1.0, method="quadrature") == pytest.approx(closed, rel=1e-8)


def test_kac_rice_derivative_process():
    # zeros of d_x f on a line: rate sqrt(Var f'' / Var f') / pi = sqrt(3) / pi for BF
    assert G.kac_rice_zeros(BF, (1, 0), 1.0, order=1) == pytest.approx(math.sqrt(3) / math.pi)


def test_kac_rice_errors():
    with pytest.raises(G.GaussianError):
        G.kac_rice_zeros(BF, (0, 0), 1.0)
    with pytest.raises(G.GaussianError):
        G.kac_rice_zeros(BF, (1, 0), -1.0)
    with pytest.raises(ValueError):
        G.kac_rice_zeros(BF, (1, 0), 1.0, method="other")


def test_kac_rice_pair_far_segments_factorise():
    a = G.Segment((0.0, 0.0), (1.0, 0.0), 1.0)
    b = G.Segment((0.0, 30.0), (0.0, 1.0), 0.5)
    single = G.kac_rice_zeros(BF, (1, 0), 1.0) * G.kac_rice_zeros(BF, (0, 1), 0.5)
    assert G.kac_rice_pair(BF, a, b, nodes=12) == pytest.approx(single, rel=1e-6)


def test_empirical_zero_count_bargmann_fock():
    est = G.empirical_zero_count(BF, (1, 0), math.pi, spacing=1e-2, replicas=1000, seed=2)
    assert abs(est.value - 1.0) <= 3 * est.stderr + 0.01


def test_threshold_identity_is_not_tautological():
    # a coarse rule leaves a visible residual that the default rule removes
    S = np.array([[1.0, 0.5, 0.2], [0.5, 1.0, 0.3], [0.2, 0.3, 1.0]])
    U = G.ThresholdEvent.from_function([0.3, -0.2, 0.5], lambda s: (s[0] and s[1]) or s[2])
    assert G.threshold_identity_residual(S, U, 1, order=3) > 1e-8
    assert G.threshold_identity_residual(S, U, 1) < 1e-12
