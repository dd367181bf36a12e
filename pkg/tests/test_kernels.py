import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gfperc.kernels import (InvalidKernelError, Kernel, KernelError, UnsupportedOrderError,
                            deriv_covariance, evaluate, fit_decay_exponent, spectral_density,
                            spectral_grid, validate)

BF = Kernel.bargmann_fock()
C3 = Kernel.cauchy(3.0)
coord = st.floats(-6, 6, allow_nan=False)


def _bf_tabulated(n=129, half=8.0):
    freq = np.linspace(-half, half, n)
    lx, ly = np.meshgrid(freq, freq, indexing="ij")
    return Kernel.tabulated(np.exp(-0.5 * (lx**2 + ly**2)), freq[1] - freq[0])


def test_closed_form_values():
    assert evaluate(BF, (0, 0)) == 1.0
    assert evaluate(BF, (1, 0)) == pytest.approx(0.606531, abs=1e-6)
    assert evaluate(Kernel.cauchy(2.5), (1, 0)) == pytest.approx(0.176777, abs=1e-6)


def test_spectral_density_values():
    assert spectral_density(BF, (0, 0)) == pytest.approx(0.159155, abs=1e-6)
    # independent oracle: Hankel transform of (1+r^2)^-3 at 0 is 1/(4 pi) * int 2 r/(1+r^2)^3 dr
    assert spectral_density(C3, (0, 0)) == pytest.approx(1 / (2 * math.pi) * 0.25, rel=1e-3)


@pytest.mark.parametrize("kernel", [BF, C3])
def test_spectral_mass_is_one(kernel):
    freq, dens, dl = spectral_grid(kernel)
    assert dens.sum() * dl * dl == pytest.approx(1.0, abs=1e-6)


def test_deriv_covariance_examples():
    assert deriv_covariance(BF, (1, 0), (1, 0)) == pytest.approx(1.0)
    assert deriv_covariance(C3, (1, 0), (1, 0)) == pytest.approx(6.0)
    for k in (BF, C3, _bf_tabulated()):
        assert deriv_covariance(k, (1, 0), (0, 0)) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(UnsupportedOrderError):
        deriv_covariance(BF, (2, 1), (1, 1))


@given(coord, coord)
def test_symmetry_and_bound(x, y):
    for k in (BF, C3):
        v = evaluate(k, (x, y))
        assert v == evaluate(k, (-x, -y))
        assert abs(v) <= 1.0
        assert v == pytest.approx(evaluate(k, (-y, x)), abs=1e-15)
        assert v == pytest.approx(evaluate(k, (x, -y)), abs=1e-15)


@given(st.floats(-2, 2), st.floats(-2, 2),
       st.sampled_from([((1, 0), (0, 0)), ((0, 1), (0, 0)), ((1, 0), (1, 0)), ((0, 0), (1, 1)),
                        ((1, 0), (0, 1)), ((0, 0), (2, 0))]))
def test_derivatives_match_finite_differences(x, y, multi):
    beta, gamma = multi
    h = 1e-4
    order = (beta[0] + gamma[0], beta[1] + gamma[1])
    for k in (BF, C3):
        def kap(dx, dy):
            return evaluate(k, (x + dx, y + dy))
        if order == (1, 0):
            fd = (kap(h, 0) - kap(-h, 0)) / (2 * h)
        elif order == (0, 1):
            fd = (kap(0, h) - kap(0, -h)) / (2 * h)
        elif order == (2, 0):
            fd = (kap(h, 0) - 2 * kap(0, 0) + kap(-h, 0)) / h**2
        elif order == (0, 2):
            fd = (kap(0, h) - 2 * kap(0, 0) + kap(0, -h)) / h**2
        else:
            fd = (kap(h, h) - kap(h, -h) - kap(-h, h) + kap(-h, -h)) / (4 * h * h)
        fd *= (-1) ** (beta[0] + beta[1])
        got = deriv_covariance(k, beta, gamma, (x, y))
        assert got == pytest.approx(fd, rel=1e-5, abs=2e-7)


@given(st.floats(1.0, 20.0), st.floats(0, 2 * math.pi), st.floats(0.01, 3.0))
def test_monotone_along_rays(r, theta, dr):
    u = np.array([math.cos(theta), math.sin(theta)])
    for k in (BF, C3):
        assert evaluate(k, (r + dr) * u) <= evaluate(k, r * u)


@pytest.mark.parametrize("beta", [0.3, 1.0, 2.5, 4.0])
def test_cauchy_density_nonnegative(beta):
    _, dens, _ = spectral_grid(Kernel.cauchy(beta))
    assert dens.min() >= -1e-8


def test_validate_bargmann_fock():
    rep = validate(BF)
    assert rep.passed and rep.super_polynomial
    assert rep.spectral_iv == "unchecked"


def test_validate_cauchy_fits_alpha():
    rep = validate(C3)
    assert rep.passed
    assert rep.fitted_alpha == pytest.approx(6.0, abs=0.3)


def test_validate_flags_negative_tabulated_density():
    k = _bf_tabulated()
    vals = np.array(k.spectral_values)
    vals[10, 10] = -1e-3
    bad = Kernel.tabulated(vals, k.spectral_spacing)
    rep = validate(bad)
    assert rep.invalid and not rep.passed
    with pytest.raises(InvalidKernelError):
        spectral_density(bad, (0, 0))


def test_tabulated_reconstructs_bargmann_fock():
    k = _bf_tabulated()
    for x in [(0, 0), (1, 0), (0.5, -1.2), (2, 2)]:
        assert evaluate(k, x) == pytest.approx(evaluate(BF, x), abs=1e-6)
    assert evaluate(k, (0.3, 0.7)) == pytest.approx(evaluate(k, (-0.3, -0.7)), abs=1e-12)


def test_tabulated_out_of_range():
    from gfperc.kernels import OutOfRangeError
    k = _bf_tabulated()
    with pytest.raises(OutOfRangeError):
        evaluate(k, (k.reliable_half_range + 1.0, 0.0))


def test_json_round_trip():
    for k in (BF, C3, Kernel.cauchy(2.0, alpha=4.5)):
        back = Kernel.from_json(k.to_json())
        assert back == k
        json.loads(k.to_json())
    with pytest.raises(KernelError):
        Kernel.from_dict({"family": "matern"})
    with pytest.raises(KernelError):
        Kernel.cauchy(-1.0)


def test_decay_fit_bargmann_fock_is_steep():
    alpha, ok = fit_decay_exponent(BF)
    assert alpha > 20 or not ok


@pytest.mark.parametrize("beta", [2.5, 3.0, 4.0])
def test_cauchy_fft_route_agrees_with_closed_form(beta):
    from gfperc.kernels import cauchy_spectral_closed, cauchy_spectral_fft
    freq, dens = cauchy_spectral_fft(beta)
    lx, ly = np.meshgrid(freq, freq, indexing="ij")
    closed = cauchy_spectral_closed(beta, np.hypot(lx, ly))
    i0 = len(freq) // 2
    assert freq[i0] == 0
    assert dens[i0, i0] == pytest.approx(closed[i0, i0], abs=1e-6)
    assert np.abs(dens - closed).max() < 1e-6


def test_cauchy_slow_decay_is_valid_but_unbounded_density():
    rep = validate(Kernel.cauchy(1.0))
    assert not rep.invalid
    assert not rep.density_bounded
