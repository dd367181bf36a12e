"""Stationary isotropic covariance kernels and their spectral densities.

A kernel ``kappa`` is normalised so that ``kappa(0) = 1``. Its spectral density
``rho`` satisfies ``kappa(x) = int exp(i lambda.x) rho(lambda) d lambda`` and
integrates to one over the plane.
"""
from __future__ import annotations

import functools
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.fft as sfft
from numpy.polynomial import hermite_e
from scipy import special
from scipy.interpolate import RegularGridInterpolator

BARGMANN_FOCK = "bargmann_fock"
CAUCHY = "cauchy"
TABULATED = "tabulated"

NEGATIVE_DENSITY_TOL = 1e-8
MAX_DERIV_ORDER = 4

# FFT grid used for the Cauchy spectral density
CAUCHY_FFT_N = 1024
CAUCHY_FFT_HALF_WIDTH = 64.0


class KernelError(ValueError):
    pass


class InvalidKernelError(KernelError):
    """Spectral density has a negative part beyond round-off."""


class OutOfRangeError(KernelError):
    pass


class UnsupportedOrderError(KernelError):
    pass


@dataclass(frozen=True)
class Kernel:
    """Covariance kernel of a centred, unit-variance, stationary planar field.

    ``family`` is one of ``"bargmann_fock"``, ``"cauchy"`` (``(1+|x|^2)^-beta``)
    or ``"tabulated"`` (spectral density given on a centred square grid of
    frequencies with spacing ``spectral_spacing``).
    """

    family: str
    beta: float | None = None
    alpha: float | None = None
    spectral_values: np.ndarray | None = field(default=None, compare=False, repr=False)
    spectral_spacing: float | None = None

    def __post_init__(self):
        if self.family == CAUCHY:
            if self.beta is None or not self.beta > 0:
                raise KernelError("cauchy kernel needs beta > 0")
            if self.alpha is None:
                object.__setattr__(self, "alpha", 2.0 * self.beta)
        elif self.family == TABULATED:
            vals = np.asarray(self.spectral_values, dtype=float)
            if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
                raise KernelError("spectral grid must be a square 2-D array")
            if self.spectral_spacing is None or not self.spectral_spacing > 0:
                raise KernelError("spectral grid needs a positive spacing")
            mass = vals.sum() * self.spectral_spacing**2
            if not mass > 0:
                raise KernelError("spectral grid has no positive mass")
            vals = vals / mass
            vals.setflags(write=False)
            object.__setattr__(self, "spectral_values", vals)
        elif self.family != BARGMANN_FOCK:
            raise KernelError(f"unknown kernel family {self.family!r}")

    @classmethod
    def bargmann_fock(cls) -> "Kernel":
        return cls(BARGMANN_FOCK)

    @classmethod
    def cauchy(cls, beta: float, alpha: float | None = None) -> "Kernel":
        return cls(CAUCHY, beta=float(beta), alpha=alpha)

    @classmethod
    def tabulated(cls, values, spacing: float, alpha: float | None = None) -> "Kernel":
        return cls(TABULATED, alpha=alpha, spectral_values=np.asarray(values, float),
                   spectral_spacing=float(spacing))

    @property
    def name(self) -> str:
        if self.family == CAUCHY:
            return f"cauchy(beta={self.beta:g})"
        return self.family

    @property
    def key(self) -> str:
        """Stable identity used for caching and config hashing."""
        if self.family != TABULATED:
            return f"{self.family}:{self.beta}"
        digest = hashlib.sha256(np.ascontiguousarray(self.spectral_values).tobytes()).hexdigest()
        return f"{self.family}:{self.spectral_spacing}:{digest[:16]}"

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        return isinstance(other, Kernel) and self.key == other.key and self.alpha == other.alpha

    @property
    def is_closed_form(self) -> bool:
        return self.family in (BARGMANN_FOCK, CAUCHY)

    @property
    def reliable_half_range(self) -> float:
        """Largest |x_i| for which a tabulated kernel is reconstructed faithfully."""
        if self.family != TABULATED:
            return math.inf
        return math.pi / self.spectral_spacing

    def frequencies(self) -> np.ndarray:
        m = self.spectral_values.shape[0]
        return (np.arange(m) - (m - 1) / 2.0) * self.spectral_spacing

    # -- serialisation -------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family}
        if self.beta is not None:
            out["beta"] = self.beta
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.family == TABULATED:
            out["spectral_grid"] = {"values": self.spectral_values.tolist(),
                                    "spacing": self.spectral_spacing}
        return out

    @classmethod
    def from_dict(cls, spec: dict[str, Any]) -> "Kernel":
        allowed = {"family", "beta", "alpha", "spectral_grid"}
        unknown = set(spec) - allowed
        if unknown:
            raise KernelError(f"unknown kernel keys: {sorted(unknown)}")
        family = spec.get("family")
        if family == BARGMANN_FOCK:
            return cls(BARGMANN_FOCK, alpha=spec.get("alpha"))
        if family == CAUCHY:
            return cls.cauchy(spec["beta"], spec.get("alpha"))
        if family == TABULATED:
            grid = spec["spectral_grid"]
            return cls.tabulated(grid["values"], grid["spacing"], spec.get("alpha"))
        raise KernelError(f"unknown kernel family {family!r}")

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Kernel":
        return cls.from_dict(json.loads(text))


def _split(x) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ValueError("points must have a trailing dimension of size 2")
    return x[..., 0], x[..., 1]


def covariance(kernel: Kernel, dx, dy) -> np.ndarray:
    """kappa evaluated at the lag arrays ``(dx, dy)`` (broadcast together)."""
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    if kernel.family == BARGMANN_FOCK:
        return np.exp(-0.5 * (dx * dx + dy * dy))
    if kernel.family == CAUCHY:
        return (1.0 + dx * dx + dy * dy) ** (-kernel.beta)
    return _tabulated_derivative(kernel, (0, 0), dx, dy)


def evaluate(kernel: Kernel, x) -> np.ndarray | float:
    """kappa(x) for a point (or array of points with trailing size-2 axis)."""
    dx, dy = _split(x)
    out = covariance(kernel, dx, dy)
    return float(out) if out.ndim == 0 else out


# -- spectral densities ------------------------------------------------------

@functools.lru_cache(maxsize=8)
def cauchy_spectral_fft(beta: float):
    """Spectral density of ``(1+|x|^2)^-beta`` by a 2-D FFT of the truncated kernel.

    Returns ``(freq_1d, density)``. Truncation at the finite half-width leaves
    ripples of order ``kappa(half_width)``, so this route is only accurate for
    fast enough decay; it serves as the numerical cross-check of
    :func:`cauchy_spectral_closed`.
    """
    n, half = CAUCHY_FFT_N, CAUCHY_FFT_HALF_WIDTH
    h = 2.0 * half / n
    k = np.arange(n)
    lag = np.where(k < n // 2, k, k - n) * h
    kap = (1.0 + lag[:, None] ** 2 + lag[None, :] ** 2) ** (-beta)
    # kappa is even, so its transform is real
    dens = sfft.fft2(kap).real * h * h / (4.0 * math.pi**2)
    dens = sfft.fftshift(dens)
    freq = sfft.fftshift(sfft.fftfreq(n, d=h)) * 2.0 * math.pi
    return freq, dens


def cauchy_spectral_closed(beta: float, r) -> np.ndarray:
    """``2^(1-beta) r^(beta-1) K_(beta-1)(r) / (2 pi Gamma(beta))`` at radius ``r``.

    Infinite at ``r = 0`` when ``beta <= 1``.
    """
    r = np.asarray(r, dtype=float)
    nu = beta - 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = 2.0 ** (1.0 - beta) * r**nu * special.kv(nu, r) / (2.0 * math.pi * special.gamma(beta))
    at0 = 1.0 / (4.0 * math.pi * nu) if nu > 0 else math.inf
    out = np.where(r == 0, at0, out)
    # far tail underflows to nan in r^nu * K_nu
    return np.where(np.isnan(out), 0.0, out)


def _tabulated_density(kernel: Kernel, lx, ly) -> np.ndarray:
    freq = kernel.frequencies()
    interp = RegularGridInterpolator((freq, freq), kernel.spectral_values, method="linear",
                                     bounds_error=False, fill_value=0.0)
    pts = np.stack([np.ravel(lx), np.ravel(ly)], axis=-1)
    return interp(pts).reshape(np.shape(lx))


def spectral_density(kernel: Kernel, lam) -> np.ndarray | float:
    """Spectral density rho(lambda), normalised to unit mass over the plane."""
    lx, ly = _split(lam)
    if kernel.family == BARGMANN_FOCK:
        out = np.exp(-0.5 * (lx * lx + ly * ly)) / (2.0 * math.pi)
    elif kernel.family == CAUCHY:
        out = cauchy_spectral_closed(kernel.beta, np.hypot(lx, ly))
    else:
        worst = kernel.spectral_values.min()
        if worst < -NEGATIVE_DENSITY_TOL:
            raise InvalidKernelError(f"tabulated density reaches {worst:.3e}")
        out = np.maximum(_tabulated_density(kernel, lx, ly), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def spectral_grid(kernel: Kernel, n: int = 257, half_width: float | None = None):
    """Density on a centred square frequency grid: ``(freq_1d, density, spacing)``."""
    if kernel.family == TABULATED:
        return kernel.frequencies(), kernel.spectral_values, kernel.spectral_spacing
    if kernel.family == CAUCHY and half_width is None:
        freq, _ = cauchy_spectral_fft(kernel.beta)
        lx, ly = np.meshgrid(freq, freq, indexing="ij")
        return freq, cauchy_spectral_closed(kernel.beta, np.hypot(lx, ly)), freq[1] - freq[0]
    half_width = 10.0 if half_width is None else half_width
    freq = np.linspace(-half_width, half_width, n)
    lx, ly = np.meshgrid(freq, freq, indexing="ij")
    dens = spectral_density(kernel, np.stack([lx, ly], axis=-1))
    return freq, dens, freq[1] - freq[0]


# -- derivatives -------------------------------------------------------------

@functools.lru_cache(maxsize=128)
def _cauchy_derivative_fn(beta: float, a: int, b: int):
    import sympy as sp

    x, y = sp.symbols("x y", real=True)
    expr = sp.diff((1 + x**2 + y**2) ** sp.nsimplify(-beta), x, a, y, b)
    return sp.lambdify((x, y), sp.simplify(expr), "numpy")


def _tabulated_derivative(kernel: Kernel, order, dx, dy, chunk: int = 4096) -> np.ndarray:
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    dx, dy = np.broadcast_arrays(dx, dy)
    lim = kernel.reliable_half_range
    if dx.size and max(np.abs(dx).max(), np.abs(dy).max()) > lim:
        raise OutOfRangeError(f"tabulated kernel is reliable only for |x_i| <= {lim:.4g}")
    freq = kernel.frequencies()
    lx, ly = np.meshgrid(freq, freq, indexing="ij")
    w = kernel.spectral_values * kernel.spectral_spacing**2
    keep = w != 0
    lx, ly, w = lx[keep], ly[keep], w[keep]
    a, b = order
    m = a + b
    # d^m/dx^m of exp(i lambda.x) = (i lambda)^m exp(i lambda.x); take the real part
    coef = w * lx**a * ly**b
    phase_shift = (m % 4) * math.pi / 2.0
    flat_x, flat_y = dx.ravel(), dy.ravel()
    out = np.empty(flat_x.size)
    for start in range(0, flat_x.size, chunk):
        sx = flat_x[start:start + chunk, None]
        sy = flat_y[start:start + chunk, None]
        out[start:start + chunk] = (coef * np.cos(lx * sx + ly * sy + phase_shift)).sum(axis=1)
    return out.reshape(dx.shape)


def kappa_derivative(kernel: Kernel, order, dx, dy) -> np.ndarray:
    """Partial derivative d^order kappa evaluated at lags ``(dx, dy)``."""
    a, b = (int(o) for o in order)
    if a < 0 or b < 0:
        raise ValueError("multi-index entries must be nonnegative")
    if a + b > MAX_DERIV_ORDER:
        raise UnsupportedOrderError(f"derivative order {a + b} exceeds {MAX_DERIV_ORDER}")
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    if kernel.family == BARGMANN_FOCK:
        ha = hermite_e.hermeval(dx, [0] * a + [1])
        hb = hermite_e.hermeval(dy, [0] * b + [1])
        return (-1) ** (a + b) * ha * hb * np.exp(-0.5 * (dx * dx + dy * dy))
    if kernel.family == CAUCHY:
        fn = _cauchy_derivative_fn(kernel.beta, a, b)
        return np.broadcast_to(np.asarray(fn(dx, dy), dtype=float), np.broadcast(dx, dy).shape).copy()
    return _tabulated_derivative(kernel, (a, b), dx, dy)


def deriv_covariance(kernel: Kernel, beta, gamma, x=(0.0, 0.0)) -> float | np.ndarray:
    """Cov(d^beta f(0), d^gamma f(x)) = (-1)^|beta| d^(beta+gamma) kappa(x)."""
    b1, b2 = (int(v) for v in beta)
    g1, g2 = (int(v) for v in gamma)
    if b1 + b2 + g1 + g2 > MAX_DERIV_ORDER:
        raise UnsupportedOrderError("|beta| + |gamma| must not exceed 4")
    dx, dy = _split(x)
    out = (-1) ** (b1 + b2) * kappa_derivative(kernel, (b1 + g1, b2 + g2), dx, dy)
    return float(out) if np.ndim(out) == 0 else out


# -- validation --------------------------------------------------------------

@dataclass
class ValidationReport:
    kernel: str
    normalization_ok: bool
    symmetry_ok: bool
    isotropy_ok: bool
    nonnegative_ok: bool
    spectral_nonnegative_ok: bool
    fourth_moment_finite: bool
    density_bounded: bool
    support_2d: bool
    fitted_alpha: float
    super_polynomial: bool
    declared_alpha: float | None
    decay_ok: bool
    spectral_iv: str = "unchecked"
    messages: list[str] = field(default_factory=list)

    @property
    def invalid(self) -> bool:
        return not self.spectral_nonnegative_ok

    @property
    def passed(self) -> bool:
        return all((self.normalization_ok, self.symmetry_ok, self.isotropy_ok,
                    self.nonnegative_ok, self.spectral_nonnegative_ok,
                    self.fourth_moment_finite, self.density_bounded, self.support_2d,
                    self.decay_ok))

    def to_dict(self) -> dict[str, Any]:
        out = dict(self.__dict__)
        out["invalid"] = self.invalid
        out["passed"] = self.passed
        return out


def fit_decay_exponent(kernel: Kernel, r_min: float = 5.0, r_max: float = 30.0, n: int = 40):
    """Slope of log|kappa| against log|x| along the first axis; returns (alpha, ok)."""
    r = np.geomspace(r_min, r_max, n)
    if kernel.family == TABULATED:
        r = r[r <= kernel.reliable_half_range]
    vals = np.abs(covariance(kernel, r, np.zeros_like(r)))
    good = vals > 1e-300
    if good.sum() < 3:
        return math.inf, False
    slope = np.polyfit(np.log(r[good]), np.log(vals[good]), 1)[0]
    return float(-slope), True


def validate(kernel: Kernel, grid_half_width: float = 5.0, grid_n: int = 21) -> ValidationReport:
    """Numerical checks of the kernel conditions; never raises on a bad kernel."""
    msgs: list[str] = []
    half = min(grid_half_width, 0.9 * kernel.reliable_half_range)
    ax = np.linspace(-half, half, grid_n)
    gx, gy = np.meshgrid(ax, ax, indexing="ij")

    k0 = float(covariance(kernel, 0.0, 0.0))
    normalization_ok = abs(k0 - 1.0) <= 1e-9
    if not normalization_ok:
        msgs.append(f"kappa(0) = {k0}")

    vals = covariance(kernel, gx, gy)
    tol = 0.0 if kernel.is_closed_form else 1e-12
    symmetry_ok = bool(np.max(np.abs(vals - covariance(kernel, -gx, -gy))) <= tol)
    rot = covariance(kernel, -gy, gx)
    refl = covariance(kernel, gx, -gy)
    iso_tol = 1e-12 if kernel.is_closed_form else 1e-9
    isotropy_ok = bool(max(np.max(np.abs(vals - rot)), np.max(np.abs(vals - refl))) <= iso_tol)
    nonnegative_ok = bool(vals.min() >= -1e-12)
    bounded = bool(np.max(np.abs(vals)) <= 1.0 + 1e-12)
    if not bounded:
        msgs.append("|kappa| exceeds 1 on the test grid")

    spectral_nonnegative_ok = True
    fourth_moment_finite = density_bounded = support_2d = False
    try:
        freq, dens, dl = spectral_grid(kernel)
        worst = float(np.min(dens))
        if worst < -NEGATIVE_DENSITY_TOL:
            raise InvalidKernelError(f"density reaches {worst:.3e}")
        spectral_density(kernel, np.zeros(2))
        lx, ly = np.meshgrid(freq, freq, indexing="ij")
        finite = np.isfinite(dens)
        d = np.where(finite, np.maximum(dens, 0.0), 0.0)
        w = d * dl * dl
        r2 = lx**2 + ly**2
        m4_full = float((r2**2 * w).sum())
        # finite iff the moment has converged before the edge of the grid
        inner = r2 <= (0.75 * freq.max()) ** 2
        m4_inner = float((r2**2 * w)[inner].sum())
        fourth_moment_finite = bool(np.isfinite(m4_full) and m4_full <= 1.01 * m4_inner + 1e-12)
        density_bounded = bool(finite.all() and d.max() < 1e6)
        second = np.array([[(lx * lx * w).sum(), (lx * ly * w).sum()],
                           [(lx * ly * w).sum(), (ly * ly * w).sum()]])
        support_2d = bool(np.linalg.eigvalsh(second).min() > 1e-8)
    except InvalidKernelError as exc:
        spectral_nonnegative_ok = False
        msgs.append(f"invalid kernel: {exc}")

    fitted, ok = fit_decay_exponent(kernel)
    super_poly = bool(ok and fitted > 30.0)
    declared = kernel.alpha
    if declared is None:
        decay_ok = True
    elif super_poly:
        decay_ok = ok
    else:
        decay_ok = bool(ok and abs(fitted - declared) <= 0.3)
    return ValidationReport(
        kernel=kernel.name,
        normalization_ok=normalization_ok and bounded,
        symmetry_ok=symmetry_ok,
        isotropy_ok=isotropy_ok,
        nonnegative_ok=nonnegative_ok,
        spectral_nonnegative_ok=spectral_nonnegative_ok,
        fourth_moment_finite=fourth_moment_finite,
        density_bounded=density_bounded,
        support_2d=support_2d,
        fitted_alpha=fitted,
        super_polynomial=super_poly,
        declared_alpha=declared,
        decay_ok=decay_ok,
        messages=msgs,
    )
