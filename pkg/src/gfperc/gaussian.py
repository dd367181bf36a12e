"""Finite-dimensional Gaussian toolkit: threshold events, pivotal sets,
regression, the interpolation bound on event covariances, the heat identity
of the Gaussian density, conditional product moments and Kac-Rice counts.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .kernels import Kernel, deriv_covariance
from .sampler import sample_lines, substream

MAX_EVENT_DIM = 24
PSD_TOL = 1e-10
CLAMP_TOL = 1e-12
MAX_COND = 1e12
GL_NODES = 8


class GaussianError(ValueError):
    pass


class DegenerateError(GaussianError):
    """Singular conditioning block or degenerate process."""


class EventSpecError(GaussianError):
    pass


# -- models --------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianVectorModel:
    """Gaussian vector with mean ``mean`` and covariance ``cov``."""

    cov: np.ndarray = field(repr=False)
    mean: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float, ndmin=2)
        n = cov.shape[0]
        if cov.shape != (n, n):
            raise GaussianError("covariance must be square")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
            raise GaussianError("covariance must be symmetric")
        if n:
            w = np.linalg.eigvalsh(cov)
            if w[0] < -PSD_TOL * max(1.0, w[-1]):
                raise GaussianError(f"covariance not positive semidefinite (eigenvalue {w[0]:.3e})")
        mean = np.zeros(n) if self.mean is None else np.array(self.mean, dtype=float).reshape(n)
        cov.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)

    @property
    def n(self) -> int:
        return self.cov.shape[0]

    def marginal(self, idx: Sequence[int]) -> "GaussianVectorModel":
        idx = list(idx)
        return GaussianVectorModel(self.cov[np.ix_(idx, idx)], self.mean[idx])

    def sqrt_cov(self) -> np.ndarray:
        """``L`` with ``L @ L.T = cov``, from an eigendecomposition with round-off clamped."""
        w, v = np.linalg.eigh(self.cov)
        top = max(w[-1], 0.0) if len(w) else 0.0
        w = np.where(w < 0, np.where(w >= -CLAMP_TOL * max(top, 1.0), 0.0, w), w)
        if (w < 0).any():
            raise GaussianError("covariance has a negative eigenvalue beyond round-off")
        return v * np.sqrt(w)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        z = rng.standard_normal((size, self.n))
        return self.mean + z @ self.sqrt_cov().T

    def density(self, x: np.ndarray) -> np.ndarray:
        return gaussian_density(self.cov, np.asarray(x) - self.mean)


def gaussian_density(cov: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Centred Gaussian density with covariance ``cov`` at points ``x`` (``(..., n)``)."""
    cov = np.atleast_2d(cov)
    n = cov.shape[0]
    chol = np.linalg.cholesky(cov)
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, n)
    y = np.linalg.solve(chol, flat.T)
    quad = (y * y).sum(axis=0)
    logdet = 2 * np.log(np.diag(chol)).sum()
    out = np.exp(-0.5 * quad - 0.5 * logdet - 0.5 * n * math.log(2 * math.pi))
    return out.reshape(x.shape[:-1])


def regression(joint: GaussianVectorModel, observed: Sequence[int],
               values: Sequence[float]) -> GaussianVectorModel:
    """Law of the unobserved coordinates given ``X[observed] = values``.

    Covariance ``A - B D^-1 B^T`` and mean ``mu_u + B D^-1 (y - mu_o)``.
    """
    observed = [int(k) for k in observed]
    values = np.asarray(values, dtype=float).reshape(len(observed))
    if not observed:
        return joint
    if len(set(observed)) != len(observed):
        raise GaussianError("observed indices repeat")
    rest = [k for k in range(joint.n) if k not in observed]
    S = joint.cov
    D = S[np.ix_(observed, observed)]
    if np.linalg.cond(D) >= MAX_COND:
        raise DegenerateError("observed block is singular or ill-conditioned")
    B = S[np.ix_(rest, observed)]
    A = S[np.ix_(rest, rest)]
    K = np.linalg.solve(D, B.T).T
    cov = A - K @ B.T
    cov = 0.5 * (cov + cov.T)
    mean = joint.mean[rest] + K @ (values - joint.mean[observed])
    return GaussianVectorModel(cov, mean)


def interpolated_cov(cov: np.ndarray, k1: int, k2: int, t: float) -> np.ndarray:
    """Covariance of ``sqrt(t) X + sqrt(1-t) Y``: cross-block entries scaled by ``t``."""
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (k1 + k2, k1 + k2):
        raise GaussianError("block sizes do not match the covariance")
    if not 0.0 <= t <= 1.0:
        raise GaussianError("t must lie in [0, 1]")
    out = cov.copy()
    out[:k1, k1:] *= t
    out[k1:, :k1] *= t
    w = np.linalg.eigvalsh(out)
    if w[0] < -PSD_TOL * max(1.0, w[-1]):
        raise GaussianError("interpolated covariance lost positive semidefiniteness")
    return out


# -- threshold events ----------------------------------------------------------

def _patterns(x: np.ndarray, q: np.ndarray) -> np.ndarray:
    bits = (np.asarray(x) >= q).astype(np.int64)
    return (bits << np.arange(len(q))).sum(axis=-1)


@dataclass(frozen=True)
class ThresholdEvent:
    """Event determined by the signs ``x_i >= q_i``.

    ``table[m]`` is membership for the sign pattern whose bit ``i`` is
    ``x_i >= q_i``.
    """

    q: np.ndarray = field(repr=False)
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        q = np.array(self.q, dtype=float, ndmin=1)
        table = np.array(self.table, dtype=bool, ndmin=1)
        if len(q) > MAX_EVENT_DIM:
            raise EventSpecError(f"at most {MAX_EVENT_DIM} coordinates")
        if table.shape != (2 ** len(q),):
            raise EventSpecError("truth table must have 2^n entries")
        q.setflags(write=False)
        table.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "table", table)

    @property
    def n(self) -> int:
        return len(self.q)

    @classmethod
    def from_function(cls, q, fn: Callable[[tuple[bool, ...]], bool]) -> "ThresholdEvent":
        q = np.array(q, dtype=float, ndmin=1)
        n = len(q)
        table = [bool(fn(tuple(bool(m >> i & 1) for i in range(n)))) for m in range(2 ** n)]
        return cls(q, table)

    @classmethod
    def full(cls, q) -> "ThresholdEvent":
        q = np.array(q, dtype=float, ndmin=1)
        return cls(q, np.ones(2 ** len(q), bool))

    @classmethod
    def half_space(cls, q, i: int, above: bool = True) -> "ThresholdEvent":
        """``{x_i >= q_i}`` (or its complement)."""
        return cls.from_function(q, lambda s: s[i] == above)

    @classmethod
    def random(cls, q, rng: np.random.Generator, p: float = 0.5) -> "ThresholdEvent":
        q = np.array(q, dtype=float, ndmin=1)
        return cls(q, rng.random(2 ** len(q)) < p)

    def indicator(self, x: np.ndarray) -> np.ndarray:
        return self.table[_patterns(x, self.q)]

    def complement(self) -> "ThresholdEvent":
        return ThresholdEvent(self.q, ~self.table)

    def _check(self, other: "ThresholdEvent"):
        if other.n != self.n or not np.array_equal(other.q, self.q):
            raise EventSpecError("events have different thresholds")

    def __and__(self, other: "ThresholdEvent") -> "ThresholdEvent":
        self._check(other)
        return ThresholdEvent(self.q, self.table & other.table)

    def __or__(self, other: "ThresholdEvent") -> "ThresholdEvent":
        self._check(other)
        return ThresholdEvent(self.q, self.table | other.table)

    def depends_on(self, i: int) -> bool:
        return bool(piv_set(self, i).table.any())

    def section(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Membership with sign ``i`` forced to 0 and to 1, indexed by the other signs."""
        r = np.arange(2 ** (self.n - 1))
        low = r & ((1 << i) - 1)
        p0 = ((r >> i) << (i + 1)) | low
        return self.table[p0], self.table[p0 | (1 << i)]


@dataclass(frozen=True)
class PivSet:
    """Sign patterns of the coordinates other than ``i`` for which ``x_i`` decides membership."""

    event: ThresholdEvent
    i: int
    table: np.ndarray = field(repr=False)

    def as_event(self) -> ThresholdEvent:
        """The same set as an event over all ``n`` coordinates (constant in coordinate ``i``)."""
        n, i = self.event.n, self.i
        m = np.arange(2 ** n)
        reduced = (m & ((1 << i) - 1)) | ((m >> (i + 1)) << i)
        return ThresholdEvent(self.event.q, self.table[reduced])


def piv_set(event: ThresholdEvent, i: int) -> PivSet:
    if not 0 <= i < event.n:
        raise EventSpecError(f"coordinate {i} out of range")
    t0, t1 = event.section(i)
    table = t0 != t1
    table.setflags(write=False)
    return PivSet(event, i, table)


# -- the interpolation inequality ----------------------------------------------

@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    method: str = "mc"


def _split(model: GaussianVectorModel, U: ThresholdEvent, V: ThresholdEvent, k1: int | None):
    n = model.n
    if U.n + V.n == n and (k1 is None or k1 == U.n):
        return U, V, U.n
    if U.n == V.n == n and k1 is not None:
        if any(U.depends_on(k) for k in range(k1, n)) or any(V.depends_on(k) for k in range(k1)):
            raise EventSpecError("U must ignore the last block and V the first")
        u_small = ThresholdEvent(U.q[:k1], U.table[np.arange(2 ** k1)])
        v_small = ThresholdEvent(V.q[k1:], V.table[np.arange(2 ** (n - k1)) << k1])
        return u_small, v_small, k1
    raise EventSpecError("events do not match the model's coordinate blocks")


def orthant_upper(rho: float, a: float, b: float) -> float:
    """``P[X >= a, Y >= b]`` for a standard bivariate normal with correlation ``rho``."""
    if a == 0 and b == 0:
        return 0.25 + math.asin(rho) / (2 * math.pi)
    if abs(rho) >= 1:
        raise DegenerateError("|rho| must be < 1")
    s = math.sqrt(1 - rho * rho)

    def f(x):
        return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi) * special.ndtr((rho * x - b) / s)

    val, _ = integrate.quad(f, a, math.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def _single_coordinate(event: ThresholdEvent):
    """Return ``(kind, q)`` with kind in {"full", "empty", "above", "below"} for a 1-D event."""
    t = tuple(bool(v) for v in event.table)
    return {(True, True): "full", (False, False): "empty",
            (False, True): "above", (True, False): "below"}[t], float(event.q[0])


def _exact_two_dim(model: GaussianVectorModel, U: ThresholdEvent, V: ThresholdEvent) -> float:
    s1, s2 = math.sqrt(model.cov[0, 0]), math.sqrt(model.cov[1, 1])
    rho = model.cov[0, 1] / (s1 * s2)
    ku, qu = _single_coordinate(U)
    kv, qv = _single_coordinate(V)
    if "full" in (ku, kv) or "empty" in (ku, kv):
        return 0.0
    a = (qu - model.mean[0]) / s1
    b = (qv - model.mean[1]) / s2
    # reflect so both events are upper orthants
    r = rho
    if ku == "below":
        a, r = -a, -r
    if kv == "below":
        b, r = -b, -r
    pa, pb = special.ndtr(-a), special.ndtr(-b)
    return abs(orthant_upper(r, a, b) - pa * pb)


def qi_lhs(model: GaussianVectorModel, U: ThresholdEvent, V: ThresholdEvent,
           n_mc: int = 200_000, seed: int = 0, k1: int | None = None) -> Estimate:
    """``|P[X in U and V] - P[X in U] P[X in V]|`` with U on the first block, V on the second."""
    U, V, k1 = _split(model, U, V, k1)
    if U.table.all() or not U.table.any() or V.table.all() or not V.table.any():
        return Estimate(0.0, 0.0, "exact")
    if model.n == 2:
        return Estimate(_exact_two_dim(model, U, V), 0.0, "exact")
    x = model.sample(substream(seed, 0, 10), n_mc)
    a = U.indicator(x[:, :k1]).astype(float)
    b = V.indicator(x[:, k1:]).astype(float)
    prod = (a - a.mean()) * (b - b.mean())
    cov = prod.mean()
    return Estimate(abs(cov), prod.std(ddof=1) / math.sqrt(n_mc), "mc")


def _pair_density(sigma_t: float, qi: float, qj: float) -> float:
    d = 1 - sigma_t ** 2
    return math.exp(-(qi * qi + qj * qj - 2 * sigma_t * qi * qj) / (2 * d)) / (2 * math.pi * math.sqrt(d))


def qi_rhs(model: GaussianVectorModel, U: ThresholdEvent, V: ThresholdEvent,
           nodes: int = GL_NODES, n_mc: int = 20_000, seed: int = 0, k1: int | None = None,
           density: str = "bound") -> Estimate:
    """Upper bound on :func:`qi_lhs` from the interpolation path ``X_t``.

    Sums over cross pairs ``i < k1 <= j`` the term ``|Sigma_ij|`` times the
    Gauss-Legendre average over ``t`` of the conditional probability of both
    pivotal sets given ``X_t(i) = q_i, X_t(j) = q_j``, times a pair-density
    factor. ``density="bound"`` uses the uniform factor
    ``exp(-(q_i^2 + q_j^2) / 2) / (2 pi sqrt(1 - Sigma_ij^2))``;
    ``density="exact"`` integrates the actual density of ``(X_t(i), X_t(j))``.
    """
    U, V, k1 = _split(model, U, V, k1)
    if np.any(model.mean != 0):
        raise EventSpecError("the interpolation bound is stated for centred vectors")
    if density not in ("bound", "exact"):
        raise ValueError("density must be 'bound' or 'exact'")
    n = model.n
    q = np.concatenate([U.q, V.q])
    S = model.cov
    tn, tw = np.polynomial.legendre.leggauss(nodes)
    tn, tw = 0.5 * (tn + 1), 0.5 * tw
    total, var = 0.0, 0.0
    rng = substream(seed, 0, 11)
    for i in range(k1):
        piv_u = piv_set(U, i).as_event()
        if not piv_u.table.any():
            continue
        for j in range(k1, n):
            sij = S[i, j]
            if sij == 0:
                continue
            if abs(sij) >= 1:
                raise DegenerateError(f"|Sigma_{i}{j}| >= 1")
            piv_v = piv_set(V, j - k1).as_event()
            if not piv_v.table.any():
                continue
            uniform = math.exp(-(q[i] ** 2 + q[j] ** 2) / 2) / (2 * math.pi * math.sqrt(1 - sij ** 2))
            rest = [k for k in range(n) if k not in (i, j)]
            for t, w in zip(tn, tw):
                fac = uniform if density == "bound" else _pair_density(t * sij, q[i], q[j])
                prob, se = _conditional_piv_probability(
                    S, k1, t, i, j, q, rest, piv_u, piv_v, n_mc, rng)
                total += abs(sij) * w * fac * prob
                var += (abs(sij) * w * fac * se) ** 2
    return Estimate(total, math.sqrt(var), "gauss-legendre+mc")


def _conditional_piv_probability(S, k1, t, i, j, q, rest, piv_u, piv_v, n_mc, rng):
    n = S.shape[0]
    x_fixed = np.zeros(n)
    x_fixed[i], x_fixed[j] = q[i], q[j]
    if not rest:
        x = x_fixed[None, :]
        hit = piv_u.indicator(x[:, :k1]) & piv_v.indicator(x[:, k1:])
        return float(hit[0]), 0.0
    cond = regression(GaussianVectorModel(interpolated_cov(S, k1, n - k1, t)), [i, j], [q[i], q[j]])
    x = np.empty((n_mc, n))
    x[:, [i, j]] = [q[i], q[j]]
    x[:, rest] = cond.sample(rng, n_mc)
    hit = piv_u.indicator(x[:, :k1]) & piv_v.indicator(x[:, k1:])
    p = hit.mean()
    return float(p), math.sqrt(p * (1 - p) / n_mc)


# -- identities ----------------------------------------------------------------

def _check_pd(cov: np.ndarray, max_cond: float = 1e10) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
        raise GaussianError("covariance must be symmetric")
    w = np.linalg.eigvalsh(cov)
    if w[0] <= 0 or w[-1] / w[0] > max_cond:
        raise DegenerateError("covariance is singular or ill-conditioned")
    return cov


def heat_identity_residual(cov, x, i: int, j: int, h: float = 1e-4) -> float:
    """``|d Gamma / d Sigma_ij - d^2 Gamma / dx_i dx_j|`` by central differences of step ``h``.

    ``Sigma_ij`` is moved as one coordinate of the symmetric matrix, i.e. both
    entries ``(i, j)`` and ``(j, i)`` change together.
    """
    cov = _check_pd(cov)
    x = np.asarray(x, dtype=float)
    if not i < j:
        raise GaussianError("need i < j")
    E = np.zeros_like(cov)
    E[i, j] = E[j, i] = 1.0
    d_sigma = (gaussian_density(cov + h * E, x) - gaussian_density(cov - h * E, x)) / (2 * h)
    ei, ej = np.eye(len(x))[i] * h, np.eye(len(x))[j] * h
    pts = np.stack([x + ei + ej, x + ei - ej, x - ei + ej, x - ei - ej])
    g = gaussian_density(cov, pts)
    d_xx = (g[0] - g[1] - g[2] + g[3]) / (4 * h * h)
    return float(abs(d_sigma - d_xx))


# composite Gauss-Legendre on a half-line, offsets in units of the coordinate's std
_HALF_LINE_BREAKS = (0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.5, 8.5, 12.0)


def _half_line_rule(q: float, sd: float, upper: bool, order: int):
    gx, gw = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for a, b in zip(_HALF_LINE_BREAKS[:-1], _HALF_LINE_BREAKS[1:]):
        xs.append(a + (b - a) * 0.5 * (gx + 1))
        ws.append((b - a) * 0.5 * gw)
    x, w = np.concatenate(xs) * sd, np.concatenate(ws) * sd
    return (q + x, w) if upper else (q - x, w)


def _cell_integral(func, rules) -> float:
    """Tensor-product quadrature of ``func`` (vectorised over ``(m, n)`` points)."""
    if not rules:
        return float(func(np.zeros((1, 0)))[0])
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wts = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    w = np.prod(np.stack([v.ravel() for v in wts], axis=1), axis=1)
    total = 0.0
    step = 1 << 18
    for s in range(0, len(w), step):
        total += float((func(pts[s:s + step]) * w[s:s + step]).sum())
    return total


def threshold_identity_residual(cov, event: ThresholdEvent, i: int, order: int | None = None) -> float:
    """``|int_U d phi/dx_i - int_{Piv_i(U)} eps_i phi(.., q_i, ..)|`` by quadrature.

    ``phi`` is the centred Gaussian density of ``cov``. ``eps_i`` is ``+1``
    where the section of ``U`` along coordinate ``i`` is ``]-inf, q_i[``,
    ``-1`` where it is ``[q_i, inf[`` and ``0`` otherwise. Both sides are
    composite Gauss-Legendre sums over the sign cells.
    """
    cov = _check_pd(cov)
    n = event.n
    if cov.shape != (n, n):
        raise EventSpecError("event and covariance dimensions differ")
    if n > 4:
        raise EventSpecError("quadrature is supported up to n = 4")
    if order is None:
        order = {1: 16, 2: 12, 3: 8, 4: 4}[n]
    q = event.q
    sd = np.sqrt(np.diag(cov))
    prec = np.linalg.inv(cov)
    chol_logdet = np.linalg.slogdet(cov)[1]
    norm = math.exp(-0.5 * chol_logdet - 0.5 * n * math.log(2 * math.pi))

    def phi(x):
        return norm * np.exp(-0.5 * np.einsum("mi,ij,mj->m", x, prec, x))

    def dphi(x):
        return -(x @ prec[:, i]) * phi(x)

    lhs = 0.0
    for m in np.flatnonzero(event.table):
        rules = [_half_line_rule(q[k], sd[k], bool(m >> k & 1), order) for k in range(n)]
        lhs += _cell_integral(dphi, rules)

    t0, t1 = event.section(i)
    eps = np.where(t0 & ~t1, 1, np.where(t1 & ~t0, -1, 0))
    others = [k for k in range(n) if k != i]
    rhs = 0.0
    for r in np.flatnonzero(eps):
        rules = [_half_line_rule(q[k], sd[k], bool(r >> idx & 1), order)
                 for idx, k in enumerate(others)]

        def restricted(y, r=r):
            x = np.empty((len(y), n))
            x[:, others] = y
            x[:, i] = q[i]
            return phi(x)

        rhs += eps[r] * _cell_integral(restricted, rules)
    return float(abs(lhs - rhs))


# -- conditional product moments -------------------------------------------------

def prod_moment_constant(n: int) -> float:
    return float(n * n * 2 ** n * math.factorial(n))


@dataclass(frozen=True)
class MomentBound:
    lhs: float
    lhs_stderr: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 3 * self.lhs_stderr


def prod_moment_bound(joint: GaussianVectorModel, x_idx: Sequence[int], mu: Sequence[float],
                      n_mc: int = 200_000, seed: int = 0) -> MomentBound:
    """``E[prod |X_i| | Y = mu]`` against ``C(n) max(sqrt(A_ii) v |B_ik D^-1_kj mu_j|)^n``."""
    x_idx = [int(k) for k in x_idx]
    y_idx = [k for k in range(joint.n) if k not in x_idx]
    mu = np.asarray(mu, dtype=float).reshape(len(y_idx))
    cond = regression(joint, y_idx, mu)
    n = len(x_idx)
    S = joint.cov
    A = S[np.ix_(x_idx, x_idx)]
    B = S[np.ix_(x_idx, y_idx)]
    Dinv = np.linalg.inv(S[np.ix_(y_idx, y_idx)])
    terms = np.abs(B[:, :, None] * Dinv[None, :, :] * mu[None, None, :])
    scale = max(float(np.sqrt(np.diag(A)).max()), float(terms.max()) if terms.size else 0.0)
    rhs = prod_moment_constant(n) * scale ** n
    x = cond.sample(substream(seed, 0, 12), n_mc)
    prod = np.prod(np.abs(x), axis=1)
    return MomentBound(float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(n_mc)), float(rhs))


def abs_normal_mean(m: float, s: float) -> float:
    """``E|N(m, s^2)|``."""
    if s == 0:
        return abs(m)
    z = m / s
    return s * math.sqrt(2 / math.pi) * math.exp(-0.5 * z * z) + m * (1 - 2 * special.ndtr(-z))


def abs_product_mean(s1: float, s2: float, r: float) -> float:
    """``E|XY|`` for centred normals with standard deviations ``s1, s2`` and correlation ``r``."""
    r = min(1.0, max(-1.0, r))
    return 2 * s1 * s2 / math.pi * (math.sqrt(1 - r * r) + r * math.asin(r))


# -- Kac-Rice ----------------------------------------------------------------------

def directional_cov(kernel: Kernel, u, a: int, b: int, x=(0.0, 0.0)) -> float:
    """``Cov(d_u^a f(0), d_u^b f(x))`` for a unit vector ``u``."""
    return _mixed_directional_cov(kernel, u, a, u, b, x)


def _unit(direction) -> tuple[float, float]:
    d = np.asarray(direction, dtype=float)
    nrm = np.linalg.norm(d)
    if nrm == 0:
        raise GaussianError("direction must be nonzero")
    d = d / nrm
    return float(d[0]), float(d[1])


def kac_rice_zeros(kernel: Kernel, direction=(1.0, 0.0), length: float = 1.0, order: int = 0,
                   method: str = "closed") -> float:
    """Expected number of zeros of ``s -> d_u^order f(s u)`` on ``[0, length]``.

    ``method="closed"`` uses the stationary rate ``sqrt(Var Phi' / Var Phi) / pi``;
    ``method="quadrature"`` integrates ``phi_s(0) E[|Phi'(s)| | Phi(s) = 0]``
    with the conditional law built by regression.
    """
    if length < 0:
        raise GaussianError("length must be nonnegative")
    u = _unit(direction)
    v0 = directional_cov(kernel, u, order, order)
    v1 = directional_cov(kernel, u, order + 1, order + 1)
    if v0 <= 0 or v1 <= 0:
        raise DegenerateError("process or its derivative is degenerate")
    if length == 0:
        return 0.0
    if method == "closed":
        return math.sqrt(v1 / v0) * length / math.pi
    if method != "quadrature":
        raise ValueError("method must be 'closed' or 'quadrature'")
    c01 = directional_cov(kernel, u, order, order + 1)
    joint = GaussianVectorModel([[v0, c01], [c01, v1]])
    cond = regression(joint, [0], [0.0])
    dens = 1.0 / math.sqrt(2 * math.pi * v0)
    # the integrand does not depend on s for a stationary field
    rate = dens * abs_normal_mean(float(cond.mean[0]), math.sqrt(max(cond.cov[0, 0], 0.0)))
    val, _ = integrate.quad(lambda s: rate, 0.0, length, epsabs=1e-12, epsrel=1e-10)
    return val


@dataclass(frozen=True)
class Segment:
    """The process ``s -> d_u^order f(start + s u)`` for ``s`` in ``[0, length]``."""

    start: tuple[float, float]
    direction: tuple[float, float]
    length: float
    order: int = 0


def kac_rice_pair(kernel: Kernel, seg1: Segment, seg2: Segment, nodes: int = 24) -> float:
    """Expected number of ``(s1, s2)`` with both segment processes vanishing.

    Two-dimensional Gauss-Legendre quadrature of ``phi_s(0) E[|Phi1' Phi2'| | Phi = 0]``.
    """
    u1, u2 = _unit(seg1.direction), _unit(seg2.direction)
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    s1 = 0.5 * seg1.length * (gx + 1)
    w1 = 0.5 * seg1.length * gw
    s2 = 0.5 * seg2.length * (gx + 1)
    w2 = 0.5 * seg2.length * gw
    o1, o2 = seg1.order, seg2.order
    a11 = directional_cov(kernel, u1, o1, o1)
    a22 = directional_cov(kernel, u2, o2, o2)
    d11 = directional_cov(kernel, u1, o1 + 1, o1 + 1)
    d22 = directional_cov(kernel, u2, o2 + 1, o2 + 1)
    c1 = directional_cov(kernel, u1, o1, o1 + 1)
    c2 = directional_cov(kernel, u2, o2, o2 + 1)
    total = 0.0
    for a, wa in zip(s1, w1):
        p = np.asarray(seg1.start) + a * np.asarray(u1)
        for b, wb in zip(s2, w2):
            x = tuple(np.asarray(seg2.start) + b * np.asarray(u2) - p)
            cross = _cross_block(kernel, u1, u2, o1, o2, x)
            # coordinates: Phi1, Phi2, Phi1', Phi2'
            S = np.array([
                [a11, cross[0, 0], c1, cross[0, 1]],
                [cross[0, 0], a22, cross[1, 0], c2],
                [c1, cross[1, 0], d11, cross[1, 1]],
                [cross[0, 1], c2, cross[1, 1], d22],
            ])
            joint = GaussianVectorModel(S)
            dens = gaussian_density(S[:2, :2], np.zeros(2))
            cond = regression(joint, [0, 1], [0.0, 0.0])
            sd = np.sqrt(np.clip(np.diag(cond.cov), 0, None))
            r = cond.cov[0, 1] / (sd[0] * sd[1]) if sd.prod() > 0 else 0.0
            total += wa * wb * float(dens) * abs_product_mean(sd[0], sd[1], r)
    return total


def _cross_block(kernel, u1, u2, o1, o2, x) -> np.ndarray:
    """``Cov(d_{u1}^{o1+a} f(0), d_{u2}^{o2+b} f(x))`` for ``a, b`` in {0, 1}."""
    out = np.empty((2, 2))
    for a, b in itertools.product((0, 1), repeat=2):
        out[a, b] = _mixed_directional_cov(kernel, u1, o1 + a, u2, o2 + b, x)
    return out


def _mixed_directional_cov(kernel, u, a, v, b, x) -> float:
    total = 0.0
    for k in range(a + 1):
        ca = math.comb(a, k) * u[0] ** k * u[1] ** (a - k)
        if ca == 0:
            continue
        for m in range(b + 1):
            cb = math.comb(b, m) * v[0] ** m * v[1] ** (b - m)
            if cb == 0:
                continue
            total += ca * cb * deriv_covariance(kernel, (k, a - k), (m, b - m), x)
    return total


def empirical_zero_count(kernel: Kernel, direction=(1.0, 0.0), length: float = math.pi,
                         spacing: float = 1e-3, replicas: int = 10_000,
                         seed: int = 0) -> Estimate:
    """Mean number of sign changes of ``f(s u)`` on a ``spacing`` mesh of ``[0, length]``."""
    n = int(round(length / spacing)) + 1
    counts = np.empty(replicas)
    for r, line in enumerate(sample_lines(kernel, direction, spacing, n, seed, range(replicas))):
        s = line >= 0
        counts[r] = np.count_nonzero(s[1:] != s[:-1])
    return Estimate(float(counts.mean()), float(counts.std(ddof=1) / math.sqrt(replicas)), "mc")
