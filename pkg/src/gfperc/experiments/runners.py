"""Monte Carlo experiments. Each ``run_*`` takes an :class:`ExperimentConfig`
and returns a list of :class:`ResultRecord`.
"""
from __future__ import annotations

import json
import math
import time
from pathlib import Path

import numpy as np
from scipy import stats

from .. import events as ev
from ..gaussian import (GaussianVectorModel, ThresholdEvent, empirical_zero_count,
                        kac_rice_zeros, qi_lhs, qi_rhs)
from ..kernels import evaluate, validate
from ..lattice import EpsRegion, color_field, to_half_units
from ..nodal import count_components, trace_nodal
from ..sampler import GridSpec, sample_field, sample_fields, save_field, substream
from .config import ExperimentConfig
from .parallel import replica_map
from .records import ResultRecord, boolean_record

NAN = float("nan")


class _Clock:
    """Per-point wall clock; values reach the CSV only when ``timing`` is on."""

    def __init__(self, cfg: ExperimentConfig, timings: dict | None = None):
        self.cfg = cfg
        self.timings = {} if timings is None else timings
        self._t = time.perf_counter()

    def lap(self, key: str) -> float:
        now = time.perf_counter()
        ms = 1000.0 * (now - self._t)
        self._t = now
        self.timings[key] = round(ms, 3)
        return round(ms, 3) if self.cfg.timing else 0.0


def _grid(region_bounds, eps: float, margin: float = 0.0) -> GridSpec:
    x0, x1, y0, y1 = region_bounds
    return GridSpec.covering(x0 - margin, x1 + margin, y0 - margin, y1 + margin, eps / 2)


def _union(*bounds):
    return (min(b[0] for b in bounds), max(b[1] for b in bounds),
            min(b[2] for b in bounds), max(b[3] for b in bounds))


def _cov_estimate(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """``mean(ab) - mean(a) mean(b)`` with a delta-method standard error."""
    a = a.astype(float)
    b = b.astype(float)
    prod = (a - a.mean()) * (b - b.mean())
    n = len(a)
    return float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(n)) if n > 1 else NAN


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else NAN


def ols_slope(x, y) -> tuple[float, float, int]:
    """Slope, its standard error and residual degrees of freedom."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    k = len(x)
    if k < 2:
        return NAN, NAN, 0
    res = stats.linregress(x, y)
    se = res.stderr if k > 2 else NAN
    return float(res.slope), float(se), k - 2


# -- crossings -------------------------------------------------------------------

def run_crossing(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, eps, p, n = cfg.kernel_obj, cfg.epsilon, cfg.p, cfg.replicas
    clock, out = _Clock(cfg, timings), []
    for s in cfg.s:
        for rho in cfg.rho:
            rect = EpsRegion.rectangle(0, rho * s, 0, s, eps)
            grid = _grid(rect.to_points(), eps)

            def work(chunk, rect=rect, grid=grid):
                rows = []
                for f in sample_fields(kernel, grid, cfg.seed, chunk):
                    col = color_field(f, eps, p)
                    lr = ev.crossing(col, rect, ev.LR, ev.ABOVE)
                    tb = ev.crossing(col, rect, ev.TB, ev.BELOW)
                    rows.append((lr, tb))
                return rows

            res = replica_map(work, n, cfg.threads).astype(bool)
            ms = clock.lap(f"crossing s={s} rho={rho}")
            lr, tb = res[:, 0], res[:, 1]
            out.append(boolean_record("crossing", kernel.name, eps, p, s, rho, int(lr.sum()), n,
                                      cfg.seed, ms))
            out.append(boolean_record("crossing.duality_violations", kernel.name, eps, p, s, rho,
                                      int((lr == tb).sum()), n, cfg.seed, ms))
    return out


def run_duality_audit(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, eps, n = cfg.kernel_obj, cfg.epsilon, cfg.replicas
    clock, out = _Clock(cfg, timings), []
    for s in cfg.s:
        rects = [EpsRegion.rectangle(0, rho * s, 0, s, eps) for rho in cfg.rho]
        grid = _grid(_union(*[r.to_points() for r in rects]), eps)

        def work(chunk, rects=rects, grid=grid):
            rows = []
            for f in sample_fields(kernel, grid, cfg.seed, chunk):
                row = []
                for level in cfg.levels:
                    col = color_field(f, eps, level)
                    row.extend(ev.duality_holds(col, r) for r in rects)
                rows.append(row)
            return rows

        res = replica_map(work, n, cfg.threads).astype(bool)
        ms = clock.lap(f"duality s={s}")
        k = 0
        for level in cfg.levels:
            for rho in cfg.rho:
                out.append(boolean_record("duality.violations", kernel.name, eps, level, s, rho,
                                          int((~res[:, k]).sum()), n, cfg.seed, ms))
                k += 1
    return out


def run_mesh_uniformity(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, p, n = cfg.kernel_obj, cfg.p, cfg.replicas
    clock, out = _Clock(cfg, timings), []
    for s in cfg.s:
        for rho in cfg.rho:
            ests = []
            for eps in cfg.epsilons:
                rect = EpsRegion.rectangle(0, rho * s, 0, s, eps)
                grid = _grid(rect.to_points(), eps)

                def work(chunk, rect=rect, grid=grid, eps=eps):
                    return [ev.crossing(color_field(f, eps, p), rect, ev.LR, ev.ABOVE)
                            for f in sample_fields(kernel, grid, cfg.seed, chunk)]

                res = replica_map(work, n, cfg.threads).astype(bool).ravel()
                ms = clock.lap(f"mesh s={s} rho={rho} eps={eps}")
                rec = boolean_record("mesh.crossing", kernel.name, eps, p, s, rho, int(res.sum()),
                                     n, cfg.seed, ms)
                out.append(rec)
                ests.append(rec)
            best, pair = -1.0, None
            for i in range(len(ests)):
                for j in range(i + 1, len(ests)):
                    diff = abs(ests[i].estimate - ests[j].estimate)
                    if diff > best:
                        best, pair = diff, (ests[i], ests[j])
            if pair:
                se = math.hypot(pair[0].stderr, pair[1].stderr)
                out.append(ResultRecord("mesh.max_diff", kernel.name, NAN, p, s, rho, best, se, n,
                                        cfg.seed, 0.0))
    return out


def run_fkg(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, eps, p, n = cfg.kernel_obj, cfg.epsilon, cfg.p, cfg.replicas
    clock, out = _Clock(cfg, timings), []
    for s in cfg.s:
        sq = EpsRegion.rectangle(0, s, 0, s, eps)
        left = EpsRegion.rectangle(0, 2 * s, 0, s, eps)
        right = EpsRegion.rectangle(s, 3 * s, 0, s, eps)
        far = EpsRegion.rectangle(3 * s + cfg.gap, 4 * s + cfg.gap, 0, s, eps)
        grid = _grid(_union(sq.to_points(), right.to_points(), far.to_points()), eps)

        def work(chunk, sq=sq, left=left, right=right, far=far, grid=grid):
            rows = []
            for f in sample_fields(kernel, grid, cfg.seed, chunk):
                col = color_field(f, eps, p)
                rows.append((ev.crossing(col, sq, ev.LR), ev.crossing(col, sq, ev.TB),
                             ev.crossing(col, left, ev.LR), ev.crossing(col, right, ev.LR),
                             ev.crossing(col, far, ev.LR)))
            return rows

        res = replica_map(work, n, cfg.threads).astype(bool)
        ms = clock.lap(f"fkg s={s}")
        pairs = {"fkg.lr_tb": (0, 1), "fkg.overlap": (2, 3), "fkg.far": (0, 4),
                 "fkg.identical": (0, 0)}
        for name, (i, j) in pairs.items():
            est, se = _cov_estimate(res[:, i], res[:, j])
            out.append(ResultRecord(name, kernel.name, eps, p, s, cfg.gap if name == "fkg.far" else NAN,
                                    est, se, n, cfg.seed, ms))
    return out


# -- quasi-independence ----------------------------------------------------------------

def max_correlation(kernel, eps: float, side: float, d: float) -> float:
    """``max |kappa(x - y)|`` over vertices ``x, y`` of two ``side`` squares ``d`` apart."""
    sq = EpsRegion.square(side, eps)
    half = eps / 2
    xs = np.arange(sq.x0, sq.x1 + 1)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    keep = (gx + gy) % 2 == 0
    v = np.stack([gx[keep], gy[keep]], 1)
    diff = np.unique((v[:, None, :] - v[None, :, :]).reshape(-1, 2), axis=0)
    shift = to_half_units(d, eps)
    vals = evaluate(kernel, np.stack([(diff[:, 0] + shift) * half, diff[:, 1] * half], 1))
    return float(np.abs(vals).max())


def qi_rhs_shape(eta: float, p: float) -> float:
    if eta >= 1:
        return math.inf
    return eta / math.sqrt(1 - eta * eta) * (1 + abs(p)) ** 4 * math.exp(-p * p)


def run_qi_fields(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, eps, p, n = cfg.kernel_obj, cfg.epsilon, cfg.p, cfg.replicas
    a = cfg.square
    clock, out = _Clock(cfg, timings), []
    for d in cfg.d:
        sq1 = EpsRegion.square(a, eps)
        sq2 = EpsRegion.square(a, eps, centre=(d, 0.0))
        grid = _grid(_union(sq1.to_points(), sq2.to_points()), eps)

        def work(chunk, sq1=sq1, sq2=sq2, grid=grid):
            rows = []
            for f in sample_fields(kernel, grid, cfg.seed, chunk):
                col = color_field(f, eps, p)
                rows.append((ev.crossing(col, sq1, ev.LR), ev.crossing(col, sq2, ev.LR)))
            return rows

        res = replica_map(work, n, cfg.threads).astype(bool)
        ms = clock.lap(f"qi d={d}")
        est, se = _cov_estimate(res[:, 0], res[:, 1])
        eta = max_correlation(kernel, eps, a, d)
        out.append(ResultRecord("qi.cov", kernel.name, eps, p, d, a, abs(est), se, n, cfg.seed, ms))
        out.append(ResultRecord("qi.eta", kernel.name, eps, p, d, a, eta, 0.0, n, cfg.seed, 0.0))
        out.append(ResultRecord("qi.rhs_shape", kernel.name, eps, p, d, a, qi_rhs_shape(eta, p), 0.0,
                                n, cfg.seed, 0.0))
    return out


def random_correlation(rng: np.random.Generator, n: int) -> np.ndarray:
    A = rng.normal(size=(n, n))
    C = A @ A.T + 0.5 * np.eye(n)
    d = np.sqrt(np.diag(C))
    return C / np.outer(d, d)


def random_qi_case(seed: int, case: int, dim: int):
    """A centred unit-variance model and two non-trivial threshold events on its blocks."""
    rng = substream(seed, case, 20)
    k1 = dim // 2
    cov = random_correlation(rng, dim)
    q = rng.normal(scale=0.5, size=dim)
    while True:
        U = ThresholdEvent.random(q[:k1], rng)
        V = ThresholdEvent.random(q[k1:], rng)
        if 0 < U.table.sum() < len(U.table) and 0 < V.table.sum() < len(V.table):
            return GaussianVectorModel(cov), U, V


def run_qi_vectors(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    clock, out = _Clock(cfg, timings), []
    model = GaussianVectorModel([[1.0, 0.5], [0.5, 1.0]])
    U = ThresholdEvent.half_space([0.0], 0)
    lhs = qi_lhs(model, U, U)
    rhs = qi_rhs(model, U, U, nodes=cfg.t_nodes)
    ms = clock.lap("orthant")
    for name, e in (("qi_vectors.orthant_lhs", lhs), ("qi_vectors.orthant_rhs", rhs)):
        out.append(ResultRecord(name, "gaussian", NAN, 0.0, 0.5, NAN, e.value, e.stderr, 1,
                                cfg.seed, ms))
    for case in range(cfg.cases):
        model, U, V = random_qi_case(cfg.seed, case, cfg.dim)
        lhs = qi_lhs(model, U, V, n_mc=cfg.mc, seed=cfg.seed + case)
        rhs = qi_rhs(model, U, V, nodes=cfg.t_nodes, n_mc=max(cfg.mc // 10, 1000),
                     seed=cfg.seed + case)
        ms = clock.lap(f"case {case}")
        se = math.hypot(lhs.stderr, rhs.stderr)
        for name, val, err in (("qi_vectors.lhs", lhs.value, lhs.stderr),
                               ("qi_vectors.rhs", rhs.value, rhs.stderr),
                               ("qi_vectors.margin", rhs.value - lhs.value, se)):
            out.append(ResultRecord(name, "gaussian", NAN, 0.0, case, cfg.dim, val, err, cfg.mc,
                                    cfg.seed, ms))
    return out


# -- nodal components ------------------------------------------------------------------

def nodal_counts(cfg: ExperimentConfig, s: float, tiles: int = 1, p: float | None = None) -> np.ndarray:
    """Per replica: components inside ``[-s/2, s/2]^2`` followed by the count in each tile."""
    kernel, eps = cfg.kernel_obj, cfg.epsilon
    p = cfg.p if p is None else p
    square = EpsRegion.square(s, eps)
    grid = _grid(square.to_points(), eps, margin=2 * eps)
    r = s / tiles
    tile_regions = [EpsRegion.rectangle(-s / 2 + i * r, -s / 2 + (i + 1) * r,
                                        -s / 2 + j * r, -s / 2 + (j + 1) * r, eps)
                    for i in range(tiles) for j in range(tiles)] if tiles > 1 else []

    def work(chunk):
        rows = []
        for f in sample_fields(kernel, grid, cfg.seed, chunk):
            curves = trace_nodal(f, eps, p)
            rows.append([count_components(curves, square)]
                        + [count_components(curves, t) for t in tile_regions])
        return rows

    return replica_map(work, cfg.replicas, cfg.threads)


def run_ns_density(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, eps, p, n = cfg.kernel_obj, cfg.epsilon, cfg.p, cfg.replicas
    clock, out = _Clock(cfg, timings), []
    for s in cfg.s:
        dens = nodal_counts(cfg, s)[:, 0] / s ** 2
        ms = clock.lap(f"ns s={s}")
        m, se = _mean_se(dens)
        sd = float(dens.std(ddof=1)) if n > 1 else NAN
        out.append(ResultRecord("ns.density", kernel.name, eps, p, s, NAN, m, se, n, cfg.seed, ms))
        out.append(ResultRecord("ns.std", kernel.name, eps, p, s, NAN, sd,
                                sd / math.sqrt(2 * (n - 1)) if n > 1 else NAN, n, cfg.seed, ms))
    return out


def run_concentration(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, eps, p, n = cfg.kernel_obj, cfg.epsilon, cfg.p, cfg.replicas
    K = cfg.tiles_per_side
    clock, out = _Clock(cfg, timings), []
    counts, times = {}, {}
    for s in cfg.s:
        counts[s] = nodal_counts(cfg, s, K)
        times[s] = clock.lap(f"concentration s={s}")
    s_ref = max(cfg.s)
    c_ref = float((counts[s_ref][:, 0] / s_ref ** 2).mean())
    _, c_se = _mean_se(counts[s_ref][:, 0] / s_ref ** 2)
    out.append(ResultRecord("concentration.c_ref", kernel.name, eps, p, s_ref, NAN, c_ref, c_se, n,
                            cfg.seed, 0.0))
    threshold = c_ref * (1 - cfg.rel_eps)
    for s in cfg.s:
        dens = counts[s][:, 0] / s ** 2
        out.append(boolean_record("concentration.tail", kernel.name, eps, p, s, cfg.rel_eps,
                                  int((dens <= threshold).sum()), n, cfg.seed, times[s]))
        if K > 1:
            r = s / K
            deficient = (counts[s][:, 1:] / r ** 2 <= threshold).sum(axis=1)
            m, se = _mean_se(deficient)
            out.append(ResultRecord("concentration.deficient_tiles", kernel.name, eps, p, s, r, m, se,
                                    n, cfg.seed, times[s]))
    return out


# -- arms, Tassion, pivotal patterns ----------------------------------------------------

def run_one_arm(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, eps, p, n, r = cfg.kernel_obj, cfg.epsilon, cfg.p, cfg.replicas, cfg.r
    radii = sorted(cfg.s)
    S = max(radii)
    grid = _grid((-S, S, -S, S), eps)
    clock, out = _Clock(cfg, timings), []

    def work(chunk):
        return [ev.arm_profile(color_field(f, eps, p), r, radii)
                for f in sample_fields(kernel, grid, cfg.seed, chunk)]

    res = replica_map(work, n, cfg.threads).astype(bool)
    ms = clock.lap("one-arm")
    probs = []
    for k, s in enumerate(radii):
        rec = boolean_record("one_arm.prob", kernel.name, eps, p, s, r, int(res[:, k].sum()), n,
                             cfg.seed, ms)
        out.append(rec)
        probs.append(rec.estimate)
    keep = [(s, q) for s, q in zip(radii, probs) if q >= 5.0 / n]
    slope, se, df = ols_slope([math.log(s / r) for s, _ in keep], [math.log(q) for _, q in keep])
    eta = -slope
    lo = eta - stats.t.ppf(0.975, df) * se if df > 0 else NAN
    out.append(ResultRecord("one_arm.eta", kernel.name, eps, p, len(keep), r, eta, se, n, cfg.seed, 0.0))
    out.append(ResultRecord("one_arm.eta_ci95_low", kernel.name, eps, p, len(keep), r, lo, NAN, n,
                            cfg.seed, 0.0))
    return out


def tassion_alphas(s: float, eps: float, steps: int = 8) -> list[float]:
    step = max(eps, round(s / 2 / steps / eps) * eps)
    k = int(round(s / 2 / step))
    alphas = [round(i * step, 12) for i in range(k + 1)]
    if alphas[-1] < s / 2:
        alphas.append(s / 2)
    return alphas


def run_tassion(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, eps, n = cfg.kernel_obj, cfg.epsilon, cfg.replicas
    p = cfg.p
    clock, out = _Clock(cfg, timings), []
    for s in cfg.s:
        alphas = list(cfg.alpha) if cfg.alpha else tassion_alphas(s, eps)
        grid = _grid((-s / 2, s / 2, -s / 2, s / 2), eps)

        def work(chunk, alphas=alphas, grid=grid, s=s):
            rows = []
            for f in sample_fields(kernel, grid, cfg.seed, chunk):
                prof = ev.tassion_profile(color_field(f, eps, p), s, alphas)
                rows.append(prof["H_low"] + prof["H_high"] + prof["X"])
            return rows

        res = replica_map(work, n, cfg.threads).astype(bool)
        ms = clock.lap(f"tassion s={s}")
        m = len(alphas)
        low, high, X = res[:, :m], res[:, m:2 * m], res[:, 2 * m:]
        alpha_hat = NAN
        for k, a in enumerate(alphas):
            phi, se = _mean_se(low[:, k].astype(float) - high[:, k].astype(float))
            out.append(ResultRecord("tassion.phi", kernel.name, eps, p, s, a, phi, se, n, cfg.seed, ms))
            if math.isnan(alpha_hat) and phi > 0.125:
                alpha_hat = a
        out.append(ResultRecord("tassion.alpha_hat", kernel.name, eps, p, s, NAN, alpha_hat, NAN, n,
                                cfg.seed, ms))
        for k, a in enumerate(alphas):
            if not math.isnan(alpha_hat) and a <= alpha_hat:
                out.append(boolean_record("tassion.X", kernel.name, eps, p, s, a, int(X[:, k].sum()),
                                          n, cfg.seed, ms))
    return out


def run_pivotal_scaling(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, p, n, W = cfg.kernel_obj, cfg.p, cfg.replicas, cfg.window
    clock, out = _Clock(cfg, timings), []
    logs = {"alt4": [], "alt3": [], "alt4_integer": [], "alt4_centre": []}
    for eps in cfg.epsilons:
        rect = EpsRegion.square(W, eps)
        grid = _grid(rect.to_points(), eps)

        def work(chunk, rect=rect, grid=grid, eps=eps):
            rows = []
            for f in sample_fields(kernel, grid, cfg.seed, chunk):
                a_int, a_cen, a3 = ev.count_patterns_by_type(color_field(f, eps, p), rect)
                rows.append((a_int + a_cen, a3, a_int, a_cen))
            return rows

        res = replica_map(work, n, cfg.threads).astype(float)
        ms = clock.lap(f"pivotal eps={eps}")
        for name, col, norm in (("alt4", 0, W * W), ("alt3", 1, 4 * W),
                                ("alt4_integer", 2, W * W), ("alt4_centre", 3, W * W)):
            m, se = _mean_se(res[:, col] / norm)
            out.append(ResultRecord(f"pivotal.{name}", kernel.name, eps, p, W, NAN, m, se, n,
                                    cfg.seed, ms))
            if m > 0:
                logs[name].append((math.log(eps), math.log(m)))
    for name, pts in logs.items():
        slope, se, _ = ols_slope([a for a, _ in pts], [b for _, b in pts])
        out.append(ResultRecord(f"pivotal.{name}_slope", kernel.name, NAN, p, W, len(pts), slope, se,
                                n, cfg.seed, 0.0))
    return out


# -- Gaussian checks and utilities ------------------------------------------------------

def run_kac_rice(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, L = cfg.kernel_obj, cfg.length
    clock, out = _Clock(cfg, timings), []
    closed = kac_rice_zeros(kernel, cfg.direction, L, method="closed")
    quad = kac_rice_zeros(kernel, cfg.direction, L, method="quadrature")
    ms = clock.lap("formula")
    out.append(ResultRecord("kac_rice.closed", kernel.name, NAN, 0.0, L, NAN, closed, 0.0, 1, cfg.seed, ms))
    out.append(ResultRecord("kac_rice.quadrature", kernel.name, NAN, 0.0, L, NAN, quad, 0.0, 1, cfg.seed, ms))
    emp = empirical_zero_count(kernel, cfg.direction, L, cfg.spacing, cfg.replicas, cfg.seed)
    ms = clock.lap("empirical")
    out.append(ResultRecord("kac_rice.empirical", kernel.name, NAN, 0.0, L, cfg.spacing, emp.value,
                            emp.stderr, cfg.replicas, cfg.seed, ms))
    return out


def run_sample(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel, eps = cfg.kernel_obj, cfg.epsilon
    s = cfg.s[0]
    grid = _grid((-s / 2, s / 2, -s / 2, s / 2), eps)
    clock, out = _Clock(cfg, timings), []
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    for r in range(cfg.replicas):
        f = sample_field(kernel, grid, cfg.seed, r)
        save_field(f, Path(cfg.out) / f"field_{cfg.seed}_{r}.bin")
        ms = clock.lap(f"sample {r}")
        v = f.values
        out.append(ResultRecord("sample.mean", kernel.name, eps, NAN, s, r, float(v.mean()), NAN,
                                v.size, cfg.seed, ms))
        out.append(ResultRecord("sample.variance", kernel.name, eps, NAN, s, r, float((v * v).mean()),
                                NAN, v.size, cfg.seed, ms))
    return out


def run_validate_kernel(cfg: ExperimentConfig, timings: dict | None = None) -> list[ResultRecord]:
    kernel = cfg.kernel_obj
    clock = _Clock(cfg, timings)
    report = validate(kernel)
    ms = clock.lap("validate")
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    (Path(cfg.out) / "kernel_report.json").write_text(json.dumps(report.to_dict(), indent=1))
    out = [ResultRecord("validate.passed", kernel.name, NAN, NAN, NAN, NAN, float(report.passed), 0.0,
                        1, cfg.seed, ms),
           ResultRecord("validate.fitted_alpha", kernel.name, NAN, NAN, 5.0, 30.0,
                        float(report.fitted_alpha), NAN, 1, cfg.seed, ms)]
    return out


RUNNERS = {
    "crossing": run_crossing,
    "duality-audit": run_duality_audit,
    "mesh-uniformity": run_mesh_uniformity,
    "fkg": run_fkg,
    "qi-fields": run_qi_fields,
    "qi-vectors": run_qi_vectors,
    "ns-density": run_ns_density,
    "concentration": run_concentration,
    "one-arm": run_one_arm,
    "tassion": run_tassion,
    "pivotal-scaling": run_pivotal_scaling,
    "kac-rice": run_kac_rice,
    "sample": run_sample,
    "validate-kernel": run_validate_kernel,
}


def run(cfg: ExperimentConfig) -> tuple[list[ResultRecord], dict]:
    """Run the configured experiment; returns the records and per-point timings."""
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    records = RUNNERS[cfg.experiment](cfg, timings)
    timings["total"] = round(1000.0 * (time.perf_counter() - t0), 3)
    return records, timings
