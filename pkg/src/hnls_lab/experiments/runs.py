"""The simulate, alpha-scan, apriori and norms commands as pure functions of a config.

Each returns ``(rows, extra)`` where ``extra`` goes into the run manifest (and
may carry arrays for the trajectory file under the key ``"trajectory"``).
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import determinant as det
from .. import norms
from ..errors import BlowUpError
from ..solver import MonitorSpec, default_dt, integrate, scaled_params, scaling_transform
from .config import ExperimentConfig
from .results import ResultRow


def _trajectory_arrays(trace) -> dict:
    return {
        "times": np.asarray(trace.times),
        "x": np.asarray(trace.snapshots[0].grid.x) if trace.snapshots else np.zeros(0),
        "samples": np.array([s.samples for s in trace.snapshots]),
    }


def _integrate(cfg: ExperimentConfig, u0, monitors: MonitorSpec, params=None, grid_cfg=None):
    params = params or cfg.params
    dt = cfg.dt if cfg.dt is not None else default_dt(u0, params, cfg.t_final)
    sc = cfg.solver_config(monitors, dt)
    if grid_cfg is not None:
        sc = dataclasses.replace(sc, grid=grid_cfg)
    return integrate(u0, params, sc)


# ---------------------------------------------------------------------------


def simulate(cfg: ExperimentConfig):
    """Integrate and report every monitor per snapshot plus conservation checks."""
    exp = cfg.experiment_id
    ts = cfg.tolerance_scale
    u0 = cfg.initial_field()
    sp = tuple((float(s), float(p)) for s, p in cfg.sp_list)
    mon = MonitorSpec(
        mass=True,
        alpha_k=tuple(float(k) for k in cfg.k_list),
        alpha_n=tuple(cfg.ns),
        alpha_half_width=cfg.operator_half_width,
        modulation=sp,
        tail_n=tuple(cfg.ns),
    )
    aborted = None
    try:
        trace = _integrate(cfg, u0, mon)
    except BlowUpError as exc:
        trace, aborted = exc.partial, str(exc)

    rows = []
    for i, t in enumerate(trace.times):
        rows.append(ResultRow(exp, "mass", trace.monitors["mass"][i], t=t))
        for k in mon.alpha_k:
            for n in mon.alpha_n:
                rows.append(ResultRow(exp, "alpha", trace.monitors[f"alpha[k={k:g},n={n}]"][i], t=t, n=n, k=k))
        for s, p in sp:
            rows.append(ResultRow(exp, "modulation_norm", trace.monitors[f"modulation[s={s:g},p={p:g}]"][i], t=t, s=s, p=p))
        for n in mon.tail_n:
            rows.append(ResultRow(exp, "r_n", trace.monitors[f"r_n[n={n}]"][i], t=t, n=n))

    if u0.meta.get("kind") == "planewave":
        A = u0.meta.get("amplitude", 1.0)
        xi0 = u0.meta.get("carrier", 0.0)
        om = cfg.params.planewave_frequency(A, xi0)
        for t, snap in zip(trace.times, trace.snapshots):
            err = float(np.abs(snap.samples - u0.samples * np.exp(-1j * om * t)).max())
            rows.append(ResultRow(exp, "linf_error_vs_exact", err, 1e-8 * ts, t=t))

    if trace.times:
        rows.append(ResultRow(exp, "mass_relative_drift", trace.relative_drift("mass"), 1e-10 * ts))
        for k in mon.alpha_k:
            for n in mon.alpha_n:
                drift = trace.relative_drift(f"alpha[k={k:g},n={n}]")
                rows.append(ResultRow(exp, "alpha_relative_drift", drift, 1e-6 * ts, n=n, k=k))
    extra = {"dt": trace.dt, "snapshots": len(trace.times), "aborted": aborted, "trajectory": _trajectory_arrays(trace)}
    return rows, extra


# ---------------------------------------------------------------------------


def chain_constants(k: float, p: float, length: float, xi_max: float, r_max: float) -> dict:
    """Explicit constants of the a-priori chain for the grid and data at hand.

    ``C_hs``: ``||B_n||_HS^2 <= C_hs r_n``; ``C_quartic``: ``|alpha_n - quad_n| <= C_quartic r_n^2``
    (infinite when ``C_hs r_max >= 1``); ``C_upper2``/``C_upper4``: the upper bound
    ``||alpha_n||_{l^{p/2}} <= C_upper2 ||u||^2 + C_upper4 ||u||^4``; ``c_lower``:
    ``quad_n >= c_lower ||Pi_n u||^2``.
    """
    coth = det.periodization_factor(k, length)
    C_hs = det.hs_weight_sup(k, length, xi_max)
    x = C_hs * r_max
    C_q = C_hs**2 / (2 * (1 - x)) if x < 1 else math.inf
    C_r = det.tail_kernel_norm(p)
    return {
        "C_hs": C_hs,
        "C_quartic": C_q,
        "C_upper2": coth * det.quadratic_kernel_l1(k),
        "C_upper4": C_q * C_r**2,
        "c_lower": coth * det.quadratic_kernel_lower(k),
    }


def _lp(arr, q):
    return float(np.sum(np.abs(np.asarray(arr)) ** q) ** (1.0 / q))


def alpha_scan(cfg: ExperimentConfig):
    """alpha of the boost family over (t, n, k), with the chain inequalities checked row by row."""
    exp = cfg.experiment_id
    ts = cfg.tolerance_scale
    u0 = cfg.initial_field()
    trace = _integrate(cfg, u0, MonitorSpec(mass=True))
    ns = cfg.ns
    ks = [float(k) for k in cfg.k_list]
    ps = sorted({float(p) for _, p in cfg.sp_list} | {float(cfg.p)})
    g = u0.grid

    jobs = [(i, k) for i in range(len(trace.times)) for k in ks]

    def run(job):
        i, k = job
        return det.alpha_boost_family(trace.snapshots[i], k, ns, p=cfg.p, half_width=cfg.operator_half_width)

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        fams = dict(zip(jobs, pool.map(run, jobs)))

    rows = []
    fam_norms = {(k, p): [] for k in ks for p in ps}
    r_max = max(float(f.r_n.max()) for f in fams.values())
    consts = {(k, p): chain_constants(k, p, g.length, g.xi_max, r_max) for k in ks for p in ps}
    for (i, k), fam in fams.items():
        t = trace.times[i]
        u = trace.snapshots[i]
        rem = np.abs(fam.remainders)
        for j, n in enumerate(fam.ns):
            n = int(n)
            rows.append(ResultRow(exp, "alpha", fam.values[j], t=t, n=n, k=k))
            rows.append(ResultRow(exp, "alpha_quadratic", fam.quadratic[j], t=t, n=n, k=k))
            rows.append(ResultRow(exp, "r_n", fam.r_n[j], t=t, n=n, k=k))
            rows.append(ResultRow(exp, "hs_B_sq", fam.hs_B_sq[j], t=t, n=n, k=k))
            h = math.sqrt(fam.hs_B_sq[j])
            rows.append(ResultRow(exp, "series_remainder_ratio", rem[j] / det.dpg_remainder_bound(h), 1.0 * ts, t=t, n=n, k=k))
            Cq = consts[(k, ps[0])]["C_quartic"]
            rows.append(ResultRow(exp, "quartic_remainder_ratio", rem[j] / (Cq * fam.r_n[j] ** 2), 1.0 * ts, t=t, n=n, k=k))
        ns_arr = fam.ns
        masses = dict(zip(*norms.cube_masses(u, "sharp")))
        m_range = np.array([masses.get(int(n), 0.0) for n in ns_arr])
        for p in ps:
            q = p / 2.0
            c = consts[(k, p)]
            M = norms.modulation_norm(u, 0.0, p)
            a_lp = _lp(fam.values, q)
            fam_norms[(k, p)].append(a_lp)
            rows.append(ResultRow(exp, "alpha_family_lp", a_lp, t=t, k=k, p=p))
            rows.append(ResultRow(exp, "remainder_family_lp", _lp(rem, q), t=t, k=k, p=p))
            upper = c["C_upper2"] * M**2 + c["C_upper4"] * M**4
            rows.append(ResultRow(exp, "upper_chain_ratio", a_lp / upper, 1.0 * ts, t=t, k=k, p=p))
            lower = c["c_lower"] * _lp(m_range, q) / (a_lp + c["C_upper4"] * M**4)
            rows.append(ResultRow(exp, "lower_chain_ratio", lower, 1.0 * ts, t=t, k=k, p=p))
    for (k, p), vals in fam_norms.items():
        v = np.asarray(vals)
        rel = float(np.abs(v - v[0]).max() / abs(v[0])) if v[0] else float(np.abs(v).max())
        rows.append(ResultRow(exp, "alpha_family_lp_relative_variation", rel, 1e-5 * ts, k=k, p=p))
        for name, val in consts[(k, p)].items():
            rows.append(ResultRow(exp, f"constant[{name}]", val, k=k, p=p))
    return rows, {"dt": trace.dt, "snapshots": len(trace.times)}


# ---------------------------------------------------------------------------


def apriori(cfg: ExperimentConfig):
    """Time series of ``||u(t)||_{M^{2,p}}`` against the small-data bound; large data are
    first scaled with the smallest integer ``lambda`` that makes them small."""
    exp = cfg.experiment_id
    ts = cfg.tolerance_scale
    ps = sorted({float(p) for _, p in cfg.sp_list})
    u0 = cfg.initial_field()
    params = cfg.params
    rows = []
    eps = cfg.small_data_eps
    lam = cfg.scaling_lambda
    pmax = max(ps)
    if lam is None and norms.modulation_norm(u0, 0.0, pmax) >= eps:
        lam = 1
        while norms.modulation_norm(scaling_transform(u0, lam), 0.0, pmax) >= eps:
            lam += 1
            if lam > 4096:
                break
    if lam is not None and lam > 1:
        for p in ps:
            ratio = norms.modulation_norm(scaling_transform(u0, lam), 0.0, p) / (
                lam ** (-1.0 / p) * norms.modulation_norm(u0, 0.0, p)
            )
            rows.append(ResultRow(exp, "scaling_inequality_ratio", ratio, 1.0 + 1e-6 * ts, n=lam, p=p))
        u0 = scaling_transform(u0, lam)
        params = scaled_params(params, lam)
        for p in ps:
            rows.append(ResultRow(exp, "scaled_initial_norm", norms.modulation_norm(u0, 0.0, p), eps, n=lam, p=p))
    trace = _integrate(cfg, u0, MonitorSpec(mass=True, modulation=tuple((0.0, p) for p in ps)), params=params, grid_cfg=u0.grid)
    for p in ps:
        series = trace.series(f"modulation[s=0,p={p:g}]")
        norm0 = series[0]
        for t, v in zip(trace.times, series):
            rows.append(ResultRow(exp, "modulation_norm", v, t=t, p=p))
        sup = float(series.max())
        rows.append(ResultRow(exp, "sup_norm_ratio", sup / norm0 if norm0 else 0.0, 2.0 * ts, p=p))
        bound = norm0 * (1 + norm0) ** (p / 2 - 1)
        rows.append(ResultRow(exp, "bound_constant_empirical", sup / bound if bound else 0.0, p=p))
        held = series <= 2.0 * bound
        horizon = trace.times[-1] if held.all() else (trace.times[int(np.argmin(held)) - 1] if held[0] else 0.0)
        rows.append(ResultRow(exp, "largest_horizon_bound_held", horizon, p=p))
        if p == 2.0:
            mass = np.sqrt(trace.series("mass"))
            dev = float(np.abs(series - mass).max() / mass.max()) if mass.max() else 0.0
            rows.append(ResultRow(exp, "p2_norm_vs_l2", dev, 1e-10 * ts, p=p))
    return rows, {"dt": trace.dt, "scaling_lambda": lam, "snapshots": len(trace.times)}


# ---------------------------------------------------------------------------


def norms_report(cfg: ExperimentConfig):
    """Norms of the initial datum and the partition and monotonicity checks."""
    exp = cfg.experiment_id
    ts = cfg.tolerance_scale
    u = cfg.initial_field()
    g = u.grid
    rows = []
    for s, p in cfg.sp_list:
        s, p = float(s), float(p)
        rows.append(ResultRow(exp, "modulation_norm", norms.modulation_norm(u, s, p), s=s, p=p))
        rows.append(ResultRow(exp, "fourier_lebesgue_norm", norms.fourier_lebesgue_norm(u, s, p), s=s, p=p))
    for s in sorted({float(s) for s, _ in cfg.sp_list}):
        rows.append(ResultRow(exp, "sobolev_norm", norms.sobolev_norm(u, s), s=s))
        vals = [norms.modulation_norm(u, s, p) for p in (2.0, 3.0, 4.0, 8.0)]
        viol = max(vals[i + 1] - vals[i] for i in range(3))
        rows.append(ResultRow(exp, "lp_monotonicity_violation", viol, 1e-12 * ts, s=s))
    for n in cfg.ns:
        rows.append(ResultRow(exp, "r_n", norms.tail_integral_r_n(u, n), n=n))
    cubes = [int(n) for n in norms.resolved_cubes(g) if abs(n) <= g.xi_max - 1]
    total = sum(norms.pi_n(u, n).coefficients for n in cubes)
    peak = np.abs(u.coefficients).max()
    part = float(np.abs(total - u.coefficients).max() / peak) if peak else 0.0
    rows.append(ResultRow(exp, "sharp_partition_error", part, 1e-12 * ts))
    N = 2
    while N / 2 <= g.xi_max:
        rows.append(ResultRow(exp, "bernstein_ratio", norms.bernstein_check(u, 4.0, 2.0, N)["lp_ratio"], (2 * math.pi) ** -0.25 * ts, n=N, p=4.0))
        N *= 2
    return rows, {}


COMMANDS = {"simulate": simulate, "alpha-scan": alpha_scan, "apriori": apriori, "norms": norms_report}
