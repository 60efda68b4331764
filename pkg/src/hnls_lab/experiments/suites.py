"""Property suites behind ``hnls-lab verify``; each returns a list of :class:`ResultRow`."""

from __future__ import annotations

import math

import numpy as np

from .. import determinant as det
from .. import norms
from .. import operators as ops
from ..spectral import SpatialGrid, make_field
from .corpus import random_field, random_symbol
from .results import ResultRow

SUITES = ("traces", "identities", "lemmas", "norms")


def _row(exp, quantity, value, tol, scale, **idx):
    return ResultRow(exp, quantity, float(value), None if tol is None else tol * scale, **idx)


# ---------------------------------------------------------------------------


def suite_traces(seed: int = 1, count: int = 20, tol_scale: float = 1.0) -> list:
    rng = np.random.default_rng(seed)
    g = SpatialGrid(64, 16 * math.pi)
    basis = ops.OperatorBasis.for_grid(g)
    rows = []
    worst = {}
    worst_adj = 0.0
    min_slack = math.inf
    for _ in range(count):
        Ms = [random_symbol(rng) for _ in range(3)]
        Us = [random_field(g, rng, 12) for _ in range(3)]
        rep = ops.trace_identities_check(Ms, Us, basis)
        for key, v in rep.items():
            if key == "hs_bound_slack":
                min_slack = min(min_slack, v)
            elif key != "max_deviation":
                worst[key] = max(worst.get(key, 0.0), v)
        M1, M2 = ops.multiplier_matrix(Ms[0], basis), ops.multiplier_matrix(Ms[1], basis)
        U = ops.multiplication_matrix(Us[0], basis)
        Ub = ops.multiplication_matrix(Us[0].conj(), basis)
        adj_M1 = ops.multiplier_matrix(ops.MultiplierSymbol(lambda xi, m=Ms[0]: np.conj(m(xi))), basis)
        adj_M2 = ops.multiplier_matrix(ops.MultiplierSymbol(lambda xi, m=Ms[1]: np.conj(m(xi))), basis)
        S = M1 @ U @ M2
        d1 = np.abs(ops.adjoint(S).matrix - (adj_M2 @ Ub @ adj_M1).matrix).max()
        conj_route = ops.multiplier_matrix(Ms[0].conjugate(), basis) @ Ub @ ops.multiplier_matrix(Ms[1].conjugate(), basis)
        d2 = np.abs(ops.conjugate_op(S).matrix - conj_route.matrix).max()
        d3 = abs(ops.hs_norm(S) - ops.hs_norm(M2 @ Ub @ M1))
        worst_adj = max(worst_adj, d1, d2, d3)
    for key, v in sorted(worst.items()):
        rows.append(_row("traces", f"trace_identity[{key}]", v, 1e-12, tol_scale))
    rows.append(_row("traces", "adjoint_conjugate_norm_symmetry", worst_adj, 1e-12, tol_scale))
    # the bound |tr(T1...Tn)| <= prod ||T_j||_HS: report -slack so that pass means slack >= 0
    rows.append(_row("traces", "hs_product_bound_violation", -min_slack, 0.0, 1.0))

    # quadratic trace: closed form against the extrapolated matrix trace
    k = 1.0
    u = make_field("gaussian", g, amplitude=0.5, width=3.0, carrier=0.25)
    exact = det.first_trace_exact(u, k)
    mat = ops.pair_trace_limit(
        det.resolvent_symbol(-1, -1, k), u, det.resolvent_symbol(+1, -1, k), u.conj(), half_width=1024, levels=5
    )["value"]
    rows.append(_row("traces", "quadratic_trace_closed_vs_matrix", abs(exact - mat) / abs(exact), 1e-6, tol_scale, k=k))

    # diagonal of M u: tr(M u) = (1/2pi) (int m)(int u) for decaying m
    m = ops.MultiplierSymbol(lambda xi: np.exp(-(xi**2)) + 0j, tag="gaussian")
    wide = ops.OperatorBasis(g.length, 255)
    tr = ops.trace(ops.multiplier_matrix(m, wide) @ ops.multiplication_matrix(u, wide))
    int_u = g.dx * np.sum(u.samples)
    table = math.sqrt(math.pi) * int_u / (2 * math.pi)
    rows.append(_row("traces", "trace_of_multiplier_times_field", abs(tr - table) / abs(table), 1e-6, tol_scale))
    return rows


def suite_identities(seed: int = 1, count: int = 5, tol_scale: float = 1.0) -> list:
    rng = np.random.default_rng(seed)
    g = SpatialGrid(128, 16 * math.pi)
    rows = []
    for k in (0.0, 0.5, 1.0, 2.0):
        for ident in ops.IDENTITIES:
            worst = 0.0
            for _ in range(count):
                u = random_field(g, rng, 8)
                f = random_field(g, rng, 16)
                worst = max(worst, ops.mult_identity_residual(ident, u, k, f))
            rows.append(_row("identities", f"residual[{ident}]", worst, 1e-8, tol_scale, k=k))
    const = make_field("planewave", g, amplitude=0.7)
    f = random_field(g, rng, 16)
    rows.append(_row("identities", "residual_constant_u", ops.mult_identity_residual("u_xx", const, 1.0, f), 1e-12, tol_scale))
    return rows


def suite_lemmas(seed: int = 1, count: int = 10, tol_scale: float = 1.0) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    # weighted convolution of brackets: bounded ratio unless one exponent is 1 and the other <= 1
    for a, b in [(0.75, 0.75), (2.0, 1.0), (3.0, 0.5), (2.0, 2.0), (1.0, 1.0), (1.0, 0.5)]:
        r100 = ops.weight_convolution_check(a, b, 0.0, 100.0)["ratio"]
        r1000 = ops.weight_convolution_check(a, b, 0.0, 1000.0)["ratio"]
        log_case = (a == 1 and b <= 1) or (b == 1 and a <= 1)
        if a < 1 and b < 1:
            bound = ops.bracket_convolution_bound(a, b)
            rows.append(_row("lemmas", f"bracket_convolution_ratio[a={a:g},b={b:g}]", r1000, bound, tol_scale))
        elif log_case:
            rows.append(_row("lemmas", f"bracket_convolution_log_growth[a={a:g},b={b:g}]", r1000 / r100, None, 1.0))
        else:
            rows.append(_row("lemmas", f"bracket_convolution_growth[a={a:g},b={b:g}]", r1000 / r100, 1.1, tol_scale))

    # sandwich operator size against the weighted spectral sum
    g = SpatialGrid(256, 16 * math.pi)
    for k in (0.25, 1.0, 4.0):
        C = det.hs_weight_sup(k, g.length, 10.0, offset=k)
        worst = 0.0
        for _ in range(count):
            u = make_field("random_bandlimited", g, band=(-10.0, 10.0), seed=int(rng.integers(2**31)), amplitude=0.5)
            hs2 = det.hs_norm(det.sandwich_B(u, k)) ** 2
            worst = max(worst, hs2 / det.weighted_spectral_sum(u, k))
        rows.append(_row("lemmas", "hs_sq_over_weighted_sum", worst, C, tol_scale, k=k))

    # series against log-determinant, and the epsilon^4 remainder
    g = SpatialGrid(64, 16 * math.pi)
    worst = 0.0
    for _ in range(count):
        u = random_field(g, rng, 12, amplitude=0.3)
        s = det.alpha_series(u, 1.0)
        if s.hs_A <= 0.5:
            worst = max(worst, abs(s.value - det.alpha_logdet(u, 1.0).value))
    rows.append(_row("lemmas", "alpha_series_vs_logdet", worst, 1e-10, tol_scale, k=1.0))
    u = make_field("gaussian", g, amplitude=1.0, width=2.0)
    expo = quartic_exponent(u, 1.0)
    rows.append(_row("lemmas", "alpha_remainder_exponent_error", abs(expo - 4.0), 0.1, tol_scale, k=1.0))
    return rows


def quartic_exponent(u, k: float, eps=(1e-1, 1e-2, 1e-3)) -> float:
    """Least-squares slope of ``log |alpha(eps u) - eps^2 alpha_2|`` against ``log eps``."""
    a2 = det.alpha_quadratic(u, k)
    rem = [abs(det.alpha_series(e * u, k).value - e * e * a2) for e in eps]
    return float(np.polyfit(np.log(eps), np.log(rem), 1)[0])


def suite_norms(seed: int = 1, count: int = 20, tol_scale: float = 1.0) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    g = SpatialGrid(256, 16 * math.pi)
    part = mono = 0.0
    ratios = {s: [] for s in (0.0, 0.5, 1.0)}
    hold = {p: 0.0 for p in (2.0, 4.0, 8.0)}
    tail = {p: 0.0 for p in (2.0, 4.0, 8.0)}
    for _ in range(count):
        u = random_field(g, rng, 60)
        ns = [n for n in norms.resolved_cubes(g) if abs(n) <= g.xi_max - 1]
        total = sum(norms.pi_n(u, int(n)).coefficients for n in ns)
        part = max(part, np.abs(total - u.coefficients).max() / np.abs(u.coefficients).max())
        for s in ratios:
            vals = [norms.modulation_norm(u, s, p) for p in (2.0, 3.0, 4.0, 8.0)]
            mono = max(mono, max(vals[i + 1] - vals[i] for i in range(3)))
            ratios[s].append(norms.modulation_norm(u, s, 2.0) / norms.sobolev_norm(u, s))
        for p in hold:
            m2 = norms.modulation_norm(u, 0.0, p) ** 2
            n0 = int(rng.integers(-5, 6))
            hold[p] = max(hold[p], norms.cube_weighted_sum(u, n0) / m2)
            tail[p] = max(tail[p], norms.tail_integral_r_n(u, n0) / m2)
    rows.append(_row("norms", "sharp_partition_error", part, 1e-12, tol_scale))
    rows.append(_row("norms", "lp_monotonicity_violation", mono, 1e-12, tol_scale))
    for s, r in ratios.items():
        rows.append(_row("norms", "modulation_over_sobolev_max", max(r), (4.0 / 3.0) ** s * (1 + 1e-12), tol_scale, s=s, p=2.0))
        rows.append(_row("norms", "sobolev_over_modulation_max", 1.0 / min(r), 1.5**s * (1 + 1e-12), tol_scale, s=s, p=2.0))
    for p in hold:
        rows.append(_row("norms", "cube_weighted_sum_over_norm_sq", hold[p], norms.hoelder_constant(p), tol_scale, p=p))
        rows.append(_row("norms", "tail_integral_over_norm_sq", tail[p], norms.tail_integral_constant(p), tol_scale, p=p))

    # Bernstein: ||P_N u||_4 <= (2 pi)^(-1/4) N^(1/4) ||u||_2 on the grid
    g = SpatialGrid(256, 2 * math.pi)
    for N in (16, 32, 64):
        worst = 0.0
        for _ in range(count):
            u = make_field("random_bandlimited", g, band=(-100.0, 100.0), seed=int(rng.integers(2**31)))
            worst = max(worst, norms.bernstein_check(u, 4.0, 2.0, N)["lp_ratio"])
        rows.append(_row("norms", "bernstein_ratio", worst, (2 * math.pi) ** -0.25, tol_scale, n=N, p=4.0))
    return rows


def run_suite(name: str, seed: int = 1, tol_scale: float = 1.0) -> list:
    fn = {"traces": suite_traces, "identities": suite_identities, "lemmas": suite_lemmas, "norms": suite_norms}[name]
    return fn(seed=seed, tol_scale=tol_scale)
