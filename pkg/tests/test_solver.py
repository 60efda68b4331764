import math

import numpy as np
import pytest

from hnls_lab import solver as sv
from hnls_lab.errors import BlowUpError, ResolutionError
from hnls_lab.spectral import SpatialGrid, SpectralField, make_field

GRID = SpatialGrid(128, 32 * math.pi)
P = sv.EquationParams(1.0, 1.0)


def run(u0, params=P, t=0.5, dt=0.01, **kw):
    cfg = sv.SolverConfig(u0.grid, t, dt, snapshot_stride=10**9, **kw)
    return sv.integrate(u0, params, cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        sv.SolverConfig(GRID, 1.0, dealias="none")
    with pytest.raises(ValueError):
        sv.SolverConfig(GRID, 1.0, dt=-0.1)
    with pytest.raises(ValueError):
        sv.SolverConfig(GRID, -1.0)
    with pytest.raises(ValueError):
        sv.SolverConfig(GRID, 1.0, snapshot_stride=0)
    with pytest.raises(ValueError):
        sv.EquationParams(math.nan, 1.0)


def test_grid_mismatch():
    u = make_field("gaussian", SpatialGrid(64, 32 * math.pi), width=4.0)
    with pytest.raises(ResolutionError):
        sv.integrate(u, P, sv.SolverConfig(GRID, 0.1))


def test_zero_data_stays_zero():
    z = SpectralField(GRID, np.zeros(GRID.n))
    tr = sv.integrate(z, P, sv.SolverConfig(GRID, 1.0, 0.1, monitors=sv.MonitorSpec(alpha_k=(1.0,))))
    assert all(np.all(s.samples == 0) for s in tr.snapshots)
    assert tr.relative_drift("mass") == 0.0
    assert tr.relative_drift("alpha[k=1,n=0]") == 0.0


def test_step_adjusted_to_reach_final_time():
    u = make_field("gaussian", GRID, amplitude=0.1, width=4.0)
    tr = sv.integrate(u, P, sv.SolverConfig(GRID, 0.35, 0.1))
    assert tr.times[-1] == pytest.approx(0.35)
    assert tr.dt == pytest.approx(0.35 / 4)
    assert len(tr.times) == 5


def test_free_evolution_symbol():
    xi = np.linspace(-3, 3, 7)
    sym = sv.linear_propagator(0.7, P)
    assert np.allclose(sym(xi), np.exp(0.7j * (xi**2 + xi**3)))


def test_plane_wave():
    g = SpatialGrid(64, 16 * math.pi)
    A, xi0 = 0.5, 1.0
    u0 = make_field("planewave", g, amplitude=A, carrier=xi0)
    om = P.planewave_frequency(A, xi0)
    tr = run(u0, t=0.2, dt=0.005)
    err = np.abs(tr.final.samples - u0.samples * np.exp(-1j * om * 0.2)).max()
    assert err < 1e-8


def test_nonlinearity_of_plane_wave():
    g = SpatialGrid(64, 16 * math.pi)
    u = make_field("planewave", g, amplitude=0.5, carrier=1.0)
    F = sv.nonlinearity(u, P)
    exact = 0.25 * (2j * 1.0 + 6 * 1.0 * 1j * 1.0) * u.samples
    assert np.abs(F.samples - exact).max() < 1e-13


def test_padding_is_exact_and_two_thirds_close():
    u = make_field("gaussian", GRID, amplitude=0.3, width=4.0)
    a = run(u, t=0.5, dt=0.01).final
    # the same data on a grid with twice the band: common modes must agree
    fine = SpatialGrid(256, GRID.length)
    uf = make_field("gaussian", fine, amplitude=0.3, width=4.0)
    af = run(uf, t=0.5, dt=0.01).final
    assert np.abs(af.coefficients[64:192] - a.coefficients).max() < 1e-12
    # the two-thirds rule leaves cubic aliasing, small for resolved data
    b = run(u, t=0.5, dt=0.01, dealias="two-thirds").final
    assert np.abs(a.samples - b.samples).max() < 1e-6


def test_fourth_order_in_time():
    u = make_field("gaussian", GRID, amplitude=0.5, width=4.0)
    ref = run(u, dt=0.5 / 256).final.samples
    err = [np.abs(run(u, dt=dt).final.samples - ref).max() for dt in (0.1, 0.05, 0.025)]
    ratios = [err[i] / err[i + 1] for i in range(2)]
    assert all(14 <= r <= 18 for r in ratios)


def test_mass_conserved():
    u = make_field("gaussian", GRID, amplitude=0.3, width=4.0, carrier=0.5)
    tr = sv.integrate(u, P, sv.SolverConfig(GRID, 1.0, 0.0125))
    assert tr.relative_drift("mass") < 1e-10


def test_monitor_names_and_purity():
    u = make_field("gaussian", GRID, amplitude=0.05, width=4.0)
    spec = sv.MonitorSpec(alpha_k=(1.0,), alpha_n=(0, 1), modulation=((0.0, 4.0),), tail_n=(2,))
    before = u.samples.copy()
    vals = sv.evaluate_monitors(u, 0.3, P, spec)
    assert np.array_equal(u.samples, before)
    assert set(vals) == {"mass", "alpha[k=1,n=0]", "alpha[k=1,n=1]", "modulation[s=0,p=4]", "r_n[n=2]"}


def test_blow_up_detected():
    g = SpatialGrid(64, 16 * math.pi)
    u = make_field("gaussian", g, amplitude=30.0, width=3.0)
    with pytest.raises(BlowUpError) as info:
        sv.integrate(u, P, sv.SolverConfig(g, 5.0, 0.5))
    assert info.value.partial.times[0] == 0.0


def test_default_dt():
    u = make_field("gaussian", GRID, amplitude=0.05, width=4.0)
    assert sv.default_dt(u, P) == 0.1
    big = make_field("gaussian", GRID, amplitude=2.0, width=4.0)
    assert sv.default_dt(big, P) < 0.01
    assert sv.default_dt(u, P, t_final=0.01) == 0.01


def test_galilean_boost_two_routes():
    g = SpatialGrid(256, 32 * math.pi)
    u0 = make_field("gaussian", g, amplitude=0.1, width=4.0)
    for n in (-1, 1):
        pn = sv.boosted_params(P, n)
        direct = run(sv.galilean_boost(u0, n, 0.0, P), pn, t=0.5, dt=0.0125).final
        mapped = sv.galilean_boost(run(u0, t=0.5, dt=0.025).final, n, 0.5, P)
        assert np.abs(direct.samples - mapped.samples).max() < 1e-7


def test_reduction_removes_second_order_and_cubic_terms():
    a, b = 1.0, 1.0
    d1, d2, d3 = sv.reduction_params(a, b)
    c = sv.transformed_coefficients(a, b, d1, d2, d3)
    assert c["second_order"] == pytest.approx(0.0, abs=1e-15)
    assert c["phase"] == pytest.approx(0.0, abs=1e-15)
    assert c["transport"] == pytest.approx(0.0, abs=1e-15)
    assert c["cubic"] == pytest.approx(0.0, abs=1e-15)
    assert sv.reduced_params(P) == sv.EquationParams(0.0, 1.0)
    with pytest.raises(ValueError):
        sv.reduction_params(1.0, 0.0)


def test_gauge_two_routes():
    # length 48 pi puts d2 = -1/3 on the grid
    g = SpatialGrid(256, 48 * math.pi)
    d = sv.reduction_params(1.0, 1.0)
    u0 = make_field("gaussian", g, amplitude=0.1, width=4.0)
    v0 = sv.gauge_transform(u0, *d, 0.0)
    assert v0.meta["d2"] == d[1]
    v_direct = run(v0, sv.reduced_params(P), t=0.5, dt=0.0125).final
    v_mapped = sv.gauge_transform(run(u0, t=0.5, dt=0.025).final, *d, 0.5)
    assert np.abs(v_direct.samples - v_mapped.samples).max() < 1e-7
    back = sv.gauge_transform(v0, *d, 0.0, inverse=True)
    assert np.abs(back.samples - u0.samples).max() < 1e-15


def test_scaling_two_routes():
    u0 = make_field("gaussian", GRID, amplitude=0.2, width=4.0)
    lam = 2
    t = 0.2
    direct = run(sv.scaling_transform(u0, lam), sv.scaled_params(P, lam), t=lam**3 * t, dt=0.0125).final
    mapped = sv.scaling_transform(run(u0, t=t, dt=0.0125 / lam**3 * 2).final, lam)
    assert np.abs(direct.samples - mapped.samples).max() < 1e-7
    assert sv.scaling_transform(u0, lam).mass() == pytest.approx(u0.mass() / lam, rel=1e-13)
    with pytest.raises(ValueError):
        sv.scaling_transform(u0, 1.5)
