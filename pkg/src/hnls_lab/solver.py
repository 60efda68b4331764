"""Pseudo-spectral integrator for

    u_t + i a u_xx + b u_xxx = 2 i a |u|^2 u + 6 b |u|^2 u_x

on a periodic grid, with the Galilean boost, gauge and scaling transforms.

In Fourier space ``u_hat_t = i (a xi^2 + b xi^3) u_hat + F_hat``, so the linear
part is integrated exactly by ``exp(i (a xi^2 + b xi^3) t)`` and the nonlinear
part by classical RK4 in the interaction picture (integrating-factor RK4).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, ResolutionError
from .operators import MultiplierSymbol
from .spectral import SQRT_2PI, SpatialGrid, SpectralField, dft_inverse, modulate, translate

logger = logging.getLogger(__name__)

#: Integration aborts when ``max |u|`` exceeds this.
BLOWUP_THRESHOLD = 1e6


@dataclass(frozen=True)
class EquationParams:
    """Coefficients ``(a, b)``; the cubic terms are fixed to ``2ia|u|^2 u + 6b|u|^2 u_x``."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("a and b must be finite")
        if self.b == 0:
            raise ValueError("b must be nonzero")

    def dispersion(self, xi) -> np.ndarray:
        """``phi(xi) = a xi^2 + b xi^3``."""
        xi = np.asarray(xi, dtype=float)
        return self.a * xi**2 + self.b * xi**3

    def planewave_frequency(self, amplitude: float, carrier: float) -> float:
        """``omega`` such that ``A exp(i (xi0 x - omega t))`` is an exact solution."""
        A2 = abs(amplitude) ** 2
        return -self.a * carrier**2 - self.b * carrier**3 - 2 * self.a * A2 - 6 * self.b * A2 * carrier


@dataclass(frozen=True)
class MonitorSpec:
    """Quantities evaluated on every snapshot.

    ``alpha_k``: values of k for alpha; ``alpha_n``: boosts at which alpha is
    monitored (``alpha(u_n(t), k)``); ``modulation``: ``(s, p)`` pairs;
    ``tail_n``: values of n for ``r_n``.
    """

    mass: bool = True
    alpha_k: tuple = ()
    alpha_n: tuple = (0,)
    alpha_half_width: int | None = None
    modulation: tuple = ()
    tail_n: tuple = ()


@dataclass(frozen=True)
class SolverConfig:
    grid: SpatialGrid
    t_final: float
    dt: float | None = None
    dealias: str = "pad"
    monitors: MonitorSpec = field(default_factory=MonitorSpec)
    snapshot_stride: int = 1

    def __post_init__(self):
        if self.dealias not in ("pad", "two-thirds"):
            raise ValueError("dealias must be 'pad' or 'two-thirds'")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_final < 0:
            raise ValueError("t_final must be non-negative")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")


@dataclass
class TrajectoryTrace:
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    monitors: dict = field(default_factory=dict)
    dt: float = 0.0
    params: EquationParams | None = None

    @property
    def final(self) -> SpectralField:
        return self.snapshots[-1]

    def series(self, name: str) -> np.ndarray:
        return np.asarray(self.monitors[name])

    def relative_drift(self, name: str) -> float:
        v = self.series(name)
        ref = abs(v[0])
        dev = np.abs(v - v[0]).max()
        return float(dev / ref) if ref > 0 else float(dev)


# ---------------------------------------------------------------------------
# linear and nonlinear parts


def linear_propagator(t: float, params: EquationParams, grid: SpatialGrid | None = None) -> MultiplierSymbol:
    """Symbol ``exp(i (a xi^2 + b xi^3) t)`` of the free evolution over time ``t``.

    ``grid`` is accepted for symmetry with the other constructors and unused.
    """
    return MultiplierSymbol(lambda xi: np.exp(1j * t * params.dispersion(xi)), tag=f"free({t})")


def _samples(c: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    return np.fft.ifft(np.fft.ifftshift(c * grid._shift_sign)) * (grid.n * SQRT_2PI / grid.length)


def _coeffs(s: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    return np.fft.fftshift(np.fft.fft(s)) * grid._shift_sign * (grid.dx / SQRT_2PI)


class _Nonlinearity:
    """Dealiased ``F_hat(u_hat)`` for a fixed grid and parameters."""

    def __init__(self, grid: SpatialGrid, params: EquationParams, dealias: str = "pad"):
        self.grid = grid
        self.params = params
        self.dealias = dealias
        n = grid.n
        self.dxi_i = 1j * grid.xi
        self.dxi_i[0] = 0.0  # Nyquist
        if dealias == "pad":
            self.big = SpatialGrid(2 * n, grid.length)
            self.lo = n // 2
        else:
            self.mask = np.abs(grid.modes) <= n // 3
            self.dxi_i = self.dxi_i * self.mask

    def __call__(self, c: np.ndarray) -> np.ndarray:
        a, b = self.params.a, self.params.b
        n = self.grid.n
        cx = self.dxi_i * c
        if self.dealias == "pad":
            g = self.big
            pc = np.zeros(2 * n, dtype=complex)
            pcx = np.zeros(2 * n, dtype=complex)
            pc[self.lo : self.lo + n] = c
            pcx[self.lo : self.lo + n] = cx
            u = _samples(pc, g)
            ux = _samples(pcx, g)
            f = (np.abs(u) ** 2) * (2j * a * u + 6 * b * ux)
            return _coeffs(f, g)[self.lo : self.lo + n]
        c = c * self.mask
        u = _samples(c, self.grid)
        ux = _samples(cx, self.grid)
        f = (np.abs(u) ** 2) * (2j * a * u + 6 * b * ux)
        return _coeffs(f, self.grid) * self.mask


def nonlinearity(u: SpectralField, params: EquationParams, dealias: str = "pad") -> SpectralField:
    """``F(u) = 2ia|u|^2 u + 6b|u|^2 u_x``.

    ``dealias="pad"`` evaluates the cubic products on a twice finer grid, which
    is exact for band-limited input (products of three modes below N/2 reach at
    most 3N/2, which folds back outside the retained band). ``"two-thirds"``
    truncates input and output to ``|m| <= N/3``; this removes the aliasing
    of quadratic products only and leaves a small cubic aliasing error.
    """
    c = _Nonlinearity(u.grid, params, dealias)(u.coefficients)
    return dft_inverse(c, u.grid)


def default_dt(u0: SpectralField, params: EquationParams, t_final: float = 1.0) -> float:
    """Step with nonlinear phase per step at most 0.05 (capped at 0.1 and ``t_final``)."""
    umax2 = float(np.abs(u0.samples).max() ** 2)
    rate = umax2 * max(2 * abs(params.a), 6 * abs(params.b) * u0.grid.xi_max)
    dt = 0.05 / rate if rate > 0 else 0.1
    dt = min(dt, 0.1)
    if t_final > 0:
        dt = min(dt, t_final)
    return dt


# ---------------------------------------------------------------------------
# monitors


def _monitor_names(spec: MonitorSpec) -> list:
    names = []
    if spec.mass:
        names.append("mass")
    for k in spec.alpha_k:
        for n in spec.alpha_n:
            names.append(f"alpha[k={k:g},n={n}]")
    for s, p in spec.modulation:
        names.append(f"modulation[s={s:g},p={p:g}]")
    for n in spec.tail_n:
        names.append(f"r_n[n={n}]")
    return names


def evaluate_monitors(u: SpectralField, t: float, params: EquationParams, spec: MonitorSpec) -> dict:
    """Monitor values for the snapshot ``u`` at time ``t``. Does not modify ``u``."""
    from .determinant import alpha_logdet
    from .norms import modulation_norm, tail_integral_r_n

    out = {}
    if spec.mass:
        out["mass"] = u.mass()
    if spec.alpha_k:
        boosted = {n: (u if n == 0 else galilean_boost(u, n, t, params)) for n in spec.alpha_n}
        for k in spec.alpha_k:
            for n in spec.alpha_n:
                out[f"alpha[k={k:g},n={n}]"] = alpha_logdet(boosted[n], k, spec.alpha_half_width).value
    for s, p in spec.modulation:
        out[f"modulation[s={s:g},p={p:g}]"] = modulation_norm(u, s, p)
    for n in spec.tail_n:
        out[f"r_n[n={n}]"] = tail_integral_r_n(u, n)
    return out


# ---------------------------------------------------------------------------
# time stepping


def integrate(u0: SpectralField, params: EquationParams, config: SolverConfig) -> TrajectoryTrace:
    """Integrating-factor RK4 from ``t = 0`` to ``config.t_final``.

    The step is ``config.dt`` (or :func:`default_dt`), reduced so that an
    integer number of steps reaches ``t_final``. Snapshots are kept every
    ``snapshot_stride`` steps and at the final time; monitors are evaluated on
    every snapshot.

    Raises
    ------
    BlowUpError
        If the field stops being finite or ``max |u|`` exceeds ``1e6``; the
        trajectory so far is attached as ``partial``.
    """
    grid = config.grid
    if u0.grid != grid:
        raise ResolutionError("initial data must live on the configured grid")
    T = float(config.t_final)
    dt = config.dt if config.dt is not None else default_dt(u0, params, T)
    steps = max(1, math.ceil(T / dt - 1e-9)) if T > 0 else 0
    dt = T / steps if steps else dt

    F = _Nonlinearity(grid, params, config.dealias)
    phase = params.dispersion(grid.xi)
    E = np.exp(1j * phase * dt)
    Eh = np.exp(1j * phase * dt / 2)

    trace = TrajectoryTrace(dt=dt, params=params)
    for name in _monitor_names(config.monitors):
        trace.monitors[name] = []

    def record(c, t):
        f = dft_inverse(c, grid)
        trace.times.append(t)
        trace.snapshots.append(f)
        for name, v in evaluate_monitors(f, t, params, config.monitors).items():
            trace.monitors[name].append(v)

    c = np.array(u0.coefficients, dtype=complex)
    record(c, 0.0)
    for step in range(1, steps + 1):
        ka = F(c)
        kb = F(Eh * (c + 0.5 * dt * ka))
        kc = F(Eh * c + 0.5 * dt * kb)
        kd = F(E * c + dt * Eh * kc)
        c = E * c + (dt / 6.0) * (E * ka + 2.0 * Eh * (kb + kc) + kd)
        t = step * dt
        if not np.all(np.isfinite(c)) or np.abs(_samples(c, grid)).max() > BLOWUP_THRESHOLD:
            raise BlowUpError(f"field exceeded {BLOWUP_THRESHOLD:g} at t = {t:.6g}", partial=trace)
        if step % config.snapshot_stride == 0 or step == steps:
            record(c, t)
    return trace


# ---------------------------------------------------------------------------
# symmetries


def galilean_boost(u: SpectralField, n: int, t: float, params: EquationParams) -> SpectralField:
    """``exp(-i n x) exp(i (a n^2 + 2 b n^3) t) u(x - (2an + 3bn^2) t)``.

    If ``u`` solves the equation with ``(a, b)``, the result solves it with
    ``(a + 3bn, b)`` (see :func:`boosted_params`). ``n`` must be a grid frequency.
    """
    a, b = params.a, params.b
    shifted = translate(u, (2 * a * n + 3 * b * n * n) * t)
    out = modulate(shifted, -float(n))
    return out * np.exp(1j * (a * n * n + 2 * b * n**3) * t)


def boosted_params(params: EquationParams, n: int) -> EquationParams:
    return EquationParams(params.a + 3 * params.b * n, params.b)


def reduction_params(a: float, b: float) -> tuple:
    """``(d1, d2, d3) = (-a^2/(3b), -a/(3b), 2a^3/(27 b^2))``: the gauge that removes ``u_xx``."""
    if b == 0:
        raise ValueError("b must be nonzero")
    return (-(a * a) / (3 * b), -a / (3 * b), 2 * a**3 / (27 * b * b))


def transformed_coefficients(a: float, b: float, d1: float, d2: float, d3: float, c1: float = None, c2: float = None) -> dict:
    """Coefficients of the equation for ``v`` when ``u(x, t) = v(x + d1 t, t) exp(i (d2 x + d3 t))``
    and ``u_t + i a u_xx + b u_xxx = -i c1 |u|^2 u - c2 |u|^2 u_x``.

    The slaved case is ``c1 = -2a, c2 = -6b`` (the defaults). ``v`` then satisfies

        v_t + i A v_xx + b v_xxx + i P v + Q v_x = -i C |v|^2 v - c2 |v|^2 v_x

    with the returned ``A, P, Q, C``.
    """
    c1 = -2 * a if c1 is None else c1
    c2 = -6 * b if c2 is None else c2
    return {
        "second_order": a + 3 * b * d2,
        "phase": d3 - a * d2 * d2 - b * d2**3,
        "transport": d1 - 2 * a * d2 - 3 * b * d2 * d2,
        "cubic": c1 + c2 * d2,
        "cubic_derivative": c2,
        "third_order": b,
    }


def reduced_params(params: EquationParams) -> EquationParams:
    """The equation reached by :func:`reduction_params`: the same family with ``a = 0``."""
    return EquationParams(0.0, params.b)


def gauge_transform(u: SpectralField, d1: float, d2: float, d3: float, t: float, inverse: bool = False) -> SpectralField:
    """Map ``u`` to ``v`` with ``u(x, t) = v(x + d1 t, t) exp(i (d2 x + d3 t))``.

    ``inverse=True`` maps ``v`` back to ``u``. ``d2`` is snapped to the nearest
    grid frequency (logged and stored in ``meta``).
    """
    g = u.grid
    d2s = g.snap_frequency(d2)
    if d2s != d2:
        logger.info("gauge frequency %.6g snapped to %.6g", d2, d2s)
    if not inverse:
        w = modulate(translate(u, d1 * t), -d2s)
        out = w * np.exp(1j * (d2s * d1 - d3) * t)
    else:
        w = modulate(translate(u, -d1 * t), d2s)
        out = w * np.exp(1j * d3 * t)
    return SpectralField(g, out.samples, meta={"d1": d1, "d2": d2s, "requested_d2": d2, "d3": d3, "t": t})


def scaling_transform(u: SpectralField, lam: int) -> SpectralField:
    """``u_lam(x) = lam^-1 u(x / lam)`` on the grid of length ``lam * L``.

    The same samples sit on the stretched grid, so the map is exact; ``L^2``
    norms scale by ``lam^(-1/2)``. If ``u`` solves the equation with ``(a, b)``
    then ``u_lam(x, lam^3 t)`` solves it with ``(a / lam, b)``.
    """
    if int(lam) != lam or lam < 1:
        raise ValueError("lam must be a positive integer")
    g = u.grid.with_length(lam * u.grid.length)
    return SpectralField(g, u.samples / lam, meta={"scaled_by": lam})


def scaled_params(params: EquationParams, lam: float) -> EquationParams:
    return EquationParams(params.a / lam, params.b)
