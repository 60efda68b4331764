"""Modulation, Sobolev, Fourier-Lebesgue and Bourgain-type norms on the periodic grid.

The bracket is ``<x> = 1 + |x|``. Unit frequency cubes for the sharp window are
``I_n = [n - 1/2, n + 1/2)``; the smooth window is a C-infinity bump supported
in ``[-1, 1]`` whose integer translates sum to one. All ``L^2`` masses use the
measures ``dx = L/N`` and ``dxi = 2 pi / L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import zeta

from .errors import InvalidFieldError, ResolutionError
from .spectral import SpatialGrid, SpectralField, dft_inverse

WINDOWS = ("sharp", "smooth")


def bracket(x):
    return 1.0 + np.abs(x)


@dataclass(frozen=True)
class ModulationParams:
    s: float = 0.0
    p: float = 2.0
    window: str = "sharp"

    def __post_init__(self):
        if self.s < 0:
            raise ValueError(f"regularity s must be >= 0, got {self.s}")
        if not (2.0 <= self.p < math.inf):
            raise ValueError(f"summability p must satisfy 2 <= p < inf, got {self.p}")
        if self.window not in WINDOWS:
            raise ValueError(f"window must be one of {WINDOWS}, got {self.window!r}")


def _smooth_step(t):
    # exp(-1/t) / (exp(-1/t) + exp(-1/(1-t))) on [0, 1], clamped outside
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def window_symbol(xi, n: int, window: str = "sharp"):
    """``psi(xi - n)`` for the chosen window."""
    d = np.asarray(xi, dtype=float) - n
    if window == "sharp":
        return ((d >= -0.5) & (d < 0.5)).astype(float)
    if window == "smooth":
        return _smooth_step(1.0 - np.abs(d))
    raise ValueError(f"unknown window {window!r}")


def cube_of(xi):
    """Index ``n`` of the sharp cube ``I_n`` containing ``xi``."""
    return np.floor(np.asarray(xi) + 0.5).astype(int)


def resolved_cubes(grid: SpatialGrid) -> np.ndarray:
    """Cube indices whose sharp cube lies entirely inside the grid band."""
    nmax = int(math.floor(grid.xi_max - 0.5 + 1e-12))
    return np.arange(-nmax, nmax + 1)


def pi_n(u: SpectralField, n: int, window: str = "sharp") -> SpectralField:
    """Frequency-uniform projection: multiply the spectrum by ``psi(xi - n)``."""
    g = u.grid
    if abs(n) > g.xi_max - 1 + 1e-12:
        raise ResolutionError(f"cube {n} is outside the resolved band (xi_max={g.xi_max:.4g})")
    return dft_inverse(u.coefficients * window_symbol(g.xi, n, window), g)


def cube_masses(u: SpectralField, window: str = "sharp"):
    """Return ``(n, ||Pi_n u||_{L^2}^2)`` for every cube touched by the grid frequencies."""
    g = u.grid
    dens = g.dxi * np.abs(u.coefficients) ** 2
    if window == "sharp":
        idx = cube_of(g.xi)
        base = idx.min()
        masses = np.bincount(idx - base, weights=dens)
        return np.arange(base, base + masses.size), masses
    if window == "smooth":
        lo = int(np.floor(g.xi.min())) - 1
        hi = int(np.ceil(g.xi.max())) + 1
        ns = np.arange(lo, hi + 1)
        fl = np.floor(g.xi).astype(int)
        masses = np.zeros(ns.size)
        for off in (0, 1):
            n = fl + off
            w = _smooth_step(1.0 - np.abs(g.xi - n))
            np.add.at(masses, n - lo, (w**2) * dens)
        return ns, masses
    raise ValueError(f"unknown window {window!r}")


def _lp(values, p):
    values = np.asarray(values, dtype=float)
    if math.isinf(p):
        return float(values.max(initial=0.0))
    return float(np.sum(values**p) ** (1.0 / p))


def modulation_norm(u: SpectralField, s: float = 0.0, p: float = 2.0, window: str = "sharp") -> float:
    """``|| <n>^s ||Pi_n u||_{L^2} ||_{l^p_n}`` computed from coefficients per cube.

    ``s``, ``p`` and ``window`` may also be passed as a :class:`ModulationParams`
    in place of ``s``.
    """
    if isinstance(s, ModulationParams):
        s, p, window = s.s, s.p, s.window
    ns, masses = cube_masses(u, window)
    return _lp(bracket(ns) ** s * np.sqrt(masses), p)


def sobolev_norm(u: SpectralField, s: float = 0.0) -> float:
    g = u.grid
    return float(math.sqrt(g.dxi * np.sum(bracket(g.xi) ** (2 * s) * np.abs(u.coefficients) ** 2)))


def fourier_lebesgue_norm(u: SpectralField, s: float = 0.0, p: float = 2.0) -> float:
    """``(dxi * sum |<xi>^s u_hat|^p)^(1/p)``; for ``p = 2`` this is the ``H^s`` norm."""
    g = u.grid
    a = bracket(g.xi) ** s * np.abs(u.coefficients)
    if math.isinf(p):
        return float(a.max())
    return float((g.dxi * np.sum(a**p)) ** (1.0 / p))


def lp_norm(u: SpectralField, p: float = 2.0) -> float:
    """Spatial ``L^p`` norm with the grid measure ``dx``."""
    a = np.abs(u.samples)
    if math.isinf(p):
        return float(a.max())
    return float((u.grid.dx * np.sum(a**p)) ** (1.0 / p))


def littlewood_paley(u: SpectralField, N: float) -> SpectralField:
    """Restrict the spectrum to the dyadic annulus ``N/2 <= |xi| < N``."""
    g = u.grid
    if N <= 0 or abs(math.log2(N) - round(math.log2(N))) > 1e-12:
        raise ValueError(f"N must be a dyadic number 2^j, got {N}")
    if N / 2 > g.xi_max:
        raise ResolutionError(f"annulus N={N} is above the grid band {g.xi_max:.4g}")
    a = np.abs(g.xi)
    return dft_inverse(u.coefficients * ((a >= N / 2) & (a < N)), g)


def bernstein_check(u: SpectralField, p: float, q: float, N: float) -> dict:
    """Ratios appearing in Bernstein's inequalities for ``P_N`` and the cube projections.

    Returns ``lp_ratio = ||P_N u||_p / (N^(1/q - 1/p) ||u||_q)`` and
    ``cube_ratio = max_n ||Pi_n u||_p / ||u||_q``.
    """
    if not q <= p:
        raise ValueError("Bernstein's inequality needs q <= p")
    uq = lp_norm(u, q)
    if uq == 0:
        return {"N": N, "p": p, "q": q, "lp_ratio": 0.0, "cube_ratio": 0.0}
    scale = N ** (1.0 / q - (0.0 if math.isinf(p) else 1.0 / p))
    lp_ratio = lp_norm(littlewood_paley(u, N), p) / (scale * uq)
    cubes = [n for n in resolved_cubes(u.grid) if abs(n) <= u.grid.xi_max - 1]
    cube_ratio = max(lp_norm(pi_n(u, int(n)), p) for n in cubes) / uq
    return {"N": N, "p": p, "q": q, "lp_ratio": lp_ratio, "cube_ratio": cube_ratio}


def tail_integral_r_n(u: SpectralField, n: float) -> float:
    """``r_n = int <xi - n>^(-1) |u_hat(xi)|^2 dxi``."""
    g = u.grid
    return float(g.dxi * np.sum(np.abs(u.coefficients) ** 2 / bracket(g.xi - n)))


def tail_integral_constant(p: float) -> float:
    """``C`` with ``r_n <= C ||u||^2_{M^{2,p}}`` for every ``n``: the ``l^q`` norm,
    ``q = p/(p-2)``, of ``v(i) = 1 / (1 + max(|i| - 1/2, 0))`` (the largest
    value of ``<xi - n>^(-1)`` on the cube ``I_{n+i}``)."""
    if p < 2:
        raise ValueError("p must be >= 2")
    if p == 2:
        return 1.0
    q = p / (p - 2.0)
    # v(0) = 1, v(+-i) = (i + 1/2)^(-1) for i >= 1
    return float((1.0 + 2.0 * zeta(q, 1.5)) ** (1.0 / q))


def cube_weighted_sum(u: SpectralField, n: int) -> float:
    """``sum_j <j - n>^(-1) ||u_hat||^2_{L^2(I_j)}`` (the interval decomposition of ``r_n``)."""
    js, masses = cube_masses(u, "sharp")
    return float(np.sum(masses / bracket(js - n)))


def hoelder_constant(p: float) -> float:
    """``|| <j>^(-1) ||_{l^q}`` with ``2/p + 1/q = 1``: the exact Hoelder constant for
    ``sum_j <j-n>^(-1) a_j <= C(p) ||a||_{l^(p/2)}``."""
    if p < 2:
        raise ValueError("p must be >= 2")
    if p == 2:
        return 1.0
    q = p / (p - 2.0)
    # sum_{j in Z} (1+|j|)^-q = 1 + 2 (zeta(q) - 1)
    return float(2.0 * zeta(q) - 1.0) ** (1.0 / q)


# ---------------------------------------------------------------------------
# space-time fields and X^{s,b}_p


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Samples ``u(x_j, t_i)`` on a periodic space grid times a periodic time grid.

    ``samples`` has shape ``(m, grid.n)``; time nodes are ``t_i = i * t_length / m``.
    """

    grid: SpatialGrid
    t_length: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        m = s.shape[0] if s.ndim == 2 else 0
        if s.ndim != 2 or s.shape[1] != self.grid.n:
            raise InvalidFieldError(f"expected shape (m, {self.grid.n}), got {s.shape}")
        if m < 2 or m & (m - 1):
            raise InvalidFieldError(f"time grid size must be a power of two, got {m}")
        if not self.t_length > 0:
            raise ValueError("t_length must be positive")
        if not np.all(np.isfinite(s)):
            raise InvalidFieldError("space-time samples are not finite")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def m(self) -> int:
        return self.samples.shape[0]

    @property
    def dt(self) -> float:
        return self.t_length / self.m

    @property
    def dtau(self) -> float:
        return 2.0 * math.pi / self.t_length

    @property
    def tau(self) -> np.ndarray:
        return self.dtau * np.arange(-self.m // 2, self.m // 2)

    @cached_property
    def coefficients(self) -> np.ndarray:
        """``U_hat(tau, xi)`` with the ``(2 pi)^(-1/2)`` convention in both variables.

        Time runs over ``[0, t_length)`` (no offset); rows are signed ``tau`` order.
        """
        g = self.grid
        spatial = np.fft.fftshift(np.fft.fft(self.samples, axis=1), axes=1) * g._shift_sign
        st = np.fft.fftshift(np.fft.fft(spatial, axis=0), axes=0)
        return st * (g.dx * self.dt / (2.0 * math.pi))

    def restrict(self, symbol) -> "SpaceTimeField":
        """Apply a spatial Fourier multiplier (array over ``grid.xi``) at every time."""
        g = self.grid
        rows = [dft_inverse(SpectralField(g, r).coefficients * symbol, g).samples for r in self.samples]
        return SpaceTimeField(g, self.t_length, np.array(rows))


def cubic_phase(xi):
    return xi**3


def xsb_norm(U: SpaceTimeField, s: float, b: float, p: float, phase=cubic_phase) -> float:
    """Discrete ``( sum_n <n>^(sp) || <tau - phase(xi)>^b U_hat ||^p_{L^2(tau, xi in [n, n+1))} )^(1/p)``."""
    g = U.grid
    w = bracket(U.tau[:, None] - phase(g.xi)[None, :]) ** b
    dens = (w * np.abs(U.coefficients)) ** 2 * (g.dxi * U.dtau)
    col = dens.sum(axis=0)
    idx = np.floor(g.xi + 1e-12).astype(int)
    base = idx.min()
    masses = np.bincount(idx - base, weights=col)
    ns = np.arange(base, base + masses.size)
    return _lp(bracket(ns) ** s * np.sqrt(masses), p)


def xsb_norm_l2(U: SpaceTimeField, s: float, b: float, phase=cubic_phase) -> float:
    """The unsplit ``L^2_{xi,tau}`` sum with weight ``<floor(xi)>^s <tau - phase>^b``."""
    g = U.grid
    n = np.floor(g.xi + 1e-12)
    w = bracket(n)[None, :] ** s * bracket(U.tau[:, None] - phase(g.xi)[None, :]) ** b
    return float(math.sqrt(np.sum((w * np.abs(U.coefficients)) ** 2) * g.dxi * U.dtau))


def free_space_time(u: SpectralField, t_length: float, m: int, phase=cubic_phase, cutoff: bool = True) -> SpaceTimeField:
    """``eta(t) * exp(i t phase(xi)) u_hat`` sampled on ``[0, t_length)``.

    With ``cutoff`` the smooth bump ``eta`` (supported inside the box) makes the
    time signal periodic, mimicking a localized-in-time extension.
    """
    g = u.grid
    t = t_length * np.arange(m) / m
    ph = np.exp(1j * t[:, None] * phase(g.xi)[None, :])
    coeffs = ph * u.coefficients[None, :]
    rows = np.array([dft_inverse(c, g).samples for c in coeffs])
    if cutoff:
        tt = t / t_length
        eta = _smooth_step(4.0 * tt) * _smooth_step(4.0 * (1.0 - tt))
        rows = rows * eta[:, None]
    return SpaceTimeField(g, t_length, rows)


def dyadic_xsb_ratio(U: SpaceTimeField, N: float, s: float, b: float, p: float, q: float, phase=cubic_phase) -> dict:
    """``||P_N U||_{X_q} / (N^(1/q - 1/p) ||P_N U||_{X_p})`` for ``q <= p``.

    The annulus ``N/2 <= |xi| < N`` meets at most ``N + 2`` unit cubes, so by
    Hoelder the ratio is at most ``((N + 2) / N)^(1/q - 1/p)`` (returned as ``bound``).
    """
    if not q <= p:
        raise ValueError("need q <= p")
    g = U.grid
    if N / 2 > g.xi_max:
        raise ResolutionError(f"annulus N={N} is above the grid band {g.xi_max:.4g}")
    a = np.abs(g.xi)
    PU = U.restrict(((a >= N / 2) & (a < N)).astype(float))
    e = 1.0 / q - 1.0 / p
    top = xsb_norm(PU, s, b, q, phase)
    bottom = xsb_norm(PU, s, b, p, phase)
    ratio = top / (N**e * bottom) if bottom else 0.0
    return {"N": N, "ratio": ratio, "bound": ((N + 2.0) / N) ** e}
