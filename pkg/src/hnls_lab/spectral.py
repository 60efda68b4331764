"""Periodic grids, the unitary Fourier convention, and test-field generators.

Conventions (used by every other module)::

    x_j  = -L/2 + j L/N,                 j = 0..N-1
    xi_m = 2 pi m / L,                   m = -N/2..N/2-1   (signed order)
    u_hat(xi_m) = (2 pi)^(-1/2) (L/N) sum_j exp(-i x_j xi_m) u(x_j)
    u(x_j)      = (2 pi)^(1/2) / L    sum_m exp(+i x_j xi_m) u_hat(xi_m)

Norm measures: ``dx = L/N`` in physical space and ``dxi = 2 pi / L`` in
frequency, so that ``dx * sum |u|^2 == dxi * sum |u_hat|^2`` (Parseval).

The orthonormal Fourier basis ``e_m = L^(-1/2) exp(i xi_m x)`` gives
coordinates ``sqrt(dxi) * u_hat`` and Fourier-series coefficients
``c(m) = (1/L) int u exp(-i xi_m x) dx = sqrt(2 pi) / L * u_hat(xi_m)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridMismatchError, InvalidFieldError, ResolutionError

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)

#: Normalization constants of the discrete transform pair, asserted by a test.
NORMALIZATION = {
    "forward": "(2 pi)^(-1/2) * dx",
    "inverse": "(2 pi)^(1/2) / L",
    "parseval_x_measure": "dx = L/N",
    "parseval_xi_measure": "dxi = 2 pi / L",
    "single_mode_amplitude": "sqrt(2 pi) / L",
}

#: Localized fields must decay below this (relative) at the box edge and the band edge.
DECAY_TOL = 1e-12
#: Evolved fields carry a round-off floor near 1e-12 of the peak in the top modes,
#: so shifts only refuse to drop real weight.
SHIFT_LOSS_TOL = 1e-9


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid of ``n`` points on ``[-length/2, length/2)``."""

    n: int
    length: float

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError(f"grid size must be even and >= 8, got {self.n}")
        if self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two, got {self.n}")
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ValueError(f"domain length must be positive, got {self.length}")

    @cached_property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def dxi(self) -> float:
        return 2.0 * math.pi / self.length

    @cached_property
    def x(self) -> np.ndarray:
        x = -0.5 * self.length + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def modes(self) -> np.ndarray:
        m = np.arange(-self.n // 2, self.n // 2)
        m.flags.writeable = False
        return m

    @cached_property
    def xi(self) -> np.ndarray:
        xi = self.dxi * self.modes
        xi.flags.writeable = False
        return xi

    @property
    def xi_max(self) -> float:
        """Largest positive resolved frequency (the Nyquist mode is negative)."""
        return self.dxi * (self.n // 2 - 1)

    @cached_property
    def _shift_sign(self) -> np.ndarray:
        # exp(-i x_0 xi_m) = (-1)^m because x_0 = -L/2
        return np.where(self.modes % 2 == 0, 1.0, -1.0)

    def is_grid_frequency(self, xi0: float, tol: float = 1e-9) -> bool:
        q = xi0 / self.dxi
        return abs(q - round(q)) <= tol

    def snap_frequency(self, xi0: float) -> float:
        return self.dxi * round(xi0 / self.dxi)

    def mode_of(self, xi0: float) -> int:
        q = xi0 / self.dxi
        if abs(q - round(q)) > 1e-9:
            raise ResolutionError(f"frequency {xi0} is not a grid frequency (dxi={self.dxi})")
        return int(round(q))

    def with_length(self, length: float) -> "SpatialGrid":
        return SpatialGrid(self.n, length)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex samples on a :class:`SpatialGrid` with lazily cached Fourier coefficients.

    ``meta`` carries generator provenance (kind, parameters, frequency snaps).
    """

    grid: SpatialGrid
    samples: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        if s.shape != (self.grid.n,):
            raise InvalidFieldError(f"expected {self.grid.n} samples, got shape {s.shape}")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_coefficients(cls, coefficients, grid: SpatialGrid, meta=None) -> "SpectralField":
        return dft_inverse(coefficients, grid, meta=meta)

    @cached_property
    def coefficients(self) -> np.ndarray:
        return dft_forward(self)

    @property
    def orthonormal_coefficients(self) -> np.ndarray:
        """Coordinates in the orthonormal basis ``L^(-1/2) exp(i xi_m x)``."""
        return math.sqrt(self.grid.dxi) * self.coefficients

    @property
    def series_coefficients(self) -> np.ndarray:
        """Fourier-series coefficients ``(1/L) int u exp(-i xi_m x) dx``."""
        return (SQRT_2PI / self.grid.length) * self.coefficients

    def mass(self) -> float:
        """``int |u|^2 dx`` on the torus."""
        return float(self.grid.dx * np.sum(np.abs(self.samples) ** 2))

    def band(self, rtol: float = DECAY_TOL) -> int:
        """Largest ``|m|`` whose coefficient exceeds ``rtol * max |u_hat|`` (0 for the zero field)."""
        c = np.abs(self.coefficients)
        peak = c.max()
        if peak == 0.0:
            return 0
        return int(np.abs(self.grid.modes[c > rtol * peak]).max())

    def conj(self) -> "SpectralField":
        return SpectralField(self.grid, np.conj(self.samples))

    def __add__(self, other):
        _same_grid(self, other)
        return SpectralField(self.grid, self.samples + other.samples)

    def __sub__(self, other):
        _same_grid(self, other)
        return SpectralField(self.grid, self.samples - other.samples)

    def __mul__(self, other):
        if isinstance(other, SpectralField):
            _same_grid(self, other)
            return SpectralField(self.grid, self.samples * other.samples)
        return SpectralField(self.grid, self.samples * other)

    __rmul__ = __mul__


def _same_grid(a: SpectralField, b: SpectralField) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")


def dft_forward(u: SpectralField) -> np.ndarray:
    """Fourier coefficients of ``u`` in signed order under the unitary convention.

    Raises
    ------
    InvalidFieldError
        If any sample is NaN or infinite.
    """
    s = u.samples
    if not np.all(np.isfinite(s)):
        raise InvalidFieldError("field samples are not finite")
    g = u.grid
    c = np.fft.fftshift(np.fft.fft(s)) * g._shift_sign * (g.dx / SQRT_2PI)
    c.flags.writeable = False
    return c


def dft_inverse(coefficients, grid: SpatialGrid, meta=None) -> SpectralField:
    """Inverse of :func:`dft_forward`; ``coefficients`` are in signed order."""
    c = np.asarray(coefficients, dtype=complex)
    if c.shape != (grid.n,):
        raise InvalidFieldError(f"expected {grid.n} coefficients, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise InvalidFieldError("coefficients are not finite")
    s = np.fft.ifft(np.fft.ifftshift(c * grid._shift_sign)) * (grid.n * SQRT_2PI / grid.length)
    out = SpectralField(grid, s, meta=dict(meta or {}))
    cc = c.copy()
    cc.flags.writeable = False
    out.__dict__["coefficients"] = cc
    return out


def spectral_derivative(u: SpectralField, order: int = 1) -> SpectralField:
    """``d^order u / dx^order`` by multiplication with ``(i xi)^order``.

    The Nyquist mode is zeroed for odd orders so real fields keep real derivatives.
    """
    if order < 0 or int(order) != order:
        raise ValueError(f"order must be a non-negative integer, got {order}")
    g = u.grid
    sym = (1j * g.xi) ** order
    if order % 2:
        sym = sym.copy()
        sym[0] = 0.0
    return dft_inverse(u.coefficients * sym, g)


def modulate(u: SpectralField, xi0: float) -> SpectralField:
    """``exp(i xi0 x) u`` as an exact shift of coefficients; ``xi0`` must be a grid frequency.

    Modes shifted past the band edge must carry negligible weight.
    """
    g = u.grid
    shift = g.mode_of(xi0)
    c = u.coefficients
    if shift == 0:
        return dft_inverse(c, g)
    out = np.zeros_like(c)
    if shift > 0:
        out[shift:] = c[:-shift]
        lost = c[-shift:]
    else:
        out[:shift] = c[-shift:]
        lost = c[:-shift]
    peak = np.abs(c).max()
    if peak > 0 and np.abs(lost).max() > SHIFT_LOSS_TOL * peak:
        raise ResolutionError(f"modulation by {xi0} pushes spectrum past the grid band")
    return dft_inverse(out, g)


def translate(u: SpectralField, shift: float) -> SpectralField:
    """``u(x - shift)`` via the exact Fourier phase ``exp(-i xi shift)``."""
    g = u.grid
    shift = math.remainder(shift, g.length)
    return dft_inverse(u.coefficients * np.exp(-1j * g.xi * shift), g)


def _check_localized(grid: SpatialGrid, samples: np.ndarray, kind: str) -> None:
    peak = np.abs(samples).max()
    if peak == 0:
        return
    edge = max(abs(samples[0]), abs(samples[-1]))
    if edge > DECAY_TOL * peak:
        raise ResolutionError(
            f"{kind} does not decay at the box edge ({edge / peak:.2e} of peak); enlarge L or narrow it"
        )
    f = SpectralField(grid, samples)
    c = np.abs(f.coefficients)
    tail = max(c[0], c[1], c[-1])
    if tail > DECAY_TOL * c.max():
        raise ResolutionError(
            f"{kind} is not resolved: spectrum at the band edge is {tail / c.max():.2e} of peak"
        )


def make_field(kind: str, grid: SpatialGrid, **params) -> SpectralField:
    """Generate a test field.

    Parameters
    ----------
    kind : {"gaussian", "sech", "planewave", "random_bandlimited"}
    grid : SpatialGrid
    **params
        ``gaussian``: amplitude=1, width=1, center=0, carrier=0.
        ``sech``: amplitude=1, width=1, center=0, carrier=0.
        ``planewave``: amplitude=1, carrier=0.
        ``random_bandlimited``: band=(lo, hi) in frequency units, seed=0, amplitude=1
        (peak modulus), envelope=None (optional Gaussian width in x, making the
        field localized).

    Carriers are snapped to the nearest grid frequency; the snap is recorded in
    ``meta`` and logged.
    """
    x = grid.x
    meta = {"kind": kind, **{k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()}}

    def carrier_phase(xi0):
        snapped = grid.snap_frequency(xi0)
        if snapped != xi0:
            logger.info("carrier %.6g snapped to grid frequency %.6g", xi0, snapped)
            meta["requested_carrier"] = xi0
        meta["carrier"] = snapped
        return np.exp(1j * snapped * x)

    if kind == "gaussian":
        A = params.get("amplitude", 1.0)
        w = params.get("width", 1.0)
        x0 = params.get("center", 0.0)
        if w <= 0:
            raise ValueError("width must be positive")
        s = A * np.exp(-((x - x0) ** 2) / (2 * w * w)) * carrier_phase(params.get("carrier", 0.0))
        _check_localized(grid, s, kind)
    elif kind == "sech":
        A = params.get("amplitude", 1.0)
        w = params.get("width", 1.0)
        x0 = params.get("center", 0.0)
        if w <= 0:
            raise ValueError("width must be positive")
        s = A / np.cosh((x - x0) / w) * carrier_phase(params.get("carrier", 0.0))
        _check_localized(grid, s, kind)
    elif kind == "planewave":
        A = params.get("amplitude", 1.0)
        xi0 = params.get("carrier", 0.0)
        if abs(grid.snap_frequency(xi0)) > grid.xi_max:
            raise ResolutionError(f"carrier {xi0} exceeds the grid band {grid.xi_max}")
        s = A * carrier_phase(xi0)
    elif kind == "random_bandlimited":
        lo, hi = params.get("band", (-1.0, 1.0))
        if lo > hi:
            raise ValueError("band must satisfy lo <= hi")
        if max(abs(lo), abs(hi)) > grid.xi_max:
            raise ResolutionError(f"band {lo, hi} exceeds the grid band {grid.xi_max}")
        rng = np.random.default_rng(params.get("seed", 0))
        sel = (grid.xi >= lo - 1e-12) & (grid.xi <= hi + 1e-12)
        c = np.zeros(grid.n, dtype=complex)
        k = int(sel.sum())
        c[sel] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        s = SpectralField.from_coefficients(c, grid).samples
        env = params.get("envelope")
        if env is not None:
            s = s * np.exp(-(x**2) / (2 * env * env))
            _check_localized(grid, s, kind)
        peak = np.abs(s).max()
        if peak > 0:
            s = s * (params.get("amplitude", 1.0) / peak)
    else:
        raise ValueError(f"unknown field kind {kind!r}")
    return SpectralField(grid, s, meta=meta)
