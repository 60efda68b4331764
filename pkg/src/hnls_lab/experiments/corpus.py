"""Random test instances: band-limited fields and closed-form multiplier symbols."""

from __future__ import annotations

import numpy as np

from ..operators import MultiplierSymbol
from ..spectral import SpatialGrid, SpectralField, make_field


def random_field(grid: SpatialGrid, rng: np.random.Generator, band_modes: int, amplitude: float = 0.5) -> SpectralField:
    """Random field with spectrum inside ``|m| <= band_modes`` (a random sub-band, random peak)."""
    lo, hi = sorted(rng.integers(-band_modes, band_modes + 1, size=2))
    if lo == hi:
        hi = min(hi + 1, band_modes)
        lo = hi - 1
    amp = amplitude * rng.uniform(0.5, 1.0)
    return make_field(
        "random_bandlimited",
        grid,
        band=(lo * grid.dxi, hi * grid.dxi),
        seed=int(rng.integers(2**31)),
        amplitude=amp,
    )


def random_symbol(rng: np.random.Generator) -> MultiplierSymbol:
    """A bounded closed-form symbol from a few families (resolvents, half powers, Gaussians, Riesz-like)."""
    kind = int(rng.integers(5))
    k = float(rng.uniform(0.5, 2.0))
    s = 1 if rng.integers(2) else -1
    if kind == 0:
        return MultiplierSymbol(lambda xi: k / (k + s * 1j * xi), tag="resolvent")
    if kind == 1:
        return MultiplierSymbol(lambda xi: np.sqrt(k) * (k + s * 1j * xi + 0j) ** -0.5, tag="half_resolvent")
    if kind == 2:
        c = float(rng.uniform(0.1, 1.0))
        return MultiplierSymbol(lambda xi: np.exp(-c * xi**2) + 0j, tag="gaussian")
    if kind == 3:
        return MultiplierSymbol(lambda xi: 1j * xi / (k + s * 1j * xi), tag="derivative_resolvent")
    phase = float(rng.uniform(0, 2 * np.pi))
    return MultiplierSymbol(lambda xi: np.exp(1j * phase) / (1 + np.abs(xi)), tag="bracket_inverse")
