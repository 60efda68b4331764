"""Dense Fourier-basis realizations of multiplier and multiplication operators.

Operators act on the span of ``e_m = L^(-1/2) exp(i xi_m x)`` for the symmetric
mode window ``m = -K..K`` (``2K + 1`` modes, no unpaired Nyquist mode, so
complex conjugation ``m -> -m`` maps the window onto itself). In this basis

* a multiplier with symbol ``m(xi)`` is ``diag(m(xi_m))``;
* multiplication by ``u`` is the Toeplitz matrix ``c_u(m - m')`` of its
  Fourier-series coefficients (the compression of the infinite Toeplitz operator);
* the adjoint is the conjugate transpose and the kernel conjugate is
  ``conj(A[-m, -m'])``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.linalg import toeplitz

from .errors import AliasingError, GridMismatchError, ResolutionError, SingularSymbolError
from .spectral import SpatialGrid, SpectralField, dft_inverse, spectral_derivative


#: Spectral content below this fraction of the peak is ignored by aliasing checks
#: (derivatives amplify transform roundoff well above 1e-12 at high modes).
ALIAS_RTOL = 1e-10

# ---------------------------------------------------------------------------
# bases and symbols


@dataclass(frozen=True)
class OperatorBasis:
    """Symmetric Fourier window ``m = -half_width..half_width`` on a torus of length ``length``."""

    length: float
    half_width: int

    def __post_init__(self):
        if self.half_width < 1:
            raise ValueError("half_width must be >= 1")

    @classmethod
    def for_grid(cls, grid: SpatialGrid, half_width: int | None = None) -> "OperatorBasis":
        return cls(grid.length, grid.n // 2 - 1 if half_width is None else int(half_width))

    @property
    def size(self) -> int:
        return 2 * self.half_width + 1

    @property
    def dxi(self) -> float:
        return 2.0 * math.pi / self.length

    @cached_property
    def modes(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    @cached_property
    def xi(self) -> np.ndarray:
        return self.dxi * self.modes


@dataclass(frozen=True)
class MultiplierSymbol:
    """A closed-form Fourier symbol ``xi -> m(xi)`` with a descriptive tag."""

    func: Callable[[np.ndarray], np.ndarray]
    tag: str = "symbol"

    def __call__(self, xi):
        return np.asarray(self.func(np.asarray(xi, dtype=float)), dtype=complex)

    def values(self, xi) -> np.ndarray:
        v = self(xi) * np.ones_like(xi, dtype=complex)
        if not np.all(np.isfinite(v)):
            bad = np.asarray(xi)[~np.isfinite(v)]
            raise SingularSymbolError(f"symbol {self.tag!r} is singular at xi = {bad[:3]}")
        return v

    def conjugate(self) -> "MultiplierSymbol":
        """``m^-(xi) = conj(m(-xi))``: the symbol of the kernel-conjugated operator."""
        f = self.func
        return MultiplierSymbol(lambda xi: np.conj(f(-xi)), tag=f"conj({self.tag})")

    def __mul__(self, other: "MultiplierSymbol") -> "MultiplierSymbol":
        f, g = self.func, other.func
        return MultiplierSymbol(lambda xi: f(xi) * g(xi), tag=f"{self.tag}*{other.tag}")


def constant_symbol(value: complex = 1.0) -> MultiplierSymbol:
    return MultiplierSymbol(lambda xi: np.full(np.shape(xi), value, dtype=complex), tag=f"const({value})")


def derivative_symbol(order: int = 1) -> MultiplierSymbol:
    return MultiplierSymbol(lambda xi: (1j * xi) ** order, tag=f"d^{order}")


def shifted_derivative_symbol(k: float, sign: int, power: int) -> MultiplierSymbol:
    """Symbol of ``(k + sign * d)^power``."""
    return MultiplierSymbol(lambda xi: (k + sign * 1j * xi) ** power, tag=f"(k{'+' if sign > 0 else '-'}d)^{power}")


# ---------------------------------------------------------------------------
# operator matrices


@dataclass(frozen=True, eq=False)
class FourierOperatorMatrix:
    """Dense matrix of an operator in the orthonormal Fourier basis of ``basis``."""

    basis: OperatorBasis
    matrix: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=complex)
        n = self.basis.size
        if a.shape != (n, n):
            raise ValueError(f"matrix must be {n}x{n}, got {a.shape}")
        object.__setattr__(self, "matrix", a)

    def _check(self, other):
        if not isinstance(other, FourierOperatorMatrix):
            return NotImplemented
        if other.basis != self.basis:
            raise GridMismatchError(f"operator windows differ: {self.basis} vs {other.basis}")
        return other

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return FourierOperatorMatrix(self.basis, self.matrix @ other.matrix)

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return FourierOperatorMatrix(self.basis, self.matrix + other.matrix)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return FourierOperatorMatrix(self.basis, self.matrix - other.matrix)

    def __neg__(self):
        return FourierOperatorMatrix(self.basis, -self.matrix)

    def __mul__(self, scalar):
        if isinstance(scalar, FourierOperatorMatrix):
            return NotImplemented
        return FourierOperatorMatrix(self.basis, scalar * self.matrix)

    __rmul__ = __mul__

    def apply(self, coords: np.ndarray) -> np.ndarray:
        return self.matrix @ coords

    def power(self, n: int) -> "FourierOperatorMatrix":
        return FourierOperatorMatrix(self.basis, np.linalg.matrix_power(self.matrix, n))


def identity(basis: OperatorBasis) -> FourierOperatorMatrix:
    return FourierOperatorMatrix(basis, np.eye(basis.size, dtype=complex))


def _as_basis(basis_or_grid) -> OperatorBasis:
    if isinstance(basis_or_grid, OperatorBasis):
        return basis_or_grid
    if isinstance(basis_or_grid, SpatialGrid):
        return OperatorBasis.for_grid(basis_or_grid)
    raise TypeError(f"expected OperatorBasis or SpatialGrid, got {type(basis_or_grid).__name__}")


def multiplier_matrix(symbol: MultiplierSymbol, basis) -> FourierOperatorMatrix:
    """``diag(m(xi_m))``. Raises :class:`SingularSymbolError` if the symbol is not finite."""
    basis = _as_basis(basis)
    return FourierOperatorMatrix(basis, np.diag(symbol.values(basis.xi)))


def shifted_derivative_matrix(basis, k: float, sign: int, power: int) -> FourierOperatorMatrix:
    return multiplier_matrix(shifted_derivative_symbol(k, sign, power), basis)


def series_coefficient_function(u: SpectralField):
    """Return ``d -> c_u(d)`` (zero outside the grid band) as a vectorized callable."""
    g = u.grid
    c = u.series_coefficients
    half = g.n // 2

    def coeff(d):
        d = np.asarray(d)
        out = np.zeros(d.shape, dtype=complex)
        inside = (d > -half) & (d < half)
        out[inside] = c[d[inside] + half]
        return out

    return coeff


def multiplication_matrix(u: SpectralField, basis=None, max_band_fraction: float = 0.25) -> FourierOperatorMatrix:
    """Toeplitz matrix of multiplication by ``u`` on the window ``basis``.

    The field's effective band (modes above ``ALIAS_RTOL`` of the peak) must not
    exceed ``max_band_fraction`` of the window size; otherwise products with
    window functions would leave the window and :class:`AliasingError` is raised.
    """
    basis = OperatorBasis.for_grid(u.grid) if basis is None else _as_basis(basis)
    if not math.isclose(basis.length, u.grid.length, rel_tol=1e-12):
        raise GridMismatchError(f"field length {u.grid.length} differs from window length {basis.length}")
    band = u.band(ALIAS_RTOL)
    if band > max_band_fraction * (basis.size + 1):
        raise AliasingError(
            f"field band {band} exceeds {max_band_fraction} of the {basis.size}-mode window"
        )
    coeff = series_coefficient_function(u)
    d = np.arange(basis.size)
    return FourierOperatorMatrix(basis, toeplitz(coeff(d), coeff(-d)))


def compose(*ops: FourierOperatorMatrix) -> FourierOperatorMatrix:
    out = ops[0]
    for op in ops[1:]:
        out = out @ op
    return out


def adjoint(A: FourierOperatorMatrix) -> FourierOperatorMatrix:
    return FourierOperatorMatrix(A.basis, A.matrix.conj().T)


def conjugate_op(A: FourierOperatorMatrix) -> FourierOperatorMatrix:
    """Operator with the complex-conjugated kernel: entries ``conj(A[-m, -m'])``."""
    return FourierOperatorMatrix(A.basis, np.conj(A.matrix[::-1, ::-1]))


def trace(A: FourierOperatorMatrix) -> complex:
    return complex(np.trace(A.matrix))


def hs_norm(A: FourierOperatorMatrix) -> float:
    """Hilbert-Schmidt norm ``sqrt(tr(A A*))``."""
    return float(np.linalg.norm(A.matrix, "fro"))


def trace_of_product(*ops: FourierOperatorMatrix) -> complex:
    return trace(compose(*ops))


# ---------------------------------------------------------------------------
# coordinates


def coordinates(f: SpectralField, basis: OperatorBasis) -> np.ndarray:
    """Orthonormal coordinates of ``f`` on the window (zero-padded if the window is wider)."""
    g = f.grid
    if not math.isclose(basis.length, g.length, rel_tol=1e-12):
        raise GridMismatchError("field and window lengths differ")
    a = f.orthonormal_coefficients
    half = g.n // 2
    out = np.zeros(basis.size, dtype=complex)
    m = basis.modes
    inside = (m >= -half) & (m < half)
    out[inside] = a[m[inside] + half]
    outside = np.ones(g.n, dtype=bool)
    outside[m[inside] + half] = False
    if np.any(outside) and np.abs(a[outside]).max(initial=0.0) > ALIAS_RTOL * max(np.abs(a).max(), 1e-300):
        raise ResolutionError("field has content outside the operator window")
    return out


def field_from_coordinates(coords: np.ndarray, basis: OperatorBasis, grid: SpatialGrid) -> SpectralField:
    if not math.isclose(basis.length, grid.length, rel_tol=1e-12):
        raise GridMismatchError("field and window lengths differ")
    half = grid.n // 2
    m = basis.modes
    inside = (m >= -half) & (m < half)
    if np.abs(coords[~inside]).max(initial=0.0) > ALIAS_RTOL * max(np.abs(coords).max(), 1e-300):
        raise ResolutionError("operator output has content outside the grid band")
    c = np.zeros(grid.n, dtype=complex)
    c[m[inside] + half] = coords[inside] / math.sqrt(grid.dxi)
    return dft_inverse(c, grid)


# ---------------------------------------------------------------------------
# trace identities


def _factor(symbol_or_field, basis):
    if isinstance(symbol_or_field, MultiplierSymbol):
        return multiplier_matrix(symbol_or_field, basis)
    if isinstance(symbol_or_field, SpectralField):
        return multiplication_matrix(symbol_or_field, basis)
    if isinstance(symbol_or_field, FourierOperatorMatrix):
        return symbol_or_field
    raise TypeError(type(symbol_or_field).__name__)


def trace_identities_check(multipliers: Sequence[MultiplierSymbol], fields: Sequence[SpectralField], basis=None) -> dict:
    """Evaluate both sides of the trace-permutation identities for products of
    multiplier operators ``M_j`` and multiplication operators ``u_j``.

    ``multipliers`` needs ``n + 1`` entries and ``fields`` ``n + 1`` entries
    (``2 <= n``, at most 8 factors per product). Returns the absolute
    deviation for each identity and the Hilbert-Schmidt bound slack
    ``prod ||T_j|| - |tr(T_1...T_n)|`` (must be positive).
    """
    n = len(multipliers) - 1
    if len(fields) != n + 1 or n < 2:
        raise ValueError("need n + 1 multipliers and n + 1 fields with n >= 2")
    if 2 * n + 2 > 16:
        raise ValueError("at most 8 factor pairs are supported")
    basis = OperatorBasis.for_grid(fields[0].grid) if basis is None else _as_basis(basis)
    M = [_factor(m, basis) for m in multipliers]
    U = [_factor(u, basis) for u in fields]

    def prod(seq):
        return compose(*seq)

    MU = [M[j] @ U[j] for j in range(n)]
    UM = [U[j] @ M[j] for j in range(n)]
    out = {}

    out["cyclicity"] = abs(trace(MU[0] @ MU[1]) - trace(MU[1] @ MU[0]))

    # shift permutations of (M_1 u_1)...(M_n u_n)
    base = trace(prod(MU))
    dev = 0.0
    for s in range(1, n):
        sigma = [(j + s) % n for j in range(n)]
        shifted = trace(prod([MU[i] for i in sigma]))
        regrouped = trace(
            prod([U[sigma[j]] @ M[sigma[j + 1]] for j in range(n - 1)] + [U[sigma[n - 1]], M[sigma[0]]])
        )
        dev = max(dev, abs(base - shifted), abs(base - regrouped))
    out["shift_permutation"] = dev

    lhs = trace(prod(MU + [M[n]]))
    rhs = trace(prod([M[0], M[n], U[0]] + MU[1:]))
    out["trailing_multiplier"] = abs(lhs - rhs)

    lhs = trace(prod(UM))
    rhs = trace(prod([M[j] @ U[j + 1] for j in range(n - 1)] + [M[n - 1], U[0]]))
    out["multiplication_first"] = abs(lhs - rhs)

    # multiplication operators commute on l^2(Z) but their window compressions do not;
    # the product is taken in the cyclic order, which is the exact finite-dimensional form
    lhs = trace(prod(UM + [U[n]]))
    rhs = trace(prod([M[j] @ U[j + 1] for j in range(n - 1)] + [M[n - 1], U[n] @ U[0]]))
    out["trailing_multiplication"] = abs(lhs - rhs)

    # pairing form tr(M1 u1 M2 u2) = tr(u2 M1 u1 M2)
    out["pairing"] = abs(trace(M[0] @ U[0] @ M[1] @ U[1]) - trace(U[1] @ M[0] @ U[0] @ M[1]))

    full = prod(MU)
    out["hs_bound_slack"] = float(np.prod([hs_norm(T) for T in MU]) - abs(trace(full)))
    out["max_deviation"] = max(v for key, v in out.items() if key != "hs_bound_slack")
    return out


# ---------------------------------------------------------------------------
# multiplication-operator rewriting identities

IDENTITIES = (
    "u_xx",
    "u_xxx",
    "nonlinear_u_x",
    "u_xx_conj",
    "u_xxx_conj",
    "nonlinear_u_x_conj",
)


def _pointwise(*fields: SpectralField) -> SpectralField:
    out = fields[0].samples
    for f in fields[1:]:
        out = out * f.samples
    return SpectralField(fields[0].grid, out)


def _lhs_function(identity_id: str, u: SpectralField) -> SpectralField:
    ub = u.conj()
    if identity_id == "u_xx":
        return spectral_derivative(u, 2)
    if identity_id == "u_xxx":
        return spectral_derivative(u, 3)
    if identity_id == "nonlinear_u_x":
        return 2.0 * _pointwise(u, ub, spectral_derivative(u, 1))
    if identity_id == "u_xx_conj":
        return spectral_derivative(ub, 2)
    if identity_id == "u_xxx_conj":
        return spectral_derivative(ub, 3)
    if identity_id == "nonlinear_u_x_conj":
        return 2.0 * _pointwise(u, ub, spectral_derivative(ub, 1))
    raise ValueError(f"unknown identity {identity_id!r}; choose from {IDENTITIES}")


def _rhs_terms(identity_id: str, u: SpectralField, k: float, basis: OperatorBasis):
    """Operator terms whose sum is the multiplication operator of the left side."""
    ub = u.conj()
    mult = lambda f: multiplication_matrix(f, basis)  # noqa: E731
    D = lambda sign, power: shifted_derivative_matrix(basis, k, sign, power)  # noqa: E731
    if identity_id == "u_xx":
        U = mult(u)
        return [U @ D(-1, 2), D(+1, 2) @ U, -4 * k * k * U, 2 * (D(-1, 1) @ U @ D(+1, 1))]
    if identity_id == "u_xx_conj":
        U = mult(ub)
        return [D(-1, 2) @ U, U @ D(+1, 2), -4 * k * k * U, 2 * (D(+1, 1) @ U @ D(-1, 1))]
    if identity_id == "u_xxx":
        U = mult(u)
        X = mult(3.0 * spectral_derivative(u, 1) + 6.0 * k * u)
        return [U @ D(-1, 3), D(+1, 3) @ U, -8 * k**3 * U, D(-1, 1) @ X @ D(+1, 1)]
    if identity_id == "u_xxx_conj":
        U = mult(ub)
        X = mult(3.0 * spectral_derivative(ub, 1) - 6.0 * k * ub)
        return [-(U @ D(+1, 3)), -(D(-1, 3) @ U), 8 * k**3 * U, D(+1, 1) @ X @ D(-1, 1)]
    if identity_id == "nonlinear_u_x":
        W = mult(_pointwise(u, ub, u))
        V = mult(_pointwise(u, u, spectral_derivative(ub, 1) - 2.0 * k * ub))
        return [-(W @ D(+1, 1)), -(D(-1, 1) @ W), -V]
    if identity_id == "nonlinear_u_x_conj":
        W = mult(_pointwise(u, ub, ub))
        V = mult(_pointwise(ub, ub, spectral_derivative(u, 1) + 2.0 * k * u))
        return [D(+1, 1) @ W, W @ D(-1, 1), -V]
    raise ValueError(f"unknown identity {identity_id!r}; choose from {IDENTITIES}")


def mult_identity_residual(identity_id: str, u: SpectralField, k: float, f: SpectralField) -> float:
    """Relative L^2 residual of an operator rewriting identity applied to ``f``.

    The left side multiplies ``f`` pointwise by the identity's function (``u''``,
    ``u'''``, ``2|u|^2 u'`` or their conjugates); the right side composes
    multiplier and Toeplitz matrices. The residual is normalized by the larger
    of the left side's norm and the sum of the right-side term norms, so
    identities whose left side vanishes still report a meaningful relative value.
    """
    if u.grid != f.grid:
        raise GridMismatchError("u and f must share a grid")
    g = u.grid
    lhs_fn = _lhs_function(identity_id, u)
    if lhs_fn.band(ALIAS_RTOL) + f.band(ALIAS_RTOL) >= g.n // 2:
        raise AliasingError("pointwise product of the identity's function with f would alias")
    basis = OperatorBasis.for_grid(g)
    lhs = coordinates(_pointwise(lhs_fn, f), basis)
    fc = coordinates(f, basis)
    applied = [T.apply(fc) for T in _rhs_terms(identity_id, u, k, basis)]
    rhs = np.sum(applied, axis=0)
    scale = max(np.linalg.norm(lhs), sum(np.linalg.norm(a) for a in applied), 1e-300)
    return float(np.linalg.norm(lhs - rhs) / scale)


# ---------------------------------------------------------------------------
# weighted convolution of brackets


def weight_convolution_check(a: float, b: float, alpha: float, beta: float) -> dict:
    """Integrate ``<x - alpha>^(-a) <x - beta>^(-b)`` over the line and compare with
    ``<alpha - beta>^(-c)``, ``c = min(a, b, a + b - 1)``.
    """
    if not (a > 0 and b > 0):
        raise ValueError("exponents must be positive")
    if a + b <= 1:
        raise ValueError(f"integral diverges for a + b = {a + b} <= 1")
    c = min(a, b, a + b - 1)

    def f(x):
        return (1 + abs(x - alpha)) ** -a * (1 + abs(x - beta)) ** -b

    lo, hi = min(alpha, beta), max(alpha, beta)
    opts = dict(limit=400, epsabs=0.0, epsrel=1e-11)
    integral = quad(f, -np.inf, lo, **opts)[0] + quad(f, hi, np.inf, **opts)[0]
    if hi > lo:
        integral += quad(f, lo, hi, **opts)[0]
    bound = (1 + abs(alpha - beta)) ** -c
    return {"a": a, "b": b, "alpha": alpha, "beta": beta, "c": c, "integral": integral, "ratio": integral / bound}


def bracket_convolution_bound(a: float, b: float) -> float:
    """For ``a, b < 1 < a + b``: ``2^c int |t|^(-a) |1 - t|^(-b) dt``, an upper bound
    for the ratio of :func:`weight_convolution_check` whenever ``|alpha - beta| >= 1``.

    Uses ``<x> >= |x|``, the scaling ``t = (x - alpha) / (beta - alpha)`` and
    ``((1 + D) / D)^c <= 2^c``.
    """
    if not (a < 1 and b < 1 and a + b > 1):
        raise ValueError("closed form needs a, b < 1 < a + b")
    from scipy.special import beta

    c = a + b - 1
    full = beta(1 - a, 1 - b) + beta(1 - a, c) + beta(1 - b, c)
    return float(2**c * full)


# ---------------------------------------------------------------------------
# traces of two-pair products beyond a finite window


def pair_trace(m1: MultiplierSymbol, u1: SpectralField, m2: MultiplierSymbol, u2: SpectralField, half_width: int) -> complex:
    """``tr(P M1 u1 M2 u2 P)`` on the window ``-K..K``, summed along the diagonal.

    Uses the banded structure of the Toeplitz factors, so windows far larger
    than a dense matrix allows are cheap. Agrees with the dense
    :func:`trace` of the composed window matrices.
    """
    if u1.grid.length != u2.grid.length:
        raise GridMismatchError("fields must live on the same torus")
    K = int(half_width)
    c1 = series_coefficient_function(u1)
    c2 = series_coefficient_function(u2)
    B = max(u1.band(ALIAS_RTOL), u2.band(ALIAS_RTOL))
    dxi = u1.grid.dxi
    m = np.arange(-K, K + 1)
    a1 = m1.values(dxi * m)
    a2 = m2.values(dxi * m)
    total = 0.0 + 0.0j
    for d in range(-min(B, 2 * K), min(B, 2 * K) + 1):
        w = c1(np.array([d]))[0] * c2(np.array([-d]))[0]
        if w == 0:
            continue
        # rows m and columns j = m - d both inside the window
        lo, hi = max(-K, -K + d), min(K, K + d)
        rows = a1[lo + K : hi + K + 1]
        cols = a2[lo - d + K : hi - d + K + 1]
        total += w * np.sum(rows * cols)
    return complex(total)


def pair_trace_limit(
    m1: MultiplierSymbol,
    u1: SpectralField,
    m2: MultiplierSymbol,
    u2: SpectralField,
    half_width: int = 4096,
    levels: int = 5,
) -> dict:
    """Infinite-window limit of :func:`pair_trace` by Richardson extrapolation.

    Window traces at ``K, 2K, ..., 2^(levels-1) K`` are extrapolated as a
    polynomial in ``1/K`` (the finite-section error of a trace-class product of
    rational symbols has a pure power expansion). Returns the extrapolated
    value, the raw traces and the change of the last extrapolation step.
    """
    Ks = [half_width * 2**i for i in range(levels)]
    vals = [pair_trace(m1, u1, m2, u2, K) for K in Ks]
    h = [1.0 / K for K in Ks]
    # Neville table at h = 0
    table = [list(vals)]
    for j in range(1, levels):
        prev = table[-1]
        row = []
        for i in range(levels - j):
            row.append((h[i] * prev[i + 1] - h[i + j] * prev[i]) / (h[i] - h[i + j]))
        table.append(row)
    est = table[-1][0]
    err = abs(est - table[-2][0]) if levels > 1 else float("nan")
    return {"value": complex(est), "raw": vals, "half_widths": Ks, "extrapolation_change": err}


def torus_kernel_constant(symbol: MultiplierSymbol, length: float, half_width: int = 1 << 16) -> complex:
    """``(1/L) sum_m m(xi_m)``: the diagonal value ``m^vee(0)`` of a multiplier's kernel on the torus."""
    dxi = 2.0 * math.pi / length
    m = np.arange(-half_width, half_width + 1)
    return complex(np.sum(symbol.values(dxi * m)) / length)
