"""The perturbation determinant ``alpha(u, k) = Re log det(I + A)`` and its expansions.

With ``R^+- = (k +- d)^(-1)`` the operator is

    A = (k - d)^(-1/2) u (k + d)^(-1) ubar (k - d)^(-1/2).

In the Fourier basis ``d`` acts as ``i xi``, the multipliers are diagonal and
on a symmetric window ``A_W = D T_u D' T_ubar D`` exactly.

Finite windows only see part of ``tr A``: the window trace converges like
``1/Xi`` in the window edge ``Xi``. The first trace is therefore taken in
closed form on the torus,

    tr(R^- u R^+ ubar) = coth(k L / 2) sum_m dxi |u_hat(xi_m)|^2 / (2k - i xi_m),

(the ``coth`` factor is the periodization of the line kernel and tends to
``sign(k)``), and the trace-class remainder ``log det(I + A) - tr A``
(a regularized determinant) is taken on the window, where it converges like
``1/Xi^3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergentError, SingularDeterminantError
from .operators import FourierOperatorMatrix, MultiplierSymbol, OperatorBasis, hs_norm, multiplication_matrix
from .spectral import SpectralField, modulate

#: Constant ``c`` in ``Re tr(R^- u R^+ ubar) = c * int 2k |u_hat|^2 / (4k^2 + xi^2) dxi`` on the line.
#: Derived by ``scripts/derive_trace_constant.py``.
QUADRATIC_TRACE_CONSTANT = 1.0

#: Series for ``log det`` are refused above this Hilbert-Schmidt norm of ``A``.
SERIES_HS_LIMIT = 0.9

#: ``det(I + A)`` is declared singular when an eigenvalue is this close to -1.
SINGULAR_TOL = 1e-8


def _check_k(k: float, positive: bool = True) -> float:
    k = float(k)
    if not math.isfinite(k) or k == 0 or (positive and k < 0):
        raise ValueError(f"k must be a {'positive' if positive else 'nonzero'} finite real, got {k}")
    return k


def resolvent_symbol(sign: int, power: float, k: float) -> MultiplierSymbol:
    """Symbol ``(k + sign * i xi)^power`` of ``(k + sign * d)^power``, ``power`` in {-1, -1/2}.

    The half power uses the principal branch; for ``k > 0`` the base has positive
    real part, so squaring it gives back the resolvent.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if power not in (-1, -0.5):
        raise ValueError("power must be -1 or -1/2")
    k = _check_k(k)
    return MultiplierSymbol(
        lambda xi: (k + sign * 1j * np.asarray(xi, dtype=complex)) ** power,
        tag=f"(k{'+' if sign > 0 else '-'}d)^{power}",
    )


def _window(u: SpectralField, half_width: int | None) -> OperatorBasis:
    """Default window ``|m| <= N - 1``: twice the grid band, so any grid field has
    band at most a quarter of it, and the same window is used for every field on
    a grid (the window truncation error then cancels in differences along a flow)."""
    if half_width is None:
        half_width = u.grid.n - 1
    return OperatorBasis.for_grid(u.grid, half_width)


def build_A(u: SpectralField, k: float, half_width: int | None = None) -> FourierOperatorMatrix:
    """Window matrix of ``A = (k - d)^(-1/2) u (k + d)^(-1) ubar (k - d)^(-1/2)``."""
    k = _check_k(k)
    basis = _window(u, half_width)
    xi = basis.xi
    outer = resolvent_symbol(-1, -0.5, k).values(xi)
    middle = resolvent_symbol(+1, -1, k).values(xi)
    Tu = multiplication_matrix(u, basis).matrix
    Tub = multiplication_matrix(u.conj(), basis).matrix
    a = (outer[:, None] * Tu * middle[None, :]) @ (Tub * outer[None, :])
    return FourierOperatorMatrix(basis, a)


def sandwich_B(u: SpectralField, k: float, half_width: int | None = None) -> FourierOperatorMatrix:
    """Window matrix of ``B = (k - d)^(-1/2) u (k + d)^(-1/2)``.

    ``A = B C`` with ``C = (k + d)^(-1/2) ubar (k - d)^(-1/2)`` and ``||C||_HS = ||B||_HS``.
    """
    k = _check_k(k)
    basis = _window(u, half_width)
    xi = basis.xi
    left = resolvent_symbol(-1, -0.5, k).values(xi)
    right = resolvent_symbol(+1, -0.5, k).values(xi)
    Tu = multiplication_matrix(u, basis).matrix
    return FourierOperatorMatrix(basis, left[:, None] * Tu * right[None, :])


def periodization_factor(k: float, length: float) -> float:
    """``coth(k L / 2)``: the torus correction to the line trace constant."""
    return 1.0 / math.tanh(_check_k(k, positive=False) * length / 2.0)


def first_trace_exact(u: SpectralField, k: float) -> complex:
    """Exact ``tr A = tr(R^- u R^+ ubar)`` on the torus (not truncated to a window).

    Defined for any ``k != 0``.
    """
    k = _check_k(k, positive=False)
    g = u.grid
    w = np.abs(u.coefficients) ** 2
    s = np.sum(w / (2 * k - 1j * g.xi)) * g.dxi
    return complex(QUADRATIC_TRACE_CONSTANT * periodization_factor(k, g.length) * s)


def alpha_quadratic(u: SpectralField, k: float) -> float:
    """Quadratic part of alpha, ``Re tr A``; on the line it equals
    ``c * 2k * int |u_hat|^2 / (4k^2 + xi^2) dxi`` with ``c = 1``. Any ``k != 0``."""
    return first_trace_exact(u, k).real


@dataclass
class AlphaResult:
    """Value of alpha with its provenance.

    ``terms`` holds the real parts of the series terms (``terms[0]`` is the
    quadratic part); for ``method="logdet"`` it holds the quadratic part and the
    regularized remainder.
    """

    value: float
    method: str
    k: float
    half_width: int
    hs_A: float
    terms: list = field(default_factory=list)
    l_used: int = 1
    converged: bool = True
    tail_bound: float = 0.0


def _eigen_remainder(a: np.ndarray) -> tuple[float, np.ndarray]:
    lam = np.linalg.eigvals(a)
    gap = np.abs(1.0 + lam).min() if lam.size else np.inf
    if gap < SINGULAR_TOL:
        raise SingularDeterminantError(f"det(I + A) is numerically zero (min |1 + lambda| = {gap:.2e})")
    x, y = lam.real, lam.imag
    # Re log(1 + lambda) - Re lambda, accurate for small lambda
    rem = 0.5 * np.log1p(2 * x + x * x + y * y) - x
    return float(np.sum(rem)), lam


def alpha_logdet(u: SpectralField, k: float, half_width: int | None = None) -> AlphaResult:
    """``alpha = Re tr A + Re[log det(I + A_W) - tr A_W]``.

    When ``||A_W||_HS < 1`` every eigenvalue has ``|lambda| < 1``, so ``I + A_W``
    is safely invertible and the determinant comes from an LU factorization.
    Otherwise the eigenvalues are computed and checked against -1.

    Raises
    ------
    SingularDeterminantError
        If ``I + A_W`` has an eigenvalue within ``1e-8`` of zero.
    ValueError
        If ``k <= 0``.
    """
    A = build_A(u, k, half_width)
    quad = alpha_quadratic(u, k)
    h = hs_norm(A)
    if h < 1.0 - SINGULAR_TOL:
        _, logabs = np.linalg.slogdet(np.eye(A.basis.size) + A.matrix)
        rem = float(logabs - np.trace(A.matrix).real)
    else:
        rem, _ = _eigen_remainder(A.matrix)
    return AlphaResult(
        value=quad + rem,
        method="logdet",
        k=float(k),
        half_width=A.basis.half_width,
        hs_A=h,
        terms=[quad, rem],
    )


def alpha_eigen(u: SpectralField, k: float, half_width: int | None = None) -> AlphaResult:
    """As :func:`alpha_logdet`, always through the eigenvalues of ``A_W``."""
    A = build_A(u, k, half_width)
    quad = alpha_quadratic(u, k)
    rem, _ = _eigen_remainder(A.matrix)
    return AlphaResult(quad + rem, "logdet", float(k), A.basis.half_width, hs_norm(A), [quad, rem])


def alpha_series(
    u: SpectralField,
    k: float,
    l_max: int = 64,
    tol: float = 1e-14,
    half_width: int | None = None,
) -> AlphaResult:
    """``alpha = sum_l (-1)^(l-1)/l Re tr(A^l)``, the first trace exact.

    Terms are added until ``|term| < tol`` or ``l = l_max``. ``tail_bound``
    bounds the omitted terms ``sum_{l > l_used} ||A||_HS^l / l`` by a geometric sum.

    Raises
    ------
    NonConvergentError
        If ``||A||_HS >= 0.9``.
    """
    A = build_A(u, k, half_width)
    h = hs_norm(A)
    if h >= SERIES_HS_LIMIT:
        raise NonConvergentError(f"||A||_HS = {h:.3f} >= {SERIES_HS_LIMIT}; use alpha_logdet")
    terms = [alpha_quadratic(u, k)]
    P = A.matrix
    converged = abs(terms[0]) < tol
    l = 1
    while not converged and l < l_max:
        l += 1
        P = P @ A.matrix
        term = (-1) ** (l - 1) / l * np.trace(P).real
        terms.append(float(term))
        converged = abs(term) < tol
    tail = h ** (l + 1) / ((l + 1) * (1 - h))
    return AlphaResult(
        value=float(math.fsum(terms)),
        method="series",
        k=float(k),
        half_width=A.basis.half_width,
        hs_A=h,
        terms=terms,
        l_used=l,
        converged=converged,
        tail_bound=tail,
    )


def logdet_alpha_from_matrix(a: np.ndarray) -> float:
    """``Re log det(I + a)`` for an explicit matrix (no trace correction)."""
    a = np.asarray(a, dtype=complex)
    sign, logabs = np.linalg.slogdet(np.eye(a.shape[0]) + a)
    if sign == 0:
        raise SingularDeterminantError("det(I + A) is zero")
    return float(logabs)


def boosted(u: SpectralField, n: int) -> SpectralField:
    """``exp(-i n x) u`` (the boost at a fixed time, up to a translation and a phase,
    neither of which changes alpha). ``n`` must be a grid frequency."""
    return modulate(u, -float(n))


@dataclass
class BoostFamily:
    ns: np.ndarray
    k: float
    p: float
    alphas: list
    quadratic: np.ndarray
    hs_B_sq: np.ndarray
    r_n: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return np.array([a.value for a in self.alphas])

    @property
    def remainders(self) -> np.ndarray:
        return self.values - self.quadratic

    def lp(self, arr) -> float:
        q = self.p / 2.0
        return float(np.sum(np.abs(arr) ** q) ** (1.0 / q))


def alpha_boost_family(
    u: SpectralField,
    k: float,
    ns,
    p: float = 2.0,
    half_width: int | None = None,
    method: str = "logdet",
) -> BoostFamily:
    """alpha of the boosted fields ``exp(-i n x) u`` for each ``n`` in ``ns``,
    with the quadratic parts, ``||B_n||_HS^2`` and the tail integrals ``r_n``."""
    from .norms import tail_integral_r_n

    ns = np.asarray(list(ns))
    fn = alpha_logdet if method == "logdet" else alpha_series
    alphas, quad, hsb, rn = [], [], [], []
    for n in ns:
        un = boosted(u, int(n))
        alphas.append(fn(un, k, half_width=half_width))
        quad.append(alpha_quadratic(un, k))
        hsb.append(hs_norm(sandwich_B(un, k, half_width)) ** 2)
        rn.append(tail_integral_r_n(u, int(n)))
    return BoostFamily(ns, float(k), float(p), alphas, np.array(quad), np.array(hsb), np.array(rn))


# ---------------------------------------------------------------------------
# Hilbert-Schmidt size of the sandwich operator


def weighted_spectral_sum(u: SpectralField, k: float) -> float:
    """``int |u_hat|^2 / (|k| + |xi|) dxi`` (grid sum)."""
    g = u.grid
    return float(np.sum(np.abs(u.coefficients) ** 2 / (abs(k) + np.abs(g.xi))) * g.dxi)


def h_minus_half_sq(u: SpectralField) -> float:
    """``||u||_{H^{-1/2}}^2 = int |u_hat|^2 / <xi> dxi``."""
    g = u.grid
    return float(np.sum(np.abs(u.coefficients) ** 2 / (1 + np.abs(g.xi))) * g.dxi)


def hs_constant_stated(k: float) -> float:
    """``min(1, |k|)^(-1/2)``: the constant as commonly stated for the ``H^{-1/2}`` bound."""
    return min(1.0, abs(k)) ** -0.5


def hs_constant_sharp(k: float) -> float:
    """``1 / min(1, |k|)``: a constant valid for every field, since
    ``(1 + |xi|) / (|k| + |xi|) <= 1 / min(1, |k|)``."""
    return 1.0 / min(1.0, abs(k))


def hs_bound_elementary(u: SpectralField, k: float) -> float:
    """``||u||_2^2 / (2 |k|)``: an upper bound for ``||B||_HS^2`` on the torus window."""
    return u.mass() / (2 * abs(k)) * periodization_factor(abs(k), u.grid.length)


# ---------------------------------------------------------------------------
# explicit constants for the a-priori chain


def dpg_remainder_bound(h: float) -> float:
    """``sum_{l >= 2} h^(2l) / l = -log(1 - h^2) - h^2``: bound on ``|alpha - Re tr A|``
    given ``h = ||B||_HS < 1``."""
    if not 0 <= h < 1:
        return math.inf
    return -math.log1p(-h * h) - h * h


def quadratic_kernel_l1(k: float) -> float:
    """``sum_i 2k / (4k^2 + max(|i| - 1/2, 0)^2)``: l^1 norm of the unit-cube
    upper kernel of the quadratic part."""
    k = abs(k)
    i = np.arange(1, 1 << 20)
    d = i - 0.5
    s = 2 * k / (4 * k * k) + 2 * np.sum(2 * k / (4 * k * k + d * d))
    # tail sum_{i >= I} 2k/(i - 1/2)^2 <= 2k / (I - 1.5)
    s += 2 * 2 * k / (i[-1] - 1.5)
    return float(s)


def quadratic_kernel_lower(k: float) -> float:
    """``2k / (4k^2 + 1/4)``: the smallest value of ``2k/(4k^2 + xi^2)`` on a unit cube around 0."""
    k = abs(k)
    return 2 * k / (4 * k * k + 0.25)


def tail_kernel_norm(p: float) -> float:
    """``|| 1 / (1 + max(|i| - 1/2, 0)) ||_{l^{p'}}``, ``p' = p/(p-1)`` (Young's inequality constant for ``r_n``)."""
    if p <= 1:
        return math.inf
    from scipy.special import zeta

    q = p / (p - 1.0)
    # i = 0 contributes 1; |i| >= 1 contributes 2 sum_{j>=1} (j + 1/2)^(-q)
    return float((1.0 + 2.0 * zeta(q, 1.5)) ** (1.0 / q))


def hs_weight(y: np.ndarray, k: float, length: float, half_width: int = 1 << 15) -> np.ndarray:
    """``g(y) = (1/2pi) sum_m dxi w(xi_m) w(xi_m - y)`` with ``w = (k^2 + xi^2)^(-1/2)``.

    ``||B||_HS^2 = sum_d dxi |u_hat(xi_d)|^2 g(xi_d)`` for the exact torus operator
    (and is at most that on any window). The truncated sum over ``m`` is
    completed by a tail bound, so the result is an upper bound.
    """
    dxi = 2 * math.pi / length
    xi = dxi * np.arange(-half_width, half_width + 1)
    X = dxi * half_width
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty_like(y)
    for i, yy in enumerate(y):
        s = np.sum((k * k + xi**2) ** -0.5 * (k * k + (xi - yy) ** 2) ** -0.5) * dxi
        a = X - abs(yy)
        # two tails, each <= int_{X - dxi}^inf dxi' / (xi' (xi' - |y|)) style bound
        tail = 2 * (1.0 / max(a - dxi, 1e-300)) * (1 + math.log1p(abs(yy) / max(a - dxi, 1e-300)))
        out[i] = (s + tail) / (2 * math.pi)
    return out


def hs_weight_sup(k: float, length: float, y_max: float, offset: float = 1.0, points: int = 401) -> float:
    """``sup_{|y| <= y_max} g(y) (offset + |y|)`` over a grid of ``y`` values, inflated
    by the largest step between samples so it stays an upper bound.

    With ``offset = 1`` this bounds ``||B||_HS^2 / r`` (``r`` the tail integral);
    with ``offset = |k|`` it bounds ``||B||_HS^2 / int |u_hat|^2 / (|k| + |xi|)``.
    Both grow like ``log(y_max)``: ``g(y) ~ 2 log(|y| / |k|) / (pi |y|)``.
    """
    y = np.linspace(0.0, y_max, points)
    v = hs_weight(y, k, length) * (offset + y)
    # even in y, so [0, y_max] suffices
    return float(v.max() + np.abs(np.diff(v)).max(initial=0.0))
