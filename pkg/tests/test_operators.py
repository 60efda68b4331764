import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hnls_lab import operators as ops
from hnls_lab.errors import AliasingError, GridMismatchError, ResolutionError, SingularSymbolError
from hnls_lab.experiments.corpus import random_field, random_symbol
from hnls_lab.spectral import SpatialGrid, make_field, spectral_derivative

GRID = SpatialGrid(64, 16 * math.pi)
BASIS = ops.OperatorBasis.for_grid(GRID)


def test_basis():
    assert BASIS.size == 2 * (GRID.n // 2 - 1) + 1
    assert BASIS.xi[BASIS.half_width] == 0.0
    with pytest.raises(ValueError):
        ops.OperatorBasis(1.0, 0)


def test_symbol_helpers():
    xi = np.linspace(-2, 2, 5)
    assert np.allclose(ops.derivative_symbol(2)(xi), -(xi**2))
    assert np.allclose(ops.shifted_derivative_symbol(1.5, -1, -1)(xi), 1 / (1.5 - 1j * xi))
    m = ops.shifted_derivative_symbol(1.0, 1, -1)
    assert np.allclose(m.conjugate()(xi), np.conj(m(-xi)))
    assert np.allclose((m * m)(xi), m(xi) ** 2)
    with pytest.raises(SingularSymbolError), np.errstate(divide="ignore", invalid="ignore"):
        ops.multiplier_matrix(ops.shifted_derivative_symbol(0.0, 1, -1), BASIS)


def test_multiplication_matrix_applies_product():
    g = SpatialGrid(128, 32 * math.pi)
    basis = ops.OperatorBasis.for_grid(g)
    u = make_field("gaussian", g, width=4.0, amplitude=0.5)
    f = make_field("gaussian", g, width=4.0, carrier=0.25)
    U = ops.multiplication_matrix(u)
    out = ops.field_from_coordinates(U.apply(ops.coordinates(f, basis)), basis, g)
    assert np.abs(out.samples - u.samples * f.samples).max() < 1e-10


def test_multiplier_matrix_applies_derivative():
    f = make_field("gaussian", GRID, width=3.0)
    D = ops.multiplier_matrix(ops.derivative_symbol(1), BASIS)
    out = ops.field_from_coordinates(D.apply(ops.coordinates(f, BASIS)), BASIS, GRID)
    assert np.abs(out.samples - spectral_derivative(f).samples).max() < 1e-12


def test_aliasing_and_mismatch_errors():
    wide = make_field("random_bandlimited", GRID, band=(-GRID.xi_max, GRID.xi_max), seed=1)
    with pytest.raises(AliasingError):
        ops.multiplication_matrix(wide)
    other = ops.OperatorBasis(2 * GRID.length, 10)
    with pytest.raises(GridMismatchError):
        ops.multiplication_matrix(make_field("gaussian", GRID, width=3.0), other)
    small = ops.OperatorBasis(GRID.length, 5)
    with pytest.raises(ResolutionError):
        ops.coordinates(wide, small)
    A = ops.identity(BASIS)
    with pytest.raises(GridMismatchError):
        A @ ops.identity(small)


def test_matrix_algebra():
    rng = np.random.default_rng(0)
    a = ops.FourierOperatorMatrix(BASIS, rng.standard_normal((BASIS.size, BASIS.size)))
    b = ops.FourierOperatorMatrix(BASIS, rng.standard_normal((BASIS.size, BASIS.size)))
    assert np.allclose((a + b - b).matrix, a.matrix)
    assert np.allclose((2 * a).matrix, (a * 2).matrix)
    assert np.allclose((-a).matrix, -a.matrix)
    assert np.allclose(a.power(3).matrix, (a @ a @ a).matrix)
    assert ops.trace_of_product(a, b) == pytest.approx(ops.trace(ops.compose(a, b)))
    assert ops.hs_norm(a) ** 2 == pytest.approx(ops.trace(a @ ops.adjoint(a)).real)
    with pytest.raises(ValueError):
        ops.FourierOperatorMatrix(BASIS, np.eye(3))


def test_conjugate_of_multiplier_and_multiplication():
    m = ops.shifted_derivative_symbol(1.0, 1, -1)
    u = random_field(GRID, np.random.default_rng(3), 10)
    M = ops.multiplier_matrix(m, BASIS)
    assert np.abs(ops.conjugate_op(M).matrix - ops.multiplier_matrix(m.conjugate(), BASIS).matrix).max() < 1e-15
    U = ops.multiplication_matrix(u, BASIS)
    assert np.abs(ops.conjugate_op(U).matrix - ops.multiplication_matrix(u.conj(), BASIS).matrix).max() < 1e-15
    # conj(M u) = M^- conj(u)
    lhs = ops.conjugate_op(M @ U).matrix
    rhs = (ops.multiplier_matrix(m.conjugate(), BASIS) @ ops.multiplication_matrix(u.conj(), BASIS)).matrix
    assert np.abs(lhs - rhs).max() < 1e-15


@pytest.mark.parametrize("n", [2, 3, 5])
def test_trace_identities(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        Ms = [random_symbol(rng) for _ in range(n + 1)]
        Us = [random_field(GRID, rng, 12) for _ in range(n + 1)]
        rep = ops.trace_identities_check(Ms, Us, BASIS)
        assert rep["max_deviation"] <= 1e-12
        assert rep["hs_bound_slack"] >= 0


def test_trace_identities_argument_checks():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        ops.trace_identities_check([random_symbol(rng)] * 2, [random_field(GRID, rng, 4)] * 2)
    with pytest.raises(ValueError):
        ops.trace_identities_check([random_symbol(rng)] * 9, [random_field(GRID, rng, 4)] * 9)


@pytest.mark.parametrize("ident", ops.IDENTITIES)
@pytest.mark.parametrize("k", [0.0, 0.5, 1.0, 2.0])
def test_multiplication_identities(ident, k):
    g = SpatialGrid(128, 16 * math.pi)
    rng = np.random.default_rng(11)
    for _ in range(3):
        u = random_field(g, rng, 8)
        f = random_field(g, rng, 16)
        assert ops.mult_identity_residual(ident, u, k, f) <= 1e-8


def test_identity_residual_detects_wrong_operator():
    # a wrong sign in the cross term must show up as an O(1) residual
    g = SpatialGrid(128, 16 * math.pi)
    rng = np.random.default_rng(2)
    u, f = random_field(g, rng, 8), random_field(g, rng, 16)
    basis = ops.OperatorBasis.for_grid(g)
    terms = ops._rhs_terms("u_xx", u, 1.0, basis)
    terms[-1] = -terms[-1]
    fc = ops.coordinates(f, basis)
    lhs = ops.coordinates(ops._pointwise(ops._lhs_function("u_xx", u), f), basis)
    rhs = sum(T.apply(fc) for T in terms)
    assert np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs) > 0.1
    with pytest.raises(ValueError):
        ops.mult_identity_residual("u_x", u, 1.0, f)


def test_weight_convolution():
    # bounded ratio away from the logarithmic case
    r = [ops.weight_convolution_check(2.0, 2.0, 0.0, D)["ratio"] for D in (10.0, 100.0, 1000.0)]
    assert max(r) / min(r) < 1.1
    # a = b = 1 grows like log D
    r1 = [ops.weight_convolution_check(1.0, 1.0, 0.0, D)["ratio"] for D in (100.0, 10000.0)]
    assert r1[1] / r1[0] > 1.5
    with pytest.raises(ValueError):
        ops.weight_convolution_check(0.5, 0.4, 0.0, 1.0)


def test_bracket_convolution_bound():
    bound = ops.bracket_convolution_bound(0.75, 0.75)
    for D in (1.0, 10.0, 100.0, 1000.0):
        assert ops.weight_convolution_check(0.75, 0.75, 0.0, D)["ratio"] <= bound
    with pytest.raises(ValueError):
        ops.bracket_convolution_bound(1.0, 0.5)


def test_pair_trace_matches_dense():
    rng = np.random.default_rng(4)
    u1, u2 = random_field(GRID, rng, 8), random_field(GRID, rng, 8)
    m1, m2 = random_symbol(rng), random_symbol(rng)
    K = BASIS.half_width
    dense = ops.trace(
        ops.multiplier_matrix(m1, BASIS) @ ops.multiplication_matrix(u1, BASIS) @ ops.multiplier_matrix(m2, BASIS) @ ops.multiplication_matrix(u2, BASIS)
    )
    assert abs(ops.pair_trace(m1, u1, m2, u2, K) - dense) <= 1e-12 * max(1.0, abs(dense))


def test_pair_trace_limit_on_rational_symbols():
    # tr((1 - d)^-1 u (1 + d)^-1 conj u) on the torus, in closed form
    u = make_field("gaussian", GRID, amplitude=0.5, width=3.0, carrier=0.25)
    k = 1.0
    res = ops.pair_trace_limit(
        ops.shifted_derivative_symbol(k, -1, -1), u, ops.shifted_derivative_symbol(k, 1, -1), u.conj(), half_width=1024
    )
    c = 1 / math.tanh(k * GRID.length / 2)
    exact = c * GRID.dxi * np.sum(np.abs(u.coefficients) ** 2 / (2 * k - 1j * GRID.xi))
    assert abs(res["value"] - exact) <= 1e-10 * abs(exact)


def test_torus_kernel_constant():
    # sum_m k / (k^2 + xi_m^2) / L = coth(kL/2) / 2
    k, L = 1.0, GRID.length
    sym = ops.MultiplierSymbol(lambda xi: k / (k * k + xi * xi) + 0j)
    assert ops.torus_kernel_constant(sym, L).real == pytest.approx(0.5 / math.tanh(k * L / 2), rel=1e-4)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 4))
def test_cyclicity_property(seed, n):
    rng = np.random.default_rng(seed)
    T = [ops.multiplier_matrix(random_symbol(rng), BASIS) @ ops.multiplication_matrix(random_field(GRID, rng, 12), BASIS) for _ in range(n)]
    base = ops.trace_of_product(*T)
    for s in range(1, n):
        assert abs(ops.trace_of_product(*(T[s:] + T[:s])) - base) <= 1e-12 * max(1.0, abs(base))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_adjoint_and_norm_symmetry(seed):
    rng = np.random.default_rng(seed)
    m1, m2 = random_symbol(rng), random_symbol(rng)
    u = random_field(GRID, rng, 12)
    M1, M2 = ops.multiplier_matrix(m1, BASIS), ops.multiplier_matrix(m2, BASIS)
    S = M1 @ ops.multiplication_matrix(u, BASIS) @ M2
    adj = ops.adjoint(M2) @ ops.multiplication_matrix(u.conj(), BASIS) @ ops.adjoint(M1)
    assert np.abs(ops.adjoint(S).matrix - adj.matrix).max() <= 1e-12
    assert ops.hs_norm(S) == pytest.approx(ops.hs_norm(ops.adjoint(S)), rel=1e-13)
