import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.linalg import expm
from scipy.special import eval_hermite, factorial

from cvteleport.errors import InvalidParameter
from cvteleport.fidelity_engine import thermal_chi_pa_quadrature
from cvteleport.fock_numerics import (
    FockOperators,
    QuadratureGrid,
    coherent_squeeze_displace,
    displacement_element,
    displacement_matrix,
    fock_wavefunction,
    gaussian_weighted_integral_2d,
    hermite_h,
    laguerre_l,
    squeeze_displace_diag,
    squeeze_displace_element,
    squeeze_displace_thermal_diag,
    squeeze_matrix,
    thermal_squeeze_displace,
)


def padded_expm_ops(dim, pad=80):
    """Reference D and S by matrix exponentials on an enlarged space, cropped to dim."""
    n = dim + pad
    a = np.diag(np.sqrt(np.arange(1, n)), 1)
    ad = a.T

    def D(beta):
        return expm(beta * ad - np.conj(beta) * a)[:dim, :dim]

    def S(eps):
        return expm(0.5 * eps * (ad @ ad - a @ a))[:dim, :dim]

    return D, S


def test_hermite_values():
    assert hermite_h(0, 3.3) == 1
    assert hermite_h(3, 1.0) == -4
    assert hermite_h(2, 0.0) == -2
    x = np.linspace(-3, 3, 7)
    for n in range(8):
        assert np.allclose(hermite_h(n, x), eval_hermite(n, x))


def test_wavefunction_values():
    assert fock_wavefunction(0, 0.0) == pytest.approx(math.pi**-0.25)
    assert fock_wavefunction(1, 0.0) == 0.0
    overlap, _ = quad(lambda x: fock_wavefunction(2, x) * fock_wavefunction(3, x), -12, 12)
    assert abs(overlap) < 1e-10
    norm, _ = quad(lambda x: fock_wavefunction(5, x) ** 2, -12, 12)
    assert norm == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("N", range(11))
def test_wavefunction_recurrence_matches_direct(N):
    x = np.linspace(-8, 8, 161)
    direct = math.pi**-0.25 * np.exp(-x * x / 2) * eval_hermite(N, x) / math.sqrt(2**N * factorial(N))
    assert np.allclose(fock_wavefunction(N, x), direct, atol=1e-10)


def test_displacement_element_values():
    for N in range(5):
        assert displacement_element(N, 0) == pytest.approx(1)
    assert abs(displacement_element(1, np.exp(0.3j))) < 1e-14
    ref = math.exp(-1) * laguerre_l(2, 2.0)
    a = math.sqrt(2) * np.exp(0.7j)
    assert displacement_element(2, a, "laguerre") == pytest.approx(ref, abs=1e-14)
    assert abs(displacement_element(2, a, "integral")) == pytest.approx(abs(ref), abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10), st.floats(0, 6), st.floats(0, 2 * math.pi))
def test_displacement_integral_vs_laguerre(N, r, phi):
    a = r * np.exp(1j * phi)
    assert abs(displacement_element(N, a, "integral")) == pytest.approx(
        abs(displacement_element(N, a, "laguerre")), abs=1e-8
    )


def test_displacement_element_bad_method():
    with pytest.raises(InvalidParameter):
        displacement_element(1, 0.5, "series")


def test_matrices_match_expm():
    dim = 30
    D_ref, S_ref = padded_expm_ops(dim)
    for beta in (0.3 - 0.8j, 1.5 + 0.2j):
        assert np.allclose(displacement_matrix(beta, dim), D_ref(beta), atol=1e-12)
    for eps in (0.1, 0.6, -0.4):
        assert np.allclose(squeeze_matrix(eps, dim), S_ref(eps), atol=1e-12)


def test_displacement_matrix_unitary_columns():
    D = displacement_matrix(1.2 - 0.5j, 120)
    cols = np.sum(np.abs(D[:, :20]) ** 2, axis=0)
    assert np.allclose(cols, 1, atol=1e-6)


def test_displacement_matrix_broadcasts():
    betas = np.array([[0.1, 0.2j], [0, -1]])
    D = displacement_matrix(betas, 8)
    assert D.shape == (2, 2, 8, 8)
    assert np.allclose(D[1, 0], np.eye(8))
    assert np.allclose(D[0, 1], displacement_matrix(0.2j, 8))


def test_fock_operators():
    ops = FockOperators(12)
    a = ops.annihilation()
    assert np.allclose((a @ a.T)[:11, :11] - (a.T @ a)[:11, :11], np.eye(11))
    assert ops.D_matrix(0).shape == (12, 12)
    assert np.allclose(ops.S_matrix(0), np.eye(12))
    with pytest.raises(InvalidParameter):
        FockOperators(1)


def test_squeeze_displace_element_values():
    for eps in (0.2, 1.0):
        assert squeeze_displace_element(0, 0, eps) == pytest.approx(1 / math.sqrt(math.cosh(eps)), abs=1e-10)
        assert squeeze_displace_element(1, 0, eps) == pytest.approx(math.cosh(eps) ** -1.5, abs=1e-10)
    for N in (0, 3):
        assert squeeze_displace_element(N, 0.7 + 0.1j, 0.0) == pytest.approx(displacement_element(N, 0.7 + 0.1j))


@pytest.mark.parametrize("N", [0, 2, 5])
def test_squeeze_displace_linear_in_eps(N):
    alpha = 0.6 - 0.4j
    d0 = displacement_element(N, alpha)
    gaps = [abs(squeeze_displace_element(N, alpha, e, tol=1e-12) - d0) for e in (1e-3, 1e-4)]
    assert gaps[0] / gaps[1] == pytest.approx(10, rel=0.01)


@pytest.mark.parametrize("N", [0, 1, 4, 10])
@pytest.mark.parametrize("eps", [0.05, 0.5, 1.5])
def test_diag_closed_form_vs_matrix(N, eps):
    betas = np.array([0.3 + 0.2j, -1.1 + 0.7j, 2.0 - 1.5j])
    ref = [squeeze_displace_element(N, b, eps, tol=1e-12) for b in betas]
    assert np.allclose(squeeze_displace_diag(N, betas, eps), ref, atol=1e-9)


@pytest.mark.parametrize("eps", [0.0, 0.3, 1.2])
def test_coherent_closed_form_vs_truncation(eps):
    dim = 120
    alpha, beta = 1.3 - 0.6j, 0.4 + 0.9j
    n = np.arange(dim)
    from scipy.special import gammaln

    vec = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) + 1j * n * np.angle(alpha))
    ref = vec.conj() @ squeeze_matrix(eps, dim) @ displacement_matrix(beta, dim) @ vec
    assert coherent_squeeze_displace(alpha, beta, eps) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("nbar", [0.0, 0.3, 1.3811])
@pytest.mark.parametrize("eps", [0.0, 0.27, 1.0, 2.0])
def test_thermal_closed_form_vs_oracles(nbar, eps):
    rng = np.random.default_rng(3)
    betas = 0.7 * (rng.normal(size=30) + 1j * rng.normal(size=30))
    val = thermal_squeeze_displace(nbar, betas, eps)
    assert np.allclose(val, squeeze_displace_thermal_diag(nbar, betas, eps), atol=1e-12)
    if nbar > 0:
        assert np.allclose(val, thermal_chi_pa_quadrature(nbar, betas, eps), atol=1e-9)


def test_thermal_reduces_to_bs_form_without_squeezing():
    x = np.linspace(-4, 4, 9)
    nbar = 0.8
    val = thermal_squeeze_displace(nbar, x / 2, 0.0)
    assert np.allclose(val, np.exp(-(x**2) / 8 * (2 * nbar + 1)))


def test_kernel_integral_examples():
    assert gaussian_weighted_integral_2d(lambda x, y: np.ones(np.broadcast(x, y).shape), 1.7)[0] == pytest.approx(1)
    v, _ = gaussian_weighted_integral_2d(lambda x, y: np.exp(-(x**2 + y**2) / 4), 2.0)
    assert v == pytest.approx(0.5, abs=1e-12)
    v, err = gaussian_weighted_integral_2d(lambda x, y: np.cos(x) + 3 + y, 0.0)
    assert (v, err) == (4.0, 0.0)


@pytest.mark.parametrize("rule", ["gauss-hermite", "adaptive-tensor", "auto"])
def test_kernel_rules_agree(rule):
    f = lambda x, y: np.exp(-(x**2 + 2 * y**2) / 4) * (1 + x * x)  # noqa: E731
    vx, vy = 3.0, 0.2
    exact_x = (1 / math.sqrt(1 + vx / 2)) * (1 + 1 / (1 / vx + 0.5))
    exact_y = 1 / math.sqrt(1 + vy)
    v, _ = gaussian_weighted_integral_2d(f, (vx, vy), QuadratureGrid(rule=rule, domain_radius=20.0))
    assert v == pytest.approx(exact_x * exact_y, rel=1e-9)


def _gauss_moment(p, var):
    # E[x^p] for x ~ N(0, var): var^(p/2) (p-1)!! for even p
    return 0.0 if p % 2 else var ** (p / 2) * math.prod(range(p - 1, 0, -2))


@given(st.integers(0, 15), st.integers(0, 15))
def test_gauss_hermite_exact_on_polynomials(px, py):
    var = 1.3
    # Cauchy-Schwarz bound on the integrand sets the roundoff scale
    scale = math.sqrt(_gauss_moment(2 * px, var) * _gauss_moment(2 * py, var))
    grid = QuadratureGrid(rule="gauss-hermite", nodes_per_axis=16, abs_tol=1e-10 * scale, max_nodes=16)
    v, _ = gaussian_weighted_integral_2d(lambda x, y: x**px * y**py, var, grid)
    ref = _gauss_moment(px, var) * _gauss_moment(py, var)
    assert v == pytest.approx(ref, abs=1e-12 * scale)


def test_grid_validation():
    with pytest.raises(InvalidParameter):
        QuadratureGrid(nodes_per_axis=4)
    with pytest.raises(InvalidParameter):
        QuadratureGrid(rel_tol=0.1)
    with pytest.raises(InvalidParameter):
        gaussian_weighted_integral_2d(lambda x, y: x, -1.0)
