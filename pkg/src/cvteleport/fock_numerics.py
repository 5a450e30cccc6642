"""Special functions, Fock-basis operator matrices and Gaussian-weighted quadrature.

Displacement and squeeze matrices are built element by element from closed
forms (generalised Laguerre polynomials for D, the normal-ordered
disentangling of S), so truncating to ``dim`` levels only drops rows and
columns; the retained entries are exact.  Matrix elements of S(eps) D(beta)
between number states are also available through a coherent-state generating
function, which needs no truncation at all and is what the fidelity
integrals use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal

import numpy as np
from scipy.special import comb, eval_genlaguerre, gammaln, roots_hermite, roots_legendre

from .errors import ConvergenceFailure, InvalidParameter

__all__ = [
    "hermite_h",
    "fock_wavefunction",
    "laguerre_l",
    "displacement_matrix",
    "squeeze_matrix",
    "FockOperators",
    "displacement_element",
    "squeeze_displace_element",
    "squeeze_displace_diag",
    "squeeze_displace_thermal_diag",
    "thermal_squeeze_displace",
    "coherent_squeeze_displace",
    "QuadratureGrid",
    "gaussian_weighted_integral_2d",
]

DEFAULT_DIM = 64
MAX_DIM = 256


def hermite_h(N: int, x):
    """Physicists' Hermite polynomial H_N(x) by the three-term recurrence."""
    if N < 0:
        raise InvalidParameter("Hermite order must be >= 0")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if N == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2 * x
    for n in range(1, N):
        h_prev, h = h, 2 * x * h - 2 * n * h_prev
    return h if h.ndim else float(h)


def fock_wavefunction(N: int, x):
    """Normalised number-state wavefunction pi^{-1/4} e^{-x^2/2} H_N(x) / sqrt(2^N N!).

    Uses the normalised recurrence, which never forms H_N or N! and so does
    not overflow for large N.
    """
    if N < 0:
        raise InvalidParameter("Fock number must be >= 0")
    x = np.asarray(x, dtype=float)
    psi_prev = np.pi**-0.25 * np.exp(-0.5 * x * x)
    if N == 0:
        return psi_prev if psi_prev.ndim else float(psi_prev)
    psi = math.sqrt(2.0) * x * psi_prev
    for n in range(1, N):
        psi_prev, psi = psi, math.sqrt(2.0 / (n + 1)) * x * psi - math.sqrt(n / (n + 1)) * psi_prev
    return psi if psi.ndim else float(psi)


def laguerre_l(N: int, x):
    return eval_genlaguerre(N, 0, x)


def displacement_matrix(beta, dim: int) -> np.ndarray:
    """<m|D(beta)|n> for m, n < dim; broadcasts over an array of ``beta``.

    Output shape is ``beta.shape + (dim, dim)``.
    """
    beta = np.asarray(beta, dtype=complex)
    m = np.arange(dim)[:, None]
    n = np.arange(dim)[None, :]
    lo = np.minimum(m, n)
    k = np.abs(m - n)
    b = beta[..., None, None]
    x = np.abs(b) ** 2
    # D[m,n] = sqrt(lo!/hi!) * z^k * e^{-x/2} L_lo^{(k)}(x), z = beta (m>=n) or -beta* (m<n)
    z = np.where(m >= n, b, -np.conj(b))
    lag = eval_genlaguerre(lo, k, x)
    logmag = 0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1)) - 0.5 * x
    with np.errstate(divide="ignore", invalid="ignore"):
        logz = np.where(k > 0, k * np.log(np.abs(z)), 0.0)
        phase = np.where(k > 0, np.exp(1j * k * np.angle(z)), 1.0)
        out = np.sign(lag) * np.exp(logmag + logz + np.log(np.abs(lag))) * phase
    out = np.where(np.isfinite(out), out, 0.0)
    # beta = 0 gives log(0) above
    if np.any(x == 0):
        eye = np.broadcast_to(np.eye(dim), out.shape)
        out = np.where(x == 0, eye, out)
    return out


@lru_cache(maxsize=64)
def _squeeze_matrix_cached(eps: float, dim: int) -> np.ndarray:
    t = math.tanh(eps)
    lam = 1.0 / math.cosh(eps)
    idx = np.arange(dim)
    lf = gammaln(idx + 1)
    # E[m, l] = <m| exp(t a^dag^2 / 2) |l> = (t/2)^p / p! * sqrt(m!/l!),  m = l + 2p
    E = np.zeros((dim, dim))
    for p in range(0, (dim + 1) // 2):
        l = idx[: dim - 2 * p]
        if t == 0 and p > 0:
            break
        logv = (p * math.log(abs(t) / 2) if p else 0.0) - gammaln(p + 1) + 0.5 * (lf[l + 2 * p] - lf[l])
        E[l + 2 * p, l] = (np.sign(t) ** p) * np.exp(logv)
    # exp(-t a^2 / 2) is the transpose of exp(-t a^dag^2 / 2); flip the sign of odd powers
    p_of = (idx[:, None] - idx[None, :]) // 2
    E_minus = np.where(p_of % 2 == 1, -E, E).T
    S = (lam**0.5) * (E * lam ** idx[None, :]) @ E_minus
    S.flags.writeable = False
    return S


def squeeze_matrix(eps: float, dim: int) -> np.ndarray:
    """<m|S(eps)|n> for S(eps) = exp[eps (a^dag^2 - a^2) / 2], m, n < dim."""
    return _squeeze_matrix_cached(float(eps), int(dim)).copy()


@dataclass(frozen=True)
class FockOperators:
    """Truncated displacement and squeeze operators on ``dim`` number states."""

    dim: int = DEFAULT_DIM

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidParameter("truncation dimension must be >= 2")

    def D_matrix(self, alpha) -> np.ndarray:
        return displacement_matrix(alpha, self.dim)

    def S_matrix(self, epsilon: float) -> np.ndarray:
        return squeeze_matrix(epsilon, self.dim)

    def annihilation(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.dim)), 1)


def displacement_element(
    N: int, alpha: complex, method: Literal["integral", "laguerre"] = "laguerre"
) -> complex:
    """<N|D(alpha)|N>.

    ``laguerre`` evaluates e^{-|alpha|^2/2} L_N(|alpha|^2).  ``integral``
    computes the overlap in the position representation,
    int f_N(u + q0/2) f_N(u - q0/2) e^{i p0 u} du with q0 = sqrt2 Re alpha and
    p0 = sqrt2 Im alpha, by Gauss-Hermite quadrature with node doubling.
    """
    if N < 0:
        raise InvalidParameter("Fock number must be >= 0")
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    if method == "laguerre":
        return complex(math.exp(-0.5 * x) * laguerre_l(N, x))
    if method != "integral":
        raise InvalidParameter(f"unknown method {method!r}")
    q0 = math.sqrt(2) * alpha.real
    p0 = math.sqrt(2) * alpha.imag
    a = 0.5 * q0
    norm = math.exp(-a * a - N * math.log(2) - gammaln(N + 1)) / math.sqrt(math.pi)
    prev = None
    for n_nodes in (64, 128, 256, 512):
        u, w = roots_hermite(n_nodes)
        # e^{-u^2} weight absorbs the product of the two Gaussian envelopes
        g = hermite_h(N, u + a) * hermite_h(N, u - a) * np.exp(1j * p0 * u)
        val = norm * np.sum(w * g)
        if prev is not None and abs(val - prev) < 1e-13:
            return complex(val)
        prev = val
    raise ConvergenceFailure(f"position integral for N={N}, alpha={alpha} did not converge")


def squeeze_displace_element(
    N: int, alpha: complex, epsilon: float, dim: int | None = None, tol: float = 1e-8
) -> complex:
    """<N|S(epsilon) D(alpha)|N> by truncated matrix product with a doubling gate."""
    if N < 0:
        raise InvalidParameter("Fock number must be >= 0")
    dim = max(dim or DEFAULT_DIM, 2 * N + 16)
    prev = None
    while dim <= 4 * MAX_DIM:
        row = squeeze_matrix(epsilon, dim)[N, :]
        col = displacement_matrix(alpha, dim)[:, N]
        val = complex(row @ col)
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        dim *= 2
    raise ConvergenceFailure(
        f"<{N}|S D|{N}> not converged by dim {dim // 2} (eps={epsilon}, alpha={alpha})"
    )


def _sd_generating_coeffs(beta, epsilon: float):
    """Quadratic exponent of the generating function of <m|S D(beta)|n>.

    sum_{m,n} a^m c^n <m|S D|n> / sqrt(m! n!)
        = pref * exp(qa a + qaa a^2 + qc c + qcc c^2 + qac a c)
    """
    beta = np.asarray(beta, dtype=complex)
    t = math.tanh(epsilon)
    ch = math.cosh(epsilon)
    log_pref = -0.5 * np.abs(beta) ** 2 - 0.5 * t * beta**2 - 0.5 * math.log(ch)
    qa = beta / ch
    qc = -np.conj(beta) - t * beta
    return log_pref, qa, 0.5 * t, qc, -0.5 * t, 1.0 / ch


def _scaled_quadratic_series(q, p, order: int):
    """sqrt(k!) times the Taylor coefficients of exp(q z + p z^2), k = 0..order."""
    q = np.asarray(q, dtype=complex)
    coeffs = [np.ones_like(q)]
    if order >= 1:
        coeffs.append(q.copy())
    for k in range(1, order):
        coeffs.append((q * coeffs[k] + 2 * p * math.sqrt(k) * coeffs[k - 1]) / math.sqrt(k + 1))
    return coeffs


def _diag_from_series(n: int, A, C, qac):
    total = np.zeros(np.shape(A[0]), dtype=complex)
    for j in range(n + 1):
        total = total + comb(n, j) * qac**j * A[n - j] * C[n - j]
    return total


def squeeze_displace_diag(N: int, beta, epsilon: float):
    """<N|S(epsilon) D(beta)|N> in closed form, vectorised over ``beta``.

    Exact for any squeezing: the coefficient of a^N c^N in the generating
    function exp(quadratic) is a finite sum, so no Fock truncation enters.
    """
    if N < 0:
        raise InvalidParameter("Fock number must be >= 0")
    log_pref, qa, qaa, qc, qcc, qac = _sd_generating_coeffs(beta, epsilon)
    A = _scaled_quadratic_series(qa, qaa, N)
    C = _scaled_quadratic_series(qc, qcc, N)
    return np.exp(log_pref) * _diag_from_series(N, A, C, qac)


def squeeze_displace_thermal_diag(nbar: float, beta, epsilon: float, n_max: int | None = None):
    """Tr[S(epsilon) D(beta) rho_th] as a sum over the geometric photon distribution.

    Number-basis oracle for :func:`thermal_squeeze_displace`.  Reliable only
    for moderate |beta| (<~ 2) and nbar/(1+nbar) * (sech eps + tanh eps) < 1;
    outside that the terms grow geometrically and the sum is all cancellation.
    """
    beta = np.asarray(beta, dtype=complex)
    if nbar == 0:
        return squeeze_displace_diag(0, beta, epsilon)
    ratio = nbar / (1 + nbar)
    if n_max is None:
        n_max = int(math.ceil(math.log(1e-17) / math.log(ratio))) + 1
    log_pref, qa, qaa, qc, qcc, qac = _sd_generating_coeffs(beta, epsilon)
    A = _scaled_quadratic_series(qa, qaa, n_max)
    C = _scaled_quadratic_series(qc, qcc, n_max)
    out = np.zeros(beta.shape, dtype=complex)
    for n in range(n_max + 1):
        out = out + ratio**n * _diag_from_series(n, A, C, qac)
    return np.exp(log_pref) * out / (1 + nbar)


def thermal_squeeze_displace(nbar: float, beta, epsilon: float):
    """Tr[S(epsilon) D(beta) rho_th] in closed form.

    The coherent-state generating function is averaged over the Gaussian
    P function exp(-|alpha|^2/nbar)/(pi nbar); with alpha = u + iv this is a
    2-D Gaussian integral whose matrix has the real determinant 4(kappa^2 + t^2).
    """
    beta = np.asarray(beta, dtype=complex)
    if nbar < 0:
        raise InvalidParameter("mean photon number must be >= 0")
    if nbar == 0:
        return squeeze_displace_diag(0, beta, epsilon)
    log_pref, qa, qaa, qc, qcc, qac = _sd_generating_coeffs(beta, epsilon)
    kappa = qac - 1 - 1 / nbar
    m11 = -2 * (qaa + qcc + kappa)
    m22 = -2 * (kappa - qaa - qcc)
    m12 = -2j * (qcc - qaa)
    det = m11 * m22 - m12 * m12
    b1 = qa + qc
    b2 = 1j * (qc - qa)
    quad = (m22 * b1 * b1 - 2 * m12 * b1 * b2 + m11 * b2 * b2) / det
    return np.exp(log_pref + 0.5 * quad) * 2 / (nbar * np.sqrt(det))


def coherent_squeeze_displace(alpha, beta, epsilon: float):
    """<alpha|S(epsilon) D(beta)|alpha> in closed form; broadcasts over alpha and beta."""
    alpha = np.asarray(alpha, dtype=complex)
    log_pref, qa, qaa, qc, qcc, qac = _sd_generating_coeffs(beta, epsilon)
    a = np.conj(alpha)
    c = alpha
    expo = log_pref + qa * a + qaa * a * a + qc * c + qcc * c * c + qac * a * c - np.abs(alpha) ** 2
    return np.exp(expo)


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product rule for integrals against a centred 2-D Gaussian kernel.

    ``gauss-hermite`` scales Hermite nodes to the kernel; ``adaptive-tensor``
    uses Gauss-Legendre nodes on a box of half-width ``domain_radius`` with the
    kernel as an explicit weight, which is the right choice when the kernel
    is much wider than the integrand.  ``auto`` picks per axis.
    """

    rule: Literal["gauss-hermite", "adaptive-tensor", "auto"] = "auto"
    nodes_per_axis: int = 80
    domain_radius: float | None = None
    rel_tol: float = 1e-6
    abs_tol: float = 1e-12
    max_nodes: int = 1280

    def __post_init__(self):
        if self.nodes_per_axis < 8:
            raise InvalidParameter("need at least 8 nodes per axis")
        if not (0 < self.rel_tol <= 1e-3):
            raise InvalidParameter("rel_tol must lie in (0, 1e-3]")


def _axis_rule(var: float, n: int, rule: str, radius: float | None):
    if var == 0:
        return np.zeros(1), np.ones(1)
    std = math.sqrt(var)
    use_gh = rule == "gauss-hermite" or (
        rule == "auto" and (radius is None or 8 * std <= radius)
    )
    if use_gh:
        t, w = roots_hermite(n)
        return math.sqrt(2) * std * t, w / math.sqrt(math.pi)
    L = radius if radius is not None else 10 * std
    L = min(L, 12 * std)
    t, w = roots_legendre(n)
    x = L * t
    dens = np.exp(-0.5 * x * x / var) / math.sqrt(2 * math.pi * var)
    return x, L * w * dens


def gaussian_weighted_integral_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    sigma_sq,
    grid: QuadratureGrid | None = None,
) -> tuple[float, float]:
    """Integrate f(x, y) against the normalised Gaussian of variance ``sigma_sq`` per axis.

    ``sigma_sq`` may be a pair (var_x, var_y) for an anisotropic kernel.  ``f``
    must accept broadcast arrays.  The rule is refined by doubling the nodes
    per axis until two successive values agree; the last difference is
    returned as the error estimate.
    """
    grid = grid or QuadratureGrid()
    vx, vy = (sigma_sq, sigma_sq) if np.isscalar(sigma_sq) else sigma_sq
    vx, vy = float(vx), float(vy)
    if vx < 0 or vy < 0:
        raise InvalidParameter("kernel variance must be >= 0")
    if vx == 0 and vy == 0:
        return float(np.real(f(np.zeros(1), np.zeros(1)))[0]), 0.0

    def evaluate(n):
        x, wx = _axis_rule(vx, n, grid.rule, grid.domain_radius)
        y, wy = _axis_rule(vy, n, grid.rule, grid.domain_radius)
        vals = np.real(f(x[:, None], y[None, :]))
        return float(wx @ vals @ wy)

    n = max(8, grid.nodes_per_axis // 2)
    prev = evaluate(n)
    while 2 * n <= grid.max_nodes:
        n *= 2
        val = evaluate(n)
        err = abs(val - prev)
        if err <= max(grid.rel_tol * abs(val), grid.abs_tol):
            return val, err
        prev = val
    raise ConvergenceFailure(
        f"2-D quadrature not converged at {n} nodes per axis (last change {err:.3e})"
    )
