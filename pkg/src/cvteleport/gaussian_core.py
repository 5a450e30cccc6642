"""Multimode Gaussian states in quadrature form and the linear optics acting on them.

Quadratures are X = a + a^dagger and Y = (a - a^dagger)/j, so the vacuum has unit
variance in each.  A state of n modes stores a mean vector ordered
(x1, y1, x2, y2, ...) and the symmetric 2n x 2n covariance matrix.  Every
operation returns a new state; nothing is mutated in place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import (
    DegenerateMarginal,
    InvalidModePair,
    InvalidParameter,
    NonGaussianInput,
)

__all__ = [
    "GaussianState",
    "GainPair",
    "BeamSplitterParams",
    "LossParams",
    "InputSpec",
    "vacuum",
    "prepare_state",
    "tensor",
    "apply_bs",
    "apply_pa",
    "apply_loss",
    "displace",
    "conditioning_gain",
    "homodyne_condition",
    "quadrature_stats",
    "mean_photon",
    "symplectic_form",
    "bs_matrix",
    "pa_matrix",
]

SYM_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size % 2 or cov.shape != (mean.size, mean.size):
            raise InvalidParameter(
                f"mean of length {mean.size} does not fit covariance of shape {cov.shape}"
            )
        cov = 0.5 * (cov + cov.T)
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def mode_cov(self, i: int) -> np.ndarray:
        """2x2 covariance block of mode ``i``."""
        _check_mode(self, i)
        return self.cov[2 * i : 2 * i + 2, 2 * i : 2 * i + 2].copy()

    def mode_mean(self, i: int) -> np.ndarray:
        _check_mode(self, i)
        return self.mean[2 * i : 2 * i + 2].copy()

    def is_physical(self, tol: float = PSD_TOL) -> bool:
        """Positive semidefinite and consistent with the uncertainty relation."""
        if np.linalg.eigvalsh(self.cov).min() < -tol:
            return False
        omega = symplectic_form(self.n_modes)
        return np.linalg.eigvalsh(self.cov + 1j * omega).min() >= -tol


@dataclass(frozen=True)
class GainPair:
    """Amplitude gains of a parametric amplifier, G = cosh R and g = sinh R."""

    R: float
    G: float = field(init=False)
    g: float = field(init=False)

    def __post_init__(self):
        if not math.isfinite(self.R) or self.R < 0:
            raise InvalidParameter(f"gain parameter R must be finite and >= 0, got {self.R}")
        object.__setattr__(self, "G", math.cosh(self.R))
        object.__setattr__(self, "g", math.sinh(self.R))

    @classmethod
    def from_sum(cls, total: float) -> "GainPair":
        """Gain pair with G + g = ``total`` (so R = ln total)."""
        if total < 1:
            raise InvalidParameter("G + g must be >= 1")
        return cls(math.log(total))


@dataclass(frozen=True)
class BeamSplitterParams:
    t: float = 1 / math.sqrt(2)
    r: float = 1 / math.sqrt(2)

    def __post_init__(self):
        if not (0 <= self.t <= 1 and 0 <= self.r <= 1):
            raise InvalidParameter("t and r must lie in [0, 1]")
        if abs(self.t**2 + self.r**2 - 1) > 1e-12:
            raise InvalidParameter(f"t^2 + r^2 = {self.t**2 + self.r**2} != 1")

    @classmethod
    def from_transmittance(cls, t: float) -> "BeamSplitterParams":
        return cls(t, math.sqrt(max(0.0, 1 - t * t)))


@dataclass(frozen=True)
class LossParams:
    """Amplitude transmissivity of a loss beam splitter (intensity transmission is eta**2)."""

    eta: float

    def __post_init__(self):
        if not (0 < self.eta <= 1):
            raise InvalidParameter(f"eta must lie in (0, 1], got {self.eta}")


@dataclass(frozen=True)
class InputSpec:
    """State to be teleported: ``coherent``, ``fock``, ``thermal`` or ``epr``."""

    tag: Literal["coherent", "fock", "thermal", "epr"]
    alpha: complex = 0j
    N: int = 0
    nbar: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        if self.tag not in ("coherent", "fock", "thermal", "epr"):
            raise InvalidParameter(f"unknown input tag {self.tag!r}")
        if self.N < 0 or int(self.N) != self.N:
            raise InvalidParameter("Fock number N must be a non-negative integer")
        if self.nbar < 0:
            raise InvalidParameter("thermal mean photon number must be >= 0")

    @classmethod
    def coherent(cls, alpha: complex) -> "InputSpec":
        return cls("coherent", alpha=complex(alpha))

    @classmethod
    def fock(cls, N: int) -> "InputSpec":
        return cls("fock", N=int(N))

    @classmethod
    def thermal(cls, nbar: float) -> "InputSpec":
        if nbar < 0:
            raise InvalidParameter("thermal mean photon number must be >= 0")
        return cls("thermal", nbar=float(nbar))

    @classmethod
    def epr(cls, s: float) -> "InputSpec":
        return cls("epr", s=float(s))

    def describe(self) -> str:
        if self.tag == "coherent":
            return f"coherent(alpha={self.alpha.real:g}{self.alpha.imag:+g}j)"
        if self.tag == "fock":
            return f"fock(N={self.N})"
        if self.tag == "thermal":
            return f"thermal(nbar={self.nbar:g})"
        return f"epr(s={self.s:g})"


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _check_mode(st: GaussianState, i: int) -> None:
    if not (0 <= i < st.n_modes):
        raise InvalidModePair(f"mode {i} out of range for a {st.n_modes}-mode state")


def _check_pair(st: GaussianState, i: int, j: int) -> None:
    if i == j:
        raise InvalidModePair(f"two-mode element needs distinct modes, got ({i}, {j})")
    _check_mode(st, i)
    _check_mode(st, j)


def _congruence(st: GaussianState, M: np.ndarray) -> GaussianState:
    return GaussianState(M @ st.mean, M @ st.cov @ M.T)


def vacuum(n_modes: int = 1) -> GaussianState:
    if n_modes < 1:
        raise InvalidParameter("need at least one mode")
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def prepare_state(spec: InputSpec | int) -> GaussianState:
    """Gaussian state for ``spec``; an integer ``n`` gives the n-mode vacuum."""
    if isinstance(spec, (int, np.integer)):
        return vacuum(int(spec))
    if spec.tag == "fock":
        raise NonGaussianInput("Fock states have no Gaussian representation")
    if spec.tag == "coherent":
        a = complex(spec.alpha)
        return GaussianState([2 * a.real, 2 * a.imag], np.eye(2))
    if spec.tag == "thermal":
        if spec.nbar < 0:
            raise InvalidParameter("thermal mean photon number must be >= 0")
        return GaussianState(np.zeros(2), (2 * spec.nbar + 1) * np.eye(2))
    # two-mode squeezed state: x1 + x2 and y1 - y2 have variance 2 e^{-2s}
    c, s = math.cosh(2 * spec.s), math.sinh(2 * spec.s)
    cov = np.array(
        [
            [c, 0, -s, 0],
            [0, c, 0, s],
            [-s, 0, c, 0],
            [0, s, 0, c],
        ]
    )
    return GaussianState(np.zeros(4), cov)


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    n = a.cov.shape[0]
    m = b.cov.shape[0]
    cov = np.zeros((n + m, n + m))
    cov[:n, :n] = a.cov
    cov[n:, n:] = b.cov
    return GaussianState(np.concatenate([a.mean, b.mean]), cov)


def bs_matrix(n_modes: int, i: int, j: int, p: BeamSplitterParams) -> np.ndarray:
    """Phase-space matrix of X_i -> t X_i + r X_j, X_j -> t X_j - r X_i (same for Y)."""
    M = np.eye(2 * n_modes)
    for q in (0, 1):
        a, b = 2 * i + q, 2 * j + q
        M[a, a], M[a, b] = p.t, p.r
        M[b, b], M[b, a] = p.t, -p.r
    return M


def pa_matrix(n_modes: int, i: int, j: int, gp: GainPair) -> np.ndarray:
    """Phase-space matrix of the two-mode amplifier: X mixes with +g, Y with -g."""
    M = np.eye(2 * n_modes)
    for q, sign in ((0, 1.0), (1, -1.0)):
        a, b = 2 * i + q, 2 * j + q
        M[a, a], M[a, b] = gp.G, sign * gp.g
        M[b, b], M[b, a] = gp.G, sign * gp.g
    return M


def apply_bs(st: GaussianState, i: int, j: int, p: BeamSplitterParams) -> GaussianState:
    _check_pair(st, i, j)
    return _congruence(st, bs_matrix(st.n_modes, i, j, p))


def apply_pa(st: GaussianState, i: int, j: int, gp: GainPair) -> GaussianState:
    _check_pair(st, i, j)
    return _congruence(st, pa_matrix(st.n_modes, i, j, gp))


def apply_loss(st: GaussianState, i: int, p: LossParams | float) -> GaussianState:
    """Mix mode ``i`` with vacuum on a beam splitter of amplitude transmissivity eta."""
    eta = p.eta if isinstance(p, LossParams) else LossParams(float(p)).eta
    _check_mode(st, i)
    sl = slice(2 * i, 2 * i + 2)
    scale = np.ones(st.mean.size)
    scale[sl] = eta
    mean = st.mean * scale
    cov = st.cov * np.outer(scale, scale)
    cov[sl, sl] += (1 - eta * eta) * np.eye(2)
    return GaussianState(mean, cov)


def displace(st: GaussianState, i: int, dx: float, dy: float) -> GaussianState:
    _check_mode(st, i)
    mean = st.mean.copy()
    mean[2 * i] += dx
    mean[2 * i + 1] += dy
    return GaussianState(mean, st.cov)


def _quad_index(i: int, quad: str) -> int:
    q = quad.upper()
    if q not in ("X", "Y"):
        raise InvalidParameter(f"quadrature must be 'X' or 'Y', got {quad!r}")
    return 2 * i + (q == "Y")


def conditioning_gain(st: GaussianState, i: int, quad: str):
    """Linear pieces of homodyne conditioning on one quadrature.

    Returns ``(marginal_mean, marginal_var, gain, cond_cov)`` where the
    conditional mean of the remaining quadratures is
    ``rest_mean + gain * (value - marginal_mean)`` and ``cond_cov`` does not
    depend on the outcome.
    """
    _check_mode(st, i)
    k = _quad_index(i, quad)
    var = float(st.cov[k, k])
    if var <= 1e-300:
        raise DegenerateMarginal(f"quadrature {quad} of mode {i} has variance {var}")
    keep = np.r_[0 : 2 * i, 2 * i + 2 : st.mean.size]
    cross = st.cov[keep, k]
    gain = cross / var
    cond_cov = st.cov[np.ix_(keep, keep)] - np.outer(cross, cross) / var
    return float(st.mean[k]), var, gain, cond_cov


def homodyne_condition(
    st: GaussianState, i: int, quad: str, value: float
) -> tuple[float, float, GaussianState]:
    """Measure quadrature ``quad`` of mode ``i`` with outcome ``value``.

    The measured mode is removed from the returned conditional state.  The
    marginal (mean, variance) is the outcome distribution for sampling.
    """
    if st.n_modes < 2:
        raise InvalidModePair("homodyne conditioning needs at least one unmeasured mode")
    m, var, gain, cond_cov = conditioning_gain(st, i, quad)
    keep = np.r_[0 : 2 * i, 2 * i + 2 : st.mean.size]
    cond_mean = st.mean[keep] + gain * (value - m)
    return m, var, GaussianState(cond_mean, cond_cov)


def quadrature_stats(st: GaussianState, coeffs) -> tuple[float, float]:
    c = np.asarray(coeffs, dtype=float)
    if c.shape != st.mean.shape:
        raise InvalidParameter(f"need {st.mean.size} coefficients, got {c.size}")
    return float(c @ st.mean), float(c @ st.cov @ c)


def mean_photon(st: GaussianState, i: int) -> float:
    """<a^dagger a> of mode ``i``."""
    c = st.mode_cov(i)
    m = st.mode_mean(i)
    return float((c[0, 0] + c[1, 1] + m @ m - 2) / 4)
