"""Equivalent channel of one teleportation pass: add Gaussian noise, then squeeze.

In phase space the teleported mode obeys

    x_out = (x_in + n_x) / k,      y_out = k (y_in + n_y),

with independent Gaussian noise n_x, n_y of variances ``sigma_sq`` and
``sigma_sq_y``.  For the beam-splitter scheme k = 1 and both variances equal
2((1 - eta^2)/eta^2 + e^{-2s}).  For the amplifier scheme k = g/G and

    sigma_sq   = (1 - eta^2)/(eta^2 G^2) + 2 e^{-2s} g^2/G^2
    sigma_sq_y = (1 - eta^2)/(eta^2 g^2) + 2 e^{-2s} G^2/g^2.

These are exact for the ensemble-averaged output at any finite s.  The
commonly quoted symmetric form uses ``sigma_sq`` for both quadratures; it
is available with ``symmetric=True`` and agrees with the exact one as G/g -> 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ConvergenceFailure, DegenerateGain, InvalidDensityMatrix, InvalidParameter
from .fock_numerics import QuadratureGrid, _axis_rule, displacement_matrix, squeeze_matrix
from .gaussian_core import GainPair, GaussianState, LossParams, _check_mode

__all__ = [
    "SchemeParams",
    "TeleportChannel",
    "make_channel",
    "apply_channel_gaussian",
    "apply_channel_fock",
    "displacement_rule",
]


@dataclass(frozen=True)
class SchemeParams:
    """Mixer choice, detection transmissivity, resource squeezing and PA gain parameter."""

    mixer: Literal["BS", "PA"]
    eta: float = 1.0
    s_channel: float = math.inf
    R: float = 0.0

    def __post_init__(self):
        mixer = self.mixer.upper()
        if mixer not in ("BS", "PA"):
            raise InvalidParameter(f"mixer must be 'BS' or 'PA', got {self.mixer!r}")
        object.__setattr__(self, "mixer", mixer)
        LossParams(self.eta)
        if not (self.s_channel > 0):
            raise InvalidParameter("channel squeezing must be > 0 (or inf)")
        if mixer == "PA":
            GainPair(self.R)

    @property
    def gain(self) -> GainPair:
        return GainPair(self.R)

    @property
    def loss(self) -> LossParams:
        return LossParams(self.eta)

    @property
    def squeeze_residual(self) -> float:
        """e^{-2s}, zero for an ideal resource."""
        return 0.0 if math.isinf(self.s_channel) else math.exp(-2 * self.s_channel)

    def describe(self) -> str:
        s = "inf" if math.isinf(self.s_channel) else f"{self.s_channel:g}"
        if self.mixer == "BS":
            return f"scheme=BS eta={self.eta:g} s_channel={s}"
        return f"scheme=PA eta={self.eta:g} R={self.R:g} s_channel={s}"


@dataclass(frozen=True)
class TeleportChannel:
    k: float
    sigma_sq: float
    sigma_sq_y: float | None = None
    epsilon: float = field(init=False)
    mu: float = field(init=False)
    nu: float = field(init=False)

    def __post_init__(self):
        if not (0 < self.k <= 1):
            raise InvalidParameter(f"squeeze ratio k must lie in (0, 1], got {self.k}")
        if self.sigma_sq_y is None:
            object.__setattr__(self, "sigma_sq_y", self.sigma_sq)
        if self.sigma_sq < 0 or self.sigma_sq_y < 0:
            raise InvalidParameter("noise variances must be >= 0")
        eps = -math.log(self.k)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "mu", math.cosh(eps))
        object.__setattr__(self, "nu", math.sinh(eps))

    @property
    def noise(self) -> tuple[float, float]:
        return self.sigma_sq, self.sigma_sq_y

    @property
    def is_symmetric(self) -> bool:
        return self.sigma_sq == self.sigma_sq_y


def make_channel(p: SchemeParams, symmetric: bool = False) -> TeleportChannel:
    loss = (1 - p.eta**2) / p.eta**2
    resid = p.squeeze_residual
    if p.mixer == "BS":
        return TeleportChannel(1.0, 2 * (loss + resid))
    if p.R == 0:
        raise DegenerateGain("PA with R = 0 has k = g/G = 0")
    G, g = p.gain.G, p.gain.g
    sx = loss / G**2 + 2 * resid * g**2 / G**2
    sy = sx if symmetric else loss / g**2 + 2 * resid * G**2 / g**2
    return TeleportChannel(g / G, sx, sy)


def apply_channel_gaussian(ch: TeleportChannel, st: GaussianState, i: int = 0) -> GaussianState:
    _check_mode(st, i)
    a, b = 2 * i, 2 * i + 1
    cov = st.cov.copy()
    cov[a, a] += ch.sigma_sq
    cov[b, b] += ch.sigma_sq_y
    scale = np.ones(st.mean.size)
    scale[a] = 1 / ch.k
    scale[b] = ch.k
    return GaussianState(st.mean * scale, cov * np.outer(scale, scale))


def _check_density_matrix(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidDensityMatrix("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise InvalidDensityMatrix("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > 1e-8:
        raise InvalidDensityMatrix(f"density matrix has trace {np.trace(rho).real}")
    return rho


def _noise_average(rho: np.ndarray, sx: float, sy: float, n: int, chunk: int = 512) -> np.ndarray:
    """int D((x+iy)/2) rho D^dag G(x, y) dx dy on a tensor Gauss-Hermite rule."""
    x, wx = _axis_rule(sx, n, "gauss-hermite", None)
    y, wy = _axis_rule(sy, n, "gauss-hermite", None)
    betas = (0.5 * (x[:, None] + 1j * y[None, :])).ravel()
    weights = (wx[:, None] * wy[None, :]).ravel()
    out = np.zeros_like(rho)
    for start in range(0, betas.size, chunk):
        D = displacement_matrix(betas[start : start + chunk], rho.shape[0])
        w = weights[start : start + chunk]
        out += np.einsum("k,kab,bc,kdc->ad", w, D, rho, D.conj(), optimize=True)
    return out


def apply_channel_fock(
    ch: TeleportChannel,
    rho_in: np.ndarray,
    dim: int | None = None,
    grid: QuadratureGrid | None = None,
    tol: float = 1e-6,
) -> np.ndarray:
    """Operator-sum form of the channel on a truncated density matrix.

    rho_out = int S(eps) D(beta) rho D^dag(beta) S^dag(eps) G(x, y) dx dy with
    beta = (x + iy)/2, evaluated by Gauss-Hermite quadrature over the noise
    kernel.  ``rho_in`` is zero-padded to ``dim`` levels.  Node counts double
    until the output changes by less than ``tol`` entrywise.
    """
    rho_in = _check_density_matrix(rho_in)
    dim = max(dim or rho_in.shape[0], rho_in.shape[0])
    rho = np.zeros((dim, dim), dtype=complex)
    rho[: rho_in.shape[0], : rho_in.shape[0]] = rho_in
    sx, sy = ch.noise
    if sx == 0 and sy == 0:
        averaged = rho
    else:
        n = max(8, (grid.nodes_per_axis if grid else 32) // 2)
        prev = _noise_average(rho, sx, sy, n)
        while True:
            n *= 2
            averaged = _noise_average(rho, sx, sy, n)
            delta = np.abs(averaged - prev).max()
            if delta < tol:
                break
            if n >= 256:
                raise ConvergenceFailure(f"noise average not converged (last change {delta:.2e})")
            prev = averaged
    if ch.epsilon != 0:
        S = squeeze_matrix(ch.epsilon, dim)
        averaged = S @ averaged @ S.conj().T
    return 0.5 * (averaged + averaged.conj().T)


def displacement_rule(p: SchemeParams, outcome: tuple[float, float]) -> tuple[float, float]:
    """Feed-forward displacement of the receiving mode for homodyne readings (iX, iY).

    BS: (sqrt2 iX / eta, -sqrt2 iY / eta).  PA: (iX / (eta g), -iY / (eta G)).
    """
    ix, iy = outcome
    if p.mixer == "BS":
        c = math.sqrt(2) / p.eta
        return c * ix, -c * iy
    if p.R == 0:
        raise DegenerateGain("PA with R = 0 has no feed-forward rule")
    return ix / (p.eta * p.gain.g), -iy / (p.eta * p.gain.G)
