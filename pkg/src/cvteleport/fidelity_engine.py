"""Entanglement fidelity of the teleportation channel for coherent, Fock and thermal inputs.

F_e = int |chi(x, y)|^2 G(x, y) dx dy, where chi is Tr[S(eps) D((x+iy)/2) rho]
(eps = 0 for the beam-splitter scheme) and G is the channel's Gaussian noise
kernel.  Closed forms are used where they exist; everything else goes
through the Gaussian-weighted quadrature in :mod:`fock_numerics`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import roots_hermite

from .channel_model import SchemeParams, TeleportChannel, apply_channel_fock, make_channel
from .errors import ConvergenceFailure, InvalidParameter, NoClosedForm, UseEntanglementMetrics
from .fock_numerics import (
    QuadratureGrid,
    coherent_squeeze_displace,
    gaussian_weighted_integral_2d,
    laguerre_l,
    squeeze_displace_diag,
    thermal_squeeze_displace,
)
from .gaussian_core import InputSpec

__all__ = [
    "FidelityResult",
    "chi_sq_bs",
    "chi_sq_pa",
    "entanglement_fidelity",
    "closed_form_fidelity",
    "fidelity_via_fock_oracle",
    "thermal_chi_pa_quadrature",
    "default_oracle_dim",
]

Method = Literal["closed-form", "quadrature", "fock-oracle"]

THERMAL_INNER_NODES = 40


@dataclass(frozen=True)
class FidelityResult:
    value: float
    method: Method
    err_estimate: float = 0.0

    def __float__(self):
        return self.value


def _check_spec(spec: InputSpec) -> None:
    if spec.tag == "epr":
        raise UseEntanglementMetrics("use entanglement_metrics for EPR inputs")


def chi_sq_bs(spec: InputSpec, x, y):
    """|Tr[D((x + iy)/2) rho]|^2 for the input state."""
    _check_spec(spec)
    u = (np.asarray(x, dtype=float) ** 2 + np.asarray(y, dtype=float) ** 2) / 4
    if spec.tag == "coherent":
        return np.exp(-u)
    if spec.tag == "thermal":
        return np.exp(-u * (2 * spec.nbar + 1))
    return np.exp(-u) * laguerre_l(spec.N, u) ** 2


def thermal_chi_pa_quadrature(nbar: float, beta, epsilon: float, chunk: int = 2048):
    """Average of <alpha|S D(beta)|alpha> over the thermal P function by Gauss-Hermite in alpha.

    Independent check on :func:`thermal_squeeze_displace`.
    """
    beta = np.asarray(beta, dtype=complex)
    t, w = roots_hermite(THERMAL_INNER_NODES)
    a = math.sqrt(nbar) * t
    alphas = (a[:, None] + 1j * a[None, :]).ravel()
    weights = ((w[:, None] * w[None, :]) / math.pi).ravel()
    flat = beta.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for start in range(0, flat.size, chunk):
        b = flat[start : start + chunk, None]
        out[start : start + chunk] = coherent_squeeze_displace(alphas[None, :], b, epsilon) @ weights
    return out.reshape(beta.shape)


def chi_sq_pa(spec: InputSpec, x, y, epsilon: float):
    """|Tr[S(eps) D((x + iy)/2) rho]|^2 for the input state."""
    _check_spec(spec)
    if epsilon < 0:
        raise InvalidParameter("squeeze parameter must be >= 0")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    beta = 0.5 * (x + 1j * y)
    if spec.tag == "coherent":
        chi = coherent_squeeze_displace(spec.alpha, beta, epsilon)
    elif spec.tag == "fock":
        chi = squeeze_displace_diag(spec.N, beta, epsilon)
    else:
        chi = thermal_squeeze_displace(spec.nbar, beta, epsilon)
    return np.abs(chi) ** 2


def _integrand_extent(spec: InputSpec, epsilon: float) -> float:
    """Radius in (x, y) beyond which |chi|^2 is negligible (generous)."""
    if spec.tag == "fock":
        r0 = 2 * math.sqrt(4 * spec.N + 40)
    else:
        r0 = 13.0
    grow = math.exp(epsilon)
    shift = 0.0
    if spec.tag == "coherent":
        shift = 3 * abs(spec.alpha) * (grow - 1)
    elif spec.tag == "thermal":
        shift = 6 * math.sqrt(spec.nbar) * (grow - 1)
    return r0 * grow + shift


def _fidelity_closed(ch: TeleportChannel, spec: InputSpec, form: str) -> float:
    sx = ch.sigma_sq
    if ch.epsilon == 0:
        if not ch.is_symmetric:
            raise NoClosedForm("anisotropic noise without squeezing")
        if spec.tag == "coherent":
            return 1 / (1 + sx / 2)
        if spec.tag == "thermal":
            return 1 / (1 + sx * (2 * spec.nbar + 1) / 2)
        raise NoClosedForm(f"no closed form for {spec.describe()} in the BS scheme")
    if spec.tag != "coherent":
        raise NoClosedForm(f"no closed form for {spec.describe()} in the PA scheme")
    a2 = abs(spec.alpha) ** 2
    mu, nu = ch.mu, ch.nu
    if form == "auto":
        form = "lossless" if sx == 0 and ch.sigma_sq_y == 0 else "large-gain"
    if form == "lossless":
        if sx != 0 or ch.sigma_sq_y != 0:
            raise NoClosedForm("lossless form needs a noiseless channel")
        return math.exp(-2 * (mu - 1) * a2 / mu) / mu
    if form == "large-gain":
        d = 1 + sx / 2
        return math.exp(-a2 * (nu / mu) ** 2 / d) / d
    raise InvalidParameter(f"unknown closed form {form!r}")


def closed_form_fidelity(
    p: SchemeParams,
    spec: InputSpec,
    form: Literal["auto", "large-gain", "lossless"] = "auto",
    symmetric: bool = False,
) -> FidelityResult:
    """Closed-form fidelities.

    BS: coherent 1/(1 + s2/2), thermal 1/(1 + s2 (2 nbar + 1)/2).
    PA, coherent: ``lossless`` gives exp[-2 (mu-1) |alpha|^2 / mu] / mu (exact
    at eta = 1, infinite s); ``large-gain`` gives
    exp[-|alpha|^2 (nu/mu)^2 / (1 + s2/2)] / (1 + s2/2), an approximation for
    G >> 1 that uses the x-quadrature noise.
    """
    _check_spec(spec)
    ch = make_channel(p, symmetric=symmetric)
    return FidelityResult(_fidelity_closed(ch, spec, form), "closed-form", 0.0)


def entanglement_fidelity(
    p: SchemeParams,
    spec: InputSpec,
    grid: QuadratureGrid | None = None,
    method: Literal["auto", "quadrature"] = "auto",
    symmetric: bool = False,
) -> FidelityResult:
    _check_spec(spec)
    ch = make_channel(p, symmetric=symmetric)
    if method == "auto" and p.mixer == "BS" and spec.tag in ("coherent", "thermal"):
        return FidelityResult(_fidelity_closed(ch, spec, "auto"), "closed-form", 0.0)
    eps = ch.epsilon
    grid = grid or QuadratureGrid(rel_tol=1e-6)
    if grid.rule != "gauss-hermite" and grid.domain_radius is None:
        grid = QuadratureGrid(
            grid.rule,
            grid.nodes_per_axis,
            _integrand_extent(spec, eps),
            grid.rel_tol,
            grid.abs_tol,
            grid.max_nodes,
        )
    if eps == 0:
        f = lambda x, y: chi_sq_bs(spec, x, y)  # noqa: E731
    else:
        f = lambda x, y: chi_sq_pa(spec, x, y, eps)  # noqa: E731
    value, err = gaussian_weighted_integral_2d(f, ch.noise, grid)
    if not (-1e-6 <= value <= 1 + 1e-6):
        raise ConvergenceFailure(f"fidelity quadrature gave {value}, outside [0, 1]")
    return FidelityResult(min(max(value, 0.0), 1.0), "quadrature", err)


def _pure_state_vector(spec: InputSpec, dim: int) -> np.ndarray:
    if spec.tag == "fock":
        if spec.N >= dim:
            raise InvalidParameter("truncation too small for the Fock input")
        v = np.zeros(dim, dtype=complex)
        v[spec.N] = 1
        return v
    if spec.tag == "coherent":
        from scipy.special import gammaln

        n = np.arange(dim)
        a = complex(spec.alpha)
        if a == 0:
            v = np.zeros(dim, dtype=complex)
            v[0] = 1
            return v
        logmag = -0.5 * abs(a) ** 2 + n * math.log(abs(a)) - 0.5 * gammaln(n + 1)
        return np.exp(logmag + 1j * n * np.angle(a))
    raise InvalidParameter("the operator-sum oracle needs a pure coherent or Fock input")


def default_oracle_dim(spec: InputSpec, ch: TeleportChannel) -> int:
    n_in = spec.N if spec.tag == "fock" else abs(spec.alpha) ** 2
    spread = (ch.sigma_sq + ch.sigma_sq_y) / 2
    grow = math.exp(2 * ch.epsilon)
    return int(math.ceil((2 * n_in + 24 + 12 * spread + 8 * math.sqrt(n_in)) * grow))


def fidelity_via_fock_oracle(
    p: SchemeParams, spec: InputSpec, dim: int | None = None, symmetric: bool = False
) -> FidelityResult:
    """<phi|rho_out|phi> with rho_out from the truncated operator-sum channel."""
    ch = make_channel(p, symmetric=symmetric)
    dim = dim or default_oracle_dim(spec, ch)
    phi = _pure_state_vector(spec, dim)
    rho_out = apply_channel_fock(ch, np.outer(phi, phi.conj()) / np.vdot(phi, phi).real, dim)
    value = float(np.real(phi.conj() @ rho_out @ phi))
    leak = float(abs(1 - np.trace(rho_out).real))
    return FidelityResult(min(max(value, 0.0), 1.0), "fock-oracle", leak)
