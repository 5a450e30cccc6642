"""Monte-Carlo simulation of the full teleportation protocol on Gaussian states.

Modes are laid out as 0 = input, 1 and 2 = the two halves of the resource.
Modes 0 and 1 are mixed on the beam splitter or amplifier, both outputs are
attenuated, X of output 0 and Y of output 1 are read by homodyne detection,
and the readings are fed forward as a displacement of mode 2.  Any further
modes of the input state are reference modes that are carried along
untouched (e.g. the idler of an EPR pair whose signal is teleported).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel_model import SchemeParams, apply_channel_gaussian, displacement_rule, make_channel
from .errors import InvalidParameter, RequiresFiniteSqueezing
from .gaussian_core import (
    BeamSplitterParams,
    GaussianState,
    InputSpec,
    apply_bs,
    apply_loss,
    apply_pa,
    conditioning_gain,
    displace,
    homodyne_condition,
    prepare_state,
    tensor,
)

__all__ = [
    "ProtocolRun",
    "EnsembleStats",
    "pre_measurement_state",
    "run_once",
    "run_ensemble",
    "ensemble_moments",
]


@dataclass(frozen=True)
class ProtocolRun:
    outcome: tuple[float, float]
    conditional_out: GaussianState
    scheme: SchemeParams


@dataclass(frozen=True)
class EnsembleStats:
    n_runs: int
    seed: int
    mean_est: np.ndarray
    mean_se: np.ndarray
    cov_est: np.ndarray
    cov_se: np.ndarray
    predicted: GaussianState

    @property
    def mean_z(self) -> np.ndarray:
        return (self.mean_est - self.predicted.mean) / np.maximum(self.mean_se, 1e-12)

    @property
    def cov_z(self) -> np.ndarray:
        return (self.cov_est - self.predicted.cov) / np.maximum(self.cov_se, 1e-12)

    def max_abs_z(self) -> float:
        return float(max(np.abs(self.mean_z).max(), np.abs(self.cov_z).max()))


def _check(p: SchemeParams, inp: GaussianState) -> None:
    if inp.n_modes < 1:
        raise InvalidParameter("protocol input needs at least one mode")
    if math.isinf(p.s_channel):
        raise RequiresFiniteSqueezing(
            "homodyne outcomes are improper at infinite squeezing; use a finite s_channel"
        )


def pre_measurement_state(p: SchemeParams, inp: GaussianState) -> GaussianState:
    """State just before the homodyne detectors: input, resource pair, then reference modes."""
    _check(p, inp)
    st = tensor(inp, prepare_state(InputSpec.epr(p.s_channel)))
    n_ref = inp.n_modes - 1
    if n_ref:
        order = [0, n_ref + 1, n_ref + 2] + list(range(1, n_ref + 1))
        idx = np.concatenate([[2 * m, 2 * m + 1] for m in order])
        st = GaussianState(st.mean[idx], st.cov[np.ix_(idx, idx)])
    if p.mixer == "BS":
        st = apply_bs(st, 0, 1, BeamSplitterParams())
    else:
        st = apply_pa(st, 0, 1, p.gain)
    st = apply_loss(st, 0, p.loss)
    return apply_loss(st, 1, p.loss)


def run_once(p: SchemeParams, inp: GaussianState, rng: np.random.Generator) -> ProtocolRun:
    st = pre_measurement_state(p, inp)
    m, v, _, _ = conditioning_gain(st, 0, "X")
    ix = m + math.sqrt(v) * rng.standard_normal()
    _, _, st = homodyne_condition(st, 0, "X", ix)
    m, v, _, _ = conditioning_gain(st, 0, "Y")
    iy = m + math.sqrt(v) * rng.standard_normal()
    _, _, st = homodyne_condition(st, 0, "Y", iy)
    dx, dy = displacement_rule(p, (ix, iy))
    return ProtocolRun((ix, iy), displace(st, 0, dx, dy), p)


def _linear_protocol(p: SchemeParams, inp: GaussianState):
    """Affine dependence of the displaced output mean on the two standard-normal draws.

    Returns (offset, A, cond_cov) with output mean = offset + A @ z for
    z ~ N(0, I_2), drawn in the same order as ``run_once``.
    """
    st = pre_measurement_state(p, inp)
    mx, vx, gx, cov1 = conditioning_gain(st, 0, "X")
    rest1 = np.r_[2 : st.mean.size]
    mean1 = st.mean[rest1]
    # after the first conditioning the Y of the second detector sits at index 1
    my0 = mean1[1]
    vy = cov1[1, 1]
    gy = cov1[2:, 1] / vy
    cond_cov = cov1[2:, 2:] - np.outer(cov1[2:, 1], cov1[2:, 1]) / vy
    sx, sy = math.sqrt(vx), math.sqrt(vy)
    # ix = mx + sx z1 ; iy = my0 + gx[1] sx z1 + sy z2
    ff = np.zeros((2, mean1.size - 2))
    ff[0, :2] = displacement_rule(p, (1.0, 0.0))
    ff[1, :2] = displacement_rule(p, (0.0, 1.0))
    base = mean1[2:] + ff[0] * mx + ff[1] * my0
    a_x = gx[2:] * sx + ff[0] * sx + ff[1] * gx[1] * sx
    a_y = gy * sy + ff[1] * sy
    return base, np.column_stack([a_x, a_y]), cond_cov


def ensemble_moments(p: SchemeParams, inp: GaussianState) -> GaussianState:
    """Exact outcome-averaged output state (law of total covariance, no sampling)."""
    base, A, cond_cov = _linear_protocol(p, inp)
    return GaussianState(base, cond_cov + A @ A.T)


def run_ensemble(
    p: SchemeParams,
    inp: GaussianState,
    n_runs: int,
    seed: int,
    symmetric: bool = False,
) -> EnsembleStats:
    """Sample ``n_runs`` protocol runs and compare with the equivalent channel.

    The draws follow exactly the stream ``run_once`` would consume from
    ``np.random.default_rng(seed)``, but are vectorised through the affine
    map from draws to conditional output means.
    """
    if n_runs < 2:
        raise InvalidParameter("need at least two runs for ensemble statistics")
    base, A, cond_cov = _linear_protocol(p, inp)
    z = np.random.default_rng(seed).standard_normal((n_runs, 2))
    means = base + z @ A.T
    mean_est = means.mean(axis=0)
    spread = np.cov(means, rowvar=False)
    mean_se = np.sqrt(np.diag(spread) / n_runs)
    d = np.diag(spread)
    cov_se = np.sqrt((spread**2 + np.outer(d, d)) / n_runs)
    predicted = apply_channel_gaussian(make_channel(p, symmetric=symmetric), inp, 0)
    return EnsembleStats(n_runs, seed, mean_est, mean_se, cond_cov + spread, cov_se, predicted)
