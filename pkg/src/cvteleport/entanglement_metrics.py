"""Duan-type inseparability of two-mode Gaussian states.

I_s = var(x1 - x2) + var(y1 + y2).  Vacuum gives 4, and I_s < 4 certifies
entanglement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel_model import SchemeParams, apply_channel_gaussian, make_channel
from .errors import InvalidModeCount
from .gaussian_core import GaussianState, InputSpec, prepare_state, quadrature_stats

__all__ = ["VACUUM_IS", "InsepResult", "inseparability", "teleported_epr_inseparability"]

VACUUM_IS = 4.0


@dataclass(frozen=True)
class InsepResult:
    i_s: float

    @property
    def normalized(self) -> float:
        return self.i_s / VACUUM_IS

    @property
    def entangled(self) -> bool:
        return self.i_s < VACUUM_IS

    @property
    def dB(self) -> float:
        return 10 * math.log10(self.normalized) if self.i_s > 0 else -math.inf


def inseparability(st: GaussianState) -> InsepResult:
    if st.n_modes != 2:
        raise InvalidModeCount(f"inseparability needs 2 modes, got {st.n_modes}")
    _, vx = quadrature_stats(st, [1, 0, -1, 0])
    _, vy = quadrature_stats(st, [0, 1, 0, 1])
    return InsepResult(max(vx + vy, 0.0))


def teleported_epr_inseparability(
    p: SchemeParams, s_in: float, symmetric: bool = False
) -> InsepResult:
    """Send the first arm of epr(s_in) through the teleportation channel and measure I_s."""
    st = prepare_state(InputSpec.epr(s_in))
    out = apply_channel_gaussian(make_channel(p, symmetric=symmetric), st, 0)
    return inseparability(out)
