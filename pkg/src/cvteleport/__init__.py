"""Continuous-variable teleportation with beam-splitter or parametric-amplifier Bell measurements."""

__version__ = "0.1.0"

from .channel_model import *  # noqa: E402,F401,F403
from .entanglement_metrics import *  # noqa: E402,F401,F403
from .errors import *  # noqa: E402,F401,F403
from .fidelity_engine import *  # noqa: E402,F401,F403
from .fock_numerics import *  # noqa: E402,F401,F403
from .gaussian_core import *  # noqa: E402,F401,F403
from .protocol_sim import *  # noqa: E402,F401,F403
