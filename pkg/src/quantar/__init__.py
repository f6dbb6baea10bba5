"""Parameter estimation for Gaussian AR(1) processes observed through rounding."""

from .ar1 import DEFAULT_BOX, THETA_STAR, Theta, ThetaBox, Trajectory, simulate, stationary_law
from .filter import log_likelihood, mc_likelihood_oracle
from .quantizer import QuantizerKind, floor_quantize, round_quantize

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BOX",
    "THETA_STAR",
    "Theta",
    "ThetaBox",
    "Trajectory",
    "simulate",
    "stationary_law",
    "log_likelihood",
    "mc_likelihood_oracle",
    "QuantizerKind",
    "floor_quantize",
    "round_quantize",
]
