"""Numerics for the lambda-deformed (quasi-harmonic) nonlinear oscillator in n dimensions."""

from .errors import *  # noqa: F401,F403
from .model import Params, State, check_domain, in_domain, validate_params

__all__ = ["Params", "State", "check_domain", "in_domain", "validate_params"]
__version__ = "0.1.0"
