"""Exact genus-zero wall-crossing data for hybrid models."""
from .errors import HybridWCError
from .state_space import Epsilon, ModelParams, SAMPLE_MODELS, sample_model

__all__ = ["Epsilon", "HybridWCError", "ModelParams", "SAMPLE_MODELS", "sample_model"]
__version__ = "0.1.0"
