from .autodiff import ParameterStore, Tensor
from .gradcheck import GradCheckReport, finite_diff_check
from .losses import contrastive_step_loss, softmax_cross_entropy
from .optim import AdamW, DivergedError, ReduceOnPlateau

__all__ = [
    "AdamW",
    "DivergedError",
    "GradCheckReport",
    "ParameterStore",
    "ReduceOnPlateau",
    "Tensor",
    "contrastive_step_loss",
    "finite_diff_check",
    "softmax_cross_entropy",
]
