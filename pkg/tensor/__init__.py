"""Dense tensor library with a reverse-mode gradient tape"""
from .tensor import Tensor, Tape, ShapeError, PrecisionError, default_dtype, get_default_dtype, active_tape
from .module import Module, Linear, parameter, xavier_uniform, gaussian
from .gradcheck import gradcheck, GradcheckReport
from .checkpoint import save_checkpoint, load_checkpoint
from . import ops

__all__ = [
    'Tensor', 'Tape', 'ShapeError', 'PrecisionError', 'default_dtype', 'get_default_dtype', 'active_tape',
    'Module', 'Linear', 'parameter', 'xavier_uniform', 'gaussian',
    'gradcheck', 'GradcheckReport', 'save_checkpoint', 'load_checkpoint', 'ops',
]
