"""Exact conversion of coupled ODE-PDE models into partial integral equations.

The main entry points are :func:`load_model` / :func:`load_builtin` to read
a model, :func:`convert_gpde` to build its PIE system, and
:func:`pieforge.simulate.run` to integrate it in time.
"""
from .converter import PieSystem, convert_gpde, build_Tmaps, InadmissibleError, ModelError
from .gpde import ContinuityVector, GpdeModel, validate
from .io import load, load_builtin, load_model, builtin_ids, save_pie, load_pie
from .piops import PiOp4, compose4, add4, adjoint4
from .polyalg import Polynomial, PolyMat, parse_poly

__version__ = "0.1.0"

__all__ = [
    "PieSystem", "convert_gpde", "build_Tmaps", "InadmissibleError", "ModelError",
    "ContinuityVector", "GpdeModel", "validate",
    "load", "load_builtin", "load_model", "builtin_ids", "save_pie", "load_pie",
    "PiOp4", "compose4", "add4", "adjoint4",
    "Polynomial", "PolyMat", "parse_poly",
]
