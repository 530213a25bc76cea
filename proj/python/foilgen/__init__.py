"""Airfoil inverse design: shape families, panel-method lift, roundness and conditional VAEs."""

from ._core import (
    DEFAULT_POINTS,
    ChecksumError,
    Dataset,
    DegenerateShapeError,
    Error,
    FormatError,
    InputError,
    Model,
    ModelError,
    ParameterError,
    ShapeError,
    SolverError,
    build_naca,
    flatten,
    invariant_violation,
    joukowski,
    lift_coefficient,
    naca4,
    pressure,
    resample,
    roundness,
    set_distance,
    shape_variation,
    unflatten,
)

__version__ = "0.1.0"
