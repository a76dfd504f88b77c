"""Shearing maps, Fourier splitting, certified isotopy approximation, Moser correction."""

from .shearing import (
    TWO_PI,
    ProgramStep,
    ShearingMap,
    ShearingProfile,
    ShearingProgram,
    apply_shearing,
    canonicalize,
    eval_program,
    tau,
    torus_distance,
)
from .fourier import (
    FourierField,
    FourierTerm,
    TimeField,
    derive_time_field,
    estimate_lipschitz,
    fourier_decompose,
    grid_points,
)
from .approx import ErrorCertificate, build_shearing_program, reference_flow
from .perturbation import (
    PerturbationStep,
    perturbation_to_map,
    program_to_perturbation,
)
from .moser import MoserResult, moser_correct

__all__ = [
    "TWO_PI",
    "ProgramStep",
    "ShearingMap",
    "ShearingProfile",
    "ShearingProgram",
    "apply_shearing",
    "canonicalize",
    "eval_program",
    "tau",
    "torus_distance",
    "FourierField",
    "FourierTerm",
    "TimeField",
    "derive_time_field",
    "estimate_lipschitz",
    "fourier_decompose",
    "grid_points",
    "ErrorCertificate",
    "build_shearing_program",
    "reference_flow",
    "PerturbationStep",
    "perturbation_to_map",
    "program_to_perturbation",
    "MoserResult",
    "moser_correct",
]
