"""shearcase: certified shearing-map dynamics on the torus, pillowcase geometry,
and representation varieties of knot and splice groups."""

__version__ = "0.1.0"

from . import cert, errors, knot_reps, pillowcase, serialize, su2, torus_dynamics

__all__ = [
    "cert",
    "errors",
    "knot_reps",
    "pillowcase",
    "serialize",
    "su2",
    "torus_dynamics",
    "__version__",
]
