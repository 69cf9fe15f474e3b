"""Structure-preserving tangential interpolation for bilinear systems."""

from .bench import make_delay_rod, make_family, make_heat2d, make_msd, random_system
from .recipes import logspace_point_sets, recipe_spec
from .rom import ReducedModel, project
from .simulate import InputSignal, Trajectory, named_signal, simulate
from .structures import (
    MatrixFunction,
    StructuredBilinearSystem,
    TemplateError,
    first_order,
    make_template,
    second_order,
    time_delay,
)
from .subspaces import EmptyBasisError, InterpolationSpec, PointSet, ReductionBases, assemble_bases
from .transfer import (
    SingularPointError,
    eval_blockwise,
    eval_modified,
    eval_modified_derivative,
    eval_modified_scaling_gradient,
    eval_regular,
)
from .verify import check_conditions, error_metrics, grid_errors

__version__ = "0.1.0"

__all__ = [
    "EmptyBasisError",
    "InputSignal",
    "InterpolationSpec",
    "MatrixFunction",
    "PointSet",
    "ReducedModel",
    "ReductionBases",
    "SingularPointError",
    "StructuredBilinearSystem",
    "TemplateError",
    "Trajectory",
    "assemble_bases",
    "check_conditions",
    "error_metrics",
    "eval_blockwise",
    "eval_modified",
    "eval_modified_derivative",
    "eval_modified_scaling_gradient",
    "eval_regular",
    "first_order",
    "grid_errors",
    "logspace_point_sets",
    "make_delay_rod",
    "make_family",
    "make_heat2d",
    "make_msd",
    "make_template",
    "named_signal",
    "recipe_spec",
    "project",
    "random_system",
    "second_order",
    "simulate",
    "time_delay",
]
