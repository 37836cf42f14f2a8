"""Monte Carlo statistical solutions of the 2D incompressible Euler equations.

The package couples a finite volume scheme with discrete Leray projection on
the periodic unit torus to an ensemble driver and statistical diagnostics
(structure functions, Wasserstein distances of point marginals, Cauchy
rates).  See the README for the CLI and the demos/ directory for worked
examples.
"""

from .ensemble import EnsembleConfig, EnsembleResult, load_ensemble, resume, run_ensemble, save_ensemble
from .errors import (
    ConfigError,
    EulerStatError,
    FieldFormatError,
    GridMismatchError,
    NumericsError,
    PicardError,
)
from .grid import (
    GridSpec,
    ScalarField,
    VectorField,
    cell_average,
    cell_average_vector,
    divergence,
    gradient,
    l2_inner,
    l2_norm,
    laplacian,
    restrict,
    restrict_scalar,
)
from .initial_data import FbmSpec, SeededRng, ShearLayerSpec, make_fbm, make_shear_layer, sample_initial
from .leray import LerayProjector, project_function
from .observables import (
    Moments,
    StructureFunctionCurve,
    WassersteinEstimate,
    cauchy_rate_field,
    cauchy_rate_moments,
    fit_slope,
    moments,
    structure_function,
    subsample,
    wasserstein_marginal,
)
from .scheme import SchemeParams, State, Trajectory, cfl_timestep, convection, diffusion, evolve, interface_flux, step

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "EnsembleConfig",
    "EnsembleResult",
    "EulerStatError",
    "FbmSpec",
    "FieldFormatError",
    "GridMismatchError",
    "GridSpec",
    "LerayProjector",
    "Moments",
    "NumericsError",
    "PicardError",
    "ScalarField",
    "SchemeParams",
    "SeededRng",
    "ShearLayerSpec",
    "State",
    "StructureFunctionCurve",
    "Trajectory",
    "VectorField",
    "WassersteinEstimate",
    "cauchy_rate_field",
    "cauchy_rate_moments",
    "cell_average",
    "cell_average_vector",
    "cfl_timestep",
    "convection",
    "diffusion",
    "divergence",
    "evolve",
    "fit_slope",
    "gradient",
    "interface_flux",
    "l2_inner",
    "l2_norm",
    "laplacian",
    "load_ensemble",
    "make_fbm",
    "make_shear_layer",
    "moments",
    "project_function",
    "restrict",
    "restrict_scalar",
    "resume",
    "run_ensemble",
    "sample_initial",
    "save_ensemble",
    "step",
    "structure_function",
    "subsample",
    "wasserstein_marginal",
]
