"""Transient thermal-hydraulics for gas-cooled channel networks.

The package splits along the physics: fluid and solid property models,
algebraic flow and heat-transfer closures, the buoyancy-influence
tables, the network solver, and the bundled scenario set with its
command-line front end.
"""

from .buoyancy import (DEFAULT_C, SATURATION_RATIO, NuRatioTable,
                       build_lookup_table, buoyancy_parameter, grashof_star,
                       lookup, nu_ratio_solve)
from .correlations import (ALTERNATIVE_EXPONENTS, LAMINAR_NU, BulkState,
                           CorrelationConfig, FrictionResult, WallState,
                           brunone_friction, brunone_k3, petukhov_cf0,
                           petukhov_nu, prandtl, property_corrected_cf,
                           reynolds, steady_friction, variable_property_nu)
from .properties import (FluidPropertyTable, FluidStateSample,
                         PropertyRangeError, SolidMaterialModel,
                         build_helium_table, load_property_table,
                         write_property_table)
from .scenarios import (LineSpec, LofaSpec, PipeSpec, ProbeSpec, RampSpec,
                        ScenarioError, ScenarioSpec, build_lofa_case,
                        build_pipe_case, build_ramp_case, default_lofa_network,
                        ramp_table_rows, run_lofa_case,
                        run_lofa_from_checkpoint, run_pipe_case,
                        run_ramp_case, scenarios_from_config)
from .solver import (ChannelGeometry, DecayHeatSchedule, NetworkConfig,
                     NetworkState, OpenBoundary, PlenumState, SolverError,
                     StepControl, decay_power_fraction, load_checkpoint,
                     save_checkpoint, seal_boundaries, step,
                     wall_temperature_iteration)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "DEFAULT_C",
    "SATURATION_RATIO",
    "NuRatioTable",
    "build_lookup_table",
    "buoyancy_parameter",
    "grashof_star",
    "lookup",
    "nu_ratio_solve",
    "ALTERNATIVE_EXPONENTS",
    "LAMINAR_NU",
    "BulkState",
    "CorrelationConfig",
    "FrictionResult",
    "WallState",
    "brunone_friction",
    "brunone_k3",
    "petukhov_cf0",
    "petukhov_nu",
    "prandtl",
    "property_corrected_cf",
    "reynolds",
    "steady_friction",
    "variable_property_nu",
    "FluidPropertyTable",
    "FluidStateSample",
    "PropertyRangeError",
    "SolidMaterialModel",
    "build_helium_table",
    "load_property_table",
    "write_property_table",
    "LineSpec",
    "LofaSpec",
    "PipeSpec",
    "ProbeSpec",
    "RampSpec",
    "ScenarioError",
    "ScenarioSpec",
    "build_lofa_case",
    "build_pipe_case",
    "build_ramp_case",
    "default_lofa_network",
    "ramp_table_rows",
    "run_lofa_case",
    "run_lofa_from_checkpoint",
    "run_pipe_case",
    "run_ramp_case",
    "scenarios_from_config",
    "ChannelGeometry",
    "DecayHeatSchedule",
    "NetworkConfig",
    "NetworkState",
    "OpenBoundary",
    "PlenumState",
    "SolverError",
    "StepControl",
    "decay_power_fraction",
    "load_checkpoint",
    "save_checkpoint",
    "seal_boundaries",
    "step",
    "wall_temperature_iteration",
]
