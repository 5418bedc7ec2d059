"""Cut finite element solver for laser ablation with a Stefan-Signorini interface."""

from ._core import (
    AssemblyError,
    ConfigError,
    CutGeometry,
    Error,
    GeometryError,
    IoError,
    LevelSet,
    Mesh,
    RunConfig,
    Simulation,
    SolverError,
    absorption,
    alpha,
    cut,
    exact_temperature,
    load_config,
    manufactured_config,
    parse_config,
    pulse,
    pulsed_ablation_config,
    radius,
    run,
    run_manufactured,
    structured_mesh,
)

__all__ = [name for name in dir() if not name.startswith("_")]
