"""
Numerical settings shared by the solvers and the command line.
"""
from pydantic import BaseModel, ConfigDict, Field

DEFAULT_GRID_LEVEL = 12
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200
DEFAULT_ENDPOINT_TOL = 1e-9
DEFAULT_HOELDER_SUBSAMPLE = 1025
DEFAULT_NEUMANN_TOL = 1e-10
DEFAULT_NEUMANN_MAX_TERMS = 500
DEFAULT_BURN_IN = 100
DEFAULT_SEED = 0


class SolverSettings(BaseModel):
    """Grid resolution, tolerances and iteration caps."""
    model_config = ConfigDict(frozen=True)

    grid_level: int = Field(default=DEFAULT_GRID_LEVEL, ge=1, le=20, description="Grid level m, M = 2^m + 1 nodes")
    tol: float = Field(default=DEFAULT_TOL, gt=0, description="Fixed-point stop tolerance in sup norm")
    max_iter: int = Field(default=DEFAULT_MAX_ITER, ge=1, description="Fixed-point iteration cap")
    endpoint_tol: float = Field(default=DEFAULT_ENDPOINT_TOL, gt=0, description="Endpoint-match tolerance")
    hoelder_subsample: int = Field(default=DEFAULT_HOELDER_SUBSAMPLE, ge=2, description="Nodes scanned by the Hoelder seminorm")
    neumann_tol: float = Field(default=DEFAULT_NEUMANN_TOL, gt=0, description="Neumann term-norm stop tolerance")
    neumann_max_terms: int = Field(default=DEFAULT_NEUMANN_MAX_TERMS, ge=1, description="Neumann term cap")
    burn_in: int = Field(default=DEFAULT_BURN_IN, ge=0, description="Chaos-game burn-in steps")
    seed: int = Field(default=DEFAULT_SEED, description="Default random seed")

    @property
    def grid_size(self) -> int:
        """Number of grid nodes."""
        return 2 ** self.grid_level + 1
