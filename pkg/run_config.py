"""
Run configuration and logging setup for the symcontract command line
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

from errors import InvalidInput

SEED_ENV_VAR = "SYMCONTRACT_SEED"
LOG_LEVEL_ENV_VAR = "SYMCONTRACT_LOG_LEVEL"
SCHEMA = "symcontract/v1"

DEFAULT_TOL = 1e-8
DEFAULT_GRID_SIZE = 24


@dataclass(frozen=True)
class RunConfig:
    """
    Settings shared by every subcommand

    Args:
        tol (float): residual tolerance for witnesses
        grid_size (int): number of disk points used for "for all z" checks
        seed (int): seed for grids and generated instances
        output (str): output path, None for stdout
        format (str): 'json' or 'text'
        log_level (str): logging level name
    """
    tol: float = DEFAULT_TOL
    grid_size: int = DEFAULT_GRID_SIZE
    seed: int = 0
    output: Optional[str] = None
    format: str = "json"
    log_level: str = "WARNING"

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidInput(f"tol must be positive, got {self.tol}")
        if self.grid_size < 8:
            raise InvalidInput(f"grid_size must be at least 8, got {self.grid_size}")
        if self.format not in ("json", "text"):
            raise InvalidInput(f"format must be 'json' or 'text', got {self.format!r}")


def resolve_seed(seed=None):
    """
    Pick the seed: explicit value first, then SYMCONTRACT_SEED, then 0

    Returns:
        int: seed in the unsigned 64-bit range
    """
    if seed is None:
        raw = os.environ.get(SEED_ENV_VAR)
        if raw is None or raw.strip() == "":
            return 0
        try:
            seed = int(raw, 0)
        except ValueError as e:
            raise InvalidInput(f"{SEED_ENV_VAR} is not an integer: {raw!r}") from e
    return int(seed) % (1 << 64)


def config_from_args(args):
    """Build a RunConfig from parsed argparse arguments"""
    return RunConfig(
        tol=args.tol,
        grid_size=args.grid,
        seed=resolve_seed(args.seed),
        output=args.output,
        format=args.format,
        log_level=args.log_level or os.environ.get(LOG_LEVEL_ENV_VAR, "WARNING"),
    )


def configure_logging(level="WARNING"):
    """
    Install a stderr handler on the root logger

    Library modules only create loggers; the entry point decides where they go.
    """
    numeric = getattr(logging, str(level).upper(), None)
    if not isinstance(numeric, int):
        raise InvalidInput(f"unknown log level {level!r}")
    logging.basicConfig(
        level=numeric,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
