"""
Process settings and the scheduler configuration file.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Optional

from dotenv import load_dotenv

from .errors import ParseError
from .textfmt import iter_lines, parse_int

# Load environment variables
load_dotenv()

##### Configuration #####
LOG_LEVEL = os.getenv("MEMSCHED_LOG_LEVEL", "WARNING").upper()
EXPLORE_WORKERS = int(os.getenv("MEMSCHED_EXPLORE_WORKERS", "4"))
ORACLE_MAX_VERTICES = int(os.getenv("MEMSCHED_ORACLE_MAX_VERTICES", "12"))
API_PORT = int(os.getenv("MEMSCHED_API_PORT", "5000"))

DEFAULT_OP_LATENCY = 1


def configure_logging(level=None):
    """Configure logging at the application startup"""
    logging.basicConfig(
        level=level or LOG_LEVEL,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


##### Scheduler configuration #####

@dataclass(frozen=True)
class SchedulerConfig:
    """
    Latency constraint and operator library of one scheduling run.

    horizon is the cycle budget T of one iteration. op_latency maps op-names
    to cycles (missing names cost DEFAULT_OP_LATENCY). fu_limits caps the
    number of simultaneously busy units per op-name; absent means unconstrained.
    """
    horizon: int
    op_latency: Dict[str, int] = field(default_factory=dict)
    fu_limits: Optional[Dict[str, int]] = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")

    def latency_of(self, op):
        return self.op_latency.get(op, DEFAULT_OP_LATENCY)

    def fu_limit(self, op):
        return (self.fu_limits or {}).get(op)

    def with_horizon(self, horizon):
        return SchedulerConfig(horizon, dict(self.op_latency), dict(self.fu_limits) if self.fu_limits else None)


def parse_scheduler_config(text, source=None, horizon=None):
    """
    Parse a config file of `horizon=<int>`, `latency.<op>=<int>` and `fu.<op>=<int>` lines.

    Args:
        text (str): File contents
        source (str): Name used in diagnostics
        horizon (int): Fallback horizon when the file has none (exploration sweeps)

    Returns:
        SchedulerConfig
    """
    try:
        return _parse_scheduler_config(text, horizon)
    except ParseError as e:
        raise e.with_source(source) if source else e


def _parse_scheduler_config(text, fallback_horizon):
    horizon = None
    op_latency = {}
    fu_limits = {}

    for lineno, words in iter_lines(text):
        if len(words) != 1 or "=" not in words[0]:
            raise ParseError("expected a single key=value", line=lineno)
        key, value = words[0].split("=", 1)
        number = parse_int(value, lineno, key, minimum=1)

        if key == "horizon":
            if horizon is not None:
                raise ParseError("duplicate key 'horizon'", line=lineno)
            horizon = number
            continue

        section, _, op = key.partition(".")
        if not op or section not in ("latency", "fu"):
            raise ParseError(f"unknown key '{key}'", line=lineno)
        table = op_latency if section == "latency" else fu_limits
        if op in table:
            raise ParseError(f"duplicate key '{key}'", line=lineno)
        table[op] = number

    horizon = horizon if horizon is not None else fallback_horizon
    if horizon is None:
        raise ParseError("missing key 'horizon'")
    return SchedulerConfig(horizon, op_latency, fu_limits or None)
