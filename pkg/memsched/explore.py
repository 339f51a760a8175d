"""
Design space exploration over candidate memory architectures.

Every (map, horizon) pair is an independent scheduling run; runs execute on
a thread pool and the report is assembled in a fixed order afterwards.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

from tabulate import tabulate

from .config import EXPLORE_WORKERS, SchedulerConfig
from .errors import MemschedError
from .memory_model import bank_totals, check_against_sfg
from .scheduler import memory_unaware_latency, schedule

logger = logging.getLogger(__name__)

PORT_COST = 1


@dataclass(frozen=True)
class ExplorationRow:
    label: str
    horizon: int
    banks: int
    ports: int
    latency: Optional[int]
    area: int
    feasible: bool
    unaware_latency: Optional[int] = None
    reason: str = ""

    def sort_key(self):
        return (not self.feasible, self.latency if self.feasible else 0, self.area, self.label, self.horizon)


@dataclass(frozen=True)
class ExplorationReport:
    rows: Tuple[ExplorationRow, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(sorted(self.rows, key=ExplorationRow.sort_key)))

    def best(self):
        """Fastest feasible row (smallest area on ties), or None."""
        return self.rows[0] if self.rows and self.rows[0].feasible else None

    def render(self):
        headers = ["config", "horizon", "banks", "ports", "latency", "area", "unaware", "feasible", "reason"]
        table = [[r.label, r.horizon, r.banks, r.ports,
                  r.latency if r.latency is not None else "-", r.area,
                  r.unaware_latency if r.unaware_latency is not None else "-",
                  "yes" if r.feasible else "no", r.reason or "-"]
                 for r in self.rows]
        return tabulate(table, headers=headers, tablefmt="simple") + "\n"


def area_proxy(memory_map):
    """Structural area estimate: total ports times PORT_COST."""
    return sum(bank.ports * PORT_COST for bank in memory_map.banks)


def evaluate(graph, label, memory_map, cfg):
    """Schedule one candidate; failures become infeasible rows, never exceptions."""
    banks, ports = bank_totals(memory_map)
    area = area_proxy(memory_map)
    unaware = None
    if check_against_sfg(memory_map, graph).success:
        unaware = memory_unaware_latency(graph, memory_map, cfg)
    try:
        result = schedule(graph, memory_map, cfg)
    except MemschedError as e:
        logger.info(f"Candidate {label} at horizon {cfg.horizon} is infeasible: {e}")
        return ExplorationRow(label, cfg.horizon, banks, ports, None, area, False, unaware, str(e))
    return ExplorationRow(label, cfg.horizon, banks, ports, result.achieved_latency, area, True, unaware)


def explore(graph, candidates, horizons, base_cfg=None, workers=None):
    """
    Run the scheduler for every (candidate, horizon) pair.

    Args:
        graph (SfgGraph): The kernel
        candidates (list): (label, MemoryMap) pairs; a MemschedError in place of
            the map marks a candidate whose file did not parse
        horizons (list): Horizons to try
        base_cfg (SchedulerConfig): Operator latencies and unit limits
        workers (int): Thread pool size, MEMSCHED_EXPLORE_WORKERS by default

    Raises:
        MemschedError: no candidate, no horizon, or every candidate failed to parse

    Returns:
        ExplorationReport
    """
    if not candidates:
        raise MemschedError("exploration needs at least one candidate map")
    if not horizons:
        raise MemschedError("exploration needs at least one horizon")
    if all(isinstance(m, MemschedError) for _, m in candidates):
        raise MemschedError("every candidate map failed to parse")

    base_cfg = base_cfg or SchedulerConfig(horizon=max(horizons))
    rows = []
    jobs = []
    with ThreadPoolExecutor(max_workers=workers or EXPLORE_WORKERS) as executor:
        for label, memory_map in candidates:
            for horizon in horizons:
                if isinstance(memory_map, MemschedError):
                    rows.append(ExplorationRow(label, horizon, 0, 0, None, 0, False, None, str(memory_map)))
                    continue
                cfg = base_cfg.with_horizon(horizon)
                jobs.append(executor.submit(evaluate, graph, label, memory_map, cfg))
        rows.extend(job.result() for job in jobs)

    report = ExplorationReport(tuple(rows))
    logger.info(f"Explored {len(rows)} configurations of '{graph.name}'")
    return report
