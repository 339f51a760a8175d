"""
Independent schedule verification.

The checker recomputes every constraint from the graph, the map and the
config alone; it shares the latency model with the scheduler but none of
its bookkeeping, so a hand-edited dump can be verified too.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional, Tuple

from .memory_model import REGISTER, check_against_sfg, in_transfer
from .scheduler import vertex_latency, vertex_resource

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    constraint: Optional[str] = None
    cycle: Optional[int] = None
    vertices: Tuple[str, ...] = ()

    def __str__(self):
        if self.ok:
            return "OK"
        return f"FAIL {self.constraint} cycle={self.cycle} vertices={','.join(self.vertices)}"


OK = Verdict(True)


def _fail(constraint, cycle, vertices):
    verdict = Verdict(False, constraint, cycle, tuple(vertices))
    logger.info(f"Schedule rejected: {verdict}")
    return verdict


def check_schedule(graph, memory_map, cfg, schedule):
    """
    Verify a schedule against its graph, map and config.

    Constraints are checked in a fixed order and the first violation wins:
    coverage, resource, latency, horizon, precedence, transfer-window,
    port-capacity, fu-capacity.

    Returns:
        Verdict: OK, or the first violated constraint with its cycle and vertices
    """
    report = check_against_sfg(memory_map, graph)
    if not report.success:
        return _fail("coverage", 0, report.missing)

    expected = {v.id for v in graph.schedulable()}
    seen = {}
    for entry in schedule.entries:
        if entry.vertex not in expected:
            return _fail("coverage", entry.start, [entry.vertex])
        if entry.vertex in seen:
            return _fail("coverage", entry.start, [entry.vertex])
        seen[entry.vertex] = entry
    missing = sorted(expected - set(seen))
    if missing:
        return _fail("coverage", 0, missing)

    for entry in schedule.entries:
        vertex = graph.vertex(entry.vertex)
        if entry.start < 0:
            return _fail("horizon", entry.start, [entry.vertex])
        if entry.resource != vertex_resource(memory_map, vertex, entry.start):
            return _fail("resource", entry.start, [entry.vertex])
        if entry.end - entry.start != vertex_latency(memory_map, cfg, vertex, entry.start):
            return _fail("latency", entry.start, [entry.vertex])

    for entry in schedule.entries:
        if entry.end > cfg.horizon:
            return _fail("horizon", entry.end, [entry.vertex])

    for src, dst in sorted(graph.precedence.edges):
        if seen[dst].start < seen[src].end:
            return _fail("precedence", seen[dst].start, [src, dst])

    for entry in schedule.entries:
        vertex = graph.vertex(entry.vertex)
        if vertex.is_data and in_transfer(memory_map, vertex.symbol, entry.start, entry.end):
            return _fail("transfer-window", entry.start, [entry.vertex])

    return _check_capacity(graph, memory_map, cfg, schedule)


def _occupancy(intervals):
    """resource -> cycle -> holders, for intervals given as (resource, start, end, holder)."""
    table = defaultdict(lambda: defaultdict(list))
    for resource, start, end, holder in intervals:
        for cycle in range(start, end):
            table[resource][cycle].append(holder)
    return table


def _first_overflow(table, capacity_of):
    slots = sorted((cycle, resource) for resource in table for cycle in table[resource])
    for cycle, resource in slots:
        holders = table[resource][cycle]
        if len(holders) > capacity_of(resource):
            return resource, cycle, sorted(holders)
    return None


def _check_capacity(graph, memory_map, cfg, schedule):
    ports = []
    units = []
    for entry in schedule.entries:
        vertex = graph.vertex(entry.vertex)
        if vertex.is_data:
            if entry.resource != REGISTER:
                ports.append((entry.resource, entry.start, entry.end, entry.vertex))
        elif cfg.fu_limit(entry.resource) is not None:
            units.append((entry.resource, entry.start, entry.end, entry.vertex))

    for window in memory_map.transfer_windows():
        for bank in window.banks:
            ports.append((bank, window.start, window.end, f"dma:{window.symbol}"))

    overflow = _first_overflow(_occupancy(ports), lambda bank: memory_map.bank(bank).ports)
    if overflow:
        return _fail("port-capacity", overflow[1], overflow[2])

    overflow = _first_overflow(_occupancy(units), cfg.fu_limit)
    if overflow:
        return _fail("fu-capacity", overflow[1], overflow[2])
    return OK
