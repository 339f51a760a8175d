"""
Exhaustive optimal scheduler for small graphs.

Depth-first branch and bound over start cycles, vertices taken in
topological order. The list scheduler's result seeds the incumbent, so
the oracle never returns a worse latency than the heuristic.
"""

import logging
from collections import defaultdict

from .checker import check_schedule
from .config import ORACLE_MAX_VERTICES
from .errors import InfeasibleError, InstanceTooLargeError, MemschedError, TransferClashError
from .memory_model import REGISTER, in_transfer, require_coverage, residence
from .scheduler import (DmaEntry, Schedule, ScheduleEntry, minimum_latency, schedule,
                        vertex_latency, vertex_resource)

logger = logging.getLogger(__name__)


class BranchAndBound:

    def __init__(self, graph, memory_map, cfg, max_vertices=None):
        limit = max_vertices if max_vertices is not None else ORACLE_MAX_VERTICES
        size = len(graph.schedulable())
        if size > limit:
            raise InstanceTooLargeError(f"oracle refuses {size} vertices (limit {limit})")
        require_coverage(memory_map, graph)

        self.graph = graph
        self.memory_map = memory_map
        self.cfg = cfg
        self.order = list(graph.topological_order)
        self.preds = {v: sorted(graph.precedence.predecessors(v)) for v in self.order}
        self.min_latency = {v.id: minimum_latency(memory_map, cfg, v) for v in graph.schedulable()}
        self.tail = self._tails()
        self.occupancy = defaultdict(int)
        self.nodes = 0

        self.windows = memory_map.transfer_windows()
        for window in self.windows:
            if window.end > cfg.horizon:
                raise InfeasibleError(f"transfer of '{window.symbol}' ends at cycle {window.end}, "
                                      f"past horizon {cfg.horizon}", cycle=window.start)
            for bank in window.banks:
                ports = memory_map.bank(bank).ports
                for cycle in range(window.start, window.end):
                    self.occupancy[(bank, cycle)] += 1
                    if self.occupancy[(bank, cycle)] > ports:
                        raise TransferClashError(
                            f"transfer of '{window.symbol}' finds no free port on bank '{bank}'",
                            cycle=cycle, vertices=[f"dma:{window.symbol}"])

        self.best_latency = cfg.horizon + 1
        self.best = None

    def _tails(self):
        """Minimum cycles that must follow the end of each vertex."""
        tail = {}
        for vertex_id in reversed(self.order):
            tail[vertex_id] = max((self.min_latency[s] + tail[s]
                                   for s in self.graph.precedence.successors(vertex_id)), default=0)
        return tail

    def _capacity(self, vertex, resource):
        if vertex.is_data:
            return None if resource == REGISTER else self.memory_map.bank(resource).ports
        return self.cfg.fu_limit(resource)

    def seed(self, incumbent):
        if incumbent is not None:
            self.best_latency = incumbent.achieved_latency
            self.best = {e.vertex: (e.start, e.end, e.resource) for e in incumbent.entries}

    ##### Bounds #####

    def _lower_bound(self, assigned):
        bound = max((end for _, end, _ in assigned.values()), default=0)
        earliest = {}
        pending_by_bank = defaultdict(list)
        for vertex_id in self.order:
            if vertex_id in assigned:
                continue
            earliest[vertex_id] = max(
                (assigned[p][1] if p in assigned else earliest[p] + self.min_latency[p]
                 for p in self.preds[vertex_id]), default=0)
            bound = max(bound, earliest[vertex_id] + self.min_latency[vertex_id] + self.tail[vertex_id])

            vertex = self.graph.vertex(vertex_id)
            if self.memory_map.is_static and vertex.is_data and self.min_latency[vertex_id] > 0:
                pending_by_bank[residence(self.memory_map, vertex.symbol, 0)].append(vertex_id)

        # remaining accesses of one bank cannot overlap beyond its port count
        for bank, vertices in pending_by_bank.items():
            work = sum(self.min_latency[v] for v in vertices)
            ports = self.memory_map.bank(bank).ports
            start = min(earliest[v] for v in vertices)
            bound = max(bound, start + -(-work // ports))
        return bound

    ##### Search #####

    def _fits(self, vertex, resource, start, end):
        if vertex.is_data and in_transfer(self.memory_map, vertex.symbol, start, end):
            return False
        capacity = self._capacity(vertex, resource)
        if capacity is None:
            return True
        return all(self.occupancy[(resource, t)] < capacity for t in range(start, end))

    def _occupy(self, resource, start, end, delta):
        for t in range(start, end):
            self.occupancy[(resource, t)] += delta

    def _search(self, index, assigned):
        self.nodes += 1
        if index == len(self.order):
            latency = max((end for _, end, _ in assigned.values()), default=0)
            if latency < self.best_latency:
                self.best_latency = latency
                self.best = dict(assigned)
                logger.debug(f"oracle: new incumbent {latency} after {self.nodes} nodes")
            return

        if self._lower_bound(assigned) >= self.best_latency:
            return

        vertex_id = self.order[index]
        vertex = self.graph.vertex(vertex_id)
        earliest = max((assigned[p][1] for p in self.preds[vertex_id]), default=0)

        for start in range(earliest, self.best_latency):
            latency = vertex_latency(self.memory_map, self.cfg, vertex, start)
            end = start + latency
            if end > self.cfg.horizon or end + self.tail[vertex_id] >= self.best_latency:
                if self.memory_map.is_static:
                    break
                continue
            resource = vertex_resource(self.memory_map, vertex, start)
            if not self._fits(vertex, resource, start, end):
                continue

            self._occupy(resource, start, end, 1)
            assigned[vertex_id] = (start, end, resource)
            self._search(index + 1, assigned)
            del assigned[vertex_id]
            self._occupy(resource, start, end, -1)

    def solve(self):
        self._search(0, {})
        logger.info(f"Oracle explored {self.nodes} nodes for '{self.graph.name}'")
        if self.best is None:
            raise InfeasibleError(f"no schedule within horizon {self.cfg.horizon} (exhaustive search)")
        entries = tuple(ScheduleEntry(v, start, end, resource) for v, (start, end, resource) in self.best.items())
        return Schedule(self.graph.name, entries, _dma_entries(self.memory_map))


def _dma_entries(memory_map):
    return tuple(DmaEntry(w.symbol, w.directive.from_bank, w.directive.to_bank, w.start, w.end)
                 for w in memory_map.transfer_windows())


def oracle_optimal(graph, memory_map, cfg, max_vertices=None):
    """
    Minimum-latency schedule of a small graph.

    Args:
        graph (SfgGraph): A valid graph with at most max_vertices non-delay vertices
        memory_map (MemoryMap): A map covering every symbol of the graph
        cfg (SchedulerConfig): Horizon, operator latencies and unit limits
        max_vertices (int): Size guard, MEMSCHED_ORACLE_MAX_VERTICES by default

    Raises:
        InstanceTooLargeError: the graph is above the size guard
        InfeasibleError: no schedule meets the horizon
        TransferClashError: declared transfers need more ports than a bank has

    Returns:
        Schedule: an optimal schedule, re-verified by the checker
    """
    solver = BranchAndBound(graph, memory_map, cfg, max_vertices)
    try:
        solver.seed(schedule(graph, memory_map, cfg))
    except InfeasibleError as e:
        logger.info(f"List scheduler found nothing ({e}); oracle starts without incumbent")

    result = solver.solve()
    verdict = check_schedule(graph, memory_map, cfg, result)
    if not verdict.ok:
        raise MemschedError(f"oracle produced an invalid schedule: {verdict}")
    return result
