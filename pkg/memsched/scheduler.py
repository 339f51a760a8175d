"""
Memory-aware list scheduling.

ASAP/ALAP give every vertex its earliest start and its deadline. The list
scheduler then walks cycles from 0: ready vertices are ordered by mobility
(deadline minus current cycle), every memory access whose bank has no idle
port token is dropped from the ready list, and the rest are started greedily.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

from .errors import InfeasibleError, TransferClashError
from .mcg import TokenPool, build_mcg, conflict_weights
from .memory_model import REGISTER, in_transfer, require_coverage, residence

logger = logging.getLogger(__name__)

##### Domain types #####

@dataclass(frozen=True)
class ScheduleEntry:
    vertex: str
    start: int
    end: int
    resource: str


@dataclass(frozen=True)
class DmaEntry:
    symbol: str
    from_bank: str
    to_bank: str
    start: int
    end: int

    @property
    def holder(self):
        return f"dma:{self.symbol}"


@dataclass(frozen=True)
class Schedule:
    name: str
    entries: Tuple[ScheduleEntry, ...]
    dma: Tuple[DmaEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=lambda e: (e.start, e.vertex))))
        object.__setattr__(self, "dma", tuple(sorted(self.dma, key=lambda d: (d.start, d.symbol))))

    @property
    def achieved_latency(self):
        return max((e.end for e in self.entries), default=0)

    def entry(self, vertex_id):
        for entry in self.entries:
            if entry.vertex == vertex_id:
                return entry
        raise KeyError(vertex_id)

    def starts(self):
        return {e.vertex: e.start for e in self.entries}


##### Latency and resource model #####

def vertex_latency(memory_map, cfg, vertex, start):
    """Cycles a vertex occupies when it starts at `start`."""
    if vertex.is_delay:
        return 0
    if vertex.is_data:
        bank = residence(memory_map, vertex.symbol, start)
        if bank == REGISTER:
            return 0
        return memory_map.bank(bank).access_latency(vertex.access)
    return cfg.latency_of(vertex.op)


def vertex_resource(memory_map, vertex, start):
    """Bank name, 'register' or functional-unit class (the op-name)."""
    if vertex.is_data:
        return residence(memory_map, vertex.symbol, start)
    return vertex.op


def _latency_bounds(memory_map, cfg, vertex):
    if vertex.is_data:
        if memory_map.placement(vertex.symbol).is_register:
            return 0, 0
        latencies = [memory_map.bank(b).access_latency(vertex.access)
                     for b in memory_map.visited_banks(vertex.symbol)]
        return min(latencies), max(latencies)
    latency = vertex_latency(memory_map, cfg, vertex, 0)
    return latency, latency


def nominal_latency(memory_map, cfg, vertex):
    """Latency used by ASAP/ALAP: the slowest bank the symbol ever sits in."""
    return _latency_bounds(memory_map, cfg, vertex)[1]


def minimum_latency(memory_map, cfg, vertex):
    """Fastest possible latency of a vertex, used for lower bounds."""
    return _latency_bounds(memory_map, cfg, vertex)[0]


##### ASAP / ALAP #####

def asap(graph, memory_map, cfg):
    """
    Earliest start of every non-delay vertex, ignoring ports and unit limits.

    Returns:
        dict: vertex id -> earliest start cycle
    """
    latency = {v.id: nominal_latency(memory_map, cfg, v) for v in graph.schedulable()}
    earliest = {}
    for vertex_id in graph.topological_order:
        earliest[vertex_id] = max(
            (earliest[p] + latency[p] for p in graph.precedence.predecessors(vertex_id)), default=0)
    return earliest


def critical_path(graph, memory_map, cfg):
    """
    Longest latency path of the precedence DAG.

    Returns:
        tuple: (length in cycles, list of vertex ids along the path)
    """
    latency = {v.id: nominal_latency(memory_map, cfg, v) for v in graph.schedulable()}
    earliest = asap(graph, memory_map, cfg)
    if not earliest:
        return 0, []

    last = min(earliest, key=lambda v: (-(earliest[v] + latency[v]), v))
    length = earliest[last] + latency[last]
    path = [last]
    while True:
        preds = sorted(p for p in graph.precedence.predecessors(path[-1])
                       if earliest[p] + latency[p] == earliest[path[-1]])
        if not preds:
            break
        path.append(preds[0])
    return length, list(reversed(path))


def memory_unaware_latency(graph, memory_map, cfg):
    """Latency a memory-blind flow would promise: the ASAP critical path."""
    return critical_path(graph, memory_map, cfg)[0]


def alap(graph, memory_map, cfg):
    """
    Latest start of every non-delay vertex that still meets the horizon.

    Raises:
        InfeasibleError: the critical path alone exceeds the horizon

    Returns:
        dict: vertex id -> deadline
    """
    length, path = critical_path(graph, memory_map, cfg)
    if length > cfg.horizon:
        raise InfeasibleError(f"critical path of {length} cycles exceeds horizon {cfg.horizon}", path=path)

    latency = {v.id: nominal_latency(memory_map, cfg, v) for v in graph.schedulable()}
    latest = {}
    for vertex_id in reversed(graph.topological_order):
        bound = min((latest[s] for s in graph.precedence.successors(vertex_id)), default=cfg.horizon)
        latest[vertex_id] = bound - latency[vertex_id]
    return latest


def mobility(vertex_id, current_cycle, deadlines):
    """Deadline minus current cycle; negative means the horizon is already lost."""
    return deadlines[vertex_id] - current_cycle


##### List scheduler #####

class ListScheduler:
    """
    Single scheduling run. Owns its token pools; inputs are never mutated,
    so independent runs can execute on separate threads.
    """

    def __init__(self, graph, memory_map, cfg):
        require_coverage(memory_map, graph)
        self.graph = graph
        self.memory_map = memory_map
        self.cfg = cfg
        self.deadlines = alap(graph, memory_map, cfg)
        self.weights = conflict_weights(build_mcg(graph, memory_map))
        self.windows = sorted(memory_map.transfer_windows(), key=lambda w: (w.start, w.symbol))

        for window in self.windows:
            if window.end > cfg.horizon:
                raise InfeasibleError(f"transfer of '{window.symbol}' ends at cycle {window.end}, "
                                      f"past horizon {cfg.horizon}", cycle=window.start)

        self.bank_pools = {
            bank.name: TokenPool(bank.name, bank.ports,
                                 [(w.start, w.end) for w in self.windows if bank.name in w.banks])
            for bank in memory_map.banks
        }
        self.fu_pools = {op: TokenPool(op, limit) for op, limit in (cfg.fu_limits or {}).items()}
        self.entries = {}
        self.dma = []

    def pools(self):
        return list(self.bank_pools.values()) + list(self.fu_pools.values())

    def run(self):
        pending = {v.id for v in self.graph.schedulable()}
        windows = list(self.windows)
        cycle = 0

        while pending or windows:
            if pending and cycle > self.cfg.horizon:
                raise InfeasibleError("horizon exceeded with work remaining", cycle=cycle, vertices=sorted(pending))
            for pool in self.pools():
                pool.retire(cycle)
            while windows and windows[0].start == cycle:
                self._apply_transfer(windows.pop(0), cycle)
            if pending:
                self._schedule_cycle(cycle, pending)
            cycle += 1

        schedule = Schedule(self.graph.name, tuple(self.entries.values()), tuple(self.dma))
        logger.info(f"Scheduled '{self.graph.name}' in {schedule.achieved_latency} cycles "
                    f"(horizon {self.cfg.horizon})")
        return schedule

    def _apply_transfer(self, window, cycle):
        directive = window.directive
        holder = f"dma:{window.symbol}"
        for bank in window.banks:
            pool = self.bank_pools[bank]
            if not pool.claim_reservation(window.start, window.end, holder):
                busy = sorted(h for _, h in pool.in_flight)
                logger.error(f"Transfer of {window.symbol} finds no free port on {bank} at cycle {cycle}")
                raise TransferClashError(f"transfer of '{window.symbol}' finds no free port on bank '{bank}'",
                                         cycle=cycle, vertices=[holder] + busy)
        self.dma.append(DmaEntry(window.symbol, directive.from_bank, directive.to_bank, window.start, window.end))

    def _ready(self, cycle, pending):
        ready = []
        for vertex_id in sorted(pending):
            preds = self.graph.precedence.predecessors(vertex_id)
            if all(p in self.entries and self.entries[p].end <= cycle for p in preds):
                ready.append(vertex_id)
        return ready

    def _priority(self, vertex_id, cycle):
        return (mobility(vertex_id, cycle, self.deadlines), -self.weights.get(vertex_id, 0), vertex_id)

    def _schedule_cycle(self, cycle, pending):
        while True:
            ready = self._ready(cycle, pending)
            late = [v for v in ready if mobility(v, cycle, self.deadlines) < 0]
            if late:
                logger.error(f"Negative mobility at cycle {cycle}: {late}")
                raise InfeasibleError("negative mobility", cycle=cycle, vertices=late)

            candidates = sorted((v for v in ready if self._accessible(v, cycle)),
                                key=lambda v: self._priority(v, cycle))
            logger.debug(f"cycle {cycle}: ready={ready} candidates={candidates}")

            released_now = False
            for vertex_id in candidates:
                entry = self._try_start(vertex_id, cycle)
                if entry is None:
                    logger.debug(f"cycle {cycle}: {vertex_id} postponed")
                    continue
                pending.discard(vertex_id)
                released_now = released_now or entry.end == cycle
            # zero-latency vertices finish this cycle and may release successors
            if not released_now:
                return

    def _accessible(self, vertex_id, cycle):
        vertex = self.graph.vertex(vertex_id)
        if not vertex.is_data:
            return True
        latency = vertex_latency(self.memory_map, self.cfg, vertex, cycle)
        if in_transfer(self.memory_map, vertex.symbol, cycle, cycle + latency):
            return False
        bank = residence(self.memory_map, vertex.symbol, cycle)
        if bank == REGISTER:
            return True
        return self.bank_pools[bank].accessible(cycle, latency)

    def _try_start(self, vertex_id, cycle):
        vertex = self.graph.vertex(vertex_id)
        latency = vertex_latency(self.memory_map, self.cfg, vertex, cycle)
        resource = vertex_resource(self.memory_map, vertex, cycle)

        if vertex.is_data:
            pool = self.bank_pools.get(resource)
        else:
            pool = self.fu_pools.get(resource)
        if pool is not None and latency > 0:
            if not pool.accessible(cycle, latency):
                return None
            pool.take_token(vertex_id, cycle, latency)

        entry = ScheduleEntry(vertex_id, cycle, cycle + latency, resource)
        self.entries[vertex_id] = entry
        return entry


def schedule(graph, memory_map, cfg):
    """
    Run the memory-aware list scheduler.

    Args:
        graph (SfgGraph): A valid graph
        memory_map (MemoryMap): A map covering every symbol of the graph
        cfg (SchedulerConfig): Horizon, operator latencies and unit limits

    Raises:
        CoverageError: a symbol has no placement
        InfeasibleError: negative mobility or horizon exceeded
        TransferClashError: a declared transfer finds its ports busy

    Returns:
        Schedule
    """
    return ListScheduler(graph, memory_map, cfg).run()
