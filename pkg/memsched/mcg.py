"""
Memory Constraint Graphs and port tokens.

One MCG per populated bank links the data vertices that may compete for the
bank's ports. The graph itself is advisory (diagnostics and tie-breaking);
the TokenPool is what the scheduler consults to decide accessibility.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Tuple

from .errors import TokenPoolExhausted
from .memory_model import REGISTER, residence

logger = logging.getLogger(__name__)

##### Memory Constraint Graph #####

@dataclass(frozen=True)
class Mcg:
    bank: str
    nodes: Tuple[str, ...]
    conflict_edges: Tuple[Tuple[str, str, int], ...]
    token_capacity: int

    def weight_of(self, vertex_id):
        """Sum of the weights of the conflict edges touching a vertex."""
        return sum(w for u, v, w in self.conflict_edges if vertex_id in (u, v))


def build_mcg(graph, memory_map):
    """
    Build one MCG per bank holding at least one data vertex at cycle 0.

    Two resident data vertices conflict when neither precedes the other; the
    edge weight is 1 + the number of operations consuming both.

    Args:
        graph (SfgGraph): A valid graph
        memory_map (MemoryMap): A map covering every symbol of the graph

    Returns:
        list of Mcg sorted by bank name
    """
    residents = defaultdict(list)
    for vertex in graph.data_vertices():
        bank = residence(memory_map, vertex.symbol, 0)
        if bank != REGISTER:
            residents[bank].append(vertex.id)

    mcgs = []
    for bank in sorted(residents):
        nodes = tuple(sorted(residents[bank]))
        edges = []
        for u, v in combinations(nodes, 2):
            if graph.ordered(u, v):
                continue
            shared = _consumers(graph, u) & _consumers(graph, v)
            edges.append((u, v, 1 + len(shared)))
        mcgs.append(Mcg(bank, nodes, tuple(edges), memory_map.bank(bank).ports))
        logger.debug(f"MCG {bank}: {len(nodes)} nodes, {len(edges)} conflict edges")
    return mcgs


def _consumers(graph, vertex_id):
    return {succ for succ in graph.full_graph.successors(vertex_id) if graph.vertex(succ).is_operation}


def conflict_weights(mcgs):
    """vertex id -> total conflict weight across all MCGs."""
    weights = defaultdict(int)
    for mcg in mcgs:
        for u, v, w in mcg.conflict_edges:
            weights[u] += w
            weights[v] += w
    return dict(weights)


def conflict_weight(mcgs, vertex_id):
    """Sum of the conflict edge weights incident to one vertex."""
    return sum(mcg.weight_of(vertex_id) for mcg in mcgs)


def dump_mcg(mcgs):
    """Debug dump, one `<bank>: <u> -- <v> w=<weight>` line per edge, sorted."""
    lines = sorted(f"{mcg.bank}: {u} -- {v} w={w}" for mcg in mcgs for u, v, w in mcg.conflict_edges)
    return "\n".join(lines) + ("\n" if lines else "")


##### Token pool #####

class TokenPool:
    """
    Idle/busy tokens of one resource: the ports of a bank, or the units of a
    functional-unit class.

    A holder takes a token for `latency` cycles; the token comes back at
    take cycle + latency. Reservations are declared DMA windows that will
    claim a token later; an access is granted only if its whole window fits
    next to them.
    """

    def __init__(self, resource, capacity, reservations=()):
        self.resource = resource
        self.capacity = capacity
        self.in_flight = []
        self.reservations = sorted(reservations)
        self.taken = 0
        self.released = 0

    def __repr__(self):
        return f"TokenPool({self.resource!r}, {len(self.in_flight)}/{self.capacity} busy)"

    def retire(self, cycle):
        """Give back every token whose release cycle is <= cycle."""
        done = [entry for entry in self.in_flight if entry[0] <= cycle]
        if done:
            self.in_flight = [entry for entry in self.in_flight if entry[0] > cycle]
            self.released += len(done)
        return done

    def load(self, cycle):
        """Tokens busy at a cycle, counting reservations."""
        busy = sum(1 for release, _ in self.in_flight if release > cycle)
        return busy + sum(1 for start, end in self.reservations if start <= cycle < end)

    def accessible(self, cycle, latency=1):
        """True if a token stays idle over [cycle, cycle + latency)."""
        self.retire(cycle)
        return all(self.load(t) < self.capacity for t in range(cycle, cycle + max(latency, 1)))

    def take_token(self, holder, cycle, latency):
        """
        Take a token for `latency` cycles starting at `cycle`.

        Raises:
            TokenPoolExhausted: the caller did not check accessible() first
        """
        if latency < 1:
            raise ValueError(f"token held by '{holder}' needs latency >= 1, got {latency}")
        if not self.accessible(cycle, latency):
            raise TokenPoolExhausted(f"no idle token on '{self.resource}' for '{holder}' at cycle {cycle}")
        self.in_flight.append((cycle + latency, holder))
        self.taken += 1
        return self

    def claim_reservation(self, start, end, holder):
        """Turn a declared reservation into a held token; False if no port is free."""
        self.reservations.remove((start, end))
        if not self.accessible(start, end - start):
            return False
        self.take_token(holder, start, end - start)
        return True

    def conserved(self):
        """Token conservation: taken = released + in flight."""
        return self.taken == self.released + len(self.in_flight)
