"""
Signal Flow Graph intermediate representation.

A graph holds operation vertices (arithmetic or logical), data vertices (one
word read or written in memory) and delay vertices (z^-1, a value coming from
a previous iteration). Edges are data dependencies. Delay vertices cost no
time; they only cut the intra-iteration precedence between their producer and
their consumers.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Tuple

import networkx as nx

from .errors import ParseError, ValidationError
from .textfmt import iter_lines, parse_fields, parse_int

logger = logging.getLogger(__name__)

##### Vertex kinds #####

class VertexKind(str, Enum):
    ARITHMETIC = "arithmetic"
    LOGICAL = "logical"
    DATA = "data"
    DELAY = "delay"


LOGICAL_OPS = frozenset({
    "and", "or", "xor", "not", "nand", "nor", "shl", "shr",
    "cmp", "eq", "ne", "lt", "le", "gt", "ge", "mux",
})

ACCESS_MODES = ("read", "write")


def classify_op(op_name):
    """Map a free-form op-name to the arithmetic or logical vertex kind."""
    return VertexKind.LOGICAL if op_name in LOGICAL_OPS else VertexKind.ARITHMETIC


##### Domain types #####

@dataclass(frozen=True)
class SfgVertex:
    id: str
    kind: VertexKind
    op: Optional[str] = None
    symbol: Optional[str] = None
    access: Optional[str] = None
    depth: Optional[int] = None

    def __post_init__(self):
        if not self.id or "=" in self.id:
            raise ValidationError(f"invalid vertex id '{self.id}'")
        if self.kind is VertexKind.DATA:
            if not self.symbol or self.access not in ACCESS_MODES:
                raise ValidationError(f"data vertex '{self.id}' needs symbol and access=read|write")
        elif self.symbol is not None or self.access is not None:
            raise ValidationError(f"only data vertices carry symbol/access ('{self.id}')")

        if self.kind is VertexKind.DELAY:
            if self.depth is None or self.depth < 1:
                raise ValidationError(f"delay vertex '{self.id}' needs depth >= 1")
        elif self.depth is not None:
            raise ValidationError(f"only delay vertices carry depth ('{self.id}')")

        if self.kind in (VertexKind.ARITHMETIC, VertexKind.LOGICAL) and not self.op:
            raise ValidationError(f"operation vertex '{self.id}' needs an op-name")

    @classmethod
    def operation(cls, vertex_id, op):
        return cls(vertex_id, classify_op(op), op=op)

    @classmethod
    def data(cls, vertex_id, symbol, access):
        return cls(vertex_id, VertexKind.DATA, symbol=symbol, access=access)

    @classmethod
    def delay(cls, vertex_id, depth=1):
        return cls(vertex_id, VertexKind.DELAY, depth=depth)

    @property
    def is_data(self):
        return self.kind is VertexKind.DATA

    @property
    def is_delay(self):
        return self.kind is VertexKind.DELAY

    @property
    def is_operation(self):
        return self.kind in (VertexKind.ARITHMETIC, VertexKind.LOGICAL)

    @property
    def is_read(self):
        return self.is_data and self.access == "read"

    @property
    def is_write(self):
        return self.is_data and self.access == "write"

    @property
    def kind_label(self):
        """The `kind=` value used in the text format."""
        return self.op if self.is_operation else self.kind.value


@dataclass(frozen=True, order=True)
class SfgEdge:
    src: str
    dst: str

    def __post_init__(self):
        if self.src == self.dst:
            raise ValidationError(f"self-loop on '{self.src}'")


@dataclass(frozen=True)
class SfgGraph:
    """
    Validated, canonically ordered Signal Flow Graph.

    Vertices are kept sorted by id and edges sorted by (src, dst), so two graphs
    built from the same lines in any order compare equal.
    """
    name: str
    vertices: Tuple[SfgVertex, ...]
    edges: Tuple[SfgEdge, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices, key=lambda v: v.id)))
        object.__setattr__(self, "edges", tuple(sorted(set(self.edges))))
        self._validate()

    def _validate(self):
        ids = [v.id for v in self.vertices]
        duplicates = sorted(vid for vid, count in Counter(ids).items() if count > 1)
        if duplicates:
            raise ValidationError(f"duplicate vertex id '{duplicates[0]}'")

        known = set(ids)
        for edge in self.edges:
            for endpoint in (edge.src, edge.dst):
                if endpoint not in known:
                    raise ValidationError(f"edge {edge.src} -> {edge.dst}: unknown vertex '{endpoint}'")

        if not nx.is_directed_acyclic_graph(self.precedence):
            cycle = [u for u, _ in nx.find_cycle(self.precedence)]
            raise ValidationError(f"cycle without delay vertex: {' -> '.join(cycle + cycle[:1])}")

        delays = self.full_graph.subgraph(v.id for v in self.vertices if v.is_delay)
        if not nx.is_directed_acyclic_graph(delays):
            cycle = [u for u, _ in nx.find_cycle(delays)]
            raise ValidationError(f"cycle made only of delay vertices: {' -> '.join(cycle)}")

        for vertex in self.vertices:
            if vertex.is_read and self.full_graph.out_degree(vertex.id) == 0:
                raise ValidationError(f"data read '{vertex.id}' has no consumer")
            if vertex.is_write and self.full_graph.in_degree(vertex.id) == 0:
                raise ValidationError(f"data write '{vertex.id}' has no producer")

    ##### Lookups #####

    @cached_property
    def vertex_map(self):
        return {v.id: v for v in self.vertices}

    def vertex(self, vertex_id):
        return self.vertex_map[vertex_id]

    @cached_property
    def full_graph(self):
        """Every vertex and edge, delays included."""
        graph = nx.DiGraph()
        graph.add_nodes_from(v.id for v in self.vertices)
        graph.add_edges_from((e.src, e.dst) for e in self.edges)
        return graph

    @cached_property
    def precedence(self):
        """
        Intra-iteration precedence over non-delay vertices.

        Edges touching a delay vertex are dropped: the consumer behind a delay
        reads a value from a previous iteration.
        """
        graph = nx.DiGraph()
        graph.add_nodes_from(v.id for v in self.vertices if not v.is_delay)
        for edge in self.edges:
            if graph.has_node(edge.src) and graph.has_node(edge.dst):
                graph.add_edge(edge.src, edge.dst)
        return graph

    @cached_property
    def topological_order(self):
        """Deterministic topological order of the precedence DAG."""
        return tuple(nx.lexicographical_topological_sort(self.precedence))

    @cached_property
    def reachable(self):
        """vertex id -> frozenset of vertices that must follow it."""
        return {v: frozenset(nx.descendants(self.precedence, v)) for v in self.precedence}

    def ordered(self, u, v):
        """True if u and v are comparable in the precedence relation."""
        return v in self.reachable[u] or u in self.reachable[v]

    def schedulable(self):
        """Non-delay vertices, in id order."""
        return [v for v in self.vertices if not v.is_delay]

    def data_vertices(self):
        return [v for v in self.vertices if v.is_data]

    def symbols(self):
        return sorted({v.symbol for v in self.vertices if v.is_data})


@dataclass(frozen=True)
class MemoryTableRow:
    symbol: str
    accesses: int
    reads: int
    writes: int
    suggested_kind: Optional[str] = None


##### Parsing #####

def parse_sfg(text, source=None):
    """
    Parse and validate an SFG file.

    Args:
        text (str): File contents
        source (str): Name used in diagnostics (usually the path)

    Returns:
        SfgGraph: the validated graph
    """
    try:
        return _parse_sfg(text)
    except ParseError as e:
        raise e.with_source(source) if source else e


def _parse_sfg(text):
    name = None
    vertices = []
    edges = []
    vertex_lines = {}

    for lineno, words in iter_lines(text):
        head = words[0]
        if name is None:
            if head != "sfg" or len(words) != 2:
                raise ParseError("first line must be 'sfg <name>'", line=lineno)
            name = words[1]
            continue

        if head == "node":
            if len(words) < 3:
                raise ParseError("expected 'node <id> kind=<kind> ...'", line=lineno)
            vertex_id = words[1]
            if vertex_id in vertex_lines:
                raise ParseError(f"duplicate vertex id '{vertex_id}' (first at line {vertex_lines[vertex_id]})",
                                 line=lineno)
            fields = parse_fields(words[2:], lineno, allowed=("kind", "symbol", "access", "depth"),
                                  required=("kind",))
            vertices.append(_build_vertex(vertex_id, fields, lineno))
            vertex_lines[vertex_id] = lineno
        elif head == "edge":
            if len(words) != 4 or words[2] != "->":
                raise ParseError("expected 'edge <src> -> <dst>'", line=lineno)
            edges.append((words[1], words[3], lineno))
        elif head == "sfg":
            raise ParseError("'sfg' header repeated", line=lineno)
        else:
            raise ParseError(f"unknown statement '{head}'", line=lineno)

    if name is None:
        raise ParseError("empty SFG file, expected 'sfg <name>'")

    sfg_edges = []
    for src, dst, lineno in edges:
        for endpoint in (src, dst):
            if endpoint not in vertex_lines:
                raise ValidationError(f"dangling edge endpoint '{endpoint}'", line=lineno)
        try:
            sfg_edges.append(SfgEdge(src, dst))
        except ValidationError as e:
            raise ValidationError(e.reason, line=lineno) from None

    graph = SfgGraph(name, tuple(vertices), tuple(sfg_edges))
    logger.info(f"Parsed SFG '{name}': {len(graph.vertices)} vertices, {len(graph.edges)} edges")
    return graph


def _build_vertex(vertex_id, fields, lineno):
    kind = fields["kind"]
    try:
        if kind == "data":
            if "depth" in fields:
                raise ValidationError(f"only delay vertices carry depth ('{vertex_id}')")
            return SfgVertex.data(vertex_id, fields.get("symbol"), fields.get("access"))
        if "symbol" in fields or "access" in fields:
            raise ValidationError(f"only data vertices carry symbol/access ('{vertex_id}')")
        if kind == "delay":
            depth = parse_int(fields.get("depth", "1"), lineno, "depth", minimum=1)
            return SfgVertex.delay(vertex_id, depth)
        if "depth" in fields:
            raise ValidationError(f"only delay vertices carry depth ('{vertex_id}')")
        return SfgVertex.operation(vertex_id, kind)
    except ValidationError as e:
        raise ValidationError(e.reason, line=lineno) from None


def serialize_sfg(graph):
    """Canonical text form: parse(serialize(g)) == g."""
    lines = [f"sfg {graph.name}"]
    for vertex in graph.vertices:
        line = f"node {vertex.id} kind={vertex.kind_label}"
        if vertex.is_data:
            line += f" symbol={vertex.symbol} access={vertex.access}"
        elif vertex.is_delay:
            line += f" depth={vertex.depth}"
        lines.append(line)
    for edge in graph.edges:
        lines.append(f"edge {edge.src} -> {edge.dst}")
    return "\n".join(lines) + "\n"


##### Operations #####

def precedence_graph(graph):
    """Intra-iteration precedence DAG (networkx DiGraph) over the non-delay vertices."""
    return graph.precedence


def extract_memory_table(graph):
    """
    Build the memory table skeleton: one row per symbol of any data vertex.

    Args:
        graph (SfgGraph): A valid graph

    Returns:
        list of MemoryTableRow sorted by symbol; suggested_kind stays unset
    """
    reads = Counter(v.symbol for v in graph.vertices if v.is_read)
    writes = Counter(v.symbol for v in graph.vertices if v.is_write)
    return [
        MemoryTableRow(symbol, reads[symbol] + writes[symbol], reads[symbol], writes[symbol])
        for symbol in sorted(set(reads) | set(writes))
    ]


def iteration_dependencies(graph):
    """
    Inter-iteration dependencies carried by delay vertices.

    Every path producer -> delay... -> consumer yields (producer, consumer,
    summed depth). Depths add along chained delays and a delay may fan out to
    consumers reached through different depths.

    Returns:
        frozenset of (producer id, consumer id, depth)
    """
    full = graph.full_graph
    found = set()

    def walk(producer, delay_id, depth):
        for succ in sorted(full.successors(delay_id)):
            vertex = graph.vertex(succ)
            if vertex.is_delay:
                walk(producer, succ, depth + vertex.depth)
            else:
                found.add((producer, succ, depth))

    for edge in graph.edges:
        src, dst = graph.vertex(edge.src), graph.vertex(edge.dst)
        if not src.is_delay and dst.is_delay:
            walk(src.id, dst.id, dst.depth)
    return frozenset(found)
