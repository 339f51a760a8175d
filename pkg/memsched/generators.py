"""
Kernel builders and seeded random instances.

Used by the test suite and by scripts/generate-corpus.py. Every random
generator takes a random.Random so that a seed reproduces the instance.
"""

import logging
import random

from .config import SchedulerConfig
from .memory_model import REGISTER, MemoryBank, MemoryMap, Placement
from .scheduler import nominal_latency
from .sfg_core import SfgEdge, SfgGraph, SfgVertex

logger = logging.getLogger(__name__)

RANDOM_OPS = ("add", "sub", "mul", "and", "xor")
RANDOM_SYMBOLS = ("A", "B", "C", "D", "E", "F")


def _graph(name, vertices, edges):
    return SfgGraph(name, tuple(vertices), tuple(SfgEdge(src, dst) for src, dst in edges))


def _read(vertex_id, symbol):
    return SfgVertex.data(vertex_id, symbol, "read")


def _write(vertex_id, symbol):
    return SfgVertex.data(vertex_id, symbol, "write")


def single_bank_map(symbols, ports=1, read_latency=1, write_latency=1, registers=(), sizes=None):
    """Every symbol in one bank B0 at consecutive addresses, except the register ones."""
    sizes = sizes or {}
    placements, address = [], 0
    for symbol in symbols:
        if symbol in registers:
            placements.append(Placement(symbol, REGISTER))
            continue
        size = sizes.get(symbol, 1)
        placements.append(Placement(symbol, "memory", "B0", address, size))
        address += size
    bank = MemoryBank("B0", ports, read_latency, write_latency, max(1, address))
    return MemoryMap((bank,), tuple(placements))


##### Fixed kernels #####

def copy_kernel():
    """y = a"""
    return _graph("copy", [_read("a", "A"), _write("y_w", "Y")], [("a", "y_w")])


def add_kernel():
    """c = a + b"""
    vertices = [_read("a", "A"), _read("b", "B"), SfgVertex.operation("add1", "add"), _write("y_w", "C")]
    return _graph("add", vertices, [("a", "add1"), ("b", "add1"), ("add1", "y_w")])


def add_kernel_map(ports=1, registers=()):
    return single_bank_map(["A", "B", "C"], ports=ports, registers=registers)


def fir(taps):
    """
    Direct-form FIR: y = sum c[k] * x[n-k].

    Sample reads x1.. sit behind a chain of unit delays fed by x0, so the
    graph carries (x[k-1], x[k], 1) iteration dependencies.
    """
    vertices = [_write("y", "Y")]
    edges = []
    for k in range(taps):
        vertices += [_read(f"c{k}", "C"), _read(f"x{k}", "X"), SfgVertex.operation(f"m{k}", "mul")]
        edges += [(f"c{k}", f"m{k}"), (f"x{k}", f"m{k}")]
        if k:
            vertices.append(SfgVertex.delay(f"d{k}"))
            edges += [(f"x{k - 1}", f"d{k}"), (f"d{k}", f"x{k}")]

    acc = "m0"
    for k in range(1, taps):
        vertices.append(SfgVertex.operation(f"a{k}", "add"))
        edges += [(acc, f"a{k}"), (f"m{k}", f"a{k}")]
        acc = f"a{k}"
    edges.append((acc, "y"))
    return _graph(f"fir{taps}", vertices, edges)


def fir_map(taps, banks=1, ports=1):
    """Coefficients, samples and output on one bank, or C on B0 and X, Y on B1."""
    if banks == 1:
        return single_bank_map(["C", "X", "Y"], ports=ports, sizes={"C": taps, "X": taps})
    bank_list = (MemoryBank("B0", ports, 1, 1, taps), MemoryBank("B1", ports, 1, 1, taps + 1))
    placements = (Placement("C", "memory", "B0", 0, taps),
                  Placement("X", "memory", "B1", 0, taps),
                  Placement("Y", "memory", "B1", taps))
    return MemoryMap(bank_list, placements)


def iir_biquad():
    """
    Direct form I biquad:
    y = b0*x + b1*x[n-1] + b2*x[n-2] - a1*y[n-1] - a2*y[n-2].
    """
    vertices = [
        _read("x", "X"), _read("b0", "B"), _read("b1", "B"), _read("b2", "B"),
        _read("a1", "A"), _read("a2", "A"), _write("y", "Y"),
        SfgVertex.delay("dx1"), SfgVertex.delay("dx2"), SfgVertex.delay("dy1"), SfgVertex.delay("dy2"),
    ]
    vertices += [SfgVertex.operation(v, "mul") for v in ("mb0", "mb1", "mb2", "ma1", "ma2")]
    vertices += [SfgVertex.operation("s1", "add"), SfgVertex.operation("s2", "add"),
                 SfgVertex.operation("s3", "sub"), SfgVertex.operation("s4", "sub")]
    edges = [
        ("x", "mb0"), ("b0", "mb0"),
        ("x", "dx1"), ("dx1", "mb1"), ("b1", "mb1"),
        ("dx1", "dx2"), ("dx2", "mb2"), ("b2", "mb2"),
        ("mb0", "s1"), ("mb1", "s1"), ("s1", "s2"), ("mb2", "s2"),
        ("s2", "s3"), ("ma1", "s3"), ("s3", "s4"), ("ma2", "s4"),
        ("s4", "y"), ("s4", "dy1"), ("dy1", "ma1"), ("a1", "ma1"),
        ("dy1", "dy2"), ("dy2", "ma2"), ("a2", "ma2"),
    ]
    return _graph("biquad", vertices, edges)


def mac4x4():
    """4x4 matrix times 4-vector, one read per matrix element and per vector element."""
    vertices, edges = [], []
    for k in range(4):
        vertices.append(_read(f"v{k}", "V"))
    for r in range(4):
        for k in range(4):
            vertices += [_read(f"m{r}{k}", "M"), SfgVertex.operation(f"p{r}{k}", "mul")]
            edges += [(f"m{r}{k}", f"p{r}{k}"), (f"v{k}", f"p{r}{k}")]
        acc = f"p{r}0"
        for k in range(1, 4):
            vertices.append(SfgVertex.operation(f"s{r}{k}", "add"))
            edges += [(acc, f"s{r}{k}"), (f"p{r}{k}", f"s{r}{k}")]
            acc = f"s{r}{k}"
        vertices.append(_write(f"y{r}", "Y"))
        edges.append((acc, f"y{r}"))
    return _graph("mac4x4", vertices, edges)


def star(n):
    """n reads of S feeding one add whose result goes to register O."""
    vertices = [_read(f"r{i}", "S") for i in range(n)]
    vertices += [SfgVertex.operation("sum", "add"), _write("out", "O")]
    edges = [(f"r{i}", "sum") for i in range(n)] + [("sum", "out")]
    return _graph(f"star{n}", vertices, edges)


def star_map(n, ports=1):
    return single_bank_map(["S", "O"], ports=ports, registers=("O",), sizes={"S": n})


def fixture_corpus():
    """(graph, map) pairs of every hand-built kernel, in a fixed order."""
    return [
        (copy_kernel(), single_bank_map(["A", "Y"])),
        (add_kernel(), add_kernel_map(1)),
        (add_kernel(), add_kernel_map(2)),
        (add_kernel(), add_kernel_map(1, registers=("A", "B"))),
        (fir(4), fir_map(4, 1)),
        (fir(4), fir_map(4, 2)),
        (fir(16), fir_map(16, 1)),
        (fir(16), fir_map(16, 2)),
        (iir_biquad(), single_bank_map(["X", "B", "A", "Y"], sizes={"B": 3, "A": 2})),
        (iir_biquad(), single_bank_map(["X", "B", "A", "Y"], ports=2, registers=("X", "Y"),
                                       sizes={"B": 3, "A": 2})),
        (mac4x4(), single_bank_map(["M", "V", "Y"], sizes={"M": 16, "V": 4, "Y": 4})),
        (mac4x4(), single_bank_map(["M", "V", "Y"], ports=2, sizes={"M": 16, "V": 4, "Y": 4})),
    ]


##### Random instances #####

def random_sfg(rng, max_vertices=30, delay_probability=0.2):
    """
    Random valid SFG with at most max_vertices vertices (delays included).

    Reads feed operations, operations feed later operations and writes;
    delay vertices link a producer to any operation, possibly an earlier
    one, which forms a legal loop through the delay.
    """
    budget = rng.randint(3, max(3, max_vertices))
    reads = rng.randint(1, max(1, budget // 3))
    writes = rng.randint(1, max(1, budget // 6))
    ops = max(1, budget - reads - writes)
    delays = sum(1 for _ in range(ops) if rng.random() < delay_probability)
    while reads + writes + ops + delays > max_vertices and delays:
        delays -= 1
    while reads + writes + ops + delays > max_vertices and ops > 1:
        ops -= 1
    while reads + writes + ops + delays > max_vertices and reads > 1:
        reads -= 1

    symbols = RANDOM_SYMBOLS[:rng.randint(1, len(RANDOM_SYMBOLS))]
    vertices = [_read(f"r{i}", rng.choice(symbols)) for i in range(reads)]
    vertices += [SfgVertex.operation(f"o{i}", rng.choice(RANDOM_OPS)) for i in range(ops)]
    vertices += [_write(f"w{i}", rng.choice(symbols)) for i in range(writes)]
    vertices += [SfgVertex.delay(f"z{i}", rng.choice((1, 1, 2))) for i in range(delays)]

    edges = set()
    for i in range(reads):
        edges.add((f"r{i}", f"o{i % ops}"))
    for i in range(ops):
        sources = [f"r{k}" for k in range(reads)] + [f"o{k}" for k in range(i)]
        for src in rng.sample(sources, min(len(sources), rng.randint(1, 2))):
            edges.add((src, f"o{i}"))
    for i in range(writes):
        edges.add((f"o{rng.randrange(ops)}", f"w{i}"))
    for i in range(delays):
        producer = rng.choice([f"o{k}" for k in range(ops)] + [f"r{k}" for k in range(reads)])
        edges.add((producer, f"z{i}"))
        edges.add((f"z{i}", f"o{rng.randrange(ops)}"))

    return _graph(f"rand{rng.randrange(10 ** 6)}", vertices, sorted(edges))


def random_map(rng, graph, max_banks=3, max_ports=2, register_probability=0.15):
    """Random static map covering every symbol of the graph."""
    bank_count = rng.randint(1, max_banks)
    names = [f"B{i}" for i in range(bank_count)]
    usage = {name: 0 for name in names}
    placements = []
    for symbol in graph.symbols():
        if rng.random() < register_probability:
            placements.append(Placement(symbol, REGISTER))
            continue
        bank = rng.choice(names)
        placements.append(Placement(symbol, "memory", bank, usage[bank]))
        usage[bank] += 1
    banks = tuple(MemoryBank(name, rng.randint(1, max_ports), rng.randint(1, 2), rng.randint(1, 2),
                             max(1, usage[name]))
                  for name in names)
    return MemoryMap(banks, tuple(placements))


def random_config(rng, graph, memory_map, slack=0):
    """
    Config whose horizon is the serial sum of all latencies (plus slack), a
    bound the list scheduler always meets on static maps.
    """
    op_latency = {op: rng.randint(1, 2) for op in RANDOM_OPS}
    cfg = SchedulerConfig(horizon=1, op_latency=op_latency)
    total = sum(nominal_latency(memory_map, cfg, v) for v in graph.schedulable())
    return cfg.with_horizon(max(1, total + slack))


def random_instance(seed, max_vertices=30, max_banks=3, max_ports=2):
    rng = random.Random(seed)
    graph = random_sfg(rng, max_vertices)
    memory_map = random_map(rng, graph, max_banks, max_ports)
    return graph, memory_map, random_config(rng, graph, memory_map)
