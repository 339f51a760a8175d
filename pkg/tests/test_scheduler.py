import math

import pytest

from memsched.checker import check_schedule
from memsched.config import SchedulerConfig
from memsched.errors import CoverageError, InfeasibleError, TransferClashError
from memsched.generators import fir, fir_map, star, star_map
from memsched.memory_model import parse_memory_map
from memsched.report import dump_schedule
from memsched.scheduler import ListScheduler, alap, asap, critical_path, mobility, schedule
from memsched.sfg_core import parse_sfg
from tests.conftest import load_fixture

TWO_READS = ("sfg two\nnode a kind=data symbol=A access=read\nnode c kind=data symbol=C access=read\n"
             "node p kind=add\nnode w kind=data symbol=W access=write\n"
             "edge a -> p\nedge c -> p\nedge p -> w\n")


def starts(result):
    return {e.vertex: (e.start, e.end, e.resource) for e in result.entries}


def test_add_kernel_one_port(add_1port):
    graph, memory_map, cfg = add_1port
    result = schedule(graph, memory_map, cfg)
    assert starts(result) == {
        "a": (0, 1, "B0"),
        "b": (1, 2, "B0"),
        "add1": (2, 3, "add"),
        "y_w": (3, 4, "B0"),
    }
    assert result.achieved_latency == 4
    assert result.dma == ()


def test_add_kernel_two_ports():
    graph, memory_map, cfg = load_fixture("add.sfg", "add_2port.map", "add_h3.cfg")
    result = schedule(graph, memory_map, cfg)
    assert result.achieved_latency == 3
    assert result.entry("a").start == result.entry("b").start == 0


def test_register_operands_cost_nothing():
    graph, memory_map, cfg = load_fixture("add.sfg", "add_regs.map", "add_h4.cfg")
    result = schedule(graph, memory_map, cfg)
    assert result.entry("a").end == 0 and result.entry("a").resource == "register"
    assert result.entry("add1").start == 0
    assert result.achieved_latency == 2


def test_horizon_below_critical_path_reports_the_path():
    graph, memory_map, _ = load_fixture("add.sfg", "add_1port.map")
    with pytest.raises(InfeasibleError) as err:
        schedule(graph, memory_map, SchedulerConfig(horizon=2))
    assert err.value.path == ("a", "add1", "y_w")


def test_negative_mobility_aborts():
    graph, memory_map, cfg = load_fixture("add.sfg", "add_1port.map", "add_h3.cfg")
    with pytest.raises(InfeasibleError) as err:
        schedule(graph, memory_map, cfg)
    assert err.value.cycle == 1
    assert err.value.vertices == ("b",)


def test_four_reads_one_port_horizon_three():
    graph, memory_map = star(4), star_map(4, ports=1)
    with pytest.raises(InfeasibleError):
        schedule(graph, memory_map, SchedulerConfig(horizon=3))


def test_asap_alap_mobility(add_1port):
    graph, memory_map, cfg = add_1port
    assert asap(graph, memory_map, cfg) == {"a": 0, "b": 0, "add1": 1, "y_w": 2}
    deadlines = alap(graph, memory_map, cfg)
    assert deadlines == {"a": 1, "b": 1, "add1": 2, "y_w": 3}
    assert mobility("b", 1, deadlines) == 0
    assert mobility("b", 2, deadlines) == -1
    assert critical_path(graph, memory_map, cfg) == (3, ["a", "add1", "y_w"])


def test_fir4_critical_path(fir4_cfg):
    length, path = critical_path(fir(4), fir_map(4, 1), fir4_cfg)
    assert length == 7
    assert path[-1] == "y"


def test_fir4_two_banks_beat_one(fir4_cfg):
    graph = fir(4)
    one = schedule(graph, fir_map(4, banks=1), fir4_cfg)
    two = schedule(graph, fir_map(4, banks=2), fir4_cfg)

    def read_phase(result):
        return max(e.end for e in result.entries if graph.vertex(e.vertex).is_read)

    assert read_phase(one) == 8
    assert read_phase(two) == 4
    assert one.achieved_latency >= 12
    assert two.achieved_latency <= 10
    assert two.achieved_latency < one.achieved_latency


@pytest.mark.parametrize("n, ports", [(1, 1), (3, 1), (5, 2), (8, 2), (7, 1)])
def test_star_reads_finish_at_the_port_bound(n, ports):
    graph = star(n)
    result = schedule(graph, star_map(n, ports), SchedulerConfig(horizon=n + 4))
    reads_end = max(e.end for e in result.entries if e.vertex.startswith("r"))
    assert reads_end == math.ceil(n / ports)
    assert result.achieved_latency == math.ceil(n / ports) + 1


def test_fu_limits_serialise_multipliers():
    graph = fir(4)
    cfg = SchedulerConfig(horizon=20, op_latency={"mul": 2}, fu_limits={"mul": 1})
    memory_map = fir_map(4, banks=2)
    result = schedule(graph, memory_map, cfg)
    muls = sorted((e.start, e.end) for e in result.entries if e.resource == "mul")
    assert all(prev[1] <= nxt[0] for prev, nxt in zip(muls, muls[1:]))
    assert check_schedule(graph, memory_map, cfg, result).ok


def test_dynamic_placement_follows_the_transfer():
    graph, memory_map, cfg = load_fixture("dynamic.sfg", "dynamic.map", "dynamic.cfg")
    result = schedule(graph, memory_map, cfg)
    assert starts(result)["a0"] == (0, 1, "B0")
    # a2 is ready at cycle 2 but the transfer window [2, 3) forbids it
    assert starts(result)["a2"] == (3, 4, "B1")
    assert [(d.symbol, d.from_bank, d.to_bank, d.start, d.end) for d in result.dma] == [("A", "B0", "B1", 2, 3)]
    assert result.achieved_latency == 6
    assert check_schedule(graph, memory_map, cfg, result).ok


def test_transfer_clash_is_reported():
    graph = parse_sfg(TWO_READS)
    memory_map = parse_memory_map(
        "bank B0 ports=1 read_latency=1 write_latency=1 capacity=2\n"
        "bank B1 ports=2 read_latency=1 write_latency=1 capacity=2\n"
        "place A kind=memory bank=B0 addr=0\nplace C kind=memory bank=B0 addr=1\nplace W kind=register\n"
        "transfer A from=B0 to=B1 at_cycle=0\ntransfer C from=B0 to=B1 at_cycle=0\n")
    with pytest.raises(TransferClashError) as err:
        schedule(graph, memory_map, SchedulerConfig(horizon=10))
    assert err.value.cycle == 0
    assert err.value.vertices[0] == "dma:A"
    assert "B0" in str(err.value)


def test_transfer_past_the_horizon_is_infeasible():
    graph = parse_sfg(TWO_READS)
    memory_map = parse_memory_map(
        "bank B0 ports=1 read_latency=1 write_latency=1 capacity=2\n"
        "bank B1 ports=1 read_latency=1 write_latency=1 capacity=2\n"
        "place A kind=memory bank=B0 addr=0\nplace C kind=memory bank=B0 addr=1\nplace W kind=register\n"
        "transfer A from=B0 to=B1 at_cycle=9\n")
    with pytest.raises(InfeasibleError, match="past horizon"):
        schedule(graph, memory_map, SchedulerConfig(horizon=5))


def test_unmapped_symbol_is_fatal():
    graph, memory_map, cfg = load_fixture("fir4.sfg", "fir4_unmapped.map", "fir4.cfg")
    with pytest.raises(CoverageError):
        schedule(graph, memory_map, cfg)


def test_tokens_are_conserved_and_deadlines_met(fir4_cfg):
    graph, memory_map = fir(4), fir_map(4, banks=1)
    run = ListScheduler(graph, memory_map, fir4_cfg)
    result = run.run()
    assert all(pool.conserved() for pool in run.pools())
    assert all(e.start <= run.deadlines[e.vertex] for e in result.entries)
    assert run.bank_pools["B0"].taken == 9


def test_schedule_is_deterministic(fir4_cfg):
    graph, memory_map = fir(4), fir_map(4, banks=2)
    assert dump_schedule(schedule(graph, memory_map, fir4_cfg)) == dump_schedule(
        schedule(graph, memory_map, fir4_cfg))
