from itertools import permutations

import pytest

from memsched.errors import TokenPoolExhausted
from memsched.generators import fir, fir_map, fixture_corpus
from memsched.mcg import TokenPool, build_mcg, conflict_weight, conflict_weights, dump_mcg
from tests.conftest import load_fixture

CORPUS = fixture_corpus()


def operation_consumers(graph, vertex_id):
    return {s for s in graph.full_graph.successors(vertex_id) if graph.vertex(s).is_operation}


def test_add_kernel_mcg():
    graph, memory_map, _ = load_fixture("add.sfg", "add_1port.map")
    (mcg,) = build_mcg(graph, memory_map)
    assert mcg.bank == "B0"
    assert mcg.nodes == ("a", "b", "y_w")
    assert mcg.token_capacity == 1
    # a and b feed the same add; the write is ordered after both
    assert mcg.conflict_edges == (("a", "b", 2),)
    assert dump_mcg([mcg]) == "B0: a -- b w=2\n"


def test_register_symbols_stay_out_of_the_mcg():
    graph, memory_map, _ = load_fixture("add.sfg", "add_regs.map")
    (mcg,) = build_mcg(graph, memory_map)
    assert mcg.nodes == ("y_w",)
    assert mcg.conflict_edges == ()


def test_one_mcg_per_populated_bank():
    mcgs = build_mcg(fir(4), fir_map(4, banks=2))
    assert [m.bank for m in mcgs] == ["B0", "B1"]
    assert mcgs[0].nodes == ("c0", "c1", "c2", "c3")
    assert len(mcgs[0].conflict_edges) == 6
    assert all(w == 1 for _, _, w in mcgs[0].conflict_edges)
    # y is ordered after every sample read
    assert all("y" not in (u, v) for u, v, _ in mcgs[1].conflict_edges)


def test_conflict_weights():
    mcgs = build_mcg(fir(4), fir_map(4, banks=1))
    weights = conflict_weights(mcgs)
    assert weights["c0"] == conflict_weight(mcgs, "c0") == 8
    assert "y" not in weights


@pytest.mark.parametrize("index", range(len(CORPUS)))
def test_conflicts_do_not_depend_on_pair_order(index):
    graph, memory_map = CORPUS[index]
    for mcg in build_mcg(graph, memory_map):
        weights = {frozenset((u, v)): w for u, v, w in mcg.conflict_edges}
        assert len(weights) == len(mcg.conflict_edges)
        for u, v in permutations(mcg.nodes, 2):
            assert graph.ordered(u, v) == graph.ordered(v, u)
            assert (frozenset((u, v)) in weights) == (not graph.ordered(u, v))
            if not graph.ordered(u, v):
                shared = operation_consumers(graph, u) & operation_consumers(graph, v)
                assert weights[frozenset((u, v))] == 1 + len(shared)
        assert sum(mcg.weight_of(n) for n in mcg.nodes) == 2 * sum(weights.values())


def test_dump_is_sorted():
    lines = dump_mcg(build_mcg(fir(4), fir_map(4, banks=2))).splitlines()
    assert lines == sorted(lines)
    assert lines[0] == "B0: c0 -- c1 w=1"


def test_accessible_and_take():
    pool = TokenPool("B0", 2)
    assert pool.accessible(0)
    pool.take_token("a", 0, 1)
    pool.take_token("b", 0, 2)
    assert not pool.accessible(0)
    assert pool.accessible(1)
    assert pool.accessible(1, latency=2)
    assert pool.load(1) == 1


def test_take_on_full_pool_raises():
    pool = TokenPool("B0", 1).take_token("a", 0, 3)
    with pytest.raises(TokenPoolExhausted):
        pool.take_token("b", 2, 1)
    with pytest.raises(ValueError):
        pool.take_token("c", 5, 0)


def test_tokens_come_back_after_latency():
    pool = TokenPool("B0", 1).take_token("a", 0, 2)
    assert not pool.accessible(1)
    assert pool.accessible(2)
    assert pool.released == 1
    assert pool.conserved()


def test_reservations_block_overlapping_accesses():
    pool = TokenPool("B0", 1, reservations=[(3, 5)])
    assert pool.accessible(0, latency=3)
    assert not pool.accessible(2, latency=2)
    assert not pool.accessible(4)
    assert pool.accessible(5)
    assert pool.claim_reservation(3, 5, "dma:A")
    assert pool.reservations == []
    assert pool.taken == 1


def test_reservation_claim_fails_when_port_is_busy():
    pool = TokenPool("B0", 1, reservations=[(2, 3)])
    pool.in_flight.append((3, "rogue"))
    pool.taken += 1
    assert not pool.claim_reservation(2, 3, "dma:A")
