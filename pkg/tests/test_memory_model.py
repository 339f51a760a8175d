import random
from collections import defaultdict

import pytest

from memsched.errors import CoverageError, ParseError, ValidationError
from memsched.generators import fir, random_instance
from memsched.memory_model import (REGISTER, bank_totals, check_against_sfg, in_transfer, memory_table_template,
                                   parse_memory_map, require_coverage, residence)
from memsched.sfg_core import extract_memory_table
from tests.conftest import FIXTURES, fixture_path, load_fixture

BANKS = ("bank B0 ports=1 read_latency=2 write_latency=1 capacity=4\n"
         "bank B1 ports=1 read_latency=1 write_latency=1 capacity=4\n"
         "bank B2 ports=1 read_latency=1 write_latency=1 capacity=4\n")


def moving_map(c_transfer_cycle=8):
    return parse_memory_map(
        BANKS
        + "place A kind=memory bank=B0 addr=0\n"
        + "place C kind=memory bank=B2 addr=0\n"
        + "transfer A from=B0 to=B1 at_cycle=5\n"
        + f"transfer C from=B2 to=B0 at_cycle={c_transfer_cycle}\n")


def test_parse_single_bank_map():
    _, memory_map, _ = load_fixture("add.sfg", "add_1port.map")
    assert [b.name for b in memory_map.banks] == ["B0"]
    assert memory_map.bank("B0").ports == 1
    assert memory_map.placement("B").address == 1
    assert memory_map.is_static
    assert bank_totals(memory_map) == (1, 1)


def test_register_placement():
    _, memory_map, _ = load_fixture("add.sfg", "add_regs.map")
    assert memory_map.placement("A").is_register
    assert residence(memory_map, "A", 3) == REGISTER


def test_unknown_bank_names_file_and_line():
    with pytest.raises(ValidationError) as err:
        parse_memory_map((FIXTURES / "bad_bank.map").read_text(), source=fixture_path("bad_bank.map"))
    assert err.value.line == 2
    assert "unknown bank 'B9'" in str(err.value)
    assert "bad_bank.map:2:" in str(err.value)


def test_static_overlap_is_rejected():
    with pytest.raises(ValidationError, match="overlap"):
        parse_memory_map(BANKS + "place A kind=memory bank=B1 addr=0 size=2\n"
                         "place C kind=memory bank=B1 addr=1\n")


def test_overlap_after_departure_is_legal():
    memory_map = moving_map()
    assert not memory_map.is_static
    assert memory_map.visited_banks("C") == ["B0", "B2"]


def test_overlap_during_residence_is_rejected():
    with pytest.raises(ValidationError, match="overlap"):
        moving_map(c_transfer_cycle=6)


def test_transfer_latency_and_residence():
    memory_map = moving_map()
    transfer = memory_map.transfers_of("A")[0]
    assert memory_map.transfer_latency(transfer) == 2
    assert residence(memory_map, "A", 5) == "B0"
    assert residence(memory_map, "A", 6) == "B0"
    assert residence(memory_map, "A", 7) == "B1"
    assert [(w.start, w.end) for w in memory_map.windows_of("A")] == [(5, 7)]


def test_accesses_inside_transfer_window():
    memory_map = moving_map()
    assert in_transfer(memory_map, "A", 5, 6)
    assert in_transfer(memory_map, "A", 6, 6)
    assert in_transfer(memory_map, "A", 4, 6)
    assert not in_transfer(memory_map, "A", 4, 5)
    assert not in_transfer(memory_map, "A", 7, 8)


def test_residence_intervals_cover_both_banks_during_transfer():
    assert moving_map().residence_intervals("A") == [("B0", 0, 7), ("B1", 5, None)]


@pytest.mark.parametrize("text, message", [
    ("place A kind=memory bank=B1 addr=4\n", "address out of capacity"),
    ("place A kind=memory bank=B1 addr=2 size=3\n", "address out of capacity"),
    ("place A kind=register bank=B1\n", "takes no bank"),
    ("place A kind=memory bank=B1\n", "needs bank and addr"),
    ("place A kind=rom\n", "kind must be memory|register"),
    ("place A kind=memory bank=B1 addr=0\nplace A kind=memory bank=B1 addr=1\n", "duplicate placement"),
    ("place A kind=memory bank=B1 addr=0\ntransfer A from=B1 to=B1 at_cycle=2\n", "to itself"),
    ("place A kind=register\ntransfer A from=B1 to=B2 at_cycle=2\n", "register symbol"),
    ("transfer A from=B1 to=B2 at_cycle=2\n", "unplaced symbol"),
    ("place A kind=memory bank=B1 addr=0\ntransfer A from=B2 to=B0 at_cycle=2\n", "not 'B2'"),
    ("place A kind=memory bank=B1 addr=0\ntransfer A from=B1 to=B2 at_cycle=2\n"
     "transfer A from=B2 to=B0 at_cycle=2\n", "before the previous one completes"),
    ("place A kind=memory bank=B1 addr=0 colour=red\n", "unknown key 'colour'"),
    ("bank B3 ports=1 read_latency=1 capacity=2\n", "missing key 'write_latency'"),
    ("bank B3 ports=0 read_latency=1 write_latency=1 capacity=2\n", "'ports' must be >= 1"),
    ("bank register ports=1 read_latency=1 write_latency=1 capacity=2\n", "reserved"),
    ("bank B1 ports=1 read_latency=1 write_latency=1 capacity=2\n", "duplicate bank"),
    ("memory B1\n", "unknown statement"),
])
def test_invalid_maps(text, message):
    with pytest.raises(ParseError, match=message):
        parse_memory_map(BANKS + text)


def test_coverage_report():
    graph, memory_map, _ = load_fixture("fir4.sfg", "fir4_unmapped.map")
    report = check_against_sfg(memory_map, graph)
    assert not report.success
    assert report.missing == ("Y",)
    with pytest.raises(CoverageError, match="unmapped symbol"):
        require_coverage(memory_map, graph)


def test_unused_placement_is_only_a_warning():
    graph, _, _ = load_fixture("add.sfg", "add_1port.map")
    memory_map = parse_memory_map((FIXTURES / "add_1port.map").read_text().replace("capacity=3", "capacity=4")
                                  + "place Z kind=memory bank=B0 addr=3\n")
    report = require_coverage(memory_map, graph)
    assert report.success
    assert report.unused == ("Z",)
    assert report.lines() == ["warning: placement Z matches no data vertex"]


def test_memory_table_template_is_a_valid_covering_map():
    graph = fir(4)
    template = memory_table_template(extract_memory_table(graph), graph.name)
    memory_map = parse_memory_map(template)
    assert check_against_sfg(memory_map, graph).success
    assert memory_map.placement("X").address == 4
    assert memory_map.bank("B0").capacity == 9


def words_in_use(memory_map, cycle):
    """(bank, addr) -> symbols occupying that word at a cycle."""
    used = defaultdict(list)
    for place in memory_map.placements:
        if place.is_register:
            continue
        for bank, start, end in memory_map.residence_intervals(place.symbol):
            if start <= cycle and (end is None or cycle < end):
                for addr in range(place.address, place.address + place.size):
                    used[(bank, addr)].append(place.symbol)
    return used


VALID_MAPS = [parse_memory_map(path.read_text(), source=path.name)
              for path in sorted(FIXTURES.glob("*.map")) if path.name != "bad_bank.map"]


@pytest.mark.parametrize("memory_map", VALID_MAPS + [moving_map(7), moving_map(8)])
def test_no_word_holds_two_symbols_at_once(memory_map):
    horizon = max((w.end for w in memory_map.transfer_windows()), default=0) + 8
    for cycle in range(horizon):
        shared = {word: symbols for word, symbols in words_in_use(memory_map, cycle).items() if len(symbols) > 1}
        assert shared == {}, f"cycle {cycle}"


def test_word_reuse_after_departure_is_seen_cycle_by_cycle():
    memory_map = moving_map(7)
    assert words_in_use(memory_map, 6)[("B0", 0)] == ["A"]
    assert words_in_use(memory_map, 7)[("B0", 0)] == ["C"]


@pytest.mark.parametrize("seed", range(30))
def test_static_residence_ignores_the_cycle(seed):
    rng = random.Random(seed)
    _, memory_map, _ = random_instance(seed)
    assert memory_map.is_static
    for place in memory_map.placements:
        expected = REGISTER if place.is_register else place.bank
        assert {residence(memory_map, place.symbol, rng.randrange(10_000)) for _ in range(25)} == {expected}
