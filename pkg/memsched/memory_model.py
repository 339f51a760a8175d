"""
Memory architecture and memory mapping file.

A map declares banks (ports, latencies, capacity), one placement per data
symbol (a bank and address, or a register) and explicit DMA transfers that
move a symbol from one bank to another at a declared cycle.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Tuple

from .errors import CoverageError, ParseError, ValidationError
from .textfmt import iter_lines, parse_fields, parse_int

logger = logging.getLogger(__name__)

REGISTER = "register"
PLACEMENT_KINDS = ("memory", REGISTER)

##### Domain types #####

@dataclass(frozen=True)
class MemoryBank:
    name: str
    ports: int
    read_latency: int
    write_latency: int
    capacity: int

    def access_latency(self, access):
        return self.read_latency if access == "read" else self.write_latency


@dataclass(frozen=True)
class Placement:
    symbol: str
    kind: str
    bank: Optional[str] = None
    address: Optional[int] = None
    size: int = 1

    @property
    def is_register(self):
        return self.kind == REGISTER


@dataclass(frozen=True)
class TransferDirective:
    symbol: str
    from_bank: str
    to_bank: str
    at_cycle: int


@dataclass(frozen=True)
class TransferWindow:
    """Cycles [start, end) during which a transfer holds one port on each bank."""
    directive: TransferDirective
    start: int
    end: int

    @property
    def symbol(self):
        return self.directive.symbol

    @property
    def banks(self):
        return (self.directive.from_bank, self.directive.to_bank)

    def covers(self, cycle):
        return self.start <= cycle < self.end

    def overlaps(self, start, end):
        """True if an access occupying [start, end) touches this window."""
        if end <= start:
            return self.covers(start)
        return start < self.end and self.start < end


@dataclass(frozen=True)
class CoverageReport:
    missing: Tuple[str, ...]
    unused: Tuple[str, ...]

    @property
    def success(self):
        return not self.missing

    def lines(self):
        return ([f"fatal: symbol {s} has no placement" for s in self.missing]
                + [f"warning: placement {s} matches no data vertex" for s in self.unused])


@dataclass(frozen=True)
class MemoryMap:
    """
    Validated memory mapping.

    The map is static when it declares no transfers. `source_lines` only
    serves diagnostics and does not take part in equality.
    """
    banks: Tuple[MemoryBank, ...]
    placements: Tuple[Placement, ...]
    transfers: Tuple[TransferDirective, ...] = ()
    source_lines: Optional[dict] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "banks", tuple(self.banks))
        object.__setattr__(self, "placements", tuple(self.placements))
        object.__setattr__(self, "transfers", tuple(sorted(self.transfers, key=lambda t: (t.at_cycle, t.symbol))))
        self._validate()

    def _line(self, *key):
        return (self.source_lines or {}).get(key)

    def _validate(self):
        bank_map = {}
        for bank in self.banks:
            line = self._line("bank", bank.name)
            if bank.name in bank_map:
                raise ValidationError(f"duplicate bank '{bank.name}'", line=line)
            if bank.name == REGISTER:
                raise ValidationError(f"'{REGISTER}' is reserved and cannot name a bank", line=line)
            for attr in ("ports", "read_latency", "write_latency", "capacity"):
                if getattr(bank, attr) < 1:
                    raise ValidationError(f"bank '{bank.name}': {attr} must be >= 1", line=line)
            bank_map[bank.name] = bank

        seen = set()
        for place in self.placements:
            line = self._line("place", place.symbol)
            if place.symbol in seen:
                raise ValidationError(f"duplicate placement for '{place.symbol}'", line=line)
            seen.add(place.symbol)
            if place.kind not in PLACEMENT_KINDS:
                raise ValidationError(f"placement kind must be memory|register, got '{place.kind}'", line=line)
            if place.is_register:
                if place.bank is not None or place.address is not None:
                    raise ValidationError(f"register placement '{place.symbol}' takes no bank/addr", line=line)
                continue
            if place.bank is None or place.address is None:
                raise ValidationError(f"memory placement '{place.symbol}' needs bank and addr", line=line)
            if place.bank not in bank_map:
                raise ValidationError(f"unknown bank '{place.bank}'", line=line)
            self._check_capacity(place, bank_map[place.bank], line)

        self._validate_transfers(bank_map)
        self._validate_overlaps()

    @staticmethod
    def _check_capacity(place, bank, line):
        if place.address < 0 or place.size < 1:
            raise ValidationError(f"'{place.symbol}': addr must be >= 0 and size >= 1", line=line)
        if place.address + place.size > bank.capacity:
            raise ValidationError(
                f"address out of capacity: '{place.symbol}' at {place.address} (size {place.size}) "
                f"in bank '{bank.name}' of capacity {bank.capacity}", line=line)

    def _validate_transfers(self, bank_map):
        placements = {p.symbol: p for p in self.placements}
        current = {}
        for transfer in self.transfers:
            line = self._line("transfer", transfer.symbol, transfer.at_cycle)
            place = placements.get(transfer.symbol)
            if place is None:
                raise ValidationError(f"transfer of unplaced symbol '{transfer.symbol}'", line=line)
            if place.is_register:
                raise ValidationError(f"transfer of register symbol '{transfer.symbol}'", line=line)
            for bank_name in (transfer.from_bank, transfer.to_bank):
                if bank_name not in bank_map:
                    raise ValidationError(f"unknown bank '{bank_name}'", line=line)
            if transfer.from_bank == transfer.to_bank:
                raise ValidationError(f"transfer of '{transfer.symbol}' from a bank to itself", line=line)
            if transfer.at_cycle < 0:
                raise ValidationError("at_cycle must be >= 0", line=line)

            bank_now, free_at = current.get(transfer.symbol, (place.bank, 0))
            if transfer.from_bank != bank_now:
                raise ValidationError(
                    f"'{transfer.symbol}' is in bank '{bank_now}' at cycle {transfer.at_cycle}, "
                    f"not '{transfer.from_bank}'", line=line)
            if transfer.at_cycle < free_at:
                raise ValidationError(
                    f"transfer of '{transfer.symbol}' at cycle {transfer.at_cycle} starts before "
                    f"the previous one completes (cycle {free_at})", line=line)
            self._check_capacity(place, bank_map[transfer.to_bank], line)
            current[transfer.symbol] = (transfer.to_bank, transfer.at_cycle + self.transfer_latency(transfer))

    def _validate_overlaps(self):
        memory = [p for p in self.placements if not p.is_register]
        for first, second in combinations(memory, 2):
            if not _ranges_overlap(first.address, first.size, second.address, second.size):
                continue
            for bank, start, end in self.residence_intervals(first.symbol):
                for other_bank, other_start, other_end in self.residence_intervals(second.symbol):
                    if bank == other_bank and _intervals_overlap(start, end, other_start, other_end):
                        raise ValidationError(
                            f"overlap: '{first.symbol}' and '{second.symbol}' share addresses in bank "
                            f"'{bank}' from cycle {max(start, other_start)}",
                            line=self._line("place", second.symbol))

    ##### Lookups #####

    @property
    def is_static(self):
        return not self.transfers

    def bank(self, name):
        for bank in self.banks:
            if bank.name == name:
                return bank
        raise KeyError(name)

    def placement(self, symbol):
        for place in self.placements:
            if place.symbol == symbol:
                return place
        raise KeyError(symbol)

    def has_placement(self, symbol):
        return any(p.symbol == symbol for p in self.placements)

    def transfer_latency(self, transfer):
        """A transfer holds a port on both banks for max(read(from), write(to)) cycles."""
        return max(self.bank(transfer.from_bank).read_latency, self.bank(transfer.to_bank).write_latency)

    def transfers_of(self, symbol):
        return [t for t in self.transfers if t.symbol == symbol]

    def transfer_windows(self):
        return tuple(TransferWindow(t, t.at_cycle, t.at_cycle + self.transfer_latency(t))
                     for t in self.transfers)

    def windows_of(self, symbol):
        return [w for w in self.transfer_windows() if w.symbol == symbol]

    def residence_intervals(self, symbol):
        """
        Occupancy of a symbol per bank, as (bank, start, end) with end None for "forever".

        During a transfer the symbol occupies both banks.
        """
        place = self.placement(symbol)
        if place.is_register:
            return [(REGISTER, 0, None)]
        intervals = []
        bank, start = place.bank, 0
        for transfer in self.transfers_of(symbol):
            completion = transfer.at_cycle + self.transfer_latency(transfer)
            intervals.append((bank, start, completion))
            bank, start = transfer.to_bank, transfer.at_cycle
        intervals.append((bank, start, None))
        return intervals

    def visited_banks(self, symbol):
        return sorted({bank for bank, _, _ in self.residence_intervals(symbol)})


def _ranges_overlap(addr_a, size_a, addr_b, size_b):
    return addr_a < addr_b + size_b and addr_b < addr_a + size_a


def _intervals_overlap(start_a, end_a, start_b, end_b):
    end_a = float("inf") if end_a is None else end_a
    end_b = float("inf") if end_b is None else end_b
    return start_a < end_b and start_b < end_a


##### Parsing #####

def parse_memory_map(text, source=None):
    """
    Parse and validate a memory mapping file.

    Args:
        text (str): File contents
        source (str): Name used in diagnostics (usually the path)

    Returns:
        MemoryMap: the validated map
    """
    try:
        return _parse_memory_map(text)
    except ParseError as e:
        raise e.with_source(source) if source else e


def _parse_memory_map(text):
    banks, placements, transfers = [], [], []
    lines = {}

    for lineno, words in iter_lines(text):
        head = words[0]
        if len(words) < 2:
            raise ParseError(f"'{head}' needs a name", line=lineno)
        name, rest = words[1], words[2:]

        if head == "bank":
            fields = parse_fields(rest, lineno, allowed=("ports", "read_latency", "write_latency", "capacity"),
                                  required=("ports", "read_latency", "write_latency", "capacity"))
            banks.append(MemoryBank(
                name=name,
                ports=parse_int(fields["ports"], lineno, "ports", minimum=1),
                read_latency=parse_int(fields["read_latency"], lineno, "read_latency", minimum=1),
                write_latency=parse_int(fields["write_latency"], lineno, "write_latency", minimum=1),
                capacity=parse_int(fields["capacity"], lineno, "capacity", minimum=1),
            ))
            lines.setdefault(("bank", name), lineno)
        elif head == "place":
            fields = parse_fields(rest, lineno, allowed=("kind", "bank", "addr", "size"), required=("kind",))
            if fields["kind"] not in PLACEMENT_KINDS:
                raise ParseError(f"kind must be memory|register, got '{fields['kind']}'", line=lineno)
            if ("place", name) in lines:
                raise ValidationError(f"duplicate placement for '{name}'", line=lineno)
            placements.append(Placement(
                symbol=name,
                kind=fields["kind"],
                bank=fields.get("bank"),
                address=parse_int(fields["addr"], lineno, "addr", minimum=0) if "addr" in fields else None,
                size=parse_int(fields.get("size", "1"), lineno, "size", minimum=1),
            ))
            lines[("place", name)] = lineno
        elif head == "transfer":
            fields = parse_fields(rest, lineno, allowed=("from", "to", "at_cycle"),
                                  required=("from", "to", "at_cycle"))
            at_cycle = parse_int(fields["at_cycle"], lineno, "at_cycle", minimum=0)
            transfers.append(TransferDirective(name, fields["from"], fields["to"], at_cycle))
            lines[("transfer", name, at_cycle)] = lineno
        else:
            raise ParseError(f"unknown statement '{head}'", line=lineno)

    memory_map = MemoryMap(tuple(banks), tuple(placements), tuple(transfers), source_lines=lines)
    logger.info(f"Parsed memory map: {len(banks)} banks, {len(placements)} placements, {len(transfers)} transfers")
    return memory_map


##### Operations #####

def check_against_sfg(memory_map, graph):
    """
    Compare the map's placements with the graph's data symbols.

    Symbols without placement are fatal, placements without symbol are warnings.

    Returns:
        CoverageReport: success iff nothing is missing
    """
    symbols = set(graph.symbols())
    placed = {p.symbol for p in memory_map.placements}
    return CoverageReport(missing=tuple(sorted(symbols - placed)), unused=tuple(sorted(placed - symbols)))


def require_coverage(memory_map, graph):
    """Raise CoverageError unless every symbol of the graph is placed."""
    report = check_against_sfg(memory_map, graph)
    for line in report.lines():
        logger.warning(line)
    if not report.success:
        raise CoverageError(report)
    return report


def residence(memory_map, symbol, cycle):
    """
    Bank holding a symbol at a cycle, or REGISTER for register placements.

    A transfer only changes residence once it completes, at at_cycle + latency.
    """
    place = memory_map.placement(symbol)
    if place.is_register:
        return REGISTER
    bank = place.bank
    for transfer in memory_map.transfers_of(symbol):
        if cycle >= transfer.at_cycle + memory_map.transfer_latency(transfer):
            bank = transfer.to_bank
        else:
            break
    return bank


def in_transfer(memory_map, symbol, start, end):
    """True if an access to symbol over [start, end) touches one of its transfer windows."""
    return any(w.overlaps(start, end) for w in memory_map.windows_of(symbol))


def memory_table_template(rows, graph_name="kernel"):
    """
    Render a memory table as a mapping file the designer can complete.

    Every symbol goes to a single one-port bank at consecutive addresses,
    reserving one word per access; the result parses as a valid map.
    """
    capacity = max(1, sum(row.accesses for row in rows))
    lines = [
        f"# memory table for {graph_name}: {len(rows)} symbol(s)",
        "# choose kind=memory|register and a bank for each symbol, add banks and transfers",
        f"bank B0 ports=1 read_latency=1 write_latency=1 capacity={capacity}",
    ]
    address = 0
    for row in rows:
        lines.append(f"# {row.symbol}: {row.accesses} access(es), {row.reads} read, {row.writes} write")
        lines.append(f"place {row.symbol} kind=memory bank=B0 addr={address} size={row.accesses}")
        address += row.accesses
    return "\n".join(lines) + "\n"


def bank_totals(memory_map):
    """(bank count, total ports) of the architecture, used for area reporting."""
    return len(memory_map.banks), sum(bank.ports for bank in memory_map.banks)
