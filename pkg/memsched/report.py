"""
Human and machine readable renderings of schedules and tables.
"""

import logging

from tabulate import tabulate

from .errors import ParseError
from .memory_model import REGISTER
from .scheduler import DmaEntry, Schedule, ScheduleEntry
from .textfmt import iter_lines, parse_fields, parse_int

logger = logging.getLogger(__name__)

IDLE = "."

##### Schedule dump #####

def dump_schedule(schedule):
    """
    Machine readable dump: a header, one `sched` line per entry sorted by
    (start, vertex id), then one `dma` line per transfer.
    """
    lines = [f"schedule {schedule.name} latency={schedule.achieved_latency} entries={len(schedule.entries)}"]
    for e in schedule.entries:
        lines.append(f"sched {e.vertex} start={e.start} end={e.end} res={e.resource}")
    for d in schedule.dma:
        lines.append(f"dma {d.symbol} from={d.from_bank} to={d.to_bank} start={d.start} end={d.end}")
    return "\n".join(lines) + "\n"


def parse_schedule_dump(text, source=None):
    """
    Parse a dump written by dump_schedule (possibly hand-edited).

    Raises:
        ParseError: malformed line, or fewer/more entries than the header announces
    """
    try:
        return _parse_schedule_dump(text)
    except ParseError as e:
        raise e.with_source(source) if source else e


def _parse_schedule_dump(text):
    lines = iter_lines(text)
    header = next(lines, None)
    if header is None or header[1][0] != "schedule" or len(header[1]) < 2:
        raise ParseError("missing 'schedule <name> latency=<L> entries=<N>' header",
                         line=header[0] if header else None)
    lineno, words = header
    fields = parse_fields(words[2:], lineno, allowed=("latency", "entries"), required=("latency", "entries"))
    parse_int(fields["latency"], lineno, "latency", minimum=0)
    announced = parse_int(fields["entries"], lineno, "entries", minimum=0)

    entries, dma = [], []
    last_line = lineno
    for lineno, words in lines:
        last_line = lineno
        head = words[0]
        if len(words) < 2:
            raise ParseError(f"'{head}' needs a name", line=lineno)
        if head == "sched":
            fields = parse_fields(words[2:], lineno, allowed=("start", "end", "res"), required=("start", "end", "res"))
            start = parse_int(fields["start"], lineno, "start")
            end = parse_int(fields["end"], lineno, "end")
            if end < start:
                raise ParseError(f"end {end} before start {start}", line=lineno)
            entries.append(ScheduleEntry(words[1], start, end, fields["res"]))
        elif head == "dma":
            fields = parse_fields(words[2:], lineno, allowed=("from", "to", "start", "end"),
                                  required=("from", "to", "start", "end"))
            dma.append(DmaEntry(words[1], fields["from"], fields["to"],
                                parse_int(fields["start"], lineno, "start", minimum=0),
                                parse_int(fields["end"], lineno, "end", minimum=0)))
        else:
            raise ParseError(f"unknown statement '{head}'", line=lineno)

    if len(entries) < announced:
        raise ParseError(f"truncated dump: header announces {announced} entries, found {len(entries)}",
                         line=last_line)
    if len(entries) > announced:
        raise ParseError(f"header announces {announced} entries, found {len(entries)}", line=last_line)

    logger.info(f"Parsed schedule dump: {len(entries)} entries, {len(dma)} transfers")
    return Schedule(header[1][1], tuple(entries), tuple(dma))


##### Text Gantt #####

def _pack(intervals, minimum_rows):
    """Greedily place (start, end, label) intervals on the first free row."""
    rows = [[] for _ in range(minimum_rows)]
    for start, end, label in sorted(intervals):
        for row in rows:
            if all(e <= start or s >= end for s, e, _ in row):
                row.append((start, end, label))
                break
        else:
            rows.append([(start, end, label)])
    return rows


def render_gantt(schedule, memory_map, cfg=None):
    """
    Text Gantt chart: one row per bank port (`B0.p0`) and per functional
    unit (`mul.u0`), one column per cycle. A cell holds the vertex id,
    `dma:<symbol>` for a transfer, or '.' when idle.

    Args:
        schedule (Schedule): The schedule to draw
        memory_map (MemoryMap): Bank order and port counts
        cfg (SchedulerConfig): Optional; unit limits add idle unit rows

    Returns:
        str: the chart, one line per row
    """
    span = max([schedule.achieved_latency] + [d.end for d in schedule.dma])
    bank_names = [bank.name for bank in memory_map.banks]

    per_bank = {name: [] for name in bank_names}
    per_unit = {}
    for e in schedule.entries:
        if e.end <= e.start or e.resource == REGISTER:
            continue
        if e.resource in per_bank:
            per_bank[e.resource].append((e.start, e.end, e.vertex))
        else:
            per_unit.setdefault(e.resource, []).append((e.start, e.end, e.vertex))
    for d in schedule.dma:
        for bank in (d.from_bank, d.to_bank):
            if bank in per_bank:
                per_bank[bank].append((d.start, d.end, d.holder))

    labelled = []
    for bank in memory_map.banks:
        for k, row in enumerate(_pack(per_bank[bank.name], bank.ports)):
            labelled.append((f"{bank.name}.p{k}", row))
    for op in sorted(per_unit):
        limit = cfg.fu_limit(op) if cfg else None
        for k, row in enumerate(_pack(per_unit[op], limit or 0)):
            labelled.append((f"{op}.u{k}", row))

    grid = []
    for label, row in labelled:
        cells = [IDLE] * span
        for start, end, name in row:
            for cycle in range(start, end):
                cells[cycle] = name
        grid.append((label, cells))

    widths = [max([len(str(c))] + [len(cells[c]) for _, cells in grid]) for c in range(span)]
    label_width = max([len("cycle")] + [len(label) for label, _ in grid]) + 1

    def line(label, cells):
        body = " ".join(cell.ljust(width) for cell, width in zip(cells, widths))
        return f"{(label + ':').ljust(label_width)} {body}".rstrip()

    out = [line("cycle", [str(c) for c in range(span)])]
    out.extend(line(label, cells) for label, cells in grid)
    return "\n".join(out) + "\n"


##### Tables #####

def render_memory_table(rows):
    """Memory table as a plain text table."""
    table = [[r.symbol, r.accesses, r.reads, r.writes, r.suggested_kind or "-"] for r in rows]
    return tabulate(table, headers=["symbol", "accesses", "reads", "writes", "kind"], tablefmt="simple") + "\n"

