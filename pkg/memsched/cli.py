"""
`memsched` command line.

    memsched schedule <sfg> <map> --config <cfg> [--out DIR] [--gantt]
    memsched verify <sfg> <map> --config <cfg> --schedule <dump>
    memsched explore <sfg> --maps <m1,m2,...> --horizons <h1,h2,...> [--config <cfg>] [--out DIR]
    memsched table <sfg> [--template]
    memsched mcg <sfg> <map>

Exit status: 0 on success, 1 on any memsched error (diagnostic on stderr),
2 on usage errors.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

from .checker import check_schedule
from .config import configure_logging, parse_scheduler_config
from .errors import MemschedError, ParseError
from .explore import explore
from .mcg import build_mcg, dump_mcg
from .memory_model import memory_table_template, parse_memory_map, require_coverage
from .report import dump_schedule, parse_schedule_dump, render_gantt, render_memory_table
from .scheduler import schedule
from .sfg_core import extract_memory_table, parse_sfg

logger = logging.getLogger(__name__)


def _read(path):
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise ParseError(f"cannot read file: {e.strerror or e}", source=str(path)) from None
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"not UTF-8 text: byte 0x{data[e.start]:02x} at offset {e.start}",
                         line=data[:e.start].count(b"\n") + 1, source=str(path)) from None


def _write(directory, filename, text):
    os.makedirs(directory, exist_ok=True)
    target = Path(directory) / filename
    target.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {target}")


def _load_inputs(args):
    graph = parse_sfg(_read(args.sfg), source=args.sfg)
    memory_map = parse_memory_map(_read(args.map), source=args.map)
    cfg = parse_scheduler_config(_read(args.config), source=args.config)
    return graph, memory_map, cfg


def _int_list(text):
    try:
        values = [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got '{text}'") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"horizons must be integers >= 1, got '{text}'")
    return values


##### Subcommands #####

def cmd_schedule(args):
    graph, memory_map, cfg = _load_inputs(args)
    result = schedule(graph, memory_map, cfg)
    dump = dump_schedule(result)
    gantt = render_gantt(result, memory_map, cfg)

    sys.stdout.write(dump)
    if args.gantt:
        sys.stdout.write("\n" + gantt)
    if args.out:
        _write(args.out, f"{graph.name}.sched", dump)
        _write(args.out, f"{graph.name}.gantt", gantt)
    return 0


def cmd_verify(args):
    graph, memory_map, cfg = _load_inputs(args)
    dump = parse_schedule_dump(_read(args.schedule), source=args.schedule)
    verdict = check_schedule(graph, memory_map, cfg, dump)
    print(verdict)
    return 0 if verdict.ok else 1


def cmd_explore(args):
    graph = parse_sfg(_read(args.sfg), source=args.sfg)
    base_cfg = None
    if args.config:
        base_cfg = parse_scheduler_config(_read(args.config), source=args.config, horizon=max(args.horizons))

    candidates = []
    for path in [p for p in args.maps.split(",") if p.strip()]:
        label = Path(path).stem
        try:
            candidates.append((label, parse_memory_map(_read(path), source=path)))
        except MemschedError as e:
            logger.warning(f"Candidate {path} rejected: {e}")
            candidates.append((label, e))

    report = explore(graph, candidates, args.horizons, base_cfg)
    text = report.render()
    sys.stdout.write(text)
    if args.out:
        _write(args.out, f"{graph.name}.explore", text)
    return 0


def cmd_table(args):
    graph = parse_sfg(_read(args.sfg), source=args.sfg)
    rows = extract_memory_table(graph)
    sys.stdout.write(render_memory_table(rows))
    if args.template:
        sys.stdout.write("\n" + memory_table_template(rows, graph.name))
    return 0


def cmd_mcg(args):
    graph = parse_sfg(_read(args.sfg), source=args.sfg)
    memory_map = parse_memory_map(_read(args.map), source=args.map)
    require_coverage(memory_map, graph)
    sys.stdout.write(dump_mcg(build_mcg(graph, memory_map)))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="memsched", description="Memory-aware HLS scheduling engine")
    parser.add_argument("--log-level", default=None, help="overrides MEMSCHED_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="schedule a graph under a memory map")
    p.add_argument("sfg")
    p.add_argument("map")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="also write <name>.sched and <name>.gantt to this directory")
    p.add_argument("--gantt", action="store_true", help="print the text Gantt after the dump")
    p.set_defaults(handler=cmd_schedule)

    p = sub.add_parser("verify", help="check a schedule dump")
    p.add_argument("sfg")
    p.add_argument("map")
    p.add_argument("--config", required=True)
    p.add_argument("--schedule", required=True)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("explore", help="compare candidate memory architectures")
    p.add_argument("sfg")
    p.add_argument("--maps", required=True, help="comma separated map files")
    p.add_argument("--horizons", required=True, type=_int_list, help="comma separated horizons")
    p.add_argument("--config", help="operator latencies and unit limits")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_explore)

    p = sub.add_parser("table", help="print the memory table of a graph")
    p.add_argument("sfg")
    p.add_argument("--template", action="store_true", help="also print a mapping file skeleton")
    p.set_defaults(handler=cmd_table)

    p = sub.add_parser("mcg", help="dump the memory constraint graphs")
    p.add_argument("sfg")
    p.add_argument("map")
    p.set_defaults(handler=cmd_mcg)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level.upper() if args.log_level else None)
    try:
        return args.handler(args)
    except MemschedError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1
