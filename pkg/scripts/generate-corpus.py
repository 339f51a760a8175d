#!/usr/bin/env python3
"""
Write the benchmark corpus to a directory.

This script will:
1. Write every hand-built kernel (copy, c=a+b, FIR-4/16, biquad, 4x4 MAC) with its maps
2. Write seeded random instances (graph, map, config)
3. Schedule each instance and report how many schedules pass the checker
"""

import os
import sys
import random

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), ".."))

from memsched.checker import check_schedule  # noqa: E402
from memsched.config import SchedulerConfig, configure_logging  # noqa: E402
from memsched.errors import MemschedError  # noqa: E402
from memsched.generators import fixture_corpus, random_config, random_map, random_sfg  # noqa: E402
from memsched.report import dump_schedule  # noqa: E402
from memsched.scheduler import nominal_latency, schedule  # noqa: E402
from memsched.sfg_core import serialize_sfg  # noqa: E402

# Configuration
OUTPUT_DIR = os.getenv("CORPUS_DIR", "corpus")
RANDOM_COUNT = int(os.getenv("CORPUS_RANDOM_COUNT", "200"))
RANDOM_SEED = int(os.getenv("CORPUS_SEED", "2024"))
HORIZON_SLACK = 4


def serialize_map(memory_map):
    lines = []
    for bank in memory_map.banks:
        lines.append(f"bank {bank.name} ports={bank.ports} read_latency={bank.read_latency} "
                     f"write_latency={bank.write_latency} capacity={bank.capacity}")
    for place in memory_map.placements:
        if place.is_register:
            lines.append(f"place {place.symbol} kind=register")
        else:
            lines.append(f"place {place.symbol} kind=memory bank={place.bank} addr={place.address} size={place.size}")
    for transfer in memory_map.transfers:
        lines.append(f"transfer {transfer.symbol} from={transfer.from_bank} to={transfer.to_bank} "
                     f"at_cycle={transfer.at_cycle}")
    return "\n".join(lines) + "\n"


def serialize_config(cfg):
    lines = [f"horizon={cfg.horizon}"]
    lines += [f"latency.{op}={cycles}" for op, cycles in sorted(cfg.op_latency.items())]
    lines += [f"fu.{op}={units}" for op, units in sorted((cfg.fu_limits or {}).items())]
    return "\n".join(lines) + "\n"


def write_instance(name, graph, memory_map, cfg):
    """Write one instance and its schedule; return True if the schedule verifies"""
    base = os.path.join(OUTPUT_DIR, name)
    with open(f"{base}.sfg", "w", encoding="utf-8") as f:
        f.write(serialize_sfg(graph))
    with open(f"{base}.map", "w", encoding="utf-8") as f:
        f.write(serialize_map(memory_map))
    with open(f"{base}.cfg", "w", encoding="utf-8") as f:
        f.write(serialize_config(cfg))

    try:
        result = schedule(graph, memory_map, cfg)
    except MemschedError as e:
        print(f"  {name}: infeasible ({e})")
        return False
    with open(f"{base}.sched", "w", encoding="utf-8") as f:
        f.write(dump_schedule(result))
    verdict = check_schedule(graph, memory_map, cfg, result)
    if not verdict.ok:
        print(f"  {name}: {verdict}")
    return verdict.ok


def main():
    configure_logging()
    os.makedirs(OUTPUT_DIR, exist_ok=True)
    print(f"Writing corpus to {OUTPUT_DIR}")

    passed = total = 0
    for index, (graph, memory_map) in enumerate(fixture_corpus()):
        cfg = SchedulerConfig(horizon=1, op_latency={"mul": 2})
        serial = sum(nominal_latency(memory_map, cfg, v) for v in graph.schedulable())
        cfg = cfg.with_horizon(serial + HORIZON_SLACK)
        total += 1
        passed += write_instance(f"fixture{index:02d}_{graph.name}", graph, memory_map, cfg)

    rng = random.Random(RANDOM_SEED)
    for index in range(RANDOM_COUNT):
        graph = random_sfg(rng)
        memory_map = random_map(rng, graph)
        cfg = random_config(rng, graph, memory_map, slack=HORIZON_SLACK)
        total += 1
        passed += write_instance(f"random{index:03d}", graph, memory_map, cfg)

    print(f"{passed}/{total} schedules verified")
    return 0 if passed == total else 1


if __name__ == "__main__":
    sys.exit(main())
