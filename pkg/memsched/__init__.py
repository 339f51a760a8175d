"""
memsched: memory-aware scheduling for high-level synthesis.

Schedules the operations and memory accesses of a Signal Flow Graph under a
latency horizon so that no memory bank ever serves more accesses than it
has ports.
"""

__version__ = "1.0.1"
