"""Deterministic field-operation accounting for the benchmark mode.

The paper's cost model is unit-cost arithmetic operations, so the bench
command counts field operations rather than wall time.  Primitives add
their exact operation count to the active counter when one is installed;
with no counter active the guard is a single global read, cheap enough to
leave permanently enabled.

Rational-path primitives count into "rat"; the modular pipeline counts
into "fp" with per-kernel formulas (an NTT of length L performs exactly
L/2*log2(L) multiplications and L*log2(L) additions, and so on).  For the
fast path the per-prime count is what the model asks for: replicating the
same computation over many primes is the bit-exactness tax, not extra
algorithmic work, so reports use a single prime's count.
"""

from __future__ import annotations

from collections import defaultdict
from contextlib import contextmanager

_active = None


class OpCounter:
    def __init__(self):
        self.counts = defaultdict(int)

    def total(self):
        return sum(self.counts.values())

    def __repr__(self):
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self.counts.items()))
        return f"OpCounter({inner})"


@contextmanager
def active(counter: OpCounter):
    global _active
    prev = _active
    _active = counter
    try:
        yield counter
    finally:
        _active = prev


def add(kind, n=1):
    if _active is not None:
        _active.counts[kind] += n


def is_active():
    return _active is not None
