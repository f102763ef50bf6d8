"""Small shared helpers: thread-capped fan-out and float formatting."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "PLATEMEM_THREADS"


def thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap < 1:
        cap = os.cpu_count() or 1
    return cap


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Map preserving input order; fan-out capped by PLATEMEM_THREADS."""
    items = list(items)
    workers = min(thread_cap(), max(1, len(items)))
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fmt(x: float) -> str:
    """Floating-point text with 17 significant digits (lossless round-trip)."""
    return f"{x:.17g}"


def write_csv(path, header: Iterable[str], rows: Iterable[Sequence]) -> None:
    """Plain CSV with %.17g floats; header is written verbatim."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(c) if isinstance(c, float) else str(c) for c in row) + "\n")
