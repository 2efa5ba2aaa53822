"""Trial scheduling. Results always come back sorted by trial index, so a
parallel run reduces to exactly the same summary as a serial one."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence


def env_seed(default: int) -> int:
    raw = os.environ.get("ASYMSPEC_SEED")
    return int(raw) if raw not in (None, "") else int(default)


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("ASYMSPEC_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap not in (None, ""):
        n = min(n, int(cap))
    return max(1, int(n))


def map_trials(fn: Callable[[Any, int], Any], payload: Any, trials: Sequence[int] | int,
               workers: int | None = None) -> list:
    """Run ``fn(payload, t)`` for every trial index t; returns results in index order."""
    idx = list(range(trials)) if isinstance(trials, int) else sorted(int(t) for t in trials)
    w = worker_count(workers)
    if w == 1 or len(idx) <= 1:
        return [fn(payload, t) for t in idx]
    with ProcessPoolExecutor(max_workers=w) as ex:
        out = list(ex.map(fn, [payload] * len(idx), idx, chunksize=max(1, len(idx) // (4 * w))))
    return out
