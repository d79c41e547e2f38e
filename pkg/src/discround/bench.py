"""Violation-versus-right-hand-side sweep comparing the engine with randomized rounding."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .baselines import randomized_round
from .schedules import column_sparsity, l_scale, round_full
from .walk import WalkConfig

BENCH_COLUMNS = ("b", "trial", "weight", "delta", "engine_violation", "random_violation",
                 "engine_ratio", "envelope_nlog", "bound_Lb", "bound_delta")


@dataclass(frozen=True)
class BenchRow:
    b: int
    trial: int
    weight: float
    delta: int
    engine_violation: float
    random_violation: float
    engine_ratio: float
    envelope_nlog: float
    bound_Lb: float
    bound_delta: float


def sweep_instance(n: int, m: int, b: int, rng: np.random.Generator):
    """Rows ``w * 1_S`` with ``|S| = min(2b, n/2)`` and ``y = 1/2``, so every ``<a_j, y> = b``.

    Supports larger than ``n/2`` are avoided so that rows stay distinct;
    right-hand sides beyond that are reached through the weight ``w``.
    """
    size = min(2 * b, n // 2)
    w = 2 * b / size
    a = np.zeros((m, n))
    for j in range(m):
        a[j, rng.choice(n, size, replace=False)] = w
    return a, np.full(n, 0.5), w


def _one(args):
    n, m, b, trial, seed, cfg = args
    ss = np.random.SeedSequence([seed, b, trial])
    inst_seed, rr_seed = ss.spawn(2)
    a, y, w = sweep_instance(n, m, b, np.random.Generator(np.random.Philox(inst_seed)))
    target = a @ y
    x, rep = round_full(y, a, target, cfg=cfg, seed=int(ss.generate_state(1)[0]))
    xr = randomized_round(y, rr_seed)
    delta = column_sparsity(a)
    big_l = l_scale(n, m)
    return BenchRow(
        b=b, trial=trial, weight=w, delta=delta,
        engine_violation=float(np.max(np.abs(a @ x - target))),
        random_violation=float(np.max(np.abs(a @ xr - target))),
        engine_ratio=rep.max_ratio,
        envelope_nlog=w * math.sqrt(n * math.log(2 + m / n)),
        bound_Lb=w * (math.sqrt(big_l * b / w) + big_l),
        bound_delta=w * math.sqrt(delta) * math.log(n),
    )


def bench_sweep(n: int = 256, m: int | None = None, bs=(16, 64, 256, 1024), trials: int = 3, seed: int = 0,
                cfg: WalkConfig | None = None, jobs: int = 1) -> list[BenchRow]:
    cfg = cfg or WalkConfig()
    m = n if m is None else m
    tasks = [(n, m, int(b), t, seed, cfg) for b in bs for t in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_one, tasks))
    else:
        rows = [_one(t) for t in tasks]
    return sorted(rows, key=lambda r: (r.b, r.trial))


def summarize(rows: list[BenchRow]) -> dict:
    """Median engine / random violations and envelopes per ``b``."""
    out = {}
    for b in sorted({r.b for r in rows}):
        sel = [r for r in rows if r.b == b]
        out[b] = {
            "engine": float(np.median([r.engine_violation for r in sel])),
            "random": float(np.median([r.random_violation for r in sel])),
            "envelope_nlog": sel[0].envelope_nlog,
            "bound_Lb": sel[0].bound_Lb,
            "bound_delta": sel[0].bound_delta,
            "max_ratio": float(max(r.engine_ratio for r in sel)),
        }
    return out


def bench_csv(rows: list[BenchRow]) -> bytes:
    lines = [",".join(BENCH_COLUMNS)]
    for r in rows:
        d = asdict(r)
        lines.append(",".join(format(d[c], ".6g") if isinstance(d[c], float) else str(d[c]) for c in BENCH_COLUMNS))
    return ("\n".join(lines) + "\n").encode("utf-8")
