"""Monte Carlo cost of the stop / wait / spend-everything policy.

Paths are simulated in fixed-size blocks, each with its own Philox stream
keyed by ``(seed, block)``, so results do not depend on how blocks are
scheduled.  Block totals are combined with ``math.fsum``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from .boundary import BoundaryPoint, derive_constants
from .errors import DomainError, ValidationError
from .model import ModelParams

BLOCK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    dt: float
    horizon: float
    seed: int
    antithetic: bool
    x0: float
    c0_fuel: float

    def validate(self, p: ModelParams):
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if self.horizon < 10.0 / p.alpha:
            raise DomainError("horizon must be at least 10/alpha")
        if self.n_paths < 1 or (self.antithetic and self.n_paths < 2):
            raise DomainError("too few paths")
        if self.antithetic and self.n_paths % 2:
            raise DomainError("antithetic sampling needs an even n_paths")
        if self.x0 < 0:
            raise DomainError("x0 must be non-negative")


@dataclass
class SimResult:
    mean_cost: float
    std_error: float
    n_paths: int
    dt: float
    horizon: float
    n_jumped: int
    n_stopped_left: int
    truncated: int
    tail_bound: float
    coarse_dt: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _simulate_block(n, rng, cfg, F, G, f0, p):
    """Costs of ``n`` paths plus (jumped, stopped, truncated, tail) counts."""
    a, dl, lam, c = p.alpha, p.delta, p.lam, cfg.c0_fuel
    sq = math.sqrt(cfg.dt)
    disc_step = math.exp(-a * cfg.dt)
    run_w = lam * (1.0 - disc_step) / a      # integral of e^{-a s} over one step, times lam
    n_steps = int(math.ceil(cfg.horizon / cfg.dt))

    cost = np.zeros(n)
    pos = np.full(n, float(cfg.x0))
    jumped = np.zeros(n, dtype=bool)
    alive = np.ones(n, dtype=bool)

    def settle(idx, disc):
        # apply boundary actions at the current time for paths ``idx``
        y = np.abs(pos[idx])
        stop_left = (~jumped[idx]) & (y <= F)
        cost[idx[stop_left]] += disc * dl * y[stop_left] ** 2
        alive[idx[stop_left]] = False
        jump = (~jumped[idx]) & (y >= G) & ~stop_left
        if np.any(jump):
            j = idx[jump]
            cost[j] += disc * c
            pos[j] = np.sign(pos[j]) * (np.abs(pos[j]) - c)
            jumped[j] = True
        post = jumped[idx] & alive[idx]
        if np.any(post):
            k = idx[post]
            yk = np.abs(pos[k])
            done = yk <= f0
            cost[k[done]] += disc * dl * yk[done] ** 2
            alive[k[done]] = False

    idx = np.arange(n)
    settle(idx, 1.0)
    disc = 1.0
    half = n // 2 if cfg.antithetic else 0
    for _ in range(n_steps):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        if cfg.antithetic:
            live_pair = alive[:half] | alive[half:]
            zp = np.zeros(half)
            zp[live_pair] = rng.standard_normal(int(live_pair.sum()))
            z = np.concatenate((zp, -zp))[idx]
        else:
            z = rng.standard_normal(idx.size)
        y0 = pos[idx]
        y1 = y0 + sq * z
        cost[idx] += disc * run_w * 0.5 * (y0 * y0 + y1 * y1)
        pos[idx] = y1
        disc *= disc_step
        settle(idx, disc)
    trunc = alive
    tail = disc * dl * np.where(trunc, pos * pos, 0.0)
    return cost, int(jumped.sum()), int(n - trunc.sum()), int(trunc.sum()), tail


def simulate_policy(cfg: SimConfig, bp: BoundaryPoint, p: ModelParams,
                    threads: int = 1) -> SimResult:
    """Discounted cost of the candidate policy started from ``(cfg.x0, bp.c)``.

    Stop when |Y| <= F before spending fuel; spend all fuel the first time
    |Y| >= G; after that stop when |Y| <= f0.  Costs use an Euler path and
    are not bridge-corrected, so boundary hits carry an O(sqrt(dt)) bias.
    ``threads > 1`` runs blocks concurrently; the output is unchanged.
    """
    cfg.validate(p)
    if not bp.valid:
        raise ValidationError(f"boundary point at c={bp.c!r} is not valid")
    if abs(cfg.c0_fuel - bp.c) > 1e-15 * max(1.0, bp.c):
        raise DomainError("SimConfig.c0_fuel must equal the boundary point's fuel level")
    if threads < 1:
        raise DomainError("threads must be at least 1")
    d = derive_constants(p)
    sizes = [min(BLOCK, cfg.n_paths - k) for k in range(0, cfg.n_paths, BLOCK)]
    if cfg.antithetic and any(n % 2 for n in sizes):
        raise DomainError("antithetic blocks must have an even number of paths")

    def run(block):
        rng = _block_rng(cfg.seed, block)
        return _simulate_block(sizes[block], rng, cfg, bp.F, bp.G, d.f0, p)

    if threads == 1:
        outs = [run(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            outs = list(ex.map(run, range(len(sizes))))

    sums, sqs, tails = [], [], []
    pair_n = jumped = stopped = truncated = 0
    for n, (cost, nj, ns, nt, tail) in zip(sizes, outs):
        samples = 0.5 * (cost[: n // 2] + cost[n // 2:]) if cfg.antithetic else cost
        sums.append(float(np.sum(samples)))
        sqs.append(float(np.sum(samples * samples)))
        pair_n += samples.size
        jumped += nj
        stopped += ns
        truncated += nt
        tails.append(float(np.sum(tail)))
    mean = math.fsum(sums) / pair_n
    if pair_n > 1:
        var = max(math.fsum(sqs) / pair_n - mean * mean, 0.0) * pair_n / (pair_n - 1)
        se = math.sqrt(var / pair_n)
    else:
        se = 0.0
    coarse = cfg.dt >= (bp.G - bp.F) ** 2 / 16.0
    return SimResult(mean, se, cfg.n_paths, cfg.dt, cfg.horizon, jumped, stopped,
                     truncated, math.fsum(tails) / cfg.n_paths, coarse)
