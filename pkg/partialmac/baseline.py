#!/usr/bin/env python3
#
# Part of the "partialmac" Python library

"""
Orthogonal multiple access baseline.

User k transmits alone for a fraction alpha_k of the
time, so it sees no interference.  Meeting rate R_k on
average needs rate R_k / alpha_k while active, which
costs average power

    alpha_k * sigma_k^2 * (2^(R_k / alpha_k) - 1) / g[k][k]
"""

from dataclasses import dataclass
import itertools
import logging
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .utility import *
from .utility import LN2


__all__ = []

def export(fn):
    __all__.append(fn.__name__)
    return fn


log = logging.getLogger(__name__)


@export
@dataclass(frozen=True, eq=False)
class OmaSolution:
    fractions: np.ndarray
    user_power: np.ndarray
    total_power: float

    def __post_init__(self):
        for name in ('fractions', 'user_power'):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, 'total_power', float(self.total_power))


def _oma_powers(alphas, rate_min, noise, direct):
    """
    Per-user powers for a batch of fraction vectors
    alphas (..., U); inf where a user with a positive
    requirement has no time or no direct gain.
    """
    active = rate_min > 0
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        exponent = np.where(active, rate_min / alphas, 0.0)
        p = alphas * noise * np.expm1(exponent * LN2) / direct
    p = np.where(active, p, 0.0)
    usable = ~active | ((alphas > 0) & (direct > 0))
    return np.where(usable & np.isfinite(p), p, np.inf)


def _problem(sc):
    rate_min = np.asarray(sc.rate_min, dtype=float)
    noise = np.asarray(sc.channel.noise, dtype=float)
    direct = np.diag(sc.channel.gain).astype(float)
    return rate_min, noise, direct


@export
def oma_min_power(sc, alphas):
    rate_min, noise, direct = _problem(sc)
    alphas = np.array(alphas, dtype=float)
    if alphas.shape != rate_min.shape:
        raise ValueError(f"alphas must have shape {rate_min.shape}, not {alphas.shape}")
    if np.any(alphas < 0) or not np.all(np.isfinite(alphas)):
        raise ValueError("time fractions must be finite and >= 0")
    if alphas.sum() > 1 + 1e-9:
        raise ValueError(f"time fractions sum to {alphas.sum()}, more than 1")
    for k in range(len(rate_min)):
        if rate_min[k] > 0 and alphas[k] == 0:
            raise InfeasibleError(
                f"user {k + 1} needs {rate_min[k]} bits but has no time",
                detail={'user': k})
        if rate_min[k] > 0 and direct[k] == 0:
            raise InfeasibleError(
                f"user {k + 1} has no direct gain",
                detail={'user': k})
    p = _oma_powers(alphas, rate_min, noise, direct)
    if not np.all(np.isfinite(p)):
        raise InfeasibleError("OMA power overflows", detail={'alphas': alphas.tolist()})
    return OmaSolution(alphas, p, p.sum())


@export
def oma_optimize_fractions(sc, grid_n, *, sweeps=50):
    """
    Minimize total OMA power over fractions summing to 1.

    Users with no rate requirement get no time.  The
    active users' fractions are searched on a simplex
    lattice with grid_n points per axis; the best lattice
    point is then refined by bounded scalar searches on
    each pair of fractions, holding their sum fixed, until
    a sweep over all pairs stops improving.  The total is
    separable and convex, so pairwise moves reach the
    optimum.
    """
    if grid_n < 2:
        raise ValueError(f"grid_n must be >= 2, not {grid_n}")
    rate_min, noise, direct = _problem(sc)
    u = len(rate_min)
    active = np.flatnonzero(rate_min > 0)
    alphas = np.zeros(u)

    if not len(active):
        return OmaSolution(alphas, np.zeros(u), 0.0)

    steps = grid_n - 1
    lattice = np.array(list(compositions(steps, len(active))), dtype=float) / steps
    candidates = np.zeros((len(lattice), u))
    candidates[:, active] = lattice
    totals = _oma_powers(candidates, rate_min, noise, direct).sum(axis=1)
    best = int(np.argmin(totals))
    if not math.isfinite(totals[best]):
        raise InfeasibleError(
            f"every OMA grid point is infeasible at grid_n={grid_n}",
            detail={'grid_n': grid_n})
    alphas = candidates[best].copy()
    total = float(totals[best])
    log.debug("oma grid best %s: %.9g", alphas, total)

    def objective(alphas):
        return float(_oma_powers(alphas, rate_min, noise, direct).sum())

    width = 1.0 / steps
    for sweep in range(sweeps):
        start = total
        for a, b in itertools.combinations(active, 2):
            pair = alphas[a] + alphas[b]
            if pair <= 0:
                continue
            lo = max(alphas[a] - width, pair * 1e-12)
            hi = min(alphas[a] + width, pair * (1 - 1e-12))
            if not lo < hi:
                continue

            def along(t):
                trial = alphas.copy()
                trial[a] = t
                trial[b] = pair - t
                return objective(trial)

            result = minimize_scalar(along, bounds=(lo, hi), method="bounded", options={'xatol': 1e-12})
            if result.fun < total:
                alphas[a] = result.x
                alphas[b] = pair - result.x
                total = float(result.fun)
        if not total < start - 1e-13 * start:
            break
        # later sweeps search the whole pair segment
        width = 1.0

    p = _oma_powers(alphas, rate_min, noise, direct)
    log.debug("oma refined %s: %.9g", alphas, total)
    return OmaSolution(alphas, p, p.sum())
