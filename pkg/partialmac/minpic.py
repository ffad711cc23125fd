#!/usr/bin/env python3
#
# Part of the "partialmac" Python library

"""
Minimum sum-power under per-user rate requirements.

For a fixed decoding configuration and fixed sub-user
rate targets, the powers needed are the least fixed
point of a standard interference function:

    p[s] = max over receivers i decoding s of
           (2^target[s] - 1) * noise_i(s, p) / g[i][user(s)]

where noise_i(s, p) is the noise plus the received power
of everything i treats as noise while decoding s.

minpic_solve searches over rate splits (projected
gradient on each user's simplex) and over configurations
(several starts, then toggle / adjacent-transposition
local search).  Its duals come from dual ascent on the
rate constraints, priced by the marginal cost of rate.
brute_force_solve enumerates every configuration and a
grid of splits.
"""

import dataclasses
from dataclasses import dataclass
import itertools
import logging
import math
from typing import Optional

import numpy as np

from .model import *
from .model import _matrix
from .region import receiver_alternatives, alternative_count, enumerate_decoded_sets
from .utility import *


__all__ = []

def export(fn):
    __all__.append(fn.__name__)
    return fn


log = logging.getLogger(__name__)

LN2 = math.log(2.0)
BRUTE_FORCE_LIMIT = 3


@export
@dataclass(frozen=True)
class MinpicSettings:
    """
    restarts is how many of the best starting configurations
    get a full local search.  Starting configurations are
    enumerated only while there are at most max_starts.
    dual_step is relative: user k's price moves by
    dual_step * marginal_cost[k] per bit of deficit.
    """
    tol: float = 1e-7
    fd_step: float = 1e-5
    dual_step: float = 0.05
    dual_iterations: int = 2000
    divergence_factor: float = 1e9
    max_outer: int = 50
    gradient_steps: int = 40
    neighbor_gradient_steps: int = 8
    polish_levels: int = 80
    restarts: int = 2
    max_starts: int = 64


@export
@dataclass(frozen=True)
class BruteSettings:
    split_grid: int = 32
    refine: int = 8
    divergence_factor: float = 1e9
    polish_levels: int = 80
    # configurations x lattice splits
    max_evaluations: int = 10 ** 8
    chunk: int = 4096


@export
@dataclass(frozen=True, eq=False)
class DualState:
    "step is one scalar, or one step per user."
    lam: np.ndarray
    step: float = 0.05

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float)
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            raise ValueError("dual variables must be finite and >= 0")
        step = np.array(self.step, dtype=float)
        if not (np.all(step > 0) and np.all(np.isfinite(step))):
            raise ValueError(f"step must be positive, not {self.step}")
        if step.ndim:
            if step.shape != lam.shape:
                raise ValueError(f"step must be a scalar or have shape {lam.shape}, not {step.shape}")
            step.setflags(write=False)
        else:
            step = float(step)
        lam.setflags(write=False)
        object.__setattr__(self, 'lam', lam)
        object.__setattr__(self, 'step', step)

    @classmethod
    def zeros(cls, num_users, step=0.05):
        return cls(np.zeros(num_users), step)


@export
@dataclass(frozen=True, eq=False)
class RateSplit:
    """
    split[k] divides user k's rate requirement among its
    U components; each row sums to rate_min[k].
    """
    split: np.ndarray

    def __post_init__(self):
        split = np.array(self.split, dtype=float)
        if split.ndim != 2 or split.shape[0] != split.shape[1]:
            raise ValueError(f"split must be square, not shape {split.shape}")
        if np.any(split < 0) or not np.all(np.isfinite(split)):
            raise ValueError("split entries must be finite and >= 0")
        split.setflags(write=False)
        object.__setattr__(self, 'split', split)

    @classmethod
    def uniform(cls, rate_min):
        rate_min = np.asarray(rate_min, dtype=float)
        u = len(rate_min)
        return cls(np.repeat(rate_min[:, None] / u, u, axis=1))

    def check(self, rate_min, tol=1e-12):
        if not np.allclose(self.split.sum(axis=1), rate_min, rtol=0, atol=tol * (1 + np.max(rate_min, initial=0))):
            raise ValueError("split rows must sum to rate_min")
        return self

    def targets(self):
        return RateAllocation(self.split)


@export
@dataclass(frozen=True, eq=False)
class Solution:
    config: DecodingConfig
    powers: PowerAllocation
    rates: RateAllocation
    total_power: float
    feasible: bool
    inner_iterations: int = 0
    configs_evaluated: int = 0
    duals: Optional[DualState] = None
    marginal_cost: Optional[np.ndarray] = None
    method: str = "minpic"

    def user_rates(self):
        return user_rates(self.rates)


#
# batched least-fixed-point solves
#

class _ConfigTables:
    """
    Per-configuration arrays for the fixed-point map.

    Sub-user n (flat index) is decoded by up to U receivers;
    each gets a slot r.  For slot (n, r):
        valid    - slot in use
        gain     - g[i][user(n)] at that receiver
        noise    - sigma_i^2
        weights  - g[i][user(t)] for every t treated as noise
                   while decoding n, else 0
    """

    __slots__ = ('num_users', 'valid', 'gain', 'noise', 'weights')

    def __init__(self, cfg, ch):
        u = ch.num_users
        cfg.validate(u)
        s_count = u * u
        self.num_users = u
        self.valid = np.zeros((s_count, u), dtype=bool)
        self.gain = np.zeros((s_count, u))
        self.noise = np.zeros((s_count, u))
        self.weights = np.zeros((s_count, u, s_count))
        slots = [0] * s_count
        for i, order in enumerate(cfg.orders):
            for position, s in enumerate(order):
                n = s.flat(u)
                r = slots[n]
                slots[n] += 1
                self.valid[n, r] = True
                self.gain[n, r] = ch.gain[i, s.user]
                self.noise[n, r] = ch.noise[i]
                for t in DecodingConfig.interferers_of(order, position, u):
                    self.weights[n, r, t.flat(u)] = ch.gain[i, t.user]

    def coefficients(self, targets):
        """
        Returns (c, feasible): c[b, n, r] = (2^target - 1) / gain
        for every used slot with a positive target, and a
        mask of batch entries that don't ask a zero-gain
        receiver for a positive rate.
        """
        gamma = np.expm1(targets * LN2)
        positive = (gamma > 0)[:, :, None]
        usable = self.valid[None] & positive
        dead = usable & (self.gain[None] == 0)
        with np.errstate(divide='ignore', invalid='ignore'):
            c = gamma[:, :, None] / self.gain[None]
        c = np.where(usable & ~dead, c, 0.0)
        return c, ~dead.any(axis=(1, 2))

    def apply(self, c, p):
        "vals[b, n, r]: what slot (n, r) demands of p[b, n]."
        return c * (self.noise[None] + np.einsum('nrt,bt->bnr', self.weights, p))


def _batch_solve(m, b):
    try:
        return np.linalg.solve(m, b[..., None])[..., 0], np.ones(len(b), dtype=bool)
    except np.linalg.LinAlgError:
        x = np.zeros_like(b)
        ok = np.ones(len(b), dtype=bool)
        for n in range(len(b)):
            try:
                x[n] = np.linalg.solve(m[n], b[n])
            except np.linalg.LinAlgError:
                ok[n] = False
        return x, ok


def _least_fixed_point(tables, targets, cap, max_steps=100, yates_fallback=5000):
    """
    Policy iteration for the least fixed point of
    p = max_r A_r p + b_r, batched over rows of targets.

    Each step fixes which receiver binds for each sub-user,
    solves that linear system exactly, and switches to the
    binding receivers of the solution.  Iterates increase
    monotonically to the least fixed point; a negative,
    singular or oversized solution means none exists.

    Returns (powers (B, S), feasible (B,), steps).
    """
    batch, s_count = targets.shape
    c, feasible = tables.coefficients(targets)
    index = np.arange(s_count)
    eye = np.eye(s_count)

    sigma = np.argmax(c * tables.noise[None], axis=2)
    x = np.zeros((batch, s_count))
    active = feasible.copy()
    steps = 0
    while active.any() and steps < max_steps:
        steps += 1
        a = np.flatnonzero(active)
        sig = sigma[a]
        ca = c[a]
        cs = np.take_along_axis(ca, sig[:, :, None], axis=2)[:, :, 0]
        m = eye[None] - cs[:, :, None] * tables.weights[index[None, :], sig]
        rhs = cs * tables.noise[index[None, :], sig]
        xa, ok = _batch_solve(m, rhs)

        scale = 1.0 + np.abs(xa).max(axis=1)
        ok &= np.all(np.isfinite(xa), axis=1)
        ok &= np.all(xa >= -1e-9 * scale[:, None], axis=1)
        ok &= np.all(xa <= cap, axis=1)
        xa = np.clip(xa, 0.0, None)

        vals = tables.apply(ca, xa)
        gap = vals.max(axis=2) - xa
        slack = 1e-11 * (1.0 + xa.max(axis=1, keepdims=True))
        done = np.all(gap <= slack, axis=1)
        sigma[a] = np.where(gap > slack, vals.argmax(axis=2), sig)
        x[a] = xa

        feasible[a[~ok]] = False
        active[a[~ok | done]] = False

    if active.any():
        # floating-point ties can stall the policy switch;
        # finish those with plain Yates iteration from below.
        a = np.flatnonzero(active)
        xa = x[a]
        converged = np.zeros(len(a), dtype=bool)
        for iteration in range(yates_fallback):
            nxt = tables.apply(c[a], xa).max(axis=2)
            converged = np.all(np.abs(nxt - xa) <= 1e-12 * (1.0 + nxt.max(axis=1, keepdims=True)), axis=1)
            xa = nxt
            if converged.all() or np.any(xa > cap):
                break
        ok = converged & np.all(xa <= cap, axis=1)
        x[a] = xa
        feasible[a[~ok]] = False

    x[~feasible] = np.inf
    return x, feasible, steps


def _divergence_cap(ch, factor):
    return factor * float(ch.noise.max())


def _check_targets(cfg, targets, ch):
    u = ch.num_users
    cfg.validate(u)
    targets = _matrix(targets)
    if targets.shape != (u, u):
        raise ValueError(f"targets must have shape {(u, u)}, not {targets.shape}")
    if np.any(targets < 0):
        raise ValueError("targets must be >= 0")
    for i, order in enumerate(cfg.orders):
        for s in order:
            if (ch.gain[i, s.user] == 0) and (targets[s.user, s.component] > 0):
                raise InfeasibleError(
                    f"receiver {i + 1} decodes {s} through a zero gain",
                    detail={'receiver': i, 'sub_user': s})
    return targets


@export
def power_iterates(cfg, targets, ch):
    """
    Yields the Yates iterates F(0), F(F(0)), ... as
    read-only U x U arrays.  Never terminates on its own.
    """
    targets = _check_targets(cfg, targets, ch)
    u = ch.num_users
    tables = _ConfigTables(cfg, ch)
    c, _ = tables.coefficients(targets.reshape(1, -1))
    p = np.zeros((1, u * u))
    while True:
        p = tables.apply(c, p).max(axis=2)
        view = p.reshape(u, u).copy()
        view.setflags(write=False)
        yield view


@export
def min_power_fixed(cfg, targets, ch, max_iter=10000, tol=1e-10, *, method="yates", divergence_factor=1e9):
    """
    Least powers meeting every SIC rate cap under cfg.

    method="yates" iterates the interference function from
    zero power; method="policy" solves for the same fixed
    point exactly with a few linear solves.  Raises
    InfeasibleError when no finite power works.
    """
    targets = _check_targets(cfg, targets, ch)
    u = ch.num_users
    cap = _divergence_cap(ch, divergence_factor)

    if method == "policy":
        x, feasible, steps = _least_fixed_point(_ConfigTables(cfg, ch), targets.reshape(1, -1), cap)
        if not feasible[0]:
            raise InfeasibleError("no finite power supports these targets", detail={'steps': steps})
        return PowerAllocation(x[0].reshape(u, u))

    if method != "yates":
        raise ValueError(f"unknown method {method!r}")

    previous = np.zeros((u, u))
    for iteration, p in enumerate(power_iterates(cfg, targets, ch), 1):
        if np.any(p > cap):
            raise InfeasibleError(
                "power iteration diverged",
                detail={'iteration': iteration, 'cap': cap})
        if np.max(np.abs(p - previous)) <= tol * max(1.0, float(p.max())):
            return PowerAllocation(p)
        if iteration >= max_iter:
            break
        previous = p
    raise InfeasibleError(
        f"power iteration did not converge in {max_iter} iterations",
        detail={'iteration': max_iter})


@export
def lagrangian_value(p, lam, r, rate_min):
    lam = lam.lam if isinstance(lam, DualState) else np.asarray(lam, dtype=float)
    deficit = np.asarray(rate_min, dtype=float) - user_rates(r)
    return float(_matrix(p).sum() + lam @ deficit)


@export
def dual_update(lam, r, rate_min):
    deficit = np.asarray(rate_min, dtype=float) - user_rates(r)
    return DualState(np.maximum(0.0, lam.lam + lam.step * deficit), lam.step)


def lagrangian_rates(lam, marginal, rate_min):
    """
    Per-user rates minimizing the Lagrangian at prices lam,
    from the local model of the power cost around rate_min:
    the marginal cost of a user's rate doubles with every
    extra bit, so user k stops where it reaches lam[k],
    at rate_min[k] + log2(lam[k] / marginal[k]), floored at 0.
    """
    lam = lam.lam if isinstance(lam, DualState) else np.asarray(lam, dtype=float)
    marginal = np.maximum(np.asarray(marginal, dtype=float), 1e-300)
    with np.errstate(divide='ignore'):
        return np.maximum(0.0, np.asarray(rate_min, dtype=float) + np.log2(lam / marginal))


def price_rates(marginal, rate_min, step, iterations, tol):
    """
    Dual ascent from lam = 0 against lagrangian_rates.
    Each user's step starts at step * marginal[k] and
    halves whenever that user's deficit changes sign.
    Returns the last DualState.
    """
    rate_min = np.asarray(rate_min, dtype=float)
    marginal = np.asarray(marginal, dtype=float)
    u = len(rate_min)
    steps = step * np.maximum(marginal, tol)
    duals = DualState(np.zeros(u), steps)
    previous = None
    for iteration in range(iterations):
        rates = lagrangian_rates(duals, marginal, rate_min)
        deficit = rate_min - rates
        if previous is not None:
            flipped = deficit * previous < 0
            if flipped.any():
                duals = DualState(duals.lam, np.where(flipped, duals.step * 0.5, duals.step))
        duals = dual_update(duals, rates[:, None], rate_min)
        if np.max(np.abs(deficit), initial=0.0) <= tol:
            break
        previous = deficit
    log.debug("dual ascent: %d iterations, lam %s", iteration + 1, duals.lam)
    return duals


#
# rate-split search
#

def project_simplex(v, totals):
    """
    Euclidean projection of each row v[..., k, :] onto
    {x >= 0, sum(x) = totals[k]}.
    """
    u = v.shape[-1]
    totals = np.broadcast_to(totals, v.shape[:-1])
    mu = -np.sort(-v, axis=-1)
    cssv = np.cumsum(mu, axis=-1) - totals[..., None]
    ind = np.arange(1, u + 1)
    cond = mu - cssv / ind > 0
    rho = u - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(cssv, rho[..., None], axis=-1) / (rho[..., None] + 1)
    return np.where(totals[..., None] > 0, np.maximum(v - theta, 0.0), 0.0)


class _PowerObjective:
    "Total power of a batch of splits under one configuration; inf where infeasible."

    def __init__(self, cfg, ch, cap):
        self.config = cfg
        self.tables = _ConfigTables(cfg, ch)
        self.cap = cap
        self.num_users = ch.num_users
        self.steps = 0

    def powers(self, splits):
        splits = np.asarray(splits, dtype=float)
        flat = splits.reshape(-1, self.num_users * self.num_users)
        x, feasible, steps = _least_fixed_point(self.tables, flat, self.cap)
        self.steps += steps
        return x, feasible

    def __call__(self, splits):
        x, feasible = self.powers(splits)
        return np.where(feasible, x.sum(axis=1), np.inf)


def _descend(objective, split, rate_min, h, max_steps):
    """
    Projected gradient on the rate-split simplices with a
    finite-difference gradient.  Each step tries a halving
    ladder of step lengths and keeps the best point found.
    """
    u = len(rate_min)
    x = np.array(split, dtype=float)
    f = float(objective(x[None])[0])
    if not math.isfinite(f):
        return x, f

    basis = np.eye(u * u).reshape(u * u, u, u)
    ladder = 0.5 ** np.arange(30)
    length = max(float(np.max(rate_min, initial=0.0)), h)

    for step in range(max_steps):
        forward = objective(x[None] + h * basis)
        backward = objective(np.clip(x[None] - h * basis, 0.0, None))
        grad = np.where(np.isfinite(forward), (forward - f) / h, np.nan)
        grad = np.where(np.isnan(grad) & np.isfinite(backward), (f - backward) / h, grad)
        grad = np.nan_to_num(grad, nan=0.0).reshape(u, u)
        norm = np.abs(grad).max()
        if norm == 0:
            break
        direction = grad / norm

        candidates = project_simplex(x[None] - (length * ladder)[:, None, None] * direction[None], rate_min)
        values = objective(candidates)
        best = int(np.argmin(values))
        if not values[best] < f - 1e-15 * abs(f):
            break
        x, f = candidates[best], float(values[best])
        # next ladder starts one rung above the accepted step
        length = min(2 * length * ladder[best], max(float(np.max(rate_min)), h))
    return x, f


def _polish(objective, split, rate_min, delta, levels):
    """
    Shrinking pattern search over each user's free split
    coordinates (components 1..U-1; component 0 takes the
    remainder).  Moves to the best neighbor; halves the
    pattern when the center is best.
    """
    u = len(rate_min)
    x = np.array(split, dtype=float)
    f = float(objective(x[None])[0])
    if not math.isfinite(f):
        return x, f

    free = [(k, j) for k in range(u) for j in range(1, u) if rate_min[k] > 0]
    if not free:
        return x, f
    rungs = (-1.0, -0.5, 0.0, 0.5, 1.0) if len(free) <= 4 else (-1.0, 0.0, 1.0)
    offsets = np.array(list(itertools.product(rungs, repeat=len(free))))
    rows = np.array([k for k, j in free])
    cols = np.array([j for k, j in free])
    floor = 1e-12 * max(1.0, float(np.max(rate_min)))

    for level in range(levels):
        if delta < floor:
            break
        candidates = np.repeat(x[None], len(offsets), axis=0)
        candidates[:, rows, cols] += delta * offsets
        candidates[:, :, 0] = rate_min[None, :] - candidates[:, :, 1:].sum(axis=2)
        valid = np.all(candidates >= 0, axis=(1, 2))
        values = np.full(len(candidates), np.inf)
        if valid.any():
            values[valid] = objective(candidates[valid])
        best = int(np.argmin(values))
        if values[best] < f - 1e-15 * abs(f):
            x, f = candidates[best], float(values[best])
        else:
            delta *= 0.5
    return x, f


def _marginal_cost(objective, split, rate_min, h):
    """
    d(total power)/d(rate_min[k]) by forward differences,
    spreading h over user k's split.  Falls back to a
    backward difference where the forward step is infeasible.
    """
    u = len(rate_min)
    split = np.asarray(split, dtype=float)
    base = float(objective(split[None])[0])
    forward = np.repeat(split[None], u, axis=0)
    backward = forward.copy()
    for k in range(u):
        if rate_min[k] > 0:
            forward[k, k] *= (rate_min[k] + h) / rate_min[k]
            backward[k, k] *= max(rate_min[k] - h, 0.0) / rate_min[k]
        else:
            forward[k, k, 0] += h
    marginal = (objective(forward) - base) / h
    if not np.all(np.isfinite(marginal)):
        with np.errstate(divide='ignore', invalid='ignore'):
            lowered = (base - objective(backward)) / np.minimum(rate_min, h)
        marginal = np.where(np.isfinite(marginal), marginal, lowered)
    return marginal


def _solution(sc, objective, split, total, method, configs_evaluated, inner_iterations=None, **kwargs):
    u = sc.num_users
    feasible = math.isfinite(total) and sc.within_budget(total)
    if math.isfinite(total):
        x, ok = objective.powers(np.asarray(split)[None])
        powers = PowerAllocation(x[0].reshape(u, u))
        rates = RateAllocation(split)
    else:
        powers = PowerAllocation.zeros(u)
        rates = RateAllocation.zeros(u)
    if math.isfinite(total) and not feasible:
        log.info("%s: total power %.6g exceeds budget %.6g", method, total, sc.power_budget)
    return Solution(
        config=objective.config,
        powers=powers,
        rates=rates,
        total_power=float(total),
        feasible=feasible,
        inner_iterations=objective.steps if inner_iterations is None else inner_iterations,
        configs_evaluated=configs_evaluated,
        method=method,
        **kwargs)


def config_neighbors(cfg):
    """
    Yields the local-search moves from cfg, in order:
    toggle each foreign sub-user at each receiver (a newly
    decoded one goes to the front of the order), then each
    adjacent transposition of each receiver's order.
    """
    u = cfg.num_users
    for i, order in enumerate(cfg.orders):
        for s in all_sub_users(u):
            if s.user == i:
                continue
            if s in order:
                new = tuple(t for t in order if t != s)
            else:
                new = (s,) + order
            yield DecodingConfig(cfg.orders[:i] + (new,) + cfg.orders[i + 1:])
    for i, order in enumerate(cfg.orders):
        for m in range(len(order) - 1):
            new = order[:m] + (order[m + 1], order[m]) + order[m + 2:]
            yield DecodingConfig(cfg.orders[:i] + (new,) + cfg.orders[i + 1:])


def _start_order(i, members, ch):
    order = DecodingConfig.strongest_first(i, members, ch)
    if order[-1].user != i:
        # foreign sub-users go before the own ones
        order = tuple(s for s in order if s.user != i) + tuple(s for s in order if s.user == i)
    return order


def _whole_user_sets(i, num_users):
    own = own_sub_users(i, num_users)
    others = [k for k in range(num_users) if k != i]
    for count in range(len(others) + 1):
        for users in itertools.combinations(others, count):
            yield own + tuple(SubUserId(k, j) for k in users for j in range(num_users))


@export
def start_configs(ch, max_starts=64):
    """
    The configurations minpic_solve starts from, own-only
    first.  Each receiver takes any decoded set in
    strongest-first order if that makes at most max_starts
    combinations; failing that, decoded sets built from
    whole foreign users; failing that, just own-only and
    full decoding.
    """
    u = ch.num_users
    if (1 << (u * u - u)) ** u <= max_starts:
        sets = [enumerate_decoded_sets(i, u) for i in range(u)]
    elif (1 << (u - 1)) ** u <= max_starts:
        sets = [tuple(_whole_user_sets(i, u)) for i in range(u)]
    else:
        starts = [DecodingConfig.own_only(ch)]
        if u > 1:
            starts.append(DecodingConfig.full(ch))
        return starts
    choices = [[_start_order(i, members, ch) for members in receiver_sets] for i, receiver_sets in enumerate(sets)]
    return [DecodingConfig(orders) for orders in itertools.product(*choices)]


@export
def minpic_solve(sc, settings=None):
    """
    Every starting configuration gets a full split descent;
    the `settings.restarts` cheapest then run the
    configuration local search and a final polish.  The
    cheapest result wins, ties going to the better-ranked
    start.  Duals come from dual ascent against the
    marginal cost of the winner.
    """
    settings = settings or MinpicSettings()
    ch = sc.channel
    u = sc.num_users
    rate_min = np.asarray(sc.rate_min, dtype=float)
    cap = _divergence_cap(ch, settings.divergence_factor)
    uniform = RateSplit.uniform(rate_min).split

    cache = {}

    def evaluate(cfg, split, gradient_steps):
        if cfg not in cache:
            objective = _PowerObjective(cfg, ch, cap)
            x, f = _descend(objective, split, rate_min, settings.fd_step, gradient_steps)
            cache[cfg] = (objective, x, f)
        return cache[cfg]

    def local_search(cfg):
        objective, split, total = cache[cfg]
        for outer in range(settings.max_outer):
            for neighbor in config_neighbors(cfg):
                n_objective, n_split, n_total = evaluate(neighbor, split, settings.neighbor_gradient_steps)
                if n_total < total - settings.tol:
                    log.debug("minpic pass %d: %s improves %.9g -> %.9g", outer, neighbor, total, n_total)
                    x, f = _descend(n_objective, n_split, rate_min, settings.fd_step, settings.gradient_steps)
                    cfg, objective, split, total = neighbor, n_objective, x, f
                    cache[cfg] = (objective, split, total)
                    break
            else:
                break
        return cfg, objective, split, total

    starts = start_configs(ch, settings.max_starts)
    ranked = []
    for n, cfg in enumerate(starts):
        objective, split, total = evaluate(cfg, uniform, settings.gradient_steps)
        if math.isfinite(total):
            ranked.append((total, n, cfg))
    ranked.sort(key=lambda t: (t[0], t[1]))
    log.debug("minpic: %d of %d starts feasible", len(ranked), len(starts))

    delta = max(float(np.max(rate_min, initial=0.0)) / 32, settings.fd_step)
    best = None
    for start_total, n, cfg in ranked[:settings.restarts]:
        cfg, objective, split, total = local_search(cfg)
        split, total = _polish(objective, split, rate_min, delta, settings.polish_levels)
        log.debug("minpic start %d: %.9g -> %s %.9g", n, start_total, cfg, total)
        if (best is None) or (total < best[3] - settings.tol):
            best = (cfg, objective, split, total)

    duals = DualState.zeros(u, settings.dual_step)
    marginal = None
    if best is None:
        cfg = starts[0]
        objective, split, total = cache[cfg]
    else:
        cfg, objective, split, total = best
        marginal = _marginal_cost(objective, split, rate_min, settings.fd_step)
        if np.all(np.isfinite(marginal)):
            duals = price_rates(marginal, rate_min, settings.dual_step, settings.dual_iterations, settings.tol)

    log.debug("minpic done: %s total %.9g after %d configs", cfg, total, len(cache))
    inner = sum(o.steps for o, x, f in cache.values())
    return _solution(sc, objective, split, total, "minpic", len(cache),
        inner_iterations=inner, duals=duals, marginal_cost=marginal)


def split_grid_size(num_users, split_grid):
    "Number of rows split_grid_points yields: C(split_grid + U - 2, U - 1) ** U."
    return math.comb(split_grid + num_users - 2, num_users - 1) ** num_users


def split_grid_points(rate_min, split_grid, chunk=None):
    """
    Yields every combination of per-user splits on a simplex
    lattice with split_grid points per dimension, as arrays
    of at most `chunk` rows (all of them at once if None).
    """
    u = len(rate_min)
    steps = split_grid - 1
    lattice = np.array(list(compositions(steps, u)), dtype=float) / steps
    per_user = [lattice * rate_min[k] for k in range(u)]
    shape = (len(lattice),) * u
    total = len(lattice) ** u
    chunk = chunk or total
    for start in range(0, total, chunk):
        index = np.unravel_index(np.arange(start, min(start + chunk, total)), shape)
        yield np.stack([per_user[k][index[k]] for k in range(u)], axis=1)


def _dominated(order, i):
    "True if a foreign sub-user is decoded after the last own one."
    return order[-1].user != i


@export
def brute_force_solve(sc, split_grid=None, settings=None):
    """
    Exhaustive oracle: every per-receiver (decoded set,
    order) combination, every split on the lattice.  The
    `settings.refine` best configurations then have their
    split polished off the lattice.  split_grid, if given,
    overrides settings.split_grid.

    Raises SizeLimitError up front when configurations times
    lattice splits exceeds settings.max_evaluations.

    Orders that decode a foreign sub-user after all own
    sub-users are skipped: dropping that sub-user from the
    decoded set leaves every other cap unchanged and removes
    a constraint, so they can never win.  They still count
    toward configs_evaluated.
    """
    settings = settings or BruteSettings()
    if split_grid is not None:
        settings = dataclasses.replace(settings, split_grid=split_grid)
    split_grid = settings.split_grid
    u = sc.num_users
    check_num_users(u, BRUTE_FORCE_LIMIT, "brute_force_solve")
    if split_grid < 2:
        raise ValueError(f"split_grid must be >= 2, not {split_grid}")
    count = alternative_count(u) ** u
    evaluations = count * split_grid_size(u, split_grid)
    if evaluations > settings.max_evaluations:
        raise SizeLimitError(
            f"brute_force_solve would evaluate {float(evaluations):.3g} configuration/split pairs, "
            f"more than {float(settings.max_evaluations):.3g}",
            limit=settings.max_evaluations, requested=evaluations)
    ch = sc.channel
    rate_min = np.asarray(sc.rate_min, dtype=float)
    cap = _divergence_cap(ch, settings.divergence_factor)

    alternatives = [list(receiver_alternatives(i, u)) for i in range(u)]
    coarse = []
    solved = 0
    for config_id, orders in enumerate(itertools.product(*alternatives)):
        if any(_dominated(order, i) for i, order in enumerate(orders)):
            continue
        objective = _PowerObjective(DecodingConfig(orders), ch, cap)
        solved += 1
        best_value = math.inf
        best_split = None
        for splits in split_grid_points(rate_min, split_grid, settings.chunk):
            values = objective(splits)
            n = int(np.argmin(values))
            if values[n] < best_value:
                best_value, best_split = float(values[n]), splits[n]
        if math.isfinite(best_value):
            coarse.append((best_value, config_id, objective, best_split))
    log.debug("brute force: %d configurations, %d solved, %d feasible", count, solved, len(coarse))

    if not coarse:
        objective = _PowerObjective(DecodingConfig.own_only(ch), ch, cap)
        return _solution(sc, objective, RateSplit.uniform(rate_min).split, math.inf, "brute", count)

    coarse.sort(key=lambda t: (t[0], t[1]))
    delta = float(np.max(rate_min, initial=0.0)) / (split_grid - 1)
    refined = []
    for value, config_id, objective, split in coarse[:settings.refine]:
        x, f = _polish(objective, split, rate_min, delta, settings.polish_levels)
        refined.append((f, config_id, objective, x))

    lowest = min(t[0] for t in refined)
    ties = [t for t in refined if t[0] <= lowest * (1 + 1e-12)]
    total, config_id, objective, split = min(ties, key=lambda t: t[1])
    log.debug("brute force best: config %d total %.9g", config_id, total)
    return _solution(sc, objective, split, total, "brute", count)
