#!/usr/bin/env python3
#
# Part of the "partialmac" Python library

"""
Time-sharing across decoding configurations.

A vertex is one static operating point (configuration,
per-user rates, total power).  Mixing vertices over time
with weights theta reaches any convex combination; the
cheapest mix meeting every user's rate requirement on
average is a small linear program.
"""

from dataclasses import dataclass
import logging

import numpy as np

from .minpic import min_power_fixed, RateSplit
from .model import *
from .utility import *


__all__ = []

def export(fn):
    __all__.append(fn.__name__)
    return fn


log = logging.getLogger(__name__)

TARGET_SCALES = (0.5, 1.5)


@export
@dataclass(frozen=True, eq=False)
class VertexPoint:
    config_id: int
    rates: np.ndarray
    power: float

    def __post_init__(self):
        rates = np.array(self.rates, dtype=float)
        if np.any(rates < 0) or not (self.power >= 0):
            raise ValueError("vertex rates and power must be >= 0")
        rates.setflags(write=False)
        object.__setattr__(self, 'rates', rates)
        object.__setattr__(self, 'power', float(self.power))

    def meets(self, rate_min, tol=1e-9):
        return bool(np.all(self.rates >= np.asarray(rate_min) - tol))


@export
@dataclass(frozen=True, eq=False)
class TimeShareSchedule:
    vertices: tuple
    weights: np.ndarray
    avg_power: float
    avg_rates: np.ndarray
    basis: tuple = ()

    def rows(self, tol=1e-12):
        "CSV rows for every vertex with positive weight."
        for vertex, theta in zip(self.vertices, self.weights):
            if theta > tol:
                row = {'config_id': vertex.config_id, 'theta': float(theta), 'power': vertex.power}
                for k, rate in enumerate(vertex.rates, 1):
                    row[f"r{k}"] = float(rate)
                yield row


def default_rate_targets(rate_min, scales=TARGET_SCALES):
    "rate_min, then rate_min with each user's entry scaled by each target scale."
    rate_min = np.asarray(rate_min, dtype=float)
    targets = [rate_min]
    for k in range(len(rate_min)):
        for scale in scales:
            target = rate_min.copy()
            target[k] *= scale
            targets.append(target)
    return targets


@export
def build_vertices(sc, configs, rate_targets=None, *, divergence_factor=1e9):
    """
    One vertex per feasible (configuration, target) pair,
    each target split uniformly over the user's components.
    """
    if rate_targets is None:
        rate_targets = default_rate_targets(sc.rate_min)
    vertices = []
    for cfg in configs:
        config_id = cfg.config_id()
        for target in rate_targets:
            target = np.asarray(target, dtype=float)
            if np.any(target < 0):
                raise ValueError("rate targets must be >= 0")
            split = RateSplit.uniform(target)
            try:
                p = min_power_fixed(cfg, split.targets(), sc.channel,
                    method="policy", divergence_factor=divergence_factor)
            except InfeasibleError:
                continue
            vertices.append(VertexPoint(config_id, target, p.total()))
    log.debug("built %d vertices from %d configurations", len(vertices), len(configs))
    return vertices


class Tableau:
    """
    Dense simplex tableau for min c'x s.t. Ax = b, x >= 0,
    started from a basis of identity columns.  Row 0 holds
    the reduced costs with -objective in column 0; rows 1..m
    hold B^-1 b and B^-1 A.  Pivoting follows Bland's rule.
    """

    eps = 1e-11

    def __init__(self, c, a, b, basis):
        self.m, self.n = a.shape
        self.basis = list(basis)
        self.tableau = np.zeros((self.m + 1, self.n + 1))
        self.tableau[1:, 0] = b
        self.tableau[1:, 1:] = a
        self.set_costs(c)

    def set_costs(self, c):
        cb = c[self.basis]
        self.tableau[0, 0] = -cb @ self.tableau[1:, 0]
        self.tableau[0, 1:] = c - cb @ self.tableau[1:, 1:]

    @property
    def objective(self):
        return -self.tableau[0, 0]

    def pivot(self, row, col):
        t = self.tableau
        self.basis[row - 1] = col - 1
        t[row, :] /= t[row, col]
        for i in range(t.shape[0]):
            if i != row:
                t[i, :] -= t[i, col] * t[row, :]

    def entering(self):
        costs = self.tableau[0, 1:]
        candidates = np.flatnonzero(costs < -self.eps)
        return None if not len(candidates) else int(candidates[0]) + 1

    def leaving(self, col):
        t = self.tableau
        best = None
        for row in range(1, self.m + 1):
            if t[row, col] > self.eps:
                ratio = t[row, 0] / t[row, col]
                key = (ratio, self.basis[row - 1])
                if (best is None) or (key[0] < best[0] - self.eps) or (
                        abs(key[0] - best[0]) <= self.eps and key[1] < best[1]):
                    best = key + (row,)
        return None if best is None else best[2]

    def run(self, max_iter):
        for iteration in range(max_iter):
            col = self.entering()
            if col is None:
                return iteration
            row = self.leaving(col)
            if row is None:
                raise ValueError("linear program is unbounded")
            self.pivot(row, col)
        raise RuntimeError(f"simplex did not terminate in {max_iter} pivots")

    def drop_row(self, row):
        self.tableau = np.delete(self.tableau, row, axis=0)
        del self.basis[row - 1]
        self.m -= 1

    def drop_columns(self, first):
        "Drops variable columns first.. (0-based variable index)."
        self.tableau = self.tableau[:, :first + 1]
        self.n = first

    def solution(self):
        x = np.zeros(self.n)
        for row, var in enumerate(self.basis, 1):
            x[var] = self.tableau[row, 0]
        return x


@export
def solve_timeshare_lp(vertices, rate_min):
    """
    min sum theta_v power_v
    s.t. sum theta_v rates_v[k] >= rate_min[k]  for every user k
         sum theta_v = 1,  theta >= 0

    Two-phase simplex: surplus variables turn the rate rows
    into equalities, artificials give the starting basis.
    Raises InfeasibleError if no mix meets rate_min.
    """
    if not vertices:
        raise ValueError("solve_timeshare_lp needs at least one vertex")
    rate_min = np.asarray(rate_min, dtype=float)
    u = len(rate_min)
    v = len(vertices)
    rates = np.array([vertex.rates for vertex in vertices]).T
    power = np.array([vertex.power for vertex in vertices])

    m = u + 1
    n = v + u
    a = np.zeros((m, n + m))
    a[:u, :v] = rates
    a[:u, v:n] = -np.eye(u)
    a[u, :v] = 1.0
    a[:, n:] = np.eye(m)
    b = np.concatenate([rate_min, [1.0]])

    max_iter = 2 ** min(v + u, 24)
    phase1 = np.concatenate([np.zeros(n), np.ones(m)])
    tableau = Tableau(phase1, a, b, range(n, n + m))
    tableau.run(max_iter)
    if tableau.objective > 1e-9:
        raise InfeasibleError(
            "no time-sharing mix meets the rate requirements",
            detail={'phase1': tableau.objective})

    # pivot leftover zero-level artificials out of the basis,
    # dropping rows that are redundant
    row = 1
    while row <= tableau.m:
        if tableau.basis[row - 1] >= n:
            entries = tableau.tableau[row, 1:n + 1]
            candidates = np.flatnonzero(np.abs(entries) > Tableau.eps)
            if len(candidates):
                tableau.pivot(row, int(candidates[0]) + 1)
            else:
                tableau.drop_row(row)
                continue
        row += 1
    tableau.drop_columns(n)

    costs = np.concatenate([power, np.zeros(u)])
    tableau.set_costs(costs)
    tableau.run(max_iter)

    x = tableau.solution()
    theta = np.clip(x[:v], 0.0, None)
    theta /= theta.sum()
    basis = tuple(sorted(var for var in tableau.basis if var < v))
    return TimeShareSchedule(
        vertices=tuple(vertices),
        weights=theta,
        avg_power=float(theta @ power),
        avg_rates=rates @ theta,
        basis=basis,
        )
