#!/usr/bin/env python3
#
# Part of the "partialmac" Python library

"""
Partial-MAC rate region of the interference channel.

Receiver i's region is a union over decoded sets A
(own sub-users always included).  For a fixed A the
receiver sees a multiple-access channel over A with
everything outside A as noise; the constraints kept
are the subset-sum ones whose subset contains at least
one of receiver i's own sub-users.

Subsets are bitmasks over the U^2 flat sub-user indices.
"""

from dataclasses import dataclass
import functools
import itertools
import math

import numpy as np

from .model import *
from .model import _matrix
from .utility import *


__all__ = []

def export(fn):
    __all__.append(fn.__name__)
    return fn


ENUMERATION_LIMIT = 4
COUNT_LIMIT = 5


@export
def subset_mask(members, num_users):
    mask = 0
    for s in members:
        mask |= 1 << s.flat(num_users)
    return mask

@export
def mask_members(mask, num_users):
    return frozenset(
        SubUserId.from_flat(n, num_users)
        for n in range(num_users * num_users)
        if mask & (1 << n)
        )


@functools.lru_cache(maxsize=None)
def _decoded_set_masks(i, num_users):
    u = num_users
    own = subset_mask(own_sub_users(i, u), u)
    foreign = [n for n in range(u * u) if not own & (1 << n)]
    masks = []
    for counter in range(1 << len(foreign)):
        mask = own
        for bit, n in enumerate(foreign):
            if counter & (1 << bit):
                mask |= 1 << n
        masks.append(mask)
    return tuple(masks)


@export
def enumerate_decoded_sets(i, num_users):
    """
    Every decoded set receiver i may use: its own U
    sub-users plus any subset of the others.  There are
    2^(U^2 - U) of them, in ascending bitmask order.
    """
    check_num_users(num_users, ENUMERATION_LIMIT, "decoded-set enumeration")
    if not (0 <= i < num_users):
        raise ValueError(f"receiver {i} out of range for U={num_users}")
    return tuple(mask_members(mask, num_users) for mask in _decoded_set_masks(i, num_users))


@export
def constraint_count(num_users):
    "U * (2^(U^2) - 2^(U^2 - U)): constraints over all receivers at full decoded sets."
    check_num_users(num_users, COUNT_LIMIT, "constraint counting")
    u2 = num_users * num_users
    return num_users * ((1 << u2) - (1 << (u2 - num_users)))


@export
@dataclass(frozen=True)
class RateConstraint:
    "sum of the rates of the sub-users in `subset` <= rhs, at `receiver`."
    receiver: int
    subset: int
    rhs: float

    def members(self, num_users):
        return mask_members(self.subset, num_users)

    def lhs(self, r):
        r = _matrix(r).ravel()
        total = 0.0
        mask = self.subset
        n = 0
        while mask:
            if mask & 1:
                total += r[n]
            mask >>= 1
            n += 1
        return total

    def satisfied(self, r, tol=1e-9):
        return self.lhs(r) <= self.rhs + tol


@export
@dataclass(frozen=True)
class PartialMacPolytope:
    receiver: int
    decoded_set: frozenset
    constraints: tuple

    def contains(self, r, tol=1e-9):
        return all(c.satisfied(r, tol) for c in self.constraints)


def _subset_arrays(i, members, p, ch):
    """
    Vectorized core of partial_mac_constraints.

    Returns (masks, member_bits, rhs): one row per subset
    of `members` that meets receiver i's own sub-users,
    in ascending mask order.  member_bits[row, m] is 1 if
    members[m] is in that subset.
    """
    u = ch.num_users
    p = _matrix(p)
    decoded = set(members)
    outside = [s for s in all_sub_users(u) if s not in decoded]
    noise = effective_noise(i, outside, p, ch)

    m = len(members)
    counters = np.arange(1, 1 << m, dtype=np.int64)
    bits = ((counters[:, None] >> np.arange(m)) & 1).astype(bool)
    own = np.array([s.user == i for s in members])
    keep = (bits & own).any(axis=1)
    bits = bits[keep]

    flats = np.array([s.flat(u) for s in members], dtype=np.int64)
    masks = (bits * (np.int64(1) << flats)).sum(axis=1)
    received = np.array([ch.gain[i, s.user] * p[s.user, s.component] for s in members])
    rhs = np.log2(1.0 + (bits @ received) / noise)
    return masks, bits, rhs


def _sorted_members(decoded_set, num_users):
    return sorted(decoded_set, key=lambda s: s.flat(num_users))


@export
def partial_mac_constraints(i, decoded_set, p, ch):
    u = ch.num_users
    if not set(own_sub_users(i, u)) <= set(decoded_set):
        raise ValueError(f"decoded set at receiver {i + 1} must contain its own sub-users")
    members = _sorted_members(decoded_set, u)
    masks, bits, rhs = _subset_arrays(i, members, p, ch)
    constraints = tuple(
        RateConstraint(i, int(mask), float(value))
        for mask, value in zip(masks, rhs)
        )
    return PartialMacPolytope(i, frozenset(decoded_set), constraints)


@export
def receiver_membership(i, r, p, ch, tol=1e-9):
    """
    Returns (member, witness): whether the rate tuple r is
    achievable at receiver i with powers p, and the first
    decoded set (in enumeration order) that shows it.
    witness is None when member is False.
    """
    u = ch.num_users
    r = _matrix(r)
    for decoded_set in enumerate_decoded_sets(i, u):
        members = _sorted_members(decoded_set, u)
        masks, bits, rhs = _subset_arrays(i, members, p, ch)
        rates = np.array([r[s.user, s.component] for s in members])
        if np.all(bits @ rates <= rhs + tol):
            return True, decoded_set
    return False, None


@export
def ic_membership(r, p, ch, tol=1e-9):
    return all(receiver_membership(i, r, p, ch, tol)[0] for i in range(ch.num_users))


#
# per-receiver (decoded set, order) alternatives,
# which define configuration ids
#

@functools.lru_cache(maxsize=None)
def _alternative_offsets(i, num_users):
    offsets = {}
    offset = 0
    for mask in _decoded_set_masks(i, num_users):
        offsets[mask] = offset
        offset += math.factorial(bin(mask).count("1"))
    return offsets, offset


@export
def alternative_count(num_users):
    "Number of (decoded set, order) choices per receiver: sum over A of |A|!."
    check_num_users(num_users, ENUMERATION_LIMIT, "configuration enumeration")
    return _alternative_offsets(0, num_users)[1]


@export
def receiver_alternatives(i, num_users):
    """
    Yields every SIC order receiver i may use, decoded
    sets in enumeration order and, within a set, orders in
    lexicographic permutation order of the sorted members.
    """
    for decoded_set in enumerate_decoded_sets(i, num_users):
        yield from itertools.permutations(_sorted_members(decoded_set, num_users))


def _permutation_rank(order, members):
    # Lehmer code of `order` relative to sorted `members`
    remaining = list(members)
    rank = 0
    for position, s in enumerate(order):
        index = remaining.index(s)
        rank += index * math.factorial(len(remaining) - 1)
        del remaining[index]
    return rank


@export
def receiver_alternative_index(i, order, num_users):
    check_num_users(num_users, ENUMERATION_LIMIT, "configuration enumeration")
    offsets, _ = _alternative_offsets(i, num_users)
    mask = subset_mask(order, num_users)
    if mask not in offsets:
        raise ValueError(f"order {order} is not a valid decoding order for receiver {i + 1}")
    members = _sorted_members(order, num_users)
    return offsets[mask] + _permutation_rank(order, members)


@export
def config_from_id(config_id, num_users):
    n = alternative_count(num_users)
    indices = []
    for i in reversed(range(num_users)):
        config_id, index = divmod(config_id, n)
        indices.append(index)
    indices.reverse()
    orders = []
    for i, index in enumerate(indices):
        orders.append(next(itertools.islice(receiver_alternatives(i, num_users), index, None)))
    return DecodingConfig(tuple(orders))


#
# two-user boundary scan
#

@export
@dataclass(frozen=True, eq=False)
class BoundarySample:
    """
    Upper-right convex hull of the achievable (R1, R2)
    pairs, sorted by R1.  powers[n] is the flat sub-user
    power vector (p11, p12, p21, p22) that achieves
    points[n] with configuration config_ids[n].
    """
    points: np.ndarray
    config_ids: np.ndarray
    powers: np.ndarray

    fieldnames = ('r1_bits', 'r2_bits', 'config_id', 'p11', 'p12', 'p21', 'p22')

    def __len__(self):
        return len(self.points)

    def rows(self):
        for (r1, r2), config_id, p in zip(self.points, self.config_ids, self.powers):
            yield dict(zip(self.fieldnames, (float(r1), float(r2), int(config_id), *map(float, p))))


def _alternative_tables(i, ch):
    "For every alternative at receiver i: (interference weights (S, S), signal gains (S,), decoded (S,))."
    u = ch.num_users
    s_count = u * u
    gain_by_flat = np.array([ch.gain[i, s.user] for s in all_sub_users(u)])
    weights = []
    decoded = []
    for order in receiver_alternatives(i, u):
        w = np.zeros((s_count, s_count))
        d = np.zeros(s_count, dtype=bool)
        for position, s in enumerate(order):
            n = s.flat(u)
            d[n] = True
            for t in DecodingConfig.interferers_of(order, position, u):
                w[n, t.flat(u)] = gain_by_flat[t.flat(u)]
        weights.append(w)
        decoded.append(d)
    return np.array(weights), gain_by_flat, np.array(decoded)


def _alternative_caps(i, ch, tables, powers):
    "Caps (alternatives, splits, S) at receiver i; +inf where a sub-user is not decoded."
    weights, gain_by_flat, decoded = tables
    signal = powers * gain_by_flat
    # noise[a, n, s] = sigma_i + sum_t w[a, s, t] * powers[n, t]
    noise = ch.noise[i] + np.einsum('ast,nt->ans', weights, powers)
    with np.errstate(divide='ignore', invalid='ignore'):
        caps = np.log2(1.0 + signal[None, :, :] / noise)
    caps = np.where(signal[None, :, :] > 0, caps, 0.0)
    return np.where(decoded[:, None, :], caps, np.inf)


def _pareto(points, keys):
    """
    Indices of the non-dominated points, largest R1 first.
    Ties keep the earliest entry of `keys` order.
    """
    order = np.lexsort(tuple(reversed(keys)) + (-points[:, 1], -points[:, 0]))
    r2 = points[order, 1]
    running = np.maximum.accumulate(r2)
    keep = np.ones(len(order), dtype=bool)
    keep[1:] = r2[1:] > running[:-1]
    return order[keep]


def _upper_hull(points):
    "Monotone-chain upper hull of points already sorted by R1 ascending; returns indices."
    hull = []
    for n, p in enumerate(points):
        while len(hull) > 1:
            v0 = points[hull[-2]]
            v1 = points[hull[-1]]
            if ((v1[0] - v0[0]) * (p[1] - v0[1])
                - (p[0] - v0[0]) * (v1[1] - v0[1])) >= 0.0:
                hull.pop()
            else:
                break
        hull.append(n)
    return hull


def power_splits(total_power, grid_n, parts):
    steps = grid_n - 1
    return np.array(list(compositions(steps, parts)), dtype=float) * (total_power / steps)


@export
def boundary_scan_2user(ch, total_power, grid_n=64, *, chunk=512):
    if ch.num_users != 2:
        raise ValueError(f"boundary_scan_2user needs a 2-user channel, not U={ch.num_users}")
    if not total_power >= 0:
        raise ValueError(f"total_power must be >= 0, not {total_power}")
    if grid_n < 2:
        raise ValueError(f"grid_n must be >= 2, not {grid_n}")

    splits = power_splits(total_power, grid_n, 4)
    tables = [_alternative_tables(i, ch) for i in range(2)]
    n_alternatives = len(tables[0][0])
    pair_ids = np.arange(n_alternatives * n_alternatives).reshape(n_alternatives, n_alternatives)

    best_points = np.empty((0, 2))
    best_ids = np.empty(0, dtype=np.int64)
    best_splits = np.empty(0, dtype=np.int64)

    for start in range(0, len(splits), chunk):
        powers = splits[start:start + chunk]
        caps0 = _alternative_caps(0, ch, tables[0], powers)
        caps1 = _alternative_caps(1, ch, tables[1], powers)
        # rates[a, b, n, s]: sub-user s runs at the smaller cap of the two receivers
        rates = np.minimum(caps0[:, None], caps1[None, :])
        users = rates.reshape(rates.shape[:3] + (2, 2)).sum(axis=4)
        points = users.reshape(-1, 2)
        ids = np.broadcast_to(pair_ids[:, :, None], users.shape[:3]).reshape(-1)
        split_index = np.broadcast_to(np.arange(start, start + len(powers)), users.shape[:3]).reshape(-1)

        points = np.concatenate([best_points, points])
        ids = np.concatenate([best_ids, ids])
        split_index = np.concatenate([best_splits, split_index])
        keep = _pareto(points, (ids, split_index))
        best_points, best_ids, best_splits = points[keep], ids[keep], split_index[keep]

    # _pareto returns largest R1 first; the hull wants ascending R1
    best_points, best_ids, best_splits = best_points[::-1], best_ids[::-1], best_splits[::-1]
    hull = _upper_hull(best_points)
    return BoundarySample(
        best_points[hull].copy(),
        best_ids[hull].copy(),
        splits[best_splits[hull]],
        )
