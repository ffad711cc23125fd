#!/usr/bin/env python3
#
# Part of the "partialmac" Python library

"""
Channel and allocation types, plus the SINR rate
arithmetic everything else is built on.

Rates are bits per channel use (log base 2).  Indices
are 0-based: SubUserId(0, 0) is the first component
of the first user.
"""

from dataclasses import dataclass
import math
from typing import Optional

import numpy as np

from .utility import *


__all__ = []

def export(fn):
    __all__.append(fn.__name__)
    return fn


def _frozen(a, name, shape=None):
    a = np.array(a, dtype=float)
    if shape is not None and a.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, not {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    a.setflags(write=False)
    return a


def _matrix(x):
    # accepts PowerAllocation, RateAllocation, or anything array-like
    if isinstance(x, PowerAllocation):
        return x.p
    if isinstance(x, RateAllocation):
        return x.r
    return np.asarray(x, dtype=float)


@export
@dataclass(frozen=True, order=True)
class SubUserId:
    user: int
    component: int

    def __str__(self):
        return f"({self.user + 1},{self.component + 1})"

    def flat(self, num_users):
        return self.user * num_users + self.component

    @classmethod
    def from_flat(cls, index, num_users):
        user, component = divmod(index, num_users)
        return cls(user, component)

    def validate(self, num_users):
        if not ((0 <= self.user < num_users) and (0 <= self.component < num_users)):
            raise ValueError(f"sub-user {self} out of range for U={num_users}")


@export
def own_sub_users(i, num_users):
    return tuple(SubUserId(i, j) for j in range(num_users))


@export
def all_sub_users(num_users):
    return tuple(SubUserId.from_flat(n, num_users) for n in range(num_users * num_users))


@export
@dataclass(frozen=True, eq=False)
class Channel:
    """
    Power gains gain[i][k] = |h_ik|^2 from transmitter k
    to receiver i, and per-receiver noise variances.
    """
    gain: np.ndarray
    noise: np.ndarray

    def __post_init__(self):
        gain = np.array(self.gain, dtype=float)
        if gain.ndim != 2 or gain.shape[0] != gain.shape[1] or gain.shape[0] < 1:
            raise ValueError(f"gain must be a nonempty square matrix, not shape {gain.shape}")
        u = gain.shape[0]
        gain = _frozen(gain, "gain")
        if np.any(gain < 0):
            raise ValueError("gain entries must be >= 0")
        noise = _frozen(self.noise, "noise", (u,))
        if np.any(noise <= 0):
            raise ValueError("noise variances must be > 0")
        object.__setattr__(self, 'gain', gain)
        object.__setattr__(self, 'noise', noise)

    @property
    def num_users(self):
        return self.gain.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Channel):
            return NotImplemented
        return np.array_equal(self.gain, other.gain) and np.array_equal(self.noise, other.noise)

    def scaled_noise(self, factor):
        return Channel(self.gain, self.noise * factor)


class _Allocation:
    __slots__ = ()

    @property
    def num_users(self):
        return self.matrix.shape[0]

    def __getitem__(self, s):
        return float(self.matrix[s.user, s.component])

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def flat(self):
        return self.matrix.ravel()

    def total(self):
        return float(self.matrix.sum())

    @classmethod
    def zeros(cls, num_users):
        return cls(np.zeros((num_users, num_users)))

    @classmethod
    def from_flat(cls, values, num_users):
        return cls(np.asarray(values, dtype=float).reshape(num_users, num_users))

    @staticmethod
    def _check(a, name):
        a = np.array(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"{name} must be a square matrix, not shape {a.shape}")
        a = _frozen(a, name)
        if np.any(a < 0):
            raise ValueError(f"{name} entries must be >= 0")
        return a


@export
@dataclass(frozen=True, eq=False)
class PowerAllocation(_Allocation):
    "p[k][j]: power of component j of user k."
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'p', self._check(self.p, "p"))

    @property
    def matrix(self):
        return self.p


@export
@dataclass(frozen=True, eq=False)
class RateAllocation(_Allocation):
    "r[k][j]: rate of component j of user k, bits per use."
    r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'r', self._check(self.r, "r"))

    @property
    def matrix(self):
        return self.r


@export
@dataclass(frozen=True)
class DecodingConfig:
    """
    orders[i] is receiver i's SIC order; the decoded set
    A_i is the set of sub-users in that order.  Every
    sub-user not in A_i is treated as noise at receiver i.
    """
    orders: tuple

    def __post_init__(self):
        orders = tuple(tuple(order) for order in self.orders)
        object.__setattr__(self, 'orders', orders)

    def __str__(self):
        receivers = []
        for i, order in enumerate(self.orders):
            receivers.append(f"rx{i + 1}:" + "".join(str(s) for s in order))
        return " ".join(receivers)

    @property
    def num_users(self):
        return len(self.orders)

    def decoded_set(self, i):
        return frozenset(self.orders[i])

    def validate(self, num_users=None):
        if num_users is None:
            num_users = self.num_users
        if len(self.orders) != num_users:
            raise ValueError(f"config has {len(self.orders)} receivers, channel has {num_users}")
        for i, order in enumerate(self.orders):
            for s in order:
                s.validate(num_users)
            if len(set(order)) != len(order):
                raise ValueError(f"receiver {i + 1} decodes a sub-user twice")
            missing = set(own_sub_users(i, num_users)) - set(order)
            if missing:
                raise ValueError(f"receiver {i + 1} must decode its own sub-users, missing {sorted(missing)}")
        return self

    def interferers(self, i, position):
        """
        The sub-users treated as noise when receiver i decodes
        the sub-user at `position` of its order: everything
        decoded later, plus everything it never decodes.
        """
        return self.interferers_of(self.orders[i], position, self.num_users)

    @staticmethod
    def interferers_of(order, position, num_users):
        decoded = set(order)
        later = set(order[position + 1:])
        return frozenset(s for s in all_sub_users(num_users) if (s in later) or (s not in decoded))

    @staticmethod
    def strongest_first(i, members, ch):
        gain = ch.gain
        u = ch.num_users
        return tuple(sorted(members, key=lambda s: (-gain[i, s.user], s.flat(u))))

    @classmethod
    def own_only(cls, ch):
        u = ch.num_users
        return cls(tuple(cls.strongest_first(i, own_sub_users(i, u), ch) for i in range(u)))

    @classmethod
    def full(cls, ch):
        u = ch.num_users
        return cls(tuple(cls.strongest_first(i, all_sub_users(u), ch) for i in range(u)))

    def config_id(self):
        """
        Lexicographic rank among all configurations; see
        region.receiver_alternative_index.

        Past the enumeration limit there is no rank; the id
        then spells out each order, flat index + 1 per digit
        in base U^2 + 1, receivers separated by a zero digit.
        Still unique, just not dense.
        """
        from .region import receiver_alternative_index, alternative_count, ENUMERATION_LIMIT
        u = self.num_users
        if u > ENUMERATION_LIMIT:
            base = u * u + 1
            value = 0
            for order in self.orders:
                for s in order:
                    value = value * base + s.flat(u) + 1
                value *= base
            return value
        n = alternative_count(u)
        value = 0
        for i, order in enumerate(self.orders):
            value = value * n + receiver_alternative_index(i, order, u)
        return value


@export
@dataclass(frozen=True, eq=False)
class Scenario:
    channel: Channel
    rate_min: np.ndarray
    bandwidth_hz: Optional[float] = None
    power_budget: Optional[float] = None

    def __post_init__(self):
        rate_min = _frozen(self.rate_min, "rate_min", (self.channel.num_users,))
        if np.any(rate_min < 0):
            raise ValueError("rate_min entries must be >= 0")
        object.__setattr__(self, 'rate_min', rate_min)
        for name in ('bandwidth_hz', 'power_budget'):
            value = getattr(self, name)
            if value is not None:
                value = float(value)
                if not (math.isfinite(value) and value > 0):
                    raise ValueError(f"{name} must be positive, not {value}")
                object.__setattr__(self, name, value)

    @property
    def num_users(self):
        return self.channel.num_users

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            (self.channel == other.channel)
            and np.array_equal(self.rate_min, other.rate_min)
            and (self.bandwidth_hz == other.bandwidth_hz)
            and (self.power_budget == other.power_budget)
            )

    def within_budget(self, total_power):
        return (self.power_budget is None) or (total_power <= self.power_budget * (1 + 1e-12))


@export
def effective_noise(i, interferers, p, ch):
    """
    sigma_i^2 plus the received power of every sub-user
    in `interferers` at receiver i.
    """
    p = _matrix(p)
    gain = ch.gain
    total = float(ch.noise[i])
    for s in interferers:
        total += gain[i, s.user] * p[s.user, s.component]
    return total


@export
def sub_user_rate_cap(i, s, interferers, p, ch):
    if s in interferers:
        raise ValueError(f"sub-user {s} cannot interfere with itself")
    p = _matrix(p)
    signal = ch.gain[i, s.user] * p[s.user, s.component]
    if signal == 0:
        return 0.0
    return math.log2(1.0 + signal / effective_noise(i, interferers, p, ch))


@export
def sic_caps(cfg, p, ch):
    """
    Returns a tuple with one dict per receiver, mapping
    each decoded sub-user to its rate cap at its position
    in that receiver's SIC order.
    """
    p = _matrix(p)
    result = []
    for i, order in enumerate(cfg.orders):
        caps = {}
        for position, s in enumerate(order):
            caps[s] = sub_user_rate_cap(i, s, cfg.interferers(i, position), p, ch)
        result.append(caps)
    return tuple(result)


@export
def user_rates(r):
    return _matrix(r).sum(axis=1)


@export
def sub_user_rates(cfg, p, ch):
    """
    The SIC operating point of a configuration: each
    sub-user runs at the smallest cap among the receivers
    that decode it.
    """
    u = ch.num_users
    r = np.full((u, u), np.inf)
    for caps in sic_caps(cfg, p, ch):
        for s, cap in caps.items():
            r[s.user, s.component] = min(r[s.user, s.component], cap)
    return RateAllocation(r)


@export
def decoding_order_count(num_users):
    """
    Returns (ic, mac): the number of global SIC orders
    across U receivers, (U^2)!^U, and the U! orders of
    the degenerate single-receiver MAC.
    """
    return (math.factorial(num_users * num_users) ** num_users, math.factorial(num_users))


@export
def random_scenario(lcg, num_users=2, *,
        direct=(0.5, 2.0), cross=(0.01, 0.3), noise=(0.5, 1.5), rate=(0.25, 1.5)):
    u = num_users
    gain = np.empty((u, u))
    for i in range(u):
        for k in range(u):
            lo, hi = direct if i == k else cross
            gain[i, k] = lcg.uniform(lo, hi)
    sigma = [lcg.uniform(*noise) for i in range(u)]
    rate_min = [lcg.uniform(*rate) for i in range(u)]
    return Scenario(Channel(gain, sigma), rate_min)
