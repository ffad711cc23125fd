#!/usr/bin/env python3
#
# Part of the "partialmac" Python library

import itertools
import math


__all__ = []

def export(fn):
    __all__.append(fn.__name__)
    return fn


@export
class PartialMacError(Exception):
    """
    Base class for every exception partialmac raises on purpose.

    Subclasses add context fields; str() and repr() list
    the message followed by whichever fields are set.
    """

    fields = ()

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        for name in self.fields:
            setattr(self, name, context.pop(name, None))
        if context:
            raise TypeError(f"unexpected context for {self.__class__.__name__}: {sorted(context)}")

    def __strings_for_repr__(self):
        strings = [f"{self.__class__.__name__} {self.message!r}"]
        for name in self.fields:
            value = getattr(self, name)
            if value is not None:
                strings.append(f"{name}={value!r}")
        return strings

    def __repr__(self):
        s = " ".join(self.__strings_for_repr__())
        return f"<{s}>"

    def __str__(self):
        return "\n".join(self.__strings_for_repr__())


@export
class ScenarioError(PartialMacError, ValueError):
    fields = ('key', 'value')


@export
class InfeasibleError(PartialMacError):
    fields = ('detail',)


@export
class SizeLimitError(PartialMacError, ValueError):
    fields = ('limit', 'requested')


@export
class DecompositionError(PartialMacError, ValueError):
    fields = ('pivot',)


@export
def raise_scenario_error_if_false(expr, message, key=None, value=None):
    if not expr:
        raise ScenarioError(message, key=key, value=value)


@export
def check_num_users(num_users, limit, what):
    if num_users < 1:
        raise ValueError(f"num_users must be >= 1, not {num_users}")
    if num_users > limit:
        raise SizeLimitError(
            f"{what} is limited to U <= {limit}, got U = {num_users}",
            limit=limit, requested=num_users)


LN2 = math.log(2.0)

@export
def nats_to_bits(x):
    return x / LN2

@export
def bits_to_nats(x):
    return x * LN2


@export
def compositions(total, parts):
    """
    Yields every tuple of `parts` nonnegative ints summing
    to `total`, in lexicographic order.

    compositions(2, 2) yields (0, 2), (1, 1), (2, 0).
    """
    if parts == 1:
        yield (total,)
        return
    # stars and bars: choose the bar positions
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        previous = -1
        counts = []
        for bar in bars:
            counts.append(bar - previous - 1)
            previous = bar
        counts.append(total + parts - 1 - previous - 1)
        yield tuple(counts)


@export
class Lcg:
    """
    64-bit linear-congruential generator.

    Seed-derived scenarios use this instead of numpy's
    generators, so the same seed produces the same scenario
    in any implementation that follows the recurrence

        state = (a * state + c) mod 2**64

    with Knuth's MMIX constants.  Floats come from the top
    53 bits of the state.
    """

    __slots__ = ('state',)

    a = 6364136223846793005
    c = 1442695040888963407
    mask = (1 << 64) - 1

    def __init__(self, seed=0):
        self.state = seed & self.mask

    def __repr__(self):
        return f"<Lcg state={self.state:#x}>"

    def next_u64(self):
        self.state = (self.a * self.state + self.c) & self.mask
        return self.state

    def random(self):
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo, hi):
        return lo + (hi - lo) * self.random()

    def randrange(self, n):
        return int(self.random() * n)
