#!/usr/bin/env python3
#
# Part of the "partialmac" Python library

"""
Schema-driven validation of loaded documents.

A schema maps each key to a converter.  Converters take
the raw value (a JSON number, or the string Perky gives
you) and return the converted value, raising ValueError
or TypeError if they can't.  Wrap a converter in Required
to make its key mandatory.
"""

import math

from .utility import *


__all__ = []

def export(fn):
    __all__.append(fn.__name__)
    return fn


@export
class Required:
    def __init__(self, fn):
        self.fn = fn

    def __repr__(self):
        return f"<Required {self.fn!r}>"

    def __call__(self, o):
        return self.fn(o)


@export
def transform(o, schema):
    """
    Converts every value in o through its schema entry and
    returns the new dict.  Raises ScenarioError naming the
    key on an unknown key, on missing Required keys (all of
    them are listed in the message), and on any conversion
    failure.
    """
    raise_scenario_error_if_false(
        isinstance(o, dict),
        f"document must be a mapping, not {type(o).__name__}",
        None, o)

    for name in o:
        raise_scenario_error_if_false(
            name in schema,
            f"unknown key {name!r}",
            name, o[name])

    missing = [name for name, fn in schema.items() if isinstance(fn, Required) and (name not in o)]
    if missing:
        names = ", ".join(repr(name) for name in missing)
        raise ScenarioError(f"missing required key {names}", key=missing[0])

    result = {}
    for name, value in o.items():
        try:
            result[name] = schema[name](value)
        except ScenarioError:
            raise
        except (TypeError, ValueError) as e:
            raise ScenarioError(f"{name}: {e}", key=name, value=value) from None
    return result


@export
def number(o):
    "float from a number or a string, rejecting bools and non-finite values."
    if isinstance(o, bool) or not isinstance(o, (int, float, str)):
        raise TypeError(f"expected a number, got {o!r}")
    value = float(o)
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {o!r}")
    return value


@export
def integer(o):
    if isinstance(o, bool) or not isinstance(o, (int, str)):
        raise TypeError(f"expected an integer, got {o!r}")
    return int(o)


@export
def vector(fn=number):
    def convert(o):
        if not isinstance(o, list):
            raise TypeError(f"expected a list, got {o!r}")
        return [fn(value) for value in o]
    return convert


@export
def matrix(fn=number):
    return vector(vector(fn))
