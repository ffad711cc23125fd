#!/usr/bin/env python3
#
# Part of the "partialmac" Python library

"""
Power minimization over the partial-MAC rate region of
the Gaussian interference channel.

Scenarios load and save with the same interface as the
"pickle" module (load, loads, dump, dumps).  Scenario
text is either JSON or Perky.
"""

__version__ = "0.1.0"

import json
import os.path

import perky

from .utility import *
from .transform import *
from .model import *
from .region import *
from .minpic import *
from .timeshare import *
from .baseline import *
from .epi import *


__all__ = []

def export(fn):
    __all__.append(fn.__name__)
    return fn


SCENARIO_SCHEMA = {
    'num_users': Required(integer),
    'gain': Required(matrix()),
    'noise': Required(vector()),
    'rate_min_bits': Required(vector()),
    'bandwidth_hz': number,
    'power_budget': number,
    }

PERKY_SUFFIXES = ('.pky', '.perky')


def _check_length(name, values, u):
    raise_scenario_error_if_false(
        len(values) == u,
        f"{name} must have {u} entries, not {len(values)}",
        name, values)


@export
def scenario_from_document(d):
    "Validates a loaded scenario document and builds the Scenario."
    d = transform(d, SCENARIO_SCHEMA)
    u = d['num_users']
    raise_scenario_error_if_false(u >= 1, f"num_users must be >= 1, not {u}", 'num_users', u)

    gain = d['gain']
    _check_length('gain', gain, u)
    for row in gain:
        raise_scenario_error_if_false(
            len(row) == u,
            f"gain must be {u}x{u}, found a row of length {len(row)}",
            'gain', gain)
    raise_scenario_error_if_false(
        all(x >= 0 for row in gain for x in row),
        "gain entries must be >= 0",
        'gain', gain)

    noise = d['noise']
    _check_length('noise', noise, u)
    raise_scenario_error_if_false(all(x > 0 for x in noise), "noise variances must be > 0", 'noise', noise)

    rate_min = d['rate_min_bits']
    _check_length('rate_min_bits', rate_min, u)
    raise_scenario_error_if_false(all(x >= 0 for x in rate_min), "rate_min_bits entries must be >= 0", 'rate_min_bits', rate_min)

    for name in ('bandwidth_hz', 'power_budget'):
        if name in d:
            raise_scenario_error_if_false(d[name] > 0, f"{name} must be > 0", name, d[name])

    return Scenario(
        Channel(gain, noise),
        rate_min,
        bandwidth_hz=d.get('bandwidth_hz'),
        power_budget=d.get('power_budget'),
        )


@export
def document_from_scenario(sc):
    d = {
        'num_users': sc.num_users,
        'gain': sc.channel.gain.tolist(),
        'noise': sc.channel.noise.tolist(),
        'rate_min_bits': sc.rate_min.tolist(),
        }
    if sc.bandwidth_hz is not None:
        d['bandwidth_hz'] = sc.bandwidth_hz
    if sc.power_budget is not None:
        d['power_budget'] = sc.power_budget
    return d


@export
def loads(s, *, source="<string>"):
    if not isinstance(s, str):
        raise TypeError(f"s must be str, not {type(s)}")
    if s.lstrip().startswith("{"):
        try:
            d = json.loads(s)
        except json.JSONDecodeError as e:
            raise ScenarioError(f"{source}: invalid JSON: {e}") from None
    else:
        try:
            d = perky.loads(s, source=source)
        except perky.FormatError as e:
            raise ScenarioError(f"{source}: invalid Perky: {e.message}") from None
    return scenario_from_document(d)


@export
def load(filename):
    with open(filename, "rt", encoding="utf-8") as f:
        text = f.read()
    if os.path.splitext(filename)[1].lower() in PERKY_SUFFIXES:
        try:
            d = perky.loads(text, source=filename)
        except perky.FormatError as e:
            raise ScenarioError(f"{filename}: invalid Perky: {e.message}") from None
        return scenario_from_document(d)
    return loads(text, source=filename)


@export
def dumps(sc):
    "Canonical JSON: sorted keys, floats written exactly."
    return json.dumps(document_from_scenario(sc), sort_keys=True, indent=4) + "\n"


@export
def dump(filename, sc):
    text = dumps(sc)
    with open(filename, "wt", encoding="utf-8", newline="\n") as f:
        f.write(text)


# cli imports load/loads from this module, so it comes last.
from .cli import *
