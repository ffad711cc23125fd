#!/usr/bin/env python3

import itertools
import math
import pathlib
import sys

def preload_local_partialmac():
    """
    Pre-load the local "partialmac" package, to preclude
    finding an already-installed one on the path.
    """

    partialmac_dir = pathlib.Path(__file__).resolve().parent
    while True:
        partialmac_init = partialmac_dir / "partialmac" / "__init__.py"
        if partialmac_init.is_file():
            break
        if partialmac_dir.parent == partialmac_dir: # pragma: nocover
            raise RuntimeError("can't find the partialmac package above " + __file__)
        partialmac_dir = partialmac_dir.parent

    if str(partialmac_dir) not in sys.path:
        sys.path.insert(1, str(partialmac_dir))

    import partialmac
    assert partialmac.__file__.startswith(str(partialmac_dir))
    return partialmac_dir


def symmetric_scenario(cross=0.1, rate_min=(1.0, 1.0), noise=1.0, **kwargs):
    import partialmac
    gain = [[1.0, cross], [cross, 1.0]]
    return partialmac.Scenario(partialmac.Channel(gain, [noise, noise]), rate_min, **kwargs)


def mac_channel(gain=1.0, noise=1.0):
    "Both receivers see the same thing: a two-user MAC, twice."
    import partialmac
    return partialmac.Channel([[gain, gain], [gain, gain]], [noise, noise])


def seeded_scenarios(count, seed=0, num_users=2, **kwargs):
    import partialmac
    lcg = partialmac.Lcg(seed)
    return [partialmac.random_scenario(lcg, num_users, **kwargs) for i in range(count)]


def seeded_powers(lcg, num_users, lo=0.0, hi=2.0):
    import partialmac
    u = num_users
    return partialmac.PowerAllocation([[lcg.uniform(lo, hi) for j in range(u)] for k in range(u)])


#
# independent oracles: plain loops, no numpy
#

def joint_log2(i, decoded, p, ch):
    "log2(1 + received power of `decoded` / (noise + everything else)) at receiver i."
    u = ch.num_users
    noise = float(ch.noise[i])
    signal = 0.0
    for k in range(u):
        for j in range(u):
            received = float(ch.gain[i][k]) * float(p.p[k][j])
            if (k, j) in decoded:
                signal += received
            else:
                noise += received
    return math.log2(1.0 + signal / noise)


def subset_rhs(i, subset, decoded, p, ch):
    u = ch.num_users
    noise = float(ch.noise[i])
    for k in range(u):
        for j in range(u):
            if (k, j) not in decoded:
                noise += float(ch.gain[i][k]) * float(p.p[k][j])
    signal = sum(float(ch.gain[i][k]) * float(p.p[k][j]) for k, j in subset)
    return math.log2(1.0 + signal / noise)


def receiver_membership_oracle(i, r, p, ch, tol=1e-9):
    """
    Tries every decoded set at receiver i and every subset
    of it that includes one of i's own sub-users.
    """
    u = ch.num_users
    own = [(i, j) for j in range(u)]
    foreign = [(k, j) for k in range(u) for j in range(u) if k != i]
    for count in range(len(foreign) + 1):
        for extra in itertools.combinations(foreign, count):
            decoded = own + list(extra)
            ok = True
            for size in range(1, len(decoded) + 1):
                for subset in itertools.combinations(decoded, size):
                    if not any(s[0] == i for s in subset):
                        continue
                    lhs = sum(float(r.r[k][j]) for k, j in subset)
                    if lhs > subset_rhs(i, subset, set(decoded), p, ch) + tol:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return True
    return False


def ic_membership_oracle(r, p, ch, tol=1e-9):
    return all(receiver_membership_oracle(i, r, p, ch, tol) for i in range(ch.num_users))


def sic_vertex(i, order, decoded, p, ch):
    "Rate caps of the sub-users in `order`, decoded in that order at receiver i."
    u = ch.num_users
    caps = {}
    for position, s in enumerate(order):
        later = set(order[position + 1:])
        noise = float(ch.noise[i])
        for k in range(u):
            for j in range(u):
                if ((k, j) in later) or ((k, j) not in decoded):
                    noise += float(ch.gain[i][k]) * float(p.p[k][j])
        signal = float(ch.gain[i][s[0]]) * float(p.p[s[0]][s[1]])
        caps[s] = math.log2(1.0 + signal / noise)
    return caps


def sic_hull_membership_oracle(i, r, p, ch, tol=1e-9):
    """
    Receiver i's region as the union, over decoded sets, of
    the rates dominated by a time-sharing mix of SIC points:
    every order of a decoded set gives one point.  Mixes are
    found with a feasibility LP.
    """
    import numpy as np
    import scipy.optimize
    u = ch.num_users
    own = [(i, j) for j in range(u)]
    foreign = [(k, j) for k in range(u) for j in range(u) if k != i]
    for count in range(len(foreign) + 1):
        for extra in itertools.combinations(foreign, count):
            decoded = own + list(extra)
            target = [float(r.r[k][j]) - tol for k, j in decoded]
            vertices = []
            for order in itertools.permutations(decoded):
                caps = sic_vertex(i, order, set(decoded), p, ch)
                vertices.append([caps[s] for s in decoded])
            if any(all(v >= t for v, t in zip(vertex, target)) for vertex in vertices):
                return True
            result = scipy.optimize.linprog(
                np.zeros(len(vertices)),
                A_ub=-np.array(vertices).T, b_ub=-np.array(target),
                A_eq=np.ones((1, len(vertices))), b_eq=[1.0],
                bounds=(0, None), method="highs")
            if result.status == 0:
                return True
    return False


def tight_cap_powers(cfg, targets, ch):
    """
    Least powers for a configuration where every decoded
    sub-user has exactly one receiver: solves the tight-cap
    equations p = c * (noise + interference) as a linear system.
    """
    import numpy as np
    u = ch.num_users
    n = u * u
    m = np.eye(n)
    b = np.zeros(n)
    for i, order in enumerate(cfg.orders):
        for position, s in enumerate(order):
            row = s.flat(u)
            c = (2.0 ** targets[s.user][s.component] - 1.0) / ch.gain[i][s.user]
            b[row] = c * ch.noise[i]
            for t in cfg.interferers(i, position):
                m[row, t.flat(u)] -= c * ch.gain[i][t.user]
    return np.linalg.solve(m, b).reshape(u, u)
