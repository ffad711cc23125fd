#!/usr/bin/env python3
#
# Part of the "partialmac" Python library

"""
Entropy powers, rearrangements and the sum-rate outer
bounds built on them.  Everything here is in nats.

H holds amplitude gains: H[j][i] = h_ji from transmitter
i to receiver j.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg

from .utility import *


__all__ = []

def export(fn):
    __all__.append(fn.__name__)
    return fn


TWO_PI_E = 2 * math.pi * math.e


@export
def gaussian_entropy(variance):
    if not variance > 0:
        raise ValueError(f"variance must be positive, not {variance}")
    return 0.5 * math.log(TWO_PI_E * variance)


@export
def entropy_power(h, n=1):
    if n < 1:
        raise ValueError(f"dimension must be >= 1, not {n}")
    return math.exp(2.0 * h / n) / TWO_PI_E


@export
def epi_gap(nx, ny, nsum):
    "N(X+Y) - (N(X) + N(Y)); never negative for independent X and Y."
    return nsum - (nx + ny)


@export
@dataclass(frozen=True, eq=False)
class DiscreteDensity1D:
    """
    A density sampled on len(values) cells of width step,
    centered on zero.  Cell n sits at (n - (len - 1) / 2) * step.
    """
    step: float
    values: np.ndarray

    def __post_init__(self):
        step = float(self.step)
        if not (math.isfinite(step) and step > 0):
            raise ValueError(f"step must be positive, not {step}")
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or not len(values):
            raise ValueError("values must be a nonempty vector")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("density values must be finite and >= 0")
        mass = values.sum() * step
        if abs(mass - 1.0) > 1e-9:
            raise ValueError(f"density must integrate to 1, not {mass!r}")
        values.setflags(write=False)
        object.__setattr__(self, 'step', step)
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return len(self.values)

    def mass(self):
        return float(self.values.sum() * self.step)

    def positions(self):
        n = len(self.values)
        return (np.arange(n) - (n - 1) / 2) * self.step

    @classmethod
    def from_function(cls, fn, half_width, cells):
        """
        Samples fn at the centers of `cells` equal cells
        covering [-half_width, half_width], then normalizes.
        fn must accept a numpy array.
        """
        if cells < 1:
            raise ValueError(f"cells must be >= 1, not {cells}")
        if not half_width > 0:
            raise ValueError(f"half_width must be positive, not {half_width}")
        step = 2.0 * half_width / cells
        x = -half_width + (np.arange(cells) + 0.5) * step
        values = np.clip(np.asarray(fn(x), dtype=float), 0.0, None)
        mass = values.sum() * step
        if not mass > 0:
            raise ValueError("function has no mass on the grid")
        return cls(step, values / mass)


@export
@dataclass(frozen=True, eq=False)
class CovarianceFactor:
    """
    Sigma = A diag(P) A^T, with A lower-triangular and P
    the powers of the independent components.
    """
    A: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        a = np.array(self.A, dtype=float)
        p = np.array(self.P, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"A must be square, not shape {a.shape}")
        if p.shape != (a.shape[0],):
            raise ValueError(f"P must have shape {(a.shape[0],)}, not {p.shape}")
        if not np.allclose(a, np.tril(a), rtol=0, atol=0):
            raise ValueError("A must be lower-triangular")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("P must be finite and >= 0")
        a.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, 'A', a)
        object.__setattr__(self, 'P', p)

    @property
    def sigma(self):
        return (self.A * self.P) @ self.A.T


@export
@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """
    Per-receiver noise variance N_j and the entropy power
    N*_j of its rearranged density.  Gaussian noise has
    N*_j = N_j.
    """
    variance: np.ndarray
    entropy_power: np.ndarray

    def __post_init__(self):
        variance = np.array(self.variance, dtype=float)
        power = np.array(self.entropy_power, dtype=float)
        if variance.ndim != 1 or variance.shape != power.shape:
            raise ValueError("variance and entropy_power must be vectors of the same length")
        for name, a in (('variance', variance), ('entropy_power', power)):
            if not np.all(np.isfinite(a)) or np.any(a <= 0):
                raise ValueError(f"noise {name} must be finite and positive")
            a.setflags(write=False)
        object.__setattr__(self, 'variance', variance)
        object.__setattr__(self, 'entropy_power', power)

    @classmethod
    def gaussian(cls, variances):
        return cls(variances, variances)


def _center_out(n):
    "Cell indices from the center outward: center, right, left, right, ..."
    c = (n - 1) // 2
    order = [c]
    for k in range(1, n):
        if c + k < n:
            order.append(c + k)
        if c - k >= 0:
            order.append(c - k)
    return np.array(order[:n])


@export
def rearrange_decreasing_1d(d):
    values = np.empty(len(d))
    values[_center_out(len(d))] = np.sort(d.values)[::-1]
    return DiscreteDensity1D(d.step, values)


@export
def discrete_entropy(d):
    f = d.values[d.values > 0]
    return float(-(f * np.log(f)).sum() * d.step)


@export
def noise_entropy_power(d):
    "N* for noise with density d: the entropy power of its rearrangement."
    return entropy_power(discrete_entropy(rearrange_decreasing_1d(d)), 1)


def _sum_density(dx, dy):
    if not math.isclose(dx.step, dy.step, rel_tol=1e-12):
        raise ValueError(f"densities need a common step, got {dx.step} and {dy.step}")
    values = np.convolve(dx.values, dy.values) * dx.step
    return DiscreteDensity1D(dx.step, values / (values.sum() * dx.step))


@export
def refined_epi_gap(dx, dy):
    """
    h(X + Y) - h(X* + Y*) for independent X and Y, where
    X* and Y* have the rearranged densities.  Never negative
    up to quadrature error.
    """
    actual = discrete_entropy(_sum_density(dx, dy))
    rearranged = discrete_entropy(_sum_density(rearrange_decreasing_1d(dx), rearrange_decreasing_1d(dy)))
    return actual - rearranged


def _leading_minor_failure(sigma):
    for k in range(1, len(sigma) + 1):
        if not np.linalg.det(sigma[:k, :k]) > 0:
            return k
    return len(sigma)


@export
def factor_covariance(sigma):
    """
    Cholesky factor of a positive definite covariance, as
    a CovarianceFactor with unit component powers.

    Raises DecompositionError naming the 1-based index of
    the first leading principal minor that is not positive.
    """
    sigma = np.array(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or not len(sigma):
        raise ValueError(f"covariance must be a nonempty square matrix, not shape {sigma.shape}")
    if not np.all(np.isfinite(sigma)):
        raise ValueError("covariance must be finite")
    if not np.allclose(sigma, sigma.T, rtol=1e-12, atol=1e-14):
        raise ValueError("covariance must be symmetric")
    try:
        a = scipy.linalg.cholesky(sigma, lower=True)
    except np.linalg.LinAlgError:
        pivot = _leading_minor_failure(sigma)
        raise DecompositionError(
            f"covariance is not positive definite (pivot {pivot})",
            pivot=pivot) from None
    return CovarianceFactor(a, np.ones(len(sigma)))


def _log_det(sigma):
    a = factor_covariance(sigma).A
    return 2.0 * float(np.log(np.diag(a)).sum())


@export
def sum_rate_bound_correlated(H, A, P, noise, *, noise_model="gaussian"):
    """
    Sum over receivers j of the mutual-information bound
    for inputs X = A U, with independent components U_k of
    power P_k.  With c = H A:

        signal_j       = sum_k c_jk^2 P_k
        interference_j = sum_{i != j} sum_k h_ji^2 A_ik^2 P_k

    noise_model="gaussian":   1/2 ln(1 + signal / (interference + N_j))
    noise_model="rearranged": 1/2 ln((signal + N*_j) / (interference + N_j))
    """
    H = np.asarray(H, dtype=float)
    A = np.asarray(A, dtype=float)
    P = np.asarray(P, dtype=float)
    k = len(P)
    if H.shape != (k, k) or A.shape != (k, k):
        raise ValueError(f"H and A must have shape {(k, k)}")
    if np.any(P < 0):
        raise ValueError("P must be >= 0")
    if noise.variance.shape != (k,):
        raise ValueError(f"noise must describe {k} receivers")

    c = H @ A
    signal = (c ** 2) @ P
    # (h_ji^2) (A_ik^2 P_k) summed over k, then over i != j
    spread = (H ** 2) * ((A ** 2) @ P)[None, :]
    interference = spread.sum(axis=1) - np.diag(spread)
    denominator = interference + noise.variance

    if noise_model == "gaussian":
        terms = 0.5 * np.log1p(signal / denominator)
    elif noise_model == "rearranged":
        terms = 0.5 * np.log((signal + noise.entropy_power) / denominator)
    else:
        raise ValueError(f"unknown noise_model {noise_model!r}")
    return float(terms.sum())


@export
def joint_sum_rate_bound(h_diag, P, Ncov):
    """
    1/2 ln det(I + Ncov^-1 s I) with s = sum_j h_jj^2 P_j,
    evaluated as 1/2 (ln det(Ncov + s I) - ln det(Ncov)).
    """
    h_diag = np.asarray(h_diag, dtype=float)
    P = np.asarray(P, dtype=float)
    Ncov = np.asarray(Ncov, dtype=float)
    if h_diag.shape != P.shape:
        raise ValueError("h_diag and P must have the same shape")
    if np.any(P < 0):
        raise ValueError("P must be >= 0")
    s = float((h_diag ** 2) @ P)
    return 0.5 * (_log_det(Ncov + s * np.eye(len(Ncov))) - _log_det(Ncov))


@export
def mmse_identity_check(snr, P, h=1e-6):
    """
    Returns (analytic, finite_difference) for
    d/dsnr 1/2 ln(1 + snr P) = mmse / 2 with a Gaussian
    input of power P, mmse = P / (1 + snr P).
    """
    if not (snr > 0 and P > 0):
        raise ValueError("snr and P must be positive")
    analytic = 0.5 * P / (1.0 + snr * P)
    step = min(h, snr / 2)
    finite_difference = (math.log1p((snr + step) * P) - math.log1p((snr - step) * P)) / (4.0 * step)
    return analytic, finite_difference
