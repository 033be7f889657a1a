"""Z^3-periodic external potentials and unit-cell quadrature.

Potentials live on the unit cell Omega = (-1/2, 1/2]^3 (measure 1) and are
extended periodically.  Every potential carries Holder metadata
(exponent theta, constant C, sup norm) so downstream modules can form the
bounds that depend on them.  Cell integrals of smooth functions of V are
computed with tensor Gauss-Legendre rules plus order doubling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import AccuracyError


def fold_to_cell(x):
    """Fold positions to the half-open cell [-1/2, 1/2); ties at +1/2 map to -1/2."""
    x = np.asarray(x, dtype=float)
    return x - np.floor(x + 0.5)


@dataclass(frozen=True)
class PeriodicPotential:
    """A Z^3-periodic potential with Holder metadata.

    evaluator acts on folded coordinates; eval() does the folding, so
    periodicity under integer shifts is exact by construction.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    theta: float
    holder_constant: float
    sup_norm: float
    name: str = "custom"
    params: tuple = ()
    cell_volume: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.theta <= 1.0):
            raise ValueError(f"Holder exponent must lie in (0,1], got {self.theta}")
        if self.holder_constant < 0.0:
            raise ValueError("Holder constant must be non-negative")

    def eval(self, x):
        """Evaluate V at one point (shape (3,)) or a batch (..., 3)."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise ValueError("position must be finite")
        if x.shape[-1] != 3:
            raise ValueError("positions must have a trailing axis of length 3")
        out = self.evaluator(fold_to_cell(x))
        return float(out) if out.ndim == 0 else out

    def __call__(self, x):
        return self.eval(x)


def zero_potential() -> PeriodicPotential:
    def _eval(x):
        return np.zeros(x.shape[:-1])

    return PeriodicPotential(_eval, theta=1.0, holder_constant=0.0, sup_norm=0.0,
                             name="zero")


def cosine_potential(amplitude: float = 0.5) -> PeriodicPotential:
    """V(x) = amplitude * cos(2 pi x_1); Lipschitz constant 2 pi |amplitude|."""
    a = float(amplitude)

    def _eval(x):
        return a * np.cos(2.0 * np.pi * x[..., 0])

    return PeriodicPotential(_eval, theta=1.0, holder_constant=2.0 * np.pi * abs(a),
                             sup_norm=abs(a), name="cosine", params=(a,))


def triple_cosine_potential(amplitude: float = 0.5) -> PeriodicPotential:
    """V(x) = amplitude * sum_i cos(2 pi x_i); |grad V| <= 2 pi |a| sqrt(3)."""
    a = float(amplitude)

    def _eval(x):
        return a * np.cos(2.0 * np.pi * x).sum(axis=-1)

    return PeriodicPotential(_eval, theta=1.0,
                             holder_constant=2.0 * np.pi * abs(a) * math.sqrt(3.0),
                             sup_norm=3.0 * abs(a), name="triple_cosine", params=(a,))


def weierstrass_potential(a: float = 0.5, b: int = 3, terms: int = 8) -> PeriodicPotential:
    """Truncated Weierstrass potential W(x) = sum_{k<=terms} a^k cos(2 pi b^k x_1).

    Holder exponent theta = log(1/a)/log(b).  The declared constant uses
    |cos u - cos v| <= 2^{1-theta} |u-v|^theta termwise, which telescopes to
    2^{1-theta} (2 pi)^theta sum_k (a b^theta)^k; for a b^theta = 1 the sum is
    just the term count.
    """
    if not (0.0 < a < 1.0) or b < 2:
        raise ValueError("need 0 < a < 1 and integer b >= 2")
    theta = min(1.0, math.log(1.0 / a) / math.log(b))
    ks = np.arange(terms + 1)
    amps = a ** ks
    freqs = (2.0 * np.pi) * (float(b) ** ks)

    def _eval(x):
        phase = np.multiply.outer(x[..., 0], freqs)
        return np.cos(phase) @ amps

    ratio = a * b ** theta
    if abs(ratio - 1.0) < 1e-12:
        geom = float(terms + 1)
    else:
        geom = (ratio ** (terms + 1) - 1.0) / (ratio - 1.0)
    const = 2.0 ** (1.0 - theta) * (2.0 * np.pi) ** theta * geom
    return PeriodicPotential(_eval, theta=theta, holder_constant=const,
                             sup_norm=float(amps.sum()), name="weierstrass",
                             params=(a, b, terms))


_BUILTINS = {
    "zero": lambda params: zero_potential(),
    "cosine": lambda params: cosine_potential(*params),
    "triple_cosine": lambda params: triple_cosine_potential(*params),
    "weierstrass": lambda params: weierstrass_potential(*params),
}


def potential_from_spec(name: str, params=()) -> PeriodicPotential:
    """Instantiate a built-in potential from a (name, parameter list) pair."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown potential {name!r}; known: {sorted(_BUILTINS)}")
    return factory(tuple(params))


@dataclass(frozen=True)
class CellQuadrature:
    """Tensor Gauss-Legendre rule over the unit cell with order doubling."""

    order: int = 32
    tolerance: float = 1e-12
    max_doublings: int = 2

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("quadrature order must be >= 2")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")


@lru_cache(maxsize=32)
def _gl_nodes_cell(order: int):
    # Gauss-Legendre on (-1/2, 1/2) per axis.
    t, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * t, 0.5 * w


def _tensor_cell_integral(values_of: Callable[[np.ndarray], np.ndarray], order: int) -> float:
    x1, w1 = _gl_nodes_cell(order)
    X = np.stack(np.meshgrid(x1, x1, x1, indexing="ij"), axis=-1).reshape(-1, 3)
    W = (w1[:, None, None] * w1[None, :, None] * w1[None, None, :]).reshape(-1)
    return float(np.real_if_close(values_of(X) @ W))


def cell_integral(potential: PeriodicPotential, transform, quad: CellQuadrature | None = None) -> float:
    """Integrate transform(V(x)) over the unit cell.

    transform maps an array of potential values to integrand values.  The
    order is doubled until the relative change drops below quad.tolerance;
    failure raises AccuracyError carrying the last estimate.
    """
    quad = quad or CellQuadrature()

    def integrand(X):
        return transform(potential.eval(X))

    est = _tensor_cell_integral(integrand, quad.order)
    order = quad.order
    for _ in range(quad.max_doublings):
        order *= 2
        refined = _tensor_cell_integral(integrand, order)
        change = abs(refined - est) / max(1.0, abs(refined))
        est = refined
        if change <= quad.tolerance:
            return est
    raise AccuracyError(
        f"cell quadrature did not converge to {quad.tolerance} by order {order}",
        achieved=change, estimate=est)


def boltzmann_cell_integral(potential: PeriodicPotential, beta: float,
                            quad: CellQuadrature | None = None) -> float:
    """int_Omega exp(-beta V(x)) dx; equals 1 exactly for V = 0."""
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    if potential.name == "zero":
        return 1.0
    return cell_integral(potential, lambda v: np.exp(-beta * v), quad)


def holder_gap_profile(potential: PeriodicPotential, theta: float,
                       sample_pairs: int, rng_seed: int):
    """Estimate sup |V(x)-V(y)|/|x-y|^theta over random pairs.

    Returns (estimated_constant, (x_worst, y_worst)).  Deterministic for a
    given seed.  Pairs are drawn at several length scales so short-distance
    behaviour (which controls the Holder constant for theta < 1) is probed.
    """
    if sample_pairs < 1:
        raise ValueError("need at least one sample pair")
    rng = np.random.default_rng(rng_seed)
    x = rng.uniform(-0.5, 0.5, size=(sample_pairs, 3))
    scales = 10.0 ** rng.uniform(-6, 0, size=(sample_pairs, 1))
    direction = rng.normal(size=(sample_pairs, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    y = x + scales * direction
    dist = np.linalg.norm(y - x, axis=1)
    gaps = np.abs(potential.eval(x) - potential.eval(y))
    ratios = gaps / dist ** theta
    k = int(np.argmax(ratios))
    return float(ratios[k]), (x[k].copy(), y[k].copy())
