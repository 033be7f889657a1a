"""Classical (Maxwell-Boltzmann) side of the zero-magnetization statement.

For velocity-independent potentials the canonical partition function loses
the magnetic field after the substitution p -> p + (e/c) A(x) (unit
Jacobian), so the free energy density carries no B argument at all and the
magnetization vanishes identically.  This module makes that structural fact
executable: the free energy API has no field parameter, and a Monte-Carlo
sampler of the full phase-space measure confirms statistically that the
thermal average magnetic moment is zero at any B.

Conventions: m = 1, charge e > 0 with coupling (p + (e/c) A)^2 / 2,
A(x) = (B/2)(-x_2, x_1, 0), thermal wavelength lambda_beta =
hbar_planck sqrt(2 pi beta).  Interactions are out of scope (U_int = 0),
so the configuration integral factorizes over particles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potentials import CellQuadrature, PeriodicPotential, boltzmann_cell_integral

_GH_ORDER = 96


@dataclass(frozen=True)
class ClassicalGasSpec:
    """N classical particles in a cubic box (side L) at inverse temperature beta."""

    N: int
    box_side: float
    beta: float
    b_field: float = 0.0             # B along e_3
    hbar_planck: float = 1.0         # only enters via lambda_beta
    external_potential: PeriodicPotential | None = None
    charge: float = 1.0
    light_speed: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("need at least one particle")
        if self.box_side <= 0.0 or self.beta <= 0.0:
            raise ValueError("box side and beta must be positive")

    @property
    def volume(self) -> float:
        return self.box_side ** 3

    @property
    def thermal_wavelength(self) -> float:
        return self.hbar_planck * math.sqrt(2.0 * math.pi * self.beta)

    def vector_potential(self, x: np.ndarray) -> np.ndarray:
        a = np.zeros_like(x)
        a[..., 0] = -0.5 * self.b_field * x[..., 1]
        a[..., 1] = 0.5 * self.b_field * x[..., 0]
        return a


def _log_single_particle_integral(spec: ClassicalGasSpec,
                                  quad: CellQuadrature | None = None) -> float:
    """ln int_Lambda e^{-beta U_el}; uses the unit-cell reduction for integer L."""
    V = spec.external_potential
    if V is None or V.name == "zero":
        return 3.0 * math.log(spec.box_side)
    L = spec.box_side
    if abs(L - round(L)) < 1e-12:
        cell = boltzmann_cell_integral(V, spec.beta, quad)
        return 3.0 * math.log(L) + math.log(cell)
    # non-integer box: tensor quadrature over the box itself
    order = 64
    t, w = np.polynomial.legendre.leggauss(order)
    x1 = 0.5 * L * t
    w1 = 0.5 * L * w
    X = np.stack(np.meshgrid(x1, x1, x1, indexing="ij"), axis=-1).reshape(-1, 3)
    W = (w1[:, None, None] * w1[None, :, None] * w1[None, None, :]).reshape(-1)
    return math.log(float(np.exp(-spec.beta * V.eval(X)) @ W))


def _sample_positions(spec: ClassicalGasSpec, count: int, rng) -> np.ndarray:
    """Positions distributed as e^{-beta U_el} on the box, by rejection."""
    V = spec.external_potential
    L = spec.box_side
    if V is None or V.name == "zero":
        return rng.uniform(-L / 2, L / 2, size=(count, 3))
    out = np.empty((count, 3))
    filled = 0
    while filled < count:
        n_try = max(1024, 2 * (count - filled))
        x = rng.uniform(-L / 2, L / 2, size=(n_try, 3))
        # envelope e^{beta ||V||_inf} >= e^{-beta V} everywhere
        accept = rng.uniform(0.0, 1.0, size=n_try) \
            <= np.exp(-spec.beta * (V.eval(x) + V.sup_norm))
        got = x[accept][: count - filled]
        out[filled:filled + got.shape[0]] = got
        filled += got.shape[0]
    return out


def configuration_integral(spec: ClassicalGasSpec, method: str = "quadrature",
                           samples: int = 20000, rng_seed: int = 0,
                           quad: CellQuadrature | None = None):
    """ln Z_conf = -ln N! + N ln int_Lambda e^{-beta U_el}.

    method 'quadrature' integrates the one-particle factor deterministically;
    'mc' estimates it by uniform sampling and returns (value, standard_error)
    on the log scale.  The factorization over particles is exact because
    U_int = 0 in scope.
    """
    log_nfact = math.lgamma(spec.N + 1)
    if method == "quadrature":
        return spec.N * _log_single_particle_integral(spec, quad) - log_nfact, 0.0
    if method != "mc":
        raise ValueError("method must be 'quadrature' or 'mc'")
    rng = np.random.Generator(np.random.Philox(key=rng_seed))
    V = spec.external_potential
    x = rng.uniform(-spec.box_side / 2, spec.box_side / 2, size=(samples, 3))
    vals = np.exp(-spec.beta * (V.eval(x) if V is not None else 0.0))
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(samples))
    log_one = math.log(spec.volume * mean)
    log_se = se / mean  # delta method on the log
    return spec.N * log_one - log_nfact, spec.N * log_se


def classical_free_energy_density(spec: ClassicalGasSpec,
                                  quad: CellQuadrature | None = None) -> float:
    """F = -(beta L^3)^{-1} ln(lambda_beta^{-3N} Z_conf).

    Note the signature: there is no magnetic-field argument.  dF/dB = 0 is
    not a numerical statement but a structural one.
    """
    log_zconf, _ = configuration_integral(spec, "quadrature", quad=quad)
    log_total = -3.0 * spec.N * math.log(spec.thermal_wavelength) + log_zconf
    return -log_total / (spec.beta * spec.volume)


def magnetization_analytic(spec: ClassicalGasSpec) -> float:
    """Momenta integrated out in closed form: the odd Gaussian moment is 0."""
    return 0.0


def magnetization_mc(spec: ClassicalGasSpec, samples: int, rng_seed: int):
    """Monte-Carlo thermal average of sum_j mu_{j,3} / L^3 and its standard error.

    Phase space is sampled from the true canonical measure: positions from
    e^{-beta U_el}, canonical momenta from the Gaussian centred at
    -(e/c) A(x).  The moment mu_3 = (e/2c)(x_2 v_1 - x_1 v_2) with
    v = p + (e/c) A(x).  Uses the counter-based Philox generator so runs are
    reproducible for a given seed.
    """
    if spec.b_field == 0.0:
        raise ValueError("magnetization sampling needs B != 0")
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    rng = np.random.Generator(np.random.Philox(key=rng_seed))
    ec = spec.charge / spec.light_speed
    sigma = math.sqrt(1.0 / spec.beta)
    totals = np.zeros(samples)
    for j in range(spec.N):
        x = _sample_positions(spec, samples, rng)
        a = spec.vector_potential(x)
        p = rng.normal(size=(samples, 3)) * sigma - ec * a
        v = p + ec * a
        mu3 = 0.5 * ec * (x[:, 1] * v[:, 0] - x[:, 0] * v[:, 1])
        totals += mu3
    totals /= spec.volume
    mean = float(totals.mean())
    se = float(totals.std(ddof=1) / math.sqrt(samples))
    return mean, se


def gauge_shift_invariance_check(spec: ClassicalGasSpec, n_positions: int = 100,
                                 rng_seed: int = 0, order: int = _GH_ORDER) -> float:
    """Max relative gap between shifted and unshifted momentum Gaussians.

    At sampled positions x, integrates e^{-beta (p + (e/c) A(x))^2 / 2} and
    e^{-beta p^2/2} over each momentum component with the same fixed
    Gauss-Legendre rule; translation invariance of the Lebesgue integral
    makes the two agree to rounding.
    """
    rng = np.random.Generator(np.random.Philox(key=rng_seed))
    L = spec.box_side
    x = rng.uniform(-L / 2, L / 2, size=(n_positions, 3))
    shifts = (spec.charge / spec.light_speed) * spec.vector_potential(x)
    shift_max = float(np.abs(shifts).max())
    span = shift_max + math.sqrt(2.0 * 45.0 / spec.beta)
    t, w = np.polynomial.legendre.leggauss(order)
    p = span * t
    wp = span * w
    base = float(np.exp(-0.5 * spec.beta * p ** 2) @ wp)
    worst = 0.0
    for a in np.unique(np.round(shifts.ravel(), 15)):
        val = float(np.exp(-0.5 * spec.beta * (p + a) ** 2) @ wp)
        worst = max(worst, abs(val - base) / base)
    return worst
