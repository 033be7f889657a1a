"""Exact free-gas (V = 0) oracle built on Landau levels.

At b != 0 the bulk pressure is a sum over Landau levels n, spin branches s
and the axial momentum:

    P(beta, z, b) = (1/beta) (|b| / (2 pi hbar)) sum_{n,s} int dp/(2 pi hbar)
                    ln(1 + z exp(-beta E_{n,s}(p)))
    E_{n,s}(p) = hbar |b| (n + 1/2) + p^2/2 - s g hbar b / 4

(areal level degeneracy |b|/(2 pi hbar), m = 1).  At b = 0 the closed form
P = (2/beta) (2 pi hbar)^{-3} (2 pi/beta)^{3/2} f_{5/2}(z) applies; the two
branches must join continuously as b -> 0, which pins every prefactor.

The zero-field susceptibility is (q/c)^2 d^2P/db^2 at b = 0, evaluated by
central differences with Richardson extrapolation; the orbital/spin split
uses that the Stern-Gerlach term only shifts level energies linearly in b,
so total(g) - total(g=0) is exactly the spin part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError
from .fermi_dirac import f_nu
from .potentials import _gl_nodes_cell  # noqa: F401  (shared GL cache lives in potentials)
from .semiclassics import SusceptibilityBreakdown, ThermoParams

_TAIL_EXPONENT = 40.0


@dataclass(frozen=True)
class LandauSumSpec:
    """Truncation and finite-difference controls for the level-sum oracle."""

    level_cutoff: int | None = None   # default: smallest n with beta hbar |b| n >= 40
    k_quadrature: int = 160
    fd_step: float | None = None      # default: 0.05 * sqrt(1/beta)/hbar
    richardson_levels: int = 3

    def __post_init__(self):
        if self.level_cutoff is not None and self.level_cutoff < 1:
            raise ValueError("level cutoff must be >= 1")
        if self.fd_step is not None and self.fd_step <= 0.0:
            raise ValueError("fd step must be positive")
        if self.richardson_levels < 1:
            raise ValueError("need at least one Richardson level")

    def cutoff_for(self, beta: float, hbar: float, b: float) -> int:
        if self.level_cutoff is not None:
            return self.level_cutoff
        return max(1, int(math.ceil(_TAIL_EXPONENT / (beta * hbar * abs(b)))))

    def step_for(self, beta: float, hbar: float) -> float:
        if self.fd_step is not None:
            return self.fd_step
        return 0.05 * math.sqrt(1.0 / beta) / hbar


def _axial_nodes(beta: float, order: int):
    # p in [0, pmax] with beta pmax^2/2 = 45 covers the Fermi factor to e^-45;
    # symmetric integrand doubles the half-line value.
    pmax = math.sqrt(2.0 * 45.0 / beta)
    t, w = np.polynomial.legendre.leggauss(order)
    p = 0.5 * pmax * (t + 1.0)
    wp = pmax * w  # includes the factor 2 for the negative half-line
    return p, wp


def landau_pressure(params: ThermoParams, z: float, spec: LandauSumSpec | None = None,
                    b: float | None = None) -> float:
    """Bulk grand-canonical pressure of the free gas at fugacity z.

    b defaults to params.b; b = 0 takes the closed zero-field form, b != 0
    the truncated Landau-level sum with a certified exponential tail bound.
    """
    if z <= 0.0:
        raise ValueError("fugacity must be positive")
    spec = spec or LandauSumSpec()
    beta, hbar, g = params.beta, params.hbar, params.g
    b = params.b if b is None else b
    if b == 0.0:
        return (2.0 / beta) * (2.0 * math.pi * hbar) ** -3 \
            * (2.0 * math.pi / beta) ** 1.5 * f_nu(2.5, z)

    nmax = spec.cutoff_for(beta, hbar, b)
    p, wp = _axial_nodes(beta, spec.k_quadrature)
    levels = hbar * abs(b) * (np.arange(nmax + 1) + 0.5)
    total = 0.0
    for s in (-1.0, +1.0):
        energy = levels[:, None] + 0.5 * p[None, :] ** 2 - s * g * hbar * b / 4.0
        total += float((np.log1p(z * np.exp(-beta * energy)) @ wp).sum())
    pressure = total * abs(b) / (2.0 * math.pi * hbar) ** 2 / beta

    # ln(1+x) <= x certifies the dropped n > nmax tail.
    spacing = beta * hbar * abs(b)
    tail_levels = z * math.exp(-beta * levels[-1]) / (1.0 - math.exp(-spacing))
    tail = tail_levels * abs(b) / (2.0 * math.pi * hbar) ** 2 / beta \
        * 2.0 * math.sqrt(2.0 * math.pi / beta) * math.exp(beta * g * hbar * abs(b) / 4.0)
    if tail > 1e-13 * max(abs(pressure), 1e-300):
        raise AccuracyError("Landau level tail bound above tolerance at cutoff",
                            achieved=tail, estimate=pressure)
    return pressure


def landau_density_zero_field(params: ThermoParams, z: float) -> float:
    """beta z dP/dz at b = 0: the same f_{3/2} formula as the V = 0 bulk density."""
    return 2.0 * (2.0 * math.pi * params.hbar) ** -3 \
        * (2.0 * math.pi / params.beta) ** 1.5 * f_nu(1.5, z)


def fugacity_for_density(params: ThermoParams, rho: float,
                         tol: float = 1e-13) -> float:
    """Solve landau_density_zero_field(z) = rho by monotone bisection."""
    lo, hi = 0.0, 1.0
    while landau_density_zero_field(params, hi) < rho:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if landau_density_zero_field(params, mid) < rho:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(hi, 1e-300):
            break
    return 0.5 * (lo + hi)


def _second_derivative_richardson(pressure_of_b, h: float, levels: int):
    """d^2P/db^2 at 0 for an even P, by Richardson on 2(P(h)-P(0))/h^2.

    Returns (value, diagnostics); raises AccuracyError if the extrapolation
    tail is not settling.
    """
    p0 = pressure_of_b(0.0)
    steps = [h / 2 ** j for j in range(levels)]
    d = [2.0 * (pressure_of_b(s) - p0) / s ** 2 for s in steps]
    table = [list(d)]
    for row in range(1, levels):
        prev = table[-1]
        table.append([(4 ** row * prev[j + 1] - prev[j]) / (4 ** row - 1)
                      for j in range(len(prev) - 1)])
    estimates = [table[r][-1] for r in range(levels)]
    if levels >= 3:
        last_gaps = [abs(estimates[-1] - estimates[-2]),
                     abs(estimates[-2] - estimates[-3])]
        if last_gaps[0] > last_gaps[1] * 4.0 and \
                last_gaps[0] > 1e-10 * max(1e-300, abs(estimates[-1])):
            raise AccuracyError("Richardson tail for d^2P/db^2 is not monotone",
                                achieved=last_gaps[0], estimate=estimates[-1])
    return estimates[-1], {"steps": steps, "diagonal": estimates}


def landau_susceptibility_zero_field(params: ThermoParams, z: float,
                                     spec: LandauSumSpec | None = None) -> SusceptibilityBreakdown:
    """(q/c)^2 d^2P/db^2 at b = 0, split into orbital (g = 0) and spin parts."""
    spec = spec or LandauSumSpec()
    h = spec.step_for(params.beta, params.hbar)

    def pressure_at(g_value):
        p = ThermoParams(beta=params.beta, rho=params.rho, hbar=params.hbar,
                         g=g_value, q=params.q, c=params.c)

        def of_b(b):
            return landau_pressure(p, z, spec, b=b)
        return of_b

    qc2 = params.qc ** 2
    orbital, _ = _second_derivative_richardson(pressure_at(0.0), h, spec.richardson_levels)
    total, _ = _second_derivative_richardson(pressure_at(params.g), h, spec.richardson_levels)
    orbital *= qc2
    total *= qc2
    return SusceptibilityBreakdown.from_parts(orbital, total - orbital, "oracle")


def landau_magnetization_zero_field(params: ThermoParams, z: float,
                                    spec: LandauSumSpec | None = None) -> float:
    """(q/c) dP/db at b = 0 by an odd central difference; should vanish."""
    spec = spec or LandauSumSpec()
    h = spec.step_for(params.beta, params.hbar)
    p_plus = landau_pressure(params, z, spec, b=h)
    p_minus = landau_pressure(params, z, spec, b=-h)
    return params.qc * (p_plus - p_minus) / (2.0 * h)
