"""Leading-order semiclassical thermodynamics of the spin-1/2 Fermi gas.

Everything here is the hbar -> 0 bulk theory at zero magnetic field:

* bulk particle density      2 (2 pi hbar)^{-3} (2 pi/beta)^{3/2} <f_{3/2}(z e^{-beta V})>
* fugacity at fixed density  via the Banach fixed point u -> rho u / density(u),
  with the closed-form leading term rho |Omega| (2 pi beta)^{3/2} hbar^3 /
  (2 int_Omega e^{-beta V})
* zero-field susceptibility  orbital and spin f_{1/2} formulas and their
  potential-independent hbar^2 leading terms

<.> denotes the unit-cell average.  Units: m = 1, k_B absorbed into beta,
defaults q = c = 1 and g = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .fermi_dirac import f_nu
from .potentials import CellQuadrature, PeriodicPotential, boltzmann_cell_integral, cell_integral

_TOTAL_CONSISTENCY = 1e-14


@dataclass(frozen=True)
class ThermoParams:
    """Ensemble parameters; b = (q/c) B is the cyclotron frequency."""

    beta: float
    rho: float = 1.0
    hbar: float = 1.0
    g: float = 2.0
    q: float = 1.0
    c: float = 1.0
    b: float = 0.0
    rho_minus: float | None = None
    rho_plus: float | None = None

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")
        if self.rho <= 0.0:
            raise ValueError("rho must be positive")
        if not (0.0 < self.hbar <= 1.0):
            raise ValueError("hbar must lie in (0, 1]")
        if self.g > 2.0:
            raise ValueError("Lande factor must satisfy g <= 2")
        if self.q == 0.0:
            raise ValueError("charge must be non-zero")
        if self.c <= 0.0:
            raise ValueError("speed of light must be positive")
        if (self.rho_minus is None) != (self.rho_plus is None):
            raise ValueError("specify both per-spin densities or neither")
        if self.rho_minus is None:
            object.__setattr__(self, "rho_minus", 0.5 * self.rho)
            object.__setattr__(self, "rho_plus", 0.5 * self.rho)
        if self.rho_minus < 0.0 or self.rho_plus < 0.0:
            raise ValueError("per-spin densities must be non-negative")
        if abs(self.rho_minus + self.rho_plus - self.rho) > 1e-12 * self.rho:
            raise ValueError("per-spin densities must sum to rho")

    @property
    def qc(self) -> float:
        return self.q / self.c


@dataclass(frozen=True)
class SusceptibilityBreakdown:
    """Orbital + spin decomposition of a zero-field susceptibility."""

    orbital: float
    spin: float
    total: float
    provenance: str

    def __post_init__(self):
        scale = max(1e-300, abs(self.total), abs(self.orbital) + abs(self.spin))
        if abs(self.orbital + self.spin - self.total) > _TOTAL_CONSISTENCY * scale:
            raise ValueError("total must equal orbital + spin")

    @classmethod
    def from_parts(cls, orbital: float, spin: float, provenance: str):
        return cls(orbital=orbital, spin=spin, total=orbital + spin,
                   provenance=provenance)


def _cell_mean_f(nu: float, z: float, params: ThermoParams, V: PeriodicPotential,
                 quad: CellQuadrature | None) -> float:
    """Unit-cell average of f_nu(z e^{-beta V(x)})."""
    beta = params.beta
    if V.name == "zero":
        return f_nu(nu, z)
    return cell_integral(V, lambda v: f_nu(nu, z * np.exp(-beta * v)), quad)


def bulk_density_semiclassical(params: ThermoParams, z: float, V: PeriodicPotential,
                               quad: CellQuadrature | None = None) -> float:
    """Leading-order bulk density at fugacity z (both spin branches)."""
    if z <= 0.0:
        raise ValueError("fugacity must be positive")
    pref = 2.0 / (2.0 * math.pi * params.hbar) ** 3 * (2.0 * math.pi / params.beta) ** 1.5
    return pref * _cell_mean_f(1.5, z, params, V, quad)


def fugacity_leading_closed_form(params: ThermoParams, V: PeriodicPotential,
                                 quad: CellQuadrature | None = None,
                                 rho: float | None = None) -> float:
    """rho |Omega| (2 pi beta)^{3/2} hbar^3 / (2 int_Omega e^{-beta V})."""
    rho = params.rho if rho is None else rho
    boltz = boltzmann_cell_integral(V, params.beta, quad)
    return 0.5 * rho * (2.0 * math.pi * params.beta) ** 1.5 * params.hbar ** 3 / boltz


def fugacity_fixed_point(params: ThermoParams, V: PeriodicPotential,
                         tol: float = 1e-12, max_iter: int = 30,
                         quad: CellQuadrature | None = None,
                         rho: float | None = None):
    """Solve density(z) = rho for z.

    Pure iteration of the map u -> rho * u / density(u) (a contraction for
    small hbar); if the iteration oscillates, falls back to bisection on
    [0, 10 * closed-form leading fugacity].  Returns (z, iterations).
    """
    rho = params.rho if rho is None else rho

    def density(u):
        return bulk_density_semiclassical(params, u, V, quad)

    u = fugacity_leading_closed_form(params, V, quad, rho=rho)
    residuals = []
    for it in range(1, max_iter + 1):
        d = density(u)
        resid = abs(d - rho)
        residuals.append(resid)
        if resid <= tol * rho:
            return u, it
        u_next = rho * u / d
        if len(residuals) >= 3 and residuals[-1] > residuals[-3]:
            break  # oscillating; switch to bisection
        u = u_next
    else:
        raise ConvergenceError(
            f"fixed point not converged in {max_iter} iterations",
            last_iterate=u, residual=residuals[-1])

    lo, hi = 0.0, 10.0 * fugacity_leading_closed_form(params, V, quad, rho=rho)
    while density(hi) < rho:
        hi *= 2.0
    for it2 in range(it, max_iter + 1):
        mid = 0.5 * (lo + hi)
        d = density(mid)
        if abs(d - rho) <= tol * rho:
            return mid, it2
        if d < rho:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"bisection fallback not converged in {max_iter} iterations",
        last_iterate=0.5 * (lo + hi), residual=abs(density(0.5 * (lo + hi)) - rho))


# Susceptibility prefactors: orbital -1/6 and spin +g^2/8 multiply
# (q/c)^2 (2 pi)^{-3/2} beta^{-1/2} hbar^{-1} <f_{1/2}(z e^{-beta V})>.
def susceptibility_f12(params: ThermoParams, z: float, V: PeriodicPotential,
                       quad: CellQuadrature | None = None) -> SusceptibilityBreakdown:
    """Zero-field susceptibility of the full gas from the f_{1/2} formulas."""
    if z <= 0.0:
        raise ValueError("fugacity must be positive")
    mean_f12 = _cell_mean_f(0.5, z, params, V, quad)
    base = params.qc ** 2 / (math.sqrt(params.beta) * params.hbar) / (2.0 * math.pi) ** 1.5
    orbital = -base * mean_f12 / 6.0
    spin = base * (params.g ** 2 / 8.0) * mean_f12
    return SusceptibilityBreakdown.from_parts(orbital, spin, "f12-formula")


def susceptibility_leading_terms(params: ThermoParams) -> SusceptibilityBreakdown:
    """Potential-independent hbar^2 leading terms at fixed density."""
    kappa2 = (params.q / (2.0 * params.c)) ** 2
    scale = kappa2 * params.rho * params.beta * params.hbar ** 2
    orbital = -scale / 3.0
    spin = (params.g ** 2 / 4.0) * scale
    return SusceptibilityBreakdown.from_parts(orbital, spin, "leading-term")


def susceptibility_at_density(params: ThermoParams, V: PeriodicPotential,
                              tol: float = 1e-12, max_iter: int = 30,
                              quad: CellQuadrature | None = None) -> SusceptibilityBreakdown:
    """Susceptibility at fixed density: solve the fixed point, then apply f12.

    With equal per-spin densities a single fugacity suffices; the unequal
    case solves one fixed point per spin branch (each branch carries half
    the full-gas density at a given z) and averages the branch results.
    """
    if abs(params.rho_minus - params.rho_plus) <= 1e-12 * params.rho:
        z, _ = fugacity_fixed_point(params, V, tol, max_iter, quad)
        x = susceptibility_f12(params, z, V, quad)
        return SusceptibilityBreakdown.from_parts(x.orbital, x.spin, "f12-at-density")
    parts = []
    for rho_s in (params.rho_minus, params.rho_plus):
        z_s, _ = fugacity_fixed_point(params, V, tol, max_iter, quad, rho=2.0 * rho_s)
        parts.append(susceptibility_f12(params, z_s, V, quad))
    orbital = 0.5 * (parts[0].orbital + parts[1].orbital)
    spin = 0.5 * (parts[0].spin + parts[1].spin)
    return SusceptibilityBreakdown.from_parts(orbital, spin, "f12-at-density")


def remainder_slope_study(hbar_grid, params: ThermoParams, V: PeriodicPotential,
                          oracle=None, quad: CellQuadrature | None = None):
    """Least-squares slope of log|X(hbar) - leading(hbar)| against log hbar.

    oracle maps a ThermoParams with a given hbar to a total susceptibility;
    it defaults to the f12 pipeline.  Degenerate (zero) differences report
    the slope as +inf.  Returns (slope, residual_norm, rows) where rows hold
    (hbar, X, leading, gap) per grid point in input order.
    """
    hbar_grid = [float(h) for h in hbar_grid]
    if len(hbar_grid) < 3:
        raise ValueError("need at least three hbar values")
    if any(b <= a for a, b in zip(hbar_grid[1:], hbar_grid[:-1])):
        pass  # decreasing as required
    else:
        raise ValueError("hbar grid must be strictly decreasing")
    if oracle is None:
        def oracle(p):
            return susceptibility_at_density(p, V, quad=quad).total

    rows = []
    for h in hbar_grid:
        p_h = ThermoParams(beta=params.beta, rho=params.rho, hbar=h, g=params.g,
                           q=params.q, c=params.c, b=params.b)
        x = oracle(p_h)
        lead = susceptibility_leading_terms(p_h).total
        rows.append((h, x, lead, x - lead))
    gaps = np.array([abs(r[3]) for r in rows])
    if np.any(gaps == 0.0):
        return math.inf, 0.0, rows
    logs_h = np.log(np.array(hbar_grid))
    logs_g = np.log(gaps)
    coeffs, res, *_ = np.polyfit(logs_h, logs_g, 1, full=True)
    residual = float(res[0]) if len(res) else 0.0
    return float(coeffs[0]), residual, rows
