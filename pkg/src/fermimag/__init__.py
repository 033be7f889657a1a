"""Semiclassical zero-field magnetism of a spin-1/2 Fermi gas in a periodic
potential, cross-validated against Landau-level, finite-box spectral, and
classical Monte-Carlo oracles."""

__version__ = "0.1.0"

from .potentials import (CellQuadrature, PeriodicPotential, boltzmann_cell_integral,
                         cosine_potential, holder_gap_profile, potential_from_spec,
                         triple_cosine_potential, weierstrass_potential,
                         zero_potential)
from .fermi_dirac import f_nu, f_nu_quadrature, f_nu_series, momentum_fd_integral
from .semiclassics import (SusceptibilityBreakdown, ThermoParams,
                           bulk_density_semiclassical, fugacity_fixed_point,
                           fugacity_leading_closed_form, remainder_slope_study,
                           susceptibility_at_density, susceptibility_f12,
                           susceptibility_leading_terms)

__all__ = [
    "CellQuadrature", "PeriodicPotential", "SusceptibilityBreakdown",
    "ThermoParams", "boltzmann_cell_integral", "bulk_density_semiclassical",
    "cosine_potential", "f_nu", "f_nu_quadrature", "f_nu_series",
    "fugacity_fixed_point", "fugacity_leading_closed_form",
    "holder_gap_profile", "momentum_fd_integral", "potential_from_spec",
    "remainder_slope_study", "susceptibility_at_density", "susceptibility_f12",
    "susceptibility_leading_terms", "triple_cosine_potential",
    "weierstrass_potential", "zero_potential",
]
