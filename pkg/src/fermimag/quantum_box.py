"""Finite-volume spectral oracle: Dirichlet box, Peierls phases, ensembles.

The continuum operator  (1/2)(-i hbar grad - b a)^2 -+ (g/4) hbar b + V  with
a(x) = (1/2)(-x_2, x_1, 0) is discretized on an n^3 grid with Dirichlet
walls.  Minimal coupling uses Peierls link phases exp(-i (b/hbar) int a.dl)
on the nearest-neighbour hops of the 7-point Laplacian, which keeps the
matrix exactly Hermitian at every b; a is linear so the midpoint rule for
the link integral is exact.

On top of the spectra: grand-canonical pressure/density, the fermionic
canonical recursion Z_N = (1/N) sum_k (-1)^{k+1} S_k Z_{N-k}, the contour
(Darwin-Fowler) route Z_N = (1/2 pi i) oint Xi(zeta) zeta^{-(N+1)} d zeta,
the Legendre transform of the pressure, and finite-difference canonical
susceptibilities.

The spin term is a multiple of the identity per branch, so one eigensolve
per b serves both branches and every g:  lambda^{s}_j(b, g) =
lambda_j(b, g=0) - s g hbar b / 4.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import logsumexp

from .errors import CancellationError, ConvergenceError, ResourceLimitError
from .potentials import PeriodicPotential
from .semiclassics import SusceptibilityBreakdown, ThermoParams

_DENSE_LIMIT = 6200          # n^3 up to which dense eigensolves are used
_HARD_SITE_LIMIT = 40 ** 3   # refuse to build anything larger


@dataclass(frozen=True)
class BoxDiscretization:
    """Cubic box (-L/2, L/2)^3, n interior points per side, Dirichlet walls."""

    side_length: float
    points_per_side: int
    spin_branch: int = -1          # -1 or +1, the sign s in -+ s (g/4) hbar b

    def __post_init__(self):
        if self.side_length <= 0.0:
            raise ValueError("side length must be positive")
        if self.points_per_side < 4:
            raise ValueError("need at least 4 points per side")
        if self.spin_branch not in (-1, +1):
            raise ValueError("spin branch must be -1 or +1")

    @property
    def grid_spacing(self) -> float:
        return self.side_length / (self.points_per_side + 1)

    @property
    def volume(self) -> float:
        return self.side_length ** 3

    @property
    def sites(self) -> int:
        return self.points_per_side ** 3

    def coordinates(self) -> np.ndarray:
        """Interior grid points, shape (n^3, 3), box centred at the origin."""
        n, h = self.points_per_side, self.grid_spacing
        axis = (np.arange(1, n + 1) * h) - self.side_length / 2.0
        grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
        return grid.reshape(-1, 3)


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues of one spin branch plus box metadata."""

    eigenvalues: np.ndarray
    box: BoxDiscretization
    params_used: tuple            # (hbar, b, g, potential name)
    truncated: bool = False
    tail_bound_exponent: float = math.inf   # min beta*lambda dropped, if truncated

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(ev) < -1e-10 * max(1.0, float(np.abs(ev).max(initial=0.0)))):
            raise ValueError("eigenvalues must be ascending")
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def count(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def volume(self) -> float:
        return self.box.volume

    def shifted(self, delta: float) -> "Spectrum":
        return Spectrum(self.eigenvalues + delta, self.box, self.params_used,
                        self.truncated, self.tail_bound_exponent)


def spectrum_lower_bound(params: ThermoParams, sup_norm_v: float) -> float:
    """hbar |b| / 2 (1 - g/2) - ||V||_inf, the continuum lower bound."""
    return params.hbar * abs(params.b) / 2.0 * (1.0 - params.g / 2.0) - sup_norm_v


def build_hamiltonian(box: BoxDiscretization, params: ThermoParams,
                      V: PeriodicPotential, b: float | None = None) -> sp.csr_matrix:
    """Sparse Hermitian discretization of one spin branch; exact Hermiticity."""
    n = box.points_per_side
    if box.sites > _HARD_SITE_LIMIT:
        raise ResourceLimitError(f"{box.sites} sites exceed the build budget")
    b = params.b if b is None else b
    hbar, g, s = params.hbar, params.g, box.spin_branch
    h = box.grid_spacing
    t = hbar ** 2 / (2.0 * h * h)

    coords = box.coordinates()
    diag = 6.0 * t + V.eval(coords) - s * g * hbar * b / 4.0

    idx = np.arange(box.sites).reshape(n, n, n)
    rows, cols, vals = [], [], []

    def add_hops(src, dst, phase):
        rows.append(src.ravel())
        cols.append(dst.ravel())
        vals.append(-t * phase.ravel())
        rows.append(dst.ravel())
        cols.append(src.ravel())
        vals.append(np.conj(-t * phase.ravel()))

    x = coords[:, 0].reshape(n, n, n)
    y = coords[:, 1].reshape(n, n, n)
    # hop along e1: int a.dl = a_1(midpoint) h = -(1/2) x_2 h
    line = -0.5 * y[:-1, :, :] * h
    add_hops(idx[:-1, :, :], idx[1:, :, :], np.exp(-1j * (b / hbar) * line))
    # hop along e2: a_2(midpoint) h = +(1/2) x_1 h
    line = 0.5 * 0.5 * (x[:, :-1, :] + x[:, 1:, :]) * h
    add_hops(idx[:, :-1, :], idx[:, 1:, :], np.exp(-1j * (b / hbar) * line))
    # hop along e3: a_3 = 0
    add_hops(idx[:, :, :-1], idx[:, :, 1:], np.ones((n, n, n - 1)))

    rows.append(np.arange(box.sites))
    cols.append(np.arange(box.sites))
    vals.append(diag.astype(complex))

    H = sp.csr_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(box.sites, box.sites))
    if b == 0.0:
        H = sp.csr_matrix(H.real)
    return H


def solve_spectrum(box: BoxDiscretization, params: ThermoParams, V: PeriodicPotential,
                   b: float | None = None, beta: float | None = None,
                   num_eigenvalues: int | None = None) -> Spectrum:
    """Eigenvalues of one spin branch.

    Dense eigensolve up to 16^3 sites; above that a shift-invert Lanczos run
    returns all eigenvalues below lambda_1 + 40/beta (or the requested
    count), with the dropped tail certified by its Fermi-factor exponent.
    """
    b = params.b if b is None else b
    H = build_hamiltonian(box, params, V, b=b)
    meta = (params.hbar, b, params.g, V.name)
    if box.sites <= _DENSE_LIMIT and num_eigenvalues is None:
        ev = scipy.linalg.eigvalsh(H.toarray())
        return Spectrum(np.sort(ev), box, meta)

    sigma = spectrum_lower_bound(
        ThermoParams(beta=1.0, rho=1.0, hbar=params.hbar, g=params.g,
                     q=params.q, c=params.c, b=b), V.sup_norm) - 1.0
    if num_eigenvalues is None:
        if beta is None:
            raise ValueError("sparse path needs beta (for the thermal cutoff) "
                             "or an explicit eigenvalue count")
        # Weyl estimate of the count below lambda_1 + 40/beta, padded.
        e_hi = 3.0 * math.pi ** 2 * params.hbar ** 2 / (2.0 * box.side_length ** 2) \
            + V.sup_norm + 40.0 / beta
        weyl = box.volume * (2.0 * max(e_hi, 0.0)) ** 1.5 / (6.0 * math.pi ** 2 * params.hbar ** 3)
        num_eigenvalues = min(box.sites - 2, int(1.4 * weyl) + 16)
    k = min(num_eigenvalues, box.sites - 2)
    ev = spla.eigsh(H, k=k, sigma=sigma, which="LM",
                    return_eigenvectors=False)
    ev = np.sort(ev)
    tail_exp = math.inf
    truncated = k < box.sites
    if truncated and beta is not None:
        tail_exp = beta * float(ev[-1])
    return Spectrum(ev, box, meta, truncated=truncated, tail_bound_exponent=tail_exp)


def gc_pressure_fv(spectrum: Spectrum, beta: float, z) -> float | complex:
    """(beta |Lambda|)^{-1} sum_j ln(1 + z e^{-beta lambda_j}).

    Accepts complex z away from the cut (needed by the contour machinery);
    for |z| < e^{beta lambda_1} the principal log is the analytic branch.
    """
    if isinstance(z, complex):
        terms = np.log1p(z * np.exp(-beta * spectrum.eigenvalues.astype(complex)))
        out = terms.sum() / (beta * spectrum.volume)
        return complex(out)
    if z <= 0.0:
        raise ValueError("fugacity must be positive")
    terms = np.log1p(z * np.exp(-beta * spectrum.eigenvalues))
    return float(terms.sum() / (beta * spectrum.volume))


def gc_density_fv(spectrum: Spectrum, beta: float, z: float) -> float:
    """|Lambda|^{-1} sum_j z e^{-beta lambda_j} / (1 + z e^{-beta lambda_j})."""
    if z <= 0.0:
        raise ValueError("fugacity must be positive")
    w = z * np.exp(-beta * spectrum.eigenvalues)
    return float((w / (1.0 + w)).sum() / spectrum.volume)


def _signed_logsumexp(logs, signs):
    logs = np.asarray(logs, dtype=float)
    signs = np.asarray(signs, dtype=float)
    m = logs.max()
    s = float((signs * np.exp(logs - m)).sum())
    if s == 0.0:
        return -math.inf, 0.0
    return m + math.log(abs(s)), math.copysign(1.0, s)


def canonical_partition_ladder(spectrum: Spectrum, N: int, beta: float) -> np.ndarray:
    """[ln Z_0, ..., ln Z_N] via the fermionic recursion, in the log domain.

    Z_0 = 1;  Z_N = (1/N) sum_{k=1}^{N} (-1)^{k+1} S_k Z_{N-k} with
    S_k = sum_j e^{-k beta lambda_j}.  Any non-positive partial Z_k signals
    catastrophic cancellation and aborts.
    """
    if N < 0:
        raise ValueError("particle number must be non-negative")
    if N > spectrum.count:
        raise ValueError("more particles than levels")
    lam = spectrum.eigenvalues
    log_s = np.array([logsumexp(-k * beta * lam) for k in range(1, N + 1)]) \
        if N > 0 else np.empty(0)
    log_z = [0.0]
    for n in range(1, N + 1):
        ks = np.arange(1, n + 1)
        term_logs = log_s[ks - 1] + np.array([log_z[n - k] for k in ks]) - math.log(n)
        term_signs = (-1.0) ** (ks + 1)
        log_val, sign = _signed_logsumexp(term_logs, term_signs)
        if sign <= 0.0:
            raise CancellationError(
                f"fermionic recursion produced Z_{n} <= 0 (sign anomaly); "
                f"N={N}, levels={spectrum.count}")
        log_z.append(log_val)
    return np.array(log_z)


def canonical_partition_recursive(spectrum: Spectrum, N: int, beta: float) -> float:
    """ln Z_N via the fermionic recursion (see canonical_partition_ladder)."""
    return float(canonical_partition_ladder(spectrum, N, beta)[N])


def two_branch_log_partition(spectrum_minus: Spectrum, spectrum_plus: Spectrum,
                             n_total: int, beta: float) -> float:
    """ln Z_N of the spin-1/2 gas at fixed total N with branch exchange.

    The N-particle antisymmetric space over h + h decomposes over the split
    N = N_minus + N_plus, so Z_N = sum_k Z^-_k Z^+_{N-k}.  Fixing the split
    instead would freeze the spin polarization and lose the paramagnetic
    response entirely.
    """
    ladder_minus = canonical_partition_ladder(spectrum_minus, n_total, beta)
    ladder_plus = canonical_partition_ladder(spectrum_plus, n_total, beta)
    combined = ladder_minus + ladder_plus[::-1]
    return float(logsumexp(combined))


def canonical_partition_contour(spectrum: Spectrum, N: int, beta: float,
                                radius: float | None = None, points: int = 512,
                                check_tolerance: float | None = 1e-8):
    """ln Z_N from the contour integral of Xi(zeta)/zeta^{N+1} on |zeta| = radius.

    The trapezoid rule on the circle is spectrally accurate for the analytic
    integrand.  The default radius solves gc_density_fv = N/|Lambda| (the
    saddle radius).  Returns (ln Z_N, flagged) where flagged reports a
    disagreement with the recursion beyond check_tolerance (skipped when
    check_tolerance is None).
    """
    if points < 64:
        raise ValueError("need at least 64 contour points")
    if N == 0:
        return 0.0, False
    if radius is None:
        radius = _saddle_radius(spectrum, beta, N)
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    lam_min = float(spectrum.eigenvalues[0])
    phi = 2.0 * math.pi * np.arange(points) / points
    zeta = radius * np.exp(1j * phi)
    log_xi = np.log1p(zeta[:, None] * np.exp(-beta * spectrum.eigenvalues)[None, :]).sum(axis=1)
    log_weights = log_xi - N * (math.log(radius) + 1j * phi)
    m = log_weights.real.max()
    mean = np.exp(log_weights - m).mean()
    log_zn = m + math.log(abs(mean))
    flagged = False
    if check_tolerance is not None and radius < math.exp(beta * lam_min):
        ref = canonical_partition_recursive(spectrum, N, beta)
        flagged = abs(log_zn - ref) > check_tolerance * max(1.0, abs(ref))
    return float(log_zn), flagged


def _saddle_radius(spectrum: Spectrum, beta: float, N: int) -> float:
    target = N / spectrum.volume
    lo, hi = 0.0, 1.0
    while gc_density_fv(spectrum, beta, hi) < target:
        hi *= 2.0
        if hi > 1e300:
            raise ConvergenceError("saddle radius search diverged")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gc_density_fv(spectrum, beta, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def legendre_pressure(spectrum: Spectrum, beta: float, rho_s: float):
    """P* = sup_mu (rho_s mu - P) = (rho_s/beta) ln z_bar - P(z_bar).

    z_bar solves the monotone equation gc_density_fv(z) = rho_s; out-of-range
    densities are a domain error.  Returns (P*, z_bar).
    """
    if not (0.0 < rho_s < spectrum.count / spectrum.volume):
        raise ValueError("density outside the reachable range of this spectrum")
    z_bar = _density_inverse(spectrum, beta, rho_s)
    p_star = (rho_s / beta) * math.log(z_bar) - gc_pressure_fv(spectrum, beta, z_bar)
    return p_star, z_bar


def _density_inverse(spectrum: Spectrum, beta: float, rho_s: float) -> float:
    lo, hi = 0.0, 1.0
    while gc_density_fv(spectrum, beta, hi) < rho_s:
        hi *= 2.0
        if hi > 1e300:
            raise ConvergenceError("density inversion diverged")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if gc_density_fv(spectrum, beta, mid) < rho_s:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class FdSpec:
    """Finite-difference stencil controls for d^2/db^2 of box free energies."""

    step: float | None = None     # default 0.05 sqrt(1/beta)/hbar
    use_evenness: bool = True     # exploit F(-b) = F(b) of the two-branch total

    def step_for(self, beta: float, hbar: float) -> float:
        if self.step is not None:
            return self.step
        return 0.05 * math.sqrt(1.0 / beta) / hbar


def _branch_spectra(box: BoxDiscretization, params: ThermoParams, V: PeriodicPotential,
                    b: float, beta: float) -> dict[int, Spectrum]:
    """Both spin branches from the single g = 0 eigensolve at this b."""
    p0 = ThermoParams(beta=params.beta, rho=params.rho, hbar=params.hbar, g=0.0,
                      q=params.q, c=params.c, b=b)
    base = solve_spectrum(BoxDiscretization(box.side_length, box.points_per_side, -1),
                          p0, V, b=b, beta=beta)
    shift = params.g * params.hbar * b / 4.0
    return {-1: base.shifted(-shift), +1: base.shifted(+shift)}


def canonical_free_energy(spectra: dict[int, Spectrum], beta: float,
                          n_total: int) -> float:
    """F = -(beta |Lambda|)^{-1} ln Z_N of the full gas at fixed total N."""
    vol = spectra[-1].volume
    return -two_branch_log_partition(spectra[-1], spectra[+1], n_total, beta) \
        / (beta * vol)


def _even_second_derivative(f0, f1, f2, h):
    """F''(0) for even F from values at 0, h, 2h; error O(h^4)."""
    return (16.0 * f1 - f2 - 15.0 * f0) / (6.0 * h * h)


class BoxEnsembleSolves:
    """Spectra of one box at the b-stencil {0, h, 2h}, shared by both ensembles."""

    def __init__(self, box: BoxDiscretization, params: ThermoParams,
                 V: PeriodicPotential, fd: FdSpec | None = None):
        self.box = box
        self.params = params
        self.V = V
        self.fd = fd or FdSpec()
        self.step = self.fd.step_for(params.beta, params.hbar)
        self.spectra = {b: _branch_spectra(box, params, V, b, params.beta)
                        for b in (0.0, self.step, 2.0 * self.step)}

    def _pair_at(self, b: float, g: float):
        spectra = self.spectra[b]
        if g == self.params.g:
            return spectra
        base = spectra[-1].shifted(+self.params.g * self.params.hbar * b / 4.0)
        shift = g * self.params.hbar * b / 4.0
        return {-1: base.shifted(-shift), +1: base.shifted(+shift)}

    def canonical_susceptibility(self, n_total: int) -> SusceptibilityBreakdown:
        beta, h = self.params.beta, self.step
        qc2 = self.params.qc ** 2

        def d2(g):
            f = [canonical_free_energy(self._pair_at(b, g), beta, n_total)
                 for b in (0.0, h, 2.0 * h)]
            return _even_second_derivative(*f, h)

        orbital = -qc2 * d2(0.0)
        total = -qc2 * d2(self.params.g)
        return SusceptibilityBreakdown.from_parts(orbital, total - orbital, "oracle")

    def gc_susceptibility_fixed_density(self, rho_s: float):
        """2 X^{s,GC}(beta, z_bar(rho_s, b=0), 0) by differencing P(b) at fixed z."""
        beta, h = self.params.beta, self.step
        _, z_bar = legendre_pressure(self.spectra[0.0][-1], beta, rho_s)
        p = [sum(gc_pressure_fv(self.spectra[b][s], beta, z_bar) for s in (-1, +1))
             for b in (0.0, h, 2.0 * h)]
        return self.params.qc ** 2 * _even_second_derivative(*p, h), z_bar

    def magnetization(self, n_total: int) -> float:
        """-(q/c) dF/db at 0 by an odd difference with an independent -h solve."""
        beta, h = self.params.beta, self.step
        minus = _branch_spectra(self.box, self.params, self.V, -h, beta)
        f_minus = canonical_free_energy(minus, beta, n_total)
        f_plus = canonical_free_energy(self.spectra[h], beta, n_total)
        return -self.params.qc * (f_plus - f_minus) / (2.0 * h)


def canonical_susceptibility_fv(box: BoxDiscretization, params: ThermoParams,
                                V: PeriodicPotential, n_total: int,
                                fd: FdSpec | None = None,
                                compute_magnetization: bool = True):
    """Canonical zero-field susceptibility of the full gas by differencing F(b).

    N is the total particle count; the two spin branches exchange particles
    (see two_branch_log_partition), which carries the paramagnetic response.
    Returns (SusceptibilityBreakdown, magnetization_estimate).  The total
    free energy is even in b, so the five-point stencil reduces to
    b in {0, h, 2h}; the orbital part re-evaluates the same spectra at g = 0
    (the spin shift is a diagonal constant, no new eigensolve).  The
    magnetization estimate uses an honest independent eigensolve at -h and
    should vanish by evenness.
    """
    solves = BoxEnsembleSolves(box, params, V, fd)
    breakdown = solves.canonical_susceptibility(n_total)
    magnetization = solves.magnetization(n_total) if compute_magnetization else 0.0
    return breakdown, magnetization


def gc_susceptibility_fixed_density_fv(box: BoxDiscretization, params: ThermoParams,
                                       V: PeriodicPotential, rho_s: float,
                                       fd: FdSpec | None = None):
    """2 X^{s,GC}(beta, z_bar(rho_s, b=0), 0) by differencing P(b) at fixed z."""
    return BoxEnsembleSolves(box, params, V, fd).gc_susceptibility_fixed_density(rho_s)


def box_equivalence_row(box: BoxDiscretization, params: ThermoParams,
                        V: PeriodicPotential, n_per_spin: int,
                        fd: FdSpec | None = None) -> dict:
    """All ensemble-equivalence quantities of one box from a single solve set.

    Returns a dict with the per-spin free energy F, the Legendre transform
    P*, their gap and its Darwin-Fowler bound, both susceptibilities and
    their gap.
    """
    solves = BoxEnsembleSolves(box, params, V, fd)
    beta = params.beta
    rho_s = n_per_spin / box.volume
    branch = solves.spectra[0.0][-1]
    f_l = -canonical_partition_recursive(branch, n_per_spin, beta) / (beta * box.volume)
    p_star, z_bar = legendre_pressure(branch, beta, rho_s)
    log_term, contour_term = darwin_fowler_correction(branch, beta, rho_s)
    x_c = solves.canonical_susceptibility(2 * n_per_spin)
    x_gc, _ = solves.gc_susceptibility_fixed_density(rho_s)
    return {
        "L": box.side_length, "n": box.points_per_side, "N_per_spin": n_per_spin,
        "F_canonical": f_l, "P_star": p_star, "F_gap": abs(f_l - p_star),
        "F_gap_bound": 2.0 * log_term + abs(contour_term),
        "df_log_term": log_term, "df_contour_term": contour_term,
        "X_canonical": x_c.total, "X_gc_fixed_density": x_gc,
        "X_gap": abs(x_c.total - x_gc), "z_bar": z_bar,
    }


def darwin_fowler_correction(spectrum: Spectrum, beta: float, rho_s: float,
                             points: int = 1024):
    """The finite-size pieces of F_L - P*_L from the saddle-circle contour.

    Returns (ln(N_s)/(2 beta |Lambda|), -(beta |Lambda|)^{-1} ln A_L) where
    A_L = sqrt(N_s)/(2 pi) int e^{beta (N_s/rho_s)(P_hat(z_bar e^{i phi}) -
    P(z_bar))} e^{-i N_s phi} d phi.
    """
    vol = spectrum.volume
    n_s = rho_s * vol
    z_bar = _density_inverse(spectrum, beta, rho_s)
    phi = 2.0 * math.pi * (np.arange(points) + 0.5) / points - math.pi
    zeta = z_bar * np.exp(1j * phi)
    p_hat = np.array([gc_pressure_fv(spectrum, beta, complex(z)) for z in zeta])
    p_real = gc_pressure_fv(spectrum, beta, z_bar)
    weights = np.exp(beta * (n_s / rho_s) * (p_hat - p_real) - 1j * n_s * phi)
    a_l = math.sqrt(n_s) * float(np.real(weights.mean()))
    log_term = math.log(n_s) / (2.0 * beta * vol)
    if a_l <= 0.0:
        return log_term, math.nan
    return log_term, -math.log(a_l) / (beta * vol)


def dump_hamiltonian(path, H: sp.spmatrix, box: BoxDiscretization,
                     params: ThermoParams, b: float):
    """Binary dump: header (n, L, hbar, b, g) then row-major complex128 values.

    Header layout: '<i4 f8 f8 f8 f8' little-endian, immediately followed by
    n^3 * n^3 complex128 entries.
    """
    dense = np.asarray(H.todense(), dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<idddd", box.points_per_side,
                             box.side_length, params.hbar, b, params.g))
        fh.write(np.ascontiguousarray(dense).tobytes())


def load_hamiltonian(path):
    """Inverse of dump_hamiltonian; returns (matrix, header dict)."""
    with open(path, "rb") as fh:
        raw = fh.read(struct.calcsize("<idddd"))
        n, L, hbar, b, g = struct.unpack("<idddd", raw)
        data = np.frombuffer(fh.read(), dtype=np.complex128).reshape(n ** 3, n ** 3)
    return data, {"n": n, "L": L, "hbar": hbar, "b": b, "g": g}
