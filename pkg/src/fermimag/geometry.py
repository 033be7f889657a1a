"""Geometric-perturbation apparatus: cutoffs, Green kernels, contours.

The dilated cell Omega_h = (-1/(2h), 1/(2h))^3 is covered by cubes of side
h^{-alpha} centred on the lattice h^{-alpha} Z^3.  Three nested cutoff
families live on those cubes (supports 2, 4, 6 cubes wide; the wider two
equal 1 on 3 resp. 5 cube widths), with tau a genuine partition of unity on
Omega_h.  The glued constant-potential Green functions approximate the full
resolvent; the closed-form integrals their traces reduce to are verified
here by independent quadrature.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .potentials import PeriodicPotential

# ---------------------------------------------------------------------------
# smooth profiles

def _bump(u):
    """exp(-1/(1-u^2)) on |u| < 1, else 0; the standard mollifier."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


def _smoothstep(t):
    """C-infinity monotone 0 -> 1 on [0, 1]."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    b = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return a / (a + b)


def _plateau(u, inner, outer):
    """1 for |u| <= inner, 0 for |u| >= outer, smooth monotone between."""
    return _smoothstep((outer - np.abs(u)) / (outer - inner))


@dataclass(frozen=True)
class CutoffFamily:
    """Nested cutoff families tau, tau_hat, tau_hat_hat on the dilated cell.

    Coordinates are those of Omega_h.  Per-axis centre indices run over
    integers k with |k h^{-alpha}| <= 1/(2h) + h^{-alpha}/2 (cubes meeting
    Omega_h).  tau is built by normalizing tensor mollifier bumps by their
    sum over the centre set, which makes sum_gamma tau = 1 hold wherever the
    bumps cover, in particular on all of Omega_h.
    """

    alpha: float
    hbar: float
    index_range: int                  # per-axis indices run -index_range..index_range
    scale: float = field(init=False)  # h^{-alpha}, the cube side
    half_cell: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "scale", self.hbar ** -self.alpha)
        object.__setattr__(self, "half_cell", 0.5 / self.hbar)

    @property
    def card(self) -> int:
        return (2 * self.index_range + 1) ** 3

    def centers_axis(self) -> np.ndarray:
        return self.scale * np.arange(-self.index_range, self.index_range + 1)

    def center(self, gamma) -> np.ndarray:
        return self.scale * np.asarray(gamma, dtype=float)

    # raw (unnormalized) tau bump: tensor mollifier, support C(gamma, 2 h^-alpha)
    def _raw_tau_axis(self, coords, k_indices):
        u = (coords[..., None] - self.scale * k_indices) / self.scale
        return _bump(u)

    def sum_raw(self, x) -> np.ndarray:
        """Sum of raw bumps over the centre set; > 0 on the covered region."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ks = np.arange(-self.index_range, self.index_range + 1)
        total = np.ones(x.shape[0])
        for axis in range(3):
            total = total * self._raw_tau_axis(x[:, axis], ks).sum(axis=-1)
        return total

    def tau(self, gamma, x) -> np.ndarray:
        """Partition member at centre gamma (integer triple), at points x."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        gamma = np.asarray(gamma, dtype=int)
        raw = np.ones(x.shape[0])
        for axis in range(3):
            raw = raw * _bump((x[:, axis] - self.scale * gamma[axis]) / self.scale)
        denom = self.sum_raw(x)
        out = np.zeros_like(raw)
        np.divide(raw, denom, out=out, where=denom > 0.0)
        return out

    def tau_hat(self, gamma, x) -> np.ndarray:
        """1 on C(gamma, 3 h^-alpha), support in C(gamma, 4 h^-alpha)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        gamma = np.asarray(gamma, dtype=int)
        val = np.ones(x.shape[0])
        for axis in range(3):
            u = (x[:, axis] - self.scale * gamma[axis]) / self.scale
            val = val * _plateau(u, 1.5, 2.0)
        return val

    def tau_hat_hat(self, gamma, x) -> np.ndarray:
        """1 on C(gamma, 5 h^-alpha), support in C(gamma, 6 h^-alpha)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        gamma = np.asarray(gamma, dtype=int)
        val = np.ones(x.shape[0])
        for axis in range(3):
            u = (x[:, axis] - self.scale * gamma[axis]) / self.scale
            val = val * _plateau(u, 2.5, 3.0)
        return val

    def partition_sum(self, x) -> np.ndarray:
        """sum_gamma tau_gamma(x); identically 1 on Omega_h."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ks = np.arange(-self.index_range, self.index_range + 1)
        num = np.ones(x.shape[0])
        for axis in range(3):
            num = num * self._raw_tau_axis(x[:, axis], ks).sum(axis=-1)
        denom = self.sum_raw(x)
        out = np.zeros_like(num)
        np.divide(num, denom, out=out, where=denom > 0.0)
        return out

    def centers_near(self, x, reach_cubes: float = 1.0):
        """Integer centre triples whose tau support can reach x."""
        x = np.asarray(x, dtype=float)
        lo = np.maximum(np.ceil((x - reach_cubes * self.scale) / self.scale),
                        -self.index_range).astype(int)
        hi = np.minimum(np.floor((x + reach_cubes * self.scale) / self.scale),
                        self.index_range).astype(int)
        out = []
        for i in range(lo[0], hi[0] + 1):
            for j in range(lo[1], hi[1] + 1):
                for k in range(lo[2], hi[2] + 1):
                    out.append((i, j, k))
        return out


def strict_admissibility_bound(alpha: float) -> float:
    """Largest hbar with C(0, 69 h^-alpha) strictly inside Omega_h."""
    return 69.0 ** (-1.0 / (1.0 - alpha))


def build_cutoff_family(alpha: float, hbar: float,
                        strict_admissibility: bool = False) -> CutoffFamily:
    """Construct the nested cutoff families for given (alpha, hbar).

    strict mode enforces the 69-cube smallness condition and raises when
    hbar exceeds it; the default only requires the construction to be
    well-posed (0 < hbar < 1, 0 < alpha < 1).
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if not (0.0 < hbar < 1.0):
        raise ValueError("hbar must lie in (0, 1)")
    if strict_admissibility and hbar > strict_admissibility_bound(alpha):
        raise ValueError(
            f"hbar={hbar} exceeds the admissibility bound "
            f"{strict_admissibility_bound(alpha):.3e} for alpha={alpha} "
            "(the 69-cube neighbourhood must fit strictly inside the dilated cell)")
    scale = hbar ** -alpha
    half_cell = 0.5 / hbar
    index_range = int(math.floor(half_cell / scale + 0.5))
    return CutoffFamily(alpha=alpha, hbar=hbar, index_range=index_range)


def derivative_bound_check(family: CutoffFamily, order: int, which: str = "tau_hat",
                           grid: int = 4001) -> float:
    """max_gamma ||D^s f||_inf * h^{-|s| alpha} for the separable cutoffs.

    tau_hat and tau_hat_hat are tensor products, so an axis multi-index
    (s_1, s_2, s_3) factorizes into 1-D derivative maxima (computed by
    finite differences on a fine grid) times plateau maxima (= 1).
    """
    if which == "tau_hat":
        inner, outer = 1.5, 2.0
    elif which == "tau_hat_hat":
        inner, outer = 2.5, 3.0
    else:
        raise ValueError("which must be 'tau_hat' or 'tau_hat_hat'")
    u = np.linspace(-outer - 0.5, outer + 0.5, grid)
    du = (u[1] - u[0]) * family.scale
    prof = _plateau(u, inner, outer)
    deriv = prof.copy()
    for _ in range(order):
        deriv = np.gradient(deriv, du)
    return float(np.abs(deriv).max() * family.hbar ** (-order * family.alpha))


# ---------------------------------------------------------------------------
# constant-potential Green function and the glued kernel

def decay_rate(xi: complex, v: float) -> complex:
    """varsigma = sqrt(-2 (xi - v)) on the branch with positive real part."""
    s = cmath.sqrt(-2.0 * (xi - v))
    if s.real < 0.0:
        s = -s
    return s


def green_constant_potential(x, y, xi: complex, v_gamma: float) -> complex:
    """(2 pi)^{-1} e^{-varsigma |x-y|} / |x-y| for the constant potential v_gamma."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = float(np.linalg.norm(x - y))
    if r == 0.0:
        raise ValueError("Green function is singular on the diagonal")
    xi = complex(xi)
    if xi.imag == 0.0 and xi.real >= v_gamma:
        raise ValueError("xi lies on the spectral cut [v, infinity)")
    s = decay_rate(xi, v_gamma)
    return cmath.exp(-s * r) / (2.0 * math.pi * r)


def green_normalization_radial(xi: complex, v_gamma: float,
                               order: int = 400, rmax_factor: float = 80.0) -> complex:
    """int_{R^3} G(x, y) dy by radial quadrature; analytically 2/varsigma^2."""
    s = decay_rate(xi, v_gamma)
    rmax = rmax_factor / s.real
    t, w = np.polynomial.legendre.leggauss(order)
    r = 0.5 * rmax * (t + 1.0)
    wr = 0.5 * rmax * w
    vals = 2.0 * r * np.exp(-s * r)
    return complex((vals * wr).sum())


def script_r_kernel(family: CutoffFamily, V: PeriodicPotential, x, y,
                    xi: complex) -> complex:
    """sum_gamma tau_hat(x) G(x, y; xi, V(h^{1-alpha} gamma)) tau(y).

    Only centres whose tau support contains y and whose tau_hat support
    contains x contribute, so the sum is finite and short.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h, alpha = family.hbar, family.alpha
    total = 0.0 + 0.0j
    for gamma in family.centers_near(y, reach_cubes=1.0):
        ty = float(family.tau(gamma, y[None, :])[0])
        if ty == 0.0:
            continue
        tx = float(family.tau_hat(gamma, x[None, :])[0])
        if tx == 0.0:
            continue
        v_g = float(V.eval(h ** (1.0 - alpha) * np.asarray(gamma, dtype=float)))
        total += tx * green_constant_potential(x, y, xi, v_g) * ty
    return total


def holder_gap_on_supports(family: CutoffFamily, V: PeriodicPotential,
                           gammas=None, samples_per_axis: int = 9) -> float:
    """max over centres and z in Supp tau_hat_hat of |V(h^{1-a} g) - V(h z)|.

    The default centre set spreads across the whole index range so the
    reference points V(h^{1-alpha} gamma) sample generic (non-critical)
    points of the potential.
    """
    h, alpha = family.hbar, family.alpha
    if gammas is None:
        r = family.index_range
        picks = sorted({int(round(v)) for v in np.linspace(-r, r, 7)})
        gammas = [(i, j, k) for i in picks for j in picks for k in picks]
    offsets = np.linspace(-3.0, 3.0, samples_per_axis)  # tau_hat_hat support in cube units
    grid = np.stack(np.meshgrid(offsets, offsets, offsets, indexing="ij"),
                    axis=-1).reshape(-1, 3)
    worst = 0.0
    for gamma in gammas:
        c = family.center(gamma)
        z = c[None, :] + family.scale * grid
        v_ref = float(V.eval(h ** (1.0 - alpha) * np.asarray(gamma, dtype=float)))
        gaps = np.abs(v_ref - V.eval(h * z))
        worst = max(worst, float(gaps.max()))
    return worst


def fit_loglog_slope(h_values, gap_values):
    h = np.log(np.asarray(h_values, dtype=float))
    g = np.log(np.asarray(gap_values, dtype=float))
    slope, _ = np.polyfit(h, g, 1)
    return float(slope)


# ---------------------------------------------------------------------------
# closed-form kernel integrals (orbital and spin)

def orbital_kernel_closed_form(xi: complex, v_x: float, hbar: float) -> complex:
    """2 pi (4/3) hbar^3 / (8 sqrt(2) (-(xi - v))^{3/2})."""
    w = -(complex(xi) - v_x)
    return 2.0 * math.pi * (4.0 / 3.0) * hbar ** 3 / (8.0 * math.sqrt(2.0) * w ** 1.5)


def verify_orbital_kernel_integral(xi: complex, v_x: float, hbar: float,
                                   r_order: int = 320, theta_order: int = 96):
    """Quadrature of int d^3z e^{-2 varsigma |z|/hbar} |z|^{-2} (z_1^2 + z_2^2).

    Spherical coordinates about x: the integrand is e^{-kappa r} sin^2 theta
    with kappa = 2 varsigma / hbar; both the radial and polar integrals are
    done numerically (the azimuthal one is exact by axial symmetry).
    Returns (lhs, rhs, relative_gap).
    """
    s = decay_rate(xi, v_x)
    kappa = 2.0 * s / hbar
    rmax = 80.0 / kappa.real
    t, w = np.polynomial.legendre.leggauss(r_order)
    r = 0.5 * rmax * (t + 1.0)
    wr = 0.5 * rmax * w
    radial = (r * r * np.exp(-kappa * r) @ wr)
    tt, wt = np.polynomial.legendre.leggauss(theta_order)
    theta = 0.5 * math.pi * (tt + 1.0)
    wtheta = 0.5 * math.pi * wt
    angular = 2.0 * math.pi * float((np.sin(theta) ** 3) @ wtheta)
    lhs = complex(radial * angular)
    rhs = orbital_kernel_closed_form(xi, v_x, hbar)
    gap = abs(lhs - rhs) / abs(rhs)
    return lhs, rhs, gap


def spin_kernel_closed_form(xi: complex, v_x: float, hbar: float) -> complex:
    """sqrt(pi) (2 pi)^{3/2} hbar^3 / (4 (-(xi - v))^{3/2})  (= pi^2 hbar^3 / (sqrt 2 (.)^{3/2}))."""
    w = -(complex(xi) - v_x)
    return math.sqrt(math.pi) * (2.0 * math.pi) ** 1.5 * hbar ** 3 / (4.0 * w ** 1.5)


def verify_spin_kernel_integral(xi: complex, v_x: float, hbar: float,
                                k_order: int = 640):
    """Triple-Yukawa loop int dz1 dz2 prod_l e^{-kappa |z_l - z_{l+1}|}/|z_l - z_{l+1}|.

    Evaluated by the Fourier route: each Yukawa transforms to
    4 pi/(k^2 + kappa^2), so the loop equals (2 pi)^{-3} int d^3k
    (4 pi)^3/(k^2+kappa^2)^3, reduced to a radial 1-D quadrature.  The
    exponent reading kappa = varsigma/hbar (no factor 2) is the one whose
    hbar^3 closed form matches; see the ratio-8 scaling test.
    Returns (lhs, rhs, relative_gap).
    """
    s = decay_rate(xi, v_x)
    kappa = s / hbar
    # split [0, inf) at |kappa| and map the tail u = |kappa|^2/k
    km = abs(kappa)
    t, w = np.polynomial.legendre.leggauss(k_order)
    k1 = 0.5 * km * (t + 1.0)
    w1 = 0.5 * km * w
    head = (k1 * k1 / (k1 * k1 + kappa * kappa) ** 3) @ w1
    u = 0.5 * km * (t + 1.0)
    wu = 0.5 * km * w
    ku = km * km / u
    tail = ((ku * ku / (ku * ku + kappa * kappa) ** 3) * (km * km / u ** 2)) @ wu
    radial = head + tail
    lhs = complex((2.0 * math.pi) ** -3 * (4.0 * math.pi) ** 3 * 4.0 * math.pi * radial)
    rhs = spin_kernel_closed_form(xi, v_x, hbar)
    gap = abs(lhs - rhs) / abs(rhs)
    return lhs, rhs, gap


def spin_kernel_monte_carlo(xi: complex, v_x: float, hbar: float,
                            samples: int = 200000, rng_seed: int = 0):
    """Direct 6-D importance-sampled MC oracle for the triple-Yukawa loop.

    z1 and z2 are drawn from the normalized Yukawa density
    p(z) = kappa_r^2 e^{-kappa_r r}/(4 pi r) (radius ~ Gamma(2, kappa_r),
    isotropic direction), which cancels two of the three singular factors;
    the remaining weight is the middle propagator times the complex phase
    corrections.  Returns (estimate, standard_error) as complex/real pair.
    """
    s = decay_rate(xi, v_x)
    kappa = s / hbar
    kr = kappa.real
    rng = np.random.Generator(np.random.Philox(key=rng_seed))

    def draw(n):
        radius = rng.gamma(2.0, 1.0 / kr, size=n)
        direction = rng.normal(size=(n, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        return radius[:, None] * direction, radius

    z1, r1 = draw(samples)
    z2, r2 = draw(samples)
    r12 = np.linalg.norm(z1 - z2, axis=1)
    # density per point: kr^2 e^{-kr r}/(4 pi r)
    dens = (kr ** 2 / (4.0 * math.pi)) ** 2 * np.exp(-kr * (r1 + r2)) / (r1 * r2)
    vals = np.exp(-kappa * (r1 + r2 + r12)) / (r1 * r2 * r12) / dens
    mean = complex(vals.mean())
    se = float(np.abs(vals - mean).std(ddof=1) / math.sqrt(samples))
    return mean, se


# ---------------------------------------------------------------------------
# the Fermi-factor contour

@dataclass(frozen=True)
class ContourSpec:
    """Closed rectangle around [-||V||_inf, truncation] used for FD integrals.

    Counterclockwise: bottom ray (left to right at Im = -pi/(2 beta)), far
    vertical at Re = truncation, top ray (right to left), near vertical at
    Re = delta = -||V||_inf - 1.  The far segment contributes < e^{-40} for
    Fermi-factor-decaying integrands but closes the contour exactly.
    """

    beta: float
    delta: float
    truncation: float
    nodes: np.ndarray        # complex quadrature nodes
    weights: np.ndarray      # complex weights (include dxi direction)

    def integrate(self, f) -> complex:
        vals = np.asarray([f(complex(xi)) for xi in self.nodes])
        return complex((vals * self.weights).sum())


def build_contour(beta: float, sup_norm_v: float, truncation: float | None = None,
                  nodes: int = 96) -> ContourSpec:
    """Gauss-Legendre nodes along the four segments of the closed contour."""
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    delta = -sup_norm_v - 1.0
    if truncation is None:
        truncation = delta + 40.0 / beta
    if truncation <= delta:
        raise ValueError("truncation must exceed delta")
    half_height = math.pi / (2.0 * beta)
    t, w = np.polynomial.legendre.leggauss(nodes)

    def segment(z0, z1):
        mid = 0.5 * (z0 + z1)
        half = 0.5 * (z1 - z0)
        return mid + half * t, half * w

    pieces = [
        segment(delta - 1j * half_height, truncation - 1j * half_height),
        segment(truncation - 1j * half_height, truncation + 1j * half_height),
        segment(truncation + 1j * half_height, delta + 1j * half_height),
        segment(delta + 1j * half_height, delta - 1j * half_height),
    ]
    zs = np.concatenate([p[0] for p in pieces])
    ws = np.concatenate([p[1] for p in pieces])
    return ContourSpec(beta=beta, delta=delta, truncation=truncation,
                       nodes=zs, weights=ws)


def fermi_factor(beta: float, z: float, xi) -> complex:
    return z * np.exp(-beta * xi) / (1.0 + z * np.exp(-beta * xi))


def fermi_factor_via_contour(spec: ContourSpec, z: float, lam: float) -> complex:
    """(i/2 pi) oint f_FD(xi) / (lam - xi) d xi, the scalar resolvent analogue."""
    beta = spec.beta
    val = spec.integrate(lambda xi: fermi_factor(beta, z, xi) / (lam - xi))
    return 1j / (2.0 * math.pi) * val
