"""Shared substrate for the reduced equivariant harmonic-map problem.

A rotationally equivariant map between spheres built over an eigenmap with
eigenvalue omega reduces to a scalar profile h(x) on the real line, where
x = log tan((theta + pi/2)/2) flattens the polar angle theta in (-pi/2, pi/2).
The profile satisfies

    h'' - (m - 1) tanh(x) h' + (omega/2) (1 + nu(x)) sin(2h) = 0,

the Euler-Lagrange equation of the weighted energy

    E(h) = (1/2) int [ (h')^2 + omega (1 + nu) cos^2 h ] sech^(m-1)(x) dx.

Here m >= 2 is the domain sphere dimension and nu is an optional even C^2
perturbation with compact support and sup |nu| < 1.  The constant profile
h = 0 (the "equator" or singular map) is a critical point for every
parameter choice; genuine solutions connect -pi/2 to pi/2 inside the
constraint band |h| <= pi/2.

This module holds problem parameters, sampled profiles, the energy and
related functionals, coordinate transforms, and the asymptotic
linearisation rates used by the solvers and the spectral reduction.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.special import gammaln

# Default tolerances.  Constraint/symmetry checks are absolute; the
# quadrature target is what the composite rule is tuned to deliver on the
# default grids.
TOL_CONSTRAINT = 1e-9
TOL_SYM = 1e-9
QUAD_TOL = 1e-10

HALF_PI = math.pi / 2.0


def sech(x):
    return 1.0 / np.cosh(x)


def weight(x, m):
    """Integration weight sech^(m-1)(x)."""
    return sech(x) ** (m - 1)


@dataclass(frozen=True)
class NuPerturbation:
    """Even, compactly supported perturbation of the eigenvalue term.

    Represented by samples on its own symmetric grid and evaluated by
    linear interpolation, identically zero outside the sample window.
    Required: sup |nu| < 1, even symmetry, vanishing endpoints.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 3:
            raise ValueError("nu needs matching 1-d grids with >= 3 samples")
        if np.any(np.diff(g) <= 0):
            raise ValueError("nu grid must be strictly increasing")
        if np.max(np.abs(g + g[::-1])) > 1e-12 * max(1.0, abs(g[-1])):
            raise ValueError("nu grid must be symmetric about 0")
        if np.max(np.abs(v - v[::-1])) > 1e-12:
            raise ValueError("nu must be an even function")
        if np.max(np.abs(v)) >= 1.0:
            raise ValueError("need sup |nu| < 1")
        if abs(v[0]) > 1e-14 or abs(v[-1]) > 1e-14:
            raise ValueError("nu must vanish at the ends of its sample window")
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @property
    def support_radius(self) -> float:
        return float(self.grid[-1])

    def __call__(self, x):
        return np.interp(x, self.grid, self.values, left=0.0, right=0.0)


@dataclass(frozen=True)
class ProblemParams:
    """Domain dimension m >= 2, eigenvalue omega > 0, optional perturbation."""

    m: int
    omega: float
    nu: NuPerturbation | None = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("m must be an integer >= 2")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "omega", float(self.omega))
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    def nu_at(self, x):
        """nu sampled at x (scalar or array); zero when unset."""
        if self.nu is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.nu(x)

    def hypothesis(self) -> bool:
        """Whether (m-1)^2/4 < omega, the regime with unstable equator map."""
        return 0.25 * (self.m - 1) ** 2 < self.omega


@dataclass(frozen=True)
class AsymptoticData:
    """Decay rates of pi/2 -+ h at the two ends of the line.

    decay_exponent_plus is the negative root of  l^2 - (m-1) l - omega = 0,
    governing  pi/2 - |h| ~ C exp(l x)  as x -> +inf; the mirrored rate at
    -inf is its negation.
    """

    decay_exponent_plus: float
    decay_exponent_minus: float


def asymptotic_exponents(params: ProblemParams) -> AsymptoticData:
    m1 = params.m - 1
    disc = math.sqrt(m1 * m1 + 4.0 * params.omega)
    lam = 0.5 * (m1 - disc)
    return AsymptoticData(decay_exponent_plus=lam, decay_exponent_minus=-lam)


def symmetric_grid(cutoff: float, n: int) -> np.ndarray:
    """Uniform grid on [-cutoff, cutoff] with an odd point count.

    Built by mirroring the half grid so the nodes are symmetric bitwise and
    x = 0 is an exact node.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError("grid size must be odd and >= 3")
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    half = np.linspace(0.0, float(cutoff), (n + 1) // 2)
    return np.concatenate([-half[:0:-1], half])


@dataclass(frozen=True)
class Profile:
    """A sampled profile on a symmetric grid, with solver metadata.

    Invariants: strictly increasing symmetric grid, |h| <= pi/2 within
    TOL_CONSTRAINT, and, when a symmetry class is declared, parity defect
    within TOL_SYM.
    """

    grid: np.ndarray
    h: np.ndarray
    dh: np.ndarray
    params: ProblemParams
    symmetry_class: str = "none"
    residual_norm: float | None = None
    zero_count: int | None = None
    provenance: str = ""
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        for name in ("grid", "h", "dh"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if validate:
            self._check()

    def _check(self):
        g, h, dh = self.grid, self.h, self.dh
        if g.ndim != 1 or g.size < 3 or h.shape != g.shape or dh.shape != g.shape:
            raise ValueError("grid, h, dh must be 1-d arrays of equal length >= 3")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.max(np.abs(g + g[::-1])) > 1e-12 * max(1.0, abs(g[-1])):
            raise ValueError("grid must be symmetric about 0")
        if self.symmetry_class not in ("none", "even", "odd"):
            raise ValueError("symmetry_class must be 'none', 'even' or 'odd'")
        if np.max(np.abs(h)) > HALF_PI + TOL_CONSTRAINT:
            raise ValueError("profile leaves the band |h| <= pi/2")
        if self.symmetry_class != "none" and self.symmetry_defect() > TOL_SYM:
            raise ValueError(f"{self.symmetry_class} symmetry defect exceeds {TOL_SYM}")

    # -- basic geometry ----------------------------------------------------

    @property
    def cutoff(self) -> float:
        return float(self.grid[-1])

    @property
    def n(self) -> int:
        return int(self.grid.size)

    @property
    def dx(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.h)))

    def symmetry_defect(self) -> float:
        if self.symmetry_class == "odd":
            return float(np.max(np.abs(self.h + self.h[::-1])))
        if self.symmetry_class == "even":
            return float(np.max(np.abs(self.h - self.h[::-1])))
        return 0.0


def count_zero_crossings(values) -> int:
    """Sign changes along a sampled function; exact zeros collapse into one."""
    s = np.sign(np.asarray(values, dtype=float))
    s = s[s != 0]
    if s.size < 2:
        return 0
    return int(np.count_nonzero(s[1:] != s[:-1]))


def derivative_samples(y, dx):
    """Fourth-order finite-difference derivative of uniformly sampled data."""
    y = np.asarray(y, dtype=float)
    if y.size < 5:
        raise ValueError("need at least 5 samples")
    d = np.empty_like(y)
    d[2:-2] = (-y[4:] + 8.0 * y[3:-1] - 8.0 * y[1:-3] + y[:-4]) / (12.0 * dx)
    d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * dx)
    d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * dx)
    d[-2] = (3.0 * y[-1] + 10.0 * y[-2] - 18.0 * y[-3] + 6.0 * y[-4] - y[-5]) / (12.0 * dx)
    d[-1] = (25.0 * y[-1] - 48.0 * y[-2] + 36.0 * y[-3] - 16.0 * y[-4] + 3.0 * y[-5]) / (12.0 * dx)
    return d


def singular_profile(params: ProblemParams, cutoff: float = 20.0, n: int = 4001) -> Profile:
    """The constant equator profile h = 0 sampled on the standard grid."""
    g = symmetric_grid(cutoff, n)
    z = np.zeros_like(g)
    return Profile(g, z, z.copy(), params, symmetry_class="even",
                   residual_norm=0.0, zero_count=0, provenance="singular equator map")


# -- pointwise quantities ---------------------------------------------------

def el_residual(x, h, dh, d2h, params: ProblemParams):
    """Left-hand side of the profile equation at given samples."""
    m, om = params.m, params.omega
    return d2h - (m - 1) * np.tanh(x) * dh + 0.5 * om * (1.0 + params.nu_at(x)) * np.sin(2.0 * np.asarray(h, dtype=float))


def lyapunov_W(x, h, dh, params: ProblemParams):
    """W = (1/2)(h')^2 + (omega/2)(1+nu) sin^2 h.

    Along solutions W' = (m-1) tanh(x) (h')^2 + (omega/2) nu' sin^2 h, so W
    is nondecreasing for x > 0 once nu's support is passed.
    """
    om = params.omega
    return 0.5 * np.asarray(dh, dtype=float) ** 2 + 0.5 * om * (1.0 + params.nu_at(x)) * np.sin(np.asarray(h, dtype=float)) ** 2


def energy_comparison_integrand(h):
    """(1/2) h sin(2h) + cos^2 h, which is <= 1 on |h| <= pi/2.

    Equality holds only at h = 0; this is the pointwise fact behind the
    strict energy bound E(h) < E(singular) for critical points other than
    the equator map.
    """
    h = np.asarray(h, dtype=float)
    return 0.5 * h * np.sin(2.0 * h) + np.cos(h) ** 2


# -- energy and norms --------------------------------------------------------

def energy_arrays(grid, h, dh, params: ProblemParams) -> float:
    """Weighted energy of sampled (h, dh) arrays on a grid, by Simpson."""
    w = weight(grid, params.m)
    nu = params.nu_at(grid)
    integrand = 0.5 * (dh ** 2 + params.omega * (1.0 + nu) * np.cos(h) ** 2) * w
    return float(simpson(integrand, x=grid))


def energy(prof: Profile) -> float:
    """Composite-Simpson value of the weighted energy over the stored grid.

    The tail for |x| > cutoff is dropped: for connecting profiles the
    integrand there is exponentially small (see energy_tail_bound); for the
    equator branch choose the cutoff large enough that the weight tail is
    below the quadrature target.
    """
    return energy_arrays(prof.grid, prof.h, prof.dh, prof.params)


def energy_tail_bound(prof: Profile) -> float:
    """Bound on the dropped |x| > cutoff energy tail.

    Assumes the profile keeps approaching +-pi/2 at the linearised rate
    beyond the grid, i.e. pi/2 - |h| <= gap * exp(lam (x - X)) with the gap
    read off at the boundary.  Uses sech(x) <= 2 sech(X) exp(-(x-X)).
    """
    p = prof.params
    lam = asymptotic_exponents(p).decay_exponent_plus
    m1 = p.m - 1
    nu_max = 0.0 if p.nu is None else float(np.max(np.abs(p.nu.values)))
    x_b = prof.cutoff
    total = 0.0
    for h_b in (prof.h[0], prof.h[-1]):
        gap = HALF_PI - abs(float(h_b))
        total += (0.5 * (lam * lam + p.omega * (1.0 + nu_max)) * gap * gap
                  * weight(x_b, p.m) * 2.0 ** m1 / (m1 + 2.0 * abs(lam)))
    return total


def singular_energy(params: ProblemParams, *, cutoff: float = 40.0, n: int = 16001) -> float:
    """Energy of the equator map h = 0.

    The unperturbed part is exact,
        (omega/2) int sech^(m-1) = (omega/2) sqrt(pi) Gamma((m-1)/2) / Gamma(m/2),
    and a nonzero nu adds (omega/2) int nu sech^(m-1), evaluated by Simpson
    on a grid wide enough to contain the support.
    """
    m, om = params.m, params.omega
    base = 0.5 * om * math.sqrt(math.pi) * math.exp(gammaln((m - 1) / 2.0) - gammaln(m / 2.0))
    if params.nu is None:
        return base
    r = params.nu.support_radius
    g = symmetric_grid(max(cutoff, 1.25 * r), n)
    corr = 0.5 * om * simpson(params.nu(g) * weight(g, m), x=g)
    return base + float(corr)


def weighted_norm(prof: Profile) -> float:
    """Norm of the weighted space: sqrt(int [(h')^2 + h^2] sech^(m-1) dx)."""
    w = weight(prof.grid, prof.params.m)
    return float(math.sqrt(simpson((prof.dh ** 2 + prof.h ** 2) * w, x=prof.grid)))


# -- coordinate transforms ----------------------------------------------------

def theta_to_x(theta):
    """x = log tan((theta + pi/2)/2) for |theta| < pi/2."""
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) >= HALF_PI):
        raise ValueError("theta must lie strictly inside (-pi/2, pi/2)")
    return np.log(np.tan(0.5 * (theta + HALF_PI)))


def x_to_theta(x):
    """Inverse transform, theta = 2 atan(exp x) - pi/2."""
    return 2.0 * np.arctan(np.exp(np.asarray(x, dtype=float))) - HALF_PI


def theta_samples(prof: Profile):
    """Display helper: the profile against the polar angle, (theta_i, f_i)."""
    return x_to_theta(prof.grid), prof.h.copy()


# -- resampling ---------------------------------------------------------------

def resample(prof: Profile, cutoff: float, n: int) -> Profile:
    """Profile on a new symmetric grid.

    Inside the original window a cubic spline is used.  Beyond it the
    profile is continued with the linearised tail toward +-pi/2 when the
    boundary value is close to +-pi/2, and as a constant otherwise (the
    equator branch has no decaying tail to follow).
    """
    g_new = symmetric_grid(cutoff, n)
    sp = CubicSpline(prof.grid, prof.h)
    x0 = prof.cutoff
    lam = asymptotic_exponents(prof.params).decay_exponent_plus
    h_new = np.empty_like(g_new)
    dh_new = np.empty_like(g_new)
    inside = np.abs(g_new) <= x0
    h_new[inside] = sp(g_new[inside])
    dh_new[inside] = sp(g_new[inside], 1)
    for side, sel in ((+1, g_new > x0), (-1, g_new < -x0)):
        if not np.any(sel):
            continue
        h_b = float(prof.h[-1] if side > 0 else prof.h[0])
        if abs(h_b) >= 0.5 * HALF_PI:
            limit = math.copysign(HALF_PI, h_b)
            gap = limit - h_b
            # tail model: h = limit - gap * exp(lam (side*x - x0)), applied on each side
            expo = np.exp(lam * (side * g_new[sel] - x0))
            h_new[sel] = limit - gap * expo
            dh_new[sel] = -side * lam * gap * expo
        else:
            h_new[sel] = h_b
            dh_new[sel] = 0.0
    return Profile(g_new, h_new, dh_new, prof.params,
                   symmetry_class=prof.symmetry_class,
                   residual_norm=prof.residual_norm,
                   zero_count=prof.zero_count,
                   provenance=prof.provenance + f"; resampled to X={cutoff}, N={n}")
