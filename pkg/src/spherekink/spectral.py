"""Second-variation analysis: Morse index, nullity, and witness subspaces.

The Hessian of the weighted energy at a profile h acts on variations v that
vanish at the ends.  Substituting w = v sech^((m-1)/2)x turns the weighted
form into the flat quadratic form of a Schrodinger operator -w'' + V w with

    V(x) = (m-1)^2/4 - ((m-1)^2/4 + (m-1)/2) sech^2 x - omega (1+nu) cos(2h).

Index and nullity are then read off the tridiagonal central-difference
matrix of that operator by Sylvester inertia counts (number of negative
pivots of the LDL^T factorisation of A - sigma I equals the number of
eigenvalues below sigma), which is exact in integer arithmetic terms: no
iterative eigensolve is trusted for counting.  Dirichlet truncation at the
grid ends can only undercount negative directions, so reported indices are
certified lower bounds, checked for stability under domain growth.

For the equator branch, where V tends to (m-1)^2/4 - omega < 0 at both
ends, families of disjoint tent functions placed in the far field give an
explicit negative-definite subspace of any requested dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import solve_banded

from .core import (
    ProblemParams,
    Profile,
    derivative_samples,
    energy_arrays,
    sech,
    singular_profile,
    weight,
)


@dataclass(frozen=True)
class SchrodingerProblem:
    """Flat-form operator -d^2/dx^2 + V on a uniform grid, Dirichlet ends."""

    grid: np.ndarray
    potential: np.ndarray
    boundary: str
    provenance: str = ""

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.potential, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 5:
            raise ValueError("grid and potential must be matching 1-d arrays, >= 5 samples")
        if not np.all(np.isfinite(v)):
            raise ValueError("potential must be finite")
        if self.boundary != "dirichlet":
            raise ValueError("only Dirichlet truncation is supported")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "potential", v)

    @property
    def dx(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def cutoff(self) -> float:
        return float(self.grid[-1])

    @property
    def n(self) -> int:
        return int(self.grid.size)


def potential_samples(x, h, params: ProblemParams) -> np.ndarray:
    m1 = params.m - 1
    corner = 0.25 * m1 * m1
    return (corner - (corner + 0.5 * m1) * sech(x) ** 2
            - params.omega * (1.0 + params.nu_at(x)) * np.cos(2.0 * h))


def build_schrodinger(prof: Profile) -> SchrodingerProblem:
    """Potential of the flat-form Hessian along the profile's own grid."""
    v = potential_samples(prof.grid, prof.h, prof.params)
    return SchrodingerProblem(prof.grid, v, "dirichlet",
                              provenance=f"m={prof.params.m} omega={prof.params.omega:g} "
                                         f"class={prof.symmetry_class} zeros={prof.zero_count}")


# -- inertia counting ---------------------------------------------------------

def _tridiag(problem: SchrodingerProblem):
    """Main diagonal and off-diagonal of the interior-node FD matrix."""
    dx = problem.dx
    main = 2.0 / dx ** 2 + problem.potential[1:-1]
    off = -1.0 / dx ** 2
    return main, off

def _sturm_pass(main, off, shift, tiny):
    """Negative pivots of LDL^T of (T - shift I); None on a near-zero pivot."""
    count = 0
    piv = main[0] - shift
    if abs(piv) < tiny:
        return None
    if piv < 0:
        count = 1
    off2 = off * off
    for a in main[1:]:
        piv = a - shift - off2 / piv
        if abs(piv) < tiny:
            return None
        if piv < 0:
            count += 1
    return count


def negative_count(problem: SchrodingerProblem, shift: float = 0.0) -> int:
    """Number of eigenvalues of the Dirichlet FD matrix strictly below shift.

    A pivot falling within roundoff of zero means shift is (numerically) an
    eigenvalue of a leading submatrix; the count is retried at slightly
    perturbed shifts, which cannot change the answer for spectra at a
    healthy distance from shift.
    """
    main, off = _tridiag(problem)
    scale = float(np.max(np.abs(main))) + 2.0 * abs(off) + abs(shift)
    tiny = 1e-14 * scale
    for eps in (0.0, 1e-12, -1e-12, 1e-10, -1e-10):
        c = _sturm_pass(main, off, shift + eps * scale, tiny)
        if c is not None:
            return c
    raise RuntimeError(f"inertia count kept hitting near-zero pivots at shift {shift!r}")


def eigenvalues_below(problem: SchrodingerProblem, count: int) -> np.ndarray:
    """Lowest `count` eigenvalues, by Sturm bisection plus a Rayleigh polish."""
    if count <= 0:
        return np.zeros(0)
    main, off = _tridiag(problem)
    lo = float(np.min(problem.potential)) - 1.0
    hi = float(np.max(main)) + 2.0 * abs(off) + 1.0
    out = np.empty(count)
    for j in range(1, count + 1):
        a, b = lo, hi
        for _ in range(90):
            mid = 0.5 * (a + b)
            if negative_count(problem, mid) >= j:
                b = mid
            else:
                a = mid
            if b - a <= 1e-13 * max(1.0, abs(b)):
                break
        out[j - 1] = _rayleigh_polish(main, off, 0.5 * (a + b))
        lo = a
    return out


def _rayleigh_polish(main, off, sigma):
    """Two inverse-iteration steps at sigma, then the Rayleigh quotient."""
    n = main.size
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[2, :-1] = off
    # start vector with no symmetry to be orthogonal to
    x = np.sin(0.7391 * np.arange(1, n + 1)) + 0.25
    x /= np.linalg.norm(x)
    shift = sigma
    for _ in range(3):
        ab[1, :] = main - shift
        try:
            y = solve_banded((1, 1), ab, x)
        except np.linalg.LinAlgError:
            shift = sigma + 1e-12 * max(1.0, abs(sigma))
            continue
        nrm = np.linalg.norm(y)
        if not np.isfinite(nrm) or nrm == 0.0:
            return sigma
        x = y / nrm
    tx = main * x
    tx[:-1] += off * x[1:]
    tx[1:] += off * x[:-1]
    return float(x @ tx)


# -- index / nullity reports --------------------------------------------------

@dataclass(frozen=True)
class SpectralReport:
    index: int
    nullity_estimate: int
    leading_eigenvalues: tuple
    cutoff: float
    n: int
    null_band: float
    band_sensitivity: tuple   # ((band, nullity at that band), ...)
    flags: tuple

    @property
    def discretization(self):
        return (self.cutoff, self.n, self.null_band)

    @property
    def extended_index(self) -> int:
        return self.index + self.nullity_estimate


def schrodinger_index(problem: SchrodingerProblem, *, null_band: float = 1e-6,
                      n_leading: int | None = None) -> SpectralReport:
    """Index = eigenvalues below -null_band; nullity = those inside the band.

    Discrete nullity is tolerance-relative, so the count is re-checked at
    one band wider and one narrower; disagreement is flagged, not fatal.
    """
    if null_band <= 0:
        raise ValueError("null_band must be positive")
    index = negative_count(problem, -null_band)

    def nullity_at(band):
        return negative_count(problem, band) - negative_count(problem, -band)

    nullity = nullity_at(null_band)
    sensitivity = tuple((b, nullity_at(b)) for b in (10.0 * null_band, 0.1 * null_band))
    flags = []
    if nullity >= 2:
        flags.append(f"nullity_estimate {nullity} >= 2: unexpected for an isolated critical point")
    if any(nb != nullity for _, nb in sensitivity):
        flags.append("nullity depends on the null band width: "
                     + ", ".join(f"{b:g} -> {nb}" for b, nb in sensitivity))
    if n_leading is None:
        n_leading = min(max(index + 1, 3), 8)
    lead = eigenvalues_below(problem, n_leading)
    return SpectralReport(index=index, nullity_estimate=nullity,
                          leading_eigenvalues=tuple(float(v) for v in lead),
                          cutoff=problem.cutoff, n=problem.n, null_band=null_band,
                          band_sensitivity=sensitivity, flags=tuple(flags))


def morse_index(prof: Profile, *, null_band: float = 1e-6,
                n_leading: int | None = None) -> SpectralReport:
    if prof.n < 1000:
        raise ValueError("grid too coarse for a trustworthy count: need N >= 1000 "
                         "(resample the profile first)")
    return schrodinger_index(build_schrodinger(prof), null_band=null_band,
                             n_leading=n_leading)


def truncated_singular_count(params: ProblemParams, cutoff: float, *,
                             nodes_per_unit: int = 100) -> int:
    """Negative-direction count of the equator branch truncated at the cutoff.

    Node density is fixed per unit length so counts at different cutoffs are
    comparable; under the instability condition the count grows without
    bound as the cutoff does.
    """
    n = 2 * int(round(nodes_per_unit * cutoff)) + 1
    prof = singular_profile(params, cutoff=cutoff, n=n)
    return negative_count(build_schrodinger(prof), 0.0)


def report_to_doc(rep: SpectralReport) -> dict:
    return {
        "index": rep.index,
        "nullity_estimate": rep.nullity_estimate,
        "leading_eigenvalues": list(rep.leading_eigenvalues),
        "cutoff": rep.cutoff,
        "n": rep.n,
        "null_band": rep.null_band,
        "band_sensitivity": [[b, c] for b, c in rep.band_sensitivity],
        "flags": list(rep.flags),
    }


# -- the Hessian as a bilinear form -------------------------------------------

def _check_test_function(prof: Profile, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != prof.grid.shape:
        raise ValueError("test function must be sampled on the profile grid")
    if max(abs(float(v[0])), abs(float(v[-1]))) > 1e-12:
        raise ValueError("test function must vanish at the grid endpoints")
    return v


def hessian_form(prof: Profile, v, w) -> float:
    """Second variation of the energy at prof, evaluated on directions v, w.

    Integrand: [v'w' - omega (1+nu) cos(2h) v w] sech^(m-1) x, by Simpson on
    the profile grid with fourth-order sampled derivatives.
    """
    v = _check_test_function(prof, v)
    w = _check_test_function(prof, w)
    dx = prof.dx
    dv = derivative_samples(v, dx)
    dw = derivative_samples(w, dx)
    p = prof.params
    integrand = (dv * dw - p.omega * (1.0 + p.nu_at(prof.grid))
                 * np.cos(2.0 * prof.h) * v * w) * weight(prof.grid, p.m)
    return float(simpson(integrand, x=prof.grid))


def schrodinger_form(problem: SchrodingerProblem, w1, w2) -> float:
    """Flat form int [w1' w2' + V w1 w2] dx for endpoint-vanishing samples."""
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    if w1.shape != problem.grid.shape or w2.shape != problem.grid.shape:
        raise ValueError("arguments must be sampled on the problem grid")
    d1 = derivative_samples(w1, problem.dx)
    d2 = derivative_samples(w2, problem.dx)
    integrand = d1 * d2 + problem.potential * w1 * w2
    return float(simpson(integrand, x=problem.grid))


def hessian_fd_check(prof: Profile, v, t: float) -> float:
    """Relative gap between a centred second difference of the energy and
    the Hessian form: |(E(h+tv)+E(h-tv)-2E(h))/t^2 - Q(v,v)| / |Q(v,v)|."""
    v = _check_test_function(prof, v)
    if not 0 < t < 1:
        raise ValueError("step t must lie in (0, 1)")
    dv = derivative_samples(v, prof.dx)
    e0 = energy_arrays(prof.grid, prof.h, prof.dh, prof.params)
    ep = energy_arrays(prof.grid, prof.h + t * v, prof.dh + t * dv, prof.params)
    em = energy_arrays(prof.grid, prof.h - t * v, prof.dh - t * dv, prof.params)
    second = (ep + em - 2.0 * e0) / (t * t)
    q = hessian_form(prof, v, v)
    return abs(second - q) / abs(q)


# -- witness families at the equator branch -----------------------------------

@dataclass(frozen=True)
class WitnessFunction:
    """Tent of slope +-1 supported on [start, start + 2 half_width], optionally
    combined with its mirror image (symmetry 'even'/'odd')."""

    start: float
    half_width: float
    symmetry: str = "none"

    def _tent(self, x):
        peak = self.start + self.half_width
        return np.maximum(0.0, self.half_width - np.abs(x - peak))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.symmetry == "none":
            return self._tent(x)
        if self.symmetry == "even":
            return self._tent(x) + self._tent(-x)
        return self._tent(x) - self._tent(-x)


@dataclass(frozen=True)
class WitnessFamily:
    """Pairwise-orthogonal negative directions for the equator-branch Hessian.

    Supports are consecutive and touch only at endpoints, so the Gram
    matrix of the flat form is exactly diagonal; quadrature enters only
    through the sech^2 dent in the potential, and that error is estimated
    by grid halving and reported.
    """

    params: ProblemParams
    symmetry: str
    epsilon: float
    threshold_radius: float
    half_width: float
    starts: tuple
    functions: tuple
    gram_diagonal: tuple
    quadrature_error: float

    @property
    def size(self) -> int:
        return len(self.functions)

    def gram(self) -> np.ndarray:
        return np.diag(np.asarray(self.gram_diagonal, dtype=float))


def _require_unstable(params: ProblemParams):
    m1 = params.m - 1
    floor = 0.25 * m1 * m1 - params.omega
    if floor >= 0:
        raise ValueError(
            f"no witness family exists: the far-field potential floor "
            f"(m-1)^2/4 - omega = {floor:g} is nonnegative, so tents far out "
            f"cannot be negative directions")
    return floor


def _scan_threshold(params: ProblemParams, epsilon: float) -> float:
    """Smallest K (on a 0.05 mesh) with V < -epsilon beyond it, for h = 0."""
    support = 0.0 if params.nu is None else params.nu.support_radius
    xs = np.arange(0.0, support + 50.0 + 0.05, 0.05)
    v = potential_samples(xs, np.zeros_like(xs), params)
    bad = np.flatnonzero(v >= -epsilon)
    k = 0.0 if bad.size == 0 else float(xs[bad[-1]] + 0.05)
    return max(k, support)


def _tent_sech2_integral(start, a, divisions):
    """int sech^2(x) F(x)^2 dx over [start, start+2a], Simpson on a grid whose
    nodes include the tent's kink, so the piecewise structure is respected."""
    xs = np.linspace(start, start + 2.0 * a, 2 * divisions + 1)
    peak = start + a
    f = np.maximum(0.0, a - np.abs(xs - peak))
    return float(simpson(sech(xs) ** 2 * f * f, x=xs))


def witness_subspace(params: ProblemParams, k: int, *, quad_divisions: int = 64) -> WitnessFamily:
    """k disjoint tents in the far field, each a strictly negative direction.

    With epsilon = |far-field floor|/2 and V < -epsilon beyond K, a tent of
    half-width a with a^2 > 3/epsilon has flat-form value
    2a + int V F^2 <= 2a - 2 epsilon a^3 / 3 < 0; half-width 2 sqrt(3/epsilon)
    is used for margin.  Tent i occupies [K + 2ai, K + 2a(i+1)].
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    floor = _require_unstable(params)
    epsilon = 0.5 * abs(floor)
    a = 2.0 * math.sqrt(3.0 / epsilon)
    kk = _scan_threshold(params, epsilon)

    m1 = params.m - 1
    beta = 0.25 * m1 * m1 + 0.5 * m1
    starts = tuple(kk + 2.0 * a * i for i in range(1, k + 1))
    funcs = []
    diag = []
    quad_err = 0.0
    for c in starts:
        coarse = _tent_sech2_integral(c, a, quad_divisions // 2)
        fine = _tent_sech2_integral(c, a, quad_divisions)
        quad_err = max(quad_err, abs(fine - coarse))
        q = 2.0 * a + floor * (2.0 * a ** 3 / 3.0) - beta * fine
        funcs.append(WitnessFunction(c, a, "none"))
        diag.append(q)
    return WitnessFamily(params=params, symmetry="none", epsilon=epsilon,
                         threshold_radius=kk, half_width=a, starts=starts,
                         functions=tuple(funcs), gram_diagonal=tuple(diag),
                         quadrature_error=quad_err)


def symmetric_witnesses(params: ProblemParams, k: int, symmetry_class: str, *,
                        quad_divisions: int = 64) -> WitnessFamily:
    """Even/odd combinations F(x) +- F(-x) of the plain family.

    Supports sit in x > 0 and their mirrors in x < 0, so the combination
    doubles each diagonal value and keeps the Gram diagonal; the potential
    is even, making even and odd variants degenerate in value.
    """
    if symmetry_class not in ("even", "odd"):
        raise ValueError("symmetry_class must be 'even' or 'odd'")
    base = witness_subspace(params, k, quad_divisions=quad_divisions)
    funcs = tuple(WitnessFunction(f.start, f.half_width, symmetry_class)
                  for f in base.functions)
    return WitnessFamily(params=params, symmetry=symmetry_class,
                         epsilon=base.epsilon, threshold_radius=base.threshold_radius,
                         half_width=base.half_width, starts=base.starts,
                         functions=funcs,
                         gram_diagonal=tuple(2.0 * q for q in base.gram_diagonal),
                         quadrature_error=2.0 * base.quadrature_error)
