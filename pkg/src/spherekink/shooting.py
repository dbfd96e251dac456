"""Shooting construction of connecting profiles, with a Newton finish.

Solutions with a prescribed number of interior zeros are found on the half
line by a two-stage process:

1. Scan the free initial value s (the slope at 0 for odd profiles, the
   height at 0 for even ones) and count zeros of h on (0, cutoff) before
   the trajectory leaves the band |h| <= pi/2 + margin.  The count steps up
   as s decreases; each step is the parameter of a connecting orbit.  The
   step for the requested count is bracketed and refined by bisection.

2. The bracket-midpoint trajectory, mirrored by parity and blended into the
   linearised tail toward +-pi/2, seeds a damped Newton iteration on the
   central-difference discretisation of the full-line boundary value
   problem, with Robin conditions (pi/2 -+ h)' = lambda_- (pi/2 -+ h)
   carrying the exponential decay at the cut ends.

The shooting stage only needs to deliver the topology (zero count and limit
signs); all quantitative accuracy comes from the Newton stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded

from .core import (
    HALF_PI,
    TOL_SYM,
    Profile,
    ProblemParams,
    asymptotic_exponents,
    count_zero_crossings,
    derivative_samples,
    energy,
    lyapunov_W,
    singular_energy,
    symmetric_grid,
)


class OutcomeKind(Enum):
    OVERSHOOT_POSITIVE = "overshoot_positive"
    OVERSHOOT_NEGATIVE = "overshoot_negative"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class ShootingOutcome:
    """Classification of one trajectory: exit direction (if any), number of
    zeros of h on (0, x_exit), and where integration stopped."""

    kind: OutcomeKind
    zero_count_half: int
    x_exit: float
    message: str = ""


@dataclass(frozen=True)
class Trajectory:
    """Half-line integration record; dense evaluation valid on [0, x_end]."""

    h0: float
    dh0: float
    x_end: float
    crossings: tuple
    outcome: ShootingOutcome
    dense: object = None

    def sample(self, xs):
        xs = np.asarray(xs, dtype=float)
        if np.any(xs > self.x_end + 1e-12) or np.any(xs < 0):
            raise ValueError("trajectory sampled outside [0, x_end]")
        if self.dense is None:
            n = xs.shape
            return np.full(n, self.h0), np.full(n, self.dh0)
        y = self.dense(xs)
        return y[0], y[1]


class NoBracketFound(RuntimeError):
    """The requested zero-count transition was not seen in the scanned range."""


class PolishDiverged(RuntimeError):
    """Newton polishing failed to converge or broke an invariant."""


@dataclass(frozen=True)
class SolveRequest:
    """What to solve for and with which discretisation controls.

    Parity ties the symmetry class to the total interior zero count: odd
    profiles have a zero at the origin (odd total), even ones do not (even
    total).  The cutoff must satisfy tanh(cutoff) >= 0.999 so the advection
    coefficient is saturated at the ends.
    """

    params: ProblemParams
    symmetry_class: str
    total_zeros: int
    cutoff: float = 20.0
    grid_size: int = 4001
    exit_margin: float = 1e-3
    bracket_tol: float = 1e-14
    newton_tol: float = 1e-10
    max_newton_iter: int = 25
    boundary_tol: float = 1e-6
    slope_cap: float | None = None
    scan_points: int = 24
    rtol: float = 1e-11
    atol: float = 1e-13

    def __post_init__(self):
        if self.symmetry_class not in ("odd", "even"):
            raise ValueError("symmetry_class must be 'odd' or 'even'")
        if self.total_zeros < 0:
            raise ValueError("total_zeros must be >= 0")
        if self.symmetry_class == "odd" and self.total_zeros % 2 == 0:
            raise ValueError("odd class requires an odd total zero count")
        if self.symmetry_class == "even" and self.total_zeros % 2 == 1:
            raise ValueError("even class requires an even total zero count")
        if math.tanh(self.cutoff) < 0.999:
            raise ValueError("cutoff too small: need tanh(cutoff) >= 0.999")
        if self.grid_size < 5 or self.grid_size % 2 == 0:
            raise ValueError("grid_size must be odd and >= 5")
        if not 0 < self.exit_margin < 0.5:
            raise ValueError("exit_margin must lie in (0, 0.5)")

    @property
    def zeros_half(self) -> int:
        """Zeros requested on the open half line (0, inf)."""
        if self.symmetry_class == "odd":
            return (self.total_zeros - 1) // 2
        return self.total_zeros // 2

    def scan_cap(self) -> float:
        if self.symmetry_class == "even":
            return HALF_PI
        if self.slope_cap is not None:
            return self.slope_cap
        # odd-class slopes of connecting orbits satisfy s^2/2 < omega/2
        return 1.5 * math.sqrt(self.params.omega)


def integrate(h0: float, dh0: float, params: ProblemParams, cutoff: float, *,
              exit_margin: float = 1e-3, rtol: float = 1e-11, atol: float = 1e-13) -> Trajectory:
    """Integrate the profile equation from (h, h')(0) = (h0, dh0) to cutoff.

    Stops at the first exit from |h| <= pi/2 + exit_margin and records the
    zero crossings of h seen before the stop.  Crossing locations come from
    the integrator's root finder on its dense output.
    """
    if abs(h0) > HALF_PI:
        raise ValueError("initial value must satisfy |h0| <= pi/2")
    if h0 == 0.0 and dh0 == 0.0:
        out = ShootingOutcome(OutcomeKind.UNDECIDED, 0, cutoff, "equilibrium at 0")
        return Trajectory(h0, dh0, cutoff, (), out, None)

    m1 = params.m - 1
    om = params.omega
    if params.nu is None:
        def rhs(x, y):
            return (y[1], m1 * math.tanh(x) * y[1] - 0.5 * om * math.sin(2.0 * y[0]))
    else:
        nu = params.nu

        def rhs(x, y):
            return (y[1], m1 * math.tanh(x) * y[1]
                    - 0.5 * om * (1.0 + float(nu(x))) * math.sin(2.0 * y[0]))

    wall = HALF_PI + exit_margin

    def crossing(x, y):
        return y[0]

    def exit_up(x, y):
        return y[0] - wall

    def exit_down(x, y):
        return y[0] + wall

    crossing.terminal = False
    crossing.direction = 0.0
    exit_up.terminal = True
    exit_up.direction = 1.0
    exit_down.terminal = True
    exit_down.direction = -1.0

    sol = solve_ivp(rhs, (0.0, float(cutoff)), (float(h0), float(dh0)),
                    method="DOP853", dense_output=True,
                    events=(crossing, exit_up, exit_down),
                    rtol=rtol, atol=atol,
                    max_step=0.5 / math.sqrt(1.0 + om))

    # drop the event the root finder reports when the start itself sits at h = 0
    crossings = tuple(t for t in sol.t_events[0] if t > 1e-9)
    x_end = float(sol.t[-1])

    if sol.status == 1:
        if len(sol.t_events[1]):
            kind = OutcomeKind.OVERSHOOT_POSITIVE
        else:
            kind = OutcomeKind.OVERSHOOT_NEGATIVE
        out = ShootingOutcome(kind, len(crossings), x_end)
    elif sol.status == 0:
        out = ShootingOutcome(OutcomeKind.UNDECIDED, len(crossings), float(cutoff))
    else:
        out = ShootingOutcome(OutcomeKind.UNDECIDED, len(crossings), x_end,
                              f"integrator stopped early: {sol.message}")
    return Trajectory(float(h0), float(dh0), x_end, crossings, out, sol.sol)


def classify_parameter(s: float, req: SolveRequest) -> ShootingOutcome:
    """Outcome of the trajectory launched with shooting parameter s."""
    return _shoot(s, req).outcome


def _shoot(s: float, req: SolveRequest) -> Trajectory:
    if req.symmetry_class == "odd":
        h0, dh0 = 0.0, float(s)
    else:
        if abs(s) > HALF_PI:
            raise ValueError("even-class parameter must satisfy |s| <= pi/2")
        h0, dh0 = float(s), 0.0
    return integrate(h0, dh0, req.params, req.cutoff,
                     exit_margin=req.exit_margin, rtol=req.rtol, atol=req.atol)


def _scan_values(req: SolveRequest) -> np.ndarray:
    cap = req.scan_cap()
    uniform = cap * np.arange(req.scan_points, 0, -1) / req.scan_points
    geometric = cap * 0.5 ** np.arange(1, 45)
    vals = np.unique(np.concatenate([uniform, geometric]))[::-1]
    return vals


def find_solution(req: SolveRequest, *, sign: int = 1) -> Profile:
    """Connecting profile with the requested parity and total zero count.

    sign = -1 launches the scan with negated shooting parameters and returns
    the pointwise negation of the sign = +1 solution (the two are related by
    the h -> -h symmetry of the energy).  Outside the instability regime the
    solver still runs but labels its output accordingly.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    want = req.zeros_half
    cache: dict[float, Trajectory] = {}

    def shoot(s_mag: float) -> Trajectory:
        t = cache.get(s_mag)
        if t is None:
            t = _shoot(sign * s_mag, req)
            cache[s_mag] = t
        return t

    def count(s_mag: float) -> int:
        return shoot(s_mag).outcome.zero_count_half

    lo = hi = None
    prev = None
    for s in _scan_values(req):
        if count(s) > want:
            if prev is None:
                raise NoBracketFound(
                    f"zero count already exceeds {want} at the scan cap "
                    f"{req.scan_cap():.6g}; raise slope_cap")
            lo, hi = s, prev
            break
        prev = s
    if lo is None:
        raise NoBracketFound(
            f"no transition to zero count > {want} found while scanning down to "
            f"{_scan_values(req)[-1]:.3e}; the requested level may not exist "
            f"for these parameters")

    for _ in range(200):
        if hi - lo <= req.bracket_tol:
            break
        mid = 0.5 * (lo + hi)
        if count(mid) <= want:
            hi = mid
        else:
            lo = mid
    s_star = 0.5 * (lo + hi)
    guess = _initial_guess(shoot(s_star), req, sign)

    lam = asymptotic_exponents(req.params).decay_exponent_plus
    l_plus = sign * (1 if want % 2 == 0 else -1) * HALF_PI
    l_minus = l_plus if req.symmetry_class == "even" else -l_plus
    grid = symmetric_grid(req.cutoff, req.grid_size)
    u, res_norm, iters = _newton(grid, guess, req.params, l_plus, l_minus, lam,
                                 tol=req.newton_tol, max_iter=req.max_newton_iter)

    # parity is preserved by the symmetric discretisation; pin it exactly
    if req.symmetry_class == "odd":
        u = 0.5 * (u - u[::-1])
    else:
        u = 0.5 * (u + u[::-1])
    res_norm = float(np.max(np.abs(_full_residual(grid, u, req.params, l_plus, l_minus, lam))))
    if res_norm > req.newton_tol:
        raise PolishDiverged(f"residual {res_norm:.3e} above tolerance after symmetrisation")

    zeros = count_zero_crossings(u)
    if zeros != req.total_zeros:
        raise PolishDiverged(
            f"polished profile has {zeros} interior zeros, requested {req.total_zeros}")
    gap_r = HALF_PI - abs(float(u[-1]))
    gap_l = HALF_PI - abs(float(u[0]))
    if max(gap_l, gap_r) > req.boundary_tol:
        raise PolishDiverged(
            f"boundary gap {max(gap_l, gap_r):.3e} exceeds {req.boundary_tol:.1e}; "
            f"increase the cutoff")

    hyp = "" if req.params.hypothesis() else "; outside guaranteed regime"
    prof = Profile(grid, u, derivative_samples(u, grid[1] - grid[0]), req.params,
                   symmetry_class=req.symmetry_class,
                   residual_norm=res_norm, zero_count=zeros,
                   provenance=(f"shooting s*={sign * s_star:.17g} "
                               f"(bracket width {hi - lo:.2e}), newton iters={iters}"
                               f"{hyp}"))
    return prof


def _initial_guess(traj: Trajectory, req: SolveRequest, sign: int) -> np.ndarray:
    """Mirror the midpoint trajectory onto the full grid and blend its tail.

    Beyond the last requested zero the trajectory is replaced, from the
    point where it first comes within 3 percent of the limit, by the
    linearised approach to +-pi/2.  This removes the spurious departure the
    finite bracket width produces at large x and pins the zero count.
    """
    want = req.zeros_half
    half_n = (req.grid_size + 1) // 2
    xs = np.linspace(0.0, req.cutoff, half_n)
    limit = sign * (1 if want % 2 == 0 else -1) * HALF_PI

    h = np.full(half_n, limit)
    inside = xs <= traj.x_end
    h_in, _ = traj.sample(xs[inside])
    h[inside] = h_in

    t_start = 0.0 if want == 0 else traj.crossings[want - 1] if len(traj.crossings) >= want else (
        traj.crossings[-1] if traj.crossings else 0.0)
    lam = asymptotic_exponents(req.params).decay_exponent_plus
    tail = np.flatnonzero((xs > t_start) & (np.sign(limit) * h >= 0.97 * HALF_PI))
    if tail.size:
        i0 = int(tail[0])
        gap = limit - h[i0]
        h[i0:] = limit - gap * np.exp(lam * (xs[i0:] - xs[i0]))
    np.clip(h, -HALF_PI, HALF_PI, out=h)

    if req.symmetry_class == "odd":
        return np.concatenate([-h[:0:-1], h])
    return np.concatenate([h[:0:-1], h])


# -- Newton stage -------------------------------------------------------------

def _full_residual(grid, u, params, l_plus, l_minus, lam):
    """Discrete residual including the Robin rows (ghost nodes eliminated)."""
    m1 = params.m - 1
    om = params.omega
    dx = grid[1] - grid[0]
    nu = params.nu_at(grid)
    g = np.empty_like(u)
    d2 = ((u[2:] - u[1:-1]) - (u[1:-1] - u[:-2])) / (dx * dx)
    d1 = (u[2:] - u[:-2]) / (2.0 * dx)
    g[1:-1] = d2 - m1 * np.tanh(grid[1:-1]) * d1 \
        + 0.5 * om * (1.0 + nu[1:-1]) * np.sin(2.0 * u[1:-1])
    g[0] = (2.0 * (u[1] - u[0]) + 2.0 * dx * lam * (u[0] - l_minus)) / (dx * dx) \
        + m1 * math.tanh(grid[0]) * lam * (u[0] - l_minus) \
        + 0.5 * om * (1.0 + nu[0]) * math.sin(2.0 * u[0])
    g[-1] = (2.0 * (u[-2] - u[-1]) + 2.0 * dx * lam * (u[-1] - l_plus)) / (dx * dx) \
        - m1 * math.tanh(grid[-1]) * lam * (u[-1] - l_plus) \
        + 0.5 * om * (1.0 + nu[-1]) * math.sin(2.0 * u[-1])
    return g


def _jacobian_banded(grid, u, params, lam):
    m1 = params.m - 1
    om = params.omega
    dx = grid[1] - grid[0]
    nu = params.nu_at(grid)
    n = u.size
    ab = np.zeros((3, n))
    t = np.tanh(grid)
    # interior rows
    ab[0, 2:] = 1.0 / dx ** 2 - m1 * t[1:-1] / (2.0 * dx)          # super
    ab[1, 1:-1] = -2.0 / dx ** 2 + om * (1.0 + nu[1:-1]) * np.cos(2.0 * u[1:-1])
    ab[2, :-2] = 1.0 / dx ** 2 + m1 * t[1:-1] / (2.0 * dx)         # sub
    # Robin rows
    ab[1, 0] = (-2.0 + 2.0 * dx * lam) / dx ** 2 + m1 * t[0] * lam \
        + om * (1.0 + nu[0]) * math.cos(2.0 * u[0])
    ab[0, 1] = 2.0 / dx ** 2
    ab[1, -1] = (-2.0 + 2.0 * dx * lam) / dx ** 2 - m1 * t[-1] * lam \
        + om * (1.0 + nu[-1]) * math.cos(2.0 * u[-1])
    ab[2, -2] = 2.0 / dx ** 2
    return ab


def _newton(grid, u0, params, l_plus, l_minus, lam, *, tol, max_iter):
    u = np.array(u0, dtype=float)
    res = _full_residual(grid, u, params, l_plus, l_minus, lam)
    fnorm = float(np.max(np.abs(res)))
    if fnorm > 1e5:
        raise PolishDiverged(f"initial guess residual {fnorm:.3e} is too rough")
    iters = 0
    while fnorm > tol:
        if iters >= max_iter:
            raise PolishDiverged(f"no convergence after {max_iter} Newton steps "
                                 f"(residual {fnorm:.3e})")
        ab = _jacobian_banded(grid, u, params, lam)
        delta = solve_banded((1, 1), ab, -res)
        step = 1.0
        for _ in range(12):
            u_try = u + step * delta
            res_try = _full_residual(grid, u_try, params, l_plus, l_minus, lam)
            f_try = float(np.max(np.abs(res_try)))
            if f_try < fnorm:
                u, res, fnorm = u_try, res_try, f_try
                break
            step *= 0.5
        else:
            raise PolishDiverged(f"line search stalled at residual {fnorm:.3e}")
        iters += 1
    return u, fnorm, iters


def newton_polish(prof: Profile, req: SolveRequest) -> Profile:
    """Polish an approximate profile on its own grid.

    Limit signs for the Robin conditions are read off the boundary values of
    the input.  The result keeps the input's symmetry class (re-pinned
    exactly when one is declared).
    """
    grid = prof.grid
    lam = asymptotic_exponents(prof.params).decay_exponent_plus
    l_plus = math.copysign(HALF_PI, prof.h[-1])
    l_minus = math.copysign(HALF_PI, prof.h[0])
    u, res_norm, iters = _newton(grid, prof.h, prof.params, l_plus, l_minus, lam,
                                 tol=req.newton_tol, max_iter=req.max_newton_iter)
    if prof.symmetry_class == "odd":
        u = 0.5 * (u - u[::-1])
    elif prof.symmetry_class == "even":
        u = 0.5 * (u + u[::-1])
    res_norm = float(np.max(np.abs(_full_residual(grid, u, prof.params, l_plus, l_minus, lam))))
    return Profile(grid, u, derivative_samples(u, grid[1] - grid[0]), prof.params,
                   symmetry_class=prof.symmetry_class,
                   residual_norm=res_norm,
                   zero_count=count_zero_crossings(u),
                   provenance=prof.provenance + f"; newton polish iters={iters}")


# -- diagnostics --------------------------------------------------------------

@dataclass(frozen=True)
class SolutionDiagnostics:
    """verify_solution output: residuals, boundary gaps, monotonicity of the
    Lyapunov quantity, energy margin below the singular level, symmetry."""

    residual_max: float
    residual_rms: float
    boundary_gap_left: float
    boundary_gap_right: float
    w_violation: float
    energy_value: float
    energy_margin: float
    symmetry_defect: float
    constraint_excess: float
    singular_branch: bool
    failures: tuple
    passed: bool


def verify_solution(prof: Profile, *, residual_tol: float = 1e-8,
                    boundary_tol: float = 1e-6, w_tol: float = 1e-8,
                    sym_tol: float = TOL_SYM) -> SolutionDiagnostics:
    """Independent checks on a claimed connecting profile.

    The equator branch (boundary values far from +-pi/2) is flagged rather
    than scored against the boundary and energy-margin checks it cannot
    meet: it is a genuine critical point but not a connecting profile.
    """
    p = prof.params
    grid, h, dh = prof.grid, prof.h, prof.dh
    dx = grid[1] - grid[0]
    d2 = ((h[2:] - h[1:-1]) - (h[1:-1] - h[:-2])) / (dx * dx)
    d1 = (h[2:] - h[:-2]) / (2.0 * dx)
    r = d2 - (p.m - 1) * np.tanh(grid[1:-1]) * d1 \
        + 0.5 * p.omega * (1.0 + p.nu_at(grid[1:-1])) * np.sin(2.0 * h[1:-1])
    residual_max = float(np.max(np.abs(r)))
    residual_rms = float(np.sqrt(np.mean(r * r)))

    gap_l = float(HALF_PI - abs(h[0]))
    gap_r = float(HALF_PI - abs(h[-1]))
    singular = max(abs(float(h[0])), abs(float(h[-1]))) < 0.25

    support = 0.0 if p.nu is None else p.nu.support_radius
    w = lyapunov_W(grid, h, dh, p)
    right = grid > support
    left = grid < -support
    viol = 0.0
    if np.count_nonzero(right) > 1:
        viol = max(viol, -float(np.min(np.diff(w[right]))))
    if np.count_nonzero(left) > 1:
        viol = max(viol, float(np.max(np.diff(w[left]))))
    w_violation = max(0.0, viol)

    e = energy(prof)
    margin = singular_energy(p) - e
    sym = prof.symmetry_defect()
    excess = max(0.0, prof.sup_norm - HALF_PI)

    failures = []
    if residual_max > residual_tol:
        failures.append(f"residual max {residual_max:.3e} exceeds {residual_tol:.1e}")
    if singular:
        failures.append("boundary values sit on the equator branch, not a connecting profile")
    elif max(gap_l, gap_r) > boundary_tol:
        failures.append(f"boundary gap {max(gap_l, gap_r):.3e} exceeds {boundary_tol:.1e}")
    if w_violation > w_tol:
        failures.append(f"Lyapunov monotonicity violated by {w_violation:.3e}")
    if not singular and margin <= 0:
        failures.append("energy does not sit strictly below the singular level")
    if prof.symmetry_class != "none" and sym > sym_tol:
        failures.append(f"symmetry defect {sym:.3e} exceeds {sym_tol:.1e}")
    if excess > 0:
        failures.append(f"constraint band exceeded by {excess:.3e}")

    return SolutionDiagnostics(
        residual_max=residual_max, residual_rms=residual_rms,
        boundary_gap_left=gap_l, boundary_gap_right=gap_r,
        w_violation=w_violation, energy_value=e, energy_margin=float(margin),
        symmetry_defect=sym, constraint_excess=excess,
        singular_branch=singular, failures=tuple(failures),
        passed=not failures)
