"""Lipschitz re-profiling of a cusp profile by monotone boundary inversion.

For a profile psi the map g(t) = t + psi(t) is strictly increasing but
may jump.  Solving t + r = (1 + psi(1)) * t_hat for the boundary pair
(t, r), with r filling the jump gap [psi(t), psi(t+)] when the target
lands inside one, produces a new profile hat_psi(t_hat) = r that is
Lipschitz with constant 1 + psi(1): the jump intervals are traversed
with slope exactly 1 + psi(1), and continuity stretches move slower.

psi is extended by zero for t <= 0, so targets below inf g resolve to a
jump pair at t = 0 and hat_psi stays positive all the way down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ProfileDomainError, ProfileFormatError
from .profiles import CuspProfile, LinearProfile, StepProfile

DEFAULT_TOL = 1e-12
MAX_BISECT_ITER = 200


@dataclass(frozen=True)
class HatPair:
    """Boundary pair solving t + r = (1 + psi(1)) * t_hat."""

    t_hat: float
    t_component: float
    r_component: float
    on_jump: bool

    @property
    def radial_dominant(self) -> bool:
        """True when the radial part of the pair dominates the axial one."""
        return self.r_component >= self.t_component


def _g_values(psi: CuspProfile, t: np.ndarray) -> np.ndarray:
    """g(t) = t + psi(t), with the zero extension psi(t) = 0 for t <= 0."""
    out = np.array(t, dtype=float, copy=True)
    pos = t > 0.0
    if np.any(pos):
        out[pos] += psi.value(t[pos])
    return out


def _solve_bisect(psi: CuspProfile, t_hats: np.ndarray, tol: float):
    """Vectorized bisection of g on [0, 1]; handles jump gaps.

    Bisection is the only safe choice here: g is monotone but need not
    be continuous, so derivative-based methods can cycle across a jump.
    """
    psi1 = psi.value_at_1
    targets = (1.0 + psi1) * t_hats
    lo = np.zeros_like(targets)
    hi = np.ones_like(targets)
    for _ in range(MAX_BISECT_ITER):
        mid = 0.5 * (lo + hi)
        gm = _g_values(psi, mid)
        if not np.all(np.isfinite(gm)):
            bad = mid[~np.isfinite(gm)][0]
            raise ConvergenceError(f"non-finite profile value near t={bad}",
                                   bracket=(float(bad), float(bad)))
        below = gm <= targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) <= 1e-17:
            break
    residual = targets - _g_values(psi, lo)
    width = hi - lo
    unresolved = (residual > tol) & (width > tol)
    if np.any(unresolved):
        i = int(np.argmax(unresolved))
        raise ConvergenceError(
            f"bisection stalled at t_hat={t_hats[i]}",
            bracket=(float(lo[i]), float(hi[i])),
        )
    t_sol = lo.copy()
    on_jump = residual > tol
    if np.any(on_jump):
        # the bracket collapsed onto a jump of psi; snap to the profile's
        # breakpoint when one sits inside the collapsed bracket
        breaks = psi.breakpoints()
        if breaks.size:
            idx = np.searchsorted(breaks, lo[on_jump])
            for cand in (idx - 1, idx):
                ok = (cand >= 0) & (cand < breaks.size)
                b = np.where(ok, breaks[np.clip(cand, 0, breaks.size - 1)], np.nan)
                snap = ok & (np.abs(b - lo[on_jump]) <= np.maximum(tol, 1e-14))
                sub = t_sol[on_jump]
                sub[snap] = b[snap]
                t_sol[on_jump] = sub
        # targets below inf g resolve to the zero-extension jump at t = 0
        t_sol[on_jump & (lo <= 1e-17)] = 0.0
    r_sol = targets - t_sol
    return t_sol, r_sol, on_jump


def _solve_step(psi: StepProfile, t_hats: np.ndarray):
    """Closed-form pairs for step profiles via piece lookup."""
    psi1 = psi.value_at_1
    targets = (1.0 + psi1) * t_hats
    hi_vals = psi.breaks + psi.values  # g at right endpoints, strictly increasing
    idx = np.searchsorted(hi_vals, targets, side="left")
    idx = np.minimum(idx, psi.breaks.size - 1)
    left_break = np.where(idx > 0, psi.breaks[np.maximum(idx - 1, 0)], 0.0)
    lo_open = left_break + psi.values[idx]  # g just right of the piece's left end
    inside = targets > lo_open
    t_sol = np.where(inside, targets - psi.values[idx], left_break)
    r_sol = targets - t_sol
    # on_jump is strict: r exactly at the right limit counts as a plain solve
    return t_sol, r_sol, targets < lo_open


def _solve_many(psi: CuspProfile, t_hats: np.ndarray, tol: float):
    t_hats = np.asarray(t_hats, dtype=float)
    if np.any(t_hats <= 0.0) or np.any(t_hats > 1.0):
        bad = t_hats[(t_hats <= 0.0) | (t_hats > 1.0)]
        raise ProfileDomainError(f"t_hat outside (0, 1]: {np.atleast_1d(bad)[0]!r}")
    if isinstance(psi, LinearProfile):
        # linear profiles are fixed points: t + c t = (1 + c) t_hat forces t = t_hat
        return t_hats.copy(), psi.slope * t_hats, np.zeros(t_hats.shape, dtype=bool)
    at_end = t_hats == 1.0
    if isinstance(psi, StepProfile):
        t_sol, r_sol, jump = _solve_step(psi, t_hats)
    else:
        t_sol, r_sol, jump = _solve_bisect(psi, t_hats, tol)
    if np.any(at_end):
        # endpoint convention: hat_psi(1) = psi(1) via the pair (1, psi(1))
        t_sol[at_end] = 1.0
        r_sol[at_end] = psi.value_at_1
        jump[at_end] = False
    return t_sol, r_sol, jump


def solve_hat_pair(psi: CuspProfile, t_hat: float, tol: float = DEFAULT_TOL) -> HatPair:
    """Solve for the unique boundary pair at a single t_hat in (0, 1]."""
    if not tol > 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    t_sol, r_sol, jump = _solve_many(psi, np.atleast_1d(float(t_hat)), tol)
    return HatPair(float(t_hat), float(t_sol[0]), float(r_sol[0]), bool(jump[0]))


def hat_psi(psi: CuspProfile, t_hat: float, tol: float = DEFAULT_TOL) -> float:
    """Value of the Lipschitz re-profiling at a single point."""
    return solve_hat_pair(psi, t_hat, tol).r_component


def hat_values(psi: CuspProfile, t_hats, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorized hat_psi over an array of points in (0, 1]."""
    t_hats = np.asarray(t_hats, dtype=float)
    _, r_sol, _ = _solve_many(psi, np.atleast_1d(t_hats), tol)
    return r_sol.reshape(t_hats.shape) if t_hats.ndim else float(r_sol[0])


def hat_profile(psi: CuspProfile, grid, tol: float = DEFAULT_TOL) -> StepProfile:
    """Materialize the re-profiling on a grid as a tabulated profile.

    The grid must ascend and end at 1.0 so the table is total on (0, 1].
    The result carries lipschitz_constant = 1 + psi(1), the exact bound
    of the underlying function (the table itself is a step sampling).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ProfileFormatError("grid must be a nonempty 1-d array")
    if np.any(np.diff(grid) <= 0.0):
        raise ProfileFormatError("grid must be strictly ascending")
    if grid[-1] != 1.0:
        raise ProfileFormatError(f"grid must end at 1.0, got {grid[-1]}")
    try:
        vals = hat_values(psi, grid, tol)
    except ConvergenceError as err:
        raise ConvergenceError(f"hat solve failed on grid: {err}",
                               bracket=err.bracket) from err
    dbl = psi.doubling_constant
    return StepProfile(grid, np.maximum.accumulate(vals), kind="tabulated",
                       lipschitz_constant=1.0 + psi.value_at_1,
                       doubling_constant=None if dbl is None else max(2.0, dbl))


class LipschitzizedProfile(CuspProfile):
    """Continuous on-demand view of the re-profiled cusp.

    Evaluation solves the boundary pair per query point (with a
    duplicate-collapsing pass, so structured grids cost one solve per
    distinct abscissa).  Left and right limits coincide: the function
    is Lipschitz with constant 1 + psi(1).
    """

    kind = "lipschitzized"

    def __init__(self, source: CuspProfile, tol: float = DEFAULT_TOL):
        self.source = source
        self.tol = float(tol)
        dbl = source.doubling_constant
        self.doubling_constant = None if dbl is None else max(2.0, dbl)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t)
        uniq, inverse = np.unique(flat, return_inverse=True)
        _, r_sol, _ = _solve_many(self.source, uniq, self.tol)
        out = r_sol[inverse].reshape(flat.shape)
        return out.reshape(t.shape) if t.ndim else float(out[0])

    def right_limit(self, t):
        return self.value(t)

    @property
    def lipschitz_constant(self):
        return 1.0 + self.source.value_at_1

    def __repr__(self):
        return f"LipschitzizedProfile({self.source!r})"


@dataclass(frozen=True)
class MonotoneQuotientResult:
    ok: bool
    violation: tuple | None  # (t_hat_1, t_hat_2, q1, q2)


def verify_monotone_quotient(psi: CuspProfile, grid, tol: float = DEFAULT_TOL,
                             rel_slack: float = 1e-9) -> MonotoneQuotientResult:
    """Check hat_psi(t)/t is nondecreasing across the grid.

    Meaningful under the hypothesis that psi(t)/t is itself
    nondecreasing; on other inputs a False result documents the
    hypothesis dependence rather than a solver defect.
    """
    grid = np.sort(np.asarray(grid, dtype=float))
    q = hat_values(psi, grid, tol) / grid
    drop = q[1:] < q[:-1] * (1.0 - rel_slack) - tol
    if np.any(drop):
        i = int(np.argmax(drop))
        return MonotoneQuotientResult(
            False, (float(grid[i]), float(grid[i + 1]), float(q[i]), float(q[i + 1]))
        )
    return MonotoneQuotientResult(True, None)


@dataclass(frozen=True)
class DoublingTransferResult:
    ok: bool
    bound: float
    max_ratio: float
    argmax: float | None


def verify_doubling_transfer(psi: CuspProfile, grid, c_psi: float | None = None,
                             tol: float = DEFAULT_TOL) -> DoublingTransferResult:
    """Check hat_psi(2t) <= max(2, C) * hat_psi(t) on the admissible range.

    C defaults to the profile's stored doubling constant.  Only grid
    points with t <= 1 / (2 (1 + psi(1))) are testable, since the pair
    at 2t must exist.
    """
    if c_psi is None:
        c_psi = psi.doubling_constant
    if c_psi is None:
        raise ValueError("profile has no doubling constant; pass c_psi explicitly")
    grid = np.asarray(grid, dtype=float)
    psi1 = psi.value_at_1
    grid = grid[(grid > 0.0) & (grid <= 1.0 / (2.0 * (1.0 + psi1)))]
    if grid.size == 0:
        raise ValueError("no grid points inside (0, 1/(2(1+psi(1)))]")
    h1 = hat_values(psi, grid, tol)
    h2 = hat_values(psi, 2.0 * grid, tol)
    ratios = h2 / h1
    bound = max(2.0, float(c_psi))
    i = int(np.argmax(ratios))
    # additive slack: each hat value carries up to tol of absolute solver
    # error, which dominates the ratio near the tip where values vanish
    ok = np.max(h2 - bound * h1) <= (1.0 + bound) * tol
    return DoublingTransferResult(bool(ok), bound, float(ratios[i]), float(grid[i]))
