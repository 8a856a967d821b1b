"""Integrability criteria, mechanism arithmetic, and sharpness thresholds.

Which (p, q) exponent pairs admit a bounded extension off a cuspidal
domain is governed by the convergence of a weighted tip integral and a
handful of closed-form inequalities.  Convergence is classified
numerically by a dyadic-tail ratio test: panel integrals over
[2^-k-1, 2^-k] must decay geometrically.  Borderline integrands give an
explicit "inconclusive", never a silent guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .profiles import CuspProfile, PowerProfile

TAIL_LEVELS = 60
RATIO_THRESHOLD = 0.999
RATIO_WINDOW = 8
_PANEL_GAUSS = 16
_HUGE = 1e280
_TINY = 1e-280

CONVERGENT = "convergent"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TailCheck:
    classification: str
    value: float | None      # partial sum, only when convergent
    partial_sum: float
    last_ratio: float | None
    levels: int


def _panel_integral(f, a: float, b: float, breaks) -> float:
    """Gauss integral of f over [a, b], split at interior breakpoints."""
    xi, wt = np.polynomial.legendre.leggauss(_PANEL_GAUSS)
    edges = np.array([a, b])
    inner = breaks[(breaks > a) & (breaks < b)]
    if inner.size:
        edges = np.union1d(edges, inner)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, hal = 0.5 * (lo + hi), 0.5 * (hi - lo)
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            vals = f(mid + hal * xi)
        total += hal * float(np.sum(wt * vals))
    return total


def _classify_tail(panels: list[float]) -> TailCheck:
    arr = np.array(panels)  # panels[k] integrates [2^-k-1, 2^-k]
    levels = arr.size
    finite_sum = float(np.sum(arr[np.isfinite(arr)]))
    if np.any(~np.isfinite(arr)) or np.any(arr > _HUGE):
        return TailCheck(DIVERGENT, None, finite_sum, None, levels)
    tail = arr[-RATIO_WINDOW - 1:]
    if np.all(tail < _TINY):
        # panel masses vanished below representable size
        return TailCheck(CONVERGENT, finite_sum, finite_sum, 0.0, levels)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = tail[1:] / tail[:-1]
    ratios = ratios[np.isfinite(ratios)]
    if ratios.size == 0:
        return TailCheck(INCONCLUSIVE, None, finite_sum, None, levels)
    last = float(ratios[-1])
    if np.max(ratios) <= RATIO_THRESHOLD:
        return TailCheck(CONVERGENT, finite_sum, finite_sum, last, levels)
    if np.min(ratios) >= RATIO_THRESHOLD:
        # no geometric decay: panel masses hold steady or grow
        return TailCheck(DIVERGENT, None, finite_sum, last, levels)
    return TailCheck(INCONCLUSIVE, None, finite_sum, last, levels)


def check_inc1(psi: CuspProfile, s: float, n: int,
               levels: int = TAIL_LEVELS) -> TailCheck:
    """Tip integrability of (t^s / psi(t))^(n/(s-1)) dt/t over (0, 1]."""
    if not s > 1.0:
        raise ValueError(f"s must be > 1, got {s}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    expo = n / (s - 1.0)
    breaks = psi.breakpoints()

    def f(t):
        return (t ** s / psi.value(t)) ** expo / t

    panels = [_panel_integral(f, 2.0 ** -(k + 1), 2.0 ** -k, breaks)
              for k in range(levels)]
    return _classify_tail(panels)


def check_inc2(psi: CuspProfile, s: float, n: int, p: float,
               levels: int = TAIL_LEVELS) -> TailCheck:
    """Log-weighted tip integrability over (0, 1/2].

    The weight |log(psi(t)/t)|^(-alpha) with alpha = (n-2)p/(p+1-n)
    degenerates at t = 1 whenever psi(1) = 1, so both the
    classification and the reported value cover the tail (0, 1/2],
    where the criterion's content lives.
    """
    if not s > 1.0:
        raise ValueError(f"s must be > 1, got {s}")
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if not p > n - 1:
        raise ValueError(f"p must exceed n-1 = {n - 1} for the log weight, got {p}")
    alpha = (n - 2.0) * p / (p + 1.0 - n)
    expo = n / (s - 1.0)
    breaks = psi.breakpoints()

    def f(t):
        base = (t ** s / psi.value(t)) ** expo / t
        return base * np.abs(np.log(psi.value(t) / t)) ** -alpha

    panels = [_panel_integral(f, 2.0 ** -(k + 1), 2.0 ** -k, breaks)
              for k in range(1, levels + 1)]
    return _classify_tail(panels)


@dataclass(frozen=True)
class DoublingCheck:
    max_ratio: float
    bounded: bool
    argmax_t: float


def check_doubling(psi: CuspProfile, grid) -> DoublingCheck:
    """Max of psi(2t)/psi(t) over a grid in (0, 1/2).

    Flags unbounded growth when the ratio climbs monotonically past
    1e6 toward the tip.
    """
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size == 0 or grid[0] <= 0.0 or grid[-1] >= 0.5:
        raise ValueError("grid must lie inside (0, 1/2)")
    with np.errstate(over="ignore", divide="ignore"):
        ratios = np.asarray(psi.value(2.0 * grid), dtype=float) / \
            np.asarray(psi.value(grid), dtype=float)
    i = int(np.argmax(ratios))
    max_ratio = float(ratios[i])
    growing_to_tip = bool(np.all(np.diff(ratios) <= 1e-12))  # sorted by ascending t
    unbounded = (not np.isfinite(max_ratio)) or (max_ratio > 1e6 and growing_to_tip)
    return DoublingCheck(max_ratio, not unbounded, float(grid[i]))


@dataclass(frozen=True)
class Thresholds:
    s1: float | None
    s2: float | None


def thresholds(n: int, p: float, q: float) -> Thresholds:
    """Sharpness exponents: above them the power-cusp domain stops extending.

    s1 applies at q = n-1 (p >= n-1); s2 applies for q < n-1 with
    q <= p < (n-1)q/(n-1-q).  Other parameter combinations raise.
    """
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if q == n - 1:
        if not n - 1 <= p:
            raise ValueError(f"s1 needs p >= n-1 = {n - 1}, got {p}")
        return Thresholds((n * p - (n - 1)) / (n - 1) ** 2, None)
    if q < n - 1:
        limit = (n - 1) * q / (n - 1 - q)
        if not q <= p:
            raise ValueError(f"need q <= p, got p={p}, q={q}")
        if not p < limit:
            raise ValueError(
                f"no finite threshold: p = {p} not < (n-1)q/(n-1-q) = {limit}"
            )
        return Thresholds(None, (p * q + p - q) / (p * q + (n - 1) * (q - p)))
    raise ValueError(f"q must be <= n-1 = {n - 1}, got {q}")


@dataclass(frozen=True)
class AdmissibilityVerdict:
    n: int
    s: float
    p: float
    q: float
    mechanisms: tuple  # subset of ("E1", "E2", "E3", "LimitCase")
    condition_values: dict = field(default_factory=dict)
    thresholds: Thresholds | None = None
    hypothesis_ok: bool | None = None

    @property
    def mechanism(self) -> str:
        return self.mechanisms[0] if self.mechanisms else "None"

    @property
    def admissible(self) -> bool:
        return bool(self.mechanisms)


def admissible_pq(n: int, s: float, p: float, q: float) -> AdmissibilityVerdict:
    """Evaluate every extension mechanism's inequality at fixed (n, s, p, q)."""
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if not s > 1.0:
        raise ValueError(f"s must be > 1, got {s}")
    if not 1.0 <= q <= p:
        raise ValueError(f"need 1 <= q <= p, got p={p}, q={q}")
    e1_p_min = (1.0 + (n - 1) * s) / n
    e1_q_max = n * p / (1.0 + (n - 1) * s)
    e2_p_min = (1.0 + (n - 1) * s) / (2.0 + (n - 2) * s)
    e2_q_max = (1.0 + (n - 1) * s) * p / (1.0 + (n - 1) * s + (s - 1.0) * p)
    e3_p_min = ((n - 1) ** 2 * s + (n - 1)) / n
    limit_p_min = math.inf if q >= n - 1 else (n - 1) * q / (n - 1 - q)

    mechanisms = []
    if e1_p_min <= p and q <= e1_q_max:
        mechanisms.append("E1")
    if e2_p_min <= p and q <= e2_q_max:
        mechanisms.append("E2")
    if e3_p_min <= p and q <= n - 1:
        mechanisms.append("E3")
    if q < n - 1 and p >= limit_p_min:
        mechanisms.append("LimitCase")

    thr = None
    try:
        thr = thresholds(n, p, q)
    except ValueError:
        pass
    return AdmissibilityVerdict(
        n=n, s=float(s), p=float(p), q=float(q), mechanisms=tuple(mechanisms),
        condition_values={"e1_p_min": e1_p_min, "e1_q_max": e1_q_max,
                          "e2_p_min": e2_p_min, "e2_q_max": e2_q_max,
                          "e3_p_min": e3_p_min, "limit_p_min": limit_p_min},
        thresholds=thr,
    )


def power_cusp_admissible(n: int, sigma: float, p: float, q: float):
    """Extension verdict for the power cusp with exponent sigma.

    Optimizes each mechanism over its free comparison exponent s.  The
    plain tip condition holds iff s > sigma strictly; the log-weighted
    one also holds at s = sigma, which closes the q = n-1 frontier.
    Returns (admissible, mechanisms tuple).
    """
    if not sigma > 1.0:
        raise ValueError(f"sigma must be > 1, got {sigma}")
    if not 1.0 <= q <= p:
        raise ValueError(f"need 1 <= q <= p, got p={p}, q={q}")
    mechanisms = []
    # E1: both bounds cap s from above; the q bound is the tighter one
    s_q1 = (n * p / q - 1.0) / (n - 1.0)
    if sigma < s_q1:
        mechanisms.append("E1")
    # E2: p bound caps s only when (n-1) - (n-2)p > 0
    coeff = (n - 1.0) - (n - 2.0) * p
    s_p2 = (2.0 * p - 1.0) / coeff if coeff > 0.0 else math.inf
    denom = p * q + (n - 1.0) * (q - p)
    s_q2 = (p * q + p - q) / denom if denom > 0.0 else math.inf
    if sigma < min(s_p2, s_q2):
        mechanisms.append("E2")
    # E3: log-weighted condition holds at s = sigma itself
    if q <= n - 1 and ((n - 1.0) ** 2 * sigma + (n - 1.0)) / n <= p:
        mechanisms.append("E3")
    if q < n - 1 and p >= (n - 1.0) * q / (n - 1.0 - q):
        mechanisms.append("LimitCase")
    return bool(mechanisms), tuple(mechanisms)


def sweep_power_cusp(n: int, p: float, q: float, sigmas) -> list[dict]:
    """Admissibility sweep over power-cusp exponents, one dict per row.

    Exponents are rounded to 12 decimals so accumulated grid noise
    cannot push a value across an exact frontier.
    """
    rows = []
    thr_s1 = thr_s2 = None
    try:
        thr = thresholds(n, p, q)
        thr_s1, thr_s2 = thr.s1, thr.s2
    except ValueError:
        pass
    from .lipschitzify import verify_monotone_quotient

    hyp_grid = np.geomspace(1e-4, 1.0, 24)
    for sigma in np.round(np.asarray(sigmas, dtype=float), 12):
        ok, mechanisms = power_cusp_admissible(n, float(sigma), p, q)
        psi = PowerProfile(float(sigma)) if sigma > 1.0 else None
        inc1 = check_inc1(psi, float(sigma), n) if psi is not None else None
        inc2 = None
        if psi is not None and p > n - 1:
            inc2 = check_inc2(psi, float(sigma), n, p)
        hypothesis = (verify_monotone_quotient(psi, hyp_grid).ok
                      if psi is not None else "")
        rows.append({
            "sigma": float(sigma),
            "admissible": ok,
            "mechanisms": "+".join(mechanisms) if mechanisms else "None",
            "hypothesis_ok": hypothesis,
            "inc1_self": inc1.classification if inc1 else "",
            "inc1_partial": inc1.partial_sum if inc1 else "",
            "inc2_self": inc2.classification if inc2 else "",
            "inc2_value": "" if (inc2 is None or inc2.value is None) else inc2.value,
            "s1": "" if thr_s1 is None else thr_s1,
            "s2": "" if thr_s2 is None else thr_s2,
        })
    return rows


def frontier_from_sweep(rows: list[dict]) -> float | None:
    """Largest admissible sigma in a sweep (None when none are)."""
    admissible = [row["sigma"] for row in rows if row["admissible"]]
    return max(admissible) if admissible else None
