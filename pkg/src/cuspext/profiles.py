"""Cusp profiles: positive, increasing, left-continuous functions on (0, 1].

A profile psi describes the opening radius of an outward cuspidal domain.
Analytic kinds (power, linear) carry exact one-sided limits; step and
tabulated kinds are left-continuous step functions and are never
interpolated between breakpoints, so jump semantics stay exact.
"""

from __future__ import annotations

import csv
import io
from abc import ABC, abstractmethod

import numpy as np

from .errors import ProfileDomainError, ProfileFormatError

_T_EPS = 1e-15


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0) or np.any(t > 1.0 + _T_EPS):
        bad = t[(t <= 0.0) | (t > 1.0 + _T_EPS)]
        raise ProfileDomainError(
            f"profile argument outside (0, 1]: {np.atleast_1d(bad)[0]!r}"
        )
    return t


class CuspProfile(ABC):
    """Common interface for cusp profiles.

    ``value(t)`` returns psi(t), which equals the left limit by
    left-continuity; ``right_limit(t)`` returns lim_{s->t+} psi(s), with
    the convention right_limit(1) = psi(1).
    """

    kind: str
    doubling_constant: float | None = None

    @abstractmethod
    def value(self, t):
        ...

    @abstractmethod
    def right_limit(self, t):
        ...

    def scaled(self, factor: float) -> "CuspProfile":
        """Profile with all values multiplied by ``factor`` > 0."""
        return _ScaledView(self, factor)

    @property
    @abstractmethod
    def lipschitz_constant(self) -> float | None:
        """Lipschitz bound when the profile is Lipschitz, else None."""

    @property
    def value_at_1(self) -> float:
        return float(self.value(1.0))

    def breakpoints(self) -> np.ndarray:
        """Interior jump locations (empty for continuous kinds)."""
        return np.empty(0)

    def __call__(self, t):
        return self.value(t)


class PowerProfile(CuspProfile):
    """psi(t) = coeff * t**exponent with exponent > 1."""

    kind = "power"

    def __init__(self, exponent: float, coeff: float = 1.0):
        if not exponent > 1.0:
            raise ProfileFormatError(f"power exponent must be > 1, got {exponent}")
        if not coeff > 0.0:
            raise ProfileFormatError(f"power coeff must be > 0, got {coeff}")
        self.exponent = float(exponent)
        self.coeff = float(coeff)
        # psi(2t) / psi(t) == 2**s exactly
        self.doubling_constant = 2.0 ** self.exponent

    def value(self, t):
        t = _check_t(t)
        return self.coeff * t ** self.exponent

    def right_limit(self, t):
        return self.value(t)

    def scaled(self, factor):
        return PowerProfile(self.exponent, self.coeff * factor)

    @property
    def lipschitz_constant(self):
        # derivative s*c*t**(s-1) is increasing on (0, 1]
        return self.exponent * self.coeff

    def derivative(self, t):
        t = _check_t(t)
        return self.coeff * self.exponent * t ** (self.exponent - 1.0)

    def __repr__(self):
        return f"PowerProfile(exponent={self.exponent}, coeff={self.coeff})"


class LinearProfile(CuspProfile):
    """psi(t) = slope * t with slope > 0."""

    kind = "linear"

    def __init__(self, slope: float):
        if not slope > 0.0:
            raise ProfileFormatError(f"linear slope must be > 0, got {slope}")
        self.slope = float(slope)
        self.doubling_constant = 2.0

    def value(self, t):
        t = _check_t(t)
        return self.slope * t

    def right_limit(self, t):
        return self.value(t)

    def scaled(self, factor):
        return LinearProfile(self.slope * factor)

    @property
    def lipschitz_constant(self):
        return self.slope

    def derivative(self, t):
        t = _check_t(t)
        return np.full_like(t, self.slope)

    def __repr__(self):
        return f"LinearProfile(slope={self.slope})"


class StepProfile(CuspProfile):
    """Left-continuous step function from (breakpoint, value) pairs.

    The value ``values[i]`` holds on (breaks[i-1], breaks[i]] (with
    breaks[-1] == 1 so the profile is total on (0, 1]).  ``kind`` is
    "step" for hand-authored tables and "tabulated" for sampled data;
    the semantics are identical.
    """

    def __init__(self, breaks, values, kind: str = "step",
                 lipschitz_constant: float | None = None,
                 doubling_constant: float | None = None):
        breaks = np.asarray(breaks, dtype=float)
        values = np.asarray(values, dtype=float)
        if breaks.ndim != 1 or breaks.shape != values.shape or breaks.size == 0:
            raise ProfileFormatError("breaks and values must be equal-length 1-d arrays")
        for i in range(breaks.size):
            if not 0.0 < breaks[i] <= 1.0:
                raise ProfileFormatError(f"row {i}: breakpoint {breaks[i]} outside (0, 1]")
            if i > 0 and breaks[i] <= breaks[i - 1]:
                raise ProfileFormatError(
                    f"row {i}: breakpoint {breaks[i]} not above previous {breaks[i - 1]}"
                )
            if not values[i] > 0.0:
                raise ProfileFormatError(f"row {i}: value {values[i]} not strictly positive")
            if i > 0 and values[i] < values[i - 1]:
                raise ProfileFormatError(
                    f"row {i}: value {values[i]} decreases below previous {values[i - 1]}"
                )
        if breaks[-1] != 1.0:
            raise ProfileFormatError(
                f"row {breaks.size - 1}: last breakpoint must be 1.0, got {breaks[-1]}"
            )
        self.breaks = breaks
        self.values = values
        self.kind = kind
        self._lipschitz = lipschitz_constant
        self.doubling_constant = doubling_constant

    def value(self, t):
        t = _check_t(t)
        idx = np.searchsorted(self.breaks, t, side="left")
        idx = np.minimum(idx, self.breaks.size - 1)
        return self.values[idx]

    def right_limit(self, t):
        t = _check_t(t)
        idx = np.searchsorted(self.breaks, t, side="right")
        idx = np.minimum(idx, self.breaks.size - 1)
        return self.values[idx]

    def scaled(self, factor):
        lip = None if self._lipschitz is None else self._lipschitz * factor
        dbl = self.doubling_constant
        return StepProfile(self.breaks, self.values * factor, kind=self.kind,
                           lipschitz_constant=lip, doubling_constant=dbl)

    @property
    def lipschitz_constant(self):
        return self._lipschitz

    def breakpoints(self):
        return self.breaks[:-1].copy()

    def __repr__(self):
        return f"StepProfile(kind={self.kind!r}, nodes={self.breaks.size})"


class _ScaledView(CuspProfile):
    """Lazy multiplicative rescaling of an arbitrary profile."""

    def __init__(self, base: CuspProfile, factor: float):
        if not factor > 0.0:
            raise ProfileFormatError(f"scale factor must be > 0, got {factor}")
        self.base = base
        self.factor = float(factor)
        self.kind = base.kind
        self.doubling_constant = base.doubling_constant  # ratios are scale-free

    def value(self, t):
        return self.factor * self.base.value(t)

    def right_limit(self, t):
        return self.factor * self.base.right_limit(t)

    def scaled(self, factor):
        return _ScaledView(self.base, self.factor * factor)

    @property
    def lipschitz_constant(self):
        lip = self.base.lipschitz_constant
        return None if lip is None else self.factor * lip

    def breakpoints(self):
        return self.base.breakpoints()


def profile_derivative(psi: CuspProfile):
    """Callable psi'(t) for kinds carrying a closed-form slope, else None."""
    if isinstance(psi, _ScaledView):
        base = profile_derivative(psi.base)
        if base is None:
            return None
        return lambda t: psi.factor * base(t)
    return getattr(psi, "derivative", None)


def eval_profile(psi: CuspProfile, t: float, side: str = "value") -> float:
    """One-sided profile evaluation; side is one of value|left|right.

    ``value`` and ``left`` coincide by left-continuity; ``right`` reads
    the limit from above (equal to psi(1) at t = 1 by convention).
    """
    if side in ("value", "left"):
        return float(psi.value(t))
    if side == "right":
        return float(psi.right_limit(t))
    raise ValueError(f"side must be value|left|right, got {side!r}")


def make_profile(kind: str, **params) -> CuspProfile:
    """Construct a profile from a config-style description."""
    if kind == "power":
        return PowerProfile(params["exponent"], params.get("coeff", 1.0))
    if kind == "linear":
        return LinearProfile(params["slope"])
    if kind in ("step", "tabulated"):
        return StepProfile(params["breakpoints"], params["values"], kind=kind,
                           lipschitz_constant=params.get("lipschitz_constant"),
                           doubling_constant=params.get("doubling_constant"))
    raise ProfileFormatError(f"unknown profile kind {kind!r}")


def load_profile_csv(path_or_buffer) -> StepProfile:
    """Load a tabulated profile from two-column CSV (breakpoint, value).

    Breakpoints must ascend within (0, 1] and end at 1; values must be
    strictly positive and nondecreasing.  Violations raise
    ProfileFormatError with the offending row index (0-based, header
    excluded if present).
    """
    if hasattr(path_or_buffer, "read"):
        rows = list(csv.reader(path_or_buffer))
    else:
        with open(path_or_buffer, newline="") as fh:
            rows = list(csv.reader(fh))
    if rows and rows[0] and not _is_number(rows[0][0]):
        rows = rows[1:]  # optional header
    breaks, values = [], []
    for i, row in enumerate(rows):
        if not row:
            continue
        if len(row) < 2:
            raise ProfileFormatError(f"row {i}: expected two columns, got {len(row)}")
        if not (_is_number(row[0]) and _is_number(row[1])):
            raise ProfileFormatError(f"row {i}: non-numeric entry {row[:2]!r}")
        breaks.append(float(row[0]))
        values.append(float(row[1]))
    if not breaks:
        raise ProfileFormatError("row 0: empty profile table")
    return StepProfile(breaks, values, kind="tabulated")


def save_profile_csv(profile: StepProfile, path_or_buffer) -> None:
    """Write a step/tabulated profile in the load_profile_csv format."""
    if hasattr(path_or_buffer, "write"):
        _write_rows(profile, path_or_buffer)
    else:
        with open(path_or_buffer, "w", newline="") as fh:
            _write_rows(profile, fh)


def _write_rows(profile, fh):
    writer = csv.writer(fh)
    writer.writerow(["breakpoint", "value"])
    for b, v in zip(profile.breaks, profile.values):
        writer.writerow([repr(float(b)), repr(float(v))])


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def profile_to_csv_text(profile: StepProfile) -> str:
    buf = io.StringIO()
    save_profile_csv(profile, buf)
    return buf.getvalue()
