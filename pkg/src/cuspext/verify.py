"""Behavioral checks on the extension operator: trace, linearity, decay.

These back both the test suite and the CLI's verification commands.
Each check returns a small frozen report; pass/fail thresholds live
with the caller so failure output stays inspectable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .extension import ExtensionContext, extend_lipschitz
from .fields import ScalarField, linear_combination
from .geometry import DomainSpec, ExtRegion
from .transform import sample_domain, sample_box


@dataclass(frozen=True)
class TraceReport:
    max_abs_error: float
    samples: int
    exact: bool  # bitwise equality held at every sample


def trace_check(ext_field: ScalarField, u: ScalarField, spec: DomainSpec,
                count: int = 10_000, rng_seed: int = 0) -> TraceReport:
    """Extension restricted to the domain must reproduce the field."""
    rng = np.random.default_rng(rng_seed)
    z = sample_domain(spec, count, rng)
    got = np.asarray(ext_field.fn(z), dtype=float)
    want = np.asarray(u.fn(z), dtype=float)
    err = np.abs(got - want)
    return TraceReport(float(err.max()), count, bool(np.all(got == want)))


@dataclass(frozen=True)
class LinearityReport:
    max_abs_error: float
    samples: int


def linearity_check(build, u: ScalarField, v: ScalarField, points: np.ndarray,
                    alpha: float = 0.7, beta: float = -1.3) -> LinearityReport:
    """E(alpha u + beta v) against alpha E(u) + beta E(v) pointwise.

    ``build`` maps a field to its extension field (either route).
    """
    eu = build(u).fn(points)
    ev = build(v).fn(points)
    ew = build(linear_combination(alpha, u, beta, v)).fn(points)
    err = np.abs(ew - (alpha * eu + beta * ev))
    return LinearityReport(float(err.max()), int(points.shape[0]))


@dataclass(frozen=True)
class DecayReport:
    ok: bool
    max_normalized: float  # worst |E| / (cap * delta) over all rays
    rays: int


def boundary_decay_check(ctx: ExtensionContext, ext_field: ScalarField,
                         u: ScalarField, rays: int = 1000,
                         deltas=(1e-2, 1e-3, 1e-4), rng_seed: int = 0,
                         safety: float = 2.0) -> DecayReport:
    """Linear decay of the extension toward the outer boundary.

    Rays step inward from the collar/cap boundary; the admissible
    modulus per ray is the local cut-off slope times a sampled bound on
    |u| (the tip is excluded: the modulus degenerates with the collar
    width there, which is expected, not a defect).
    """
    spec = ctx.spec
    n = spec.n
    psi1 = ctx.psi1
    rng = np.random.default_rng(rng_seed)
    m_u = float(np.abs(np.asarray(u.fn(sample_domain(spec, 4000, rng)))).max())
    m_u = max(m_u, 1e-12)

    per = max(1, rays // 3)
    direction = rng.normal(size=(per, n - 1))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)

    worst = 0.0
    total = 0
    for delta in deltas:
        # cusp collar outer wall, away from the tip
        t = rng.uniform(0.05, 1.0, size=per)
        pv = np.asarray(spec.psi.value(t), dtype=float)
        z = np.concatenate([t[:, None], ((2.0 * pv - delta)[:, None]) * direction], axis=1)
        cap = safety * m_u / pv
        worst = max(worst, float(np.max(np.abs(ext_field.fn(z)) / (cap * delta))))
        # tube collar outer wall
        t = rng.uniform(1.0 + 1e-6, 3.0 - 1e-6, size=per)
        z = np.concatenate([t[:, None],
                            np.full((per, 1), 2.0 * psi1 - delta) * direction], axis=1)
        cap = safety * m_u / psi1
        worst = max(worst, float(np.max(np.abs(ext_field.fn(z)) / (cap * delta))))
        # end disk t = 3
        rad = rng.uniform(0.0, 2.0 * psi1 * 0.98, size=per)
        z = np.concatenate([np.full((per, 1), 3.0 - delta),
                            rad[:, None] * direction], axis=1)
        cap = safety * m_u
        worst = max(worst, float(np.max(np.abs(ext_field.fn(z)) / (cap * delta))))
        total += 3 * per
    return DecayReport(bool(worst <= 1.0), worst, total)


def extension_seam_pairs(ctx: ExtensionContext, per_seam: int, delta: float,
                         rng: np.random.Generator) -> dict:
    """Straddle pairs across each interface of the extension formula."""
    spec = ctx.spec
    n = spec.n
    psi1 = ctx.psi1
    h = 0.5 * delta
    direction = rng.normal(size=(per_seam, n - 1))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)

    def radial(t, r):
        lo = np.concatenate([t[:, None], (r - h)[:, None] * direction], axis=1)
        hi = np.concatenate([t[:, None], (r + h)[:, None] * direction], axis=1)
        return lo, hi

    def axial(t, r):
        lo = np.concatenate([(t - h)[:, None], r[:, None] * direction], axis=1)
        hi = np.concatenate([(t + h)[:, None], r[:, None] * direction], axis=1)
        return lo, hi

    pairs = {}
    t = rng.uniform(0.05, 1.0, size=per_seam)
    pv = np.asarray(spec.psi.value(t), dtype=float)
    pairs["cusp-collar-inner"] = radial(t, pv)
    pairs["cusp-collar-outer"] = radial(t, 2.0 * pv)
    t = rng.uniform(1.0 + 1e-3, 2.0 - 1e-3, size=per_seam)
    pairs["tube-collar-inner"] = radial(t, np.full(per_seam, psi1))
    pairs["tube-collar-outer"] = radial(t, np.full(per_seam, 2.0 * psi1))
    r = rng.uniform(0.05 * psi1, 1.9 * psi1, size=per_seam)
    pairs["cap-interface"] = axial(np.full(per_seam, 2.0), r)
    pairs["cap-end"] = axial(np.full(per_seam, 3.0), r)
    r = rng.uniform(psi1 * 1.05, 1.95 * psi1, size=per_seam)
    pairs["profile-junction"] = axial(np.full(per_seam, 1.0), r)
    return pairs


def seam_continuity_check(ctx: ExtensionContext, ext_field: ScalarField,
                          deltas=(1e-3, 1e-5, 1e-7), per_seam: int = 200,
                          rng_seed: int = 0) -> dict:
    """Worst straddle jump per seam and separation: {seam: {delta: jump}}.

    For a continuous extension the jump scales linearly with the
    separation; a branch mismatch leaves an O(1) jump as delta shrinks.
    This check is the designated arbiter for the end-cap pullback mode.
    """
    out: dict = {}
    for delta in deltas:
        rng = np.random.default_rng(rng_seed)
        for seam, (a, b) in extension_seam_pairs(ctx, per_seam, delta, rng).items():
            jump = np.abs(np.asarray(ext_field.fn(a)) - np.asarray(ext_field.fn(b)))
            out.setdefault(seam, {})[delta] = float(jump.max())
    return out


def seam_verdict(seam_report: dict, modulus_cap: float) -> tuple[bool, str | None]:
    """Continuity verdict: every jump bounded by modulus_cap * delta."""
    for seam, jumps in seam_report.items():
        for delta, jump in jumps.items():
            if jump > modulus_cap * delta:
                return False, seam
    return True, None


@dataclass(frozen=True)
class SupportReport:
    ok: bool
    max_abs_outside: float
    samples: int


def support_check(ctx: ExtensionContext, ext_field: ScalarField,
                  count: int = 5000, rng_seed: int = 0) -> SupportReport:
    """The extension must vanish identically outside the doubled domain."""
    rng = np.random.default_rng(rng_seed)
    z = sample_box(ctx.spec.n, 4 * count, rng, t_range=(-1.0, 4.0), radius=2.0)
    label = geometry.classify_extension_region(ctx.spec, z)
    outside = z[np.asarray(label) == ExtRegion.OUTSIDE][:count]
    vals = np.abs(np.asarray(ext_field.fn(outside)))
    return SupportReport(bool(np.all(vals == 0.0)), float(vals.max()),
                         int(outside.shape[0]))


def make_lipschitz_builder(ctx: ExtensionContext):
    """Field -> extension field closure for linearity checks."""

    def build(u: ScalarField) -> ScalarField:
        return extend_lipschitz(ctx, u)

    return build
