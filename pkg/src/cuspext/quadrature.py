"""Cusp-graded product quadrature and first-order Sobolev norms.

Regions are unions of axial slabs: on each slab the cross-section is a
ball whose radius varies with t.  Axial panels grade geometrically
toward the cusp tip (a uniform grid provably under-resolves fields
growing like a negative power of t) and are split at every known seam,
so Gauss nodes never straddle a kink of the integrand.  For n = 3 the
angular factor is a uniform circle rule; higher cross-section
dimensions fall back to stratified Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import QuadratureError, SeamProximityError
from .extension import ExtensionContext, extend_general, extend_lipschitz
from .fields import ScalarField
from .geometry import DomainSpec
from .lipschitzify import DEFAULT_TOL


@dataclass(frozen=True)
class QuadratureScheme:
    """Resolution knobs; ``refined()`` is one uniform doubling step."""

    t_levels: int = 40
    t_ratio: float = 0.5
    gauss_t: int = 8
    gauss_r: int = 8
    angular: int = 16
    mc_samples: int = 20000
    seed: int = 0
    seam_band: float = 1e-6

    def refined(self) -> "QuadratureScheme":
        return replace(self, gauss_t=2 * self.gauss_t, gauss_r=2 * self.gauss_r,
                       angular=2 * self.angular, mc_samples=4 * self.mc_samples)

    def describe(self) -> dict:
        return {"t_levels": self.t_levels, "t_ratio": self.t_ratio,
                "gauss_t": self.gauss_t, "gauss_r": self.gauss_r,
                "angular": self.angular, "mc_samples": self.mc_samples,
                "seed": self.seed, "seam_band": self.seam_band}


@dataclass(frozen=True)
class Slab:
    """One axial piece of a region: t in (t0, t1), |x| < radius(t)."""

    t0: float
    t1: float
    radius: Callable[[np.ndarray], np.ndarray]
    radial_breaks: tuple = ()   # callables t -> interior seam radius
    graded: bool = False        # geometric t-panels toward t0 (tip slabs)
    t_breaks: tuple = ()        # axial positions where radius jumps


def region_domain(spec: DomainSpec) -> tuple:
    """The cuspidal domain itself: cusp slab plus unit tube."""
    psi = spec.psi
    return (
        Slab(0.0, 1.0, lambda t: np.asarray(psi.value(t), dtype=float),
             graded=True, t_breaks=tuple(psi.breakpoints())),
        Slab(1.0, 2.0, lambda t, v=spec.psi1: np.full_like(t, v)),
    )


def region_extension(spec: DomainSpec) -> tuple:
    """The doubled domain the extension lives on, seams included."""
    psi = spec.psi
    psi1 = spec.psi1
    cusp_r = lambda t: 2.0 * np.asarray(psi.value(t), dtype=float)
    cusp_b = lambda t: np.asarray(psi.value(t), dtype=float)
    tube_r = lambda t: np.full_like(t, 2.0 * psi1)
    tube_b = lambda t: np.full_like(t, psi1)
    return (
        Slab(0.0, 1.0, cusp_r, radial_breaks=(cusp_b,), graded=True,
             t_breaks=tuple(psi.breakpoints())),
        Slab(1.0, 2.0, tube_r, radial_breaks=(tube_b,)),
        Slab(2.0, 3.0, tube_r, radial_breaks=(tube_b,)),
    )


def region_tube(t0: float, t1: float, radius: float) -> tuple:
    """A plain cylinder slab (axial interval times a fixed ball)."""
    return (Slab(float(t0), float(t1), lambda t, v=float(radius): np.full_like(t, v)),)


def _t_panels(slab: Slab, scheme: QuadratureScheme) -> np.ndarray:
    if slab.graded:
        if slab.t0 != 0.0:
            raise ValueError("graded slabs must start at t = 0")
        edges = slab.t1 * scheme.t_ratio ** np.arange(scheme.t_levels, -1, -1)
    else:
        npan = max(1, round(slab.t1 - slab.t0))
        edges = np.linspace(slab.t0, slab.t1, npan + 1)
    if slab.t_breaks:
        edges = np.union1d(edges, [b for b in slab.t_breaks
                                   if edges[0] < b < edges[-1]])
    return edges


def _slab_nodes(slab: Slab, scheme: QuadratureScheme, n: int):
    """Tensor nodes/weights for one slab (n in {2, 3})."""
    xi_t, wt_t = np.polynomial.legendre.leggauss(scheme.gauss_t)
    xi_r, wt_r = np.polynomial.legendre.leggauss(scheme.gauss_r)
    edges = _t_panels(slab, scheme)
    a, b = edges[:-1], edges[1:]
    # t nodes: (panels, gauss_t) -> flat
    tmid, thal = 0.5 * (a + b), 0.5 * (b - a)
    T = (tmid[:, None] + thal[:, None] * xi_t[None, :]).ravel()
    WT = (thal[:, None] * wt_t[None, :]).ravel()

    router = np.asarray(slab.radius(T), dtype=float)
    seams = [np.zeros_like(T)]
    seams += [np.clip(np.asarray(br(T), dtype=float), 0.0, router)
              for br in slab.radial_breaks]
    seams.append(router)
    R_list, WR_list = [], []
    for lo, hi in zip(seams[:-1], seams[1:]):
        mid, hal = 0.5 * (lo + hi), 0.5 * (hi - lo)
        R_list.append(mid[:, None] + hal[:, None] * xi_r[None, :])
        WR_list.append(hal[:, None] * wt_r[None, :])
    R = np.concatenate(R_list, axis=1)          # (nt, NR)
    WR = np.concatenate(WR_list, axis=1) * R ** (n - 2)

    if n == 3:
        theta = 2.0 * np.pi * np.arange(scheme.angular) / scheme.angular
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        wang = np.full(scheme.angular, 2.0 * np.pi / scheme.angular)
    elif n == 2:
        dirs = np.array([[1.0], [-1.0]])
        wang = np.ones(2)
    else:
        raise ValueError("tensor rule only for n in {2, 3}; use the MC path")

    nt, NR = R.shape
    na = dirs.shape[0]
    Z = np.empty((nt, NR, na, n))
    Z[..., 0] = T[:, None, None]
    Z[..., 1:] = R[:, :, None, None] * dirs[None, None, :, :]
    W = WT[:, None, None] * WR[:, :, None] * wang[None, None, :]
    scale = np.broadcast_to(router[:, None, None], W.shape)
    return Z.reshape(-1, n), W.ravel(), scale.ravel()


def _ball_volume(n_minus_1: int, r) -> np.ndarray:
    k = n_minus_1
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0) * np.asarray(r) ** k


def _slab_nodes_mc(slab: Slab, scheme: QuadratureScheme, n: int,
                   rng: np.random.Generator):
    """Stratified Monte Carlo nodes: per t-panel, uniform ball samples."""
    edges = _t_panels(slab, scheme)
    per_panel = max(8, scheme.mc_samples // max(1, len(edges) - 1))
    Zs, Ws, Ss = [], [], []
    for a, b in zip(edges[:-1], edges[1:]):
        t = rng.uniform(a, b, size=per_panel)
        router = np.asarray(slab.radius(t), dtype=float)
        direction = rng.normal(size=(per_panel, n - 1))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        rad = router * rng.uniform(0.0, 1.0, size=per_panel) ** (1.0 / (n - 1))
        Z = np.concatenate([t[:, None], rad[:, None] * direction], axis=1)
        W = (b - a) * _ball_volume(n - 1, router) / per_panel
        Zs.append(Z)
        Ws.append(W)
        Ss.append(router)
    return np.concatenate(Zs), np.concatenate(Ws), np.concatenate(Ss)


def build_nodes(region, scheme: QuadratureScheme, n: int):
    """Quadrature nodes, weights, and local radial scales for a region."""
    Zs, Ws, Ss = [], [], []
    rng = np.random.default_rng(scheme.seed)
    for slab in region:
        if n <= 3:
            Z, W, S = _slab_nodes(slab, scheme, n)
        else:
            Z, W, S = _slab_nodes_mc(slab, scheme, n, rng)
        Zs.append(Z)
        Ws.append(W)
        Ss.append(S)
    return np.concatenate(Zs), np.concatenate(Ws), np.concatenate(Ss)


def _check_finite(values: np.ndarray, Z: np.ndarray):
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise QuadratureError(f"non-finite integrand sample at node {tuple(Z[i])}",
                              node=tuple(Z[i]))


def lp_norm(u: ScalarField, region, p: float, scheme: QuadratureScheme, n: int) -> float:
    """(integral of |u|^p over the region) ** (1/p).

    Parameters
    ----------
    u : ScalarField
        Field evaluable on the region.
    region : tuple of Slab
        From region_domain / region_extension / region_tube.
    p : float
        Exponent in [1, inf).
    scheme, n : resolution and ambient dimension.
    """
    if not 1.0 <= p < np.inf:
        raise ValueError(f"p must be in [1, inf), got {p}")
    Z, W, _ = build_nodes(region, scheme, n)
    return float(_weighted_p_sum(u.fn(Z), W, p, Z) ** (1.0 / p))


def _weighted_p_sum(vals, W, p, Z) -> float:
    vals = np.asarray(vals, dtype=float)
    _check_finite(vals, Z)
    with np.errstate(over="ignore"):
        powered = np.abs(vals) ** p
    _check_finite(powered, Z)  # |v|^p can overflow even for finite samples
    return float(np.sum(W * powered))


def lp_slice_table(u: ScalarField, region, p: float, scheme: QuadratureScheme,
                   n: int) -> list[dict]:
    """Per-axial-panel contributions to the integral of |u|^p (for plots)."""
    rows = []
    for si, slab in enumerate(region):
        edges = _t_panels(slab, scheme)
        for a, b in zip(edges[:-1], edges[1:]):
            sub = Slab(float(a), float(b), slab.radius, slab.radial_breaks)
            Z, W, _ = build_nodes((sub,), scheme, n)
            rows.append({"slab": si, "t_lo": float(a), "t_hi": float(b),
                         "contribution": _weighted_p_sum(u.fn(Z), W, p, Z)})
    return rows


def gradient_at(u: ScalarField, Z: np.ndarray, h_cap: float = 1e-6,
                floor: float = 1e-12) -> np.ndarray:
    """Gradient at many points: analytic when carried, else seam-aware FD.

    The central step shrinks to a quarter of the seam distance so the
    stencil never crosses a seam; points closer than ``floor`` raise,
    directing the caller to exclude a tolerance band around seams.
    """
    Z = np.asarray(Z, dtype=float)
    if u.grad is not None:
        return np.asarray(u.grad(Z), dtype=float)
    if u.seam_distance is not None:
        d = np.asarray(u.seam_distance(Z), dtype=float)
    else:
        d = np.full(Z.shape[:-1], np.inf)
    h = np.minimum(h_cap, 0.25 * d)
    if np.any(h < floor):
        raise SeamProximityError(
            "sample point on or nearly on a field seam; exclude a tolerance band "
            f"(seam distance below {4 * floor:g})"
        )
    out = np.empty(Z.shape)
    for j in range(Z.shape[-1]):
        plus = Z.copy()
        minus = Z.copy()
        plus[..., j] += h
        minus[..., j] -= h
        out[..., j] = (u.fn(plus) - u.fn(minus)) / (2.0 * h)
    return out


def gradient(u: ScalarField, z, h_cap: float = 1e-6) -> np.ndarray:
    """Single-point gradient; see gradient_at."""
    return gradient_at(u, np.asarray(z, dtype=float), h_cap)


def w1p_norm(u: ScalarField, region, p: float, scheme: QuadratureScheme,
             n: int, with_detail: bool = False):
    """L^p norm of the field plus L^p norm of its gradient magnitude.

    Gradient sampling drops nodes inside a relative seam band of width
    ``scheme.seam_band`` (panels are seam-aligned, so normally none);
    the dropped count lands in the detail dict.
    """
    if not 1.0 <= p < np.inf:
        raise ValueError(f"p must be in [1, inf), got {p}")
    Z, W, S = build_nodes(region, scheme, n)
    part_u = _weighted_p_sum(u.fn(Z), W, p, Z) ** (1.0 / p)

    keep = np.ones(Z.shape[0], dtype=bool)
    if u.grad is None and u.seam_distance is not None:
        # the band is relative to the local radial scale; the absolute floor
        # keeps the FD stencil above roundoff at the cusp tip
        d = np.asarray(u.seam_distance(Z), dtype=float)
        keep = d >= np.maximum(scheme.seam_band * S, 8e-12)
    grad = gradient_at(u, Z[keep])
    with np.errstate(over="ignore"):
        mag = np.linalg.norm(grad, axis=-1)
    part_g = _weighted_p_sum(mag, W[keep], p, Z[keep]) ** (1.0 / p)

    total = float(part_u + part_g)
    if with_detail:
        return total, {"lp_part": float(part_u), "gradient_part": float(part_g),
                       "dropped_gradient_nodes": int((~keep).sum()),
                       "nodes": int(Z.shape[0])}
    return total


@dataclass(frozen=True)
class NormReport:
    """One extension-norm measurement at a (p, q) pair."""

    p: float
    q: float
    norm_u_w1p: float
    norm_eu_w1q: float
    ratio: float | None
    refinement_delta: float | None
    resolution: dict
    frame: str  # "direct" | "straightened"
    zero_denominator: bool = False
    warnings: tuple = ()
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "norm_u_w1p": self.norm_u_w1p,
                "norm_eu_w1q": self.norm_eu_w1q, "ratio": self.ratio,
                "refinement_delta": self.refinement_delta,
                "resolution": self.resolution, "frame": self.frame,
                "zero_denominator": self.zero_denominator,
                "warnings": list(self.warnings), "detail": self.detail}


def in_limit_region(n: int, p: float, q: float) -> bool:
    """Parameter region where the extension-norm bound is guaranteed."""
    return 1.0 <= q < n - 1 and p >= (n - 1) * q / (n - 1 - q)


def extension_ratio(u: ScalarField, psi, n: int, p: float, q: float,
                    scheme: QuadratureScheme | None = None,
                    end_cap_map: str = "mirror",
                    tol: float = DEFAULT_TOL) -> NormReport:
    """Extension-norm ratio with a one-step refinement stability estimate.

    Lipschitz profiles are extended in place; other profiles are
    straightened first and the extension norm is computed in the
    straightened frame (equivalent up to the straightening map's
    two-sided Lipschitz constant).  The ratio's theoretical bound is
    existential, so the report asserts nothing about its size.
    """
    if scheme is None:
        scheme = QuadratureScheme()
    if not 1.0 <= q <= p < np.inf:
        raise ValueError(f"need 1 <= q <= p < inf, got p={p}, q={q}")
    spec = DomainSpec(n, psi)
    warnings = ()
    if not in_limit_region(n, p, q):
        warnings = (f"(p, q) = ({p}, {q}) outside the guaranteed region "
                    f"q < {n - 1}, p >= (n-1)q/(n-1-q); ratio reported unasserted",)

    if psi.lipschitz_constant is not None:
        ctx = ExtensionContext(spec, end_cap_map)
        eu = extend_lipschitz(ctx, u)
        ext_region = region_extension(spec)
        frame = "direct"
    else:
        conj = extend_general(u, psi, n, tol, end_cap_map)
        eu = conj.hat_field
        ext_region = region_extension(conj.hat_context.spec)
        frame = "straightened"
    dom_region = region_domain(spec)

    def measure(sch):
        nu = w1p_norm(u, dom_region, p, sch, n, with_detail=True)
        ne = w1p_norm(eu, ext_region, q, sch, n, with_detail=True)
        return nu, ne

    (nu0, du0), (ne0, de0) = measure(scheme)
    (nu1, du1), (ne1, de1) = measure(scheme.refined())
    zero = nu1 <= 0.0
    ratio0 = None if nu0 <= 0.0 else ne0 / nu0
    ratio1 = None if zero else ne1 / nu1
    delta = None
    if ratio0 is not None and ratio1 is not None and ratio1 > 0.0:
        delta = abs(ratio1 - ratio0) / ratio1
    return NormReport(
        p=float(p), q=float(q), norm_u_w1p=float(nu1), norm_eu_w1q=float(ne1),
        ratio=ratio1, refinement_delta=delta,
        resolution=scheme.describe(), frame=frame, zero_denominator=bool(zero),
        warnings=warnings,
        detail={"base": {"norm_u": nu0, "norm_eu": ne0, **{f"u_{k}": v for k, v in du0.items()},
                         **{f"eu_{k}": v for k, v in de0.items()}},
                "refined": {**{f"u_{k}": v for k, v in du1.items()},
                            **{f"eu_{k}": v for k, v in de1.items()}}},
    )
