import math

import numpy as np
import pytest

from cuspext.errors import QuadratureError, SeamProximityError
from cuspext.extension import ExtensionContext, extend_lipschitz
from cuspext.fields import ScalarField, make_field
from cuspext.geometry import DomainSpec
from cuspext.profiles import PowerProfile
from cuspext.quadrature import (
    QuadratureScheme,
    build_nodes,
    extension_ratio,
    gradient,
    in_limit_region,
    lp_norm,
    region_domain,
    region_extension,
    region_tube,
    w1p_norm,
)

SCHEME = QuadratureScheme()
T2 = DomainSpec(3, PowerProfile(2.0))          # psi = t^2
T2Q = DomainSpec(3, PowerProfile(2.0, 0.25))   # psi = t^2 / 4

# closed-form oracles for psi = t^2/4:
#   |domain| = pi/16 * (1/5 + 1) = 3 pi/40,  integral of t = pi/96 + 3 pi/32
VOL_T2Q = 3.0 * math.pi / 40.0
INT_T_T2Q = 5.0 * math.pi / 48.0


def test_volume_oracle_t2():
    vol = lp_norm(make_field("constant", 3), region_domain(T2), 1.0, SCHEME, 3)
    assert vol == pytest.approx(6.0 * math.pi / 5.0, rel=1e-10)


def test_volume_oracle_t2q():
    vol = lp_norm(make_field("constant", 3), region_domain(T2Q), 1.0, SCHEME, 3)
    assert vol == pytest.approx(VOL_T2Q, rel=1e-10)


def test_zero_field_norm():
    zero = make_field("constant", 3, value=0.0)
    assert lp_norm(zero, region_domain(T2), 2.0, SCHEME, 3) == 0.0


def test_cylinder_axial_polynomial_exact():
    region = region_tube(1.0, 2.0, 0.25)
    cubic = ScalarField("t3", lambda z: z[..., 0] ** 3)
    got = lp_norm(cubic, region, 1.0, SCHEME, 3)
    want = math.pi * 0.25 ** 2 * 15.0 / 4.0
    assert abs(got - want) <= 1e-12 * want


def test_cylinder_radial_polynomial_exact():
    region = region_tube(1.0, 2.0, 0.25)
    got = lp_norm(make_field("radial-sq", 3), region, 1.0, SCHEME, 3)
    want = math.pi * 0.25 ** 4 / 2.0
    assert abs(got - want) <= 1e-12 * want


def test_cylinder_l2_of_t():
    region = region_tube(1.0, 2.0, 0.25)
    got = lp_norm(make_field("axial", 3), region, 2.0, SCHEME, 3)
    want = math.sqrt(math.pi * 0.25 ** 2 * 7.0 / 3.0)
    assert got == pytest.approx(want, rel=1e-12)


def test_slice_weights_sum_to_cross_section():
    Z, W, _ = build_nodes(region_tube(0.0, 1.0, 0.5), SCHEME, 3)
    assert np.sum(W) == pytest.approx(math.pi * 0.25, rel=1e-10)


def test_nonfinite_sample_raises_with_node():
    def bad(z):
        out = np.ones(z.shape[:-1])
        out[z[..., 0] > 1.5] = np.nan
        return out

    with pytest.raises(QuadratureError) as err:
        lp_norm(ScalarField("bad", bad), region_domain(T2), 1.0, SCHEME, 3)
    assert err.value.node is not None


def test_p_validation():
    with pytest.raises(ValueError):
        lp_norm(make_field("constant", 3), region_domain(T2), 0.5, SCHEME, 3)
    with pytest.raises(ValueError):
        w1p_norm(make_field("constant", 3), region_domain(T2), np.inf, SCHEME, 3)


def test_gradient_analytic_passthrough():
    u = make_field("wave", 3)
    z = np.array([0.4, 0.1, -0.2])
    assert np.array_equal(gradient(u, z), u.grad(z))


def test_gradient_fd_matches_analytic():
    u = make_field("wave", 3)
    stripped = ScalarField(u.name, u.fn, None)
    rng = np.random.default_rng(0)
    z = np.concatenate([rng.uniform(0.1, 1.9, size=(200, 1)),
                        rng.uniform(-0.5, 0.5, size=(200, 2))], axis=1)
    err = np.linalg.norm(gradient(stripped, z) - u.grad(z), axis=-1)
    assert np.max(err) <= 1e-5


def test_gradient_on_seam_errors():
    u = ScalarField("seamy", lambda z: z[..., 0], None,
                    seam_distance=lambda z: np.zeros(z.shape[:-1]))
    with pytest.raises(SeamProximityError, match="tolerance band"):
        gradient(u, np.array([0.5, 0.1, 0.0]))


def test_w1p_constant_equals_volume():
    got = w1p_norm(make_field("constant", 3), region_domain(T2), 1.0, SCHEME, 3)
    assert got == pytest.approx(6.0 * math.pi / 5.0, rel=1e-10)


def test_w1p_axial_closed_form():
    # |u| part integrates t, gradient part adds the volume
    got = w1p_norm(make_field("axial", 3), region_domain(T2Q), 1.0, SCHEME, 3)
    assert got == pytest.approx(INT_T_T2Q + VOL_T2Q, rel=1e-10)


def test_w1p_zero_field():
    zero = make_field("constant", 3, value=0.0)
    assert w1p_norm(zero, region_domain(T2), 1.0, SCHEME, 3) == 0.0


def test_holder_consistency():
    vol = VOL_T2Q
    region = region_domain(T2Q)
    for name in ("constant", "axial", "radial-sq", "wave", "tip-power"):
        u = make_field(name, 3)
        for q, p in ((1.0, 2.0), (2.0, 4.0), (1.0, 4.0)):
            nq = lp_norm(u, region, q, SCHEME, 3)
            np_ = lp_norm(u, region, p, SCHEME, 3)
            assert nq <= vol ** (1.0 / q - 1.0 / p) * np_ * (1.0 + 1e-9)


def test_refinement_convergence_smooth_family():
    region = region_domain(T2)
    for name in ("constant", "axial", "radial-sq", "wave"):
        u = make_field(name, 3)
        base = lp_norm(u, region, 2.0, SCHEME, 3)
        fine = lp_norm(u, region, 2.0, SCHEME.refined(), 3)
        assert abs(fine - base) / fine < 0.01


def test_norm_determinism():
    u = make_field("wave", 3)
    a = lp_norm(u, region_domain(T2), 2.0, SCHEME, 3)
    b = lp_norm(u, region_domain(T2), 2.0, SCHEME, 3)
    assert a == b
    Z1, W1, _ = build_nodes(region_extension(T2Q), SCHEME, 3)
    Z2, W2, _ = build_nodes(region_extension(T2Q), SCHEME, 3)
    assert np.array_equal(Z1, Z2) and np.array_equal(W1, W2)


def test_monte_carlo_dimension_four():
    scheme = QuadratureScheme(mc_samples=200_000, seed=3)
    vol = lp_norm(make_field("constant", 4), region_tube(0.0, 1.0, 0.5), 1.0,
                  scheme, 4)
    want = 4.0 * math.pi / 3.0 * 0.5 ** 3
    assert vol == pytest.approx(want, rel=0.02)
    again = lp_norm(make_field("constant", 4), region_tube(0.0, 1.0, 0.5), 1.0,
                    scheme, 4)
    assert vol == again  # seeded, deterministic


def test_extension_norm_gradient_seam_handling():
    # The extension of a gradient-carrying field over an analytic profile
    # integrates its exact chain-rule gradient: nothing is dropped.  The
    # FD fallback (gradient stripped) must agree; it may only drop tip
    # nodes whose collar is narrower than the FD floor.
    ctx = ExtensionContext(T2Q)
    eu = extend_lipschitz(ctx, make_field("constant", 3))
    small = QuadratureScheme(t_levels=20, gauss_t=4, gauss_r=4, angular=8)
    total, detail = w1p_norm(eu, region_extension(T2Q), 1.0, small, 3,
                             with_detail=True)
    assert np.isfinite(total) and total > 0.0
    assert detail["dropped_gradient_nodes"] == 0
    stripped = ScalarField(eu.name, eu.fn, None, smoothness="piecewise",
                           seam_distance=eu.seam_distance)
    total_fd, detail_fd = w1p_norm(stripped, region_extension(T2Q), 1.0, small,
                                   3, with_detail=True)
    assert detail_fd["dropped_gradient_nodes"] > 0  # deep tip panels
    assert total_fd == pytest.approx(total, rel=1e-4)


def test_in_limit_region():
    assert in_limit_region(3, 2.0, 1.0)
    assert in_limit_region(3, 4.0, 1.0)
    assert not in_limit_region(3, 4.0, 1.9)   # needs p >= 38
    assert not in_limit_region(3, 1.0, 1.0)
    assert not in_limit_region(3, 5.0, 2.0)   # q must stay below n-1


def test_extension_ratio_report():
    small = QuadratureScheme(t_levels=25, gauss_t=4, gauss_r=4, angular=8)
    rep = extension_ratio(make_field("constant", 3), PowerProfile(2.0, 0.25),
                          3, 2.0, 1.0, small)
    assert rep.frame == "direct"
    assert rep.ratio is not None and np.isfinite(rep.ratio)
    assert rep.refinement_delta is not None and rep.refinement_delta < 0.05
    assert not rep.warnings
    d = rep.to_dict()
    assert d["p"] == 2.0 and d["q"] == 1.0


def test_extension_ratio_zero_denominator():
    small = QuadratureScheme(t_levels=15, gauss_t=3, gauss_r=3, angular=6)
    rep = extension_ratio(make_field("constant", 3, value=0.0),
                          PowerProfile(2.0, 0.25), 3, 2.0, 1.0, small)
    assert rep.zero_denominator and rep.ratio is None


def test_extension_ratio_out_of_region_warns():
    small = QuadratureScheme(t_levels=15, gauss_t=3, gauss_r=3, angular=6)
    rep = extension_ratio(make_field("constant", 3), PowerProfile(2.0, 0.25),
                          3, 4.0, 1.9, small)
    assert rep.warnings and "outside" in rep.warnings[0]
    assert np.isfinite(rep.ratio)


def test_extension_ratio_validation():
    with pytest.raises(ValueError):
        extension_ratio(make_field("constant", 3), PowerProfile(2.0, 0.25),
                        3, 1.0, 2.0, SCHEME)


def test_extension_ratio_straightened_route():
    from cuspext.profiles import StepProfile

    step = StepProfile([0.5, 1.0], [0.1, 0.2])
    small = QuadratureScheme(t_levels=18, gauss_t=3, gauss_r=3, angular=6)
    rep = extension_ratio(make_field("constant", 3), step, 3, 2.0, 1.0, small)
    assert rep.frame == "straightened"
    assert rep.ratio is not None and np.isfinite(rep.ratio) and rep.ratio > 0.0


def test_lp_slice_table_sums_to_norm():
    from cuspext.quadrature import lp_slice_table

    u = make_field("constant", 3)
    region = region_domain(T2)
    rows = lp_slice_table(u, region, 1.0, SCHEME, 3)
    total = sum(r["contribution"] for r in rows)
    assert total == pytest.approx(6.0 * math.pi / 5.0, rel=1e-9)
