import numpy as np
import pytest

from cuspext.errors import ProfileDomainError
from cuspext.extension import (
    ExtensionContext,
    cutoff_cap,
    cutoff_cusp,
    cutoff_cusp_gradient,
    cutoff_tube,
    end_cap_pullback,
    extend_general,
    extend_lipschitz,
    reflect_cusp,
    reflect_tube,
)
from cuspext.fields import fd_gradient, make_field
from cuspext.geometry import DomainSpec
from cuspext.profiles import LinearProfile, PowerProfile, StepProfile
from cuspext.transform import sample_domain
from cuspext import verify

LIN_SPEC = DomainSpec(3, LinearProfile(0.25))
POW_SPEC = DomainSpec(3, PowerProfile(2.0, 0.25))


@pytest.fixture
def lin_ctx():
    return ExtensionContext(LIN_SPEC)


@pytest.fixture
def pow_ctx():
    return ExtensionContext(POW_SPEC)


def test_context_requires_lipschitz_profile():
    step = StepProfile([0.5, 1.0], [0.1, 0.2])
    with pytest.raises(ValueError, match="Lipschitz"):
        ExtensionContext(DomainSpec(3, step))
    with pytest.raises(ValueError, match="end_cap_map"):
        ExtensionContext(LIN_SPEC, "shift3")


def test_reflect_cusp_radii(lin_ctx):
    t = 0.5
    pv = 0.125
    mid = reflect_cusp(lin_ctx, [t, 1.5 * pv, 0.0])
    assert np.linalg.norm(mid[1:]) == pytest.approx(0.75 * pv)
    inner = reflect_cusp(lin_ctx, [t, pv * (1 + 1e-13), 0.0])
    assert np.linalg.norm(inner[1:]) == pytest.approx(pv, rel=1e-9)
    outer = reflect_cusp(lin_ctx, [t, 2 * pv * (1 - 1e-13), 0.0])
    assert np.linalg.norm(outer[1:]) == pytest.approx(pv / 2, rel=1e-9)
    assert mid[0] == t  # axial coordinate preserved
    with pytest.raises(ProfileDomainError):
        reflect_cusp(lin_ctx, [t, 3 * pv, 0.0])


def test_cutoff_cusp_values(lin_ctx):
    t = 0.5
    pv = 0.125
    assert cutoff_cusp(lin_ctx, [t, pv, 0.0]) == pytest.approx(1.0)
    assert cutoff_cusp(lin_ctx, [t, 1.5 * pv, 0.0]) == pytest.approx(0.5)
    assert cutoff_cusp(lin_ctx, [t, 2 * pv, 0.0]) == pytest.approx(0.0)
    with pytest.raises(ProfileDomainError):
        cutoff_cusp(lin_ctx, [1.5, 0.2, 0.0])


def test_cutoff_cusp_gradient_oracle(lin_ctx):
    # analytic collar-weight gradient for a linear profile
    z = np.array([[0.5, 0.15, 0.08], [0.8, -0.25, 0.1]])
    got = cutoff_cusp_gradient(lin_ctx, z)
    t = z[:, 0]
    r = np.linalg.norm(z[:, 1:], axis=1)
    pv = 0.25 * t
    expected_t = r * 0.25 / pv ** 2
    assert np.allclose(got[:, 0], expected_t)
    assert np.allclose(np.linalg.norm(got[:, 1:], axis=1), 1.0 / pv)
    # magnitude bound C / psi(t) with C = 1 + 2 Lip(psi)
    mag = np.linalg.norm(got, axis=1)
    assert np.all(mag <= (1.0 + 2.0 * 0.25) / pv + 1e-12)


def test_tube_collar_values(lin_ctx):
    psi1 = 0.25
    z = [1.5, 1.5 * psi1, 0.0]
    assert np.linalg.norm(reflect_tube(lin_ctx, z)[1:]) == pytest.approx(0.75 * psi1)
    assert cutoff_tube(lin_ctx, z) == pytest.approx(0.5)
    assert cutoff_tube(lin_ctx, [1.5, psi1, 0.0]) == pytest.approx(1.0)
    assert cutoff_tube(lin_ctx, [1.5, 2 * psi1, 0.0]) == pytest.approx(0.0)
    with pytest.raises(ProfileDomainError):
        reflect_tube(lin_ctx, [0.5, 1.5 * psi1, 0.0])


def test_end_cap_maps():
    z = [2.5, 0.1, 0.0]
    assert end_cap_pullback(ExtensionContext(LIN_SPEC, "mirror"), z)[0] == 1.5
    assert end_cap_pullback(ExtensionContext(LIN_SPEC, "shift1"), z)[0] == 1.5
    assert end_cap_pullback(ExtensionContext(LIN_SPEC, "shift2"), z)[0] == 0.5
    assert cutoff_cap(ExtensionContext(LIN_SPEC), z) == pytest.approx(0.5)
    assert cutoff_cap(ExtensionContext(LIN_SPEC), [3.0 - 1e-9, 0.1, 0.0]) \
        == pytest.approx(1e-9, abs=1e-12)
    with pytest.raises(ProfileDomainError):
        end_cap_pullback(ExtensionContext(LIN_SPEC), [1.5, 0.1, 0.0])


def test_extend_constant_values(lin_ctx):
    one = make_field("constant", 3)
    eu = extend_lipschitz(lin_ctx, one)
    assert eu.fn(np.array([0.5, 1.5 * 0.125, 0.0])) == pytest.approx(0.5)
    assert eu.fn(np.array([1.5, 1.5 * 0.25, 0.0])) == pytest.approx(0.5)
    # end cap composes the cap weight with the already-extended values
    assert eu.fn(np.array([2.5, 0.1, 0.0])) == pytest.approx(0.5)
    assert eu.fn(np.array([2.5, 1.5 * 0.25, 0.0])) == pytest.approx(0.5 * 0.5)


def test_extend_zero_field(lin_ctx):
    zero = make_field("constant", 3, value=0.0)
    eu = extend_lipschitz(lin_ctx, zero)
    rng = np.random.default_rng(0)
    z = np.concatenate([rng.uniform(-1, 4, size=(2000, 1)),
                        rng.uniform(-1, 1, size=(2000, 2))], axis=1)
    assert np.all(eu.fn(z) == 0.0)


def test_extend_axial_reflection_value(lin_ctx):
    u = make_field("axial", 3)
    eu = extend_lipschitz(lin_ctx, u)
    # reflection preserves t, so the collar value is cutoff * t
    assert eu.fn(np.array([0.5, 1.5 * 0.125, 0.0])) == pytest.approx(0.25)


def test_trace_identity_exact(pow_ctx):
    for name in ("constant", "axial", "wave"):
        u = make_field(name, 3)
        eu = extend_lipschitz(pow_ctx, u)
        rep = verify.trace_check(eu, u, POW_SPEC, count=10_000, rng_seed=1)
        assert rep.exact
        assert rep.max_abs_error == 0.0


def test_support_vanishes_outside(pow_ctx):
    u = make_field("wave", 3)
    eu = extend_lipschitz(pow_ctx, u)
    rep = verify.support_check(pow_ctx, eu, count=5000, rng_seed=2)
    assert rep.ok and rep.max_abs_outside == 0.0


def test_linearity_pointwise(pow_ctx):
    u = make_field("axial", 3)
    v = make_field("radial-sq", 3)
    rng = np.random.default_rng(3)
    pts = np.concatenate([rng.uniform(-0.5, 3.5, size=(3000, 1)),
                          rng.uniform(-0.6, 0.6, size=(3000, 2))], axis=1)
    rep = verify.linearity_check(verify.make_lipschitz_builder(pow_ctx), u, v, pts)
    assert rep.max_abs_error <= 1e-12


def test_boundary_decay(pow_ctx):
    for name in ("constant", "axial", "wave"):
        u = make_field(name, 3)
        eu = extend_lipschitz(pow_ctx, u)
        rep = verify.boundary_decay_check(pow_ctx, eu, u, rays=999, rng_seed=4)
        assert rep.ok, rep


def test_seam_continuity_mirror_passes(pow_ctx):
    u = make_field("axial", 3)
    eu = extend_lipschitz(pow_ctx, u)
    report = verify.seam_continuity_check(pow_ctx, eu, per_seam=200, rng_seed=5)
    cap = 4.0 * (1.0 / POW_SPEC.psi.value(0.05) + 2.0)
    ok, worst = verify.seam_verdict(report, cap)
    assert ok, (worst, report[worst] if worst else None)


@pytest.mark.parametrize("mode", ["shift1", "shift2"])
def test_seam_detector_flags_shift_modes(mode):
    # the literal axial shifts leave an O(1) jump at the cap interface for
    # axially-varying fields; the seam check is the designated detector
    ctx = ExtensionContext(POW_SPEC, mode)
    u = make_field("axial", 3)
    eu = extend_lipschitz(ctx, u)
    report = verify.seam_continuity_check(ctx, eu, per_seam=100, rng_seed=6)
    cap = 4.0 * (1.0 / POW_SPEC.psi.value(0.05) + 2.0)
    ok, worst = verify.seam_verdict(report, cap)
    assert not ok
    assert worst == "cap-interface"
    assert report["cap-interface"][1e-7] > 0.1  # jump does not shrink with delta


def test_extend_general_trace_step_profile():
    step = StepProfile([0.5, 1.0], [0.1, 0.2])
    u = make_field("wave", 3)
    conj = extend_general(u, step, 3)
    spec = DomainSpec(3, step)
    rep = verify.trace_check(conj.field, u, spec, count=10_000, rng_seed=7)
    assert rep.max_abs_error <= 1e-8


def test_extend_general_trace_unnormalized_power():
    # psi(1) = 1 forces an internal radial rescale before straightening
    u = make_field("constant", 3)
    conj = extend_general(u, PowerProfile(2.0), 3)
    assert conj.scale == pytest.approx(0.25)
    spec = DomainSpec(3, PowerProfile(2.0))
    rep = verify.trace_check(conj.field, u, spec, count=10_000, rng_seed=8)
    assert rep.max_abs_error <= 1e-8


def test_extend_general_matches_direct_on_domain():
    # for a Lipschitz linear profile the straightened route must agree with
    # the direct route on the domain itself (both reproduce u there)
    u = make_field("wave", 3)
    direct = extend_lipschitz(ExtensionContext(LIN_SPEC), u)
    conj = extend_general(u, LinearProfile(0.25), 3)
    rng = np.random.default_rng(9)
    z = sample_domain(LIN_SPEC, 5000, rng)
    assert np.max(np.abs(direct.fn(z) - conj.field.fn(z))) <= 1e-9


def test_extend_general_linearity():
    u = make_field("axial", 3)
    v = make_field("wave", 3)
    rng = np.random.default_rng(10)
    pts = np.concatenate([rng.uniform(-0.5, 3.5, size=(500, 1)),
                          rng.uniform(-0.6, 0.6, size=(500, 2))], axis=1)

    def build(w):
        return extend_general(w, PowerProfile(2.0), 3).field

    rep = verify.linearity_check(build, u, v, pts)
    assert rep.max_abs_error <= 1e-12


def test_extension_fd_gradient_matches_cutoff_gradient(lin_ctx):
    # inside the collar E(1) == cutoff, so FD of E must match the analytic
    # collar-weight gradient
    one = make_field("constant", 3)
    eu = extend_lipschitz(lin_ctx, one)
    z = np.array([[0.5, 0.15, 0.05], [0.7, -0.2, 0.1]])
    ana = cutoff_cusp_gradient(lin_ctx, z)
    num = fd_gradient(eu, z, h=1e-7)
    assert np.max(np.abs(ana - num)) <= 1e-5


def _region_samples(psi1_coeff=0.25, exponent=2.0, seed=0):
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.2, 0.95, 50)
    pv = psi1_coeff * t ** exponent
    th = rng.uniform(0, 2 * np.pi, 50)
    psi1 = psi1_coeff
    blocks = [
        np.stack([t, 0.6 * pv * np.cos(th), 0.6 * pv * np.sin(th)], axis=1),
        np.stack([t, 1.5 * pv * np.cos(th), 1.5 * pv * np.sin(th)], axis=1),
    ]
    tc = rng.uniform(1.1, 1.9, 50)
    blocks.append(np.stack([tc, 1.5 * psi1 * np.cos(th),
                            1.5 * psi1 * np.sin(th)], axis=1))
    tcap = rng.uniform(2.1, 2.9, 50)
    blocks.append(np.stack([tcap, 0.3 * psi1 * np.cos(th),
                            0.3 * psi1 * np.sin(th)], axis=1))
    blocks.append(np.stack([tcap, 1.5 * psi1 * np.cos(th),
                            1.5 * psi1 * np.sin(th)], axis=1))
    return np.concatenate(blocks)


@pytest.mark.parametrize("name", ["constant", "axial", "radial-sq", "wave",
                                  "tip-power"])
def test_extension_analytic_gradient_all_regions(pow_ctx, name):
    # chain-rule gradient against FD over interior points of every region
    u = make_field(name, 3)
    eu = extend_lipschitz(pow_ctx, u)
    assert eu.grad is not None
    z = _region_samples()
    ana = eu.grad(z)
    num = fd_gradient(eu, z, h=1e-7)
    scale = np.maximum(np.linalg.norm(ana, axis=1), 1.0)
    assert np.max(np.linalg.norm(ana - num, axis=1) / scale) <= 1e-5
