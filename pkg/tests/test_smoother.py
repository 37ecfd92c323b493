import numpy as np
import pytest

import curlmg as cm
from curlmg.patches import PatchCollection, patch_correct
from curlmg.smoother import ADMISSIBLE_BOUND, DEFAULT_DAMPING


@pytest.fixture(scope="module")
def cube_k1_setup():
    mesh = cm.build_initial(cm.Domain.CUBE).refine()
    op, dofs = cm.assemble(mesh, cm.CoefficientField(1.0, 1.0, 1.0, 1.0))
    pc = {
        "edge": PatchCollection.build(1, op, dofs, "edge"),
        "vertex": PatchCollection.build(1, op, dofs, "vertex"),
    }
    return op, dofs, pc


class TestApply:
    def test_zero(self, cube_k1_setup):
        op, dofs, pc = cube_k1_setup
        cfg = cm.SmootherConfig(cm.SmootherVariant.EDGE)
        out = cm.smoother_apply(cfg, pc["edge"], np.zeros(dofs.n))
        assert np.array_equal(out, np.zeros(dofs.n))

    def test_equals_damped_sum_of_patch_corrections(self, cube_k1_setup):
        op, dofs, pc = cube_k1_setup
        cfg = cm.SmootherConfig(cm.SmootherVariant.EDGE, eta=1.0 / 12.0)
        rng = np.random.default_rng(1)
        r = rng.standard_normal(dofs.n)
        reference = np.zeros(dofs.n)
        for p in pc["edge"]:
            reference += patch_correct(p, r)
        reference /= 12.0
        out = cm.smoother_apply(cfg, pc["edge"], r)
        assert np.abs(out - reference).max() <= 1e-13 * np.abs(reference).max()

    def test_linearity(self, cube_k1_setup):
        op, dofs, pc = cube_k1_setup
        cfg = cm.SmootherConfig(cm.SmootherVariant.VERTEX)
        rng = np.random.default_rng(2)
        r1 = rng.standard_normal(dofs.n)
        r2 = rng.standard_normal(dofs.n)
        out = cm.smoother_apply(cfg, pc["vertex"], r1 + r2)
        parts = cm.smoother_apply(cfg, pc["vertex"], r1) + cm.smoother_apply(
            cfg, pc["vertex"], r2
        )
        assert np.abs(out - parts).max() <= 1e-12 * np.abs(out).max()

    @pytest.mark.parametrize("variant", ["edge", "vertex"])
    def test_symmetry(self, cube_k1_setup, variant):
        op, dofs, pc = cube_k1_setup
        cfg = cm.SmootherConfig(cm.SmootherVariant(variant))
        rng = np.random.default_rng(3)
        for _ in range(5):
            r = rng.standard_normal(dofs.n)
            s = rng.standard_normal(dofs.n)
            lhs = cm.smoother_apply(cfg, pc[variant], r) @ s
            rhs = cm.smoother_apply(cfg, pc[variant], s) @ r
            assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)

    @pytest.mark.parametrize("variant", ["edge", "vertex"])
    def test_preconditioned_operator_a_selfadjoint_and_psd(self, cube_k1_setup, variant):
        op, dofs, pc = cube_k1_setup
        A = op.matrix
        cfg = cm.SmootherConfig(cm.SmootherVariant(variant))
        rng = np.random.default_rng(4)
        apply_ma = lambda v: cm.smoother_apply(cfg, pc[variant], A @ v)
        for _ in range(5):
            x = rng.standard_normal(dofs.n)
            y = rng.standard_normal(dofs.n)
            lhs = cm.a_inner(A, apply_ma(x), y)
            rhs = cm.a_inner(A, x, apply_ma(y))
            assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)
            assert cm.a_inner(A, apply_ma(x), x) >= -1e-12

    def test_variant_mismatch_rejected(self, cube_k1_setup):
        op, dofs, pc = cube_k1_setup
        cfg = cm.SmootherConfig(cm.SmootherVariant.EDGE)
        with pytest.raises(cm.ConfigurationError):
            cm.smoother_apply(cfg, pc["vertex"], np.zeros(dofs.n))

    def test_size_mismatch_rejected(self, cube_k1_setup):
        op, dofs, pc = cube_k1_setup
        cfg = cm.SmootherConfig(cm.SmootherVariant.EDGE)
        with pytest.raises(cm.ConfigurationError):
            cm.smoother_apply(cfg, pc["edge"], np.zeros(dofs.n + 1))


class TestConfig:
    def test_defaults(self):
        assert cm.SmootherConfig(cm.SmootherVariant.EDGE).resolved_eta == DEFAULT_DAMPING[
            cm.SmootherVariant.EDGE
        ]
        assert cm.SmootherConfig(cm.SmootherVariant.VERTEX).resolved_eta == DEFAULT_DAMPING[
            cm.SmootherVariant.VERTEX
        ]

    def test_nonpositive_eta_rejected(self):
        with pytest.raises(cm.ConfigurationError):
            cm.SmootherConfig(cm.SmootherVariant.EDGE, eta=0.0)

    def test_warning_above_admissible_bound(self):
        with pytest.warns(cm.AdmissibilityWarning):
            cm.SmootherConfig(cm.SmootherVariant.VERTEX, eta=0.5)

    def test_no_warning_at_bound(self, recwarn):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error", cm.AdmissibilityWarning)
            cm.SmootherConfig(cm.SmootherVariant.EDGE, eta=ADMISSIBLE_BOUND[cm.SmootherVariant.EDGE])
            cm.SmootherConfig(cm.SmootherVariant.VERTEX, eta=1.0 / 8.0)


class TestSpectralCondition:
    @pytest.mark.parametrize(
        "variant,eta", [(cm.SmootherVariant.EDGE, 1.0 / 12.0), (cm.SmootherVariant.VERTEX, 1.0 / 8.0)]
    )
    def test_admissible_at_bound(self, cube_k1_setup, variant, eta):
        op, dofs, pc = cube_k1_setup
        cfg = cm.SmootherConfig(variant, eta=eta)
        rho = cm.check_spectral_condition(cfg, op, pc[variant.value])
        assert rho <= 1.0 + 1e-8

    def test_estimate_scales_linearly_in_eta(self, cube_k1_setup):
        op, dofs, pc = cube_k1_setup
        cfg1 = cm.SmootherConfig(cm.SmootherVariant.EDGE, eta=1.0 / 12.0)
        cfg2 = cm.SmootherConfig(cm.SmootherVariant.EDGE, eta=3.0 / 12.0)
        r1 = cm.check_spectral_condition(cfg1, op, pc["edge"], tol=1e-12)
        r2 = cm.check_spectral_condition(cfg2, op, pc["edge"], tol=1e-12)
        assert r2 == pytest.approx(3.0 * r1, rel=1e-9)

    @pytest.mark.parametrize("domain", [cm.Domain.CUBE, cm.Domain.FICHERA])
    @pytest.mark.parametrize("variant", ["edge", "vertex"])
    def test_admissible_at_default_damping(self, domain, variant):
        # the calibrated defaults exceed the guaranteed bounds, but the
        # spectral condition must still hold on the benchmark problems
        from curlmg.patches import PatchCollection

        meshes = cm.build_hierarchy_meshes(domain, 2)
        for ab in (0.01, 100.0):
            coeffs = cm.CoefficientField(ab, 1.0, 1.0, 1.0)
            for k in (1, 2):
                op, dofs = cm.assemble(meshes[k], coeffs)
                patches = PatchCollection.build(k, op, dofs, variant)
                cfg = cm.SmootherConfig(cm.SmootherVariant(variant))
                rho = cm.check_spectral_condition(cfg, op, patches, tol=1e-9, max_it=2000)
                assert rho <= 1.0 + 1e-8

    def test_vertex_sum_is_projection_on_first_level(self, cube_k1_setup):
        # interior and vertex subspaces are mutually a-orthogonal and span
        # the whole space on the cube at k=1, so the undamped correction sum
        # is the identity and rho(M^-1 A) = eta exactly
        op, dofs, pc = cube_k1_setup
        cfg = cm.SmootherConfig(cm.SmootherVariant.VERTEX, eta=1.0 / 8.0)
        rho = cm.check_spectral_condition(cfg, op, pc["vertex"], tol=1e-12)
        assert rho == pytest.approx(1.0 / 8.0, rel=1e-10)
