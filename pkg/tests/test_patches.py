import numpy as np
import pytest

import curlmg as cm
from curlmg.patches import PatchCollection, patch_correct


@pytest.fixture(scope="module")
def cube_k1():
    mesh = cm.build_initial(cm.Domain.CUBE).refine()
    op, dofs = cm.assemble(mesh, cm.CoefficientField(1.0, 1.0, 1.0, 1.0))
    return mesh, op, dofs


@pytest.fixture(scope="module")
def fichera_k1():
    mesh = cm.build_initial(cm.Domain.FICHERA).refine()
    op, dofs = cm.assemble(mesh, cm.CoefficientField(1.0, 1.0, 1.0, 1.0))
    return mesh, op, dofs


@pytest.fixture(scope="module")
def cube_k2():
    mesh = cm.build_initial(cm.Domain.CUBE).refine().refine()
    op, dofs = cm.assemble(mesh, cm.CoefficientField(100.0, 1.0, 1.0, 1.0))
    return mesh, op, dofs


class TestCounts:
    def test_cube_k1(self, cube_k1):
        _, op, dofs = cube_k1
        interior = cm.build_interior_patches(1, op, dofs)
        edges = cm.build_edge_patches(1, op, dofs)
        verts = cm.build_vertex_patches(1, op, dofs)
        assert len(interior) == 8
        assert len(edges) == 6
        assert len(verts) == 1
        assert sum(len(p.dofs) for p in interior) == 48  # 108 - 60 on skeleton

    def test_fichera_k1(self, fichera_k1):
        _, op, dofs = fichera_k1
        assert len(cm.build_interior_patches(1, op, dofs)) == 7
        assert len(cm.build_edge_patches(1, op, dofs)) == 3
        assert cm.build_vertex_patches(1, op, dofs) == []

    @pytest.mark.parametrize("fixture", ["cube_k1", "cube_k2", "fichera_k1"])
    def test_canonical_patch_sizes(self, fixture, request):
        _, op, dofs = request.getfixturevalue(fixture)
        for p in cm.build_interior_patches(dofs.level, op, dofs):
            assert p.dofs.shape == (6,)
        for p in cm.build_edge_patches(dofs.level, op, dofs):
            assert p.skeleton_dofs.shape == (18,)
            assert p.interior_dofs.shape == (24,)
            assert p.extension.shape == (24, 18)
            assert p.schur.shape == (18, 18)
        for p in cm.build_vertex_patches(dofs.level, op, dofs):
            assert p.skeleton_dofs.shape == (60,)
            assert p.interior_dofs.shape == (48,)
            assert p.extension.shape == (48, 60)
            assert p.schur.shape == (60, 60)

    def test_level_zero_rejected(self):
        mesh = cm.build_initial(cm.Domain.CUBE)
        op, dofs = cm.assemble(mesh, cm.CoefficientField(1.0, 1.0))
        with pytest.raises(cm.MeshConsistencyError):
            cm.build_interior_patches(0, op, dofs)

    def test_level_mismatch_rejected(self, cube_k1):
        _, op, dofs = cube_k1
        with pytest.raises(cm.MeshConsistencyError):
            cm.build_interior_patches(2, op, dofs)

    def test_unknown_kind_rejected(self, cube_k1):
        _, op, dofs = cube_k1
        with pytest.raises(ValueError):
            PatchCollection.build(1, op, dofs, "face")


class TestLocalOperators:
    def test_interior_matrix_is_principal_submatrix(self, cube_k1):
        _, op, dofs = cube_k1
        A = op.matrix.toarray()
        for p in cm.build_interior_patches(1, op, dofs):
            assert np.array_equal(p.matrix, A[np.ix_(p.dofs, p.dofs)])

    @pytest.mark.parametrize("fixture", ["cube_k1", "cube_k2", "fichera_k1"])
    def test_schur_symmetry(self, fixture, request):
        _, op, dofs = request.getfixturevalue(fixture)
        patches = cm.build_edge_patches(dofs.level, op, dofs) + cm.build_vertex_patches(
            dofs.level, op, dofs
        )
        for p in patches:
            assert np.abs(p.schur - p.schur.T).max() <= 1e-12 * np.abs(p.schur).max()

    @pytest.mark.parametrize("fixture", ["cube_k1", "cube_k2", "fichera_k1"])
    def test_basis_a_orthogonal_to_interior_spaces(self, fixture, request):
        # the defining constraint: each harmonic basis function has zero
        # energy coupling with the adjacent cell interiors
        _, op, dofs = request.getfixturevalue(fixture)
        A = op.matrix
        patches = cm.build_edge_patches(dofs.level, op, dofs) + cm.build_vertex_patches(
            dofs.level, op, dofs
        )
        for p in patches:
            for i in range(len(p.skeleton_dofs)):
                phi = p.basis_vector(i, dofs.n)
                r = A @ phi
                rel = np.abs(r[p.interior_dofs]).max() / np.abs(r).max()
                assert rel <= 1e-10

    def test_schur_equals_harmonic_galerkin_matrix(self, cube_k1):
        # independent route: S_ij = a(phi_i, phi_j) assembled from global
        # basis vectors
        _, op, dofs = cube_k1
        A = op.matrix
        for p in cm.build_edge_patches(1, op, dofs)[:3] + cm.build_vertex_patches(1, op, dofs):
            s = len(p.skeleton_dofs)
            basis = np.column_stack([p.basis_vector(i, dofs.n) for i in range(s)])
            gal = basis.T @ (A @ basis)
            assert np.abs(gal - p.schur).max() <= 1e-10 * np.abs(p.schur).max()


class TestCoverage:
    @pytest.mark.parametrize("fixture", ["cube_k1", "cube_k2", "fichera_k1"])
    def test_edge_decomposition_covers_all_free_dofs(self, fixture, request):
        _, op, dofs = request.getfixturevalue(fixture)
        pc = PatchCollection.build(dofs.level, op, dofs, "edge")
        covered = set()
        for p in pc.interior:
            covered.update(p.dofs.tolist())
        for p in pc.skeleton:
            covered.update(p.skeleton_dofs.tolist())
        assert covered == set(range(dofs.n))

    def test_vertex_decomposition_covers_cube(self, cube_k1):
        _, op, dofs = cube_k1
        pc = PatchCollection.build(1, op, dofs, "vertex")
        covered = set()
        for p in pc.interior:
            covered.update(p.dofs.tolist())
        for p in pc.skeleton:
            covered.update(p.skeleton_dofs.tolist())
        assert covered == set(range(dofs.n))

    def test_vertex_decomposition_incomplete_on_fichera_first_level(self, fichera_k1):
        # T_0 of the nonconvex domain has no interior vertices, so the
        # vertex decomposition misses every skeleton DOF at k=1
        _, op, dofs = fichera_k1
        pc = PatchCollection.build(1, op, dofs, "vertex")
        covered = set()
        for p in pc.interior:
            covered.update(p.dofs.tolist())
        assert len(covered) == 42
        assert covered != set(range(dofs.n))


class TestPatchCorrect:
    def test_zero_residual(self, cube_k1):
        _, op, dofs = cube_k1
        pc = PatchCollection.build(1, op, dofs, "edge")
        for p in list(pc)[:4]:
            out = patch_correct(p, np.zeros(dofs.n))
            assert np.array_equal(out, np.zeros(dofs.n))

    def test_inverts_on_own_subspace(self, cube_k1):
        # r = A phi_i  ->  correction reproduces phi_i
        _, op, dofs = cube_k1
        A = op.matrix
        pc = PatchCollection.build(1, op, dofs, "edge")
        for p in pc.skeleton:
            phi = p.basis_vector(7, dofs.n)
            out = patch_correct(p, A @ phi)
            assert np.abs(out - phi).max() <= 1e-10 * np.abs(phi).max()

    def test_interior_inverts_on_own_subspace(self, cube_k1):
        _, op, dofs = cube_k1
        A = op.matrix
        pc = PatchCollection.build(1, op, dofs, "edge")
        for p in pc.interior:
            v = np.zeros(dofs.n)
            v[p.dofs] = np.arange(1.0, 7.0)
            out = patch_correct(p, A @ v)
            assert np.abs(out - v).max() <= 1e-10 * np.abs(v).max()

    def test_residual_outside_patch_gives_zero(self, cube_k1):
        _, op, dofs = cube_k1
        pc = PatchCollection.build(1, op, dofs, "edge")
        p = pc.skeleton[0]
        support = set(p.skeleton_dofs.tolist()) | set(p.interior_dofs.tolist())
        r = np.zeros(dofs.n)
        outside = [i for i in range(dofs.n) if i not in support][:10]
        r[outside] = 1.0
        assert np.array_equal(patch_correct(p, r), np.zeros(dofs.n))

    def test_cached_factor_roundtrip(self, cube_k1):
        _, op, dofs = cube_k1
        rng = np.random.default_rng(9)
        pc = PatchCollection.build(1, op, dofs, "edge")
        pv = PatchCollection.build(1, op, dofs, "vertex")
        for p in list(pc.interior) + list(pc.skeleton) + list(pv.skeleton):
            M = p.matrix if hasattr(p, "matrix") else p.schur
            b = rng.standard_normal(M.shape[0])
            x = p.factor.solve(b)
            assert np.linalg.norm(M @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_batched_application_matches_per_patch_sum(self, cube_k2):
        _, op, dofs = cube_k2
        pc = PatchCollection.build(2, op, dofs, "vertex")
        rng = np.random.default_rng(8)
        r = rng.standard_normal(dofs.n)
        reference = np.zeros(dofs.n)
        for p in pc:
            reference += patch_correct(p, r)
        fast = pc.apply_corrections(r)
        assert np.abs(fast - reference).max() <= 1e-11 * np.abs(reference).max()
