import numpy as np
import pytest

from quadplate import (
    BoundarySet,
    DegenerateGeometryError,
    GlobalSystem,
    Mesh,
    NumericalError,
    PlateMaterial,
    QuadGeometry,
    ValidationError,
    apply_bcs,
    assemble,
    build_scheme,
    element_matrices,
    frequency_parameter,
    gauss_rule,
    mesh_quad,
    mesh_triangle,
    modal_analysis,
    nodes_on_segment,
    solve_modes,
)
from quadplate.modal import _element_transform

from conftest import BIUNIT_SQUARE, SECTION_QUAD, UNIT_SQUARE

MAT = PlateMaterial(E=1365.0, nu=0.3, t=0.2, rho=5.0)
RULE = gauss_rule(3)


def clamp_polygon_boundary(mesh, vertices):
    v = np.asarray(vertices, dtype=float)
    for e in range(len(v)):
        nodes = nodes_on_segment(mesh, v[e], v[(e + 1) % len(v)])
        mesh.boundary_sets[f"edge{e}"] = BoundarySet("clamped", nodes)


class TestAssemble:
    def test_single_biunit_element_is_identity_transform(self):
        # J = I for the bi-unit square, so the global matrices equal the
        # element matrices (gathered through the mesh connectivity)
        mesh = mesh_quad(BIUNIT_SQUARE, 1, 1)
        system = assemble(mesh, MAT, scheme="bilinear", rule=RULE)
        em = element_matrices(build_scheme(QuadGeometry(BIUNIT_SQUARE),
                                           "bilinear"), MAT, RULE)
        dofs = np.concatenate([[3 * n, 3 * n + 1, 3 * n + 2]
                               for n in mesh.elements[0]])
        ix = np.ix_(dofs, dofs)
        np.testing.assert_allclose(system.k[ix], em.k, atol=1e-12)
        np.testing.assert_allclose(system.m[ix], em.m, atol=1e-14)

    def test_two_element_strip_scatter_oracle(self):
        # reimplement the scatter by hand and compare
        mesh = mesh_quad(SECTION_QUAD, 2, 1)
        system = assemble(mesh, MAT, scheme="pascal6", rule=RULE)
        ndof = 3 * mesh.n_nodes
        k_oracle = np.zeros((ndof, ndof))
        for conn in mesh.elements:
            scheme = build_scheme(QuadGeometry(mesh.nodes[conn]), "pascal6")
            em = element_matrices(scheme, MAT, RULE)
            t = _element_transform(scheme)
            ke = t.T @ em.k @ t
            dofs = np.concatenate([[3 * n, 3 * n + 1, 3 * n + 2]
                                   for n in conn])
            k_oracle[np.ix_(dofs, dofs)] += ke
        np.testing.assert_allclose(system.k, k_oracle, atol=1e-12)
        assert np.abs(system.k - system.k.T).max() <= \
            1e-10 * np.abs(system.k).max()

    def test_free_mesh_annihilates_uniform_translation(self):
        mesh = mesh_quad(SECTION_QUAD, 2, 2)
        system = assemble(mesh, MAT, scheme="pascal6", rule=RULE)
        v = np.zeros(system.n_dofs)
        v[0::3] = 1.0
        assert np.abs(system.k @ v).max() <= \
            1e-9 * np.linalg.norm(system.k) * np.linalg.norm(v)

    def test_workers_give_identical_result(self):
        mesh = mesh_quad(SECTION_QUAD, 2, 2)
        serial = assemble(mesh, MAT, workers=1)
        threaded = assemble(mesh, MAT, workers=4)
        assert np.array_equal(serial.k, threaded.k)
        assert np.array_equal(serial.m, threaded.m)

    def test_bad_node_index_rejected(self):
        mesh = Mesh(nodes=np.zeros((3, 2)), elements=[[0, 1, 2, 5]])
        with pytest.raises(DegenerateGeometryError):
            assemble(mesh, MAT)

    def test_clockwise_element_rejected(self):
        nodes = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        mesh = Mesh(nodes=nodes, elements=[[0, 3, 2, 1]])
        with pytest.raises(DegenerateGeometryError):
            assemble(mesh, MAT)

    def test_same_direction_shared_edge_rejected(self):
        # both elements are counterclockwise but traverse edge 1->2 in the
        # same direction (the second overlaps the first)
        nodes = np.array([[0, 0], [1, 0], [1, 1], [0, 1],
                          [0.5, 0.8], [0.5, 0.2]], dtype=float)
        mesh = Mesh(nodes=nodes, elements=[[0, 1, 2, 3], [1, 2, 4, 5]])
        with pytest.raises(DegenerateGeometryError):
            assemble(mesh, MAT)


class TestApplyBcs:
    def test_fully_clamped_two_by_two_leaves_center(self):
        mesh = mesh_quad(UNIT_SQUARE, 2, 2)
        clamp_polygon_boundary(mesh, UNIT_SQUARE)
        system = assemble(mesh, MAT)
        reduced = apply_bcs(system, mesh)
        assert reduced.n_dofs == 3
        kept_nodes = np.flatnonzero((reduced.dof_map >= 0).any(axis=1))
        np.testing.assert_allclose(mesh.nodes[kept_nodes][0], [0.5, 0.5])

    def test_free_plate_unchanged(self):
        mesh = mesh_quad(UNIT_SQUARE, 2, 2)
        system = assemble(mesh, MAT)
        reduced = apply_bcs(system, mesh)
        assert reduced.n_dofs == system.n_dofs
        np.testing.assert_allclose(reduced.k, system.k)

    def test_cantilever_dof_count(self):
        mesh = mesh_quad(UNIT_SQUARE, 3, 3)
        clamped = nodes_on_segment(mesh, [0, 0], [1, 0])
        mesh.boundary_sets["root"] = BoundarySet("clamped", clamped)
        reduced = apply_bcs(assemble(mesh, MAT), mesh)
        assert reduced.n_dofs == 3 * (mesh.n_nodes - len(clamped))

    def test_simply_supported_removes_deflection_only(self):
        mesh = mesh_quad(UNIT_SQUARE, 2, 2)
        edge = nodes_on_segment(mesh, [0, 0], [1, 0])
        mesh.boundary_sets["edge"] = BoundarySet("simply_supported", edge)
        reduced = apply_bcs(assemble(mesh, MAT), mesh)
        assert reduced.n_dofs == 3 * mesh.n_nodes - len(edge)

    def test_conflicting_sets_rejected(self):
        mesh = mesh_quad(UNIT_SQUARE, 2, 2)
        mesh.boundary_sets["a"] = BoundarySet("clamped", (0,))
        mesh.boundary_sets["b"] = BoundarySet("free", (0,))
        with pytest.raises(ValidationError):
            apply_bcs(assemble(mesh, MAT), mesh)

    def test_unknown_condition_rejected(self):
        with pytest.raises(ValidationError):
            BoundarySet("pinned", (0,))


class TestSolveModes:
    def test_diagonal_oracle(self):
        system = GlobalSystem(
            k=np.diag([1.0, 4.0]), m=np.eye(2), load=np.zeros(2),
            dof_map=np.array([[0, -1, -1], [1, -1, -1]]),
        )
        spectrum = solve_modes(system, 2)
        np.testing.assert_allclose(spectrum.omega, [1.0, 2.0], rtol=1e-12)

    def test_mass_orthonormal_modes(self):
        mesh = mesh_quad(SECTION_QUAD, 2, 2)
        clamp_polygon_boundary(mesh, SECTION_QUAD)
        reduced = apply_bcs(assemble(mesh, MAT), mesh)
        spectrum = solve_modes(reduced, 3)
        gram = spectrum.modes.T @ reduced.m @ spectrum.modes
        np.testing.assert_allclose(gram, np.eye(3), atol=1e-8)
        assert np.all(spectrum.residuals <= 1e-8)

    def test_free_plate_has_rigid_mode_first(self):
        mesh = mesh_quad(UNIT_SQUARE, 4, 4)
        spectrum = modal_analysis(mesh, MAT, scheme="bilinear", count=4)
        params = frequency_parameter(spectrum.omega, 1.0, MAT, "plain")
        assert params[0] < 1e-4
        assert params[-1] > 1.0

    def test_count_exceeding_dimension_rejected(self):
        system = GlobalSystem(k=np.eye(2), m=np.eye(2), load=np.zeros(2),
                              dof_map=np.array([[0, 1, -1]]))
        with pytest.raises(ValidationError):
            solve_modes(system, 3)

    def test_count_exceeding_finite_modes_rejected(self):
        # deflection-only mass of one free element has rank 3
        mesh = mesh_quad(UNIT_SQUARE, 1, 1)
        system = assemble(mesh, MAT, scheme="bilinear")
        with pytest.raises(NumericalError):
            solve_modes(system, 6)

    def test_zero_count_gives_empty_spectrum(self):
        mesh = mesh_quad(UNIT_SQUARE, 1, 1)
        system = assemble(mesh, MAT, scheme="bilinear")
        spectrum = solve_modes(system, 0)
        assert spectrum.omega.size == 0
        assert spectrum.modes.shape == (system.n_dofs, 0)

    def test_deterministic_mode_signs(self):
        mesh = mesh_quad(SECTION_QUAD, 2, 2)
        clamp_polygon_boundary(mesh, SECTION_QUAD)
        reduced = apply_bcs(assemble(mesh, MAT), mesh)
        first = solve_modes(reduced, 3)
        second = solve_modes(reduced, 3)
        assert np.array_equal(first.modes, second.modes)
        for j in range(3):
            lead = np.argmax(np.abs(first.modes[:, j]))
            assert first.modes[lead, j] > 0


class TestFrequencyParameter:
    def test_normalized_material_is_identity(self):
        # rho t a^4 = D = 1, so the parameter equals omega itself
        value = frequency_parameter(7.589261, 1.0, MAT, "plain")
        assert value == pytest.approx(7.589261, rel=1e-12)

    def test_pi_squared_normalization(self):
        assert frequency_parameter(np.pi ** 2, 1.0, MAT, "per_pi2") == \
            pytest.approx(1.0, rel=1e-12)

    def test_plain_equals_per_pi2_times_pi2(self):
        omega = np.array([1.3, 8.8, 17.0])
        plain = frequency_parameter(omega, 2.0, MAT, "plain")
        per = frequency_parameter(omega, 2.0, MAT, "per_pi2")
        np.testing.assert_allclose(plain, per * np.pi ** 2, rtol=1e-14)

    def test_invalid_inputs(self):
        with pytest.raises(ValidationError):
            frequency_parameter(1.0, 0.0, MAT)
        with pytest.raises(ValidationError):
            frequency_parameter(1.0, 1.0, MAT, "per_pi")


class TestMeshGenerators:
    def test_triangle_level_one_counts(self):
        mesh = mesh_triangle([[0, 0], [1, 0], [0, 1]], 1)
        assert mesh.n_elements == 3
        assert mesh.n_nodes == 7

    @pytest.mark.parametrize("level,expected", [(1, 3), (2, 12), (3, 27)])
    def test_triangle_element_counts(self, level, expected):
        mesh = mesh_triangle([[0, 0], [2, 0], [1, 1.5]], level)
        assert mesh.n_elements == expected

    def test_triangle_elements_counterclockwise(self):
        mesh = mesh_triangle([[0, 0], [2, 0], [0.4, 1.7]], 3)
        for conn in mesh.elements:
            v = mesh.nodes[conn]
            area2 = np.sum(v[:, 0] * np.roll(v[:, 1], -1)
                           - np.roll(v[:, 0], -1) * v[:, 1])
            assert area2 > 0

    def test_triangle_tip_row_is_collapsed(self):
        # the level elements touching the apex are triangles sharing the
        # apex node; all other elements are proper quads
        vertices = np.array([[0, 0], [2, 0.5], [0, 1]], dtype=float)
        for level in (1, 2, 3):
            mesh = mesh_triangle(vertices, level)
            collapsed = [conn for conn in mesh.elements
                         if len(set(int(c) for c in conn)) == 3]
            assert len(collapsed) == level
            apex = {int(c) for conn in collapsed for c in conn
                    if list(conn).count(c) == 2}
            assert len(apex) == 1
            np.testing.assert_allclose(mesh.nodes[apex.pop()], vertices[1],
                                       atol=1e-12)

    def test_triangle_mesh_assembles_and_solves(self):
        vertices = np.array([[0, 0], [1, 0.25], [0, 0.5]], dtype=float)
        mesh = mesh_triangle(vertices, 2)
        clamped = nodes_on_segment(mesh, vertices[2], vertices[0])
        mesh.boundary_sets["root"] = BoundarySet("clamped", clamped)
        spectrum = modal_analysis(mesh, MAT, scheme="bilinear", count=2)
        assert np.all(spectrum.omega > 0)
        assert np.all(spectrum.residuals <= 1e-8)
        # total mass is preserved through collapsed elements
        system = assemble(mesh, MAT, scheme="bilinear")
        v = np.zeros(system.n_dofs)
        v[0::3] = 1.0
        area = 0.5 * 0.5 * 1.0  # triangle area: base 0.5, span 1
        assert v @ system.m @ v == pytest.approx(MAT.rho * MAT.t * area,
                                                 rel=1e-10)

    def test_triangle_clockwise_input_reordered(self):
        with pytest.warns(UserWarning, match="clockwise"):
            mesh = mesh_triangle([[0, 0], [0, 1], [1, 0]], 1)
        assert mesh.n_elements == 3

    def test_quad_one_by_one_is_the_quad(self):
        mesh = mesh_quad(SECTION_QUAD, 1, 1)
        assert mesh.n_elements == 1
        np.testing.assert_allclose(mesh.nodes[mesh.elements[0]],
                                   SECTION_QUAD, atol=1e-12)

    def test_quad_two_by_two_counts(self):
        mesh = mesh_quad(UNIT_SQUARE, 2, 2)
        assert mesh.n_nodes == 9
        assert mesh.n_elements == 4

    def test_quad_eight_by_eight_positive_jacobians(self):
        vertices = [[0, 0], [1, 0], [0.7929, 0.7727], [0.2394, 0.6577]]
        mesh = mesh_quad(vertices, 8, 8)
        assert mesh.n_nodes == 81
        assert mesh.n_elements == 64
        rng = np.random.default_rng(4)
        for conn in mesh.elements:
            scheme = build_scheme(QuadGeometry(mesh.nodes[conn]), "bilinear")
            for theta in rng.uniform(-1, 1, (3, 2)):
                matrix = scheme.params.gradient(theta)
                det = matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]
                assert det > 0

    def test_invalid_inputs(self):
        with pytest.raises(ValidationError):
            mesh_quad(UNIT_SQUARE, 0, 2)
        with pytest.raises(ValidationError):
            mesh_triangle([[0, 0], [1, 0], [0, 1]], 0)
        with pytest.raises(DegenerateGeometryError):
            mesh_triangle([[0, 0], [1, 1], [2, 2]], 1)

    def test_nodes_on_segment(self):
        mesh = mesh_quad(UNIT_SQUARE, 2, 2)
        bottom = nodes_on_segment(mesh, [0, 0], [1, 0])
        assert len(bottom) == 3
        np.testing.assert_allclose(mesh.nodes[list(bottom)][:, 1], 0.0)


class TestSchemeComparison:
    def test_pascal_and_bilinear_spectra_agree(self):
        # straight edges: the mapping polynomials coincide, so element
        # matrices and spectra agree
        mesh = mesh_quad(SECTION_QUAD, 2, 2)
        clamp_polygon_boundary(mesh, SECTION_QUAD)
        omega = {}
        for kind in ("bilinear", "pascal6"):
            spectrum = modal_analysis(mesh, MAT, scheme=kind, count=3)
            omega[kind] = spectrum.omega
        np.testing.assert_allclose(omega["pascal6"], omega["bilinear"],
                                   rtol=1e-8)
