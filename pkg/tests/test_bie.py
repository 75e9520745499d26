import numpy as np
import pytest

from eitdisk.annulus import (AnnulusConfig, gap_coefficient,
                             inner_trace_coefficient)
from eitdisk.bie import (NystromMesh, double_layer, dtn_matrix,
                         fundamental_solution, modified_double_layer,
                         normal_derivative, single_layer, solve_forward)
from eitdisk.dtn import gap_from_lambda0, to_real_trig_basis
from eitdisk.exceptions import CoincidentPoints, UnsupportedSelfInteraction
from eitdisk.geometry import BoundaryCurve


def unit_mesh(n=64):
    return NystromMesh(BoundaryCurve.circle(radius=1.0), n, "outer")


def inner_circle(n, rho):
    return NystromMesh(BoundaryCurve.circle(radius=rho), n, "inner")


class TestFundamentalSolution:
    def test_unit_distance(self):
        assert fundamental_solution([0.0, 0.0], [1.0, 0.0]) == 0.0

    def test_log_inversion(self):
        d = np.exp(-2 * np.pi)
        assert abs(fundamental_solution([0.0, 0.0], [d, 0.0]) - 1.0) < 1e-14

    def test_symmetry(self):
        rng = np.random.Generator(np.random.Philox(1))
        for _ in range(5):
            x, y = rng.normal(size=2), rng.normal(size=2)
            assert fundamental_solution(x, y) == fundamental_solution(y, x)

    def test_coincident(self):
        with pytest.raises(CoincidentPoints):
            fundamental_solution([1.0, 2.0], [1.0, 2.0])


class TestDoubleLayer:
    def test_gauss_identity_inside(self):
        mesh = unit_mesh()
        val = double_layer(mesh, np.array([[0.3, 0.1]])).matrix @ np.ones(64)
        assert abs(val[0] + 2.0) < 1e-12

    def test_gauss_identity_outside(self):
        mesh = inner_circle(64, 0.5)
        val = double_layer(mesh, np.array([[10.0, 0.0]])).matrix @ np.ones(64)
        assert abs(val[0]) < 1e-12

    def test_gauss_identity_on_curve(self):
        # the cardioid parametrization has a nearby complex pole, so its
        # trapezoidal quadrature needs more nodes for the same accuracy
        cases = [(BoundaryCurve.circle(radius=1.0), 64),
                 (BoundaryCurve.ellipse(0.5, 0.3), 64),
                 (BoundaryCurve.cardioid(), 256)]
        for curve, n in cases:
            mesh = NystromMesh(curve, n, "inner")
            row_sums = double_layer(mesh, mesh).matrix @ np.ones(n)
            assert np.max(np.abs(row_sums + 1.0)) < 1e-10

    def test_entries_match_kernel(self):
        src = inner_circle(32, 0.5)
        tgt = unit_mesh(16)
        mat = double_layer(src, tgt).matrix
        rng = np.random.Generator(np.random.Philox(2))
        for _ in range(5):
            i = int(rng.integers(16))
            j = int(rng.integers(32))
            d = tgt.points[i] - src.points[j]
            ker = (d @ src.normals[j]) / (d @ d) / (2 * np.pi)
            want = 2.0 * ker * src.jacobians[j] * src.weight
            assert abs(mat[i, j] - want) < 1e-14


class TestModifiedDoubleLayer:
    def test_constant_density_outside(self):
        # plain part vanishes outside by the Gauss identity; the constant
        # modification contributes 2 * length = 2 pi for radius one half
        mesh = inner_circle(64, 0.5)
        val = modified_double_layer(mesh, np.array([[0.8, 0.0]]),
                                    "constant").matrix @ np.ones(64)
        assert abs(val[0] - 2 * np.pi) < 1e-12

    def test_difference_is_constant_in_x(self):
        mesh = inner_circle(64, 0.5)
        rng = np.random.Generator(np.random.Philox(3))
        psi = rng.normal(size=64)
        pts = np.array([[0.8, 0.0], [0.0, 0.9], [-0.6, 0.3]])
        plain = double_layer(mesh, pts).matrix @ psi
        modc = modified_double_layer(mesh, pts, "constant").matrix @ psi
        diff = modc - plain
        assert np.max(np.abs(diff - diff[0])) < 1e-13
        assert abs(diff[0] - 2 * psi.sum() * mesh.jacobians[0] * mesh.weight) < 1e-12

    def test_zero_mean_density_equals_plain(self):
        mesh = inner_circle(64, 0.5)
        t = mesh.theta
        psi = np.cos(3 * t)
        pts = np.array([[0.7, 0.2]])
        plain = double_layer(mesh, pts).matrix @ psi
        for modification in ("constant", "monopole"):
            mod = modified_double_layer(mesh, pts, modification).matrix @ psi
            assert abs(mod[0] - plain[0]) < 1e-12

    def test_monopole_vanishes_on_unit_circle(self):
        src = inner_circle(32, 0.4)
        tgt = unit_mesh(32)
        plain = double_layer(src, tgt).matrix
        mono = modified_double_layer(src, tgt, "monopole").matrix
        assert np.max(np.abs(plain - mono)) < 1e-14

    def test_requires_origin_inside(self):
        mesh = NystromMesh(BoundaryCurve.circle(center=(2.0, 0.0), radius=0.3),
                           32, "inner")
        with pytest.raises(ValueError):
            modified_double_layer(mesh, np.array([[0.0, 0.0]]))


class TestSingleLayer:
    def test_constant_density_at_center_unit(self):
        mesh = unit_mesh()
        val = single_layer(mesh, np.array([[0.0, 0.0]])).matrix @ np.ones(64)
        assert abs(val[0]) < 1e-13

    def test_constant_density_at_center_half(self):
        mesh = inner_circle(64, 0.5)
        val = single_layer(mesh, np.array([[0.0, 0.0]])).matrix @ np.ones(64)
        assert abs(val[0] - (-0.5 * np.log(0.5))) < 1e-13
        assert abs(-0.5 * np.log(0.5) - 0.34657359027997264) < 1e-15

    def test_self_interaction_circle_symbol(self):
        # S[cos(k s)] = (rho / 2k) cos(k t) on a circle of radius rho
        mesh = inner_circle(64, 0.5)
        t = mesh.theta
        s = single_layer(mesh, mesh).matrix
        for k in range(1, 5):
            got = s @ np.cos(k * t)
            want = 0.5 / (2 * k) * np.cos(k * t)
            assert np.max(np.abs(got - want)) < 1e-8


class TestNormalDerivative:
    def test_double_layer_constant_from_inner_source(self):
        # the double layer of a constant is constant off the curve, so its
        # gradient on the other boundary vanishes
        src = inner_circle(64, 0.5)
        tgt = unit_mesh(64)
        val = normal_derivative(src, tgt, of="double_layer").matrix @ np.ones(64)
        assert np.max(np.abs(val)) < 1e-12

    def test_single_layer_entries(self):
        src = inner_circle(32, 0.5)
        tgt = unit_mesh(16)
        mat = normal_derivative(src, tgt, of="single_layer").matrix
        rng = np.random.Generator(np.random.Philox(4))
        for _ in range(5):
            i = int(rng.integers(16))
            j = int(rng.integers(32))
            d = tgt.points[i] - src.points[j]
            ker = -(d @ tgt.normals[i]) / (d @ d) / (2 * np.pi)
            want = ker * src.jacobians[j] * src.weight
            assert abs(mat[i, j] - want) < 1e-14

    def test_hypersingular_circle_symbol(self):
        # factor-2 normal derivative of the double layer on the unit circle
        # multiplies cos(k t) by -k
        mesh = unit_mesh(64)
        t = mesh.theta
        mat = normal_derivative(mesh, mesh, of="double_layer").matrix
        for k in range(1, 5):
            got = mat @ np.cos(k * t)
            assert np.max(np.abs(got + k * np.cos(k * t))) < 1e-6

    def test_hypersingular_annihilates_constants(self):
        mesh = NystromMesh(BoundaryCurve.ellipse(0.5, 0.3), 64, "inner")
        mat = normal_derivative(mesh, mesh, of="double_layer").matrix
        assert np.max(np.abs(mat @ np.ones(64))) < 1e-10

    def test_direct_self_raises(self):
        mesh = unit_mesh(32)
        with pytest.raises(UnsupportedSelfInteraction):
            normal_derivative(mesh, mesh, of="double_layer", method="direct")

    def test_modified_equals_plain_constant_variant(self):
        # the constant modification is x-independent, so its derivative is zero
        src = inner_circle(32, 0.5)
        tgt = unit_mesh(32)
        plain = normal_derivative(src, tgt, of="double_layer").matrix
        modc = normal_derivative(src, tgt, of="modified_double_layer",
                                 modification="constant").matrix
        assert np.array_equal(plain, modc)

    def test_monopole_flux_on_unit_circle(self):
        # d/dnu log|x| = 1 on the unit circle: the monopole term adds
        # 2 * (integral of psi) to every flux value there
        src = inner_circle(32, 0.5)
        tgt = unit_mesh(32)
        plain = normal_derivative(src, tgt, of="double_layer").matrix
        mono = normal_derivative(src, tgt, of="modified_double_layer",
                                 modification="monopole").matrix
        psi = np.ones(32)
        diff = (mono - plain) @ psi
        want = 2.0 * np.sum(src.arc_weights())
        assert np.max(np.abs(diff - want)) < 1e-12


class TestForwardSolver:
    def test_dirichlet_first_mode(self):
        outer, inner = unit_mesh(), inner_circle(64, 0.5)
        f = np.cos(outer.theta)
        flux = solve_forward(outer, inner, "dirichlet", f).outer_flux()
        want = (5.0 / 3.0) * f
        assert np.max(np.abs(flux - want)) < 1e-8

    def test_dirichlet_constant(self):
        outer, inner = unit_mesh(), inner_circle(64, 0.5)
        flux = solve_forward(outer, inner, "dirichlet", np.ones(64)).outer_flux()
        assert np.max(np.abs(flux - 1.0 / np.log(2.0))) < 1e-10
        assert abs(1.0 / np.log(2.0) - 1.4426950408889634) < 1e-15

    def test_impedance_invisible_mode(self):
        outer, inner = unit_mesh(), inner_circle(64, 0.5)
        f = np.cos(outer.theta)
        sol = solve_forward(outer, inner, "impedance", f, np.full(64, 2.0))
        assert np.max(np.abs(sol.outer_flux() - f)) < 1e-8

    def test_oracle_equivalence_grid(self):
        # concentric circles, both conditions, k <= 8: relative node error
        # against the series below 1e-6 at 64 nodes
        outer = unit_mesh(64)
        for rho in (0.25, 0.5):
            inner = inner_circle(64, rho)
            for bc, gamma in (("dirichlet", None), ("impedance", 0.5),
                              ("impedance", 2.0)):
                cfg = AnnulusConfig(rho, bc, gamma)
                gv = None if gamma is None else np.full(64, gamma)
                for k in range(1, 9):
                    for f in (np.cos(k * outer.theta), np.sin(k * outer.theta)):
                        flux = solve_forward(outer, inner, bc, f, gv).outer_flux()
                        want = (k - gap_coefficient(cfg, k)) * f
                        err = (np.linalg.norm(flux - want)
                               / np.linalg.norm(want))
                        assert err < 1e-6, (rho, bc, gamma, k)

    def test_interior_potential_against_series(self):
        outer, inner = unit_mesh(), inner_circle(64, 0.5)
        k, gamma = 3, 2.0
        sol = solve_forward(outer, inner, "impedance", np.cos(k * outer.theta),
                            np.full(64, gamma))
        pts = np.array([[0.7, 0.1], [0.0, 0.8], [-0.6, -0.2]])
        r = np.hypot(pts[:, 0], pts[:, 1])
        t = np.arctan2(pts[:, 1], pts[:, 0])
        s = (k - 0.5 * gamma) / (k + 0.5 * gamma)
        want = ((r**k + s * 0.5 ** (2 * k) * r ** (-k)) / (1 + s * 0.5 ** (2 * k))
                * np.cos(k * t))
        assert np.max(np.abs(sol.potential(pts) - want)) < 1e-9

    def test_inner_trace_against_series(self):
        outer, inner = unit_mesh(), inner_circle(64, 0.5)
        cfg = AnnulusConfig(0.5, "impedance", 2.0)
        k = 2
        sol = solve_forward(outer, inner, "impedance", np.cos(k * outer.theta),
                            np.full(64, 2.0))
        want = inner_trace_coefficient(cfg, k) * np.cos(k * inner.theta)
        assert np.max(np.abs(sol.inner_trace() - want)) < 1e-9

    def test_inner_flux_satisfies_robin(self):
        outer = unit_mesh()
        inner = NystromMesh(BoundaryCurve.ellipse(0.5, 0.3), 64, "inner")
        gamma = 2.0 - np.sin(inner.theta) ** 4
        sol = solve_forward(outer, inner, "impedance", np.cos(2 * outer.theta),
                            gamma)
        residual = sol.inner_flux() + gamma * sol.inner_trace()
        assert np.max(np.abs(residual)) < 1e-8

    def test_exponential_convergence(self):
        cfg = AnnulusConfig(0.5, "dirichlet")
        want_coef = 2.0 - gap_coefficient(cfg, 2)
        errors = []
        for n in (16, 32, 64):
            outer = unit_mesh(n)
            inner = inner_circle(n, 0.5)
            f = np.cos(2 * outer.theta)
            flux = solve_forward(outer, inner, "dirichlet", f).outer_flux()
            errors.append(np.max(np.abs(flux - want_coef * f)))
        assert errors[0] / max(errors[1], 1e-16) > 1e2
        assert errors[1] / max(errors[2], 1e-16) > 1e2


class TestDtnMatrix:
    def test_fourier_diagonal_against_series(self):
        outer, inner = unit_mesh(64), inner_circle(32, 0.5)
        cfg = AnnulusConfig(0.5, "dirichlet")
        lam = dtn_matrix(outer, inner, "dirichlet", basis="fourier",
                         modes=np.arange(-10, 11))
        gap = gap_from_lambda0(lam)
        for i, m in enumerate(gap.modes):
            assert abs(gap.matrix[i, i] - gap_coefficient(cfg, m)) < 1e-7
            off = np.abs(np.delete(gap.matrix[:, i], i)).max()
            assert off < 1e-7

    def test_collocation_matches_fourier_spectrally(self):
        outer, inner = unit_mesh(64), inner_circle(32, 0.5)
        lam_c = dtn_matrix(outer, inner, "dirichlet", basis="collocation")
        gap_c = gap_from_lambda0(lam_c)
        cfg = AnnulusConfig(0.5, "dirichlet", order=31)
        want = sorted([abs(gap_coefficient(cfg, 0))]
                      + [abs(gap_coefficient(cfg, m)) for m in range(1, 32)
                         for _ in (0, 1)], reverse=True)
        got = np.linalg.svd(gap_c.matrix, compute_uv=False)
        assert np.max(np.abs(got[:20] - np.array(want)[:20])) < 1e-6

    def test_ellipse_gap_sees_constant(self):
        outer = unit_mesh(64)
        inner = NystromMesh(BoundaryCurve.ellipse(0.5, 0.3), 32, "inner")
        lam = dtn_matrix(outer, inner, "dirichlet", basis="collocation")
        gap = gap_from_lambda0(lam)
        assert np.linalg.norm(gap.matrix @ np.ones(64)) > 1e-2

    def test_under_resolved_fourier_raises(self):
        outer, inner = unit_mesh(32), inner_circle(32, 0.5)
        with pytest.raises(ValueError):
            dtn_matrix(outer, inner, "dirichlet", basis="fourier",
                       modes=np.arange(0, 20))

    def test_gap_symmetry_real_trig_basis(self):
        outer = unit_mesh(64)
        inner = NystromMesh(BoundaryCurve.ellipse(0.5, 0.3), 64, "inner")
        gamma = 2.0 - np.sin(inner.theta) ** 4
        lam = dtn_matrix(outer, inner, "impedance", gamma, basis="fourier",
                         modes=np.arange(-19, 20))
        gap = gap_from_lambda0(lam)
        real, imag = to_real_trig_basis(gap)
        asym = np.linalg.norm(real - real.T, 2) / np.linalg.norm(real, 2)
        assert asym < 1e-6
        assert np.max(np.abs(imag)) < 1e-6 * np.linalg.norm(real, 2)

    def test_singular_value_geometric_decay(self):
        outer, inner = unit_mesh(64), inner_circle(32, 0.5)
        lam = dtn_matrix(outer, inner, "dirichlet", basis="collocation")
        gap = gap_from_lambda0(lam)
        s = np.linalg.svd(gap.matrix, compute_uv=False)
        s = s[s > s[0] * 1e-10]
        rho2 = 0.25
        for k in range(1, len(s) - 2):
            ratio = s[k + 2] / s[k]
            assert rho2 / 3 < ratio < rho2 * 3

    def test_flux_noise_determinism(self):
        outer, inner = unit_mesh(64), inner_circle(32, 0.5)
        a = dtn_matrix(outer, inner, "dirichlet", basis="fourier",
                       modes=np.arange(-5, 6), flux_noise=(0.04, 7))
        b = dtn_matrix(outer, inner, "dirichlet", basis="fourier",
                       modes=np.arange(-5, 6), flux_noise=(0.04, 7))
        assert np.array_equal(a.matrix, b.matrix)
