import numpy as np
import pytest

from eitdisk.annulus import AnnulusConfig, gap_operator
from eitdisk.exceptions import (DegenerateFit, NoContour, SingularSystem,
                                TooCloseToBoundary)
from eitdisk.geometry import fourier_analyze
from eitdisk.regularization import RegStrategy
from eitdisk.sampling import (GridSpec, IndicatorGrid, extract_level_set,
                              fit_trig_curve, indicator, poisson_kernel,
                              poisson_rhs, scan, solve_current_gap)

DIRICHLET = AnnulusConfig(0.5, "dirichlet")


def colloc_gap(rho=0.5, n=64):
    return gap_operator(AnnulusConfig(rho, "dirichlet"), basis="collocation", n=n)


class TestPoissonKernel:
    def test_center_is_uniform(self):
        t = np.linspace(0, 2 * np.pi, 9)
        vals = poisson_kernel((0.0, 0.0), t)
        assert np.allclose(vals, 1.0 / (2 * np.pi))

    def test_pointwise_value(self):
        got = poisson_kernel((0.5, 0.0), 0.0)
        assert abs(got - 3.0 / (2 * np.pi)) < 1e-15
        assert abs(got - 0.477464829275686) < 1e-12

    def test_normalization(self):
        t = 2 * np.pi * np.arange(256) / 256
        rng = np.random.Generator(np.random.Philox(0))
        for _ in range(6):
            r = rng.uniform(0, 0.8)
            a = rng.uniform(0, 2 * np.pi)
            z = (r * np.cos(a), r * np.sin(a))
            integral = poisson_kernel(z, t).sum() * (2 * np.pi / 256)
            assert abs(integral - 1.0) < 1e-12

    def test_coefficients_match_closed_form(self):
        t = 2 * np.pi * np.arange(256) / 256
        for r in (0.3, 0.8):
            for a in (0.0, 1.1):
                z = (r * np.cos(a), r * np.sin(a))
                d = fourier_analyze(poisson_kernel(z, t), 10)
                for n in range(-10, 11):
                    want = r ** abs(n) * np.exp(-1j * n * a) / (2 * np.pi)
                    assert abs(d.coefficient(n) - want) < 1e-10

    def test_rhs_masks_near_boundary(self):
        with pytest.raises(TooCloseToBoundary):
            poisson_rhs((0.95, 0.0), colloc_gap())


class TestCurrentGap:
    def test_center_mode_zero(self):
        # at z = 0 only the constant mode is driven:
        # f_0 = (1/2pi) / (1/ln rho) = ln(0.5)/(2 pi)
        gap = gap_operator(DIRICHLET, basis="fourier")
        x, _ = solve_current_gap(gap, (0.0, 0.0), RegStrategy.none())
        idx = list(gap.modes).index(0)
        want = np.log(0.5) / (2 * np.pi)
        assert abs(x[idx] - want) < 1e-12
        assert abs(want + 0.11031780007632582) < 1e-15
        mask = np.arange(len(x)) != idx
        assert np.max(np.abs(x[mask])) < 1e-14

    def test_norm_grows_outside(self):
        gap = gap_operator(DIRICHLET, basis="fourier")
        reg = RegStrategy.none()
        x_in, _ = solve_current_gap(gap, (0.2, 0.0), reg)
        x_out, _ = solve_current_gap(gap, (0.7, 0.0), reg)
        assert np.linalg.norm(x_out) / np.linalg.norm(x_in) > 10

    def test_singular_unregularized_raises(self):
        op = colloc_gap()  # band-limited, hence rank deficient on 64 nodes
        with pytest.raises(SingularSystem):
            solve_current_gap(op, (0.2, 0.0), RegStrategy.none())


class TestIndicator:
    def test_ratio_inside_outside(self):
        gap = gap_operator(DIRICHLET, basis="fourier")
        reg = RegStrategy.tikhonov(1e-12)
        assert indicator(gap, (0.2, 0.0), reg) / indicator(gap, (0.7, 0.0), reg) > 10

    def test_homogeneity_under_operator_scaling(self):
        gap = gap_operator(DIRICHLET, basis="fourier")
        doubled = gap.with_matrix(2.0 * gap.matrix)
        reg = RegStrategy.none()
        w1 = indicator(gap, (0.3, 0.1), reg)
        w2 = indicator(doubled, (0.3, 0.1), reg)
        assert abs(w2 - 2.0 * w1) < 1e-12 * w1

    def test_rotation_invariance(self):
        gap = gap_operator(DIRICHLET, basis="fourier")
        reg = RegStrategy.tikhonov(1e-8)
        vals = [indicator(gap, (0.4 * np.cos(a), 0.4 * np.sin(a)), reg)
                for a in np.linspace(0, 2 * np.pi, 7)]
        assert np.max(np.abs(np.diff(vals))) < 1e-8 * vals[0]

    def test_monotone_along_ray(self):
        gap = gap_operator(DIRICHLET, basis="fourier")
        reg = RegStrategy.tikhonov_discrepancy(0.02)
        rs = np.linspace(0.55, 0.9, 10)
        vals = [indicator(gap, (r, 0.0), reg) for r in rs]
        assert np.all(np.diff(vals) <= 1e-12)

    def test_sobolev_norm_option(self):
        gap = gap_operator(DIRICHLET, basis="fourier")
        reg = RegStrategy.tikhonov(1e-6)
        w_l2 = indicator(gap, (0.3, 0.0), reg, norm="l2")
        w_s = indicator(gap, (0.3, 0.0), reg, norm="sobolev_half")
        assert 0 < w_s < w_l2  # the +1/2 weights can only grow the norm


class TestScan:
    def test_single_cell_grid_matches_indicator(self):
        gap = gap_operator(DIRICHLET, basis="fourier")
        reg = RegStrategy.tikhonov(1e-6)
        grid = GridSpec(2, 2, 0.1, 0.2, 0.0, 0.1)
        out = scan(gap, grid, reg)
        want = indicator(gap, (0.1, 0.0), reg)
        assert abs(out.values[0, 0] - want) < 1e-12

    def test_unmasked_points_only(self):
        gap = colloc_gap()
        out = scan(gap, GridSpec.square(21), RegStrategy.tikhonov(1e-6))
        pts = out.spec.points().reshape(21, 21, 2)
        r = np.hypot(pts[..., 0], pts[..., 1])
        assert np.all(np.isnan(out.values[r > 0.9]))
        assert not np.any(np.isnan(out.values[r <= 0.9]))

    def test_seeded_noise_is_reproducible(self):
        gap = colloc_gap()
        reg = RegStrategy.tikhonov_discrepancy(0.05)
        a = scan(gap, GridSpec.square(15), reg, noise=(0.05, 11))
        b = scan(gap, GridSpec.square(15), reg, noise=(0.05, 11))
        assert np.array_equal(a.values, b.values, equal_nan=True)

    def test_contrast_with_noise(self):
        gap = colloc_gap(rho=0.5)
        reg = RegStrategy.tikhonov_discrepancy(0.05, 1.5)
        out = scan(gap, GridSpec.square(41), reg, noise=(0.05, 1))
        pts = out.spec.points()
        r = np.hypot(pts[:, 0], pts[:, 1]).reshape(41, 41)
        inside = np.nanmean(out.values[r < 0.45])
        outside = np.nanmean(out.values[(r > 0.6) & (r < 0.9)])
        assert inside / outside > 2

    def test_noiseless_beats_noisy_contrast(self):
        gap = colloc_gap(rho=0.5)
        reg = RegStrategy.tikhonov_discrepancy(0.05, 1.5)
        grid = GridSpec.square(31)

        def contrast(out):
            pts = out.spec.points()
            r = np.hypot(pts[:, 0], pts[:, 1]).reshape(31, 31)
            return (np.nanmean(out.values[r < 0.45])
                    / np.nanmean(out.values[(r > 0.6) & (r < 0.9)]))

        assert contrast(scan(gap, grid, reg)) > contrast(
            scan(gap, grid, reg, noise=(0.05, 1)))

    def test_discrepancy_alpha_columns_match_scalar_path(self):
        gap = colloc_gap()
        reg = RegStrategy.tikhonov_discrepancy(0.03, 1.5)
        grid = GridSpec(2, 2, 0.15, 0.3, -0.1, 0.25)
        out = scan(gap, grid, reg)
        for (i, j), z in [((0, 0), (0.15, -0.1)), ((1, 1), (0.3, 0.25))]:
            assert abs(out.values[i, j] - indicator(gap, z, reg)) < 1e-9


class TestLevelSet:
    @staticmethod
    def gaussian_grid(s=0.1, n=101):
        grid = GridSpec.square(n)
        pts = grid.points()
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        vals = np.where(np.sqrt(r2) <= 0.9, np.exp(-r2 / s), np.nan)
        values = vals.reshape(n, n)
        return IndicatorGrid(grid, values, ~np.isnan(values))

    def test_gaussian_contour_radius(self):
        s, thr = 0.1, 0.3
        grid = self.gaussian_grid(s)
        pts = extract_level_set(grid, thr)
        want = np.sqrt(s * np.log(1.0 / thr))
        radii = np.hypot(pts[:, 0], pts[:, 1])
        spacing = 1.9 / 100
        assert np.max(np.abs(radii - want)) < spacing

    def test_points_ordered_by_angle(self):
        pts = extract_level_set(self.gaussian_grid(), 0.5)
        c = pts.mean(axis=0)
        ang = np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0])
        # counterclockwise cyclic order: at most one wraparound descent
        d = np.diff(ang)
        assert np.sum(d < -1e-9) <= 1
        assert np.all(d[d < -1e-9] < -np.pi)

    def test_threshold_out_of_range(self):
        with pytest.raises(NoContour):
            extract_level_set(self.gaussian_grid(), 1.0)

    def test_contour_crossing_mask_rejected(self):
        # flat profile: the 0.5 level sits at radius 1.66, outside the mask,
        # so no closed contour exists inside the sampled disk
        grid = self.gaussian_grid(s=4.0)
        with pytest.raises(NoContour):
            extract_level_set(grid, 0.5)

    def test_largest_component_selected(self):
        grid = GridSpec.square(81)
        pts = grid.points()
        bump = (np.exp(-((pts[:, 0] - 0.3) ** 2 + pts[:, 1] ** 2) / 0.02)
                + np.exp(-((pts[:, 0] + 0.4) ** 2 + pts[:, 1] ** 2) / 0.002))
        vals = np.where(np.hypot(pts[:, 0], pts[:, 1]) <= 0.9, bump, np.nan)
        ig = IndicatorGrid(grid, vals.reshape(81, 81), ~np.isnan(vals).reshape(81, 81))
        sel = extract_level_set(ig, 0.3)
        assert np.all(sel[:, 0] > 0)  # the wide right-hand bump wins


class TestCurveFit:
    def test_exact_circle(self):
        t = np.linspace(0, 2 * np.pi, 40, endpoint=False)
        pts = 0.5 * np.column_stack([np.cos(t), np.sin(t)])
        fit = fit_trig_curve(pts, 1)
        assert abs(fit.cos_coef[0, 0] - 0.5) < 1e-10
        assert abs(fit.sin_coef[1, 0] - 0.5) < 1e-10
        others = [fit.cos_coef[0, 0] - 0.5, fit.cos_coef[1, 0],
                  fit.sin_coef[0, 0], fit.sin_coef[1, 0] - 0.5]
        assert np.max(np.abs(others)) < 1e-10

    def test_ellipse_fit_converges_geometrically(self):
        # the fit parametrizes by polar angle, under which the ellipse
        # coordinates are analytic but not band-limited, so the error decays
        # geometrically with the degree rather than vanishing at degree one
        t = np.linspace(0, 2 * np.pi, 80, endpoint=False)
        pts = np.column_stack([0.5 * np.cos(t), 0.3 * np.sin(t)])

        def level_error(degree):
            fit = fit_trig_curve(pts, degree)
            samples = fit.to_curve().point(
                np.linspace(0, 2 * np.pi, 128, endpoint=False))
            level = (samples[:, 0] / 0.5) ** 2 + (samples[:, 1] / 0.3) ** 2
            return np.max(np.abs(level - 1.0))

        e7, e11, e19 = level_error(7), level_error(11), level_error(19)
        assert e7 < 1e-2
        assert e11 < e7 / 5
        assert e19 < 1e-6

    def test_smoothing_reduces_roughness(self):
        rng = np.random.Generator(np.random.Philox(8))
        t = np.linspace(0, 2 * np.pi, 60, endpoint=False)
        pts = (0.5 + 0.005 * rng.normal(size=60))[:, None] * np.column_stack(
            [np.cos(t), np.sin(t)])

        def seminorm(fit):
            m = np.arange(1, fit.degree + 1)
            w = (1.0 + m**2) ** 2
            return np.sum(w * (fit.cos_coef**2 + fit.sin_coef**2))

        rough = fit_trig_curve(pts, 7, smoothing=0.0)
        smooth = fit_trig_curve(pts, 7, smoothing=1e-3)
        assert seminorm(smooth) < seminorm(rough)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_trig_curve(np.ones((5, 2)), 7)

    def test_degenerate_fit_raises(self):
        # collinear points through the origin force a flat curve whose
        # tangent vanishes where it turns around
        pts = np.array([[0.1, 0.0], [0.2, 0.0], [0.3, 0.0],
                        [-0.1, 0.0], [-0.2, 0.0]])
        with pytest.raises(DegenerateFit):
            fit_trig_curve(pts, 1, smoothing=0.0)


class TestBasisIndependence:
    def test_inside_outside_ordering_agrees(self):
        cfg = AnnulusConfig(0.5, "dirichlet")
        colloc = gap_operator(cfg, basis="collocation", n=64)
        four = gap_operator(cfg, basis="fourier")
        reg = RegStrategy.tikhonov_discrepancy(0.02)
        points = [(0.1, 0.0), (0.3, 0.1), (0.62, 0.0), (0.8, 0.1)]
        w_c = [indicator(colloc, z, reg) for z in points]
        w_f = [indicator(four, z, reg) for z in points]
        assert list(np.argsort(w_c)) == list(np.argsort(w_f))
