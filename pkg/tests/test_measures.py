import numpy as np
import pytest

from mvortho.errors import PointCloudError
from mvortho.measures import (DiscreteMeasure, annulus_measure,
                              gauss_jacobi_rule, min_monomial_norm,
                              point_cloud_measure, spiral_measure,
                              square_minus_ball, tensor_jacobi, torus_measure,
                              _spiral_grid)
from mvortho.univariate import jacobi_recurrence


def analytic_jacobi_power_moment(k, alpha, beta, n_quad=200):
    """Oracle for <x^k> via a much finer rule than the one under test."""
    x, w = gauss_jacobi_rule(n_quad, alpha, beta)
    return float(np.sum(w * x**k))


class TestGaussJacobiRule:
    def test_single_point_legendre(self):
        x, w = gauss_jacobi_rule(1, 0.0, 0.0)
        assert np.allclose(x, [0.0]) and np.allclose(w, [1.0])

    def test_two_point_legendre(self):
        # Hand-derived two-point rule: nodes +-1/sqrt(3), weights 1/2.
        x, w = gauss_jacobi_rule(2, 0.0, 0.0)
        assert np.allclose(np.sort(x), [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-15)
        assert np.allclose(w, [0.5, 0.5], atol=1e-15)

    @pytest.mark.parametrize("n,alpha,beta", [(3, 0.0, 0.0), (7, 3.8, 7.34),
                                              (12, -0.5, 2.0), (20, 0.78, 8.26)])
    def test_unit_mass(self, n, alpha, beta):
        _, w = gauss_jacobi_rule(n, alpha, beta)
        assert np.sum(w) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("n,alpha,beta", [(6, 0.0, 0.0), (8, 3.8, 7.34)])
    def test_polynomial_exactness(self, n, alpha, beta):
        x, w = gauss_jacobi_rule(n, alpha, beta)
        for k in range(2 * n):
            got = np.sum(w * x**k)
            want = analytic_jacobi_power_moment(k, alpha, beta)
            assert got == pytest.approx(want, abs=1e-13 * max(1.0, abs(want)))

    def test_invalid_exponent(self):
        with pytest.raises(ValueError):
            gauss_jacobi_rule(4, -1.0, 0.0)


class TestTensorJacobi:
    def test_paper_parameter_sets_constructible(self):
        m2 = tensor_jacobi(2, 5, (3.80, 0.78), (7.34, 8.26))
        m3 = tensor_jacobi(3, 4, (1.61, 0.32, 3.01), (-0.89, 9.83, 7.67))
        assert m2.d == 2 and m2.n_nodes == 25
        assert m3.d == 3 and m3.n_nodes == 64

    def test_single_point_legendre_grid(self):
        m = tensor_jacobi(2, 1, (0.0, 0.0), (0.0, 0.0))
        assert np.allclose(m.nodes, [[0.0, 0.0]])
        assert np.allclose(m.weights, [1.0])

    def test_moment_factorizes(self):
        m = tensor_jacobi(2, 8, (0.0, 0.0), (0.0, 0.0))
        got = np.sum(m.weights * m.nodes[:, 0]**2 * m.nodes[:, 1]**4)
        assert got == pytest.approx((1 / 3) * (1 / 5), abs=1e-14)


class TestAnnulus:
    def test_support_containment(self):
        m = annulus_measure(8, 32)
        r2 = (m.nodes**2).sum(axis=1)
        assert np.all(r2 >= 0.25 - 1e-12) and np.all(r2 <= 1.0 + 1e-12)

    def test_rotational_symmetry(self):
        m = annulus_measure(8, 32)
        assert abs(np.sum(m.weights * m.nodes[:, 0])) < 1e-14

    def test_radial_second_moment(self):
        # 1-d radial oracle: int r^3 dr / int r dr over [0.5, 1] = 0.625.
        m = annulus_measure(8, 32)
        got = np.sum(m.weights * (m.nodes**2).sum(axis=1))
        assert got == pytest.approx(0.625, abs=1e-12)


class TestSpiral:
    def test_radii_between_the_spirals(self):
        theta, r, w = _spiral_grid(4, 64)
        assert np.all(r >= 0.8 * theta[:, None] - 1e-12)
        assert np.all(r <= theta[:, None] + 1e-12)
        assert np.all(w > 0)

    def test_unit_mass(self):
        m = spiral_measure(4, 64)
        assert m.total_mass == pytest.approx(1.0, abs=1e-14)

    def test_constant_moment(self):
        m = spiral_measure(4, 64)
        ones = np.ones(m.n_nodes)
        assert m.moment(ones, ones) == pytest.approx(1.0, abs=1e-13)


class TestTorus:
    def test_interior_inequality(self):
        m = torus_measure(6, 24, 24)
        ring = np.sqrt(m.nodes[:, 0]**2 + m.nodes[:, 1]**2)
        assert np.all((ring - 2.0)**2 + m.nodes[:, 2]**2 < 1.0 + 1e-12)

    def test_reflection_and_rotation_symmetry(self):
        m = torus_measure(6, 24, 24)
        assert abs(np.sum(m.weights * m.nodes[:, 2])) < 1e-14
        assert abs(np.sum(m.weights * m.nodes[:, 0])) < 1e-14

    def test_volume_moment(self):
        # Pappus oracle: uniform<x1^2+x2^2> = R^2 + 3 r^2/4 for tube radius
        # r and ring radius R (direct tube-coordinate integration).
        m = torus_measure(8, 40, 40)
        got = np.sum(m.weights * (m.nodes[:, 0]**2 + m.nodes[:, 1]**2))
        assert got == pytest.approx(4.0 + 0.75, abs=1e-12)


class TestSquareMinusBall:
    def test_rejection_rule(self):
        m = square_minus_ball(2000, seed=11)
        assert np.all((m.nodes**2).sum(axis=1) >= 1.0)
        assert np.all(np.abs(m.nodes) <= 1.0)

    def test_uniform_weights(self):
        m = square_minus_ball(1234, seed=0)
        assert np.allclose(m.weights, 1.0 / 1234)

    def test_seed_determinism(self):
        a = square_minus_ball(500, seed=42)
        b = square_minus_ball(500, seed=42)
        assert np.array_equal(a.nodes, b.nodes)

    def test_seed_sensitivity(self):
        a = square_minus_ball(500, seed=1)
        b = square_minus_ball(500, seed=2)
        assert not np.array_equal(a.nodes, b.nodes)


class TestPointCloud:
    def test_three_point_file(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("0.0,1.0\n0.5,-0.25\n-1.0,0.125\n")
        m = point_cloud_measure(path)
        assert m.n_nodes == 3 and m.d == 2
        assert np.allclose(m.weights, 1.0 / 3.0)

    def test_header_skipped(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("x,y\n0.0,1.0\n2.0,3.0\n")
        m = point_cloud_measure(path)
        assert m.n_nodes == 2

    def test_three_dim_file(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("0,0,1\n1,0,0\n")
        assert point_cloud_measure(path).d == 3

    def test_nan_names_line(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("0,0\n1,1\n2,2\n3,3\nnan,4\n")
        with pytest.raises(PointCloudError) as err:
            point_cloud_measure(path)
        assert err.value.line == 5

    def test_bad_token_names_line(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("x,y\n0,0\noops,1\n")
        with pytest.raises(PointCloudError) as err:
            point_cloud_measure(path)
        assert err.value.line == 3

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("\n\n")
        with pytest.raises(PointCloudError):
            point_cloud_measure(path)

    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("0,0\n\n1,1\n\n")
        assert point_cloud_measure(path).n_nodes == 2


class TestMomentFunctional:
    def test_constant_moment_is_mass(self):
        m = annulus_measure(4, 16)
        ones = np.ones(m.n_nodes)
        assert m.moment(ones, ones) == pytest.approx(1.0, abs=1e-14)

    def test_odd_moment_vanishes(self):
        m = annulus_measure(6, 24)
        ones = np.ones(m.n_nodes)
        assert abs(m.moment(ones, m.nodes[:, 0])) < 1e-14

    def test_square_second_moment(self):
        m = tensor_jacobi(2, 6, (0.0, 0.0), (0.0, 0.0))
        x1 = m.nodes[:, 0]
        assert m.moment(x1, x1) == pytest.approx(1.0 / 3.0, abs=1e-14)

    def test_length_mismatch(self):
        m = annulus_measure(3, 8)
        with pytest.raises(ValueError):
            m.moment(np.ones(5), np.ones(m.n_nodes))


class TestValidation:
    def test_weight_positivity_enforced(self):
        with pytest.raises(ValueError):
            DiscreteMeasure(nodes=np.zeros((2, 1)), weights=np.array([0.5, 0.0]))

    def test_nonfinite_nodes_rejected(self):
        with pytest.raises(ValueError):
            DiscreteMeasure(nodes=np.array([[np.inf, 0.0]]), weights=np.array([1.0]))

    @pytest.mark.parametrize("make", [
        lambda: tensor_jacobi(2, 8, (3.8, 0.78), (7.34, 8.26)),
        lambda: annulus_measure(8, 29),
        lambda: spiral_measure(8, 200),
        lambda: torus_measure(8, 29, 29),
        lambda: square_minus_ball(4000, seed=3),
    ])
    def test_nondegenerate_at_desk_scale(self, make):
        # Every monomial keeps positive discrete norm through degree 2N
        # for a desk-scale N, certifying the moment functional is usable.
        m = make()
        assert min_monomial_norm(m, 12) > 0
