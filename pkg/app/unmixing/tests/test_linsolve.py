"""
Tests for the structured linear solvers.
"""
import numpy as np

from django.test import SimpleTestCase, override_settings

from core.datamodel import SpatialGrid, SpectralLibrary
from core.exceptions import (
    DimensionMismatch, GridTooLargeForDense, NotPositiveDefinite, TooLarge
)
from unmixing.linsolve import (
    build_freq_kernel, check_S_posdef, factor_dual_gram, factor_primal_gram,
    solve_factored, solve_shifted_laplacian,
)
from unmixing.spatial_ops import Boundary, difference, difference_adjoint


def random_library(L, m, seed=0):
    return SpectralLibrary(np.random.default_rng(seed).standard_normal((L, m)))


def apply_shifted_laplacian(X, grid, boundary):
    return X + difference_adjoint(difference(X, grid, boundary),
                                  grid, boundary)


class FactorizationTests(SimpleTestCase):
    """Test the cached SPD factorizations."""

    def test_dual_gram_of_zero_library_is_identity(self):
        """Test A=0 factors I and solves return the right-hand side."""
        F = factor_dual_gram(SpectralLibrary(np.zeros((3, 2))), 1.0)
        B = np.arange(6.0).reshape(3, 2)

        np.testing.assert_allclose(solve_factored(F, B), B)

    def test_dual_gram_of_identity_halves(self):
        """Test A=I_2, sigma=1 solves 2I x = b."""
        F = factor_dual_gram(SpectralLibrary(np.eye(2)), 1.0)
        b = np.array([[4.0], [-2.0]])

        np.testing.assert_allclose(solve_factored(F, b), b / 2)

    def test_dual_gram_residual(self):
        """Test ||(I + sigma AA^T) X - B|| stays at roundoff."""
        lib = random_library(6, 9)
        sigma = 0.05
        B = np.random.default_rng(1).standard_normal((6, 7))

        X = solve_factored(factor_dual_gram(lib, sigma), B)

        K = np.eye(6) + sigma * lib.A @ lib.A.T
        self.assertLessEqual(np.linalg.norm(K @ X - B),
                             1e-9 * (1 + np.linalg.norm(B)))

    def test_primal_gram(self):
        """Test A^T A + 3I for zero and orthonormal libraries."""
        b = np.array([[3.0], [6.0]])
        zero = factor_primal_gram(SpectralLibrary(np.zeros((4, 2))))
        Q, _ = np.linalg.qr(np.random.default_rng(2).standard_normal((5, 2)))
        ortho = factor_primal_gram(SpectralLibrary(Q))

        np.testing.assert_allclose(solve_factored(zero, b), b / 3)
        np.testing.assert_allclose(solve_factored(ortho, b), b / 4)

    def test_primal_gram_residual_and_matvec(self):
        """Test the solve and the stored factor reproduce the system."""
        lib = random_library(5, 8, seed=3)
        B = np.random.default_rng(4).standard_normal((8, 3))
        F = factor_primal_gram(lib)

        X = solve_factored(F, B)

        self.assertEqual(F.dimension, 8)
        self.assertLessEqual(np.linalg.norm(F.matvec(X) - B),
                             1e-9 * (1 + np.linalg.norm(B)))

    def test_refactoring_is_bitwise_stable(self):
        """Test factoring the same (A, sigma) twice gives identical solves."""
        lib = random_library(6, 4, seed=5)
        B = np.random.default_rng(6).standard_normal((6, 3))

        first = solve_factored(factor_dual_gram(lib, 0.05), B)
        second = solve_factored(factor_dual_gram(lib, 0.05), B)

        np.testing.assert_array_equal(first, second)

    def test_wrong_rhs_rows(self):
        """Test a right-hand side with the wrong height is rejected."""
        F = factor_dual_gram(random_library(4, 3), 1.0)

        with self.assertRaises(DimensionMismatch):
            solve_factored(F, np.ones((3, 2)))

    def test_nonpositive_sigma(self):
        """Test sigma <= 0 is refused."""
        with self.assertRaises(NotPositiveDefinite):
            factor_dual_gram(random_library(3, 3), 0.0)


class FreqKernelTests(SimpleTestCase):
    """Test the eigenvalues of I + H^T H."""

    def test_single_pixel(self):
        kernel = build_freq_kernel(SpatialGrid(1, 1))

        np.testing.assert_array_equal(kernel.eigenvalues, [1.0])

    def test_two_by_one(self):
        """Test the 2x1 grid has eigenvalues {1, 5}."""
        kernel = build_freq_kernel(SpatialGrid(2, 1))

        np.testing.assert_allclose(kernel.eigenvalues, [1.0, 5.0])

    def test_eigenvalues_at_least_one(self):
        for grid in (SpatialGrid(3, 7), SpatialGrid(16, 16)):
            self.assertGreaterEqual(build_freq_kernel(grid).eigenvalues.min(),
                                    1.0)

    def test_matches_dense_spectrum(self):
        """Test the kernel is the spectrum of the periodic I + D^T D."""
        grid = SpatialGrid(3, 4)
        eye = np.eye(grid.n)
        K = apply_shifted_laplacian(eye, grid, Boundary.PERIODIC)

        np.testing.assert_allclose(
            np.sort(build_freq_kernel(grid).eigenvalues),
            np.linalg.eigvalsh(K), atol=1e-10,
        )


class ShiftedLaplacianTests(SimpleTestCase):
    """Test solve_shifted_laplacian on both boundaries."""

    def test_zero_rhs(self):
        grid = SpatialGrid(4, 4)
        for boundary in Boundary:
            out = solve_shifted_laplacian(np.zeros((2, grid.n)), grid,
                                          boundary)
            np.testing.assert_array_equal(out, 0.0)

    def test_constant_images_are_fixed(self):
        """Test identical pixel columns are returned unchanged."""
        grid = SpatialGrid(4, 5)
        B = np.tile(np.array([[1.0], [-3.0]]), (1, grid.n))

        out = solve_shifted_laplacian(B, grid, Boundary.PERIODIC)

        np.testing.assert_allclose(out, B, atol=1e-12)

    def test_periodic_fft_matches_dense(self):
        """Test the frequency path agrees with the dense factorization."""
        rng = np.random.default_rng(7)
        for grid in (SpatialGrid(4, 4), SpatialGrid(8, 8), SpatialGrid(3, 5)):
            B = rng.standard_normal((3, grid.n))

            fast = solve_shifted_laplacian(B, grid, Boundary.PERIODIC)
            dense = solve_shifted_laplacian(B, grid, Boundary.PERIODIC,
                                            dense=True)

            np.testing.assert_allclose(fast, dense, atol=1e-8)

    def test_solutions_reproduce_rhs(self):
        """Test (I + D^T D) X = B for both boundaries up to 16x16."""
        rng = np.random.default_rng(8)
        for grid in (SpatialGrid(5, 3), SpatialGrid(16, 16)):
            B = rng.standard_normal((2, grid.n))
            for boundary in Boundary:
                X = solve_shifted_laplacian(B, grid, boundary)
                rebuilt = apply_shifted_laplacian(X, grid, boundary)
                self.assertLessEqual(np.linalg.norm(rebuilt - B),
                                     1e-8 * np.linalg.norm(B))

    def test_output_is_real(self):
        grid = SpatialGrid(6, 4)
        B = np.random.default_rng(9).standard_normal((2, grid.n))

        out = solve_shifted_laplacian(B, grid, Boundary.PERIODIC)

        self.assertEqual(out.dtype, np.float64)

    @override_settings(HSU_DENSE_GRID_CAP=16)
    def test_dense_cap(self):
        """Test reflexive grids above the cap are refused."""
        grid = SpatialGrid(5, 4)

        with self.assertRaises(GridTooLargeForDense):
            solve_shifted_laplacian(np.ones((1, grid.n)), grid,
                                    Boundary.REFLEXIVE)
        solve_shifted_laplacian(np.ones((1, grid.n)), grid,
                                Boundary.PERIODIC)

    def test_wrong_width(self):
        with self.assertRaises(DimensionMismatch):
            solve_shifted_laplacian(np.ones((1, 5)), SpatialGrid(2, 2),
                                    Boundary.PERIODIC)


class SMatrixTests(SimpleTestCase):
    """Test the convergence-matrix diagnostic."""

    def test_zero_library(self):
        lib = SpectralLibrary(np.zeros((3, 2)))

        self.assertAlmostEqual(check_S_posdef(lib, 1.0), 1.0)
        self.assertAlmostEqual(check_S_posdef(lib, 0.5), 2.0)

    def test_identity_library(self):
        """Test A=I_2, sigma=1 gives 2 - 2/3."""
        self.assertAlmostEqual(
            check_S_posdef(SpectralLibrary(np.eye(2)), 1.0), 4.0 / 3.0)

    def test_random_library_positive(self):
        self.assertGreater(check_S_posdef(random_library(5, 8), 0.05), 0.0)

    @override_settings(HSU_DIAGNOSTIC_BAND_CAP=4)
    def test_band_cap(self):
        with self.assertRaises(TooLarge):
            check_S_posdef(random_library(5, 2), 1.0)
