import numpy as np
import pytest

from fdelink.multirate import (
    circ_shift,
    circular_convolve,
    circulant_eigenvalues,
    dft,
    downsample_dft,
    downsample_time,
    idft,
    linear_convolve,
    linear_convolve_direct,
    upsample_dft,
    upsample_time,
)


def _randc(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _dft_matrix(n):
    j, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return np.exp(-2j * np.pi * j * k / n) / np.sqrt(n)


def _circulant(col):
    n = len(col)
    return np.stack([np.roll(col, k) for k in range(n)], axis=1)


class TestDft:
    def test_impulse(self):
        assert np.allclose(dft([1, 0, 0, 0]), [0.5, 0.5, 0.5, 0.5], atol=1e-15)

    def test_constant_maps_to_dc(self):
        assert np.allclose(dft([1, 1, 1, 1]), [2, 0, 0, 0], atol=1e-15)

    def test_parseval_against_matrix_oracle(self):
        rng = np.random.default_rng(1)
        x = _randc(rng, 768)
        spec = dft(x)
        assert abs(np.linalg.norm(spec) - np.linalg.norm(x)) <= 1e-12 * np.linalg.norm(x)
        oracle = _dft_matrix(768) @ x
        assert np.allclose(spec, oracle, atol=1e-9)

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        x = _randc(rng, 257)
        assert np.allclose(idft(dft(x)), x, atol=1e-12)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            dft(np.empty(0))


class TestResamplers:
    def test_upsample_definition(self):
        assert np.array_equal(upsample_time([1, 2], 2), [1, 0, 2, 0])
        assert np.array_equal(upsample_time([5], 1), [5])
        y = upsample_time([1, -1, 1], 3)
        assert len(y) == 9
        assert np.array_equal(y[::3], [1, -1, 1]) and np.count_nonzero(y) == 3

    def test_downsample_definition(self):
        assert np.array_equal(downsample_time([1, 2, 3, 4], 2), [1, 3])
        x = np.arange(6) + 0j
        assert np.array_equal(downsample_time(x, 1), x)
        with pytest.raises(ValueError):
            downsample_time([1, 2, 3], 2)

    def test_upsample_dft_impulse(self):
        assert np.allclose(upsample_dft([1, 0], 2), [1, 0, 0, 0], atol=1e-12)

    def test_upsample_dft_identity_factor(self):
        rng = np.random.default_rng(3)
        x = _randc(rng, 64)
        assert np.allclose(upsample_dft(x, 1), x, atol=1e-12)

    def test_downsample_dft_definition(self):
        assert np.allclose(downsample_dft([1, 0, 1, 0], 2), [1, 1], atol=1e-12)
        rng = np.random.default_rng(4)
        x = _randc(rng, 64)
        assert np.allclose(downsample_dft(x, 1), x, atol=1e-12)

    @pytest.mark.parametrize("a", [1, 2, 3, 4])
    @pytest.mark.parametrize("n", [4, 12, 512])
    def test_upsample_identity(self, a, n):
        rng = np.random.default_rng(a * 1000 + n)
        x = _randc(rng, n)
        ref = upsample_time(x, a)
        got = upsample_dft(x, a)
        assert np.linalg.norm(got - ref) <= 1e-10 * np.linalg.norm(ref)

    @pytest.mark.parametrize("b", [1, 2, 3, 4])
    @pytest.mark.parametrize("n", [4, 12, 512])
    def test_downsample_identity(self, b, n):
        rng = np.random.default_rng(b * 2000 + n)
        x = _randc(rng, n * b)
        ref = downsample_time(x, b)
        got = downsample_dft(x, b)
        assert np.linalg.norm(got - ref) <= 1e-10 * np.linalg.norm(ref)

    def test_down_up_round_trip_exact(self):
        rng = np.random.default_rng(5)
        x = _randc(rng, 100)
        for a in (1, 2, 3, 4):
            assert np.array_equal(downsample_time(upsample_time(x, a), a), x)


class TestConvolution:
    def test_hand_convolution(self):
        assert np.allclose(linear_convolve([1, 0, 0], [1, 1]), [1, 1, 0, 0], atol=1e-12)

    def test_identity_kernel(self):
        rng = np.random.default_rng(6)
        x = _randc(rng, 33)
        assert np.allclose(linear_convolve(x, [1]), x, atol=1e-12)

    def test_against_direct_sum_oracle(self):
        rng = np.random.default_rng(7)
        x = _randc(rng, 100)
        f = _randc(rng, 67)
        got = linear_convolve(x, f)
        ref = linear_convolve_direct(x, f)
        assert np.linalg.norm(got - ref) <= 1e-12 * np.linalg.norm(ref)


class TestCircShift:
    def test_definition(self):
        assert np.array_equal(circ_shift([1, 2, 3], 1), [3, 1, 2])
        assert np.array_equal(circ_shift([1, 2, 3], -1), [2, 3, 1])

    def test_full_turn(self):
        rng = np.random.default_rng(8)
        x = _randc(rng, 17)
        assert np.array_equal(circ_shift(x, 0), x)
        assert np.array_equal(circ_shift(x, 17), x)


class TestCircularConvolve:
    def test_hand_cases(self):
        assert np.allclose(circular_convolve([1, 0, 0], [1, 1]), [1, 1, 0], atol=1e-12)
        assert np.allclose(circular_convolve([0, 1, 0], [1, 1]), [0, 1, 1], atol=1e-12)

    def test_rejects_long_kernel(self):
        with pytest.raises(ValueError):
            circular_convolve([1, 0], [1, 1, 1])

    def test_against_circulant_matrix_oracle(self):
        rng = np.random.default_rng(9)
        x = _randc(rng, 768)
        c = _randc(rng, 67)
        col = np.zeros(768, dtype=complex)
        col[:67] = c
        ref = _circulant(col) @ x
        got = circular_convolve(x, c)
        assert np.linalg.norm(got - ref) <= 1e-10 * np.linalg.norm(ref)

    def test_equals_folded_linear_convolution(self):
        rng = np.random.default_rng(10)
        for n, lc in ((16, 5), (768, 67)):
            x = _randc(rng, n)
            c = _randc(rng, lc)
            lin = linear_convolve(x, c)
            folded = lin[:n].copy()
            folded[:lc - 1] += lin[n:]
            assert np.allclose(circular_convolve(x, c), folded, atol=1e-9)


class TestCirculantEigenvalues:
    def test_identity_circulant(self):
        assert np.allclose(circulant_eigenvalues([1], 4), np.ones(4), atol=1e-15)

    def test_shifted_impulse_matches_eigendecomposition(self):
        col = np.array([0, 1, 0, 0], dtype=complex)  # delta delayed by one
        lam = circulant_eigenvalues(col, 4)
        # oracle: eigenvalues of the 4x4 circulant on the DFT basis
        mat = _circulant(col)
        fm = _dft_matrix(4)
        diag = fm @ mat @ fm.conj().T
        assert np.allclose(lam, np.diag(diag), atol=1e-12)
        assert np.allclose(lam, [1, -1j, -1, 1j], atol=1e-12)

    def test_dual_path_reconstruction(self):
        rng = np.random.default_rng(11)
        x = _randc(rng, 1536)
        c = _randc(rng, 67)
        lam = circulant_eigenvalues(c, 1536)
        via_diag = idft(lam * dft(x))
        ref = circular_convolve(x, c)
        assert np.linalg.norm(via_diag - ref) <= 1e-10 * np.linalg.norm(ref)

    def test_rejects_long_kernel(self):
        with pytest.raises(ValueError):
            circulant_eigenvalues(np.ones(5), 4)
