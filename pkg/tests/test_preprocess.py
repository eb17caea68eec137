import numpy as np
import pytest

from geopolsar.preprocess import (
    PreprocessConfig,
    deorient,
    deorient_array,
    deorient_raster,
    multilook,
    orientation_angle,
    speckle_filter,
)
from geopolsar.matrices import CoherencyMatrix, pauli_from_sinclair_array
from geopolsar.raster import KIND_COHERENCY, KIND_SINCLAIR, PolsarRaster

from conftest import random_psd_stack, random_sinclair_stack


def rotation(theta):
    c, s = np.cos(2.0 * theta), np.sin(2.0 * theta)
    return np.array([[1, 0, 0], [0, c, s], [0, -s, c]], dtype=complex)


class TestDeorient:
    def test_matches_explicit_rotation(self):
        rng = np.random.default_rng(31)
        t = random_psd_stack(rng, 200)
        out = deorient_array(t)
        theta = orientation_angle(t)
        for i in range(t.shape[0]):
            r = rotation(theta[i])
            expected = r @ t[i] @ r.conj().T
            assert np.abs(out[i] - expected).max() <= 1e-13 * np.trace(t[i]).real

    def test_nulls_rotated_cross_term(self):
        rng = np.random.default_rng(32)
        t = random_psd_stack(rng, 300)
        out = deorient_array(t)
        traces = np.trace(t, axis1=-2, axis2=-1).real
        assert (np.abs(out[..., 1, 2].real) / traces).max() <= 1e-10

    def test_reaches_global_minimum_of_t33(self):
        """The rotated T33 must match a dense angle sweep."""
        rng = np.random.default_rng(33)
        t = random_psd_stack(rng, 100)
        t /= np.trace(t, axis1=-2, axis2=-1).real[:, None, None]
        out = deorient_array(t)
        angles = np.linspace(-np.pi / 4, np.pi / 4, 10000, endpoint=False)
        c, s = np.cos(2 * angles), np.sin(2 * angles)
        for i in range(t.shape[0]):
            t22, t33 = t[i, 1, 1].real, t[i, 2, 2].real
            re23 = t[i, 1, 2].real
            swept = s * s * t22 + c * c * t33 - 2 * c * s * re23
            assert out[i, 2, 2].real <= swept.min() + 1e-6
            assert out[i, 2, 2].real <= t33 + 1e-12

    def test_preserves_rotation_invariants(self):
        rng = np.random.default_rng(34)
        t = random_psd_stack(rng, 200)
        out = deorient_array(t)
        # the first row/column subspace is untouched
        assert np.array_equal(out[..., 0, 0], t[..., 0, 0])
        tr_in = np.trace(t, axis1=-2, axis2=-1).real
        tr_out = np.trace(out, axis1=-2, axis2=-1).real
        assert (np.abs(tr_in - tr_out) / tr_in).max() <= 1e-12
        p_in = np.abs(t[..., 0, 1]) ** 2 + np.abs(t[..., 0, 2]) ** 2
        p_out = np.abs(out[..., 0, 1]) ** 2 + np.abs(out[..., 0, 2]) ** 2
        assert (np.abs(p_in - p_out) / np.maximum(p_in, 1e-300)).max() <= 1e-10
        for i in range(0, t.shape[0], 20):
            ev_in = np.linalg.eigvalsh(t[i])
            ev_out = np.linalg.eigvalsh(out[i])
            assert np.abs(ev_in - ev_out).max() <= 1e-9 * tr_in[i]

    def test_idempotent(self):
        rng = np.random.default_rng(35)
        t = random_psd_stack(rng, 200)
        once = deorient_array(t)
        assert np.abs(orientation_angle(once)).max() <= 1e-12
        twice = deorient_array(once)
        traces = np.trace(t, axis1=-2, axis2=-1).real[:, None, None]
        assert (np.abs(twice - once) / traces).max() <= 1e-12

    def test_result_exactly_hermitian(self):
        rng = np.random.default_rng(36)
        t = random_psd_stack(rng, 100)
        out = deorient_array(t)
        assert np.array_equal(out, np.conj(np.swapaxes(out, -2, -1)))

    def test_diagonal_matrices(self):
        # already-diagonal input with t22 > t33 stays fixed; with the
        # diagonal reversed the rotation swaps the two entries
        keep = np.diag([3.0, 2.0, 1.0]).astype(complex)
        assert np.array_equal(deorient_array(keep), keep)
        swap = np.diag([3.0, 1.0, 2.0]).astype(complex)
        out = deorient_array(swap)
        assert out[1, 1].real == pytest.approx(2.0, abs=1e-15)
        assert out[2, 2].real == pytest.approx(1.0, abs=1e-15)

    def test_single_matrix_wrapper(self):
        t = CoherencyMatrix(2.0, 1.0, 0.8, t23=0.4 + 0.2j)
        out = deorient(t)
        assert abs(out.t23.real) <= 1e-12
        assert out.trace == pytest.approx(t.trace, rel=1e-12)

    def test_raster_wrapper_masks_propagate(self):
        rng = np.random.default_rng(37)
        data = random_psd_stack(rng, 12).reshape(3, 4, 3, 3)
        mask = np.ones((3, 4), bool)
        mask[1, 1] = False
        raster = PolsarRaster(KIND_COHERENCY, data, mask, looks=4)
        out = deorient_raster(raster)
        assert out.mask[1, 1] == False  # noqa: E712
        assert np.all(out.data[1, 1] == 0.0)
        with pytest.raises(ValueError, match="coherency"):
            deorient_raster(PolsarRaster(KIND_SINCLAIR, np.zeros((2, 2, 2, 2))))


class TestSpeckleFilter:
    def test_window_one_is_identity(self):
        rng = np.random.default_rng(38)
        data = random_psd_stack(rng, 20).reshape(4, 5, 3, 3)
        raster = PolsarRaster(KIND_COHERENCY, data, looks=1)
        out = speckle_filter(raster, PreprocessConfig(filter_window=1))
        assert np.array_equal(out.data, raster.data)
        assert out.looks == raster.looks

    def test_constant_field_unchanged(self):
        t = CoherencyMatrix(2.0, 1.0, 0.5, t12=0.3 + 0.1j).matrix
        data = np.broadcast_to(t, (6, 7, 3, 3)).copy()
        raster = PolsarRaster(KIND_COHERENCY, data, looks=1)
        out = speckle_filter(raster, PreprocessConfig(filter_window=3))
        assert np.abs(out.data - data).max() <= 1e-12

    def test_matches_bruteforce_neighborhood_means(self):
        rng = np.random.default_rng(39)
        rows, cols = 9, 7
        data = random_psd_stack(rng, rows * cols).reshape(rows, cols, 3, 3)
        mask = rng.random((rows, cols)) > 0.25
        raster = PolsarRaster(KIND_COHERENCY, data, mask, looks=1)
        for window in (3, 5):
            out = speckle_filter(raster, PreprocessConfig(filter_window=window))
            half = window // 2
            for r in range(rows):
                for c in range(cols):
                    if not mask[r, c]:
                        assert not out.mask[r, c]
                        assert np.all(out.data[r, c] == 0.0)
                        continue
                    acc = np.zeros((3, 3), complex)
                    count = 0
                    for rr in range(max(0, r - half), min(rows, r + half + 1)):
                        for cc in range(max(0, c - half), min(cols, c + half + 1)):
                            if mask[rr, cc]:
                                acc += data[rr, cc]
                                count += 1
                    assert out.mask[r, c]
                    assert np.abs(out.data[r, c] - acc / count).max() <= 1e-12

    def test_output_exactly_hermitian(self):
        rng = np.random.default_rng(40)
        data = random_psd_stack(rng, 30).reshape(5, 6, 3, 3)
        raster = PolsarRaster(KIND_COHERENCY, data, looks=1)
        out = speckle_filter(raster, PreprocessConfig(filter_window=3))
        assert np.array_equal(out.data, np.conj(np.swapaxes(out.data, -2, -1)))

    def test_looks_metadata_scales_with_window(self):
        data = np.zeros((4, 4, 3, 3), complex)
        data[..., 0, 0] = 1.0
        raster = PolsarRaster(KIND_COHERENCY, data, looks=2)
        out = speckle_filter(raster, PreprocessConfig(filter_window=5))
        assert out.looks == 50.0

    def test_config_validation(self):
        with pytest.raises(ValueError, match="odd"):
            PreprocessConfig(filter_window=4)
        with pytest.raises(ValueError, match="odd"):
            PreprocessConfig(filter_window=0)
        with pytest.raises(ValueError, match="filter kind"):
            PreprocessConfig(filter_kind="median")
        with pytest.raises(ValueError, match="coherency"):
            speckle_filter(
                PolsarRaster(KIND_SINCLAIR, np.zeros((2, 2, 2, 2))),
                PreprocessConfig(),
            )


class TestMultilook:
    def test_block_means_of_pauli_outer_products(self):
        rng = np.random.default_rng(41)
        s = random_sinclair_stack(rng, 9 * 11).reshape(9, 11, 2, 2)
        raster = PolsarRaster(KIND_SINCLAIR, s, looks=1)
        out = multilook(raster, 3, 5)
        assert out.kind == KIND_COHERENCY
        assert out.shape == (3, 2)  # trailing column block dropped
        assert out.looks == 15.0
        pauli = pauli_from_sinclair_array(s)
        for r in range(3):
            for c in range(2):
                block = pauli[3 * r : 3 * r + 3, 5 * c : 5 * c + 5].reshape(15, 3)
                expected = np.einsum("la,lb->ab", block, block.conj()) / 15
                assert np.abs(out.data[r, c] - expected).max() <= 1e-12

    def test_single_pixel_blocks_are_rank_one(self):
        rng = np.random.default_rng(42)
        s = random_sinclair_stack(rng, 4).reshape(2, 2, 2, 2)
        out = multilook(PolsarRaster(KIND_SINCLAIR, s), 1, 1)
        for r in range(2):
            for c in range(2):
                eigs = np.linalg.eigvalsh(out.data[r, c])
                assert eigs[0] == pytest.approx(0.0, abs=1e-12 * eigs[2])

    def test_masked_pixels_shrink_the_average(self):
        rng = np.random.default_rng(43)
        s = random_sinclair_stack(rng, 8).reshape(2, 4, 2, 2)
        mask = np.ones((2, 4), bool)
        mask[0, 0] = False
        out = multilook(PolsarRaster(KIND_SINCLAIR, s, mask), 2, 2)
        pauli = pauli_from_sinclair_array(s)
        block = np.stack([pauli[1, 0], pauli[0, 1], pauli[1, 1]])
        expected = np.einsum("la,lb->ab", block, block.conj()) / 3
        assert np.abs(out.data[0, 0] - expected).max() <= 1e-12
        # a fully masked block becomes a masked output pixel
        mask2 = mask.copy()
        mask2[:2, :2] = False
        out2 = multilook(PolsarRaster(KIND_SINCLAIR, s, mask2), 2, 2)
        assert not out2.mask[0, 0]
        assert np.all(out2.data[0, 0] == 0.0)
        assert out2.mask[0, 1]

    def test_validation(self):
        raster = PolsarRaster(KIND_SINCLAIR, np.zeros((2, 3, 2, 2), complex))
        with pytest.raises(ValueError, match="smaller than one"):
            multilook(raster, 5, 1)
        with pytest.raises(ValueError, match="positive"):
            multilook(raster, 0, 1)
        coh = PolsarRaster(KIND_COHERENCY, np.zeros((2, 2, 3, 3), complex))
        with pytest.raises(ValueError, match="Sinclair"):
            multilook(coh, 1, 1)
