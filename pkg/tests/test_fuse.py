import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from parsegait.errors import FusionError
from parsegait.fuse import (
    STRATEGIES,
    TARGET_SIZE,
    FusedSample,
    SilhouetteMask,
    collapse_dcf,
    fuse_crf,
    fuse_dcf,
    fuse_frame,
    load_silhouette,
    resize_labels,
    save_silhouette,
    silhouette_to_labels,
)
from parsegait.render import CLASS_COUNT, LabelRaster


def random_pair(rng, h, w):
    labels = rng.integers(0, 13, (h, w)).astype(np.uint8)
    labels[labels == 1] = 0  # class 1 is reserved for the silhouette
    sil = rng.integers(0, 2, (h, w)).astype(np.uint8)
    return LabelRaster(labels=labels), SilhouetteMask(mask=sil)


class TestInputs:
    def test_mask_validation(self):
        with pytest.raises(ValueError):
            SilhouetteMask(mask=np.full((3, 3), 2, dtype=np.uint8))
        with pytest.raises(ValueError):
            SilhouetteMask(mask=np.zeros((3, 3), dtype=np.int64))
        with pytest.raises(ValueError):
            SilhouetteMask(mask=np.zeros(9, dtype=np.uint8))

    def test_dimension_mismatch_refused(self):
        parsing = LabelRaster(labels=np.zeros((4, 5), dtype=np.uint8))
        sil = SilhouetteMask(mask=np.zeros((5, 4), dtype=np.uint8))
        with pytest.raises(FusionError, match="dimension mismatch"):
            fuse_crf(parsing, sil)
        with pytest.raises(FusionError, match="dimension mismatch"):
            fuse_dcf(parsing, sil)

    def test_parsing_with_silhouette_class_refused(self):
        parsing = LabelRaster(labels=np.ones((4, 4), dtype=np.uint8))
        sil = SilhouetteMask(mask=np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(FusionError, match="reserved"):
            fuse_crf(parsing, sil)

    def test_fused_sample_exactly_one_payload(self):
        raster = LabelRaster(labels=np.zeros((3, 3), dtype=np.uint8))
        stack = np.zeros((13, 3, 3), dtype=np.uint8)
        with pytest.raises(ValueError):
            FusedSample(strategy="crf", crf=raster, dcf=stack)
        with pytest.raises(ValueError):
            FusedSample(strategy="crf", dcf=stack)
        with pytest.raises(ValueError):
            FusedSample(strategy="dcf", crf=raster)
        with pytest.raises(ValueError):
            FusedSample(strategy="dcf", dcf=stack[:5])

    def test_unknown_strategy(self):
        parsing = LabelRaster(labels=np.zeros((4, 4), dtype=np.uint8))
        sil = SilhouetteMask(mask=np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(FusionError, match="unknown fusion strategy"):
            fuse_frame(parsing, sil, "blend")


class TestFusionRules:
    def test_crf_matches_pixelwise_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            h, w = int(rng.integers(2, 24)), int(rng.integers(2, 24))
            parsing, sil = random_pair(rng, h, w)
            fused = fuse_crf(parsing, sil)
            assert np.array_equal(fused.labels, oracles.crf_pixelwise(parsing.labels, sil.mask))

    def test_dcf_matches_pixelwise_oracle(self):
        rng = np.random.default_rng(22)
        for _ in range(40):
            h, w = int(rng.integers(2, 24)), int(rng.integers(2, 24))
            parsing, sil = random_pair(rng, h, w)
            assert np.array_equal(
                fuse_dcf(parsing, sil), oracles.dcf_pixelwise(parsing.labels, sil.mask)
            )

    def test_crf_precedence_cases(self):
        parsing = LabelRaster(labels=np.array([[0, 5], [0, 9]], dtype=np.uint8))
        sil = SilhouetteMask(mask=np.array([[1, 1], [0, 0]], dtype=np.uint8))
        fused = fuse_crf(parsing, sil)
        assert fused.labels.tolist() == [[1, 5], [0, 9]]

    def test_dcf_channel_semantics(self):
        rng = np.random.default_rng(23)
        parsing, sil = random_pair(rng, 17, 13)
        stack = fuse_dcf(parsing, sil)
        # ch0 fires exactly when neither input does; ch1 mirrors the silhouette
        # even under a skeleton stroke; ch2..12 are mutually disjoint
        neither = (parsing.labels == 0) & (sil.mask == 0)
        assert np.array_equal(stack[0] != 0, neither)
        assert np.array_equal(stack[1], sil.mask)
        assert stack[2:].sum(axis=0).max() <= 1
        for k in range(2, 13):
            assert np.array_equal(stack[k] != 0, parsing.labels == k)

    def test_collapse_dcf_equals_crf(self):
        rng = np.random.default_rng(24)
        for _ in range(40):
            h, w = int(rng.integers(2, 24)), int(rng.integers(2, 24))
            parsing, sil = random_pair(rng, h, w)
            assert np.array_equal(
                collapse_dcf(fuse_dcf(parsing, sil)).labels, fuse_crf(parsing, sil).labels
            )

    @given(
        seed=st.integers(0, 2**32 - 1),
        h=st.integers(1, 20),
        w=st.integers(1, 20),
    )
    @settings(max_examples=60, deadline=None)
    def test_fusion_round_trip_property(self, seed, h, w):
        rng = np.random.default_rng(seed)
        parsing, sil = random_pair(rng, h, w)
        stack = fuse_dcf(parsing, sil)
        crf = fuse_crf(parsing, sil)
        assert np.array_equal(collapse_dcf(stack).labels, crf.labels)
        assert np.array_equal(oracles.collapse_pixelwise(stack), crf.labels)


class TestResize:
    def test_matches_index_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            sh, sw = int(rng.integers(1, 80)), int(rng.integers(1, 80))
            th, tw = int(rng.integers(1, 50)), int(rng.integers(1, 50))
            src = LabelRaster(labels=rng.integers(0, 13, (sh, sw)).astype(np.uint8))
            got = resize_labels(src, (th, tw))
            assert np.array_equal(got.labels, oracles.resize_nearest_pixelwise(src.labels, (th, tw)))

    def test_identity_resize(self):
        rng = np.random.default_rng(32)
        src = LabelRaster(labels=rng.integers(0, 13, (21, 33)).astype(np.uint8))
        assert np.array_equal(resize_labels(src, (21, 33)).labels, src.labels)

    def test_no_new_labels_invented(self):
        rng = np.random.default_rng(33)
        src = LabelRaster(labels=(rng.integers(0, 2, (50, 50)) * 7).astype(np.uint8))
        out = resize_labels(src, (13, 29))
        assert set(np.unique(out.labels)) <= set(np.unique(src.labels))

    def test_constant_input_constant_output(self):
        src = LabelRaster(labels=np.full((9, 9), 6, dtype=np.uint8))
        assert (resize_labels(src, (64, 44)).labels == 6).all()

    def test_stack_resized_channelwise(self):
        rng = np.random.default_rng(34)
        parsing, sil = random_pair(rng, 40, 30)
        stack = fuse_dcf(parsing, sil)
        small = resize_labels(stack, (10, 11))
        assert small.shape == (13, 10, 11)
        for k in range(13):
            assert np.array_equal(small[k], oracles.resize_nearest_pixelwise(stack[k], (10, 11)))

    def test_bad_target_rejected(self):
        src = LabelRaster(labels=np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(ValueError):
            resize_labels(src, (0, 5))

    def test_fuse_frame_resizes_to_default_target(self):
        rng = np.random.default_rng(35)
        parsing, sil = random_pair(rng, 128, 88)
        out_crf = fuse_frame(parsing, sil, "crf")
        out_dcf = fuse_frame(parsing, sil, "dcf")
        assert out_crf.crf.labels.shape == TARGET_SIZE
        assert out_dcf.dcf.shape == (13,) + TARGET_SIZE
        # the resized channel stack still collapses to the resized label image
        assert np.array_equal(collapse_dcf(out_dcf.dcf).labels, out_crf.crf.labels)


class TestSilhouetteIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(41)
        sil = SilhouetteMask(mask=rng.integers(0, 2, (30, 20)).astype(np.uint8))
        path = tmp_path / "s.png"
        save_silhouette(sil, path)
        assert np.array_equal(load_silhouette(path).mask, sil.mask)

    def test_lift_to_labels(self):
        sil = SilhouetteMask(mask=np.array([[0, 1], [1, 0]], dtype=np.uint8))
        lifted = silhouette_to_labels(sil)
        assert isinstance(lifted, LabelRaster)
        assert np.array_equal(lifted.labels, sil.mask)
        lifted.labels[0, 0] = 5
        assert sil.mask[0, 0] == 0  # lift copies, never aliases

    def test_constants(self):
        assert STRATEGIES == ("crf", "dcf")
        assert CLASS_COUNT == 13
