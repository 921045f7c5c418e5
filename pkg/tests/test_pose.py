import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parsegait.errors import AlignmentError, KeypointParseError, KeypointSchemaError
from parsegait.pose import (
    FILE_HEADER,
    JOINT_COUNT,
    Box,
    Keypoint,
    KeypointFrame,
    KeypointSequence,
    ValidityConfig,
    align_keypoints,
    filter_valid,
    joint_bounding_box,
    load_keypoint_sequence,
    mask_bounding_box,
    save_keypoint_sequence,
)


def make_frame(index=0, conf=0.9, spread=10.0):
    joints = tuple(Keypoint(x=1.0 + j * spread / JOINT_COUNT, y=2.0 + j, confidence=conf) for j in range(JOINT_COUNT))
    return KeypointFrame(joints=joints, frame_index=index)


class TestTypes:
    def test_keypoint_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Keypoint(float("nan"), 0.0, 0.5)
        with pytest.raises(ValueError):
            Keypoint(0.0, float("inf"), 0.5)

    def test_keypoint_confidence_range(self):
        with pytest.raises(ValueError):
            Keypoint(0.0, 0.0, 1.5)
        with pytest.raises(ValueError):
            Keypoint(0.0, 0.0, -0.1)
        Keypoint(0.0, 0.0, 0.0)
        Keypoint(0.0, 0.0, 1.0)

    def test_frame_needs_17_joints(self):
        with pytest.raises(KeypointSchemaError):
            KeypointFrame(joints=(Keypoint(0, 0, 1),) * 16, frame_index=0)

    def test_sequence_needs_increasing_indices(self):
        a, b = make_frame(0), make_frame(0)
        with pytest.raises(ValueError):
            KeypointSequence(frames=(a, b), sequence_id="s")
        with pytest.raises(ValueError):
            KeypointSequence(frames=(), sequence_id="s")


class TestFilterValid:
    def test_threshold_is_inclusive(self):
        cfg = ValidityConfig(tau=0.3, width=100, height=100)
        at = {0: Keypoint(5.0, 5.0, 0.3)}
        below = {0: Keypoint(5.0, 5.0, 0.2999999)}
        assert filter_valid(at, cfg) == at
        assert filter_valid(below, cfg) == {}

    def test_bounds_are_half_open(self):
        cfg = ValidityConfig(tau=0.0, width=10, height=8)
        inside = {0: Keypoint(0.0, 0.0, 1.0), 1: Keypoint(9.999, 7.999, 1.0)}
        outside = {
            2: Keypoint(10.0, 4.0, 1.0),
            3: Keypoint(4.0, 8.0, 1.0),
            4: Keypoint(-0.001, 4.0, 1.0),
        }
        assert set(filter_valid({**inside, **outside}, cfg)) == {0, 1}

    def test_accepts_frame_object(self):
        frame = make_frame(conf=0.9)
        cfg = ValidityConfig(tau=0.3, width=100, height=100)
        assert len(filter_valid(frame, cfg)) == JOINT_COUNT

    def test_all_filtered_when_tau_above_all(self):
        frame = make_frame(conf=0.5)
        cfg = ValidityConfig(tau=0.9, width=100, height=100)
        assert filter_valid(frame, cfg) == {}


class TestAlign:
    def test_identity_boxes_unchanged(self):
        frame = make_frame()
        box = Box(0, 0, 50, 50)
        out = align_keypoints(frame, box, box)
        assert out == frame

    def test_known_scale_and_shift(self):
        frame = KeypointFrame(
            joints=tuple(Keypoint(2.0, 4.0, 0.7) for _ in range(JOINT_COUNT)), frame_index=3
        )
        out = align_keypoints(frame, Box(2, 4, 4, 8), Box(10, 20, 8, 4))
        assert out.joints[0].x == 10.0 and out.joints[0].y == 20.0
        assert out.joints[0].confidence == 0.7
        assert out.frame_index == 3

    def test_corner_maps_to_corner(self):
        frame = KeypointFrame(
            joints=tuple(Keypoint(6.0, 12.0, 0.7) for _ in range(JOINT_COUNT)), frame_index=0
        )
        out = align_keypoints(frame, Box(2, 4, 4, 8), Box(10, 20, 8, 4))
        assert out.joints[0].x == 18.0 and out.joints[0].y == 24.0

    def test_degenerate_boxes_raise(self):
        frame = make_frame()
        with pytest.raises(AlignmentError):
            align_keypoints(frame, Box(0, 0, 0, 5), Box(0, 0, 5, 5))
        with pytest.raises(AlignmentError):
            align_keypoints(frame, Box(0, 0, 5, 5), Box(0, 0, 5, 0))

    def test_round_trip_recovers_coordinates(self):
        frame = make_frame(spread=30.0)
        a, b = Box(1, 2, 30, 18), Box(-4, 7, 3, 90)
        back = align_keypoints(align_keypoints(frame, a, b), b, a)
        for orig, rt in zip(frame.joints, back.joints):
            assert math.isclose(orig.x, rt.x, abs_tol=1e-9)
            assert math.isclose(orig.y, rt.y, abs_tol=1e-9)


class TestBoundingBoxes:
    def test_joint_box_ignores_low_confidence(self):
        joints = [Keypoint(5.0, 5.0, 0.9) for _ in range(JOINT_COUNT)]
        joints[0] = Keypoint(100.0, 100.0, 0.1)
        frame = KeypointFrame(joints=tuple(joints), frame_index=0)
        box = joint_bounding_box(frame, tau=0.3)
        assert (box.x, box.y, box.width, box.height) == (5.0, 5.0, 0.0, 0.0)

    def test_joint_box_empty_raises(self):
        frame = make_frame(conf=0.1)
        with pytest.raises(AlignmentError):
            joint_bounding_box(frame, tau=0.5)

    def test_mask_box_full_pixel_extents(self):
        mask = np.zeros((10, 12), dtype=np.uint8)
        mask[3:7, 2:9] = 1
        box = mask_bounding_box(mask)
        assert (box.x, box.y, box.width, box.height) == (2.0, 3.0, 7.0, 4.0)

    def test_mask_box_empty_raises(self):
        with pytest.raises(AlignmentError):
            mask_bounding_box(np.zeros((4, 4), dtype=np.uint8))


class TestFileFormat:
    def test_round_trip_preserves_values(self, tmp_path):
        frames = tuple(make_frame(index=i, conf=0.5 + 0.01 * i) for i in range(4))
        seq = KeypointSequence(frames=frames, sequence_id="clip")
        path = tmp_path / "keypoints.txt"
        save_keypoint_sequence(seq, path)
        back = load_keypoint_sequence(path, sequence_id="clip")
        assert back == seq

    def test_sequence_id_defaults_to_parent_directory(self, tmp_path):
        d = tmp_path / "id007-nm-01"
        d.mkdir()
        seq = KeypointSequence(frames=(make_frame(),), sequence_id="x")
        save_keypoint_sequence(seq, d / "keypoints.txt")
        assert load_keypoint_sequence(d / "keypoints.txt").sequence_id == "id007-nm-01"

    def test_header_checked(self, tmp_path):
        path = tmp_path / "k.txt"
        path.write_text("wrong v9 1\n")
        with pytest.raises(KeypointParseError, match=":1"):
            load_keypoint_sequence(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "k.txt"
        path.write_text("")
        with pytest.raises(KeypointParseError, match="empty"):
            load_keypoint_sequence(path)

    def test_frame_count_mismatch(self, tmp_path):
        path = tmp_path / "k.txt"
        path.write_text(f"{FILE_HEADER} 2\n" + "0 " + "1 2 0.5 " * 17 + "\n")
        with pytest.raises(KeypointParseError, match="declares 2"):
            load_keypoint_sequence(path)

    def test_wrong_joint_count_names_line(self, tmp_path):
        path = tmp_path / "k.txt"
        path.write_text(f"{FILE_HEADER} 1\n" + "0 " + "1 2 0.5 " * 16 + "\n")
        with pytest.raises(KeypointSchemaError, match=":2"):
            load_keypoint_sequence(path)

    def test_bad_float_names_line(self, tmp_path):
        path = tmp_path / "k.txt"
        body = "0 " + "1 2 0.5 " * 16 + "1 2 oops"
        path.write_text(f"{FILE_HEADER} 1\n{body}\n")
        with pytest.raises(KeypointParseError, match=":2"):
            load_keypoint_sequence(path)

    def test_non_monotonic_indices_rejected(self, tmp_path):
        path = tmp_path / "k.txt"
        row = "1 2 0.5 " * 17
        path.write_text(f"{FILE_HEADER} 2\n5 {row}\n5 {row}\n")
        with pytest.raises(KeypointParseError, match="increasing"):
            load_keypoint_sequence(path)

    @settings(max_examples=50, deadline=None)
    @given(
        triples=st.lists(
            st.tuples(
                st.floats(-1e4, 1e4, allow_nan=False),
                st.floats(-1e4, 1e4, allow_nan=False),
                st.floats(0.0, 1.0, allow_nan=False),
            ),
            min_size=JOINT_COUNT,
            max_size=JOINT_COUNT,
        )
    )
    def test_round_trip_bit_exact_floats(self, tmp_path_factory, triples):
        tmp = tmp_path_factory.mktemp("kp")
        joints = tuple(Keypoint(x, y, c) for x, y, c in triples)
        seq = KeypointSequence(
            frames=(KeypointFrame(joints=joints, frame_index=0),), sequence_id="s"
        )
        path = tmp / "keypoints.txt"
        save_keypoint_sequence(seq, path)
        back = load_keypoint_sequence(path, sequence_id="s")
        for orig, rt in zip(seq.frames[0].joints, back.frames[0].joints):
            assert (orig.x, orig.y, orig.confidence) == (rt.x, rt.y, rt.confidence)
