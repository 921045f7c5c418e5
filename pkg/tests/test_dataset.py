import numpy as np
import pytest

from parsegait.dataset import (
    MANIFEST_HEADER,
    Manifest,
    SequenceRecord,
    keypoints_path,
    load_manifest,
    load_sequence,
    manifest_path,
    output_dir,
    save_manifest,
    silhouette_path,
    validate_layout,
)
from parsegait.errors import ManifestError
from parsegait.synth import generate_dataset


def two_records():
    return (
        SequenceRecord("id001-nm-00", "id001", "nm", "gallery", 30),
        SequenceRecord("id001-nm-01", "id001", "nm", "probe", 30),
    )


class TestRecords:
    def test_field_validation(self):
        with pytest.raises(ManifestError):
            SequenceRecord("", "id001", "nm", "probe", 30)
        with pytest.raises(ManifestError):
            SequenceRecord("a b", "id001", "nm", "probe", 30)
        with pytest.raises(ManifestError):
            SequenceRecord("a", "id001", "nm", "holdout", 30)
        with pytest.raises(ManifestError):
            SequenceRecord("a", "id001", "nm", "probe", 0)

    def test_duplicate_sequence_ids_rejected(self):
        rec = two_records()[0]
        with pytest.raises(ManifestError, match="duplicate"):
            Manifest(records=(rec, rec))

    def test_manifest_accessors(self):
        manifest = Manifest(records=two_records())
        assert len(manifest) == 2
        assert manifest.identities() == ("id001",)
        assert manifest.conditions() == ("nm",)
        assert [r.sequence_id for r in manifest.gallery()] == ["id001-nm-00"]
        assert [r.sequence_id for r in manifest.probes()] == ["id001-nm-01"]
        assert manifest.record("id001-nm-01").split == "probe"
        with pytest.raises(ManifestError):
            manifest.record("nope")


class TestPaths:
    def test_layout_helpers(self, tmp_path):
        assert manifest_path(tmp_path) == tmp_path / "manifest"
        assert keypoints_path(tmp_path, "s1") == tmp_path / "s1" / "keypoints.txt"
        assert silhouette_path(tmp_path, "s1", 7) == tmp_path / "s1" / "sil" / "000007.png"
        assert output_dir(tmp_path, "s1", "parsing") == tmp_path / "out" / "s1" / "parsing"


class TestManifestIO:
    def test_round_trip(self, tmp_path):
        manifest = Manifest(records=two_records())
        save_manifest(tmp_path, manifest)
        text = manifest_path(tmp_path).read_text()
        assert text.startswith(MANIFEST_HEADER + "\n")
        assert "id001-nm-00 id001 nm gallery 30" in text
        assert load_manifest(tmp_path) == manifest

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ManifestError, match="no manifest"):
            load_manifest(tmp_path)

    def test_bad_header_cites_line_one(self, tmp_path):
        manifest_path(tmp_path).write_text("something else\n")
        with pytest.raises(ManifestError, match="manifest:1"):
            load_manifest(tmp_path)

    def test_field_count_cites_line(self, tmp_path):
        manifest_path(tmp_path).write_text(MANIFEST_HEADER + "\nseq id nm probe\n")
        with pytest.raises(ManifestError, match="manifest:2.*5 fields"):
            load_manifest(tmp_path)

    def test_non_integer_frames_cites_line(self, tmp_path):
        manifest_path(tmp_path).write_text(MANIFEST_HEADER + "\nseq id nm probe thirty\n")
        with pytest.raises(ManifestError, match="manifest:2.*not an integer"):
            load_manifest(tmp_path)

    def test_blank_lines_skipped(self, tmp_path):
        manifest_path(tmp_path).write_text(
            MANIFEST_HEADER + "\n\nseq id nm probe 3\n\n"
        )
        manifest = load_manifest(tmp_path)
        assert len(manifest) == 1


@pytest.fixture(scope="module")
def dataset_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("ds")
    generate_dataset(root, seed=3, identities=2, clips_per_condition=1,
                     conditions=("nm",), frames=5)
    return root


class TestOnDiskSequences:
    def test_generated_tree_validates(self, dataset_root):
        manifest = load_manifest(dataset_root)
        validate_layout(dataset_root, manifest)
        assert len(manifest) == 2

    def test_validate_reports_missing_keypoints(self, dataset_root, tmp_path):
        manifest = load_manifest(dataset_root)
        with pytest.raises(ManifestError, match="missing"):
            validate_layout(tmp_path, manifest)

    def test_load_sequence_shapes(self, dataset_root):
        manifest = load_manifest(dataset_root)
        rec = manifest.records[0]
        sequence, sils = load_sequence(dataset_root, rec)
        assert len(sequence.frames) == rec.frames == len(sils)
        assert all(s.shape == sils[0].shape for s in sils)
        assert sils[0].dtype == np.uint8
        assert sils[0].max() <= 1

    def test_load_sequence_frame_mismatch(self, dataset_root):
        manifest = load_manifest(dataset_root)
        rec = manifest.records[0]
        lying = SequenceRecord(rec.sequence_id, rec.identity, rec.condition, rec.split, 99)
        with pytest.raises(ManifestError, match="99"):
            load_sequence(dataset_root, lying)
