"""End-to-end command line tests on small scenes."""

import json

import numpy as np
import pytest

from geopolsar.cli import main
from geopolsar.raster import KIND_SINCLAIR, PolsarRaster
from geopolsar.render import MASKED_LABEL
from geopolsar.scene import read_scene, write_scene

from conftest import DEMO_SPEC, random_sinclair_stack


@pytest.fixture(scope="module")
def classified(demo_scene, tmp_path_factory):
    out = tmp_path_factory.mktemp("cls")
    assert main(["classify", str(demo_scene), "--out", str(out)]) == 0
    return out


def read_labels(path):
    header = dict(
        line.split(" = ") for line in (path / "labels.hdr").read_text().splitlines()
    )
    rows, cols = int(header["rows"]), int(header["cols"])
    labels = np.fromfile(path / "labels.bin", dtype="<u2").reshape(rows, cols)
    return labels, header


class TestGenerate:
    def test_writes_a_readable_scene(self, demo_scene):
        raster = read_scene(demo_scene)
        assert raster.shape == (128, 128)
        assert raster.looks == 25.0
        assert raster.mask.all()
        header = (demo_scene / "header.txt").read_text()
        assert "kind = T3" in header
        assert "dtype = float32" in header

    def test_seed_override_changes_the_scene(self, tmp_path):
        for seed, name in ((None, "a"), (123, "b")):
            args = ["generate", str(DEMO_SPEC), "--out", str(tmp_path / name)]
            if seed is not None:
                args += ["--seed", str(seed)]
            assert main(args) == 0
        a = (tmp_path / "a" / "T11.bin").read_bytes()
        b = (tmp_path / "b" / "T11.bin").read_bytes()
        assert a != b

    def test_rejects_bad_spec(self, tmp_path, capsys):
        spec = tmp_path / "bad.spec"
        spec.write_text("rows = 4\ncols = 4\nlooks = 1\nseed = 1\n")
        code = main(["generate", str(spec), "--out", str(tmp_path / "out")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestClassify:
    def test_artifacts_exist_and_are_consistent(self, classified):
        labels, header = read_labels(classified)
        assert labels.shape == (128, 128)
        assert header["masked"] == str(MASKED_LABEL)
        assert header["dtype"] == "uint16"

        legend_lines = (classified / "legend.csv").read_text().strip().splitlines()
        assert legend_lines[0] == "class_id,category,r,g,b,pixels,center_trace"
        class_ids = []
        pixel_counts = []
        for line in legend_lines[1:]:
            fields = line.split(",")
            class_ids.append(int(fields[0]))
            pixel_counts.append(int(fields[5]))
        assert class_ids == sorted(class_ids)
        assert int(header["classes"]) == len(class_ids)

        present = set(np.unique(labels)) - {MASKED_LABEL}
        assert present <= set(class_ids)
        assert sum(pixel_counts) == int((labels != MASKED_LABEL).sum())

        ppm = (classified / "map.ppm").read_bytes()
        assert ppm.startswith(b"P6\n128 128\n255\n")
        assert len(ppm) == len(b"P6\n128 128\n255\n") + 128 * 128 * 3

        records = [
            json.loads(line)
            for line in (classified / "report.jsonl").read_text().splitlines()
        ]
        assert records[0]["iteration"] == 0
        assert all("objective" in r and "clusters" in r for r in records)

    def test_rerun_is_byte_identical(self, demo_scene, classified, tmp_path):
        out = tmp_path / "again"
        assert main(["classify", str(demo_scene), "--out", str(out)]) == 0
        for name in ("labels.bin", "map.ppm", "legend.csv", "report.jsonl"):
            assert (out / name).read_bytes() == (classified / name).read_bytes()

    def test_worker_flag_does_not_change_labels(self, demo_scene, classified, tmp_path):
        out = tmp_path / "mt"
        assert main(
            ["classify", str(demo_scene), "--out", str(out), "--workers", "4"]
        ) == 0
        assert (out / "labels.bin").read_bytes() == (
            classified / "labels.bin"
        ).read_bytes()

    def test_zero_iterations_match_the_merge_stage(self, demo_scene, tmp_path):
        out = tmp_path / "it0"
        assert main(
            [
                "classify",
                str(demo_scene),
                "--out",
                str(out),
                "--max-iterations",
                "0",
                "--dump-stage",
                "merge",
            ]
        ) == 0
        labels, _ = read_labels(out)
        merge = np.fromfile(
            out / "stages" / "stage_merge" / "labels_initial.bin", dtype="<u2"
        ).reshape(128, 128)
        # final ids are a pure relabeling of the merge-stage cluster ids
        assert ((labels == MASKED_LABEL) == (merge == MASKED_LABEL)).all()
        pairs = {(m, f) for m, f in zip(merge.ravel(), labels.ravel())}
        merge_to_final = {}
        for m, f in pairs:
            assert merge_to_final.setdefault(m, f) == f
        finals = list(merge_to_final.values())
        assert len(set(finals)) == len(finals)

    def test_filter_stage_dump_recomposes_the_labels(self, demo_scene, tmp_path):
        first = tmp_path / "first"
        assert main(
            [
                "classify",
                str(demo_scene),
                "--out",
                str(first),
                "--dump-stage",
                "filter",
            ]
        ) == 0
        second = tmp_path / "second"
        assert main(
            [
                "classify",
                str(first / "stages" / "stage_filter"),
                "--out",
                str(second),
                "--no-deorient",
                "--filter-window",
                "1",
            ]
        ) == 0
        assert (second / "labels.bin").read_bytes() == (
            first / "labels.bin"
        ).read_bytes()
        assert (second / "legend.csv").read_bytes() == (
            first / "legend.csv"
        ).read_bytes()

    def test_dump_all_writes_every_stage(self, demo_scene, tmp_path):
        out = tmp_path / "dumps"
        assert main(
            ["classify", str(demo_scene), "--out", str(out), "--dump-stage", "all"]
        ) == 0
        stages = out / "stages"
        assert (stages / "stage_deorient" / "header.txt").exists()
        assert (stages / "stage_filter" / "header.txt").exists()
        assert (stages / "stage_similarity" / "f_trihedral.f64").exists()
        assert (stages / "stage_category" / "category.u8").exists()
        assert (stages / "stage_merge" / "labels_initial.bin").exists()
        category = np.fromfile(stages / "stage_category" / "category.u8", np.uint8)
        assert set(np.unique(category)) <= {0, 1, 2, 0xFF}

    def test_multilook_classifies_single_look_scenes(self, tmp_path):
        rng = np.random.default_rng(91)
        s = random_sinclair_stack(rng, 64).reshape(8, 8, 2, 2)
        scene = tmp_path / "slc"
        write_scene(PolsarRaster(KIND_SINCLAIR, s), scene, dtype="float64")
        out = tmp_path / "out"
        code = main(
            [
                "classify",
                str(scene),
                "--out",
                str(out),
                "--multilook",
                "2",
                "2",
                "--filter-window",
                "1",
                "--initial-clusters",
                "4",
                "--classes-per-category",
                "2",
            ]
        )
        assert code == 0
        labels, header = read_labels(out)
        assert labels.shape == (4, 4)

    def test_missing_scene_fails_cleanly(self, tmp_path, capsys):
        code = main(["classify", str(tmp_path / "nope"), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_flag_values_fail_cleanly(self, demo_scene, tmp_path, capsys):
        code = main(
            [
                "classify",
                str(demo_scene),
                "--out",
                str(tmp_path / "o"),
                "--filter-window",
                "4",
            ]
        )
        assert code == 1
        assert "odd" in capsys.readouterr().err

    def test_unknown_stage_is_an_argparse_error(self, demo_scene, tmp_path, capsys):
        with pytest.raises(SystemExit):
            main(
                [
                    "classify",
                    str(demo_scene),
                    "--out",
                    str(tmp_path / "o"),
                    "--dump-stage",
                    "sideways",
                ]
            )


class TestSimilarity:
    def test_maps_and_rasters(self, demo_scene, tmp_path):
        out = tmp_path / "sim"
        assert main(["similarity", str(demo_scene), "--out", str(out)]) == 0
        for name in ("trihedral", "dihedral", "random_volume"):
            pgm = (out / f"f_{name}.pgm").read_bytes()
            assert pgm.startswith(b"P5\n128 128\n255\n")
            assert len(pgm) == len(b"P5\n128 128\n255\n") + 128 * 128
            for prefix in ("f", "gamma", "w"):
                raw = np.fromfile(out / f"{prefix}_{name}.f32", dtype="<f4")
                assert raw.shape == (128 * 128,)

        f_tri = np.fromfile(out / "f_trihedral.f32", dtype="<f4").reshape(128, 128)
        f_rv = np.fromfile(out / "f_random_volume.f32", dtype="<f4").reshape(128, 128)
        interior = (slice(3, 125), slice(3, 40))  # inside the odd-bounce strip
        assert f_tri[interior].min() > 0.95
        assert 0.55 < f_rv[interior].mean() < 0.65
        assert f_rv[interior].min() > 0.55 and f_rv[interior].max() < 0.65

        pgm_pixels = np.frombuffer(
            (out / "f_trihedral.pgm").read_bytes()[len(b"P5\n128 128\n255\n") :],
            dtype=np.uint8,
        ).reshape(128, 128)
        assert pgm_pixels[interior].min() >= 243  # 0.95 * 255

    def test_all_masked_scene_warns_but_succeeds(self, tmp_path, capsys):
        scene = tmp_path / "masked"
        data = np.zeros((2, 3, 3, 3), complex)
        raster = PolsarRaster("coherency", data, np.zeros((2, 3), bool))
        write_scene(raster, scene)
        out = tmp_path / "sim"
        assert main(["similarity", str(scene), "--out", str(out)]) == 0
        assert "no valid pixels" in capsys.readouterr().err
        pgm = (out / "f_trihedral.pgm").read_bytes()
        assert pgm.endswith(bytes(6))  # all-black map
        raw = np.fromfile(out / "w_dihedral.f32", dtype="<f4")
        assert np.isnan(raw).all()
