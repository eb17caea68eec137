"""End-to-end classification pipeline and its on-disk artifacts.

Stage order: read, optional multilook (Sinclair input), optional
deorientation, speckle filter, Kennaugh conversion, per-target similarity,
categorization, span-ordered seeding, capped merging, iterative Wishart
refinement, rendering. Stage dumps are written in full precision so a
pipeline restarted from a dumped stage reproduces the final labels
byte-for-byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .classify import (
    ClassifierConfig,
    Cluster,
    categorize_arrays,
    initial_clusters,
    iterate_classification,
    merge_clusters,
)
from .geodesic import DEFAULT_TARGETS, CanonicalTarget, similarity_arrays
from .preprocess import PreprocessConfig, deorient_raster, multilook, speckle_filter
from .raster import KIND_SINCLAIR, PolsarRaster, raster_to_kennaugh
from .render import MASKED_LABEL, ClassEntry, render_map
from .scene import read_scene, write_scene

__all__ = [
    "DUMP_STAGES",
    "PipelineConfig",
    "ClassifyResult",
    "classify_raster",
    "run_classify",
    "run_similarity",
    "run_generate",
]

DUMP_STAGES = ("deorient", "filter", "similarity", "category", "merge")


@dataclass
class PipelineConfig:
    """Everything the classify and similarity commands can tune."""

    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    targets: Tuple[CanonicalTarget, ...] = DEFAULT_TARGETS
    workers: int = 1
    multilook_factors: Optional[Tuple[int, int]] = None
    dump_stages: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        unknown = [s for s in self.dump_stages if s not in DUMP_STAGES]
        if unknown:
            raise ValueError(f"unknown dump stage {unknown[0]!r}")
        if self.multilook_factors is not None:
            rf, af = self.multilook_factors
            if rf < 1 or af < 1:
                raise ValueError("multilook factors must be positive integers")


@dataclass
class ClassifyResult:
    labels: np.ndarray
    classes: List[ClassEntry]
    clusters: List[Cluster]
    history: List[Dict]
    categories: np.ndarray
    mixed: np.ndarray
    valid: np.ndarray


def _dump_similarity(directory: Path, names, f, gamma, w) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for i, name in enumerate(names):
        for prefix, stack in (("f", f), ("gamma", gamma), ("w", w)):
            stack[i].astype("<f8").tofile(directory / f"{prefix}_{name}.f64")


def _dump_category(directory: Path, categories, mixed, valid) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    cat = np.where(valid, categories, 0xFF).astype(np.uint8)
    mix = np.where(valid, mixed, 0xFF).astype(np.uint8)
    cat.tofile(directory / "category.u8")
    mix.tofile(directory / "mixed.u8")


def _dump_labels(directory: Path, filename: str, labels: np.ndarray) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    labels.astype("<u2").tofile(directory / filename)


def classify_raster(
    raster: PolsarRaster,
    config: PipelineConfig,
    dump_dir: Optional[Path] = None,
) -> ClassifyResult:
    """Classify an in-memory raster; see the module docstring for stages."""

    def dump_scene(stage: str, stage_raster: PolsarRaster):
        if dump_dir is not None and stage in config.dump_stages:
            write_scene(stage_raster, dump_dir / f"stage_{stage}", dtype="float64")

    if raster.kind == KIND_SINCLAIR:
        rf, af = config.multilook_factors or (1, 1)
        raster = multilook(raster, rf, af)
    if config.preprocess.deorient:
        raster = deorient_raster(raster)
        dump_scene("deorient", raster)
    if config.preprocess.filter_window > 1:
        raster = speckle_filter(raster, config.preprocess)
        dump_scene("filter", raster)

    kennaugh = raster_to_kennaugh(raster)
    f, gamma, w, valid = similarity_arrays(
        kennaugh.data, kennaugh.mask, config.targets
    )
    if dump_dir is not None and "similarity" in config.dump_stages:
        _dump_similarity(
            dump_dir / "stage_similarity",
            [t.name for t in config.targets],
            f,
            gamma,
            w,
        )

    rows, cols = raster.shape
    n_targets = len(config.targets)
    w_flat = w.reshape(n_targets, -1)
    categories, mixed, cat_valid = categorize_arrays(
        w_flat, config.classifier.mixed_threshold
    )
    valid = valid.reshape(-1) & cat_valid
    categories_img = np.where(valid, categories, -1).reshape(rows, cols)
    mixed_img = (mixed & valid).reshape(rows, cols)
    if dump_dir is not None and "category" in config.dump_stages:
        _dump_category(
            dump_dir / "stage_category",
            categories_img,
            mixed_img,
            valid.reshape(rows, cols),
        )

    pixel_index = np.flatnonzero(valid)
    t_flat = raster.data.reshape(-1, 3, 3)[pixel_index]
    cat_flat = categories[pixel_index]
    mixed_flat = mixed[pixel_index]

    # seed and merge per category; ids stay globally unique and ordered
    k0 = config.classifier.initial_clusters_per_category
    merged: List[Cluster] = []
    labels0 = np.full(len(pixel_index), -1, dtype=np.int64)
    seed_to_merged = np.full(n_targets * k0, -1, dtype=np.int64)
    for ci in range(n_targets):
        sel = np.flatnonzero(cat_flat == ci)
        if sel.size == 0:
            continue
        seeds, seed_labels = initial_clusters(
            t_flat[sel], k0, category=ci, start_id=ci * k0
        )
        labels0[sel] = seed_labels
        merged_ci = merge_clusters(seeds, config.classifier)
        for cluster in merged_ci:
            seed_to_merged[list(cluster.source_ids)] = cluster.id
        merged.extend(merged_ci)
    if pixel_index.size:
        labels0 = seed_to_merged[labels0]

    labels_img0 = np.full(rows * cols, MASKED_LABEL, dtype=np.uint16)
    if pixel_index.size:
        labels_img0[pixel_index] = labels0
    if dump_dir is not None and "merge" in config.dump_stages:
        _dump_labels(
            dump_dir / "stage_merge",
            "labels_initial.bin",
            labels_img0.reshape(rows, cols),
        )

    labels, clusters, history = iterate_classification(
        t_flat,
        cat_flat,
        mixed_flat,
        merged,
        config.classifier,
        initial_labels=labels0,
        workers=config.workers,
    )

    # dense class ids ordered by category, then center power, then seed id
    def sort_key(cluster: Cluster):
        return (cluster.category, np.trace(cluster.center).real, cluster.id)

    ordered = sorted(clusters, key=sort_key)
    id_to_class = np.full(n_targets * k0, MASKED_LABEL, dtype=np.int64)
    for rank, cluster in enumerate(ordered):
        id_to_class[cluster.id] = rank
    classes: List[ClassEntry] = []
    within: Dict[int, int] = {}
    for rank, cluster in enumerate(ordered):
        class_index = within.get(cluster.category, 0)
        within[cluster.category] = class_index + 1
        classes.append(
            ClassEntry(
                class_id=rank,
                category_index=cluster.category,
                category=config.targets[cluster.category].name,
                class_index=class_index,
                pixels=cluster.member_count,
                center_trace=float(np.trace(cluster.center).real),
            )
        )

    labels_img = np.full(rows * cols, MASKED_LABEL, dtype=np.uint16)
    if pixel_index.size and labels.size:
        labels_img[pixel_index] = id_to_class[labels]
    return ClassifyResult(
        labels=labels_img.reshape(rows, cols),
        classes=classes,
        clusters=list(ordered),
        history=history,
        categories=categories_img,
        mixed=mixed_img,
        valid=valid.reshape(rows, cols),
    )


def _write_labels(result: ClassifyResult, out_dir: Path) -> None:
    labels = result.labels
    labels.astype("<u2").tofile(out_dir / "labels.bin")
    (out_dir / "labels.hdr").write_text(
        "\n".join(
            [
                f"rows = {labels.shape[0]}",
                f"cols = {labels.shape[1]}",
                f"classes = {len(result.classes)}",
                f"masked = {MASKED_LABEL}",
                "dtype = uint16",
                "byte_order = little",
            ]
        )
        + "\n"
    )


def _write_report(history: List[Dict], path: Path) -> None:
    with open(path, "w") as handle:
        for record in history:
            handle.write(json.dumps(record) + "\n")


def run_classify(
    scene_path, out_dir, config: Optional[PipelineConfig] = None
) -> ClassifyResult:
    """Classify a scene directory and write all artifacts into out_dir.

    Artifacts: labels.bin / labels.hdr (u16 little-endian, row-major,
    0xFFFF = masked), report.jsonl (one record per pass), map.ppm and
    legend.csv, plus any requested stage dumps under stages/.
    """
    config = config or PipelineConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raster = read_scene(scene_path)
    dump_dir = out_dir / "stages" if config.dump_stages else None
    result = classify_raster(raster, config, dump_dir)
    _write_labels(result, out_dir)
    _write_report(result.history, out_dir / "report.jsonl")
    render_map(
        result.labels,
        result.classes,
        config.classifier.final_classes_per_category,
        out_dir / "map.ppm",
        out_dir / "legend.csv",
    )
    return result


def run_similarity(
    scene_path, out_dir, config: Optional[PipelineConfig] = None
) -> bool:
    """Write per-target similarity products for a scene.

    For each target: a grayscale P5 map of f scaled [0, 1] -> [0, 255] and
    raw float32 rasters of f, gamma and w (NaN on masked pixels). Returns
    False when the scene has no valid pixels (maps are still written).
    """
    config = config or PipelineConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raster = read_scene(scene_path)
    if raster.kind == KIND_SINCLAIR:
        rf, af = config.multilook_factors or (1, 1)
        raster = multilook(raster, rf, af)
    if config.preprocess.deorient:
        raster = deorient_raster(raster)
    if config.preprocess.filter_window > 1:
        raster = speckle_filter(raster, config.preprocess)
    kennaugh = raster_to_kennaugh(raster)
    f, gamma, w, valid = similarity_arrays(
        kennaugh.data, kennaugh.mask, config.targets
    )
    header = f"P5\n{raster.cols} {raster.rows}\n255\n".encode("ascii")
    for i, target in enumerate(config.targets):
        scaled = np.where(
            valid, np.round(np.clip(f[i], 0.0, 1.0) * 255.0), 0.0
        ).astype(np.uint8)
        (out_dir / f"f_{target.name}.pgm").write_bytes(header + scaled.tobytes())
        for prefix, stack in (("f", f), ("gamma", gamma), ("w", w)):
            stack[i].astype("<f4").tofile(out_dir / f"{prefix}_{target.name}.f32")
    return bool(valid.any())


def run_generate(spec_path, out_dir, seed: Optional[int] = None) -> PolsarRaster:
    """Generate a synthetic scene from a spec file and write it."""
    from .scene import parse_scene_spec, generate_scene, SyntheticSceneSpec

    spec = parse_scene_spec(spec_path)
    if seed is not None:
        spec = SyntheticSceneSpec(
            rows=spec.rows,
            cols=spec.cols,
            looks=spec.looks,
            seed=seed,
            regions=spec.regions,
        )
    raster = generate_scene(spec)
    write_scene(raster, out_dir)
    return raster
