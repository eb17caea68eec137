"""Command-line interface.

Three subcommands: generate (synthesize a scene from a spec file),
similarity (per-target similarity maps), classify (full unsupervised
classification). All artifact paths live under the directory given by
--out.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .classify import ClassifierConfig
from .pipeline import (
    DUMP_STAGES,
    PipelineConfig,
    run_classify,
    run_generate,
    run_similarity,
)
from .preprocess import PreprocessConfig


def _add_preprocess_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--no-deorient",
        action="store_true",
        help="skip the orientation-angle compensation stage",
    )
    parser.add_argument(
        "--filter-window",
        type=int,
        default=5,
        metavar="N",
        help="odd boxcar window size; 1 disables filtering (default 5)",
    )
    parser.add_argument(
        "--multilook",
        type=int,
        nargs=2,
        metavar=("RANGE", "AZIMUTH"),
        help="multilook factors applied to single-look complex scenes",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geopolsar",
        description="Unsupervised polarimetric SAR classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="synthesize a scene from a spec file")
    gen.add_argument("spec", type=Path, help="scene spec file")
    gen.add_argument("--out", type=Path, required=True, help="output scene directory")
    gen.add_argument("--seed", type=int, help="override the seed in the spec")

    sim = sub.add_parser("similarity", help="write per-target similarity maps")
    sim.add_argument("scene", type=Path, help="scene directory")
    sim.add_argument("--out", type=Path, required=True, help="output directory")
    _add_preprocess_flags(sim)

    cls = sub.add_parser("classify", help="classify a scene")
    cls.add_argument("scene", type=Path, help="scene directory")
    cls.add_argument("--out", type=Path, required=True, help="output directory")
    _add_preprocess_flags(cls)
    cls.add_argument(
        "--initial-clusters",
        type=int,
        default=30,
        metavar="N",
        help="seed clusters per category (default 30)",
    )
    cls.add_argument(
        "--classes-per-category",
        type=int,
        default=5,
        metavar="N",
        help="final classes per category (default 5)",
    )
    cls.add_argument(
        "--max-iterations",
        type=int,
        default=4,
        metavar="N",
        help="refinement passes (default 4)",
    )
    cls.add_argument(
        "--convergence-fraction",
        type=float,
        default=0.01,
        metavar="X",
        help="stop once the changed-label fraction drops below X (default 0.01)",
    )
    cls.add_argument(
        "--mixed-threshold",
        type=float,
        default=0.5,
        metavar="X",
        help="mixed pixel when max(w)/sum(w) <= X (default 0.5)",
    )
    cls.add_argument(
        "--workers",
        type=int,
        default=1,
        metavar="N",
        help="worker threads for distance evaluation (default 1)",
    )
    cls.add_argument(
        "--dump-stage",
        action="append",
        default=[],
        choices=list(DUMP_STAGES) + ["all"],
        metavar="STAGE",
        help=f"dump an intermediate stage (choices: {', '.join(DUMP_STAGES)}, all); repeatable",
    )
    return parser


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    preprocess = PreprocessConfig(
        deorient=not args.no_deorient,
        filter_window=args.filter_window,
    )
    classifier = ClassifierConfig(
        initial_clusters_per_category=getattr(args, "initial_clusters", 30),
        final_classes_per_category=getattr(args, "classes_per_category", 5),
        max_iterations=getattr(args, "max_iterations", 4),
        convergence_fraction=getattr(args, "convergence_fraction", 0.01),
        mixed_threshold=getattr(args, "mixed_threshold", 0.5),
    )
    stages = getattr(args, "dump_stage", [])
    if "all" in stages:
        stages = list(DUMP_STAGES)
    return PipelineConfig(
        preprocess=preprocess,
        classifier=classifier,
        workers=getattr(args, "workers", 1),
        multilook_factors=tuple(args.multilook) if args.multilook else None,
        dump_stages=tuple(stages),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            run_generate(args.spec, args.out, seed=args.seed)
        elif args.command == "similarity":
            any_valid = run_similarity(args.scene, args.out, _pipeline_config(args))
            if not any_valid:
                print(
                    "warning: scene has no valid pixels; maps are empty",
                    file=sys.stderr,
                )
        elif args.command == "classify":
            result = run_classify(args.scene, args.out, _pipeline_config(args))
            last = result.history[-1] if result.history else {}
            print(
                f"classified {int(result.valid.sum())} pixels into "
                f"{len(result.classes)} classes "
                f"({last.get('iteration', 0)} refinement passes)"
            )
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
