"""Command-line pipeline: annotations -> triplets -> splits -> captions ->
samples/detections -> evaluation -> reports.

Artifacts are written atomically and carry a provenance header (tool
version, seed, config digest), so every stage is reproducible and a rerun
with identical inputs is byte-identical. Exit codes: 0 success, 1 usage
error, 2 data/schema error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from . import corpus as corpus_mod
from . import mockdet, reports, schemas
from .errors import SprelError
from .geometry import RelationConfig
from .ingest import IngestPolicy, load_annotations, load_corpus, write_snapshot
from .manifest import config_digest, provenance, read_json, write_json
from .metrics import (
    EvalConfig,
    EvalReport,
    aggregate,
    read_detections,
    write_detections,
)
from .sampler import SamplerConfig, sample_training_batch, write_training_manifest
from .splits import (
    DEFAULT_VAL_SIZE,
    ObjectPartition,
    SplitManifest,
    build_main_split,
    build_unseen_split,
    builtin_partition,
    train_triplet_count,
)
from .triplets import (
    SpatialTriplet,
    TripletTable,
    build_universe,
    make_captions,
    natural_filter,
    natural_filter_parallel,
    read_captions,
    write_captions,
    _sort_key,
)
from .vocab import COCO80, load_vocabulary

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

CONFIG_ENV = "SPREL_CONFIG"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    pass


def _load_default_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    doc = read_json(path)
    doc.pop("__provenance__", None)
    return doc


def _vocab(spec: str) -> tuple[str, ...]:
    return load_vocabulary(spec)


def _read_natural(path: str) -> TripletTable:
    table = TripletTable.read_jsonl(path)
    if len(table) == 0:
        raise SprelError(f"{path}: no triplets found")
    return table


def _triplet_header(kind: str, seed=None, config=None, **extra):
    return provenance(kind, seed=seed, config=config, extra=extra or None)


def cmd_build_universe(args) -> int:
    vocabulary = _vocab(args.vocab)
    universe = sorted(build_universe(vocabulary), key=_sort_key)
    from .manifest import write_jsonl

    n = write_jsonl(
        args.out,
        (t.as_dict() for t in universe),
        header=_triplet_header("triplet-universe", config={"vocab": args.vocab}, triplets=len(universe)),
    )
    print(f"wrote {n} universe triplets to {args.out}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    policy = IngestPolicy(include_crowd=args.include_crowd, clamp_to_image=not args.no_clamp)
    vocabulary = _vocab(args.vocab) if args.vocab else None
    images, stats = load_annotations(args.annotations, vocabulary=vocabulary, policy=policy)
    write_snapshot(images, args.out)
    print(json.dumps(stats.as_dict(), indent=2, sort_keys=True))
    if args.stats_out:
        write_json(args.stats_out, stats.as_dict(), header=provenance("ingest-stats"))
    return EXIT_OK


def cmd_filter_natural(args) -> int:
    vocabulary = _vocab(args.vocab)
    cfg = RelationConfig(containment_tolerance=args.tolerance)
    images, _ = load_corpus(args.annotations, vocabulary=vocabulary)
    universe = build_universe(vocabulary)
    if args.threads > 1:
        table = natural_filter_parallel(universe, images, cfg, workers=args.threads)
    else:
        table = natural_filter(universe, images, cfg)
    header = _triplet_header(
        "natural-triplets",
        config={"vocab": args.vocab, "tolerance": args.tolerance},
        images=len(images),
        triplets=len(table),
        universe=len(universe),
        share_percent=round(100.0 * len(table) / len(universe), 4),
    )
    table.write_jsonl(args.out, header=header)
    print(
        f"{len(table)} of {len(universe)} triplets occur naturally "
        f"({100.0 * len(table) / len(universe):.1f}%) over {len(images)} images"
    )
    return EXIT_OK


def _load_partition(args, vocabulary) -> ObjectPartition | None:
    if args.partition_file:
        doc = read_json(args.partition_file)
        doc.pop("__provenance__", None)
        return ObjectPartition.from_dict(doc)
    if args.random_partition:
        return None  # drawn from the seed inside build_unseen_split
    if tuple(vocabulary) == COCO80:
        return builtin_partition()
    return None


def cmd_split(args) -> int:
    natural = _read_natural(args.natural)
    vocabulary = _vocab(args.vocab)
    if args.mode == "main":
        manifest = build_main_split(natural, seed=args.seed, val_size=args.val_size, vocabulary=vocabulary)
    else:
        partition = _load_partition(args, vocabulary)
        manifest = build_unseen_split(
            natural, vocabulary, seed=args.seed, val_size=args.val_size, partition=partition
        )
    manifest.save(args.out)
    n_train = train_triplet_count(natural, manifest.partition)
    print(
        f"{manifest.split_kind} split: {len(manifest.test_triplets)} test, "
        f"{len(manifest.val_triplets)} val triplets "
        f"({n_train} natural label-level triplets within the train objects)"
    )
    return EXIT_OK


def _caption_triplets(args) -> list[SpatialTriplet]:
    if args.manifest:
        manifest = SplitManifest.load(args.manifest)
        pool = manifest.test_triplets if args.subset == "test" else manifest.val_triplets
        triplets = sorted(pool, key=_sort_key)
    elif args.triplets:
        triplets = sorted(_read_natural(args.triplets).triplets(), key=_sort_key)
    else:
        raise UsageError("gen-captions needs --triplets or --manifest")
    if args.sample:
        import random

        if args.sample > len(triplets):
            raise SprelError(f"cannot sample {args.sample} from {len(triplets)} triplets")
        triplets = sorted(random.Random(args.seed).sample(triplets, args.sample), key=_sort_key)
    return triplets


def cmd_gen_captions(args) -> int:
    triplets = _caption_triplets(args)
    records = make_captions(triplets, articles=not args.bare_labels)
    header = _triplet_header(
        "caption-manifest",
        seed=args.seed if args.sample else None,
        config={"articles": not args.bare_labels, "sample": args.sample},
        captions=len(records),
    )
    write_captions(records, args.out, header=header)
    print(f"wrote {len(records)} captions to {args.out}")
    return EXIT_OK


def cmd_sample(args) -> int:
    images, _ = load_corpus(args.annotations)
    allowed = None
    if args.manifest:
        manifest = SplitManifest.load(args.manifest)
        if args.split and manifest.split_kind != args.split:
            raise SprelError(
                f"--split {args.split} but {args.manifest} is a {manifest.split_kind} manifest"
            )
        if manifest.split_kind == "unseen":
            allowed = frozenset(manifest.partition.train_objects)
    elif args.split == "unseen":
        raise UsageError("--split unseen needs --manifest for the object partition")
    crop_range = None if args.no_crop else (args.crop_lo, args.crop_hi)
    cfg = SamplerConfig(
        k=args.k,
        max_iter=args.max_iter,
        crop_scale_range=crop_range,
        flip_probability=args.flip_probability,
        allowed_objects=allowed,
        seed=args.seed,
        relation_config=RelationConfig(containment_tolerance=args.tolerance),
    )
    cfg_doc = {
        "k": cfg.k,
        "max_iter": cfg.max_iter,
        "crop_scale_range": list(crop_range) if crop_range else None,
        "flip_probability": cfg.flip_probability,
        "allowed_objects": sorted(allowed) if allowed else None,
        "tolerance": args.tolerance,
    }
    samples = sample_training_batch(images, cfg, args.n)
    n = write_training_manifest(
        samples, args.out, header=provenance("training-manifest", seed=args.seed, config=cfg_doc)
    )
    print(f"wrote {n} training samples to {args.out}")
    return EXIT_OK


def cmd_mock_detect(args) -> int:
    captions = read_captions(args.captions)
    sets = mockdet.generate(
        captions,
        oa_rate=args.oa_rate,
        relation_rate=args.relation_rate,
        images_per_caption=args.images_per_caption,
        seed=args.seed,
    )
    cfg = {"oa_rate": args.oa_rate, "relation_rate": args.relation_rate,
           "images_per_caption": args.images_per_caption}
    n = write_detections(sets, args.out, header=provenance("detections", seed=args.seed, config=cfg))
    print(f"wrote {n} detection sets to {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    captions = read_captions(args.captions)
    detection_sets = read_detections(args.detections)
    cfg = EvalConfig(
        score_threshold=args.threshold,
        images_per_caption=args.images_per_caption,
        pairing_mode=args.pairing,
        relation_config=RelationConfig(containment_tolerance=args.tolerance),
    )
    report = aggregate(detection_sets, captions, cfg)
    write_json(args.out, report.as_dict(), header=provenance("eval-report", config=cfg.as_dict()))
    o = report.overall
    cond = "absent" if o.visor_cond_percent is None else f"{o.visor_cond_percent:.1f}"
    print(
        f"OA {o.oa_percent:.1f}  VISOR {o.visor_percent:.1f}  VISOR_cond {cond}  "
        f"({report.caption_count} captions x {cfg.images_per_caption} images)"
    )
    return EXIT_OK


def cmd_scan_corpus(args) -> int:
    lexicon = corpus_mod.RelationLexicon.load(args.lexicon) if args.lexicon else corpus_mod.RelationLexicon()
    stats = corpus_mod.CorpusStats()
    for path in args.input.split(","):
        stats.merge(corpus_mod.scan_file(path, lexicon, column=args.column))
    write_json(args.out, stats.as_dict(), header=provenance("corpus-stats"))
    share = stats.relation_caption_share
    print(
        f"{stats.total_captions} captions, {stats.captions_with_any_relation} with relations "
        f"({share:.2f}%)" if share is not None else "empty corpus"
    )
    return EXIT_OK


def _atomic_figure(render, path) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".png")
    os.close(fd)
    try:
        render(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_report(args) -> int:
    report = EvalReport.from_dict(read_json(args.eval))
    baseline = EvalReport.from_dict(read_json(args.baseline)) if args.baseline else None
    os.makedirs(args.out, exist_ok=True)
    comment = json.dumps(provenance("report-table", config={"eval": os.path.basename(args.eval)}))

    relation_rows = reports.per_relation_table(report, baseline)
    reports.write_per_relation_csv(relation_rows, os.path.join(args.out, "per_relation.csv"), comment)
    from .manifest import atomic_write

    with atomic_write(os.path.join(args.out, "per_relation.txt")) as fh:
        fh.write(reports.render_per_relation_text(relation_rows))

    bias_rows = reports.bias_table(report, baseline)
    reports.write_bias_csv(bias_rows, os.path.join(args.out, "bias.csv"), comment)

    freq_bins = None
    if args.freq:
        freq = TripletTable.read_jsonl(args.freq)
        edges = tuple(int(e) for e in args.bin_edges.split(",")) if args.bin_edges else reports.DEFAULT_BIN_EDGES
        freq_bins = reports.frequency_correlation(report, freq, edges)
        reports.write_frequency_csv(freq_bins, os.path.join(args.out, "frequency.csv"), comment)

    if not args.no_figures:
        from . import figures

        _atomic_figure(
            lambda p: figures.save_per_relation_figure(relation_rows, p),
            os.path.join(args.out, "per_relation.png"),
        )
        _atomic_figure(
            lambda p: figures.save_bias_figure(bias_rows, p),
            os.path.join(args.out, "bias.png"),
        )
        if freq_bins is not None:
            baseline_bins = None
            if baseline is not None and args.freq:
                baseline_bins = reports.frequency_correlation(
                    baseline, TripletTable.read_jsonl(args.freq),
                    tuple(int(e) for e in args.bin_edges.split(",")) if args.bin_edges else reports.DEFAULT_BIN_EDGES,
                )
            _atomic_figure(
                lambda p: figures.save_frequency_figure(freq_bins, p, baseline_bins),
                os.path.join(args.out, "frequency.png"),
            )
    print(f"report tables written to {args.out}")
    return EXIT_OK


def cmd_sample_triplets(args) -> int:
    freq = TripletTable.read_jsonl(args.freq)
    chosen = reports.sample_qualitative_triplets(freq, args.lo, args.hi, args.n, args.seed)
    from .manifest import write_jsonl

    write_jsonl(
        args.out,
        ({**t.as_dict(), "count": freq.count(t)} for t in chosen),
        header=provenance("qualitative-triplets", seed=args.seed,
                          config={"lo": args.lo, "hi": args.hi, "n": args.n}),
    )
    print(f"sampled {len(chosen)} triplets with corpus count in [{args.lo}, {args.hi}]")
    return EXIT_OK


def cmd_schema(args) -> int:
    if args.name:
        if args.name not in schemas.ALL:
            raise UsageError(f"unknown schema {args.name!r}; have {sorted(schemas.ALL)}")
        print(json.dumps(schemas.ALL[args.name], indent=2, sort_keys=True))
        return EXIT_OK
    os.makedirs(args.out, exist_ok=True)
    for name, schema in schemas.ALL.items():
        write_json(os.path.join(args.out, f"{name}.schema.json"), schema)
    print(f"wrote {len(schemas.ALL)} schemas to {args.out}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="sprel", description=__doc__)
    parser.add_argument("--version", action="version", version="sprel 0.1.0")
    parser.add_argument("--config", help=f"default-config JSON (or ${CONFIG_ENV})")
    parser.add_argument(
        "--config-digest", action="store_true", help="print the resolved config digest and exit"
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("build-universe", help="all ordered label pairs x 14 relations")
    p.add_argument("--vocab", default="coco80")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_universe)

    p = sub.add_parser("ingest", help="COCO instances file -> normalized snapshot")
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--vocab", default=None)
    p.add_argument("--include-crowd", action="store_true")
    p.add_argument("--no-clamp", action="store_true")
    p.add_argument("--stats-out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("filter-natural", help="triplets occurring in an annotated corpus")
    p.add_argument("--annotations", required=True, help="COCO instances file or snapshot")
    p.add_argument("--vocab", default="coco80")
    p.add_argument("--tolerance", type=float, default=0.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_filter_natural)

    p = sub.add_parser("split", help="build a main or unseen split manifest")
    p.add_argument("--mode", choices=("main", "unseen"), required=True)
    p.add_argument("--natural", required=True)
    p.add_argument("--vocab", default="coco80")
    p.add_argument("--val-size", type=int, default=DEFAULT_VAL_SIZE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--partition-file")
    p.add_argument("--random-partition", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("gen-captions", help="verbalize triplets into a caption manifest")
    p.add_argument("--triplets", help="triplet table (universe or natural)")
    p.add_argument("--manifest", help="split manifest to draw from")
    p.add_argument("--subset", choices=("test", "val"), default="test")
    p.add_argument("--sample", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bare-labels", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_captions)

    p = sub.add_parser("sample", help="training caption manifest with augmentation")
    p.add_argument("--annotations", required=True)
    p.add_argument("--split", choices=("main", "unseen"), default=None,
                   help="expected split kind of --manifest")
    p.add_argument("--manifest", help="split manifest (unseen restricts to train objects)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--max-iter", type=int, default=10)
    p.add_argument("--flip-probability", type=float, default=0.5)
    p.add_argument("--crop-lo", type=float, default=0.5)
    p.add_argument("--crop-hi", type=float, default=1.0)
    p.add_argument("--no-crop", action="store_true")
    p.add_argument("--tolerance", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("mock-detect", help="planted detections for pipeline dry runs")
    p.add_argument("--captions", required=True)
    p.add_argument("--oa-rate", type=float, default=0.8)
    p.add_argument("--relation-rate", type=float, default=0.6)
    p.add_argument("--images-per-caption", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mock_detect)

    p = sub.add_parser("evaluate", help="score detections against captions")
    p.add_argument("--captions", required=True)
    p.add_argument("--detections", required=True)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--images-per-caption", type=int, default=4)
    p.add_argument("--pairing", choices=("best_score", "any_pair"), default="best_score")
    p.add_argument("--tolerance", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("scan-corpus", help="keyword frequency scan of caption corpora")
    p.add_argument("--input", required=True, help="comma-separated text/tsv files")
    p.add_argument("--column", type=int, default=None, help="tab-separated caption column")
    p.add_argument("--lexicon", help="JSON keyword lists per relation")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scan_corpus)

    p = sub.add_parser("report", help="tables and figures from an evaluation report")
    p.add_argument("--eval", required=True)
    p.add_argument("--baseline")
    p.add_argument("--freq", help="natural triplet table for frequency bins")
    p.add_argument("--bin-edges", help="comma-separated log bin edges")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sample-triplets", help="qualitative triplets in a frequency range")
    p.add_argument("--freq", required=True)
    p.add_argument("--lo", type=int, default=100)
    p.add_argument("--hi", type=int, default=1000)
    p.add_argument("--n", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_triplets)

    p = sub.add_parser("schema", help="emit the shared wire-format JSON schemas")
    p.add_argument("--name", help="print one schema to stdout")
    p.add_argument("--out", default="schemas")
    p.set_defaults(func=cmd_schema)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    given = sys.argv[1:] if argv is None else argv
    try:
        args = parser.parse_args(given)
        defaults = _load_default_config(args.config)
        if args.config_digest:
            print(config_digest(defaults))
            return EXIT_OK
        if not getattr(args, "func", None):
            parser.print_help()
            return EXIT_USAGE
        # Config-file values stand in for flags absent from the command line.
        for key, value in defaults.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr) and f"--{key}" not in given:
                setattr(args, attr, value)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SprelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # invariant violations and bugs
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
