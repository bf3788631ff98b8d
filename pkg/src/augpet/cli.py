"""``augpet`` command line: one subcommand per pipeline stage, chained over files.

Options may also come from a JSON file (``--config``) whose keys mirror the
flag names; explicit flags win. Each run that writes files also writes a
manifest next to them with the resolved options and input hashes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .augment import (
    AugmentedExample,
    EdaConfig,
    back_translate_all,
    eda_augment,
    greyscale_augment,
    oversample,
)
from .corpus import (
    CorpusError,
    class_distribution,
    load_corpus,
    sample_training_set,
    stratified_split,
    write_corpus,
    write_jsonl,
)
from .lexicons import LexiconError, default_stopwords, load_embeddings, load_half_scales, load_stopwords, load_thesaurus
from .metrics import AggregateReport, MetricsReport, aggregate_runs, classification_metrics, render_csv, render_table
from .model import BowClassifier, BowConfig
from .pet import DEFAULT_PATTERNS, Verbalizer, load_pvp, run_ipet, run_pet, run_supervised
from .simfilter import score_augmented, quartile_filter, score_distribution
from .translation import (
    ENDPOINT_ENV,
    CachedTranslationClient,
    HttpTranslationClient,
    MockTranslationClient,
    TranslationError,
)


class UsageError(Exception):
    pass


def _csv(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def _ints(value):
    return [int(v) for v in _csv(value)]


def _floats(value):
    return [float(v) for v in _csv(value)]


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _dump_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def _write_manifest(args, target: Path, inputs):
    hashes = {str(p): _sha256(p) for p in inputs if p and Path(p).is_file()}
    options = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    doc = {
        "command": args.command,
        "version": __version__,
        "options": options,
        "seeds": options.get("seeds", options.get("seed")),
        "inputs": hashes,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    path = target / "manifest.json" if target.is_dir() else target.with_name(target.name + ".manifest.json")
    _dump_json(doc, path)


def _bow_config(args) -> BowConfig:
    return BowConfig(
        hidden_units=args.hidden_units,
        dropout=args.dropout,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        distill_temperature=args.temperature,
        min_steps=args.min_steps,
    )


# subcommands


def cmd_stats(args):
    d = load_corpus(args.input, args.format)
    rep = class_distribution(d)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=2))
    else:
        print(f"total\t{rep.total}")
        for label, (n, pct) in rep.per_class.items():
            print(f"{label}\t{n}\t{pct:.1f}%")
    if args.out:
        _dump_json(rep.to_dict(), args.out)
        _write_manifest(args, Path(args.out), [args.input])
    return 0


def cmd_split(args):
    d = load_corpus(args.input, args.format)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.t_size:
        split = sample_training_set(d, args.t_size, args.seed)
        write_corpus(split.labeled, out / "labeled.jsonl")
        write_corpus(split.unlabeled, out / "unlabeled.jsonl")
    else:
        names = ("train", "dev", "test") if len(args.fractions) == 3 else [f"part{i}" for i in range(len(args.fractions))]
        for name, part in zip(names, stratified_split(d, tuple(args.fractions), args.seed)):
            write_corpus(part, out / f"{name}.jsonl")
    _write_manifest(args, out, [args.input])
    return 0


def _translator(args):
    if args.translator == "mock":
        client = MockTranslationClient.from_file(args.mock_file) if args.mock_file else MockTranslationClient()
    else:
        url = args.endpoint or os.environ.get(ENDPOINT_ENV)
        if not url:
            raise UsageError(f"--endpoint or ${ENDPOINT_ENV} is required for the http translator")
        client = HttpTranslationClient(url, retries=args.retries)
    return CachedTranslationClient(client, args.cache) if args.cache else client


def cmd_augment(args):
    d = load_corpus(args.input, args.format)
    inputs = [args.input]
    if args.method == "oversample":
        write_corpus(oversample(d, args.seed), args.out)
        _write_manifest(args, Path(args.out), inputs)
        return 0
    if args.method == "eda":
        thesaurus = load_thesaurus(args.thesaurus) if args.thesaurus else None
        if thesaurus is None:
            raise UsageError("--thesaurus is required for eda")
        sw = load_stopwords(args.stopwords) if args.stopwords else default_stopwords()
        cfg = EdaConfig(alpha_sr=args.alpha, p_rd=args.p, copies_per_example=args.copies)
        items = eda_augment(d, thesaurus, sw, cfg, args.seed, jobs=args.jobs)
        inputs += [args.thesaurus, args.stopwords]
    elif args.method == "greyscale":
        if not args.scales:
            raise UsageError("--scales is required for greyscale")
        items = greyscale_augment(d, load_half_scales(args.scales), args.cap, jobs=args.jobs)
        inputs += args.scales
    else:
        items = back_translate_all(d, _translator(args), args.pivots, jobs=args.jobs)
        inputs += [args.mock_file]
    records = [e.to_record() for e in d] if args.include_originals else []
    write_jsonl(records + [a.to_record() for a in items], args.out)
    _write_manifest(args, Path(args.out), inputs)
    return 0


def _read_augmented(path):
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if "origin_id" not in rec:
                continue
            try:
                items.append(AugmentedExample.from_record(rec))
            except (KeyError, ValueError) as exc:
                raise CorpusError(f"{path} line {lineno}: bad augmented record ({exc})") from None
    return items


def cmd_filter(args):
    items = _read_augmented(args.input)
    origins = load_corpus(args.origins)
    scored = score_augmented(items, origins, load_embeddings(args.embeddings))
    kept = quartile_filter(scored, args.quantile)
    write_jsonl((a.to_record() for a in kept), args.out)
    if args.report:
        dist = score_distribution(scored)
        dist.update(kept=len(kept), removed=len(scored) - len(kept), quantile=args.quantile)
        _dump_json(dist, args.report)
    _write_manifest(args, Path(args.out), [args.input, args.origins, args.embeddings])
    return 0


def cmd_train(args):
    d = load_corpus(args.input)
    table = load_embeddings(args.embeddings)
    model = BowClassifier.from_config(table, _bow_config(args), args.seed)
    model.fit(d.texts, d.y, classes=d.labels)
    model.save(args.out)
    _write_manifest(args, Path(args.out), [args.input, args.embeddings])
    return 0


def cmd_predict(args):
    table = load_embeddings(args.embeddings) if args.embeddings else None
    model = BowClassifier.load(args.model, table)
    d = load_corpus(args.input)
    probs = model.predict_proba(d.texts)
    classes = [str(c) for c in model.classes_]
    records = []
    for e, row in zip(d, probs):
        records.append({
            "id": e.id,
            "text": e.text,
            "label": classes[int(np.argmax(row))],
            "probs": {c: float(p) for c, p in zip(classes, row)},
        })
    write_jsonl(records, args.out)
    _write_manifest(args, Path(args.out), [args.model, args.input])
    return 0


def cmd_evaluate(args):
    truth = load_corpus(args.truth)
    preds = {}
    with open(args.pred, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                label = rec.get("label")
                if label is None:
                    label = max(rec["probs"], key=rec["probs"].get)
                preds[str(rec["id"])] = label
    missing = [e.id for e in truth if e.id not in preds]
    if missing:
        raise CorpusError(f"{len(missing)} test ids have no prediction, e.g. {missing[:3]}")
    labels = args.labels or list(truth.labels)
    rep = classification_metrics(truth.y, [preds[e.id] for e in truth], labels)
    _dump_json(rep.to_dict(), args.out)
    print(f"accuracy {rep.accuracy:.4f}  f1_macro {rep.f1_macro:.4f}  f1_weighted {rep.f1_weighted:.4f}")
    _write_manifest(args, Path(args.out), [args.truth, args.pred])
    return 0


def cmd_pet(args):
    train = load_corpus(args.train)
    test = load_corpus(args.test, labels=train.labels)
    table = load_embeddings(args.embeddings)
    if args.pvp:
        patterns, verbalizer = load_pvp(args.pvp)
    else:
        patterns, verbalizer = list(DEFAULT_PATTERNS), Verbalizer({c: c.lower() for c in train.labels})
    cfg = _bow_config(args)
    if args.ipet:
        result = run_ipet(train, test, args.t_size, patterns, verbalizer, table, cfg, args.generations,
                          args.growth, args.seeds)
    else:
        result = run_pet(train, test, args.t_size, patterns, verbalizer, table, cfg, args.seeds)
    doc = {"method": "ipet" if args.ipet else "pet", "t_size": args.t_size, "seeds": args.seeds, **result.to_dict()}
    if args.baseline:
        doc["supervised"] = run_supervised(train, test, args.t_size, table, cfg, args.seeds).to_dict()
    if not args.keep_generations:
        del doc["generations"]
    _dump_json(doc, args.out)
    agg = result.aggregate
    print(f"{doc['method']} t={args.t_size}: accuracy {agg.mean['accuracy']:.3f} ±{agg.std['accuracy']:.3f}")
    _write_manifest(args, Path(args.out), [args.train, args.test, args.embeddings, args.pvp])
    return 0


def _load_row(paths) -> AggregateReport:
    reports = []
    for p in paths:
        doc = json.loads(Path(p).read_text(encoding="utf-8"))
        if "aggregate" in doc and len(paths) == 1:
            return AggregateReport.from_dict(doc["aggregate"])
        if "reports" in doc:
            reports.extend(MetricsReport.from_dict(r) for r in doc["reports"])
        else:
            reports.append(MetricsReport.from_dict(doc))
    return aggregate_runs(reports)


def cmd_report(args):
    rows = {}
    for row_arg in args.row:
        name, sep, files = row_arg.partition("=")
        if not sep or not files:
            raise UsageError(f"--row expects NAME=file1.json[,file2.json], got {row_arg!r}")
        rows[name] = _load_row(_csv(files))
    text = render_table(rows)
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(render_csv(rows), encoding="utf-8")
    return 0


# parser


def _add_bow_args(p):
    p.add_argument("--hidden-units", type=int, default=256)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--temperature", type=float, default=2.0, help="distillation temperature")
    p.add_argument("--min-steps", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="augpet", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file of option defaults (keys mirror flag names)")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads for per-example work")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="class distribution of a corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=("jsonl", "tsv"))
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="stratified train/dev/test split, or a PET labeled/unlabeled split")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=("jsonl", "tsv"))
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fractions", type=_floats, default=[0.7, 0.15, 0.15])
    p.add_argument("--t-size", type=int, help="draw a class-balanced labeled set of this size instead")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("augment", help="generate synthetic examples")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=("jsonl", "tsv"))
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=("oversample", "eda", "bt", "greyscale"), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--copies", type=int, default=3)
    p.add_argument("--pivots", type=_csv, default=["es", "fr", "it"])
    p.add_argument("--cap", type=int)
    p.add_argument("--scales", type=_csv, help="comma-separated scale files")
    p.add_argument("--thesaurus")
    p.add_argument("--stopwords")
    p.add_argument("--translator", choices=("http", "mock"), default="http")
    p.add_argument("--endpoint", help=f"translation service URL (default ${ENDPOINT_ENV})")
    p.add_argument("--mock-file", help="JSON table for the mock translator")
    p.add_argument("--cache", help="persistent translation cache (JSONL)")
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--include-originals", action="store_true")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("filter", help="score augmented examples and drop the lowest quantile")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--origins", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--quantile", type=float, default=0.25)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("train", help="train the bag-of-words classifier")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_bow_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="class probabilities from a checkpoint")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--embeddings", help="override the embeddings path stored in the checkpoint")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="metrics of predictions against a labeled corpus")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--labels", type=_csv)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pet", help="PET / iPET over seeds")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--t-size", type=int, required=True)
    p.add_argument("--pvp", help="patterns/verbalizer JSON")
    p.add_argument("--seeds", type=_ints, default=[0, 1, 2, 3, 4])
    p.add_argument("--ipet", action="store_true")
    p.add_argument("--generations", type=int, default=3)
    p.add_argument("--growth", type=float, default=5.0)
    p.add_argument("--baseline", action="store_true", help="also run supervised training on the same labeled sets")
    p.add_argument("--keep-generations", action="store_true", help="record per-generation id sets")
    p.add_argument("--out", required=True)
    _add_bow_args(p)
    p.set_defaults(func=cmd_pet)

    p = sub.add_parser("report", help="render mean ±std tables from metric files")
    p.add_argument("--row", action="append", required=True, help="NAME=file1.json[,file2.json]")
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_report)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = json.loads(Path(known.config).read_text(encoding="utf-8"))
    if not isinstance(cfg, dict):
        raise UsageError(f"{known.config}: config must be a JSON object")
    defaults = {k.replace("-", "_"): v for k, v in cfg.items()}
    parser.set_defaults(**{k: v for k, v in defaults.items() if k in ("jobs",)})
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in sub_action.choices.values():
        dests = {a.dest for a in sp._actions}
        values = {k: v for k, v in defaults.items() if k in dests}
        sp.set_defaults(**values)
        for a in sp._actions:
            if a.dest in values:
                a.required = False


def _fail(exc, code=1):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, OSError, ValueError) as exc:
        return _fail(exc)
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail(exc, 2)
    except (CorpusError, LexiconError, TranslationError, ValueError, KeyError, OSError) as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
