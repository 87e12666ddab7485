"""Command line entry point: ``catalogkg <command> ...``.

Every command writes a ``<output>.manifest.json`` next to its main output.
Exit codes: 0 success, 2 usage error, 3 input/format error, 4 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import bench
from .catalog import AttributeSchema, build_graph, load_catalog, load_graph, save_graph, \
    write_catalog
from .errors import CatalogKGError, FingerprintMismatch, InputFormatError, SchemaError, \
    SnapshotError
from .evaluation import Ranker, load_judgments, write_judgments
from .lexicon import Dictionary, build_dictionary
from .manifest import RunManifest, manifest_path, verify_input
from .model import Model, TrainConfig, load_model, save_model, train, train_test_split
from .pipeline import AttributeResolver, evaluate
from .synth import SynthConfig, generate_catalog, generate_judgments, generate_labeled_queries, \
    load_queries, read_config, write_queries

log = logging.getLogger("catalogkg")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _read(path, manifest: RunManifest) -> Path:
    path = Path(path)
    if not path.exists():
        raise InputFormatError("no such file", path)
    verify_input(path)
    manifest.add_input(path)
    return path


def _finish(manifest: RunManifest, outputs, t0) -> None:
    for p in outputs:
        manifest.add_output(p)
    manifest.duration_s = round(time.perf_counter() - t0, 6)
    manifest.write(manifest_path(outputs[0]))


def _load_resolver(args, manifest, model_required=False):
    kg = load_graph(_read(args.graph, manifest))
    model = None
    if getattr(args, "model", None):
        model = load_model(_read(args.model, manifest))
        if getattr(args, "threshold", None) is not None:
            model = model.with_threshold(args.threshold)
    elif model_required:
        raise UsageError("--model is required")
    dictionary = None
    if getattr(args, "dict", None):
        dictionary = Dictionary.load(_read(args.dict, manifest))
    return AttributeResolver(kg, model, dictionary, getattr(args, "min_support", 1))


def _split(rows, which, fraction, seed):
    if which == "all":
        return rows
    idx = list(range(len(rows)))
    train_idx, test_idx = train_test_split(idx, fraction, seed)
    return [rows[i] for i in (train_idx if which == "train" else test_idx)]


# -- commands -----------------------------------------------------------------

SYNTH_FLAGS = ("item_count", "query_count", "conflict_rate", "exponent", "label_noise",
               "product_vocab", "brand_vocab", "color_vocab")


def cmd_synth(args):
    t0 = time.perf_counter()
    values = {k: getattr(args, k) for k in SYNTH_FLAGS if getattr(args, k) is not None}
    values["seed"] = args.seed
    if args.config:
        values.update(read_config(args.config))
    try:
        config = SynthConfig.from_mapping(values)
    except KeyError as exc:
        raise UsageError(f"unknown config key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise UsageError(f"bad config value: {exc}") from None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("synth", config.to_dict(), config.seed)
    if args.config:
        manifest.add_input(args.config)
    catalog = generate_catalog(config)
    queries = generate_labeled_queries(catalog, config)
    judgments = generate_judgments(catalog, queries, config)
    paths = [out / "catalog.jsonl", out / "queries.jsonl", out / "judgments.jsonl"]
    write_catalog(catalog, paths[0])
    write_queries(queries, paths[1])
    write_judgments(judgments, paths[2])
    _finish(manifest, paths, t0)
    print(f"wrote {len(catalog)} items, {len(queries)} queries, {len(judgments)} judgments "
          f"to {out}")


def cmd_build(args):
    t0 = time.perf_counter()
    schema = AttributeSchema.parse(args.schema)
    manifest = RunManifest("build", {"schema": list(schema)}, None)
    kg = build_graph(load_catalog(_read(args.catalog, manifest), schema), schema)
    save_graph(kg, args.out)
    _finish(manifest, [Path(args.out)], t0)
    print(f"graph: {kg.item_count} items, {len(kg.degrees)} values, "
          f"{len(kg.pair_counts)} pair counts, {len(kg.triple_counts)} triple counts")


def cmd_dict(args):
    t0 = time.perf_counter()
    manifest = RunManifest("dict", {"min_support": args.min_support}, None)
    kg = load_graph(_read(args.graph, manifest))
    d = build_dictionary(kg, args.min_support)
    d.save(args.out)
    _finish(manifest, [Path(args.out)], t0)
    print(f"dictionary: {len(d)} phrases")


def cmd_featurize(args):
    t0 = time.perf_counter()
    manifest = RunManifest("featurize", {"min_support": args.min_support}, None)
    resolver = _load_resolver(args, manifest)
    queries = load_queries(_read(args.queries, manifest))
    with Path(args.out).open("w", encoding="utf-8", newline="\n") as fh:
        for q in queries:
            fv = resolver.features(q.query, q.target, q.value)
            fh.write(json.dumps({"query": q.query, "target": q.target, "value": q.value,
                                 "dense": list(fv.dense), "label": q.label},
                                ensure_ascii=False, sort_keys=True) + "\n")
    _finish(manifest, [Path(args.out)], t0)


def cmd_train(args):
    t0 = time.perf_counter()
    config = TrainConfig(args.lr, args.l2, args.epochs, args.seed, not args.no_balance,
                         args.threshold if args.threshold is not None else 0.5)
    snapshot = dict(config.__dict__, split=args.split, test_fraction=args.test_fraction,
                    min_support=args.min_support)
    manifest = RunManifest("train", snapshot, args.seed)
    resolver = _load_resolver(args, manifest)
    queries = _split(load_queries(_read(args.queries, manifest)), args.split,
                     args.test_fraction, args.seed)
    examples = [(resolver.features(q.query, q.target, q.value), q.label) for q in queries]
    try:
        model = train(examples, config, resolver.kg.schema)
    except ValueError as exc:
        raise InputFormatError(str(exc), args.queries) from None
    save_model(model, args.out)
    _finish(manifest, [Path(args.out)], t0)
    print(f"trained on {len(examples)} examples; final loss {model.training_meta['final_loss']:.6f}")


def cmd_predict(args):
    t0 = time.perf_counter()
    manifest = RunManifest("predict", {"target": args.target_attr}, None)
    resolver = _load_resolver(args, manifest, model_required=True)
    if args.query is not None:
        texts = [args.query]
    else:
        texts = [q.query for q in load_queries(_read(args.queries, manifest))]
    rows = []
    for text in texts:
        spans = resolver.candidates(text)
        for value in sorted({s.value for s in spans if s.attribute == args.target_attr}):
            p, present = resolver.predict(text, args.target_attr, value)
            rows.append({"query": text, "target": args.target_attr, "value": value,
                         "probability": p, "present": present})
        if not any(s.attribute == args.target_attr for s in spans):
            rows.append({"query": text, "target": args.target_attr, "value": None,
                         "probability": None, "present": False})
    lines = [json.dumps(r, ensure_ascii=False, sort_keys=True) for r in rows]
    if args.out:
        Path(args.out).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        _finish(manifest, [Path(args.out)], t0)
    else:
        print("\n".join(lines))


def _read_external(path, manifest):
    src = sys.stdin if path == "-" else _read(path, manifest).open(encoding="utf-8")
    out = []
    for lineno, line in enumerate(src, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out.append(bool(rec["present"] if isinstance(rec, dict) else rec))
        except (ValueError, KeyError, TypeError):
            raise InputFormatError("expected a 'present' decision", path, lineno) from None
    return out


def cmd_eval(args):
    t0 = time.perf_counter()
    if not (args.model or args.baseline or args.predictions):
        raise UsageError("nothing to evaluate: give --model, --baseline and/or --predictions")
    snapshot = {k: getattr(args, k) for k in ("target_attr", "threshold", "rank_mode",
                                               "ndcg_k", "split", "test_fraction", "seed",
                                               "baseline", "min_support")}
    manifest = RunManifest("eval", snapshot, args.seed)
    resolver = _load_resolver(args, manifest)
    kg = resolver.kg
    kg.schema.require(args.target_attr)
    all_queries = load_queries(_read(args.queries, manifest))
    keep = [i for i, q in enumerate(all_queries) if q.target == args.target_attr]
    keep = _split(keep, args.split, args.test_fraction, args.seed)
    queries = [all_queries[i] for i in keep]
    external = None
    if args.predictions:
        ext_all = _read_external(args.predictions, manifest)
        if len(ext_all) != len(all_queries):
            raise InputFormatError(f"{len(ext_all)} predictions for {len(all_queries)} queries",
                                   args.predictions)
        external = [ext_all[i] for i in keep]
    judgments = ranker = None
    if args.judgments:
        judgments = load_judgments(_read(args.judgments, manifest))
        if not args.catalog:
            raise UsageError("--judgments needs --catalog for ranking")
        ranker = Ranker(kg, load_catalog(_read(args.catalog, manifest), kg.schema))
    systems = (["framework"] if args.model else []) + (["baseline"] if args.baseline else [])
    if not queries:
        raise InputFormatError("no queries to evaluate", args.queries)
    reports = evaluate(resolver, queries, judgments, ranker, systems, args.ndcg_k,
                       args.rank_mode, external)
    records = _report_records(reports, args.ndcg_k)
    _print_table(reports, args.ndcg_k, len(queries))
    if args.report:
        Path(args.report).write_text("".join(f"{k}={v}\n" for k, v in records), encoding="utf-8")
        _finish(manifest, [Path(args.report)], t0)


def _fmt(v):
    return "nan" if isinstance(v, float) and math.isnan(v) else f"{v:.6f}"


def _report_records(reports, k):
    records = []
    for name, r in reports.items():
        m = r.prf1
        for key, v in (("tp", m.tp), ("fp", m.fp), ("tn", m.tn), ("fn", m.fn)):
            records.append((f"{name}.{key}", v))
        for key, v in (("precision", m.precision), ("recall", m.recall), ("f1", m.f1),
                       (f"ndcg@{k}", r.ndcg), (f"ndcg@{k}.conflict", r.ndcg_conflict)):
            records.append((f"{name}.{key}", _fmt(v)))
        records.append((f"{name}.conflict_queries", r.n_conflict))
    if "framework" in reports and "baseline" in reports:
        f, b = reports["framework"], reports["baseline"]
        for key, fv, bv in (("precision", f.prf1.precision, b.prf1.precision),
                            ("recall", f.prf1.recall, b.prf1.recall),
                            ("f1", f.prf1.f1, b.prf1.f1),
                            (f"ndcg@{k}", f.ndcg, b.ndcg),
                            (f"ndcg@{k}.conflict", f.ndcg_conflict, b.ndcg_conflict)):
            records.append((f"delta.{key}", _fmt(fv - bv)))
    return records


def _print_table(reports, k, n):
    head = f"{'system':<10} {'precision':>9} {'recall':>9} {'f1':>9} {f'nDCG@{k}':>9} {'conflict':>9}"
    print(f"{n} queries")
    print(head)
    print("-" * len(head))
    for name, r in reports.items():
        m = r.prf1
        print(f"{name:<10} {m.precision:>9.4f} {m.recall:>9.4f} {m.f1:>9.4f} "
              f"{_fmt(r.ndcg)[:6]:>9} {_fmt(r.ndcg_conflict)[:6]:>9}")


def cmd_bench(args):
    t0 = time.perf_counter()
    manifest = RunManifest("bench", {"threads": args.threads, "executor": args.executor,
                                     "repeat": args.repeat, "target": args.target_attr}, None)
    resolver = _load_resolver(args, manifest)
    if resolver.model is None:
        width = 2 * (len(resolver.kg.schema) - 1)
        resolver.model = Model((0.0,) * width, 0.0, 0.5,
                               {"schema_fingerprint": resolver.kg.schema.fingerprint()})
    texts = [q.query for q in load_queries(_read(args.queries, manifest))] * args.repeat
    results = []
    for n in args.threads:
        r = bench.run(resolver, texts, n, args.executor, args.target_attr)
        if r is None:
            print("no samples: query file is empty")
            break
        results.append(r)
        print(f"workers={r.workers:<3} executor={r.executor:<8} samples={r.samples:<8} "
              f"qps={r.qps:>10.0f} p50={r.p50_us:.1f}us p95={r.p95_us:.1f}us p99={r.p99_us:.1f}us")
    if args.out:
        Path(args.out).write_text(
            "".join(json.dumps(r.as_record(), sort_keys=True) + "\n" for r in results),
            encoding="utf-8")
        _finish(manifest, [Path(args.out)], t0)


# -- parser -------------------------------------------------------------------

def _threads(text):
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("thread counts must be >= 1")
    return vals


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="catalogkg", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def graph_args(sp, model=False):
        sp.add_argument("--graph", required=True, help="graph snapshot from `build`")
        sp.add_argument("--dict", help="dictionary file from `dict` (default: built from graph)")
        sp.add_argument("--min-support", type=int, default=1)
        if model:
            sp.add_argument("--model", help="model file from `train`")

    s = sub.add_parser("synth", help="generate catalog, queries and judgments")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--config", help="key = value file; overrides flags")
    s.add_argument("--seed", type=int, default=42)
    for name in SYNTH_FLAGS:
        kind = int if name.endswith(("count", "vocab")) else float
        s.add_argument("--" + name.replace("_", "-"), type=kind, default=None)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("build", help="build the co-occurrence graph from a catalog")
    s.add_argument("--catalog", required=True)
    s.add_argument("--schema", default="product_type,brand,color")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("dict", help="export the attribute dictionary")
    s.add_argument("--graph", required=True)
    s.add_argument("--min-support", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_dict)

    s = sub.add_parser("featurize", help="dump feature vectors for labeled queries")
    graph_args(s)
    s.add_argument("--queries", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_featurize)

    s = sub.add_parser("train", help="train the presence classifier")
    graph_args(s)
    s.add_argument("--queries", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--epochs", type=int, default=2000)
    s.add_argument("--lr", type=float, default=0.1)
    s.add_argument("--l2", type=float, default=1e-4)
    s.add_argument("--no-balance", action="store_true", help="disable class reweighting")
    s.add_argument("--threshold", type=float)
    s.add_argument("--split", choices=("all", "train"), default="train")
    s.add_argument("--test-fraction", type=float, default=0.3)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="classify target-attribute candidates")
    graph_args(s, model=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--query")
    g.add_argument("--queries")
    s.add_argument("--target-attr", default="color")
    s.add_argument("--threshold", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("eval", help="precision/recall/F1 and nDCG against labeled data")
    graph_args(s, model=True)
    s.add_argument("--queries", required=True)
    s.add_argument("--judgments")
    s.add_argument("--catalog", help="catalog to rank (needed with --judgments)")
    s.add_argument("--baseline", action="store_true", help="evaluate Dict Lookup")
    s.add_argument("--predictions", help="external decisions, one per query line ('-' = stdin)")
    s.add_argument("--target-attr", default="color")
    s.add_argument("--threshold", type=float)
    s.add_argument("--rank-mode", choices=("boost", "filter"), default="boost")
    s.add_argument("--ndcg-k", type=int, default=20)
    s.add_argument("--split", choices=("all", "test"), default="test")
    s.add_argument("--test-fraction", type=float, default=0.3)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--report", help="write key=value records here")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("bench", help="throughput of extract + featurize + predict")
    graph_args(s, model=True)
    s.add_argument("--queries", required=True)
    s.add_argument("--threads", type=_threads, default=[1, 4])
    s.add_argument("--executor", choices=("process", "thread"), default="process")
    s.add_argument("--repeat", type=int, default=1, help="replay the query file this many times")
    s.add_argument("--target-attr", default="color")
    s.add_argument("--out")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"catalogkg {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputFormatError, SnapshotError, FingerprintMismatch, SchemaError,
            FileNotFoundError) as exc:
        print(f"catalogkg {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CatalogKGError as exc:
        print(f"catalogkg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
