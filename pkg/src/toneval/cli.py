"""Command-line entry point: prep, metrics, stats, ter, serve."""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .errors import TonevalError

DEFAULT_SEED = 1337


def _fmt(x, places: int = 4) -> str:
    """Fixed-point float formatting; undefined values print empty."""
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return ""
    return f"{x:.{places}f}"


def _fmt_p(p) -> str:
    """p-values in scientific notation with 4 significant digits."""
    if p is None or (isinstance(p, float) and math.isnan(p)):
        return ""
    return f"{p:.3e}"


def _write_table(path: Path, header: list[str], rows: list[list], as_json: bool) -> list[Path]:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    written = [path]
    if as_json:
        jpath = path.with_suffix(".json")
        payload = [dict(zip(header, row)) for row in rows]
        jpath.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        written.append(jpath)
    return written


class _Failures:
    """Collects per-item errors; the command exits nonzero if any occurred."""

    def __init__(self):
        self.items: list[str] = []

    def add(self, context: str, error) -> None:
        self.items.append(f"{context}: {error}")
        print(f"error: {context}: {error}", file=sys.stderr)

    @property
    def exit_code(self) -> int:
        return 1 if self.items else 0


# ---------------------------------------------------------------------------
# prep
# ---------------------------------------------------------------------------


def cmd_prep(args) -> int:
    from .audio import load_wav, resample, save_wav
    from .corpus import compute_stats, extract_utterances, word_histogram
    from .manifest import write_manifest
    from .svgplot import bar_chart
    from .textgrid import load_textgrid
    from .textnorm import build_metadata, default_lexicon, load_lexicon, normalize

    failures = _Failures()
    lexicon = load_lexicon(args.lexicon) if args.lexicon else default_lexicon()
    tg_dir, wav_dir, out_dir = Path(args.textgrid_dir), Path(args.wav_dir), Path(args.out)
    (out_dir / "wav").mkdir(parents=True, exist_ok=True)

    grids = sorted(p for p in tg_dir.iterdir() if p.suffix.lower() == ".textgrid")
    if not grids:
        print(f"error: no .TextGrid files in {tg_dir}", file=sys.stderr)
        return 1
    inputs = []
    utterances = []
    for grid_path in grids:
        session = grid_path.stem
        if not re.fullmatch(r"MZ\d+", session):
            failures.add(str(grid_path), "file stem is not an MZ<digits> session id")
            continue
        wav_path = wav_dir / f"{session}.wav"
        if not wav_path.is_file():
            failures.add(str(grid_path), f"missing session audio {wav_path}")
            continue
        try:
            doc = load_textgrid(grid_path)
            audio = load_wav(wav_path)
            if args.resample:
                audio = resample(audio, args.resample)
            tier = args.tier or (doc.tiers[0].name if doc.tiers else "")
            pairs = extract_utterances(doc, audio, tier, session)
            for utt, clip in pairs:
                utt.text = normalize(utt.text, lexicon).output
                utt.audio_path = f"wav/{utt.id.raw}.wav"
                save_wav(out_dir / utt.audio_path, clip)
                utterances.append(utt)
            inputs.extend([grid_path, wav_path])
        except (TonevalError, ValueError, OSError) as exc:
            failures.add(str(grid_path), exc)

    outputs = []
    if utterances:
        metadata = build_metadata(utterances, lexicon, audio_root=out_dir)
        (out_dir / "metadata.csv").write_text(metadata, encoding="utf-8")
        outputs.append(out_dir / "metadata.csv")

        stats = compute_stats(utterances)
        rows = [
            ["n_sentences", stats.n_sentences],
            ["n_words", stats.n_words],
            ["n_unique_words", stats.n_unique_words],
            ["min_words", stats.min_words],
            ["max_words", stats.max_words],
            ["avg_words_per_sentence", _fmt(stats.avg_words_per_sentence, 2)],
            ["total_duration_hours", _fmt(stats.total_duration_hours, 2)],
            ["avg_duration_s", _fmt(stats.avg_duration_s, 2)],
        ]
        outputs += _write_table(
            out_dir / "corpus_stats.csv", ["attribute", "value"], rows, args.format == "json"
        )

        hist = word_histogram(utterances, args.bin_width)
        outputs += _write_table(
            out_dir / "word_histogram.csv",
            ["bin_lower_bound", "frequency"],
            [[lo, freq] for lo, freq in hist],
            args.format == "json",
        )
        svg = bar_chart(
            [(f"{lo}-{lo + args.bin_width - 1}", freq) for lo, freq in hist],
            title="Sentences by word count",
            x_label="words per sentence",
            y_label="sentences",
        )
        (out_dir / "word_histogram.svg").write_text(svg, encoding="utf-8")
        outputs.append(out_dir / "word_histogram.svg")
        outputs += sorted(out_dir.glob("wav/*.wav"))

    write_manifest(out_dir, sys.argv[1:], inputs, outputs, seed=args.seed)
    print(f"prep: {len(utterances)} utterances, {len(failures.items)} errors -> {out_dir}")
    return failures.exit_code


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def _metric_worker(job):
    """Evaluate one (id, ref, syn) pair; runs in a worker process."""
    from .audio import load_wav, resample
    from .corpus import parse_utterance_id
    from .features import FeatureConfig
    from .metrics import evaluate_pair

    raw_id, ref_path, syn_path, cfg_dict = job
    cfg = FeatureConfig.from_dict(cfg_dict)
    ref = resample(load_wav(ref_path), cfg.sample_rate)
    syn = resample(load_wav(syn_path), cfg.sample_rate)
    rep = evaluate_pair(parse_utterance_id(raw_id), ref, syn, cfg)
    return (
        raw_id,
        rep.mcd_db,
        rep.rmse_f0_hz,
        rep.f0_corr,
        rep.n_aligned_frames,
        rep.n_voiced_pairs,
    )


def cmd_metrics(args) -> int:
    from .corpus import parse_utterance_id
    from .errors import SchemaError
    from .features import FeatureConfig
    from .manifest import write_manifest

    failures = _Failures()
    cfg = FeatureConfig.from_file(args.config) if args.config else FeatureConfig()
    pairs_path = Path(args.pairs_csv)
    ref_dir = Path(args.ref_dir) if args.ref_dir else Path(".")
    syn_dir = Path(args.syn_dir) if args.syn_dir else Path(".")

    with open(pairs_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id", "ref", "syn"]:
            raise SchemaError(f"{pairs_path}: expected header id,ref,syn, got {header}")
        jobs = []
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                failures.add(f"{pairs_path} row {rowno}", f"expected 3 fields, got {len(row)}")
                continue
            raw_id, ref_rel, syn_rel = (c.strip() for c in row)
            try:
                parse_utterance_id(raw_id)
            except ValueError as exc:
                failures.add(f"{pairs_path} row {rowno}", exc)
                continue
            ref_path, syn_path = ref_dir / ref_rel, syn_dir / syn_rel
            missing = [str(p) for p in (ref_path, syn_path) if not p.is_file()]
            if missing:
                failures.add(raw_id, f"missing audio: {', '.join(missing)}")
                continue
            jobs.append((raw_id, str(ref_path), str(syn_path), cfg.to_dict()))

    results = []
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {pool.submit(_metric_worker, job): job for job in jobs}
            for future, job in futures.items():
                try:
                    results.append(future.result())
                except (TonevalError, ValueError, OSError) as exc:
                    failures.add(job[0], exc)
    else:
        for job in jobs:
            try:
                results.append(_metric_worker(job))
            except (TonevalError, ValueError, OSError) as exc:
                failures.add(job[0], exc)

    results.sort(key=lambda r: parse_utterance_id(r[0]).sort_key)
    out_path = Path(args.out)
    rows = [
        [rid, _fmt(mcd), _fmt(rmse), _fmt(corr), n_frames, n_voiced]
        for rid, mcd, rmse, corr, n_frames, n_voiced in results
    ]
    if results:
        def col_mean(idx):
            vals = [r[idx] for r in results if r[idx] is not None]
            return sum(vals) / len(vals) if vals else None

        rows.append(
            [
                "MEAN",
                _fmt(col_mean(1)),
                _fmt(col_mean(2)),
                _fmt(col_mean(3)),
                _fmt(col_mean(4), 1),
                _fmt(col_mean(5), 1),
            ]
        )
    _write_table(
        out_path,
        ["id", "mcd_db", "rmse_f0_hz", "f0_corr", "n_aligned_frames", "n_voiced_pairs"],
        rows,
        args.format == "json",
    )
    write_manifest(
        out_path.parent,
        sys.argv[1:],
        [pairs_path] + [Path(j[1]) for j in jobs] + [Path(j[2]) for j in jobs],
        [out_path],
        config=cfg.to_dict(),
        seed=args.seed,
    )
    print(f"metrics: {len(results)} pairs, {len(failures.items)} errors -> {out_path}")
    return failures.exit_code


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def cmd_stats(args) -> int:
    from .manifest import write_manifest
    from .stats import (
        export_long_format,
        ingest_scores,
        load_ratings_csv,
        mos_summary,
        naturalness_rates,
        paired_score_vectors,
        paired_t_test,
        pairwise_bonferroni,
    )

    ratings_path = Path(args.ratings_csv)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = load_ratings_csv(ratings_path.read_text(encoding="utf-8"))
    if not records:
        print("error: no rating records", file=sys.stderr)
        return 1
    as_json = args.format == "json"
    outputs = []

    summary = mos_summary(records, condition_mean_from=args.rescale_groups)
    outputs += _write_table(
        out_dir / "mos_summary.csv",
        ["condition", "raw_mean", "scaled_mean", "n"],
        [
            [c, _fmt(raw), _fmt(scaled), n]
            for c, (raw, scaled, n) in summary.conditions.items()
        ],
        as_json,
    )

    rates = naturalness_rates(records)
    outputs += _write_table(
        out_dir / "naturalness_overall.csv",
        ["condition", "percent_real"],
        [[c, _fmt(v, 2)] for c, v in sorted(rates.overall.items())],
        as_json,
    )
    outputs += _write_table(
        out_dir / "naturalness_by_sentence.csv",
        ["condition", "id", "percent_real"],
        [[c, u, _fmt(v, 2)] for (c, u), v in sorted(rates.by_sentence.items())],
        as_json,
    )

    conditions = sorted({r.condition for r in records})
    if len(conditions) >= 2:
        pw = pairwise_bonferroni(records, condition_mean_from=args.rescale_groups)
        outputs += _write_table(
            out_dir / "pairwise_bonferroni.csv",
            ["pair", "estimate", "t_value", "df", "p_adjusted"],
            [
                [
                    f"{a} - {b}",
                    _fmt(r.estimate),
                    _fmt(r.t_value),
                    r.df,
                    _fmt_p(r.p_adjusted),
                ]
                for (a, b), r in ((r.pair, r) for r in pw)
            ],
            as_json,
        )

    (out_dir / "long_format.csv").write_text(export_long_format(records), encoding="utf-8")
    outputs.append(out_dir / "long_format.csv")

    inputs = [ratings_path]
    if args.scores:
        scores_path = Path(args.scores)
        inputs.append(scores_path)
        table = ingest_scores(scores_path.read_text(encoding="utf-8"))
        score_conditions = sorted({c for c, _ in table})
        rows = []
        for i, a in enumerate(score_conditions):
            for b in score_conditions[i + 1 :]:
                x, y, shared = paired_score_vectors(table, a, b)
                if len(shared) < 2:
                    continue
                res = paired_t_test(x, y)
                rows.append(
                    [
                        f"{a} - {b}",
                        _fmt(res.mean_difference),
                        _fmt(res.t_value),
                        res.df,
                        _fmt_p(res.p_value),
                        len(shared),
                    ]
                )
        outputs += _write_table(
            out_dir / "scores_ttest.csv",
            ["pair", "mean_difference", "t_value", "df", "p_value", "n"],
            rows,
            as_json,
        )

    write_manifest(out_dir, sys.argv[1:], inputs, outputs, seed=args.seed)
    print(f"stats: {len(records)} ratings -> {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# ter
# ---------------------------------------------------------------------------


def cmd_ter(args) -> int:
    from .manifest import write_manifest
    from .metrics import TONES, load_tone_annotations, ter_summary, tone_error_distribution

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    systems = []
    for spec_arg in args.annotations:
        name, _, path = spec_arg.rpartition("=")
        path = Path(path)
        if not name:
            name = path.stem
        systems.append((name, path))

    as_json = args.format == "json"
    per_system = {}
    for name, path in systems:
        per_system[name] = load_tone_annotations(path.read_text(encoding="utf-8"))

    # Per-sentence TER, one column per system.
    all_ids: dict[str, int] = {}
    ter_by_system: dict[str, dict[str, float]] = {}
    for name, annotations in per_system.items():
        avg, table = ter_summary(annotations)
        ter_by_system[name] = {uid.raw: t for uid, _, t in table}
        for uid, n_tbu, _ in table:
            if uid.raw in all_ids and all_ids[uid.raw] != n_tbu:
                print(
                    f"warning: {uid.raw}: systems disagree on n_tbu "
                    f"({all_ids[uid.raw]} vs {n_tbu})",
                    file=sys.stderr,
                )
            all_ids.setdefault(uid.raw, n_tbu)

    from .corpus import parse_utterance_id

    ordered_ids = sorted(all_ids, key=lambda raw: parse_utterance_id(raw).sort_key)
    names = [name for name, _ in systems]
    rows = [
        [raw, all_ids[raw]]
        + [_fmt(ter_by_system[n].get(raw), 2) for n in names]
        for raw in ordered_ids
    ]
    outputs = _write_table(
        out_dir / "ter_per_sentence.csv", ["id", "n_tbu"] + names, rows, as_json
    )

    summary_rows = []
    for name, annotations in per_system.items():
        avg, table = ter_summary(annotations)
        summary_rows.append([name, _fmt(avg, 2), len(table)])
    outputs += _write_table(
        out_dir / "ter_summary.csv",
        ["system", "avg_ter_percent", "n_sentences"],
        summary_rows,
        as_json,
    )

    dist_rows = []
    for tone in TONES:
        dist_rows.append([tone])
    for name, annotations in per_system.items():
        n_errors = sum(len(a.errors) for a in annotations)
        if n_errors == 0:
            print(f"ter: no errors for system {name!r}; distribution undefined")
            for row in dist_rows:
                row.append("")
            continue
        dist = tone_error_distribution(annotations)
        for row, tone in zip(dist_rows, TONES):
            row.append(_fmt(dist[tone], 2))
    outputs += _write_table(
        out_dir / "tone_distribution.csv", ["tone"] + names, dist_rows, as_json
    )

    write_manifest(out_dir, sys.argv[1:], [p for _, p in systems], outputs, seed=args.seed)
    print(f"ter: {len(systems)} system(s) -> {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------


def cmd_serve(args) -> int:
    import uvicorn

    from .service import EvalServer, create_app, load_study

    study = load_study(args.study_manifest)
    log_path = Path(args.log) if args.log else Path(args.study_manifest).with_suffix(".ratings.jsonl")
    export_token = os.environ.get("TONEVAL_EXPORT_TOKEN")
    if not export_token:
        print(
            "warning: TONEVAL_EXPORT_TOKEN unset; /api/export will refuse requests",
            file=sys.stderr,
        )
    server = EvalServer(study, log_path)
    app = create_app(server, export_token, ui_dir=args.ui)
    host, _, port = args.listen.rpartition(":")
    print(f"serving study {study.study_id!r} on {host}:{port} (log: {log_path})")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toneval",
        description="Corpus preparation, objective metrics, MOS statistics, and "
        "listening-test service for tonal-language TTS evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"toneval {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="run seed, recorded in manifests")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers where supported")
    common.add_argument("--config", help="FeatureConfig key=value file")
    common.add_argument("--format", choices=["csv", "json"], default="csv",
                        help="also emit derived tables as JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", parents=[common], help="slice sessions into utterances + metadata")
    p.add_argument("textgrid_dir")
    p.add_argument("wav_dir")
    p.add_argument("--lexicon", help="normalization lexicon (default: shipped Mizo table)")
    p.add_argument("--out", required=True)
    p.add_argument("--tier", help="interval tier holding sentences (default: first tier)")
    p.add_argument("--resample", type=int, help="resample output wavs to this rate")
    p.add_argument("--bin-width", type=int, default=5, help="histogram bin width in words")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("metrics", parents=[common], help="MCD/RMSE_f0/F0_corr over ref/syn pairs")
    p.add_argument("pairs_csv", help="CSV with header id,ref,syn")
    p.add_argument("--ref-dir", help="base for relative ref paths")
    p.add_argument("--syn-dir", help="base for relative syn paths")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("stats", parents=[common], help="MOS statistics from ratings CSV")
    p.add_argument("ratings_csv", help="long-format CSV: subject,sentence,type,mos,naturalness")
    p.add_argument("--scores", help="external score CSV: condition,id,score (e.g. DNSMOS)")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--rescale-groups",
        choices=["ratings", "sentences"],
        default="ratings",
        help="pool per-condition scaled means over ratings or per-sentence cells",
    )
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("ter", parents=[common], help="tone error rates from annotation CSVs")
    p.add_argument(
        "annotations",
        nargs="+",
        metavar="NAME=CSV",
        help="annotation CSVs (id,n_tbu,error_index,intended_tone), one per system",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ter)

    p = sub.add_parser("serve", parents=[common], help="run the listening-test service")
    p.add_argument("study_manifest", help="study JSON manifest")
    p.add_argument("--listen", default="127.0.0.1:8321", help="host:port")
    p.add_argument("--log", help="record log path (default: <manifest>.ratings.jsonl)")
    p.add_argument("--ui", help="directory of built frontend assets to serve at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TonevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
