"""Listening-test analytics: z-normalized MOS, paired t-tests, pairwise
comparisons, naturalness rates, and long-format export.

The Student-t tail probability is computed from the regularized incomplete
beta function (continued fraction, tolerance 1e-10) so p-values are
deterministic and dependency-free.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from datetime import datetime

from .corpus import UtteranceId, parse_utterance_id
from .errors import SchemaError

__all__ = [
    "RatingRecord",
    "MosSummary",
    "TTestResult",
    "PairwiseResult",
    "ScaledMos",
    "NaturalnessRates",
    "zscore_rescale",
    "paired_t_test",
    "pairwise_bonferroni",
    "naturalness_rates",
    "mos_summary",
    "ingest_scores",
    "paired_score_vectors",
    "export_long_format",
    "load_ratings_csv",
    "student_t_two_sided_p",
]

NATURALNESS = ("Real", "Artificial")


@dataclass(frozen=True)
class RatingRecord:
    subject_id: str
    utterance_id: UtteranceId
    condition: str
    naturalness: str  # "Real" | "Artificial"
    likert: int
    timestamp: datetime | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.naturalness not in NATURALNESS:
            raise ValueError(f"naturalness must be Real or Artificial, got {self.naturalness!r}")
        if not 1 <= self.likert <= 5:
            raise ValueError(f"likert rating {self.likert} outside 1..5")


def _check_unique(records: list[RatingRecord]) -> None:
    seen = set()
    for r in records:
        key = (r.subject_id, r.utterance_id.raw, r.condition)
        if key in seen:
            raise ValueError(f"duplicate rating for {key}")
        seen.add(key)


def _mean(xs) -> float:
    return sum(xs) / len(xs)


def _sample_sd(xs) -> float:
    n = len(xs)
    if n < 2:
        raise ValueError("sample standard deviation needs n >= 2")
    m = _mean(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / (n - 1))


@dataclass(frozen=True)
class ScaledMos:
    scaled: dict[tuple[str, str], float]  # (condition, utterance raw id) -> value
    condition_means: dict[str, float]
    global_mean: float
    global_sd: float
    excluded_subjects: tuple[str, ...]


def zscore_rescale(
    records: list[RatingRecord], condition_mean_from: str = "ratings"
) -> ScaledMos:
    """Per-subject z-scores rescaled to MOS-like values.

    z = (likert - subject_mean) / subject_sd (sample sd); a group's scaled
    value is global_mean + global_sd * mean(z in group). Groups are
    (condition, utterance) cells; per-condition means either pool all of the
    condition's z-scores (condition_mean_from="ratings", the default) or
    average the per-sentence scaled values ("sentences"). Subjects with
    fewer than two ratings or zero variance are excluded with a warning.
    """
    if not records:
        raise ValueError("no rating records")
    if condition_mean_from not in ("ratings", "sentences"):
        raise ValueError(f"bad condition_mean_from {condition_mean_from!r}")
    _check_unique(records)
    all_likert = [r.likert for r in records]
    gm = _mean(all_likert)
    gsd = _sample_sd(all_likert) if len(all_likert) >= 2 else 0.0

    by_subject: dict[str, list[RatingRecord]] = {}
    for r in records:
        by_subject.setdefault(r.subject_id, []).append(r)

    excluded = []
    z_by_cell: dict[tuple[str, str], list[float]] = {}
    z_by_condition: dict[str, list[float]] = {}
    for subject, rows in sorted(by_subject.items()):
        vals = [r.likert for r in rows]
        if len(vals) < 2 or min(vals) == max(vals):
            excluded.append(subject)
            warnings.warn(
                f"subject {subject!r} excluded from z-normalization "
                f"({len(vals)} rating(s), variance "
                f"{'zero' if len(vals) >= 2 else 'undefined'})",
                stacklevel=2,
            )
            continue
        mu = _mean(vals)
        sd = _sample_sd(vals)
        for r in rows:
            z = (r.likert - mu) / sd
            z_by_cell.setdefault((r.condition, r.utterance_id.raw), []).append(z)
            z_by_condition.setdefault(r.condition, []).append(z)

    if not z_by_cell:
        raise ValueError("every subject was excluded from z-normalization")
    scaled = {cell: gm + gsd * _mean(zs) for cell, zs in z_by_cell.items()}
    if condition_mean_from == "ratings":
        cond_means = {c: gm + gsd * _mean(zs) for c, zs in z_by_condition.items()}
    else:
        per_cond: dict[str, list[float]] = {}
        for (cond, _), v in scaled.items():
            per_cond.setdefault(cond, []).append(v)
        cond_means = {c: _mean(vs) for c, vs in per_cond.items()}
    return ScaledMos(
        scaled=scaled,
        condition_means=cond_means,
        global_mean=gm,
        global_sd=gsd,
        excluded_subjects=tuple(excluded),
    )


# ---------------------------------------------------------------------------
# Student-t distribution via the regularized incomplete beta function
# ---------------------------------------------------------------------------

_BETA_TOL = 1e-10
_BETA_MAX_ITER = 500


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_TOL:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: int) -> float:
    """P(|T_df| >= |t|) for the Student-t distribution."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if math.isnan(t):
        return math.nan
    return reg_inc_beta(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class TTestResult:
    mean_difference: float
    t_value: float
    df: int
    p_value: float
    degenerate: bool = False


def paired_t_test(x: list[float], y: list[float]) -> TTestResult:
    """Two-sided paired t-test of x against y (pairs in matching order)."""
    if len(x) != len(y):
        raise ValueError(f"paired samples differ in length: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise ValueError(f"need at least 2 pairs, got {n}")
    d = [xi - yi for xi, yi in zip(x, y)]
    md = _mean(d)
    sd = _sample_sd(d)
    if sd == 0.0:
        return TTestResult(
            mean_difference=md, t_value=math.nan, df=n - 1, p_value=math.nan,
            degenerate=True,
        )
    t = md / (sd / math.sqrt(n))
    return TTestResult(
        mean_difference=md, t_value=t, df=n - 1,
        p_value=student_t_two_sided_p(t, n - 1),
    )


@dataclass(frozen=True)
class PairwiseResult:
    pair: tuple[str, str]
    estimate: float
    t_value: float
    df: int
    p_adjusted: float
    degenerate: bool = False


def pairwise_bonferroni(
    records: list[RatingRecord], condition_mean_from: str = "ratings"
) -> list[PairwiseResult]:
    """Bonferroni-adjusted paired t-tests between every condition pair.

    Each test pairs the per-(condition, utterance) scaled MOS means over the
    utterances the two conditions share; p-values are multiplied by the
    number of condition pairs and capped at 1.
    """
    scaled = zscore_rescale(records, condition_mean_from=condition_mean_from).scaled
    conditions = sorted({c for c, _ in scaled})
    if len(conditions) < 2:
        raise ValueError("need at least 2 conditions for pairwise comparison")
    by_cond: dict[str, dict[str, float]] = {c: {} for c in conditions}
    for (cond, utt), v in scaled.items():
        by_cond[cond][utt] = v
    pairs = [
        (a, b) for i, a in enumerate(conditions) for b in conditions[i + 1 :]
    ]
    results = []
    for a, b in pairs:
        shared = sorted(
            set(by_cond[a]) & set(by_cond[b]),
            key=lambda raw: parse_utterance_id(raw).sort_key,
        )
        if len(shared) < 2:
            raise ValueError(f"conditions {a!r} and {b!r} share fewer than 2 utterances")
        res = paired_t_test([by_cond[a][u] for u in shared], [by_cond[b][u] for u in shared])
        p_adj = math.nan if res.degenerate else min(1.0, res.p_value * len(pairs))
        results.append(
            PairwiseResult(
                pair=(a, b),
                estimate=res.mean_difference,
                t_value=res.t_value,
                df=res.df,
                p_adjusted=p_adj,
                degenerate=res.degenerate,
            )
        )
    return results


@dataclass(frozen=True)
class NaturalnessRates:
    overall: dict[str, float]  # condition -> percent judged Real
    by_sentence: dict[tuple[str, str], float]  # (condition, utterance) -> percent


def naturalness_rates(records: list[RatingRecord]) -> NaturalnessRates:
    if not records:
        raise ValueError("no rating records")
    tot: dict[str, int] = {}
    real: dict[str, int] = {}
    cell_tot: dict[tuple[str, str], int] = {}
    cell_real: dict[tuple[str, str], int] = {}
    for r in records:
        tot[r.condition] = tot.get(r.condition, 0) + 1
        cell = (r.condition, r.utterance_id.raw)
        cell_tot[cell] = cell_tot.get(cell, 0) + 1
        if r.naturalness == "Real":
            real[r.condition] = real.get(r.condition, 0) + 1
            cell_real[cell] = cell_real.get(cell, 0) + 1
    return NaturalnessRates(
        overall={c: 100.0 * real.get(c, 0) / n for c, n in tot.items()},
        by_sentence={c: 100.0 * cell_real.get(c, 0) / n for c, n in cell_tot.items()},
    )


@dataclass(frozen=True)
class MosSummary:
    conditions: dict[str, tuple[float, float, int]]  # raw_mean, scaled_mean, n


def mos_summary(
    records: list[RatingRecord], condition_mean_from: str = "ratings"
) -> MosSummary:
    """Raw and z-rescaled MOS means per condition."""
    if not records:
        raise ValueError("no rating records")
    rescaled = zscore_rescale(records, condition_mean_from=condition_mean_from)
    sums: dict[str, int] = {}
    counts: dict[str, int] = {}
    for r in records:
        sums[r.condition] = sums.get(r.condition, 0) + r.likert
        counts[r.condition] = counts.get(r.condition, 0) + 1
    return MosSummary(
        conditions={
            c: (sums[c] / counts[c], rescaled.condition_means.get(c, math.nan), counts[c])
            for c in sorted(counts)
        }
    )


def ingest_scores(text: str) -> dict[tuple[str, str], float]:
    """Parse a per-utterance score CSV (condition,id,score) into a table.

    This is how externally computed scalar metrics (e.g. DNSMOS) enter the
    toolkit for aggregation and t-testing.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["condition", "id", "score"]:
        raise SchemaError(f"expected header condition,id,score, got {header}", row=1)
    table: dict[tuple[str, str], float] = {}
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise SchemaError(f"expected 3 fields, got {len(row)}", row=rowno)
        cond, raw_id, score_s = (c.strip() for c in row)
        parse_utterance_id(raw_id)
        key = (cond, raw_id)
        if key in table:
            raise SchemaError(f"duplicate score for {key}", row=rowno)
        try:
            table[key] = float(score_s)
        except ValueError:
            raise SchemaError(f"non-numeric score {score_s!r}", row=rowno)
    return table


def paired_score_vectors(
    table: dict[tuple[str, str], float], cond_a: str, cond_b: str
) -> tuple[list[float], list[float], list[str]]:
    """Aligned score vectors over the utterances both conditions cover."""
    a_ids = {u for c, u in table if c == cond_a}
    b_ids = {u for c, u in table if c == cond_b}
    only = sorted((a_ids | b_ids) - (a_ids & b_ids))
    if only:
        warnings.warn(
            f"ids present in only one of {cond_a!r}/{cond_b!r} are excluded "
            f"from pairing: {', '.join(only)}",
            stacklevel=2,
        )
    shared = sorted(a_ids & b_ids, key=lambda raw: parse_utterance_id(raw).sort_key)
    return (
        [table[(cond_a, u)] for u in shared],
        [table[(cond_b, u)] for u in shared],
        shared,
    )


LONG_FORMAT_HEADER = ["subject", "sentence", "type", "mos", "naturalness"]


def export_long_format(records: list[RatingRecord]) -> str:
    """One CSV row per rating, ordered by (subject, sentence, type)."""
    if not records:
        raise ValueError("no rating records")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LONG_FORMAT_HEADER)
    for r in sorted(
        records, key=lambda r: (r.subject_id, r.utterance_id.sort_key, r.condition)
    ):
        writer.writerow(
            [r.subject_id, r.utterance_id.raw, r.condition, r.likert, r.naturalness]
        )
    return buf.getvalue()


def load_ratings_csv(text: str) -> list[RatingRecord]:
    """Inverse of export_long_format (timestamps are not round-tripped)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != LONG_FORMAT_HEADER:
        raise SchemaError(
            f"expected header {','.join(LONG_FORMAT_HEADER)}, got {header}", row=1
        )
    records = []
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 5:
            raise SchemaError(f"expected 5 fields, got {len(row)}", row=rowno)
        subject, sentence, cond, mos_s, nat = (c.strip() for c in row)
        try:
            records.append(
                RatingRecord(
                    subject_id=subject,
                    utterance_id=parse_utterance_id(sentence),
                    condition=cond,
                    naturalness=nat,
                    likert=int(mos_s),
                )
            )
        except ValueError as exc:
            raise SchemaError(str(exc), row=rowno)
    _check_unique(records)
    return records
