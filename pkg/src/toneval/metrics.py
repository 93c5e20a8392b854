"""Objective metrics: MCD, RMSE_f0, F0 correlation, and tone error rates."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .align import AlignmentPath, dtw_align
from .corpus import UtteranceId, parse_utterance_id
from .errors import SchemaError
from .features import FeatureConfig, MfccMatrix, mfcc
from .pitch import F0Contour, estimate_f0

__all__ = [
    "MetricReport",
    "ToneAnnotation",
    "TONES",
    "mcd",
    "rmse_f0",
    "f0_corr",
    "evaluate_pair",
    "ter",
    "ter_summary",
    "tone_error_distribution",
    "load_tone_annotations",
]

_DB_FACTOR = 10.0 / math.log(10.0)


@dataclass(frozen=True)
class MetricReport:
    utterance_id: UtteranceId
    mcd_db: float
    rmse_f0_hz: float | None
    f0_corr: float | None
    n_aligned_frames: int
    n_voiced_pairs: int
    config: FeatureConfig


def mcd(ref: MfccMatrix, syn: MfccMatrix, path: AlignmentPath) -> float:
    """Mean dB-scaled cepstral distance over aligned frame pairs, c0 excluded."""
    if ref.frames.shape[1] < 2 or syn.frames.shape[1] < 2:
        raise ValueError("need at least 2 cepstral coefficients (c0 is excluded)")
    ri = np.fromiter((p[0] for p in path.pairs), dtype=int)
    si = np.fromiter((p[1] for p in path.pairs), dtype=int)
    diff = ref.frames[ri, 1:] - syn.frames[si, 1:]
    per_pair = _DB_FACTOR * np.sqrt(2.0 * np.sum(diff**2, axis=1))
    return float(np.mean(per_pair))


def _voiced_pairs(
    ref: F0Contour, syn: F0Contour, path: AlignmentPath
) -> tuple[np.ndarray, np.ndarray]:
    """F0 values at path pairs where both frames are voiced.

    Path indices beyond a contour's length (the f0 analysis window is longer
    than the cepstral frame, so contours can run a few frames short) count
    as unvoiced.
    """
    rv, sv = [], []
    for i, j in path.pairs:
        if i < ref.n_frames and j < syn.n_frames and ref.voiced[i] and syn.voiced[j]:
            rv.append(ref.f0[i])
            sv.append(syn.f0[j])
    return np.asarray(rv), np.asarray(sv)


def rmse_f0(
    ref: F0Contour, syn: F0Contour, path: AlignmentPath
) -> tuple[float | None, int]:
    """RMSE in Hz over mutually voiced aligned pairs; None when no such pair."""
    rv, sv = _voiced_pairs(ref, syn, path)
    if len(rv) == 0:
        return None, 0
    return float(np.sqrt(np.mean((rv - sv) ** 2))), len(rv)


def f0_corr(ref: F0Contour, syn: F0Contour, path: AlignmentPath) -> float | None:
    """Pearson correlation over mutually voiced pairs; None when undefined."""
    rv, sv = _voiced_pairs(ref, syn, path)
    if len(rv) < 2:
        return None
    if np.ptp(rv) == 0 or np.ptp(sv) == 0:
        return None
    rc = rv - rv.mean()
    sc = sv - sv.mean()
    return float(np.sum(rc * sc) / np.sqrt(np.sum(rc**2) * np.sum(sc**2)))


def evaluate_pair(
    utterance_id: UtteranceId, ref_audio, syn_audio, cfg: FeatureConfig
) -> MetricReport:
    """Full objective evaluation of one reference/synthesis pair."""
    ref_mfcc = mfcc(ref_audio, cfg)
    syn_mfcc = mfcc(syn_audio, cfg)
    path = dtw_align(ref_mfcc, syn_mfcc)
    ref_f0 = estimate_f0(ref_audio, cfg)
    syn_f0 = estimate_f0(syn_audio, cfg)
    rmse, n_voiced = rmse_f0(ref_f0, syn_f0, path)
    return MetricReport(
        utterance_id=utterance_id,
        mcd_db=mcd(ref_mfcc, syn_mfcc, path),
        rmse_f0_hz=rmse,
        f0_corr=f0_corr(ref_f0, syn_f0, path),
        n_aligned_frames=len(path),
        n_voiced_pairs=n_voiced,
        config=cfg,
    )


TONES = ("High", "Low", "Rising", "Falling")


@dataclass(frozen=True)
class ToneAnnotation:
    utterance_id: UtteranceId
    n_tbu: int
    errors: tuple[tuple[int, str], ...] = ()  # (tbu_index, intended_tone)

    def __post_init__(self):
        if self.n_tbu <= 0:
            raise ValueError(f"{self.utterance_id}: n_tbu must be positive")
        seen = set()
        for idx, tone in self.errors:
            if not 0 <= idx < self.n_tbu:
                raise ValueError(
                    f"{self.utterance_id}: error index {idx} out of range "
                    f"for {self.n_tbu} tone-bearing units"
                )
            if idx in seen:
                raise ValueError(f"{self.utterance_id}: duplicate error index {idx}")
            if tone not in TONES:
                raise ValueError(f"{self.utterance_id}: unknown tone {tone!r}")
            seen.add(idx)


def ter(annotation: ToneAnnotation) -> float:
    """Tone error rate: percent of tone-bearing units judged wrong."""
    return 100.0 * len(annotation.errors) / annotation.n_tbu


def ter_summary(
    annotations: list[ToneAnnotation],
) -> tuple[float, list[tuple[UtteranceId, int, float]]]:
    """Unweighted mean TER plus the per-sentence (id, n_tbu, ter) table."""
    if not annotations:
        raise ValueError("no tone annotations")
    table = [
        (a.utterance_id, a.n_tbu, ter(a))
        for a in sorted(annotations, key=lambda a: a.utterance_id.sort_key)
    ]
    avg = sum(row[2] for row in table) / len(table)
    return avg, table


def tone_error_distribution(annotations: list[ToneAnnotation]) -> dict[str, float]:
    """Percent of all pooled errors attributed to each tone category."""
    counts = {tone: 0 for tone in TONES}
    total = 0
    for a in annotations:
        for _, tone in a.errors:
            counts[tone] += 1
            total += 1
    if total == 0:
        raise ValueError("no tone errors to distribute")
    return {tone: 100.0 * c / total for tone, c in counts.items()}


def load_tone_annotations(text: str) -> list[ToneAnnotation]:
    """Parse annotation CSV: id,n_tbu,error_index,intended_tone.

    One row per error; a row with empty error fields declares an error-free
    sentence. All rows for an id must agree on n_tbu.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != [
        "id",
        "n_tbu",
        "error_index",
        "intended_tone",
    ]:
        raise SchemaError(
            f"expected header id,n_tbu,error_index,intended_tone, got {header}", row=1
        )
    tbu: dict[str, int] = {}
    errors: dict[str, list[tuple[int, str]]] = {}
    order: list[str] = []
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise SchemaError(f"expected 4 fields, got {len(row)}", row=rowno)
        raw_id, n_tbu_s, idx_s, tone = (c.strip() for c in row)
        try:
            uid = parse_utterance_id(raw_id)
            n = int(n_tbu_s)
        except ValueError as exc:
            raise SchemaError(str(exc), row=rowno)
        if raw_id not in tbu:
            tbu[raw_id] = n
            errors[raw_id] = []
            order.append(raw_id)
        elif tbu[raw_id] != n:
            raise SchemaError(
                f"{raw_id}: conflicting n_tbu {n} vs {tbu[raw_id]}", row=rowno
            )
        if idx_s == "" and tone == "":
            continue
        if idx_s == "" or tone == "":
            raise SchemaError(
                "error_index and intended_tone must both be set or both empty",
                row=rowno,
            )
        try:
            errors[raw_id].append((int(idx_s), tone))
        except ValueError:
            raise SchemaError(f"bad error_index {idx_s!r}", row=rowno)
    out = []
    for raw_id in order:
        try:
            out.append(
                ToneAnnotation(
                    utterance_id=parse_utterance_id(raw_id),
                    n_tbu=tbu[raw_id],
                    errors=tuple(errors[raw_id]),
                )
            )
        except ValueError as exc:
            raise SchemaError(str(exc))
    return out
