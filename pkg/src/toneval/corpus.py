"""Corpus preparation: utterance IDs, sentence slicing, corpus statistics."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer
from .textgrid import TextGridDoc

__all__ = [
    "UtteranceId",
    "Utterance",
    "CorpusStats",
    "parse_utterance_id",
    "extract_utterances",
    "compute_stats",
    "word_histogram",
    "tokenize",
]

_ID_RE = re.compile(r"^MZ(\d+)-(\d+)$")


@dataclass(frozen=True)
class UtteranceId:
    raw: str
    paragraph: int
    sentence: int

    @property
    def sort_key(self):
        return (self.paragraph, self.sentence, self.raw)

    def __str__(self) -> str:
        return self.raw


def parse_utterance_id(raw: str) -> UtteranceId:
    """Parse "MZ<digits>-<digits>"; zero-padding width is not significant."""
    if not raw.startswith("MZ"):
        raise ValueError(f"utterance id {raw!r} missing 'MZ' prefix")
    m = _ID_RE.match(raw)
    if not m:
        raise ValueError(
            f"utterance id {raw!r} does not match MZ<paragraph>-<sentence>"
        )
    paragraph, sentence = int(m.group(1)), int(m.group(2))
    if paragraph < 1 or sentence < 1:
        raise ValueError(f"utterance id {raw!r} has non-positive field")
    return UtteranceId(raw=raw, paragraph=paragraph, sentence=sentence)


@dataclass
class Utterance:
    id: UtteranceId
    text: str
    audio_path: str
    duration: float


@dataclass(frozen=True)
class CorpusStats:
    n_sentences: int
    n_words: int
    n_unique_words: int
    min_words: int
    max_words: int
    avg_words_per_sentence: float
    total_duration_hours: float
    avg_duration_s: float


def _round_half_down(x: float) -> int:
    return int(np.ceil(x - 0.5))


def extract_utterances(
    doc: TextGridDoc,
    audio: AudioBuffer,
    tier_name: str,
    session_id: str,
    extent_tolerance: float = 0.010,
) -> list[tuple[Utterance, AudioBuffer]]:
    """Slice session audio into one utterance per non-empty interval label.

    Utterances are numbered in tier order as <session_id>-<k> (k starting at
    1 over the non-empty intervals). Boundaries land on the nearest sample,
    ties rounding down.
    """
    tier = next((t for t in doc.tiers if t.name == tier_name), None)
    if tier is None:
        have = [t.name for t in doc.tiers]
        raise ValueError(f"no tier named {tier_name!r} (have {have})")
    sr = audio.sample_rate
    n = len(audio.samples)
    if tier.intervals and audio.duration + extent_tolerance < tier.xmax:
        raise ValueError(
            f"audio of {audio.duration:.3f}s shorter than tier extent {tier.xmax:.3f}s"
        )
    slack = _round_half_down(extent_tolerance * sr)
    out: list[tuple[Utterance, AudioBuffer]] = []
    k = 0
    for iv in tier.intervals:
        text = iv.label.strip()
        if not text:
            continue
        k += 1
        start = _round_half_down(iv.xmin * sr)
        end = _round_half_down(iv.xmax * sr)
        if end > n + slack:
            raise ValueError(
                f"interval [{iv.xmin}, {iv.xmax}] extends past end of audio"
            )
        end = min(end, n)
        if end <= start:
            raise ValueError(f"interval [{iv.xmin}, {iv.xmax}] shorter than one sample")
        uid = parse_utterance_id(f"{session_id}-{k}")
        clip = AudioBuffer(samples=audio.samples[start:end], sample_rate=sr)
        out.append(
            (
                Utterance(
                    id=uid,
                    text=text,
                    audio_path=f"{uid.raw}.wav",
                    duration=len(clip.samples) / sr,
                ),
                clip,
            )
        )
    return out


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Whitespace-delimited tokens with leading/trailing punctuation stripped."""
    out = []
    for tok in text.split():
        start, end = 0, len(tok)
        while start < end and _is_punct(tok[start]):
            start += 1
        while end > start and _is_punct(tok[end - 1]):
            end -= 1
        if end > start:
            out.append(tok[start:end])
    return out


def compute_stats(utterances: list[Utterance]) -> CorpusStats:
    """Word counts, uniqueness (case-folded), and durations over the corpus."""
    if not utterances:
        raise ValueError("cannot compute statistics for an empty corpus")
    counts = []
    total_words = 0
    unique: set[str] = set()
    total_dur = 0.0
    for utt in utterances:
        toks = tokenize(utt.text)
        counts.append(len(toks))
        total_words += len(toks)
        unique.update(t.casefold() for t in toks)
        total_dur += utt.duration
    n = len(utterances)
    return CorpusStats(
        n_sentences=n,
        n_words=total_words,
        n_unique_words=len(unique),
        min_words=min(counts),
        max_words=max(counts),
        avg_words_per_sentence=total_words / n,
        total_duration_hours=total_dur / 3600.0,
        avg_duration_s=total_dur / n,
    )


def word_histogram(
    utterances: list[Utterance], bin_width: int
) -> list[tuple[int, int]]:
    """Sentence frequencies by word count, in bins of bin_width words.

    Bins are anchored at the minimum observed count and cover the full
    observed range; frequencies sum to the number of sentences.
    """
    if bin_width < 1:
        raise ValueError(f"bin_width must be >= 1, got {bin_width}")
    if not utterances:
        raise ValueError("cannot build a histogram for an empty corpus")
    counts = [len(tokenize(u.text)) for u in utterances]
    lo, hi = min(counts), max(counts)
    n_bins = (hi - lo) // bin_width + 1
    freqs = [0] * n_bins
    for c in counts:
        freqs[(c - lo) // bin_width] += 1
    return [(lo + k * bin_width, freqs[k]) for k in range(n_bins)]
