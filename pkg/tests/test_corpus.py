import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toneval.audio import AudioBuffer
from toneval.corpus import (
    Utterance,
    compute_stats,
    extract_utterances,
    parse_utterance_id,
    tokenize,
    word_histogram,
)
from toneval.textgrid import Interval, IntervalTier, TextGridDoc


def test_parse_id_paper_examples():
    uid = parse_utterance_id("MZ000113-13")
    assert (uid.paragraph, uid.sentence) == (113, 13)
    uid = parse_utterance_id("MZ00051-7")
    assert (uid.paragraph, uid.sentence) == (51, 7)


def test_parse_id_padding_not_significant_for_sorting():
    a = parse_utterance_id("MZ00051-7")
    b = parse_utterance_id("MZ000113-13")
    assert a.sort_key < b.sort_key  # paragraph 51 < 113 despite string order


@pytest.mark.parametrize("bad", ["MZ-13", "XX123-4", "MZ123", "MZ12-x", "mz12-3", "MZ0-0"])
def test_parse_id_rejects(bad):
    with pytest.raises(ValueError):
        parse_utterance_id(bad)


def _utt(text, duration=1.0, n=[0]):
    n[0] += 1
    return Utterance(
        id=parse_utterance_id(f"MZ1-{n[0]}"), text=text, audio_path="x.wav", duration=duration
    )


def test_tokenize_strips_edge_punctuation():
    assert tokenize('a "b," c!') == ["a", "b", "c"]
    assert tokenize("") == []
    assert tokenize(" , . ") == []


def test_compute_stats_single():
    s = compute_stats([_utt("ka lo kal", 1.0)])
    assert s.n_sentences == 1
    assert s.n_words == 3
    assert s.n_unique_words == 3
    assert s.avg_words_per_sentence == 3.0


def test_compute_stats_unique_casefold():
    s = compute_stats([_utt("a b"), _utt("B c")])
    assert s.n_words == 4
    assert s.n_unique_words == 3


def test_compute_stats_table1_scale():
    # A corpus built to Table-1 totals: the average follows from the
    # definitions (50368/2252 = 22.37), not the printed 19.74.
    words_per = [1] + [59] + [22] * 2250
    deficit = 50368 - sum(words_per)
    words_per[2] += deficit
    utts = [_utt(" ".join(f"w{i}" for i in range(c))) for c in words_per]
    s = compute_stats(utts)
    assert s.n_sentences == 2252
    assert s.n_words == 50368
    assert s.avg_words_per_sentence == pytest.approx(22.37, abs=0.005)


def test_compute_stats_empty_rejected():
    with pytest.raises(ValueError):
        compute_stats([])


def test_compute_stats_permutation_invariant():
    utts = [_utt("a b c"), _utt("d"), _utt("e f")]
    assert compute_stats(utts) == compute_stats(list(reversed(utts)))


def test_word_histogram_hand_case():
    utts = [
        _utt("w"),
        _utt(" ".join(["w"] * 5)),
        _utt(" ".join(["w"] * 59)),
    ]
    hist = word_histogram(utts, 10)
    assert hist[0] == (1, 2)
    assert hist[-1] == (51, 1)
    assert sum(f for _, f in hist) == 3


def test_word_histogram_single():
    assert word_histogram([_utt("a b")], 10) == [(2, 1)]


def test_word_histogram_bad_width():
    with pytest.raises(ValueError):
        word_histogram([_utt("a")], 0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 80), min_size=1, max_size=40), st.integers(1, 15))
def test_word_histogram_sums_to_n(counts, width):
    utts = [_utt(" ".join(["w"] * c)) for c in counts]
    hist = word_histogram(utts, width)
    assert sum(f for _, f in hist) == len(counts)
    lows = [lo for lo, _ in hist]
    assert lows[0] == min(counts)
    assert lows[-1] <= max(counts) <= lows[-1] + width - 1


def _doc_and_audio(sr=22050):
    doc = TextGridDoc(
        0.0,
        3.0,
        [
            IntervalTier(
                "sentences",
                [
                    Interval(0.0, 1.0, "s1"),
                    Interval(1.0, 2.0, ""),
                    Interval(2.0, 3.0, "s2"),
                ],
            )
        ],
    )
    audio = AudioBuffer(samples=np.arange(3 * sr, dtype=np.float64) / (3 * sr), sample_rate=sr)
    return doc, audio


def test_extract_drops_empty_labels():
    doc, audio = _doc_and_audio()
    out = extract_utterances(doc, audio, "sentences", "MZ7")
    assert [u.id.raw for u, _ in out] == ["MZ7-1", "MZ7-2"]
    assert [u.text for u, _ in out] == ["s1", "s2"]


def test_extract_sample_exact_slices():
    doc, audio = _doc_and_audio()
    out = extract_utterances(doc, audio, "sentences", "MZ7")
    assert len(out[0][1].samples) == 22050
    assert np.array_equal(out[0][1].samples, audio.samples[:22050])
    assert np.array_equal(out[1][1].samples, audio.samples[44100:66150])


def test_extract_conservation():
    doc, audio = _doc_and_audio()
    out = extract_utterances(doc, audio, "sentences", "MZ7")
    total = sum(len(clip.samples) for _, clip in out)
    expected = sum(
        round((iv.xmax - iv.xmin) * audio.sample_rate)
        for iv in doc.tiers[0].intervals
        if iv.label.strip()
    )
    assert abs(total - expected) <= len(out)


def test_extract_missing_tier():
    doc, audio = _doc_and_audio()
    with pytest.raises(ValueError, match="no tier named"):
        extract_utterances(doc, audio, "nope", "MZ7")


def test_extract_interval_past_audio_end():
    doc, audio = _doc_and_audio()
    short = AudioBuffer(samples=audio.samples[: 22050 * 2], sample_rate=22050)
    with pytest.raises(ValueError, match="shorter than tier extent"):
        extract_utterances(doc, short, "sentences", "MZ7")


def test_extract_tolerates_10ms_shortfall():
    doc, audio = _doc_and_audio()
    trimmed = AudioBuffer(samples=audio.samples[:-100], sample_rate=22050)  # ~4.5 ms
    out = extract_utterances(doc, trimmed, "sentences", "MZ7")
    assert len(out[1][1].samples) == 22050 - 100
