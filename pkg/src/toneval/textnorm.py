"""Table-driven text normalization: numerals, abbreviations, special characters.

All mappings live in an external lexicon file (kind<TAB>key<TAB>value lines,
# comments), so the engine itself is language-agnostic. Numeral expansion is
additive place-value composition over exact entries (units, tens, hundreds,
thousands), joined by a configurable word.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from importlib import resources

from .corpus import Utterance
from .errors import LexiconError, NormalizationError, SchemaError

__all__ = [
    "NormLexicon",
    "NormReport",
    "AppliedRule",
    "load_lexicon",
    "default_lexicon",
    "expand_numerals",
    "expand_abbreviations",
    "normalize_special_chars",
    "normalize",
    "replay_report",
    "build_metadata",
]


@dataclass(frozen=True)
class AppliedRule:
    kind: str  # "abbrev" | "numeral" | "char" | "space"
    span: tuple[int, int]  # [start, end) in the text at application time
    before: str
    after: str


@dataclass(frozen=True)
class NormReport:
    input: str
    output: str
    applied: tuple[AppliedRule, ...]


def replay_report(report: NormReport) -> str:
    """Re-apply the recorded edits to the input; must reproduce the output."""
    text = report.input
    for rule in report.applied:
        start, end = rule.span
        if text[start:end] != rule.before:
            raise ValueError(
                f"report does not replay: expected {rule.before!r} at {rule.span}, "
                f"found {text[start:end]!r}"
            )
        text = text[:start] + rule.after + text[end:]
    return text


@dataclass(frozen=True)
class NormLexicon:
    numeral_rules: dict[int, str]
    numeral_joiner: str
    abbrev_map: dict[str, str]
    char_map: dict[str, str]

    def max_composable(self) -> int:
        """Largest integer the additive place-value composition can voice."""
        hi = 0
        for place in (1, 10, 100, 1000):
            if all(d * place in self.numeral_rules for d in range(1, 10)):
                hi = place * 10 - 1
            else:
                break
        return max(hi, max(self.numeral_rules, default=0))


def _validate(lex: NormLexicon) -> None:
    missing = [d for d in range(10) if d not in lex.numeral_rules]
    if missing:
        raise LexiconError(f"numeral rules must cover digits 0-9; missing {missing}")
    for value, words in lex.numeral_rules.items():
        if not words:
            raise LexiconError(f"empty numeral expansion for {value}")
        if any(ch.isdigit() for ch in words):
            raise LexiconError(f"numeral expansion for {value} contains digits: {words!r}")
    for key, words in lex.abbrev_map.items():
        if not key:
            raise LexiconError("empty abbreviation key")
        if not words:
            raise LexiconError(f"empty expansion for abbreviation {key!r}")
        if words in lex.abbrev_map:
            raise LexiconError(
                f"abbreviation expansion {words!r} is itself a key (breaks idempotence)"
            )
    for ch, words in lex.char_map.items():
        if len(ch) != 1:
            raise LexiconError(f"char_map keys are single characters, got {ch!r}")
        if any(c in lex.char_map for c in words):
            raise LexiconError(
                f"replacement {words!r} for {ch!r} contains a mapped character"
            )
        if any(c.isdigit() for c in words):
            raise LexiconError(f"replacement for {ch!r} contains digits")


def load_lexicon(path) -> NormLexicon:
    """Read a lexicon file. Kinds: conf, num, abbrev, char."""
    numeral_rules: dict[int, str] = {}
    abbrev: dict[str, str] = {}
    chars: dict[str, str] = {}
    joiner = ""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) == 2:
                parts.append("")
            if len(parts) != 3:
                raise LexiconError(
                    f"{path}:{lineno}: expected kind<TAB>key<TAB>value, got {line!r}"
                )
            kind, key, value = parts
            if kind == "conf":
                if key == "num_joiner":
                    joiner = value
                else:
                    raise LexiconError(f"{path}:{lineno}: unknown conf key {key!r}")
            elif kind == "num":
                try:
                    num_key = int(key)
                except ValueError:
                    raise LexiconError(f"{path}:{lineno}: bad numeral key {key!r}")
                if num_key in numeral_rules:
                    raise LexiconError(f"{path}:{lineno}: duplicate numeral key {key}")
                numeral_rules[num_key] = value
            elif kind == "abbrev":
                if key in abbrev:
                    raise LexiconError(f"{path}:{lineno}: duplicate abbreviation {key!r}")
                abbrev[key] = value
            elif kind == "char":
                if key in chars:
                    raise LexiconError(f"{path}:{lineno}: duplicate char mapping {key!r}")
                chars[key] = value
            else:
                raise LexiconError(f"{path}:{lineno}: unknown rule kind {kind!r}")
    lex = NormLexicon(
        numeral_rules=numeral_rules,
        numeral_joiner=joiner,
        abbrev_map=abbrev,
        char_map=chars,
    )
    _validate(lex)
    return lex


def default_lexicon() -> NormLexicon:
    """The Mizo table shipped with the package (see data/mizo_lexicon.tsv)."""
    ref = resources.files("toneval.data").joinpath("mizo_lexicon.tsv")
    with resources.as_file(ref) as path:
        return load_lexicon(path)


def expand_number(n: int, lex: NormLexicon) -> str:
    """Voice one integer via exact lookup, else additive place-value parts."""
    if n in lex.numeral_rules:
        return lex.numeral_rules[n]
    if n > lex.max_composable() or n < 0:
        raise NormalizationError(
            f"numeral {n} exceeds largest composable magnitude "
            f"{lex.max_composable()}"
        )
    parts: list[str] = []
    rest = n
    for place in (1000, 100, 10, 1):
        digit = rest // place
        rest %= place
        if digit:
            part = digit * place
            if part not in lex.numeral_rules:
                raise NormalizationError(f"no numeral rule for {part} (needed by {n})")
            parts.append(lex.numeral_rules[part])
    sep = f" {lex.numeral_joiner} " if lex.numeral_joiner else " "
    return sep.join(parts)


_DIGIT_RUN = re.compile(r"[0-9]+")


def expand_numerals(text: str, lexicon: NormLexicon) -> NormReport:
    applied: list[AppliedRule] = []
    out = text
    pos = 0
    while True:
        m = _DIGIT_RUN.search(out, pos)
        if not m:
            break
        run = m.group(0)
        try:
            words = expand_number(int(run), lexicon)
        except NormalizationError as exc:
            raise NormalizationError(f"{exc} (digit run {run!r} at offset {m.start()})")
        applied.append(AppliedRule("numeral", (m.start(), m.end()), run, words))
        out = out[: m.start()] + words + out[m.end() :]
        pos = m.start() + len(words)
    return NormReport(input=text, output=out, applied=tuple(applied))


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


_TOKEN = re.compile(r"\S+")


def expand_abbreviations(text: str, lexicon: NormLexicon) -> NormReport:
    """Expand whole tokens only; a key may be followed by trailing punctuation.

    Longest matching key wins; unknown tokens pass through.
    """
    applied: list[AppliedRule] = []
    out = text
    pos = 0
    while True:
        m = _TOKEN.search(out, pos)
        if not m:
            break
        token = m.group(0)
        repl = None
        for k in range(len(token), 0, -1):
            head, tail = token[:k], token[k:]
            if head in lexicon.abbrev_map and all(_is_punct(c) for c in tail):
                repl = lexicon.abbrev_map[head] + tail
                break
        if repl is not None and repl != token:
            applied.append(AppliedRule("abbrev", (m.start(), m.end()), token, repl))
            out = out[: m.start()] + repl + out[m.end() :]
            pos = m.start() + len(repl)
        else:
            pos = m.end()
    return NormReport(input=text, output=out, applied=tuple(applied))


_WS_RUN = re.compile(r"\s+")


def normalize_special_chars(text: str, lexicon: NormLexicon) -> NormReport:
    """Replace or delete mapped characters, then collapse and trim whitespace."""
    applied: list[AppliedRule] = []
    out = text
    i = 0
    while i < len(out):
        ch = out[i]
        if ch in lexicon.char_map:
            word = lexicon.char_map[ch]
            repl = f" {word} " if word else ""
            applied.append(AppliedRule("char", (i, i + 1), ch, repl))
            out = out[:i] + repl + out[i + 1 :]
            i += len(repl)
        else:
            i += 1
    # Collapse whitespace runs to single spaces and trim the ends.
    pos = 0
    while True:
        m = _WS_RUN.search(out, pos)
        if not m:
            break
        at_edge = m.start() == 0 or m.end() == len(out)
        repl = "" if at_edge else " "
        if m.group(0) != repl:
            applied.append(AppliedRule("space", (m.start(), m.end()), m.group(0), repl))
            out = out[: m.start()] + repl + out[m.end() :]
        pos = m.start() + len(repl)
    return NormReport(input=text, output=out, applied=tuple(applied))


def normalize(text: str, lexicon: NormLexicon) -> NormReport:
    """Abbreviations, then numerals, then special characters. Idempotent."""
    r1 = expand_abbreviations(text, lexicon)
    r2 = expand_numerals(r1.output, lexicon)
    r3 = normalize_special_chars(r2.output, lexicon)
    return NormReport(
        input=text, output=r3.output, applied=r1.applied + r2.applied + r3.applied
    )


def build_metadata(
    utterances: list[Utterance], lexicon: NormLexicon, audio_root: str | None = None
) -> str:
    """CSV metadata (id,text,audio_path,duration_s) with normalized transcripts.

    Rows are ordered by (paragraph, sentence). When audio_root is given,
    raises SchemaError listing any utterances whose audio file is missing
    under it.
    """
    import csv as _csv
    import io
    import os

    if audio_root is not None:
        missing = [
            u.id.raw
            for u in utterances
            if not os.path.exists(os.path.join(audio_root, u.audio_path))
        ]
        if missing:
            raise SchemaError(f"missing audio files for: {', '.join(sorted(missing))}")
    buf = io.StringIO()
    writer = _csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "text", "audio_path", "duration_s"])
    for utt in sorted(utterances, key=lambda u: u.id.sort_key):
        writer.writerow(
            [
                utt.id.raw,
                normalize(utt.text, lexicon).output,
                utt.audio_path,
                f"{utt.duration:.6f}",
            ]
        )
    return buf.getvalue()
