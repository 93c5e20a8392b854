"""Praat TextGrid reading and writing (long text form only).

Supports interval tiers; point tiers are parsed and skipped with a warning.
Short-form and binary TextGrids are rejected. Labels round-trip byte-exact,
including doubled-quote escapes and embedded newlines.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

from .errors import TextGridError

__all__ = [
    "Interval",
    "IntervalTier",
    "TextGridDoc",
    "parse_textgrid",
    "serialize_textgrid",
    "decode_textgrid",
    "load_textgrid",
    "check_doc",
]


@dataclass(frozen=True)
class Interval:
    xmin: float
    xmax: float
    label: str


@dataclass
class IntervalTier:
    name: str
    intervals: list[Interval] = field(default_factory=list)

    @property
    def xmin(self) -> float:
        return self.intervals[0].xmin if self.intervals else 0.0

    @property
    def xmax(self) -> float:
        return self.intervals[-1].xmax if self.intervals else 0.0


@dataclass
class TextGridDoc:
    xmin: float
    xmax: float
    tiers: list[IntervalTier] = field(default_factory=list)


def check_doc(doc: TextGridDoc) -> None:
    """Raise TextGridError if *doc* violates structural invariants."""
    if doc.xmin > doc.xmax:
        raise TextGridError(f"document xmin {doc.xmin} > xmax {doc.xmax}")
    for tier in doc.tiers:
        prev_end: float | None = None
        for iv in tier.intervals:
            if iv.xmin >= iv.xmax:
                raise TextGridError(
                    f"tier {tier.name!r}: empty or reversed interval "
                    f"[{iv.xmin}, {iv.xmax}]"
                )
            if prev_end is not None and iv.xmin != prev_end:
                raise TextGridError(
                    f"tier {tier.name!r}: non-contiguous intervals at {iv.xmin}"
                )
            prev_end = iv.xmax
        if tier.intervals:
            if tier.xmin < doc.xmin or tier.xmax > doc.xmax:
                raise TextGridError(
                    f"tier {tier.name!r} extent [{tier.xmin}, {tier.xmax}] outside "
                    f"document extent [{doc.xmin}, {doc.xmax}]"
                )


_NUM_RE = re.compile(r"^\s*(?P<key>[A-Za-z?]+)\s*=\s*(?P<val>[-+0-9.eE]+)\s*$")
_SIZE_RE = re.compile(r"^\s*(intervals|points):\s*size\s*=\s*(\d+)\s*$")
_ITEM_RE = re.compile(r"^\s*(item|intervals|points)\s*\[\d*\]:\s*$")
_TIERS_RE = re.compile(r"^\s*tiers\?\s*<(exists|absent)>\s*$")


class _Reader:
    """Line cursor over TextGrid text, tracking 1-based line numbers."""

    def __init__(self, text: str):
        # Split on \n only (after CRLF normalization) so that labels holding
        # unusual separators like \x85 or   survive byte-exact.
        self.lines = text.replace("\r\n", "\n").split("\n")
        self.pos = 0

    @property
    def lineno(self) -> int:
        return self.pos + 1

    def _advance_blank(self) -> None:
        while self.pos < len(self.lines) and not self.lines[self.pos].strip():
            self.pos += 1

    def peek(self) -> str | None:
        self._advance_blank()
        if self.pos >= len(self.lines):
            return None
        return self.lines[self.pos]

    def take(self, what: str) -> str:
        line = self.peek()
        if line is None:
            raise TextGridError(f"truncated file: expected {what}", self.lineno)
        self.pos += 1
        return line

    def number(self, key: str) -> float:
        line = self.take(f"{key} = <number>")
        m = _NUM_RE.match(line)
        if not m or m.group("key") != key:
            raise TextGridError(
                f"expected '{key} = <number>', got {line.strip()!r}", self.pos
            )
        try:
            return float(m.group("val"))
        except ValueError:
            raise TextGridError(f"bad number for {key}: {m.group('val')!r}", self.pos)

    def integer(self, key: str) -> int:
        val = self.number(key)
        if val != int(val):
            raise TextGridError(f"expected integer for {key}, got {val}", self.pos)
        return int(val)

    def string(self, key: str) -> str:
        line = self.take(f'{key} = "..."')
        lineno = self.pos
        m = re.match(rf"^\s*{re.escape(key)}\s*=\s*\"(?P<rest>.*)$", line)
        if not m:
            raise TextGridError(
                f"expected '{key} = \"...\"', got {line.strip()!r}", lineno
            )
        return self._finish_string(m.group("rest"), lineno)

    def _finish_string(self, tail: str, start_line: int) -> str:
        # Praat escapes a literal double quote by doubling it; labels may
        # contain raw newlines, in which case the string spans physical lines.
        out: list[str] = []
        while True:
            i = 0
            n = len(tail)
            while i < n:
                ch = tail[i]
                if ch == '"':
                    if i + 1 < n and tail[i + 1] == '"':
                        out.append('"')
                        i += 2
                        continue
                    return "".join(out)
                out.append(ch)
                i += 1
            out.append("\n")
            if self.pos >= len(self.lines):
                raise TextGridError("unterminated string", start_line)
            tail = self.lines[self.pos]
            self.pos += 1

    def item_header(self) -> None:
        line = self.take("item [n]:")
        if not _ITEM_RE.match(line):
            raise TextGridError(f"expected item header, got {line.strip()!r}", self.pos)

    def block_size(self, kind: str) -> int:
        line = self.take(f"{kind}: size = <n>")
        m = _SIZE_RE.match(line)
        if not m or m.group(1) != kind:
            raise TextGridError(
                f"expected '{kind}: size = <n>', got {line.strip()!r}", self.pos
            )
        return int(m.group(2))


def parse_textgrid(content: str) -> TextGridDoc:
    """Parse long-form ooTextFile TextGrid text into a TextGridDoc.

    Interval tiers are kept in file order; point tiers are skipped with a
    UserWarning. Raises TextGridError (with line number) on malformed input.
    """
    r = _Reader(content)
    first = r.peek() or ""
    m = re.match(r'^\s*File type\s*=\s*"(.*)"\s*$', first)
    if not m:
        raise TextGridError(
            f"not an ooTextFile TextGrid (bad header {first.strip()[:40]!r})", 1
        )
    if m.group(1) != "ooTextFile":
        raise TextGridError(
            f"unsupported file type {m.group(1)!r} (binary/short forms not supported)", 1
        )
    r.pos += 1
    line = r.take('Object class = "TextGrid"')
    m = re.match(r'^\s*Object class\s*=\s*"(.*)"\s*$', line)
    if not m or m.group(1) != "TextGrid":
        raise TextGridError(f"not a TextGrid object: {line.strip()!r}", r.pos)

    nxt = r.peek()
    if nxt is not None and not re.match(r"^\s*xmin\s*=", nxt):
        raise TextGridError(
            "short-form TextGrid not supported (expected 'xmin = ...')", r.lineno
        )
    xmin = r.number("xmin")
    xmax = r.number("xmax")
    if xmin > xmax:
        raise TextGridError(f"non-monotonic times: xmin {xmin} > xmax {xmax}", r.pos)

    line = r.take("tiers? <exists>")
    m = _TIERS_RE.match(line)
    if not m:
        raise TextGridError(f"expected 'tiers? <exists>', got {line.strip()!r}", r.pos)
    doc = TextGridDoc(xmin=xmin, xmax=xmax, tiers=[])
    if m.group(1) == "absent":
        return doc

    size = r.integer("size")
    nxt = r.peek()
    if nxt is not None and re.match(r"^\s*item\s*\[\]:\s*$", nxt):
        r.pos += 1  # optional "item []:" wrapper

    for _ in range(size):
        r.item_header()
        cls = r.string("class")
        name = r.string("name")
        t_xmin = r.number("xmin")
        t_xmax = r.number("xmax")
        if cls == "IntervalTier":
            tier = _parse_interval_tier(r, name, t_xmin, t_xmax, doc)
            doc.tiers.append(tier)
        elif cls in ("TextTier", "PointTier"):
            warnings.warn(
                f"skipping point tier {name!r} (only interval tiers are kept)",
                stacklevel=2,
            )
            n = r.block_size("points")
            for _ in range(n):
                r.item_header()
                r.number("number")
                r.string("mark")
        else:
            raise TextGridError(f"unknown tier class {cls!r}", r.pos)
    return doc


def _parse_interval_tier(
    r: _Reader, name: str, t_xmin: float, t_xmax: float, doc: TextGridDoc
) -> IntervalTier:
    n = r.block_size("intervals")
    tier = IntervalTier(name=name, intervals=[])
    prev_end: float | None = None
    for _ in range(n):
        r.item_header()
        at = r.lineno
        i_min = r.number("xmin")
        i_max = r.number("xmax")
        label = r.string("text")
        if i_min >= i_max:
            raise TextGridError(
                f"non-monotonic times: interval [{i_min}, {i_max}]", at
            )
        if prev_end is not None and i_min != prev_end:
            raise TextGridError(
                f"non-contiguous intervals: {i_min} after {prev_end}", at
            )
        if i_min < doc.xmin or i_max > doc.xmax:
            raise TextGridError(
                f"interval [{i_min}, {i_max}] outside document extent", at
            )
        prev_end = i_max
        tier.intervals.append(Interval(i_min, i_max, label))
    if tier.intervals and (t_xmin > tier.intervals[0].xmin or t_xmax < tier.intervals[-1].xmax):
        raise TextGridError(
            f"tier {name!r} declared extent [{t_xmin}, {t_xmax}] does not cover its intervals"
        )
    return tier


def _fmt(x: float) -> str:
    return repr(float(x))


def _quote(s: str) -> str:
    return '"' + s.replace('"', '""') + '"'


def serialize_textgrid(doc: TextGridDoc) -> str:
    """Render *doc* as long-form TextGrid text; parse_textgrid inverts it exactly."""
    check_doc(doc)
    w: list[str] = []
    w.append('File type = "ooTextFile"')
    w.append('Object class = "TextGrid"')
    w.append("")
    w.append(f"xmin = {_fmt(doc.xmin)}")
    w.append(f"xmax = {_fmt(doc.xmax)}")
    w.append("tiers? <exists>")
    w.append(f"size = {len(doc.tiers)}")
    w.append("item []:")
    for i, tier in enumerate(doc.tiers, start=1):
        w.append(f"    item [{i}]:")
        w.append('        class = "IntervalTier"')
        w.append(f"        name = {_quote(tier.name)}")
        w.append(f"        xmin = {_fmt(tier.xmin if tier.intervals else doc.xmin)}")
        w.append(f"        xmax = {_fmt(tier.xmax if tier.intervals else doc.xmax)}")
        w.append(f"        intervals: size = {len(tier.intervals)}")
        for j, iv in enumerate(tier.intervals, start=1):
            w.append(f"        intervals [{j}]:")
            w.append(f"            xmin = {_fmt(iv.xmin)}")
            w.append(f"            xmax = {_fmt(iv.xmax)}")
            w.append(f"            text = {_quote(iv.label)}")
    return "\n".join(w) + "\n"


def decode_textgrid(data: bytes) -> str:
    """Decode TextGrid bytes: UTF-8 (with or without BOM) or UTF-16 with BOM."""
    if data[:2] in (b"\xfe\xff", b"\xff\xfe"):
        return data.decode("utf-16")
    if data[:8] == b"ooBinary":
        raise TextGridError("binary TextGrid files are not supported", 1)
    return data.decode("utf-8-sig")


def load_textgrid(path) -> TextGridDoc:
    with open(path, "rb") as fh:
        return parse_textgrid(decode_textgrid(fh.read()))
