"""Audio buffers, 16-bit PCM WAV I/O, and sinc resampling."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.signal import resample_poly

from .errors import AudioFormatError

__all__ = ["AudioBuffer", "read_wav", "write_wav", "load_wav", "save_wav", "resample"]


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio: float samples in [-1, 1] at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.samples.ndim != 1:
            raise AudioFormatError("AudioBuffer is mono: samples must be 1-D")
        if self.sample_rate <= 0:
            raise AudioFormatError(f"bad sample rate {self.sample_rate}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, AudioBuffer)
            and self.sample_rate == other.sample_rate
            and np.array_equal(self.samples, other.samples)
        )


def read_wav(data: bytes) -> AudioBuffer:
    """Decode a RIFF/WAVE byte string holding 16-bit PCM mono audio.

    Samples are scaled to floats by s/32768. Rejects non-RIFF containers,
    compressed codecs, bit depths other than 16, and multichannel audio.
    """
    if len(data) < 12 or data[0:4] != b"RIFF":
        got = data[0:4].decode("latin-1", "replace") if len(data) >= 4 else "<short>"
        raise AudioFormatError(f"unsupported container {got!r} (expected RIFF)")
    if data[8:12] != b"WAVE":
        raise AudioFormatError("RIFF file is not WAVE audio")

    fmt = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (csize,) = struct.unpack("<I", data[pos + 4 : pos + 8])
        body = data[pos + 8 : pos + 8 + csize]
        if cid == b"fmt ":
            if csize < 16:
                raise AudioFormatError("truncated fmt chunk")
            fmt = struct.unpack("<HHIIHH", body[:16])
        elif cid == b"data":
            if fmt is None:
                raise AudioFormatError("data chunk before fmt chunk")
            return _decode_pcm(fmt, body, csize)
        pos += 8 + csize + (csize & 1)
    raise AudioFormatError("no data chunk found")


def _decode_pcm(fmt, body: bytes, declared: int) -> AudioBuffer:
    audio_format, channels, rate, _, _, bits = fmt
    if audio_format != 1:
        raise AudioFormatError(f"unsupported codec (format tag {audio_format}, want PCM)")
    if bits != 16:
        raise AudioFormatError(f"unsupported bit depth {bits}")
    if channels != 1:
        raise AudioFormatError(f"only mono supported, got {channels} channels")
    if len(body) < declared:
        raise AudioFormatError(
            f"truncated data chunk: {len(body)} of {declared} bytes present"
        )
    raw = np.frombuffer(body[:declared], dtype="<i2")
    return AudioBuffer(samples=raw.astype(np.float64) / 32768.0, sample_rate=rate)


def write_wav(buf: AudioBuffer) -> bytes:
    """Encode as 16-bit PCM mono WAV. Inverse of read_wav for 16-bit data."""
    ints = np.clip(np.rint(buf.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        1,
        1,
        buf.sample_rate,
        buf.sample_rate * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    return header + payload


def load_wav(path) -> AudioBuffer:
    with open(path, "rb") as fh:
        return read_wav(fh.read())


def save_wav(path, buf: AudioBuffer) -> None:
    with open(path, "wb") as fh:
        fh.write(write_wav(buf))


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Windowed-sinc polyphase resampling to target_rate.

    Output length is round(n * target/source); a same-rate call returns the
    input unchanged.
    """
    if target_rate <= 0:
        raise ValueError(f"bad target rate {target_rate}")
    if target_rate == buf.sample_rate:
        return buf
    g = math.gcd(target_rate, buf.sample_rate)
    up, down = target_rate // g, buf.sample_rate // g
    out = resample_poly(buf.samples, up, down)
    want = int(math.floor(len(buf.samples) * target_rate / buf.sample_rate + 0.5))
    if len(out) > want:
        out = out[:want]
    elif len(out) < want:
        out = np.pad(out, (0, want - len(out)))
    return AudioBuffer(samples=out, sample_rate=target_rate)
