"""Frame-level spectral features: mel filterbank MFCCs and their config.

Defaults (25 ms frames, 10 ms hop, 1024-point FFT, 80 mel bands, HTK mel
scale, log floor 1e-10, orthonormal DCT-II) are pinned here and embedded in
every metric report so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, fields

import numpy as np
from scipy.fft import dct

__all__ = ["FeatureConfig", "MfccMatrix", "mfcc", "frame_signal", "mel_filterbank"]

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class FeatureConfig:
    frame_length: float = 0.025
    hop: float = 0.010
    n_mels: int = 80
    # 14 cepstra so that excluding c0 leaves the conventional 13 distortion
    # coefficients for MCD.
    n_mfcc: int = 14
    fft_size: int = 1024
    f0_min: float = 70.0
    f0_max: float = 400.0
    voicing_threshold: float = 0.15
    sample_rate: int = 22050

    def __post_init__(self):
        if self.f0_min >= self.f0_max:
            raise ValueError(f"f0_min {self.f0_min} must be < f0_max {self.f0_max}")
        if self.n_mfcc > self.n_mels:
            raise ValueError(f"n_mfcc {self.n_mfcc} exceeds n_mels {self.n_mels}")
        if self.frame_length <= 0 or self.hop <= 0:
            raise ValueError("frame_length and hop must be positive")

    def frame_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_length * sample_rate))

    def hop_samples(self, sample_rate: int) -> int:
        return max(1, int(round(self.hop * sample_rate)))

    def validate_for_rate(self, sample_rate: int) -> None:
        if self.fft_size < self.frame_samples(sample_rate):
            raise ValueError(
                f"fft_size {self.fft_size} smaller than frame of "
                f"{self.frame_samples(sample_rate)} samples at {sample_rate} Hz"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for f in fields(self):
                fh.write(f"{f.name}={getattr(self, f.name)}\n")

    @classmethod
    def from_file(cls, path) -> "FeatureConfig":
        raw: dict = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, value = line.partition("=")
                raw[key.strip()] = value.strip()
        kwargs = {}
        for f in fields(cls):
            if f.name in raw:
                kwargs[f.name] = _cast(f, raw[f.name])
        unknown = set(raw) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**kwargs)


def _cast(f, text: str):
    if f.type in (int, "int"):
        return int(text)
    if f.type in (float, "float"):
        return float(text)
    return text


@dataclass(frozen=True)
class MfccMatrix:
    frames: np.ndarray  # T x K
    frame_length: float
    hop: float
    sample_rate: int

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_coeffs(self) -> int:
        return self.frames.shape[1]


def frame_signal(x: np.ndarray, frame: int, hop: int) -> np.ndarray:
    """Frame x into floor((n - frame)/hop) + 1 rows of length frame."""
    if len(x) < frame:
        raise ValueError(f"signal of {len(x)} samples shorter than one {frame}-sample frame")
    n_frames = (len(x) - frame) // hop + 1
    idx = np.arange(frame)[None, :] + hop * np.arange(n_frames)[:, None]
    return x[idx]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, fft_size: int, sample_rate: int) -> np.ndarray:
    """Triangular HTK-scale filters over rFFT bins, peak height 1."""
    nyquist = sample_rate / 2.0
    mel_pts = np.linspace(hz_to_mel(0.0), hz_to_mel(nyquist), n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    bin_freqs = np.arange(fft_size // 2 + 1) * sample_rate / fft_size
    fb = np.zeros((n_mels, len(bin_freqs)))
    for m in range(n_mels):
        lo, ctr, hi = hz_pts[m], hz_pts[m + 1], hz_pts[m + 2]
        up = (bin_freqs - lo) / (ctr - lo)
        down = (hi - bin_freqs) / (hi - ctr)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
    return fb


def mfcc(buf, cfg: FeatureConfig) -> MfccMatrix:
    """Hann window, power spectrum, HTK mel filterbank, floored log, DCT-II."""
    sr = buf.sample_rate
    cfg.validate_for_rate(sr)
    frame = cfg.frame_samples(sr)
    hop = cfg.hop_samples(sr)
    frames = frame_signal(np.asarray(buf.samples, dtype=np.float64), frame, hop)
    windowed = frames * np.hanning(frame)
    power = np.abs(np.fft.rfft(windowed, n=cfg.fft_size, axis=1)) ** 2
    fb = mel_filterbank(cfg.n_mels, cfg.fft_size, sr)
    logmel = np.log(np.maximum(power @ fb.T, LOG_FLOOR))
    cepstra = dct(logmel, type=2, norm="ortho", axis=1)[:, : cfg.n_mfcc]
    return MfccMatrix(
        frames=cepstra, frame_length=cfg.frame_length, hop=cfg.hop, sample_rate=sr
    )
