"""Fundamental-frequency tracking.

Per frame: cumulative-mean-normalized difference function, first dip under
the voicing threshold, parabolic refinement of the lag. Unvoiced frames
carry f0 = 0, so voiced[t] is equivalent to f0[t] > 0 everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureConfig

__all__ = ["F0Contour", "estimate_f0"]


@dataclass(frozen=True)
class F0Contour:
    f0: np.ndarray  # Hz per frame, 0 when unvoiced
    voiced: np.ndarray  # bool per frame
    hop: float

    @property
    def n_frames(self) -> int:
        return len(self.f0)


def _difference_function(frames: np.ndarray, w: int, tau_max: int) -> np.ndarray:
    """d[t, tau] = sum_{j<w} (x[t,j] - x[t,j+tau])^2 for tau in [0, tau_max]."""
    n = frames.shape[1]
    sq = frames**2
    cum = np.concatenate([np.zeros((frames.shape[0], 1)), np.cumsum(sq, axis=1)], axis=1)
    head = cum[:, w]
    taus = np.arange(tau_max + 1)
    windows = cum[:, taus + w] - cum[:, taus]

    fft_len = 1 << int(np.ceil(np.log2(2 * n)))
    spec_full = np.fft.rfft(frames, n=fft_len, axis=1)
    spec_head = np.fft.rfft(frames[:, :w], n=fft_len, axis=1)
    cross = np.fft.irfft(spec_full * np.conj(spec_head), n=fft_len, axis=1)[:, : tau_max + 1]
    return head[:, None] + windows - 2.0 * cross


def _cmndf(d: np.ndarray) -> np.ndarray:
    """Cumulative-mean normalization; 1 where the running sum is zero (silence)."""
    tau = np.arange(d.shape[1])
    running = np.cumsum(d[:, 1:], axis=1)
    out = np.ones_like(d)
    with np.errstate(invalid="ignore", divide="ignore"):
        normed = d[:, 1:] * tau[1:] / running
    out[:, 1:] = np.where(running > 0, normed, 1.0)
    return out


def estimate_f0(buf, cfg: FeatureConfig) -> F0Contour:
    """Estimate per-frame f0 with the configured search range and threshold.

    The analysis window spans two periods of cfg.f0_min; the hop matches the
    MFCC hop so contours align frame-for-frame with cepstral features.
    """
    sr = buf.sample_rate
    x = np.asarray(buf.samples, dtype=np.float64)
    tau_max = int(np.ceil(sr / cfg.f0_min))
    tau_min = max(2, int(np.floor(sr / cfg.f0_max)))
    win = 2 * tau_max
    if len(x) < win:
        raise ValueError(
            f"signal of {len(x)} samples shorter than one analysis window "
            f"({win} samples = 2/f0_min)"
        )
    hop = cfg.hop_samples(sr)
    n_frames = (len(x) - win) // hop + 1
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = x[idx]

    d = _difference_function(frames, tau_max, tau_max)
    nd = _cmndf(d)

    f0 = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=bool)
    for t in range(n_frames):
        row = nd[t]
        tau = _pick_lag(row, tau_min, tau_max, cfg.voicing_threshold)
        if tau is None:
            continue
        refined = _parabolic(row, tau)
        hz = sr / refined
        if cfg.f0_min <= hz <= cfg.f0_max:
            f0[t] = hz
            voiced[t] = True
    return F0Contour(f0=f0, voiced=voiced, hop=cfg.hop)


def _pick_lag(row: np.ndarray, tau_min: int, tau_max: int, threshold: float):
    tau = tau_min
    while tau <= tau_max:
        if row[tau] < threshold:
            while tau + 1 <= tau_max and row[tau + 1] < row[tau]:
                tau += 1
            return tau
        tau += 1
    return None


def _parabolic(row: np.ndarray, tau: int) -> float:
    if tau <= 0 or tau + 1 >= len(row):
        return float(tau)
    a, b, c = row[tau - 1], row[tau], row[tau + 1]
    denom = a - 2 * b + c
    if denom == 0:
        return float(tau)
    shift = 0.5 * (a - c) / denom
    return tau + float(np.clip(shift, -1.0, 1.0))
