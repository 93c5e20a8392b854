import numpy as np
import pytest

from toneval.audio import AudioBuffer


def sine(freq: float, duration: float, sr: int = 22050, amp: float = 0.5) -> AudioBuffer:
    t = np.arange(int(round(duration * sr))) / sr
    return AudioBuffer(samples=amp * np.sin(2 * np.pi * freq * t), sample_rate=sr)


def chirp(f0: float, f1: float, duration: float, sr: int = 22050, amp: float = 0.5):
    """Linear chirp plus the instantaneous frequency at each sample."""
    n = int(round(duration * sr))
    t = np.arange(n) / sr
    rate = (f1 - f0) / duration
    phase = 2 * np.pi * (f0 * t + 0.5 * rate * t**2)
    inst = f0 + rate * t
    return AudioBuffer(samples=amp * np.sin(phase), sample_rate=sr), inst


def silence(duration: float, sr: int = 22050) -> AudioBuffer:
    return AudioBuffer(samples=np.zeros(int(round(duration * sr))), sample_rate=sr)


@pytest.fixture
def sine_220():
    return sine(220.0, 2.0)
