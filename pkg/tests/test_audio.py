import struct

import numpy as np
import pytest

from toneval.audio import AudioBuffer, read_wav, resample, write_wav
from toneval.errors import AudioFormatError


def _wav_bytes(samples_i16, rate=22050, channels=1, bits=16, tag=1):
    payload = struct.pack(f"<{len(samples_i16)}h", *samples_i16)
    return (
        struct.pack(
            "<4sI4s4sIHHIIHH4sI",
            b"RIFF",
            36 + len(payload),
            b"WAVE",
            b"fmt ",
            16,
            tag,
            channels,
            rate,
            rate * channels * bits // 8,
            channels * bits // 8,
            bits,
            b"data",
            len(payload),
        )
        + payload
    )


def test_read_handcrafted_samples():
    buf = read_wav(_wav_bytes([0, 16384, -16384, 32767], rate=44100))
    assert buf.sample_rate == 44100
    assert np.allclose(buf.samples, [0.0, 0.5, -0.5, 32767 / 32768], atol=1e-9)


def test_read_rejects_rifx():
    data = _wav_bytes([0])
    with pytest.raises(AudioFormatError, match="unsupported container"):
        read_wav(b"RIFX" + data[4:])


def test_read_rejects_24bit():
    data = _wav_bytes([0, 0])
    bad = bytearray(data)
    bad[34:36] = struct.pack("<H", 24)
    with pytest.raises(AudioFormatError, match="bit depth 24"):
        read_wav(bytes(bad))


def test_read_rejects_stereo():
    with pytest.raises(AudioFormatError, match="mono"):
        read_wav(_wav_bytes([0, 0], channels=2))


def test_read_rejects_nonpcm():
    with pytest.raises(AudioFormatError, match="codec"):
        read_wav(_wav_bytes([0], tag=3))


def test_read_rejects_truncated_data():
    data = _wav_bytes([1, 2, 3, 4])
    with pytest.raises(AudioFormatError, match="truncated data"):
        read_wav(data[:-4])


def test_roundtrip_exact_for_16bit():
    rng = np.random.default_rng(7)
    ints = rng.integers(-32768, 32768, size=1000, dtype=np.int16)
    buf = AudioBuffer(samples=ints.astype(np.float64) / 32768.0, sample_rate=22050)
    again = read_wav(write_wav(buf))
    assert again == buf


def test_resample_halving_length():
    buf = AudioBuffer(samples=np.random.default_rng(1).normal(size=44100), sample_rate=44100)
    out = resample(buf, 22050)
    assert out.sample_rate == 22050
    assert abs(len(out.samples) - 22050) <= 1


def test_resample_same_rate_identity():
    buf = AudioBuffer(samples=np.arange(100, dtype=np.float64) / 100, sample_rate=22050)
    out = resample(buf, 22050)
    assert np.array_equal(out.samples, buf.samples)


def test_resample_preserves_tone():
    sr = 44100
    t = np.arange(sr) / sr
    buf = AudioBuffer(samples=0.5 * np.sin(2 * np.pi * 1000 * t), sample_rate=sr)
    out = resample(buf, 22050)
    spectrum = np.abs(np.fft.rfft(out.samples * np.hanning(len(out.samples))))
    freqs = np.fft.rfftfreq(len(out.samples), 1 / 22050)
    peak = freqs[np.argmax(spectrum)]
    bin_width = freqs[1] - freqs[0]
    assert abs(peak - 1000.0) <= bin_width + 1e-9
    # Passband amplitude: compare RMS over the central region, well away from edges.
    core = slice(2000, -2000)
    rms_in = np.sqrt(np.mean(buf.samples[core] ** 2))
    rms_out = np.sqrt(np.mean(out.samples[core] ** 2))
    assert abs(20 * np.log10(rms_out / rms_in)) < 0.1
