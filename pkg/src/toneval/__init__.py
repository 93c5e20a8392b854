"""toneval: evaluation toolkit for low-resource tonal-language TTS."""

__version__ = "0.1.0"
