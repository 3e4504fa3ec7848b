"""WAV input/output for the separation CLI.

Supports 16-bit PCM and 32-bit float, mono or multichannel files.
Internally signals are float64 arrays shaped (channels, samples) with
amplitudes nominally in [-1, 1].
"""

from __future__ import annotations

import numpy as np
from scipy.io import wavfile

_INT16_SCALE = 32768.0


def read_wav(path):
    """Read a WAV file as ((channels, samples) float array, sample_rate)."""
    rate, data = wavfile.read(path)
    if data.dtype == np.int16:
        signal = data.astype(np.float64) / _INT16_SCALE
    elif data.dtype == np.int32:
        signal = data.astype(np.float64) / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        signal = data.astype(np.float64)
    elif data.dtype == np.uint8:
        signal = (data.astype(np.float64) - 128.0) / 128.0
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype}")
    if signal.ndim == 1:
        signal = signal[None, :]
    else:
        signal = signal.T
    return signal, int(rate)


def write_wav(path, signal, sample_rate, bits=32):
    """Write (channels, samples) or (samples,) data as 16-bit PCM or 32-bit float."""
    data = np.atleast_2d(np.asarray(signal, dtype=np.float64))
    out = data[0] if data.shape[0] == 1 else data.T
    if bits == 32:
        wavfile.write(path, int(sample_rate), out.astype(np.float32))
    elif bits == 16:
        clipped = np.clip(out, -1.0, 32767.0 / _INT16_SCALE)
        wavfile.write(path, int(sample_rate), np.round(clipped * _INT16_SCALE).astype(np.int16))
    else:
        raise ValueError("bits must be 16 or 32")


def read_mixture(paths):
    """Stack one multichannel WAV or several equal-rate WAVs into (K, n)."""
    signals = []
    rate = None
    for path in paths:
        sig, r = read_wav(path)
        if rate is None:
            rate = r
        elif r != rate:
            raise ValueError(f"sample-rate mismatch: {r} vs {rate} in {path}")
        signals.append(sig)
    data = np.concatenate(signals, axis=0)
    if data.shape[0] < 2:
        raise ValueError("mixture needs at least two channels in total")
    lengths = {s.shape[1] for s in signals}
    if len(lengths) != 1:
        raise ValueError("all mixture files must have the same length")
    return data, rate
