"""
Delta (level-crossing) spike encoding of pixel charge waveforms.

Each pixel waveform becomes two spike trains: one for rising edges and one for
falling edges. A spike is emitted every time the charge moves by ``delta_x``
away from the last reference sample, so fast edges give dense spikes and slow
edges sparse ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .clusters import SLICE_PS, ClusterSample
from .reduction import ReductionPattern, reduce_spikes

TIMESCALES_PS = (10, 20, 40, 50, 100, 200)


@dataclass(frozen=True)
class EncoderParams:
    x_th: float = 800.0
    delta_x: float = 400.0
    t_res: int = SLICE_PS
    # also treat the sample just before the waveform clears x_th as a reference,
    # so a sharp onset from the noise floor yields a rising spike
    onset: bool = True

    def __post_init__(self):
        if self.x_th < 0:
            raise ValueError("x_th must be >= 0")
        if self.delta_x <= 0:
            raise ValueError("delta_x must be > 0")
        if self.t_res not in TIMESCALES_PS:
            raise ValueError(f"t_res must be one of {TIMESCALES_PS}, got {self.t_res}")


@dataclass(frozen=True)
class SpikeTrainPair:
    t_plus: tuple[int, ...]
    t_minus: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SpikeRaster:
    spikes: np.ndarray  # bool (n_channels, n_timesteps)
    t_res: int = SLICE_PS

    @property
    def n_channels(self) -> int:
        return self.spikes.shape[0]

    @property
    def n_timesteps(self) -> int:
        return self.spikes.shape[1]

    def __eq__(self, other):
        if not isinstance(other, SpikeRaster):
            return NotImplemented
        return self.t_res == other.t_res and np.array_equal(self.spikes, other.spikes)

    __hash__ = None

    def events(self) -> list[tuple[int, int]]:
        """(channel_index, time_ps) for every spike, channel-major."""
        ch, step = np.nonzero(self.spikes)
        return [(int(c), int((s + 1) * self.t_res)) for c, s in zip(ch, step)]


def upsample(series, target_res: int) -> np.ndarray:
    """Linearly interpolate a 200 ps series onto a finer grid.

    Original sample i lands on output index i * factor. The slots after the
    last original sample hold its value so the output still spans the full
    readout window (length ``len(series) * factor``).
    """
    if target_res not in TIMESCALES_PS or SLICE_PS % target_res:
        raise ValueError(f"target_res must divide {SLICE_PS} and be one of {TIMESCALES_PS}")
    x = np.asarray(series, dtype=float)
    factor = SLICE_PS // target_res
    if factor == 1 or x.size == 0:
        return x.copy()
    grid = np.arange(x.size * factor) / factor
    return np.interp(grid, np.arange(x.size), x)


def upsample_frames(charges: np.ndarray, target_res: int) -> np.ndarray:
    """Upsample a (slices, rows, cols) stack along the time axis."""
    factor = SLICE_PS // target_res
    if target_res not in TIMESCALES_PS or SLICE_PS % target_res:
        raise ValueError(f"target_res must divide {SLICE_PS} and be one of {TIMESCALES_PS}")
    if factor == 1:
        return np.asarray(charges, dtype=float)
    s = charges.shape[0]
    lo = np.arange(s * factor) // factor
    hi = np.minimum(lo + 1, s - 1)
    frac = (np.arange(s * factor) % factor / factor)[:, None, None]
    return charges[lo] * (1.0 - frac) + charges[hi] * frac


def _scan(x: Sequence[float], x_th: float, delta_x: float, onset: bool) -> list[tuple[int, bool]]:
    """Return (crossing_index, is_rising) for each emitted spike."""
    n = len(x)
    out = []
    k = 0
    while k < n:
        active = x[k] > x_th or (onset and k + 1 < n and x[k + 1] > x_th)
        if not active:
            k += 1
            continue
        rise = x[k] + delta_x
        fall = x[k] - delta_x
        j = k + 1
        while j < n and fall < x[j] < rise:
            j += 1
        if j == n:
            break
        out.append((j, x[j] >= rise))
        k = j
    return out


def encode_pixel(series, params: EncoderParams = EncoderParams()) -> SpikeTrainPair:
    """Encode one waveform (already at ``params.t_res``) into spike times in ps.

    A crossing detected at sample index j is stamped at ``t_res * (j + 1)``.
    """
    x = np.asarray(series, dtype=float).tolist()
    plus, minus = [], []
    for j, rising in _scan(x, params.x_th, params.delta_x, params.onset):
        (plus if rising else minus).append(params.t_res * (j + 1))
    return SpikeTrainPair(tuple(plus), tuple(minus))


def encode_pixels(charges: np.ndarray, params: EncoderParams = EncoderParams()) -> np.ndarray:
    """Encode every pixel of a (slices, rows, cols) stack sampled at 200 ps.

    Returns a bool array (rows, cols, 2, T) with T = slices * 200 / t_res.
    Timestep index j holds spikes stamped at t_res * (j + 1).
    """
    x = upsample_frames(np.asarray(charges, dtype=float), params.t_res)
    T, rows, cols = x.shape
    out = np.zeros((rows, cols, 2, T), dtype=bool)
    # a pixel that never clears x_th can never be a reference sample
    active = np.argwhere(x.max(axis=0) > params.x_th)
    for r, c in active:
        for j, rising in _scan(x[:, r, c].tolist(), params.x_th, params.delta_x, params.onset):
            out[r, c, 0 if rising else 1, j] = True
    return out


def encode_cluster(sample: ClusterSample, params: EncoderParams, pattern: ReductionPattern) -> SpikeRaster:
    rows, cols, _ = sample.frame_shape
    if pattern.shape != (rows, cols):
        raise ValueError(f"pattern shape {pattern.shape} does not match frame {(rows, cols)}")
    return SpikeRaster(reduce_spikes(encode_pixels(sample.charges, params), pattern), params.t_res)


def encode_batch(samples: Sequence[ClusterSample], params: EncoderParams, pattern: ReductionPattern) -> np.ndarray:
    """Stack encoded rasters into a bool array (n_samples, n_channels, T)."""
    if not samples:
        raise ValueError("no samples to encode")
    return np.stack([encode_cluster(s, params, pattern).spikes for s in samples])


def write_spike_dump(rasters: Sequence[SpikeRaster], path) -> None:
    """Write ``channel_index,time_ps`` rows; samples separated by ``# sample=i``."""
    lines = ["channel_index,time_ps"]
    for i, raster in enumerate(rasters):
        lines.append(f"# sample={i}")
        lines.extend(f"{c},{t}" for c, t in raster.events())
    Path(path).write_text("\n".join(lines) + "\n")


def read_spike_dump(path) -> list[list[tuple[int, int]]]:
    out: list[list[tuple[int, int]]] = []
    for line in Path(path).read_text().splitlines()[1:]:
        if line.startswith("# sample="):
            out.append([])
        elif line.strip():
            c, t = line.split(",")
            out[-1].append((int(c), int(t)))
    return out
