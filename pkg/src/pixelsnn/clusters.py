"""
Pixel-cluster datasets: file I/O, labelling, file-level splits, class balancing
and a synthetic stand-in generator.

A cluster is a stack of 2-D charge frames (electrons) indexed
``[time_slice][row][col]``. Rows run along the sensor y direction, columns
along x. The default frame is 13 rows x 21 columns x 20 slices of 200 ps.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

DEFAULT_SHAPE = (13, 21, 20)  # rows, cols, slices
SLICE_PS = 200

_HEADER_RE = re.compile(r"#\s*shape=(\d+)x(\d+)x(\d+)(?:\s+t_res_ps=(\d+))?")


class ClusterFormatError(ValueError):
    """Raised when a cluster file or manifest cannot be parsed."""


@dataclass(frozen=True, eq=False)
class ClusterSample:
    charges: np.ndarray  # (slices, rows, cols)
    p_t: float
    y0: float = 0.0
    charge_sign: int = 1

    def __post_init__(self):
        charges = np.asarray(self.charges, dtype=np.float32)
        if charges.ndim != 3:
            raise ValueError(f"charges must be 3-D (slices, rows, cols), got shape {charges.shape}")
        if not np.all(np.isfinite(charges)) or np.any(charges < 0):
            raise ValueError("charges must be finite and non-negative")
        if not self.p_t > 0:
            raise ValueError(f"p_t must be positive, got {self.p_t}")
        if self.charge_sign not in (1, -1):
            raise ValueError(f"charge_sign must be +1 or -1, got {self.charge_sign}")
        charges.setflags(write=False)
        object.__setattr__(self, "charges", charges)

    @property
    def frame_shape(self) -> tuple[int, int, int]:
        """(rows, cols, slices)"""
        s, r, c = self.charges.shape
        return r, c, s

    def __eq__(self, other):
        if not isinstance(other, ClusterSample):
            return NotImplemented
        return (
            self.p_t == other.p_t
            and self.y0 == other.y0
            and self.charge_sign == other.charge_sign
            and self.charges.shape == other.charges.shape
            and np.array_equal(self.charges, other.charges)
        )

    __hash__ = None


@dataclass(frozen=True)
class DatasetManifest:
    file_paths: tuple[str, ...]
    samples_per_file: tuple[int, ...]
    frame_shape: tuple[int, int, int] = DEFAULT_SHAPE

    def __post_init__(self):
        if not self.file_paths:
            raise ValueError("manifest must list at least one file")
        if len(self.file_paths) != len(self.samples_per_file):
            raise ValueError("file_paths and samples_per_file differ in length")

    def __len__(self):
        return len(self.file_paths)

    @property
    def n_samples(self) -> int:
        return sum(self.samples_per_file)

    def subset(self, indices: Sequence[int]) -> "DatasetManifest":
        return DatasetManifest(
            tuple(self.file_paths[i] for i in indices),
            tuple(self.samples_per_file[i] for i in indices),
            self.frame_shape,
        )


# --------------------------------------------------------------------------- I/O


def save_dataset(samples: Sequence[ClusterSample], path, shape=None) -> None:
    """Write samples to the plain-text cluster format.

    The first line is a header naming the frame shape, each following line is
    ``p_t,y0,charge_sign,`` followed by the charges in [slice][row][col] order.
    Floats are written with enough digits to round-trip exactly.
    """
    if shape is None:
        shape = samples[0].frame_shape if samples else DEFAULT_SHAPE
    rows, cols, slices = shape
    lines = [f"# shape={rows}x{cols}x{slices} t_res_ps={SLICE_PS}"]
    for s in samples:
        if s.frame_shape != tuple(shape):
            raise ValueError(f"sample shape {s.frame_shape} differs from file shape {tuple(shape)}")
        head = f"{s.p_t!r},{s.y0!r},{s.charge_sign:d}"
        # 9 significant digits round-trip any float32
        body = ",".join(f"{v:.9g}" for v in s.charges.ravel().tolist())
        lines.append(f"{head},{body}")
    Path(path).write_text("\n".join(lines) + "\n")


def _read_header(line: str, path) -> tuple[int, int, int]:
    m = _HEADER_RE.match(line.strip())
    if not m:
        raise ClusterFormatError(f"{path}:1: missing or malformed shape header: {line.strip()!r}")
    return int(m.group(1)), int(m.group(2)), int(m.group(3))


def read_shape(path) -> tuple[int, int, int]:
    with open(path) as fh:
        return _read_header(fh.readline(), path)


def load_dataset(path) -> list[ClusterSample]:
    """Read every sample of a cluster file, in file order.

    Raises:
        ClusterFormatError: on a bad header, a row with the wrong field count,
            an unparsable or negative value. The message names the line number.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ClusterFormatError(f"{path}:1: empty file, shape header required")
    rows, cols, slices = _read_header(lines[0], path)
    n_fields = 3 + rows * cols * slices
    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != n_fields:
            raise ClusterFormatError(
                f"{path}:{lineno}: expected {n_fields} fields for shape "
                f"{rows}x{cols}x{slices}, got {len(parts)}"
            )
        try:
            p_t = float(parts[0])
            y0 = float(parts[1])
            sign = int(parts[2])
            charges = np.array(parts[3:], dtype=np.float32)
        except ValueError as exc:
            raise ClusterFormatError(f"{path}:{lineno}: {exc}") from None
        try:
            samples.append(ClusterSample(charges.reshape(slices, rows, cols), p_t, y0, sign))
        except ValueError as exc:
            raise ClusterFormatError(f"{path}:{lineno}: {exc}") from None
    return samples


def count_samples(path) -> int:
    with open(path) as fh:
        fh.readline()
        return sum(1 for line in fh if line.strip() and not line.lstrip().startswith("#"))


def load_manifest(path) -> DatasetManifest:
    """Read a newline-separated list of cluster files.

    Relative entries are resolved against the manifest's directory.
    """
    path = Path(path)
    base = path.parent
    files = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        p = Path(line)
        files.append(str(p if p.is_absolute() else base / p))
    if not files:
        raise ClusterFormatError(f"{path}: manifest lists no files")
    shape = read_shape(files[0])
    for f in files[1:]:
        if read_shape(f) != shape:
            raise ClusterFormatError(f"{f}: frame shape differs from {files[0]}")
    return DatasetManifest(tuple(files), tuple(count_samples(f) for f in files), shape)


def save_manifest(manifest: DatasetManifest, path) -> None:
    path = Path(path)
    base = path.parent.resolve()
    out = []
    for f in manifest.file_paths:
        p = Path(f).resolve()
        try:
            out.append(str(p.relative_to(base)))
        except ValueError:
            out.append(str(p))
    path.write_text("\n".join(out) + "\n")


def load_manifest_samples(manifest: DatasetManifest) -> list[ClusterSample]:
    out = []
    for f in manifest.file_paths:
        out.extend(load_dataset(f))
    return out


# ------------------------------------------------------------------ labelling etc.


def label(sample: ClusterSample, pt_cutoff: float) -> int:
    """1 (high pT) iff p_t is strictly above the cutoff."""
    if not pt_cutoff > 0:
        raise ValueError("pt_cutoff must be positive")
    return int(sample.p_t > pt_cutoff)


def labels(samples: Sequence[ClusterSample], pt_cutoff: float) -> np.ndarray:
    if not pt_cutoff > 0:
        raise ValueError("pt_cutoff must be positive")
    return np.array([s.p_t > pt_cutoff for s in samples], dtype=np.int64)


def split_by_files(manifest: DatasetManifest, test_fraction: float, seed: int):
    """Partition the manifest's files into (train, test) manifests.

    The test side gets ``round(test_fraction * n_files)`` files (at least one,
    and at least one file is always left for training).
    """
    n = len(manifest)
    if n < 2:
        raise ValueError("need at least 2 files to split")
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    n_test = min(max(1, int(round(test_fraction * n))), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    test_idx = sorted(perm[:n_test].tolist())
    train_idx = sorted(perm[n_test:].tolist())
    return manifest.subset(train_idx), manifest.subset(test_idx)


def balance_classes(samples: Sequence[ClusterSample], pt_cutoff: float, seed: int) -> list[ClusterSample]:
    """Down-sample the majority class to the minority count.

    Kept samples stay in their original relative order.
    """
    keep = balanced_indices([s.p_t for s in samples], pt_cutoff, seed)
    return [samples[i] for i in keep]


def balanced_indices(pts, pt_cutoff: float, seed: int) -> np.ndarray:
    """Sorted indices of a class-balanced subset, given per-sample p_t."""
    if not pt_cutoff > 0:
        raise ValueError("pt_cutoff must be positive")
    y = np.asarray(pts) > pt_cutoff
    hi = np.flatnonzero(y)
    lo = np.flatnonzero(~y)
    if len(hi) == 0 or len(lo) == 0:
        raise ValueError("both classes must be present to balance")
    rng = np.random.default_rng(seed)
    n = min(len(hi), len(lo))
    keep = np.concatenate([
        hi if len(hi) == n else rng.choice(hi, n, replace=False),
        lo if len(lo) == n else rng.choice(lo, n, replace=False),
    ])
    return np.sort(keep)


# ---------------------------------------------------------------- synthetic data


@dataclass(frozen=True)
class SyntheticConfig:
    """Parameters of the synthetic cluster generator.

    p_t follows a power-law tail ``P(p_t > p) = (pt_min / p) ** spectrum_index``
    truncated at ``pt_max``. The track's extent along y (rows) is
    ``1 + length_scale / p_t`` plus Gaussian jitter, so softer tracks are longer.
    """

    shape: tuple[int, int, int] = DEFAULT_SHAPE
    pt_min: float = 0.15
    pt_max: float = 20.0
    spectrum_index: float = 1.2
    length_scale: float = 3.0  # rows * GeV
    length_jitter: float = 0.5  # rows
    total_charge: float = 40000.0  # electrons
    charge_spread: float = 0.25  # lognormal sigma of per-row charge
    main_column_share: float = 0.8
    onset_slices: tuple[int, int] = (1, 3)
    rise_slices: int = 3
    induced_fall: float = 0.5  # side pixels relax to this fraction of their peak
    noise_sigma: float = 60.0  # electrons
    y0_range: tuple[float, float] = (-1.0, 1.0)
    charge_sign: int = 1

    def validate(self):
        rows, cols, slices = self.shape
        if min(rows, cols, slices) <= 0:
            raise ValueError("shape dimensions must be positive")
        if not 0 < self.pt_min < self.pt_max:
            raise ValueError("need 0 < pt_min < pt_max")
        if self.spectrum_index <= 0 or self.length_scale < 0 or self.length_jitter < 0:
            raise ValueError("spectrum_index must be > 0, length_scale and length_jitter >= 0")
        if self.total_charge <= 0 or self.charge_spread < 0 or self.noise_sigma < 0:
            raise ValueError("charges and spreads must be non-negative (total_charge > 0)")
        if not 0 < self.main_column_share <= 1 or not 0 <= self.induced_fall <= 1:
            raise ValueError("main_column_share must be in (0, 1], induced_fall in [0, 1]")
        lo, hi = self.onset_slices
        if not 0 <= lo <= hi < slices or self.rise_slices < 1:
            raise ValueError("onset_slices must lie within the frame and rise_slices >= 1")
        if self.y0_range[0] > self.y0_range[1]:
            raise ValueError("y0_range is reversed")
        if self.charge_sign not in (1, -1):
            raise ValueError("charge_sign must be +1 or -1")


def sample_pt(n: int, rng: np.random.Generator, config: SyntheticConfig = SyntheticConfig()) -> np.ndarray:
    a, lo, hi = config.spectrum_index, config.pt_min, config.pt_max
    # inverse CDF of a power law truncated to [lo, hi]
    u = rng.random(n)
    tail = 1.0 - (lo / hi) ** a
    return lo * (1.0 - u * tail) ** (-1.0 / a)


def _render(rng, config: SyntheticConfig, p_t: float, y0: float) -> np.ndarray:
    rows, cols, slices = config.shape
    frame = np.zeros((slices, rows, cols))

    length = 1.0 + config.length_scale / p_t + rng.normal(0.0, config.length_jitter)
    n_rows = int(np.clip(np.rint(length), 1, rows))
    lo_y0, hi_y0 = config.y0_range
    span = max(hi_y0 - lo_y0, 1e-12)
    shift = int(np.rint((y0 - 0.5 * (lo_y0 + hi_y0)) / span * 2))  # -1, 0 or +1 row
    first = int(np.clip(rows // 2 - n_rows // 2 + shift, 0, rows - n_rows))
    col = int(np.clip(cols // 2 + rng.integers(-1, 2), 0, cols - 1))

    per_row = config.total_charge / n_rows * rng.lognormal(0.0, config.charge_spread, n_rows)
    onset = rng.integers(config.onset_slices[0], config.onset_slices[1] + 1)
    t = np.arange(slices)
    side = 0.5 * (1.0 - config.main_column_share)
    for i in range(n_rows):
        t0 = onset + rng.integers(0, 2)
        ramp = np.clip((t - t0 + 1) / config.rise_slices, 0.0, 1.0)
        r = first + i
        frame[:, r, col] += config.main_column_share * per_row[i] * ramp
        # induced charge on neighbours peaks with the ramp then relaxes
        peak = t0 + config.rise_slices - 1
        relax = np.where(t <= peak, ramp, config.induced_fall + (1 - config.induced_fall)
                         * np.exp(-(t - peak) / 2.0))
        for c in (col - 1, col + 1):
            if 0 <= c < cols:
                frame[:, r, c] += side * per_row[i] * relax
    if config.noise_sigma > 0:
        frame += rng.normal(0.0, config.noise_sigma, frame.shape)
    return np.rint(np.clip(frame, 0.0, None)).astype(np.float32)


def generate_synthetic(n: int, seed: int, config: SyntheticConfig = SyntheticConfig()) -> list[ClusterSample]:
    """Generate ``n`` synthetic clusters.

    This is a desk-scale stand-in for simulated sensor data, not a physics
    simulation: the only structure it guarantees is that lower-p_t tracks
    spread over more rows, that charge builds up over several time slices,
    and that p_t follows a falling spectrum starting at ``pt_min``.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    config.validate()
    rng = np.random.default_rng(seed)
    pts = sample_pt(n, rng, config)
    y0s = rng.uniform(*config.y0_range, n)
    return [
        ClusterSample(_render(rng, config, float(p), float(y)), float(p), float(y), config.charge_sign)
        for p, y in zip(pts, y0s)
    ]


def write_synthetic_files(out_dir, n_samples: int, n_files: int, seed: int,
                          config: SyntheticConfig = SyntheticConfig()) -> DatasetManifest:
    """Generate a dataset split across ``n_files`` files plus ``manifest.txt``."""
    if n_files < 1 or n_samples < n_files:
        raise ValueError("need n_files >= 1 and at least one sample per file")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    samples = generate_synthetic(n_samples, seed, config)
    bounds = np.linspace(0, n_samples, n_files + 1).astype(int)
    paths = []
    for i in range(n_files):
        p = out_dir / f"clusters_{i:03d}.csv"
        save_dataset(samples[bounds[i]:bounds[i + 1]], p, config.shape)
        paths.append(str(p))
    manifest = DatasetManifest(tuple(paths), tuple(np.diff(bounds).tolist()), config.shape)
    save_manifest(manifest, out_dir / "manifest.txt")
    return manifest
