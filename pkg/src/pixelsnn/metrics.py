"""Physics-facing classifier metrics: signal efficiency, data reduction, turn-on curves."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

NORMALIZATIONS = ("all", "low_only")
PT_REFERENCE = 2.0  # GeV


def _arrays(predictions, pts):
    pred = np.asarray(predictions).astype(bool)
    pts = np.asarray(pts, dtype=float)
    if pred.shape != pts.shape:
        raise ValueError("predictions and pts must have equal length")
    if pred.size == 0:
        raise ValueError("no samples")
    return pred, pts


def signal_efficiency(predictions, pts, pt_ref: float = PT_REFERENCE) -> float:
    """Fraction of samples with p_t > pt_ref that were predicted high."""
    pred, pts = _arrays(predictions, pts)
    signal = pts > pt_ref
    if not signal.any():
        raise ValueError(f"no samples with p_t > {pt_ref} GeV")
    return float(np.count_nonzero(pred & signal) / np.count_nonzero(signal))


def data_reduction(predictions, pts, pt_ref: float = PT_REFERENCE, normalization: str = "all") -> float:
    """Fraction of samples correctly discarded as low p_t.

    With ``normalization="all"`` the count is divided by every sample, with
    ``"low_only"`` by the samples whose p_t is below pt_ref.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    pred, pts = _arrays(predictions, pts)
    low = pts < pt_ref
    kept_out = np.count_nonzero(~pred & low)
    if normalization == "all":
        return float(kept_out / pred.size)
    return float(kept_out / np.count_nonzero(low)) if low.any() else 0.0


def f1_score(predictions, truths) -> float:
    pred = np.asarray(predictions).astype(bool)
    true = np.asarray(truths).astype(bool)
    if pred.shape != true.shape or pred.size == 0:
        raise ValueError("need equal-length, non-empty predictions and truths")
    tp = np.count_nonzero(pred & true)
    fp = np.count_nonzero(pred & ~true)
    fn = np.count_nonzero(~pred & true)
    denom = 2 * tp + fp + fn
    return float(2 * tp / denom) if denom else 0.0


def balanced_accuracy(predictions, truths) -> float:
    """Mean per-class recall over the classes present in ``truths``."""
    pred = np.asarray(predictions)
    true = np.asarray(truths)
    recalls = [np.mean(pred[true == c] == c) for c in np.unique(true)]
    return float(np.mean(recalls))


@dataclass(frozen=True)
class EvalReport:
    signal_efficiency: float
    data_reduction: float
    accuracy: float
    f1: float
    n_samples: int
    pt_reference: float = PT_REFERENCE
    normalization: str = "all"

    def to_text(self) -> str:
        return "".join(f"{k}={v!r}\n" if isinstance(v, float) else f"{k}={v}\n" for k, v in vars(self).items())

    @classmethod
    def from_text(cls, text: str) -> "EvalReport":
        kv = dict(line.split("=", 1) for line in text.splitlines() if "=" in line)
        return cls(
            float(kv["signal_efficiency"]), float(kv["data_reduction"]), float(kv["accuracy"]),
            float(kv["f1"]), int(kv["n_samples"]), float(kv["pt_reference"]), kv["normalization"],
        )


def evaluate_predictions(predictions, pts, pt_cutoff: float, pt_ref: float = PT_REFERENCE,
                         normalization: str = "all") -> EvalReport:
    """Full report; accuracy and F1 are judged against labels at ``pt_cutoff``."""
    pred, pts = _arrays(predictions, pts)
    truths = pts > pt_cutoff
    return EvalReport(
        signal_efficiency=signal_efficiency(pred, pts, pt_ref),
        data_reduction=data_reduction(pred, pts, pt_ref, normalization),
        accuracy=float(np.mean(pred == truths)),
        f1=f1_score(pred, truths),
        n_samples=int(pred.size),
        pt_reference=pt_ref,
        normalization=normalization,
    )


@dataclass(frozen=True, eq=False)
class TurnOnCurve:
    bin_edges: np.ndarray
    efficiency: np.ndarray  # 0.0 where a bin is empty
    counts: np.ndarray
    populated: np.ndarray  # False marks empty bins

    def to_csv(self) -> str:
        lines = ["bin_low,bin_high,count,efficiency"]
        for lo, hi, n, e in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts, self.efficiency):
            lines.append(f"{float(lo)!r},{float(hi)!r},{int(n)},{float(e)!r}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())


def turn_on_curve(predictions, pts, bin_edges) -> TurnOnCurve:
    """Per-bin fraction of samples predicted high, binned in true p_t.

    Bins are half-open [lo, hi) except the last, which includes its upper
    edge. Samples outside the edges are dropped.
    """
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("need at least two bin edges")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    pred, pts = _arrays(predictions, pts)
    counts, _ = np.histogram(pts, edges)
    passed, _ = np.histogram(pts[pred], edges)
    populated = counts > 0
    eff = np.divide(passed, counts, out=np.zeros(len(counts)), where=populated)
    return TurnOnCurve(edges, eff, counts, populated)
