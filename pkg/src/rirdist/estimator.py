"""Linear speaker-distance estimation from RIR descriptors.

A five-descriptor feature vector (plus bias) feeds a standardized linear
model trained by full-batch gradient descent on the squared-error
objective. Training is deliberately boring: zero initialization and a
fixed epoch count, so every run is exactly reproducible; the update uses
the gradient of the summed squared error, which is what lets the small
supported learning-rate range actually converge on dataset-sized
problems. Reported losses are per-sample (mean squared error).
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .acoustics import RIRecording, analyze_rir

FEATURE_NAMES = (
    "drr_db",
    "log_t60",
    "direct_delay_ms",
    "early_late_ratio_db",
    "total_energy_db",
    "bias",
)
FEATURE_SCHEMA_VERSION = 1
EARLY_LATE_SPLIT_S = 0.050    # energy before/after 50 ms past the direct path

LEARNING_RATE_RANGE = (1e-5, 1e-3)
EPOCH_RANGE = (5, 50)
DEFAULT_LR_GRID = (1e-5, 1e-4, 1e-3)
DEFAULT_EPOCH_GRID = (5, 10, 20, 50)

DISTANCE_BUCKETS = ((0.0, 1.0), (1.0, 3.0), (3.0, 5.0), (5.0, math.inf))
HIST_BIN_WIDTH_M = 0.5
_MAX_HIST_BINS = 10000


@dataclass(frozen=True)
class FeatureVector:
    drr_db: float
    log_t60: float                # natural log of T60 in seconds
    direct_delay_ms: float
    early_late_ratio_db: float
    total_energy_db: float        # physical energy, folds norm_gain back in
    bias: float = 1.0

    def as_array(self) -> np.ndarray:
        return np.array([self.drr_db, self.log_t60, self.direct_delay_ms,
                         self.early_late_ratio_db, self.total_energy_db, self.bias])


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    epochs: int
    seed: int = 0   # reserved for non-zero initialization modes; zeros today


@dataclass(frozen=True)
class EstimatorModel:
    weights: np.ndarray
    feature_means: np.ndarray
    feature_stds: np.ndarray
    train_config: TrainConfig
    final_loss: float | None = None    # mean squared error after the last epoch

    def to_json_dict(self) -> dict:
        return {
            "feature_schema_version": FEATURE_SCHEMA_VERSION,
            "feature_names": list(FEATURE_NAMES),
            "weights": [float(w) for w in self.weights],
            "feature_means": [float(m) for m in self.feature_means],
            "feature_stds": [float(s) for s in self.feature_stds],
            "train_config": {
                "learning_rate": float(self.train_config.learning_rate),
                "epochs": int(self.train_config.epochs),
                "seed": int(self.train_config.seed),
            },
            "final_loss": None if self.final_loss is None else float(self.final_loss),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "EstimatorModel":
        if data.get("feature_schema_version") != FEATURE_SCHEMA_VERSION:
            raise ValueError(
                f"feature schema {data.get('feature_schema_version')!r} does not match "
                f"version {FEATURE_SCHEMA_VERSION}"
            )
        if tuple(data.get("feature_names", ())) != FEATURE_NAMES:
            raise ValueError("feature name list does not match this model family")
        cfg = data["train_config"]
        return cls(
            weights=np.asarray(data["weights"], dtype=np.float64),
            feature_means=np.asarray(data["feature_means"], dtype=np.float64),
            feature_stds=np.asarray(data["feature_stds"], dtype=np.float64),
            train_config=TrainConfig(cfg["learning_rate"], cfg["epochs"], cfg.get("seed", 0)),
            final_loss=data.get("final_loss"),
        )


@dataclass(frozen=True)
class RangeMae:
    lo_m: float
    hi_m: float           # math.inf for the open top bucket
    mae_m: float | None   # None when the bucket is empty
    n: int


@dataclass(frozen=True)
class EvalReport:
    mae_m: float
    pearson_r: float | None          # None when either side has zero variance
    per_range: tuple[RangeMae, ...]
    n_samples: int
    hist_bin_width_m: float
    truth_histogram: tuple[int, ...]
    predicted_histogram: tuple[int, ...]
    true_m: np.ndarray               # per-sample truths, for the CSV artifact
    predicted_m: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "n_samples": int(self.n_samples),
            "mae_m": float(self.mae_m),
            "pearson_r": None if self.pearson_r is None else float(self.pearson_r),
            "per_range": [
                {
                    "lo_m": bucket.lo_m,
                    "hi_m": None if math.isinf(bucket.hi_m) else bucket.hi_m,
                    "mae_m": bucket.mae_m,
                    "n": bucket.n,
                }
                for bucket in self.per_range
            ],
            "histogram": {
                "bin_width_m": self.hist_bin_width_m,
                "truth_counts": list(self.truth_histogram),
                "predicted_counts": list(self.predicted_histogram),
            },
        }


def extract_features(rir: RIRecording) -> FeatureVector:
    """Descriptor vector of one RIR; no standardization happens here."""
    metrics = analyze_rir(rir)
    samples = rir.samples
    split = metrics.direct_index + round(EARLY_LATE_SPLIT_S * rir.sample_rate)
    early = samples[metrics.direct_index:split]
    late = samples[split:]
    early_energy = float(early @ early)
    late_energy = float(late @ late)
    floor = float(samples @ samples) * 1e-12
    ratio_db = 10.0 * (math.log10(max(early_energy, floor)) -
                       math.log10(max(late_energy, floor)))
    return FeatureVector(
        drr_db=metrics.drr_db,
        log_t60=math.log(metrics.t60_s),
        direct_delay_ms=metrics.direct_index / rir.sample_rate * 1000.0,
        early_late_ratio_db=ratio_db,
        total_energy_db=metrics.total_energy_db,
        bias=1.0,
    )


def _stack(dataset: Sequence[tuple[FeatureVector, float]]) -> tuple[np.ndarray, np.ndarray]:
    features = np.stack([pair[0].as_array() for pair in dataset])
    targets = np.asarray([float(pair[1]) for pair in dataset])
    return features, targets


def sse_loss_and_gradient(features: np.ndarray, targets: np.ndarray,
                          weights: np.ndarray) -> tuple[float, np.ndarray]:
    """Summed squared error and its analytic gradient 2 X^T (Xw - y)."""
    residual = features @ weights - targets
    return float(residual @ residual), 2.0 * (features.T @ residual)


def _check_ranges(config: TrainConfig) -> None:
    lo, hi = LEARNING_RATE_RANGE
    if not lo <= config.learning_rate <= hi:
        raise ValueError(
            f"learning_rate {config.learning_rate} outside [{lo}, {hi}] "
            f"(pass enforce_ranges=False to override)"
        )
    lo, hi = EPOCH_RANGE
    if not lo <= config.epochs <= hi:
        raise ValueError(
            f"epochs {config.epochs} outside [{lo}, {hi}] "
            f"(pass enforce_ranges=False to override)"
        )


def standardize_stats(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means/stds for standardization.

    Degenerate (zero-variance) columns get their std clamped to 1 with a
    warning; the trailing bias column passes through untouched (mean 0,
    std 1) so the model keeps its intercept.
    """
    means = features.mean(axis=0)
    stds = features.std(axis=0)
    degenerate = np.nonzero(stds <= 0.0)[0]
    informative = [i for i in degenerate if i != features.shape[1] - 1]
    if informative:
        names = [FEATURE_NAMES[i] if i < len(FEATURE_NAMES) else str(i) for i in informative]
        warnings.warn(f"zero-variance feature column(s) {names}; std clamped to 1",
                      stacklevel=3)
    stds[degenerate] = 1.0
    means[-1] = 0.0
    stds[-1] = 1.0
    return means, stds


def train(dataset: Sequence[tuple[FeatureVector, float]], config: TrainConfig,
          *, enforce_ranges: bool = True) -> EstimatorModel:
    """Fit the linear model by full-batch gradient descent.

    Runs exactly ``config.epochs`` update steps from zero weights on the
    standardized design matrix; each step follows the gradient of the
    summed squared error (the effective step therefore scales with the
    dataset size). The supported hyperparameter ranges are enforced
    unless ``enforce_ranges=False``.
    """
    if len(dataset) == 0:
        raise ValueError("training dataset is empty")
    if config.epochs < 0:
        raise ValueError("epochs must be non-negative")
    if enforce_ranges:
        _check_ranges(config)

    features, targets = _stack(dataset)
    means, stds = standardize_stats(features)
    design = (features - means) / stds

    weights = np.zeros(features.shape[1])
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(config.epochs):
            _, gradient = sse_loss_and_gradient(design, targets, weights)
            weights = weights - config.learning_rate * gradient
        final_sse, _ = sse_loss_and_gradient(design, targets, weights)
    return EstimatorModel(
        weights=weights,
        feature_means=means,
        feature_stds=stds,
        train_config=config,
        final_loss=final_sse / len(dataset),
    )


def predict(model: EstimatorModel, features: FeatureVector) -> float:
    """Distance prediction in meters, clamped below at zero.

    Non-finite raw predictions pass through unclamped (``max(0.0, nan)``
    would otherwise hide a diverged model behind an innocent 0.0), so
    downstream finiteness guards can see them.
    """
    x = features.as_array()
    if x.shape != model.weights.shape:
        raise ValueError(
            f"feature dimension {x.shape[0]} does not match model "
            f"dimension {model.weights.shape[0]}"
        )
    z = (x - model.feature_means) / model.feature_stds
    raw = float(z @ model.weights)
    if not math.isfinite(raw):
        return raw
    return max(0.0, raw)


def _predictions(model: EstimatorModel,
                 dataset: Sequence[tuple[FeatureVector, float]]) -> tuple[np.ndarray, np.ndarray]:
    truths = np.asarray([float(pair[1]) for pair in dataset])
    preds = np.asarray([predict(model, pair[0]) for pair in dataset])
    return truths, preds


def _validation_mae(model: EstimatorModel,
                    dataset: Sequence[tuple[FeatureVector, float]]) -> float:
    truths, preds = _predictions(model, dataset)
    return float(np.mean(np.abs(preds - truths)))


def evaluate(model: EstimatorModel,
             testset: Sequence[tuple[FeatureVector, float]]) -> EvalReport:
    """MAE, Pearson correlation, per-range MAE, and 0.5 m histograms."""
    if len(testset) == 0:
        raise ValueError("evaluation set is empty")
    truths, preds = _predictions(model, testset)
    if not np.all(np.isfinite(preds)):
        raise ValueError("model produced non-finite predictions")
    residuals = preds - truths
    mae = float(np.mean(np.abs(residuals)))

    pearson = None
    if np.std(truths) > 0.0 and np.std(preds) > 0.0:
        pearson = float(np.corrcoef(truths, preds)[0, 1])

    per_range = []
    for lo, hi in DISTANCE_BUCKETS:
        mask = (truths >= lo) & (truths < hi)
        count = int(np.count_nonzero(mask))
        bucket_mae = float(np.mean(np.abs(residuals[mask]))) if count else None
        per_range.append(RangeMae(lo_m=lo, hi_m=hi, mae_m=bucket_mae, n=count))

    top = float(max(truths.max(), preds.max()))
    n_bins = max(1, math.ceil(top / HIST_BIN_WIDTH_M))
    if n_bins > _MAX_HIST_BINS:
        raise ValueError(f"prediction range up to {top:.3g} m is too wide to histogram")
    edges = np.arange(n_bins + 1) * HIST_BIN_WIDTH_M
    truth_hist, _ = np.histogram(truths, bins=edges)
    pred_hist, _ = np.histogram(preds, bins=edges)

    return EvalReport(
        mae_m=mae,
        pearson_r=pearson,
        per_range=tuple(per_range),
        n_samples=len(testset),
        hist_bin_width_m=HIST_BIN_WIDTH_M,
        truth_histogram=tuple(int(c) for c in truth_hist),
        predicted_histogram=tuple(int(c) for c in pred_hist),
        true_m=truths,
        predicted_m=preds,
    )


@dataclass(frozen=True)
class GridCell:
    learning_rate: float
    epochs: int
    val_mae_m: float | None
    final_loss: float | None
    error: str | None = None


def grid_search(train_set: Sequence[tuple[FeatureVector, float]],
                val_set: Sequence[tuple[FeatureVector, float]],
                lr_grid: Sequence[float] = DEFAULT_LR_GRID,
                epoch_grid: Sequence[int] = DEFAULT_EPOCH_GRID,
                *, seed: int = 0,
                enforce_ranges: bool = True) -> tuple[TrainConfig, list[GridCell]]:
    """Exhaustive sweep over the (learning rate, epochs) grid.

    Returns the winning config plus the full audit table. A cell that
    blows up (divergence, non-finite validation error) is recorded with
    its error and skipped during selection; ties break toward fewer
    epochs, then the smaller learning rate.
    """
    if len(lr_grid) == 0 or len(epoch_grid) == 0:
        raise ValueError("both grids must be non-empty")
    cells: list[GridCell] = []
    best: tuple | None = None
    for lr in lr_grid:
        for epochs in epoch_grid:
            config = TrainConfig(learning_rate=float(lr), epochs=int(epochs), seed=seed)
            try:
                model = train(train_set, config, enforce_ranges=enforce_ranges)
                val_mae = _validation_mae(model, val_set)
                if not math.isfinite(val_mae):
                    raise ArithmeticError(f"non-finite validation MAE {val_mae}")
            except Exception as exc:   # a broken cell must not sink the sweep
                cells.append(GridCell(float(lr), int(epochs), None, None, str(exc)))
                continue
            cells.append(GridCell(float(lr), int(epochs), val_mae, model.final_loss))
            key = (val_mae, int(epochs), float(lr))
            if best is None or key < best[0]:
                best = (key, config)
    if best is None:
        raise RuntimeError("every grid cell failed; see the returned table")
    return best[1], cells


def split_dataset(dataset: Sequence, train_fraction: float = 0.8,
                  seed: int = 0) -> tuple[list, list]:
    """Deterministic shuffled split; sizes land within one of the exact fractions."""
    n = len(dataset)
    if n < 5:
        raise ValueError(f"need at least 5 samples to split, got {n}")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    order = np.random.default_rng(seed).permutation(n)
    n_train = min(n - 1, max(1, round(n * train_fraction)))
    train_part = [dataset[i] for i in order[:n_train]]
    held_part = [dataset[i] for i in order[n_train:]]
    return train_part, held_part
