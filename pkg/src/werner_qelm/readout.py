"""Linear readout trained by Moore-Penrose pseudo-inverse."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PINV_RCOND = 1e-12


@dataclass(frozen=True)
class CalibrationPoint:
    raw_prediction: float
    known_target: float

    def __post_init__(self):
        if self.raw_prediction == 0.0:
            raise ValueError("calibration raw prediction is zero; cannot rescale")

    @property
    def scale(self) -> float:
        return self.known_target / self.raw_prediction


def fit_readout(x: np.ndarray, y: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Least-squares weights ``w = X⁺ y``.

    The pseudo-inverse is taken from the SVD with singular values below
    ``1e-12 * s_max`` discarded, so rank-deficient designs give the
    minimum-norm solution. ``ridge > 0`` adds a Tikhonov penalty.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"design matrix must be 2-D with at least one row, got {x.shape}")
    if y.shape != (x.shape[0],):
        raise ValueError(f"targets shape {y.shape} does not match {x.shape[0]} rows")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if ridge > 0.0:
        filt = s / (s**2 + ridge)
    else:
        keep = s > PINV_RCOND * (s[0] if s.size else 0.0)
        filt = np.zeros_like(s)
        filt[keep] = 1.0 / s[keep]
    return vt.T @ (filt * (u.T @ y))


def predict(weights: np.ndarray, features: np.ndarray) -> np.ndarray | float:
    """Inner product of weights with one feature vector or each row of a matrix."""
    features = np.asarray(features, dtype=float)
    if features.shape[-1] != len(weights):
        raise ValueError(f"{features.shape[-1]} features but {len(weights)} weights")
    out = features @ weights
    return float(out) if out.ndim == 0 else out


def mean_squared_error(predictions, targets) -> float:
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {targets.shape}")
    if predictions.size == 0:
        raise ValueError("empty input")
    return float(np.mean((predictions - targets) ** 2))


def dress_predictions(raw, cal: CalibrationPoint) -> np.ndarray:
    """Rescale raw predictions so the calibration element hits its known target."""
    return np.asarray(raw, dtype=float) * cal.scale
