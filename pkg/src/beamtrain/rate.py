"""Per-subcarrier MIMO rate of an effective transfer function.

The figure of merit for a beam combination is the average over subcarriers
of log2 det(I + (rho / n_rf) * H Hᴴ): the open-loop capacity with equal
power split across the spatial streams, at average SNR ``rho`` per receive
array. For the 2x2 matrices used throughout, the determinant is evaluated in
closed form (no decomposition in the hot path).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .effective import TransferFunction


@dataclass(frozen=True)
class RateConfig:
    rho: float  # linear SNR per receive array
    n_rf: int = 2
    n_sub: int = 512
    # How rho combines with the stream count: "divide" = equal power split
    # across n_rf streams (the default), "multiply" = total array SNR. The
    # choice rescales every strategy identically, so relative comparisons
    # are unaffected either way.
    snr_convention: str = "divide"

    def __post_init__(self) -> None:
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.n_rf < 1:
            raise ValueError(f"n_rf must be >= 1, got {self.n_rf}")
        if self.n_sub < 1:
            raise ValueError(f"n_sub must be >= 1, got {self.n_sub}")
        if self.snr_convention not in ("divide", "multiply"):
            raise ValueError(f"snr_convention must be 'divide' or 'multiply', got {self.snr_convention!r}")

    @property
    def snr_factor(self) -> float:
        if self.snr_convention == "divide":
            return self.rho / self.n_rf
        return self.rho * self.n_rf


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def rate_kernel(h11, h12, h21, h22, snr_factor: float):
    """Subcarrier-averaged log2 det(I + c H Hᴴ) from the four link spectra.

    Inputs are complex arrays whose last axis runs over subcarriers; any
    leading batch axes are preserved. For a 2x2 H, det(I + c H Hᴴ) =
    1 + c tr(H Hᴴ) + c² |det H|². Shared by every rate evaluation path so
    batched searches and single evaluations agree bit-for-bit.
    """
    c = snr_factor
    power = (
        (h11.real**2 + h11.imag**2)
        + (h12.real**2 + h12.imag**2)
        + (h21.real**2 + h21.imag**2)
        + (h22.real**2 + h22.imag**2)
    )
    det = h11 * h22 - h12 * h21
    det_sq = det.real**2 + det.imag**2
    return np.log2(1.0 + c * power + (c * c) * det_sq).mean(axis=-1)


def mimo_rate(tf: TransferFunction | np.ndarray, cfg: RateConfig) -> float:
    """Rate in bits/s/Hz of one 2x2 effective transfer function."""
    values = tf.values if isinstance(tf, TransferFunction) else np.asarray(tf)
    if values.shape != (cfg.n_sub, 2, 2):
        raise ValueError(f"expected transfer function of shape ({cfg.n_sub}, 2, 2), got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("transfer function contains non-finite entries")
    return float(
        rate_kernel(
            values[:, 0, 0],
            values[:, 0, 1],
            values[:, 1, 0],
            values[:, 1, 1],
            cfg.snr_factor,
        )
    )
