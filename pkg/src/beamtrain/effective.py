"""From the omni channel to the 2x2 effective channel seen by baseband.

Applying a beam per array turns the beam-independent ray set into an
effective impulse response: each ray is weighted by the transmit gain toward
its departure direction and the receive gain toward its arrival direction.
Because the omni channel is a sum of Dirac taps, the spatial filtering
integral collapses to that per-ray weighting. Discretization bins rays to
the sample grid (nearest sample), and an FFT gives the per-subcarrier
transfer function.

``LinkSpectra`` precomputes the transfer function of every (array pair,
TX beam, RX beam) combination once per channel realization. Any beam
selection's 2x2 effective transfer function is then a cheap lookup, which is
what makes exhaustive search over all beam combinations tractable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .antenna import Codebook, unit_vectors
from .channel import OmniChannel, flatten_rays

INITIATOR = "initiator"
RESPONDER = "responder"


@dataclass(frozen=True)
class BeamSelection:
    """Codebook indices per array: tx[m] steers TX array m, rx[n] steers RX array n."""

    tx: tuple[int, ...]
    rx: tuple[int, ...]

    def as_tuple(self) -> tuple[int, ...]:
        return (*self.tx, *self.rx)


@dataclass(frozen=True)
class WeightedRays:
    """Rays of the effective channel: per ray, one weighted amplitude per link (n, m)."""

    delays: np.ndarray  # (n_rays,)
    amps: np.ndarray  # (n_rays, 2, 2)


@dataclass(frozen=True)
class DiscreteCIR:
    """Sampled 2x2 impulse response plus the energy lost to the tap window."""

    taps: np.ndarray  # (n_taps, 2, 2) complex
    sample_rate: float
    dropped_energy: float = 0.0


@dataclass(frozen=True)
class TransferFunction:
    """Per-subcarrier 2x2 channel matrices, shape (n_sub, 2, 2)."""

    values: np.ndarray


def _check_indices(sel: BeamSelection, cb: Codebook) -> None:
    for idx in (*sel.tx, *sel.rx):
        if not 0 <= idx < len(cb):
            raise IndexError(f"beam index {idx} out of range for codebook of length {len(cb)}")


def _beam_gains(pattern, beams_xyz: np.ndarray, ray_az: np.ndarray, ray_pol: np.ndarray):
    """Pattern gain of each beam toward each ray; shape (n_beams, n_rays).

    Single shared implementation so every evaluation path (per-selection
    filtering, beam scores, the spectra cache) produces bit-identical gains.
    """
    rays_xyz = unit_vectors(ray_az, ray_pol)  # (R, 3)
    dots = (
        beams_xyz[:, 0:1] * rays_xyz[:, 0]
        + beams_xyz[:, 1:2] * rays_xyz[:, 1]
        + beams_xyz[:, 2:3] * rays_xyz[:, 2]
    )
    offsets = np.arccos(np.clip(dots, -1.0, 1.0))
    return pattern.gain(offsets)


def apply_beamforming(
    ch: OmniChannel, sel: BeamSelection, cb: Codebook, pattern, rx_pattern=None
) -> WeightedRays:
    """Weight every ray of every link by the selected TX and RX beam gains.

    With unit-gain patterns on both sides this reproduces the omni channel
    unchanged. ``rx_pattern`` defaults to the TX pattern (symmetric arrays).
    """
    _check_indices(sel, cb)
    if rx_pattern is None:
        rx_pattern = pattern
    delays, amps, aod_az, aod_pol, aoa_az, aoa_pol = flatten_rays(ch)
    beams_xyz = cb.unit_vectors()
    g_tx = _beam_gains(pattern, beams_xyz[list(sel.tx)], aod_az, aod_pol)  # (n_rf, R)
    g_rx = _beam_gains(rx_pattern, beams_xyz[list(sel.rx)], aoa_az, aoa_pol)  # (n_rf, R)
    # weighted[r, n, m] = amps[r, n, m] * g_tx[m, r] * g_rx[n, r]
    weighted = amps * g_tx.T[:, None, :] * g_rx.T[:, :, None]
    return WeightedRays(delays=delays, amps=weighted)


def discretize(rays: WeightedRays, f_s: float, n_taps: int) -> DiscreteCIR:
    """Bin rays onto the sample grid at rate f_s (nearest sample, ties to even).

    Rays landing beyond the last tap are dropped; their energy (summed over
    all four links) is reported so truncation is never silent.
    """
    if f_s <= 0:
        raise ValueError(f"f_s must be positive, got {f_s}")
    if n_taps < 1:
        raise ValueError(f"n_taps must be >= 1, got {n_taps}")
    bins = np.rint(rays.delays * f_s).astype(np.int64)
    keep = bins < n_taps
    taps = np.zeros((n_taps, 2, 2), dtype=complex)
    np.add.at(taps, bins[keep], rays.amps[keep])
    dropped = float(np.sum(np.abs(rays.amps[~keep]) ** 2))
    return DiscreteCIR(taps=taps, sample_rate=f_s, dropped_energy=dropped)


def transfer_function(cir: DiscreteCIR, n_sub: int) -> TransferFunction:
    """n_sub-point DFT of the (zero-padded) tap sequence, per matrix entry."""
    n_taps = cir.taps.shape[0]
    if n_sub < n_taps:
        raise ValueError(f"n_sub={n_sub} must be >= tap count {n_taps}")
    if n_sub & (n_sub - 1) != 0:
        raise ValueError(f"n_sub must be a power of two, got {n_sub}")
    return TransferFunction(values=np.fft.fft(cir.taps, n=n_sub, axis=0))


def beam_score(
    ch: OmniChannel,
    side: str,
    paa: int,
    beam: int,
    cb: Codebook,
    pattern,
    f_s: float = 2.56e9,
    n_taps: int = 128,
) -> float:
    """Received power of one beam-to-omni sweep measurement (the RSSI metric).

    The sweeping side applies the directive beam (initiator sweeps over
    departure angles, responder over arrival angles); the listening side is
    quasi-omni; only the direct link of array ``paa`` contributes. Returns
    the summed tap power of the resulting single-link CIR.
    """
    scores = beam_score_set(ch, cb, pattern, f_s=f_s, n_taps=n_taps)
    if side == INITIATOR:
        return float(scores[0][paa, beam])
    if side == RESPONDER:
        return float(scores[1][paa, beam])
    raise ValueError(f"side must be {INITIATOR!r} or {RESPONDER!r}, got {side!r}")


def beam_score_set(
    ch: OmniChannel, cb: Codebook, pattern, f_s: float = 2.56e9, n_taps: int = 128
) -> tuple[np.ndarray, np.ndarray]:
    """All sweep measurements at once: (initiator, responder) score arrays.

    Each array has shape (2, len(cb)); initiator scores rank TX beams of the
    direct link of each array, responder scores rank RX beams.
    """
    delays, amps, aod_az, aod_pol, aoa_az, aoa_pol = flatten_rays(ch)
    beams_xyz = cb.unit_vectors()
    g_tx = _beam_gains(pattern, beams_xyz, aod_az, aod_pol)  # (L, R)
    g_rx = _beam_gains(pattern, beams_xyz, aoa_az, aoa_pol)
    bins = np.rint(delays * f_s).astype(np.int64)
    keep = bins < n_taps

    out = []
    for gains in (g_tx, g_rx):
        scores = np.empty((2, len(cb)))
        for n in range(2):
            w = amps[:, n, n]  # direct link only
            taps = np.zeros((len(cb), n_taps), dtype=complex)
            np.add.at(taps, (slice(None), bins[keep]), w[keep] * gains[:, keep])
            scores[n] = np.sum(taps.real**2 + taps.imag**2, axis=1)
        out.append(scores)
    return out[0], out[1]


class LinkSpectra:
    """Per-realization cache of every beam pair's link transfer functions.

    ``spectra[n, m, t, r]`` is the length-n_sub transfer function of the link
    from TX array m (steered by codebook entry t) to RX array n (steered by
    codebook entry r). Built once per channel; read-only afterwards.
    """

    def __init__(
        self,
        ch: OmniChannel,
        cb: Codebook,
        pattern,
        f_s: float = 2.56e9,
        n_taps: int = 128,
        n_sub: int = 512,
    ):
        if n_sub < n_taps:
            raise ValueError(f"n_sub={n_sub} must be >= n_taps={n_taps}")
        delays, amps, aod_az, aod_pol, aoa_az, aoa_pol = flatten_rays(ch)
        beams_xyz = cb.unit_vectors()
        g_tx = _beam_gains(pattern, beams_xyz, aod_az, aod_pol)  # (L, R)
        g_rx = _beam_gains(pattern, beams_xyz, aoa_az, aoa_pol)
        bins = np.rint(delays * f_s).astype(np.int64)
        keep = bins < n_taps
        self.dropped_energy = float(np.sum(np.abs(amps[~keep]) ** 2))

        L = len(cb)
        taps = np.zeros((2, 2, L, L, n_taps), dtype=complex)
        kb = bins[keep]
        for n in range(2):
            for m in range(2):
                w = amps[keep, n, m]  # (R,)
                contrib = w * g_tx[:, None, keep] * g_rx[None, :, keep]  # (L, L, R)
                np.add.at(taps[n, m], (slice(None), slice(None), kb), contrib)
        self.spectra = np.fft.fft(taps, n=n_sub, axis=-1)
        self.n_sub = n_sub
        self.codebook_len = L
        self.sample_rate = f_s

    def transfer(self, sel: BeamSelection) -> TransferFunction:
        """Assemble the (n_sub, 2, 2) transfer function of one beam selection."""
        out = np.empty((self.n_sub, 2, 2), dtype=complex)
        for n in range(2):
            for m in range(2):
                out[:, n, m] = self.spectra[n, m, sel.tx[m], sel.rx[n]]
        return TransferFunction(values=out)
