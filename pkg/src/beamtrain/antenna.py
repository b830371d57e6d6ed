"""Beam patterns and codebooks for phased-array front ends.

Each array is abstracted as a single steerable beam with a Gaussian gain
profile (linear scale, rotationally symmetric about the beam axis), plus a
unit-gain quasi-omni pattern used on the listening side of a sector sweep.
The codebook is a fixed set of beam directions covering a spherical sector
with concentric staggered rings (hexagonal packing); the default layout of
rings (1, 6, 12) over a 90 degree sector gives the 19-sector codebook.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Direction:
    """Spatial direction: azimuth in [0, 2*pi), polar in [0, pi] from boresight.

    Azimuth is normalized modulo 2*pi and polar is clamped into [0, pi] on
    construction, so two directions compare equal iff their canonical angles
    are bit-identical.
    """

    azimuth: float
    polar: float

    def __post_init__(self) -> None:
        az = float(self.azimuth) % TWO_PI
        pol = min(max(float(self.polar), 0.0), math.pi)
        object.__setattr__(self, "azimuth", az)
        object.__setattr__(self, "polar", pol)

    def unit_vector(self) -> np.ndarray:
        """Cartesian unit vector, boresight along +z."""
        sp = math.sin(self.polar)
        return np.array(
            [sp * math.cos(self.azimuth), sp * math.sin(self.azimuth), math.cos(self.polar)]
        )


def unit_vectors(azimuth: np.ndarray, polar: np.ndarray) -> np.ndarray:
    """Stack of cartesian unit vectors, shape (..., 3), boresight along +z."""
    az = np.asarray(azimuth, dtype=float)
    pol = np.asarray(polar, dtype=float)
    sp = np.sin(pol)
    return np.stack([sp * np.cos(az), sp * np.sin(az), np.cos(pol)], axis=-1)


def angular_offset(a: Direction, b: Direction) -> float:
    """Great-circle angle between two directions, in [0, pi].

    Symmetric in its arguments; used as the (rotationally symmetric) pattern
    argument when evaluating beam gains toward rays.
    """
    c = math.cos(a.polar) * math.cos(b.polar) + math.sin(a.polar) * math.sin(
        b.polar
    ) * math.cos(a.azimuth - b.azimuth)
    return math.acos(min(1.0, max(-1.0, c)))


@dataclass(frozen=True)
class GaussianPattern:
    """Gaussian beam gain profile in linear scale.

    ``hpbw`` is the full half-power beamwidth: the gain at an angular offset
    of hpbw/2 from the beam axis is exactly peak_gain/2.
    """

    hpbw: float
    peak_gain: float

    def __post_init__(self) -> None:
        if not 0.0 < self.hpbw < math.pi:
            raise ValueError(f"hpbw must be in (0, pi), got {self.hpbw}")
        if self.peak_gain <= 0.0:
            raise ValueError(f"peak_gain must be positive, got {self.peak_gain}")

    def gain(self, offset):
        return gaussian_gain(self, offset)


def gaussian_gain(pattern: GaussianPattern, offset):
    """Linear gain at an angular offset from the beam axis.

    g(offset) = peak_gain * 2**(-(2*offset/hpbw)**2); accepts scalars or
    arrays of offsets in [0, pi].
    """
    x = (2.0 * np.asarray(offset, dtype=float)) / pattern.hpbw
    g = pattern.peak_gain * np.exp2(-np.square(x))
    if np.ndim(g) == 0:
        return float(g)
    return g


def quasi_omni_gain(direction: Direction | None = None) -> float:
    """Unit gain in every direction (the listening pattern of a sector sweep)."""
    return 1.0


class QuasiOmniPattern:
    """Constant unit-gain pattern; drop-in for GaussianPattern in filtering ops."""

    hpbw = math.pi
    peak_gain = 1.0

    def gain(self, offset):
        g = np.ones_like(np.asarray(offset, dtype=float))
        if np.ndim(g) == 0:
            return 1.0
        return g


QUASI_OMNI = QuasiOmniPattern()


def calibrate_peak_gain(hpbw: float) -> float:
    """Peak gain that makes the Gaussian pattern radiate unit total power.

    Solves integral(g dOmega) = 4*pi over the sphere by 1-D quadrature (the
    pattern is rotationally symmetric, so the azimuth integral is 2*pi).
    Narrower beams concentrate the same power and get a larger peak.
    """
    if not 0.0 < hpbw < math.pi:
        raise ValueError(f"hpbw must be in (0, pi), got {hpbw}")
    integrand = lambda th: 2.0 ** (-((2.0 * th) / hpbw) ** 2) * math.sin(th)
    integral, abserr = integrate.quad(integrand, 0.0, math.pi, epsabs=1e-13, epsrel=1e-12)
    if not integral > 0.0 or abserr > 1e-8 * integral:
        raise ArithmeticError(
            f"pattern normalization quadrature did not converge (hpbw={hpbw}, "
            f"integral={integral}, abserr={abserr})"
        )
    return 2.0 / integral


def make_calibrated_pattern(hpbw: float) -> GaussianPattern:
    """Gaussian pattern with peak gain normalized to unit radiated power."""
    return GaussianPattern(hpbw=hpbw, peak_gain=calibrate_peak_gain(hpbw))


@dataclass(frozen=True)
class Codebook:
    """Ordered set of selectable beam directions; the index is the sector ID."""

    entries: tuple[Direction, ...]
    sector_width: float

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, idx: int) -> Direction:
        return self.entries[idx]

    def unit_vectors(self) -> np.ndarray:
        """(len, 3) array of entry unit vectors, in entry order."""
        az = np.array([d.azimuth for d in self.entries])
        pol = np.array([d.polar for d in self.entries])
        return unit_vectors(az, pol)


def build_codebook(
    sector_width: float = math.pi / 2, ring_sizes: tuple[int, ...] = (1, 6, 12)
) -> Codebook:
    """Deterministic ring codebook over a spherical sector.

    Ring r (r = 0 .. n_rings-1) sits at polar angle r * sector_width /
    (n_rings - 1), with its beams equally spaced in azimuth; odd rings are
    rotated by half an azimuth step so adjacent rings stagger like hexagonal
    cell centers. The default rings (1, 6, 12) over a 90 degree sector give
    19 entries.
    """
    if not 0.0 < sector_width <= math.pi:
        raise ValueError(f"sector_width must be in (0, pi], got {sector_width}")
    if len(ring_sizes) == 0 or sum(ring_sizes) == 0:
        raise ValueError("ring_sizes must be non-empty with a positive total")
    if ring_sizes[0] != 1:
        raise ValueError(f"first ring must be the single boresight beam, got {ring_sizes[0]}")
    if any(int(m) != m or m < 1 for m in ring_sizes):
        raise ValueError(f"ring sizes must be positive integers, got {ring_sizes}")

    n_rings = len(ring_sizes)
    entries: list[Direction] = []
    for r, m in enumerate(ring_sizes):
        polar = 0.0 if n_rings == 1 else r * sector_width / (n_rings - 1)
        step = TWO_PI / m
        offset = 0.5 * step if r % 2 == 1 else 0.0
        for k in range(m):
            entries.append(Direction(azimuth=offset + k * step, polar=polar))
    return Codebook(entries=tuple(entries), sector_width=sector_width)


def codebook_records(cb: Codebook) -> list[dict]:
    """JSON-friendly dump of a codebook: one {index, azimuth_deg, polar_deg} per entry."""
    return [
        {"index": i, "azimuth_deg": math.degrees(d.azimuth), "polar_deg": math.degrees(d.polar)}
        for i, d in enumerate(cb.entries)
    ]
