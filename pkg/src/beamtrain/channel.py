"""Polarized cluster/ray channel generation and manipulation.

The propagation channel between the two transmit and two receive arrays is a
two-level tapped delay line: clusters carry the coarse delay/angle structure,
and each cluster holds a bundle of rays scattered around its center. Cluster
polarization couples the two array polarizations through a 2x2 matrix; with
the fixed vertical/horizontal array orientations used here, that matrix maps
to a 2x2 per-cluster attenuation of the four array-pair links.

Cluster and ray statistics follow a parametric Saleh-Valenzuela style model
(all constants are fields of ChannelGenParams): Poisson cluster count,
exponential inter-cluster delays with exponential power decay, uniform
cluster angles over the beam sector, Laplacian intra-cluster angle spread,
exponential intra-cluster delays with their own decay, uniform ray phases.
Generation is a pure function of (params, seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .antenna import TWO_PI, Direction

# Jones vectors of the two array polarizations: components are (horizontal,
# vertical) E-field amplitudes.
E_V = np.array([0.0, 1.0], dtype=complex)
E_H = np.array([1.0, 0.0], dtype=complex)

# Array orientations at both link ends: PAA 1 vertical, PAA 2 horizontal
# (cross-polarized streams, no spatial separation).
DEFAULT_ORIENTATIONS = (E_V, E_H)


def polarization_attenuation(
    pol: np.ndarray,
    tx_orients: tuple[np.ndarray, np.ndarray] = DEFAULT_ORIENTATIONS,
    rx_orients: tuple[np.ndarray, np.ndarray] = DEFAULT_ORIENTATIONS,
) -> np.ndarray:
    """Per-link attenuation matrix induced by a cluster polarization matrix.

    Entry (n, m) couples RX array n to TX array m through the 2x2 field
    coupling matrix ``pol``: A[n, m] = rx[n]^H @ pol @ tx[m]. Orientations
    must be unit Jones vectors.
    """
    pol = np.asarray(pol, dtype=complex)
    out = np.empty((len(rx_orients), len(tx_orients)), dtype=complex)
    for n, rx in enumerate(rx_orients):
        for m, tx in enumerate(tx_orients):
            out[n, m] = np.conj(rx) @ pol @ tx
    return out


@dataclass(frozen=True)
class ChannelGenParams:
    """Knobs of the stochastic channel generator (delays in seconds, angles in radians)."""

    mean_clusters: float = 6.0
    cluster_delay_mean_s: float = 10e-9
    cluster_decay_s: float = 20e-9
    rays_per_cluster: int = 8
    ray_delay_mean_s: float = 1e-9
    ray_decay_s: float = 5e-9
    angle_spread_rad: float = math.radians(5.0)
    polar_max_rad: float = math.pi / 2
    xpd_db: float = 15.0
    los: bool = True
    los_excess_db: float = 10.0

    def validate(self) -> None:
        if self.mean_clusters < 1:
            raise ValueError(f"mean_clusters must be >= 1, got {self.mean_clusters}")
        if self.rays_per_cluster < 1:
            raise ValueError(f"rays_per_cluster must be >= 1, got {self.rays_per_cluster}")
        for name in ("cluster_delay_mean_s", "cluster_decay_s", "ray_delay_mean_s", "ray_decay_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.angle_spread_rad < 0:
            raise ValueError(f"angle_spread_rad must be >= 0, got {self.angle_spread_rad}")
        if not 0.0 < self.polar_max_rad <= math.pi:
            raise ValueError(f"polar_max_rad must be in (0, pi], got {self.polar_max_rad}")
        if self.xpd_db < 0:
            raise ValueError(f"xpd_db must be >= 0, got {self.xpd_db}")


@dataclass(frozen=True)
class Ray:
    """One propagation path: absolute delay, complex amplitude, departure/arrival direction."""

    delay: float
    amplitude: complex
    aod: Direction
    aoa: Direction

    def __post_init__(self) -> None:
        if self.delay < 0.0:
            raise ValueError(f"ray delay must be >= 0, got {self.delay}")
        if not (math.isfinite(self.amplitude.real) and math.isfinite(self.amplitude.imag)):
            raise ValueError(f"ray amplitude must be finite, got {self.amplitude}")


@dataclass(frozen=True, eq=False)
class Cluster:
    """A bundle of rays sharing coarse delay, angles and polarization behavior.

    ``pol`` is the 2x2 field coupling matrix between horizontal and vertical
    E-field components; ``pol_gains`` is the per-link attenuation derived from
    it for the fixed array orientations.
    """

    toa: float
    center_aod: Direction
    center_aoa: Direction
    pol: np.ndarray
    pol_gains: np.ndarray
    rays: tuple[Ray, ...]
    is_los: bool = False

    def __post_init__(self) -> None:
        if len(self.rays) == 0:
            raise ValueError("cluster must contain at least one ray")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cluster):
            return NotImplemented
        return (
            self.toa == other.toa
            and self.center_aod == other.center_aod
            and self.center_aoa == other.center_aoa
            and np.array_equal(self.pol, other.pol)
            and np.array_equal(self.pol_gains, other.pol_gains)
            and self.rays == other.rays
            and self.is_los == other.is_los
        )


@dataclass(frozen=True, eq=False)
class OmniChannel:
    """Beam-independent channel: clusters of rays plus generator provenance."""

    clusters: tuple[Cluster, ...]
    params: ChannelGenParams | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if sum(c.is_los for c in self.clusters) > 1:
            raise ValueError("at most one cluster may be line-of-sight")

    def __eq__(self, other) -> bool:
        if not isinstance(other, OmniChannel):
            return NotImplemented
        return (
            self.clusters == other.clusters
            and self.params == other.params
            and self.seed == other.seed
        )

    @property
    def has_los(self) -> bool:
        return any(c.is_los for c in self.clusters)

    @property
    def ray_count(self) -> int:
        return sum(len(c.rays) for c in self.clusters)


def flatten_rays(ch: OmniChannel):
    """Ray-table view of a channel for vectorized evaluation.

    Returns (delays, amps, aod_az, aod_pol, aoa_az, aoa_pol) where ``amps``
    has shape (n_rays, 2, 2) and carries, per array pair (n, m), the ray
    amplitude already scaled by the cluster's polarization attenuation.
    """
    delays, aod_az, aod_pol, aoa_az, aoa_pol = [], [], [], [], []
    amp_blocks = []
    for cl in ch.clusters:
        for ray in cl.rays:
            delays.append(ray.delay)
            aod_az.append(ray.aod.azimuth)
            aod_pol.append(ray.aod.polar)
            aoa_az.append(ray.aoa.azimuth)
            aoa_pol.append(ray.aoa.polar)
            amp_blocks.append(cl.pol_gains * ray.amplitude)
    amps = np.array(amp_blocks, dtype=complex).reshape(-1, 2, 2)
    return (
        np.array(delays, dtype=float),
        amps,
        np.array(aod_az, dtype=float),
        np.array(aod_pol, dtype=float),
        np.array(aoa_az, dtype=float),
        np.array(aoa_pol, dtype=float),
    )


def direct_link_energy(ch: OmniChannel) -> float:
    """Mean energy of the two direct links, (sum|h_11|^2 + sum|h_22|^2) / 2."""
    total = 0.0
    for cl in ch.clusters:
        a11 = abs(cl.pol_gains[0, 0]) ** 2
        a22 = abs(cl.pol_gains[1, 1]) ** 2
        ray_energy = sum(abs(r.amplitude) ** 2 for r in cl.rays)
        total += (a11 + a22) * ray_energy
    return total / 2.0


def _scale_amplitudes(ch: OmniChannel, factor: float) -> OmniChannel:
    clusters = tuple(
        replace(
            cl,
            rays=tuple(replace(r, amplitude=r.amplitude * factor) for r in cl.rays),
        )
        for cl in ch.clusters
    )
    return replace(ch, clusters=clusters)


def normalize(ch: OmniChannel) -> OmniChannel:
    """Rescale all ray amplitudes so mean direct-link energy equals one.

    A single real factor is applied to every ray, so relative cluster and
    cross-link structure is preserved; with this convention the configured
    SNR is the average SNR per receive array.
    """
    energy = direct_link_energy(ch)
    if energy <= 0.0:
        raise ValueError("cannot normalize a channel with zero direct-link energy")
    return _scale_amplitudes(ch, math.sqrt(1.0 / energy))


def strip_los(ch: OmniChannel) -> OmniChannel:
    """Remove the line-of-sight cluster (if any) and re-normalize; idempotent."""
    if not ch.has_los:
        return ch
    kept = tuple(c for c in ch.clusters if not c.is_los)
    if len(kept) == 0:
        raise ValueError("channel has no non-LOS clusters to keep")
    return normalize(replace(ch, clusters=kept))


def _stable_angle(x: float) -> float:
    # Snap to the nearest fixed point of radians(degrees(.)) so that angles
    # survive the degree-unit file format bit-exactly. Converges in <= 2 steps.
    for _ in range(4):
        y = math.radians(math.degrees(x))
        if y == x:
            return x
        x = y
    raise ArithmeticError(f"angle {x} did not reach a degree-stable representation")


def _stable_direction(azimuth: float, polar: float) -> Direction:
    d = Direction(azimuth, polar)
    az = _stable_angle(d.azimuth) % TWO_PI
    pol = min(max(_stable_angle(d.polar), 0.0), math.pi)
    return Direction(az, pol)


def generate_channel(params: ChannelGenParams, seed: int) -> OmniChannel:
    """Draw one normalized channel realization; pure function of (params, seed)."""
    params.validate()
    rng = np.random.default_rng(seed)

    n_clusters = max(1, int(rng.poisson(params.mean_clusters)))
    toas = np.cumsum(rng.exponential(params.cluster_delay_mean_s, n_clusters))

    clusters: list[Cluster] = []
    cross_mag = 10.0 ** (-params.xpd_db / 20.0)
    for toa in toas:
        center_aod = _stable_direction(
            rng.uniform(0.0, TWO_PI), rng.uniform(0.0, params.polar_max_rad)
        )
        center_aoa = _stable_direction(
            rng.uniform(0.0, TWO_PI), rng.uniform(0.0, params.polar_max_rad)
        )

        # Co-pol entries keep unit magnitude; cross-pol entries are attenuated
        # by the cross-polarization discrimination ratio. Phases independent.
        phases = rng.uniform(0.0, TWO_PI, 4)
        pol = np.array(
            [
                [np.exp(1j * phases[0]), cross_mag * np.exp(1j * phases[1])],
                [cross_mag * np.exp(1j * phases[2]), np.exp(1j * phases[3])],
            ]
        )

        cluster_power = math.exp(-toa / params.cluster_decay_s)
        ray_delays = rng.exponential(params.ray_delay_mean_s, params.rays_per_cluster)
        ray_offsets = rng.laplace(0.0, params.angle_spread_rad, (params.rays_per_cluster, 4))
        ray_phases = rng.uniform(0.0, TWO_PI, params.rays_per_cluster)

        rays = []
        for k in range(params.rays_per_cluster):
            power = cluster_power * math.exp(-ray_delays[k] / params.ray_decay_s)
            amp = math.sqrt(power) * complex(np.exp(1j * ray_phases[k]))
            rays.append(
                Ray(
                    delay=float(toa + ray_delays[k]),
                    amplitude=amp,
                    aod=_stable_direction(
                        center_aod.azimuth + ray_offsets[k, 0],
                        center_aod.polar + ray_offsets[k, 1],
                    ),
                    aoa=_stable_direction(
                        center_aoa.azimuth + ray_offsets[k, 2],
                        center_aoa.polar + ray_offsets[k, 3],
                    ),
                )
            )

        clusters.append(
            Cluster(
                toa=float(toa),
                center_aod=center_aod,
                center_aoa=center_aoa,
                pol=pol,
                pol_gains=polarization_attenuation(pol),
                rays=tuple(rays),
                is_los=False,
            )
        )

    if params.los:
        # Direct path: one ray at zero delay, no depolarization, fixed margin
        # above the strongest reflected cluster.
        strongest = max(sum(abs(r.amplitude) ** 2 for r in cl.rays) for cl in clusters)
        los_amp = math.sqrt(strongest * 10.0 ** (params.los_excess_db / 10.0))
        aod = _stable_direction(rng.uniform(0.0, TWO_PI), rng.uniform(0.0, params.polar_max_rad))
        aoa = _stable_direction(rng.uniform(0.0, TWO_PI), rng.uniform(0.0, params.polar_max_rad))
        phase = rng.uniform(0.0, TWO_PI)
        pol = np.eye(2, dtype=complex)
        los = Cluster(
            toa=0.0,
            center_aod=aod,
            center_aoa=aoa,
            pol=pol,
            pol_gains=polarization_attenuation(pol),
            rays=(Ray(0.0, los_amp * complex(np.exp(1j * phase)), aod, aoa),),
            is_los=True,
        )
        clusters.insert(0, los)

    ch = OmniChannel(clusters=tuple(clusters), params=params, seed=int(seed))
    return normalize(ch)


# ---------------------------------------------------------------------------
# File format: JSON, angles in degrees, delays in seconds, complex as [re, im].


def _direction_to_json(d: Direction) -> dict:
    return {"az_deg": math.degrees(d.azimuth), "polar_deg": math.degrees(d.polar)}


def _complex_to_json(z: complex) -> list[float]:
    return [z.real, z.imag]


def save_channel(ch: OmniChannel, path) -> None:
    """Write a channel to a JSON file (lossless round trip via load_channel)."""
    doc = {
        "params": asdict(ch.params) if ch.params is not None else None,
        "seed": ch.seed,
        "clusters": [
            {
                "toa_s": cl.toa,
                "aod": _direction_to_json(cl.center_aod),
                "aoa": _direction_to_json(cl.center_aoa),
                "pol": [_complex_to_json(z) for z in cl.pol.reshape(-1)],
                "los": cl.is_los,
                "rays": [
                    {
                        "delay_s": r.delay,
                        "amp": _complex_to_json(r.amplitude),
                        "aod": _direction_to_json(r.aod),
                        "aoa": _direction_to_json(r.aoa),
                    }
                    for r in cl.rays
                ],
            }
            for cl in ch.clusters
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _load_direction(obj, where: str) -> Direction:
    if not isinstance(obj, dict) or "az_deg" not in obj or "polar_deg" not in obj:
        raise ValueError(f"{where}: expected an object with az_deg and polar_deg")
    polar_deg = float(obj["polar_deg"])
    if not 0.0 <= polar_deg <= 180.0:
        raise ValueError(f"{where}.polar_deg: must be in [0, 180], got {polar_deg}")
    return _stable_direction(math.radians(float(obj["az_deg"])), math.radians(polar_deg))


def _load_complex(obj, where: str) -> complex:
    if not isinstance(obj, list) or len(obj) != 2:
        raise ValueError(f"{where}: expected [re, im]")
    return complex(float(obj[0]), float(obj[1]))


def load_channel(path) -> OmniChannel:
    """Read a channel written by save_channel, validating fields as it goes."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e

    if not isinstance(doc, dict) or "clusters" not in doc:
        raise ValueError(f"{path}: top-level object must contain 'clusters'")

    params = None
    if doc.get("params") is not None:
        try:
            params = ChannelGenParams(**doc["params"])
        except TypeError as e:
            raise ValueError(f"{path}: params: {e}") from e
    seed = doc.get("seed")
    seed = int(seed) if seed is not None else None

    clusters = []
    n_los = 0
    for ci, cobj in enumerate(doc["clusters"]):
        where = f"{path}: clusters[{ci}]"
        toa = float(cobj.get("toa_s", -1.0))
        if toa < 0.0:
            raise ValueError(f"{where}.toa_s: must be >= 0, got {cobj.get('toa_s')}")
        pol_raw = cobj.get("pol")
        if not isinstance(pol_raw, list) or len(pol_raw) != 4:
            raise ValueError(f"{where}.pol: expected 4 [re, im] pairs")
        pol = np.array(
            [_load_complex(z, f"{where}.pol[{i}]") for i, z in enumerate(pol_raw)]
        ).reshape(2, 2)
        if np.any(np.abs(pol) > 1.0 + 1e-9):
            raise ValueError(f"{where}.pol: entry magnitude exceeds 1 (passive channel)")
        rays_raw = cobj.get("rays")
        if not rays_raw:
            raise ValueError(f"{where}.rays: must be non-empty")
        rays = []
        for ri, robj in enumerate(rays_raw):
            rwhere = f"{where}.rays[{ri}]"
            delay = float(robj.get("delay_s", -1.0))
            if delay < 0.0:
                raise ValueError(f"{rwhere}.delay_s: must be >= 0, got {robj.get('delay_s')}")
            rays.append(
                Ray(
                    delay=delay,
                    amplitude=_load_complex(robj.get("amp"), f"{rwhere}.amp"),
                    aod=_load_direction(robj.get("aod"), f"{rwhere}.aod"),
                    aoa=_load_direction(robj.get("aoa"), f"{rwhere}.aoa"),
                )
            )
        is_los = bool(cobj.get("los", False))
        n_los += is_los
        if n_los > 1:
            raise ValueError(f"{where}.los: more than one line-of-sight cluster")
        clusters.append(
            Cluster(
                toa=toa,
                center_aod=_load_direction(cobj.get("aod"), f"{where}.aod"),
                center_aoa=_load_direction(cobj.get("aoa"), f"{where}.aoa"),
                pol=pol,
                pol_gains=polarization_attenuation(pol),
                rays=tuple(rays),
                is_los=is_los,
            )
        )
    if not clusters:
        raise ValueError(f"{path}: clusters: must be non-empty")
    return OmniChannel(clusters=tuple(clusters), params=params, seed=seed)
