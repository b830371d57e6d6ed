"""Polarization coupling, the stochastic generator, normalization, file I/O."""

import math
from dataclasses import replace

import numpy as np
import pytest

from beamtrain.antenna import Direction
from beamtrain.channel import (
    ChannelGenParams,
    Cluster,
    DEFAULT_ORIENTATIONS,
    E_H,
    E_V,
    OmniChannel,
    Ray,
    direct_link_energy,
    flatten_rays,
    generate_channel,
    load_channel,
    normalize,
    polarization_attenuation,
    save_channel,
    strip_los,
)


def make_cluster(pol, rays, toa=0.0, is_los=False):
    return Cluster(
        toa=toa,
        center_aod=Direction(0.3, 0.4),
        center_aoa=Direction(1.2, 0.2),
        pol=np.asarray(pol, dtype=complex),
        pol_gains=polarization_attenuation(np.asarray(pol, dtype=complex)),
        rays=tuple(rays),
        is_los=is_los,
    )


def make_ray(delay=0.0, amplitude=1.0 + 0j, aod=None, aoa=None):
    return Ray(
        delay=delay,
        amplitude=amplitude,
        aod=aod or Direction(0.3, 0.4),
        aoa=aoa or Direction(1.2, 0.2),
    )


# --- polarization -----------------------------------------------------------

def test_jones_constants():
    assert np.array_equal(E_V, np.array([0.0, 1.0], dtype=complex))
    assert np.array_equal(E_H, np.array([1.0, 0.0], dtype=complex))
    assert DEFAULT_ORIENTATIONS == (E_V, E_H) or (
        np.array_equal(DEFAULT_ORIENTATIONS[0], E_V)
        and np.array_equal(DEFAULT_ORIENTATIONS[1], E_H)
    )


def test_polarization_identity_gives_identity():
    a = polarization_attenuation(np.eye(2, dtype=complex))
    assert np.array_equal(a, np.eye(2, dtype=complex))  # cross links exactly 0


def test_polarization_quadratic_form_layout():
    # expanding rx^H * pol * tx for orientations (e_v, e_h) swaps the matrix
    # into [[d, c], [b, a]]
    rng = np.random.default_rng(5)
    pol = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    a = polarization_attenuation(pol)
    expected = np.array([[pol[1, 1], pol[1, 0]], [pol[0, 1], pol[0, 0]]])
    assert np.allclose(a, expected, rtol=0, atol=0)


def test_polarization_zero_matrix():
    assert np.all(polarization_attenuation(np.zeros((2, 2), dtype=complex)) == 0.0)


def test_polarization_linear_in_pol():
    rng = np.random.default_rng(6)
    for _ in range(20):
        p1 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        p2 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        lhs = polarization_attenuation(p1 + p2)
        rhs = polarization_attenuation(p1) + polarization_attenuation(p2)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


# --- generator --------------------------------------------------------------

def test_generate_is_deterministic():
    params = ChannelGenParams()
    assert generate_channel(params, seed=123) == generate_channel(params, seed=123)


def test_generate_seed_changes_channel():
    params = ChannelGenParams()
    assert generate_channel(params, seed=1) != generate_channel(params, seed=2)


def test_generate_without_los():
    ch = generate_channel(replace(ChannelGenParams(), los=False), seed=9)
    assert not ch.has_los


def test_generate_with_los_has_single_los_cluster():
    ch = generate_channel(ChannelGenParams(), seed=9)
    los = [c for c in ch.clusters if c.is_los]
    assert len(los) == 1
    assert los[0].rays[0].delay == 0.0
    assert np.array_equal(los[0].pol, np.eye(2, dtype=complex))


def test_generate_normalized_direct_link_energy():
    # the normalization contract, checked over many seeds
    params = ChannelGenParams()
    for seed in range(1000):
        ch = generate_channel(params, seed=seed)
        assert direct_link_energy(ch) == pytest.approx(1.0, rel=1e-9)


def test_generate_respects_xpd_bound():
    params = ChannelGenParams()
    x = 10.0 ** (-params.xpd_db / 20.0)
    for seed in range(50):
        ch = generate_channel(params, seed=seed)
        for c in ch.clusters:
            a = c.pol_gains
            co_max = max(abs(a[0, 0]), abs(a[1, 1]))
            assert abs(a[0, 1]) <= x * co_max + 1e-12
            assert abs(a[1, 0]) <= x * co_max + 1e-12


def test_generate_rejects_degenerate_params():
    with pytest.raises(ValueError):
        generate_channel(replace(ChannelGenParams(), rays_per_cluster=0), seed=1)
    with pytest.raises(ValueError):
        generate_channel(replace(ChannelGenParams(), cluster_decay_s=0.0), seed=1)


def test_flatten_rays_shapes():
    ch = generate_channel(ChannelGenParams(), seed=4)
    delays, amps, aod_az, aod_pol, aoa_az, aoa_pol = flatten_rays(ch)
    n = ch.ray_count
    assert delays.shape == (n,) and amps.shape == (n, 2, 2)
    assert aod_az.shape == aod_pol.shape == aoa_az.shape == aoa_pol.shape == (n,)
    assert np.all(delays >= 0.0)


# --- normalization ----------------------------------------------------------

def test_normalize_known_factor():
    # one ray, |h11| = 3 and |h22| = 1: mean direct energy (9+1)/2 = 5,
    # so the common scale factor is sqrt(1/5) = sqrt(2/10)
    pol = np.array([[1.0 / 3.0, 0.0], [0.0, 1.0]], dtype=complex)
    ch = OmniChannel(
        clusters=(make_cluster(pol, [make_ray(amplitude=3.0 + 0j)]),),
        params=None,
        seed=None,
    )
    normed = normalize(ch)
    factor = normed.clusters[0].rays[0].amplitude / 3.0
    assert factor.real == pytest.approx(math.sqrt(2.0 / 10.0), rel=1e-12)
    assert factor.imag == 0.0
    assert direct_link_energy(normed) == pytest.approx(1.0, rel=1e-12)


def test_normalize_idempotent():
    ch = generate_channel(ChannelGenParams(), seed=21)
    once = normalize(ch)
    twice = normalize(once)
    a1 = flatten_rays(once)[1]
    a2 = flatten_rays(twice)[1]
    assert np.allclose(a1, a2, rtol=1e-12, atol=0)


def test_normalize_scale_invariant():
    pol = np.eye(2, dtype=complex)
    rays = [make_ray(amplitude=0.3 - 0.4j), make_ray(delay=1e-9, amplitude=1.1 + 0.2j)]
    ch = OmniChannel(clusters=(make_cluster(pol, rays),), params=None, seed=None)
    doubled = OmniChannel(
        clusters=(make_cluster(pol, [replace(r, amplitude=2.0 * r.amplitude) for r in rays]),),
        params=None,
        seed=None,
    )
    a = flatten_rays(normalize(ch))[1]
    b = flatten_rays(normalize(doubled))[1]
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_normalize_zero_direct_links_errors():
    # all the energy sits on cross links: direct links are exactly zero
    pol = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    ch = OmniChannel(clusters=(make_cluster(pol, [make_ray()]),), params=None, seed=None)
    with pytest.raises(ValueError):
        normalize(ch)


# --- LOS removal ------------------------------------------------------------

def test_strip_los_removes_the_los_cluster():
    ch = generate_channel(ChannelGenParams(), seed=31)
    assert ch.has_los
    stripped = strip_los(ch)
    assert not stripped.has_los
    assert len(stripped.clusters) == len(ch.clusters) - 1
    assert direct_link_energy(stripped) == pytest.approx(1.0, rel=1e-9)


def test_strip_los_idempotent():
    ch = generate_channel(ChannelGenParams(), seed=31)
    once = strip_los(ch)
    assert strip_los(once) == once


def test_strip_los_noop_without_los():
    ch = generate_channel(replace(ChannelGenParams(), los=False), seed=8)
    assert strip_los(ch) == ch


# --- invariants on the dataclasses ------------------------------------------

def test_ray_rejects_negative_delay():
    with pytest.raises(ValueError):
        make_ray(delay=-1e-9)


def test_ray_rejects_nonfinite_amplitude():
    with pytest.raises(ValueError):
        make_ray(amplitude=complex(math.inf, 0.0))


def test_cluster_requires_rays():
    with pytest.raises(ValueError):
        make_cluster(np.eye(2), [])


def test_channel_rejects_two_los_clusters():
    c = make_cluster(np.eye(2), [make_ray()], is_los=True)
    with pytest.raises(ValueError):
        OmniChannel(clusters=(c, c), params=None, seed=None)


# --- save / load ------------------------------------------------------------

def test_save_load_roundtrip_exact(tmp_path):
    ch = generate_channel(ChannelGenParams(), seed=77)
    path = tmp_path / "ch.json"
    save_channel(ch, path)
    assert load_channel(path) == ch  # exact equality on every field


def test_save_load_roundtrip_after_strip(tmp_path):
    ch = strip_los(generate_channel(ChannelGenParams(), seed=78))
    path = tmp_path / "ch.json"
    save_channel(ch, path)
    assert load_channel(path) == ch


def test_load_truncated_file_errors(tmp_path):
    ch = generate_channel(ChannelGenParams(), seed=79)
    path = tmp_path / "ch.json"
    save_channel(ch, path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ValueError, match="line"):
        load_channel(path)


def test_load_rejects_polar_out_of_range(tmp_path):
    ch = generate_channel(ChannelGenParams(), seed=80)
    path = tmp_path / "ch.json"
    save_channel(ch, path)
    import json

    doc = json.loads(path.read_text())
    doc["clusters"][0]["rays"][0]["aod"]["polar_deg"] = 200.0
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="polar_deg"):
        load_channel(path)


def test_load_rejects_active_polarization(tmp_path):
    ch = generate_channel(ChannelGenParams(), seed=81)
    path = tmp_path / "ch.json"
    save_channel(ch, path)
    import json

    doc = json.loads(path.read_text())
    doc["clusters"][0]["pol"][0] = [2.0, 0.0]  # magnitude 2 > 1
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="pol"):
        load_channel(path)
