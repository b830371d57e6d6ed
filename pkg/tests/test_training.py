"""Selection strategies against independent brute-force oracles."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamtrain.antenna import build_codebook, make_calibrated_pattern
from beamtrain.channel import ChannelGenParams, generate_channel, strip_los
from beamtrain.effective import (
    BeamSelection,
    LinkSpectra,
    apply_beamforming,
    discretize,
    transfer_function,
)
from beamtrain.rate import RateConfig, mimo_rate
from beamtrain.training import (
    BeamScoreSet,
    EvalConfig,
    compute_beam_scores,
    exhaustive_search,
    k_best_sweep,
    k_best_training,
    siso_sls,
    top_k_products,
)

PAT = make_calibrated_pattern(math.radians(60.0))


def brute_force_products(scores: BeamScoreSet, k: int):
    """Reference enumeration: every product, sorted by (-score, index tuple)."""
    axes = scores.axes()
    items = []
    for tup in itertools.product(*(range(len(a)) for a in axes)):
        s = 1.0
        for ax, i in enumerate(tup):
            s *= float(axes[ax][i])
        items.append((tup, s))
    items.sort(key=lambda it: (-it[1], it[0]))
    return items[:k]


def random_scores(rng, n_rf=2, length=None, zero_frac=0.0):
    length = length if length is not None else int(rng.integers(1, 5))
    tx = rng.uniform(0.1, 1.0, (n_rf, length))
    rx = rng.uniform(0.1, 1.0, (n_rf, length))
    if zero_frac > 0.0:
        tx[rng.uniform(size=tx.shape) < zero_frac] = 0.0
        rx[rng.uniform(size=rx.shape) < zero_frac] = 0.0
    return BeamScoreSet(tx=tx, rx=rx)


# --- top_k_products ---------------------------------------------------------

def test_top_k_rejects_k_zero():
    scores = BeamScoreSet(tx=np.ones((2, 3)), rx=np.ones((2, 3)))
    with pytest.raises(ValueError):
        top_k_products(scores, 0)


def test_top_1_is_the_all_argmax_tuple():
    tx = np.array([[0.2, 0.9, 0.1], [0.5, 0.4, 0.8]])
    rx = np.array([[0.3, 0.3, 0.7], [1.0, 0.2, 0.6]])
    cands = top_k_products(BeamScoreSet(tx=tx, rx=rx), 1)
    assert len(cands) == 1
    assert cands[0].selection.as_tuple() == (1, 2, 2, 0)
    assert cands[0].joint_score == pytest.approx(0.9 * 0.8 * 0.7 * 1.0, rel=1e-12)


def test_top_k_two_level_vectors():
    # vectors ([2,1],[2,1],[2,1],[2,1]): products are 16, then four 8s, ...
    v = np.array([[2.0, 1.0], [2.0, 1.0]])
    cands = top_k_products(BeamScoreSet(tx=v, rx=v), 5)
    assert [c.joint_score for c in cands] == [16.0, 8.0, 8.0, 8.0, 8.0]
    # equal scores come out in index-tuple order
    assert [c.selection.as_tuple() for c in cands] == [
        (0, 0, 0, 0),
        (0, 0, 0, 1),
        (0, 0, 1, 0),
        (0, 1, 0, 0),
        (1, 0, 0, 0),
    ]


def test_top_k_matches_brute_force_on_random_instances():
    rng = np.random.default_rng(33)
    for trial in range(60):
        scores = random_scores(rng, zero_frac=0.15 if trial % 3 == 0 else 0.0)
        total = len(scores.axes()[0]) ** 4
        k = int(rng.integers(1, total + 1))
        got = top_k_products(scores, k)
        want = brute_force_products(scores, k)
        assert [c.selection.as_tuple() for c in got] == [t for t, _ in want]
        for c, (_, s) in zip(got, want):
            assert c.joint_score == pytest.approx(s, rel=1e-12, abs=0.0)


def test_top_k_caps_at_total_combinations():
    scores = random_scores(np.random.default_rng(34), length=2)
    cands = top_k_products(scores, 1000)
    assert len(cands) == 16
    seen = {c.selection.as_tuple() for c in cands}
    assert len(seen) == 16  # duplicate-free, full coverage


def test_top_k_zero_products_come_last_in_index_order():
    # one dead beam on every axis: plenty of zero products
    tx = np.array([[0.5, 0.0], [0.7, 0.0]])
    rx = np.array([[0.9, 0.0], [0.4, 0.0]])
    cands = top_k_products(BeamScoreSet(tx=tx, rx=rx), 16)
    scores = [c.joint_score for c in cands]
    assert scores[0] > 0.0
    first_zero = scores.index(0.0)
    assert all(s > 0.0 for s in scores[:first_zero])
    assert all(s == 0.0 for s in scores[first_zero:])
    zero_tuples = [c.selection.as_tuple() for c in cands[first_zero:]]
    assert zero_tuples == sorted(zero_tuples)


def test_top_k_joint_score_is_the_product():
    rng = np.random.default_rng(35)
    scores = random_scores(rng, length=4)
    axes = scores.axes()
    for c in top_k_products(scores, 50):
        tup = c.selection.as_tuple()
        prod = 1.0
        for ax, i in enumerate(tup):
            prod *= float(axes[ax][i])
        assert c.joint_score == pytest.approx(prod, rel=1e-12)


def test_top_k_sorted_nonincreasing():
    rng = np.random.default_rng(36)
    scores = random_scores(rng, length=4)
    cands = top_k_products(scores, 100)
    vals = [c.joint_score for c in cands]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=8))
def test_top_k_order_survives_per_axis_scaling(seed, shift):
    # scaling any score vector by a positive constant scales every product by
    # the same factor, so the candidate ordering cannot change; powers of two
    # keep float products exact
    rng = np.random.default_rng(seed)
    scores = random_scores(rng, length=3)
    scale = 2.0 ** (shift - 4)
    scaled = BeamScoreSet(tx=scores.tx * scale, rx=scores.rx / scale)
    a = [c.selection.as_tuple() for c in top_k_products(scores, 30)]
    b = [c.selection.as_tuple() for c in top_k_products(scaled, 30)]
    assert a == b


def test_first_candidate_matches_per_axis_argmax():
    rng = np.random.default_rng(37)
    for _ in range(50):
        scores = random_scores(rng)  # strictly positive entries
        best = top_k_products(scores, 1)[0].selection.as_tuple()
        want = tuple(int(np.argmax(a)) for a in scores.axes())
        assert best == want


def test_beam_score_set_validation():
    with pytest.raises(ValueError):
        BeamScoreSet(tx=np.ones((2, 3)), rx=np.ones((2, 4)))
    with pytest.raises(ValueError):
        BeamScoreSet(tx=-np.ones((2, 3)), rx=np.ones((2, 3)))


# --- strategies on toy channels ---------------------------------------------

CB3 = build_codebook(math.pi / 2, (1, 2))  # 3 beams: enough to brute-force


def tiny_setup(seed):
    ch = strip_los(generate_channel(ChannelGenParams(), seed=seed))
    cfg = EvalConfig(rho=100.0, n_rf=2, n_sub=64, n_taps=64)
    cache = LinkSpectra(ch, CB3, PAT, f_s=cfg.f_s, n_taps=cfg.n_taps, n_sub=cfg.n_sub)
    return ch, cfg, cache


def test_exhaustive_search_matches_independent_brute_force():
    ch, cfg, cache = tiny_setup(seed=41)
    res = exhaustive_search(ch, CB3, PAT, cfg, cache=cache)
    # from-scratch loop through all 81 combinations, written against the
    # public single-selection pipeline rather than the cache
    rcfg = RateConfig(cfg.rho, cfg.n_rf, cfg.n_sub)
    best_rate, best_sel = -1.0, None
    for tup in itertools.product(range(3), repeat=4):
        sel = BeamSelection(tx=tup[:2], rx=tup[2:])
        tf = transfer_function(
            discretize(apply_beamforming(ch, sel, CB3, PAT), cfg.f_s, cfg.n_taps),
            cfg.n_sub,
        )
        r = mimo_rate(tf, rcfg)
        if r > best_rate:
            best_rate, best_sel = r, tup
    assert res.selection.as_tuple() == best_sel
    assert res.rate == pytest.approx(best_rate, rel=1e-12)
    assert res.n_mimo_iter == 81 and res.n_siso_iter == 0
    assert res.method == "es"


def test_exhaustive_search_single_beam_codebook():
    cb1 = build_codebook(math.pi / 2, (1,))
    ch = strip_los(generate_channel(ChannelGenParams(), seed=42))
    cfg = EvalConfig(rho=10.0, n_rf=2, n_sub=64, n_taps=64)
    res = exhaustive_search(ch, cb1, PAT, cfg)
    assert res.selection.as_tuple() == (0, 0, 0, 0)
    assert res.n_mimo_iter == 1


def test_siso_sls_counts_and_bounds():
    ch, cfg, cache = tiny_setup(seed=43)
    sls = siso_sls(ch, CB3, PAT, cfg, cache=cache)
    es = exhaustive_search(ch, CB3, PAT, cfg, cache=cache)
    assert sls.n_siso_iter == 2 * 2 * 3 and sls.n_mimo_iter == 1
    assert sls.method == "sls"
    assert sls.rate <= es.rate


def test_siso_sls_picks_the_aligned_beam():
    # a single ray dead on codebook entry 5's axis dominates every sweep
    from test_effective import single_ray_channel

    cb = build_codebook(math.pi / 2, (1, 6, 12))
    ch = single_ray_channel(cb[5], cb[5])
    cfg = EvalConfig(rho=100.0, n_rf=2, n_sub=64, n_taps=64)
    res = siso_sls(ch, cb, PAT, cfg)
    assert res.selection.tx[0] == 5
    assert res.selection.rx[0] == 5


def test_siso_sls_all_equal_scores_tie_to_zero():
    ch, cfg, cache = tiny_setup(seed=44)
    flat = BeamScoreSet(tx=np.ones((2, 3)), rx=np.ones((2, 3)))
    res = siso_sls(ch, CB3, PAT, cfg, cache=cache, scores=flat)
    assert res.selection.as_tuple() == (0, 0, 0, 0)


def test_k_best_equals_exhaustive_at_full_k():
    ch, cfg, cache = tiny_setup(seed=45)
    es = exhaustive_search(ch, CB3, PAT, cfg, cache=cache)
    kb = k_best_training(ch, CB3, PAT, cfg, k=81, cache=cache)
    assert kb.rate == es.rate  # bit-identical, not just close
    assert kb.selection == es.selection
    assert kb.n_siso_iter == 12 and kb.n_mimo_iter == 81


def test_k_best_k1_equals_sls_selection():
    ch, cfg, cache = tiny_setup(seed=46)
    scores = compute_beam_scores(ch, CB3, PAT, cfg)
    kb = k_best_training(ch, CB3, PAT, cfg, k=1, cache=cache, scores=scores)
    sls = siso_sls(ch, CB3, PAT, cfg, cache=cache, scores=scores)
    assert kb.selection == sls.selection
    assert kb.rate == sls.rate


def test_k_best_monotone_and_bounded():
    ch, cfg, cache = tiny_setup(seed=47)
    es = exhaustive_search(ch, CB3, PAT, cfg, cache=cache)
    scores = compute_beam_scores(ch, CB3, PAT, cfg)
    prev = 0.0
    for k in (1, 2, 4, 8, 16, 32, 81):
        r = k_best_training(ch, CB3, PAT, cfg, k=k, cache=cache, scores=scores).rate
        assert r >= prev
        assert r <= es.rate
        prev = r


def test_k_best_iteration_counts():
    ch, cfg, cache = tiny_setup(seed=48)
    kb = k_best_training(ch, CB3, PAT, cfg, k=10, cache=cache)
    assert kb.n_siso_iter == 2 * 2 * 3
    assert kb.n_mimo_iter == 10
    assert kb.method == "kbest"
    # K beyond the lattice size is capped
    kb_full = k_best_training(ch, CB3, PAT, cfg, k=5000, cache=cache)
    assert kb_full.n_mimo_iter == 81


def test_k_best_sweep_matches_individual_runs():
    ch, cfg, cache = tiny_setup(seed=49)
    scores = compute_beam_scores(ch, CB3, PAT, cfg)
    ks = (1, 3, 7, 20, 81)
    swept = k_best_sweep(ch, CB3, PAT, cfg, ks, cache=cache, scores=scores)
    assert set(swept) == set(ks)
    for k in ks:
        single = k_best_training(ch, CB3, PAT, cfg, k=k, cache=cache, scores=scores)
        assert swept[k].rate == single.rate
        assert swept[k].selection == single.selection
        assert swept[k].n_mimo_iter == single.n_mimo_iter
        assert swept[k].n_siso_iter == single.n_siso_iter


def test_k_best_sweep_requires_k_values():
    ch, cfg, cache = tiny_setup(seed=50)
    with pytest.raises(ValueError):
        k_best_sweep(ch, CB3, PAT, cfg, (), cache=cache)


def test_eval_config_validation():
    with pytest.raises(ValueError):
        EvalConfig(rho=100.0, n_rf=3)
    with pytest.raises(ValueError):
        EvalConfig(rho=0.0)
    with pytest.raises(ValueError):
        EvalConfig(rho=1.0, f_s=-1.0)
    with pytest.raises(ValueError):
        EvalConfig(rho=1.0, n_taps=0)
