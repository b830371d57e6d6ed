"""Beam-selection strategies: exhaustive search, SISO sweep, two-stage K-best.

Exhaustive search rates every beam combination (codebook_len ** (2 * n_rf)
full MIMO evaluations) and is the benchmark upper bound. The SISO sector
sweep trains each direct link independently from sweep power measurements
and never looks at the MIMO channel. The two-stage method bridges them:
stage one collects the same 2 * n_rf * codebook_len sweep measurements,
stage two rates only the K beam combinations whose per-array score products
are largest, needing 2 * n_rf * codebook_len + K trainings in total.

Tie-breaking is the lexicographically smallest index tuple (tx beams first,
then rx beams) everywhere, which makes every strategy deterministic and
directly comparable against brute-force enumeration.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .antenna import Codebook
from .channel import OmniChannel
from .effective import BeamSelection, LinkSpectra, beam_score_set
from .rate import RateConfig, rate_kernel

_CHUNK = 8192


@dataclass(frozen=True)
class EvalConfig:
    """Everything needed to rate a beam selection on a channel realization."""

    rho: float  # linear SNR per receive array
    n_rf: int = 2
    n_sub: int = 512
    f_s: float = 2.56e9
    n_taps: int = 128
    snr_convention: str = "divide"

    def __post_init__(self) -> None:
        if self.n_rf != 2:
            raise ValueError(f"only the symmetric 2-array configuration is supported, got n_rf={self.n_rf}")
        self.rate_config  # range checks
        if self.f_s <= 0:
            raise ValueError(f"f_s must be positive, got {self.f_s}")
        if self.n_taps < 1:
            raise ValueError(f"n_taps must be >= 1, got {self.n_taps}")

    @property
    def rate_config(self) -> RateConfig:
        return RateConfig(self.rho, self.n_rf, self.n_sub, self.snr_convention)

    @property
    def snr_factor(self) -> float:
        return self.rate_config.snr_factor


@dataclass(frozen=True)
class BeamScoreSet:
    """Sweep measurements: tx[n] ranks TX beams of array n, rx[n] ranks RX beams."""

    tx: np.ndarray  # (n_rf, codebook_len)
    rx: np.ndarray  # (n_rf, codebook_len)

    def __post_init__(self) -> None:
        tx = np.asarray(self.tx, dtype=float)
        rx = np.asarray(self.rx, dtype=float)
        if tx.shape != rx.shape or tx.ndim != 2:
            raise ValueError(f"score arrays must share shape (n_rf, L), got {tx.shape} and {rx.shape}")
        if np.any(tx < 0) or np.any(rx < 0):
            raise ValueError("beam scores must be non-negative")
        object.__setattr__(self, "tx", tx)
        object.__setattr__(self, "rx", rx)

    @property
    def n_rf(self) -> int:
        return self.tx.shape[0]

    def axes(self) -> list[np.ndarray]:
        """Score vectors in selection-tuple order: tx arrays first, then rx."""
        return [self.tx[n] for n in range(self.n_rf)] + [self.rx[n] for n in range(self.n_rf)]


@dataclass(frozen=True)
class Candidate:
    selection: BeamSelection
    joint_score: float


@dataclass(frozen=True)
class TrainingResult:
    selection: BeamSelection
    rate: float
    n_siso_iter: int
    n_mimo_iter: int
    method: str


def compute_beam_scores(
    ch: OmniChannel, cb: Codebook, pattern, cfg: EvalConfig
) -> BeamScoreSet:
    """Stage-one sweep: all 2 * n_rf * codebook_len received-power scores."""
    tx, rx = beam_score_set(ch, cb, pattern, f_s=cfg.f_s, n_taps=cfg.n_taps)
    return BeamScoreSet(tx=tx, rx=rx)


def _axis_product(sorted_vals: list[np.ndarray], pos: tuple[int, ...]) -> float:
    s = 1.0
    for ax, p in enumerate(pos):
        s *= float(sorted_vals[ax][p])
    return s


def top_k_products(scores: BeamScoreSet, k: int) -> list[Candidate]:
    """The K largest products of one entry per score vector, sorted.

    Lazy best-first walk over the product lattice: sort each axis, seed with
    the all-argmax tuple, pop the frontier maximum and push its single-step
    successors (with a visited set), so only O(K * n_axes) tuples are ever
    materialized. Output is sorted by descending joint score with ties in
    ascending index-tuple order; if every remaining combination scores zero
    the tail is filled in plain index order.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    axes = scores.axes()
    n_rf = scores.n_rf
    lengths = [len(a) for a in axes]
    k_eff = min(k, math.prod(lengths))

    # Per-axis descending value order; equal values keep ascending original
    # index so the global tie rule carries through.
    orders = [np.lexsort((np.arange(len(a)), -a)) for a in axes]
    sorted_vals = [a[o] for a, o in zip(axes, orders)]

    def original(pos: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(int(orders[ax][p]) for ax, p in enumerate(pos))

    start = (0,) * len(axes)
    heap = [(-_axis_product(sorted_vals, start), original(start), start)]
    visited = {start}
    out: list[Candidate] = []
    emitted: set[tuple[int, ...]] = set()

    while heap and len(out) < k_eff:
        neg_score, orig, pos = heapq.heappop(heap)
        score = -neg_score
        if score <= 0.0:
            break  # all remaining products are zero
        out.append(Candidate(BeamSelection(tx=orig[:n_rf], rx=orig[n_rf:]), score))
        emitted.add(orig)
        for ax in range(len(axes)):
            if pos[ax] + 1 < lengths[ax]:
                nxt = pos[:ax] + (pos[ax] + 1,) + pos[ax + 1 :]
                if nxt not in visited:
                    visited.add(nxt)
                    heapq.heappush(heap, (-_axis_product(sorted_vals, nxt), original(nxt), nxt))

    if len(out) < k_eff:
        for tup in itertools.product(*(range(n) for n in lengths)):
            if len(out) >= k_eff:
                break
            if tup not in emitted:
                out.append(Candidate(BeamSelection(tx=tup[:n_rf], rx=tup[n_rf:]), 0.0))
    return out


def ensure_cache(
    ch: OmniChannel, cb: Codebook, pattern, cfg: EvalConfig, cache: LinkSpectra | None
) -> LinkSpectra:
    if cache is not None:
        return cache
    return LinkSpectra(ch, cb, pattern, f_s=cfg.f_s, n_taps=cfg.n_taps, n_sub=cfg.n_sub)


def _selection_rates(cache: LinkSpectra, sels: np.ndarray, snr_factor: float) -> np.ndarray:
    """Rates of a batch of selections, rows of ``sels`` = (i1, i2, j1, j2)."""
    rates = np.empty(len(sels))
    s = cache.spectra
    for lo in range(0, len(sels), _CHUNK):
        part = sels[lo : lo + _CHUNK]
        i1, i2, j1, j2 = part[:, 0], part[:, 1], part[:, 2], part[:, 3]
        rates[lo : lo + _CHUNK] = rate_kernel(
            s[0, 0][i1, j1], s[0, 1][i2, j1], s[1, 0][i1, j2], s[1, 1][i2, j2], snr_factor
        )
    return rates


def _best_by_rate(rates: np.ndarray, tuples: list[tuple[int, ...]]) -> tuple[int, float]:
    """Index of the maximum rate; exact ties resolved to the smallest tuple."""
    best_rate = float(rates.max())
    winners = np.flatnonzero(rates == best_rate)
    best = min(winners, key=lambda i: tuples[i])
    return int(best), best_rate


def exhaustive_search(
    ch: OmniChannel, cb: Codebook, pattern, cfg: EvalConfig, cache: LinkSpectra | None = None
) -> TrainingResult:
    """Rate every beam combination and return the global maximizer."""
    cache = ensure_cache(ch, cb, pattern, cfg, cache)
    L = len(cb)
    all_sels = np.indices((L,) * (2 * cfg.n_rf)).reshape(2 * cfg.n_rf, -1).T
    rates = _selection_rates(cache, all_sels, cfg.snr_factor)
    idx = int(np.argmax(rates))  # first maximum = smallest tuple in C order
    sel = BeamSelection(
        tx=tuple(int(v) for v in all_sels[idx, : cfg.n_rf]),
        rx=tuple(int(v) for v in all_sels[idx, cfg.n_rf :]),
    )
    return TrainingResult(
        selection=sel,
        rate=float(rates[idx]),
        n_siso_iter=0,
        n_mimo_iter=L ** (2 * cfg.n_rf),
        method="es",
    )


def siso_sls(
    ch: OmniChannel,
    cb: Codebook,
    pattern,
    cfg: EvalConfig,
    cache: LinkSpectra | None = None,
    scores: BeamScoreSet | None = None,
) -> TrainingResult:
    """Per-link sector sweep: each array independently keeps its strongest beam."""
    cache = ensure_cache(ch, cb, pattern, cfg, cache)
    if scores is None:
        scores = compute_beam_scores(ch, cb, pattern, cfg)
    sel = BeamSelection(
        tx=tuple(int(np.argmax(scores.tx[n])) for n in range(cfg.n_rf)),
        rx=tuple(int(np.argmax(scores.rx[n])) for n in range(cfg.n_rf)),
    )
    rates = _selection_rates(cache, np.array([sel.as_tuple()]), cfg.snr_factor)
    return TrainingResult(
        selection=sel,
        rate=float(rates[0]),
        n_siso_iter=2 * cfg.n_rf * len(cb),
        n_mimo_iter=1,
        method="sls",
    )


def k_best_training(
    ch: OmniChannel,
    cb: Codebook,
    pattern,
    cfg: EvalConfig,
    k: int,
    cache: LinkSpectra | None = None,
    scores: BeamScoreSet | None = None,
) -> TrainingResult:
    """Two-stage selection: sweep scores, then rate only the top-K score products."""
    cache = ensure_cache(ch, cb, pattern, cfg, cache)
    if scores is None:
        scores = compute_beam_scores(ch, cb, pattern, cfg)
    cands = top_k_products(scores, k)
    tuples = [c.selection.as_tuple() for c in cands]
    rates = _selection_rates(cache, np.array(tuples), cfg.snr_factor)
    best, best_rate = _best_by_rate(rates, tuples)
    return TrainingResult(
        selection=cands[best].selection,
        rate=best_rate,
        n_siso_iter=2 * cfg.n_rf * len(cb),
        n_mimo_iter=len(cands),
        method="kbest",
    )


def k_best_sweep(
    ch: OmniChannel,
    cb: Codebook,
    pattern,
    cfg: EvalConfig,
    k_values: tuple[int, ...],
    cache: LinkSpectra | None = None,
    scores: BeamScoreSet | None = None,
) -> dict[int, TrainingResult]:
    """K-best results for several K from one enumeration.

    The candidate list for a smaller K is a prefix of the list for a larger
    one, so a single enumeration at max(k_values) plus running prefix maxima
    reproduces each individual k_best_training result exactly.
    """
    if len(k_values) == 0:
        raise ValueError("k_values must be non-empty")
    cache = ensure_cache(ch, cb, pattern, cfg, cache)
    if scores is None:
        scores = compute_beam_scores(ch, cb, pattern, cfg)
    cands = top_k_products(scores, max(k_values))
    tuples = [c.selection.as_tuple() for c in cands]
    rates = _selection_rates(cache, np.array(tuples), cfg.snr_factor)

    out: dict[int, TrainingResult] = {}
    checkpoints = {min(k, len(cands)): k for k in sorted(k_values)}
    best_idx = 0
    best_rate = float(rates[0])
    for i in range(len(cands)):
        if rates[i] > best_rate or (rates[i] == best_rate and tuples[i] < tuples[best_idx]):
            best_idx, best_rate = i, float(rates[i])
        prefix_len = i + 1
        if prefix_len in checkpoints:
            for k in (kv for kv in k_values if min(kv, len(cands)) == prefix_len):
                out[k] = TrainingResult(
                    selection=cands[best_idx].selection,
                    rate=best_rate,
                    n_siso_iter=2 * cfg.n_rf * len(cb),
                    n_mimo_iter=prefix_len,
                    method="kbest",
                )
    return out
