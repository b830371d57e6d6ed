"""Render experiment figures next to the delimited output.

Two figures summarize a results table: the relative-rate trade-off versus K
and the training-iteration cost versus K. Both are derived purely from the
emitted records, so they can be regenerated later from results.csv alone.
"""

from __future__ import annotations

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import RealizationRecord


def _by_method(records: list[RealizationRecord]) -> dict[str, list[RealizationRecord]]:
    out = defaultdict(list)
    for rec in records:
        out[rec.method].append(rec)
    return out


def _kbest_axis(recs: list[RealizationRecord]):
    """(sorted K values, per-K list of records)."""
    per_k = defaultdict(list)
    for rec in recs:
        per_k[rec.k].append(rec)
    ks = sorted(per_k)
    return ks, [per_k[k] for k in ks]


def render_rate_figure(records: list[RealizationRecord], path) -> bool:
    """Relative rate vs K; needs kbest records with a valid ES normalization."""
    methods = _by_method(records)
    kb = methods.get("kbest", [])
    if not kb or any(np.isnan(rec.rate_rel_to_es) for rec in kb):
        return False
    ks, groups = _kbest_axis(kb)
    rel = [[rec.rate_rel_to_es for rec in g] for g in groups]
    mean = [float(np.mean(v)) for v in rel]
    lo = [float(np.min(v)) for v in rel]
    hi = [float(np.max(v)) for v in rel]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.fill_between(ks, lo, hi, alpha=0.2, color="tab:blue", label="K-best (min–max)")
    ax.plot(ks, mean, "o-", color="tab:blue", label="K-best (mean)")
    ax.axhline(1.0, color="tab:green", linestyle="--", label="exhaustive search")
    if methods.get("sls"):
        sls_mean = float(np.mean([rec.rate_rel_to_es for rec in methods["sls"]]))
        ax.axhline(sls_mean, color="tab:red", linestyle=":", label="SISO sweep (mean)")
    ax.set_xscale("log")
    ax.set_xlabel("K (rated beam combinations)")
    ax.set_ylabel("rate relative to exhaustive search")
    ax.set_ylim(top=1.005)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True


def render_iteration_figure(records: list[RealizationRecord], path) -> bool:
    """Training-cost vs K: SISO sweeps and MIMO ratings per strategy."""
    methods = _by_method(records)
    kb = methods.get("kbest", [])
    if not kb:
        return False
    ks, groups = _kbest_axis(kb)
    total = [float(np.mean([rec.n_siso_iter + rec.n_mimo_iter for rec in g])) for g in groups]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ks, total, "o-", color="tab:blue", label="K-best (sweep + K ratings)")
    if methods.get("es"):
        es_total = float(np.mean([rec.n_mimo_iter for rec in methods["es"]]))
        ax.axhline(es_total, color="tab:green", linestyle="--", label="exhaustive search")
    if methods.get("sls"):
        sls_total = float(
            np.mean([rec.n_siso_iter + rec.n_mimo_iter for rec in methods["sls"]])
        )
        ax.axhline(sls_total, color="tab:red", linestyle=":", label="SISO sweep")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("K (rated beam combinations)")
    ax.set_ylabel("total training iterations")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="center right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True


def render_figures(records: list[RealizationRecord], out_dir) -> list[str]:
    """Write the available figures into out_dir; returns the paths created."""
    written = []
    rate_path = os.path.join(out_dir, "relative_rate_vs_k.png")
    if render_rate_figure(records, rate_path):
        written.append(rate_path)
    iter_path = os.path.join(out_dir, "iterations_vs_k.png")
    if render_iteration_figure(records, iter_path):
        written.append(iter_path)
    return written
