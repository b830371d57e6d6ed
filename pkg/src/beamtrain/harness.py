"""Seeded Monte Carlo experiment runner with CSV/JSON emission.

One experiment = a batch of independent channel realizations, each trained
with the selected strategies, with every rate normalized to the exhaustive
search result on the same realization. (config, seed) fully determines
every output byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .antenna import build_codebook, make_calibrated_pattern
from .channel import ChannelGenParams, generate_channel, strip_los
from .effective import LinkSpectra
from .rate import db_to_linear
from .training import (
    EvalConfig,
    compute_beam_scores,
    exhaustive_search,
    k_best_sweep,
    siso_sls,
)

METHODS = ("es", "sls", "kbest")

CSV_HEADER = (
    "realization_id,method,k,rate_bits_s_hz,rate_rel_to_es,"
    "n_siso_iter,n_mimo_iter,selection"
)


@dataclass(frozen=True)
class ExperimentConfig:
    n_realizations: int = 50
    seed: int = 42
    rho_db: float = 20.0
    n_rf: int = 2
    sector_width_deg: float = 90.0
    ring_sizes: tuple[int, ...] = (1, 6, 12)
    hpbw_deg: float = 60.0
    n_sub: int = 512
    f_s: float = 2.56e9
    n_taps: int = 128
    nlos: bool = True
    k_values: tuple[int, ...] = (1, 2, 5, 10, 15, 20, 50, 100)
    channel_params: ChannelGenParams = field(default_factory=ChannelGenParams)
    methods: tuple[str, ...] = ("es", "sls", "kbest")

    def validate(self) -> None:
        """Raise ValueError naming the offending field."""
        if self.n_realizations < 1:
            raise ValueError(f"n_realizations must be >= 1, got {self.n_realizations}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if not math.isfinite(self.rho_db):
            raise ValueError(f"rho_db must be finite, got {self.rho_db}")
        if self.n_rf != 2:
            raise ValueError(f"n_rf: only 2 is supported, got {self.n_rf}")
        if not 0.0 < self.sector_width_deg <= 180.0:
            raise ValueError(f"sector_width_deg must be in (0, 180], got {self.sector_width_deg}")
        if not 0.0 < self.hpbw_deg <= 180.0:
            raise ValueError(f"hpbw_deg must be in (0, 180], got {self.hpbw_deg}")
        if self.n_taps < 1:
            raise ValueError(f"n_taps must be >= 1, got {self.n_taps}")
        if self.n_sub < self.n_taps or self.n_sub & (self.n_sub - 1):
            raise ValueError(
                f"n_sub must be a power of two >= n_taps ({self.n_taps}), got {self.n_sub}"
            )
        if self.f_s <= 0:
            raise ValueError(f"f_s must be positive, got {self.f_s}")
        if len(self.methods) == 0:
            raise ValueError("methods must name at least one strategy")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"methods: unknown strategy {m!r} (choose from {METHODS})")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError(f"methods must not repeat entries, got {self.methods}")
        if "kbest" in self.methods:
            if len(self.k_values) == 0:
                raise ValueError("k_values must be non-empty when kbest is selected")
            for k in self.k_values:
                if k < 1:
                    raise ValueError(f"k_values entries must be >= 1, got {k}")
        try:
            build_codebook(math.radians(self.sector_width_deg), self.ring_sizes)
        except ValueError as exc:
            raise ValueError(f"ring_sizes: {exc}") from exc
        try:
            self.channel_params.validate()
        except ValueError as exc:
            raise ValueError(f"channel_params.{exc}") from exc

    @property
    def codebook_len(self) -> int:
        return sum(self.ring_sizes)


@dataclass(frozen=True)
class RealizationRecord:
    realization_id: int
    method: str
    k: int  # 0 for es and sls
    rate_bits_s_hz: float
    rate_rel_to_es: float  # nan when es was not run
    n_siso_iter: int
    n_mimo_iter: int
    selection: tuple[int, int, int, int]


def child_seed(master: int, realization: int) -> int:
    """Independent per-realization seed; adding realizations never shifts earlier ones."""
    digest = hashlib.sha256(f"{master}:{realization}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def run_experiment(cfg: ExperimentConfig) -> tuple[list[RealizationRecord], dict]:
    cfg.validate()
    cb = build_codebook(math.radians(cfg.sector_width_deg), cfg.ring_sizes)
    pattern = make_calibrated_pattern(math.radians(cfg.hpbw_deg))
    ecfg = EvalConfig(
        rho=db_to_linear(cfg.rho_db),
        n_rf=cfg.n_rf,
        n_sub=cfg.n_sub,
        f_s=cfg.f_s,
        n_taps=cfg.n_taps,
    )

    records: list[RealizationRecord] = []
    for r in range(cfg.n_realizations):
        ch = generate_channel(cfg.channel_params, seed=child_seed(cfg.seed, r))
        if cfg.nlos:
            ch = strip_los(ch)
        cache = LinkSpectra(ch, cb, pattern, f_s=cfg.f_s, n_taps=cfg.n_taps, n_sub=cfg.n_sub)
        need_scores = "sls" in cfg.methods or "kbest" in cfg.methods
        scores = compute_beam_scores(ch, cb, pattern, ecfg) if need_scores else None

        results = []
        es_rate = None
        if "es" in cfg.methods:
            res = exhaustive_search(ch, cb, pattern, ecfg, cache=cache)
            es_rate = res.rate
            results.append((res, 0))
        if "sls" in cfg.methods:
            results.append((siso_sls(ch, cb, pattern, ecfg, cache=cache, scores=scores), 0))
        if "kbest" in cfg.methods:
            by_k = k_best_sweep(ch, cb, pattern, ecfg, cfg.k_values, cache=cache, scores=scores)
            for k in sorted(set(cfg.k_values)):
                results.append((by_k[k], k))

        for res, k in results:
            if res.method == "es":
                rel = 1.0
            elif es_rate is None or es_rate == 0.0:
                rel = math.nan
            else:
                rel = res.rate / es_rate
            records.append(
                RealizationRecord(
                    realization_id=r,
                    method=res.method,
                    k=k,
                    rate_bits_s_hz=res.rate,
                    rate_rel_to_es=rel,
                    n_siso_iter=res.n_siso_iter,
                    n_mimo_iter=res.n_mimo_iter,
                    selection=res.selection.as_tuple(),
                )
            )

    records.sort(key=lambda rec: (rec.realization_id, rec.method, rec.k))
    return records, summarize(records)


def summarize(records: list[RealizationRecord]) -> dict:
    """Per-(method, K) aggregate statistics keyed by method then str(K)."""
    groups: dict[tuple[str, int], list[RealizationRecord]] = {}
    for rec in records:
        groups.setdefault((rec.method, rec.k), []).append(rec)

    summary: dict[str, dict[str, dict]] = {}
    for (method, k), recs in sorted(groups.items()):
        # relative rates are NaN when no exhaustive baseline exists (or it
        # scored zero); aggregate over the realizations where they are defined
        rel = np.array([rec.rate_rel_to_es for rec in recs])
        rel = rel[~np.isnan(rel)]
        have_rel = rel.size > 0
        summary.setdefault(method, {})[str(k)] = {
            "n": len(recs),
            "mean_rate_bits_s_hz": float(np.mean([rec.rate_bits_s_hz for rec in recs])),
            "mean_rel_rate": float(np.mean(rel)) if have_rel else None,
            "median_rel_rate": float(np.median(rel)) if have_rel else None,
            "mean_n_siso_iter": float(np.mean([rec.n_siso_iter for rec in recs])),
            "mean_n_mimo_iter": float(np.mean([rec.n_mimo_iter for rec in recs])),
        }
    return summary


def _fmt(x: float) -> str:
    return format(x, ".9g")


def emit_csv(records: list[RealizationRecord], path) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(CSV_HEADER + "\n")
        for rec in records:
            f.write(
                f"{rec.realization_id},{rec.method},{rec.k},"
                f"{_fmt(rec.rate_bits_s_hz)},{_fmt(rec.rate_rel_to_es)},"
                f"{rec.n_siso_iter},{rec.n_mimo_iter},"
                f"{'-'.join(str(i) for i in rec.selection)}\n"
            )


def load_records_csv(path) -> list[RealizationRecord]:
    records = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_HEADER.split(","):
            raise ValueError(f"unexpected CSV header in {path}: {reader.fieldnames}")
        for row in reader:
            records.append(
                RealizationRecord(
                    realization_id=int(row["realization_id"]),
                    method=row["method"],
                    k=int(row["k"]),
                    rate_bits_s_hz=float(row["rate_bits_s_hz"]),
                    rate_rel_to_es=float(row["rate_rel_to_es"]),
                    n_siso_iter=int(row["n_siso_iter"]),
                    n_mimo_iter=int(row["n_mimo_iter"]),
                    selection=tuple(int(i) for i in row["selection"].split("-")),
                )
            )
    return records


def emit_summary_json(summary: dict, path) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")


# --- flat key = value config files -----------------------------------------

_TOP_INT = {"n_realizations", "seed", "n_rf", "n_sub", "n_taps"}
_TOP_FLOAT = {"rho_db", "sector_width_deg", "hpbw_deg", "f_s"}
_TOP_BOOL = {"nlos"}
_TOP_INT_LIST = {"ring_sizes", "k_values"}
_TOP_STR_LIST = {"methods"}
_CP_FIELDS = {f.name: f.type for f in fields(ChannelGenParams)}


def _parse_bool(key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low == "true":
        return True
    if low == "false":
        return False
    raise ValueError(f"{key}: expected true or false, got {raw!r}")


def _parse_scalar(key: str, raw: str, kind):
    try:
        return kind(raw.strip())
    except ValueError as exc:
        raise ValueError(f"{key}: {exc}") from exc


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines into a config, starting from the defaults.

    Keys are the ExperimentConfig field names (channel generator fields are
    prefixed ``channel_params.``); units are those the field names carry.
    Lists are comma-separated; blank lines and ``#`` comment lines are skipped.
    """
    top: dict = {}
    cp: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        try:
            if key in _TOP_INT:
                top[key] = _parse_scalar(key, raw, int)
            elif key in _TOP_FLOAT:
                top[key] = _parse_scalar(key, raw, float)
            elif key in _TOP_BOOL:
                top[key] = _parse_bool(key, raw)
            elif key in _TOP_INT_LIST:
                top[key] = tuple(
                    _parse_scalar(key, part, int) for part in raw.split(",")
                )
            elif key in _TOP_STR_LIST:
                top[key] = tuple(part.strip() for part in raw.split(","))
            elif key.startswith("channel_params."):
                sub = key[len("channel_params.") :]
                if sub not in _CP_FIELDS:
                    raise ValueError(f"unknown config key {key!r}")
                if sub == "los":
                    cp[sub] = _parse_bool(key, raw)
                elif sub == "rays_per_cluster":
                    cp[sub] = _parse_scalar(key, raw, int)
                else:
                    cp[sub] = _parse_scalar(key, raw, float)
            else:
                raise ValueError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None

    cfg = ExperimentConfig(**top) if top else ExperimentConfig()
    if cp:
        cfg = replace(cfg, channel_params=replace(cfg.channel_params, **cp))
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path) as f:
        cfg = parse_config_text(f.read())
    cfg.validate()
    return cfg
