"""Experiment configuration, execution and result serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import birthmark, moments, sectors
from .dynamics import convergence_curve
from .ensembles import SymmetryClass, sample_haar_state, sample_matrix
from .errors import ConfigurationError, OutputError
from .rng import GENERATOR_ID, check_seed
from .spectral import decompose

EXPERIMENTS = ("enhancement", "moments", "tensor", "sector", "convergence")
NSIGMA = 4.0
OFF_PATTERN_NSIGMA = 5.0
CONVERGENCE_RTOL = 1e-2

DEFAULT_PATHS = {"enhancement": "dirichlet", "moments": "dirichlet", "sector": "dirichlet"}
VALID_PATHS = {
    "enhancement": ("dirichlet", "matrix"),
    "moments": ("dirichlet", "haar"),
    "sector": ("dirichlet", "matrix"),
    "tensor": ("dense", "sliced"),
    "convergence": ("closed",),
}


@dataclass
class ExperimentConfig:
    experiment: str
    classes: tuple = ("GUE", "GOE")
    n: tuple = (32,)
    samples: int = 100_000
    seed: int = 0
    path: str | None = None
    layout: tuple = ()
    accessible: tuple = ()
    horizons: tuple = (10.0, 100.0, 1000.0, 10000.0)
    out: str | None = None
    workers: int = 1
    name: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(
                f"{self.experiment!r} not in {EXPERIMENTS}", field="experiment"
            )
        if isinstance(self.classes, str):
            self.classes = (self.classes,)
        expanded = []
        for c in self.classes:
            expanded += ["GUE", "GOE"] if str(c).lower() == "both" else [c]
        self.classes = tuple(SymmetryClass.parse(c).value for c in expanded)
        if isinstance(self.n, int):
            self.n = (self.n,)
        self.n = tuple(int(v) for v in self.n)
        for name in ("samples", "workers"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError("must be positive", field=name)
        if any(v < 1 for v in self.n) or not self.n:
            raise ConfigurationError("dimensions must be positive", field="n")
        self.samples = int(self.samples)
        self.seed = check_seed(self.seed)
        if self.path is None:
            self.path = DEFAULT_PATHS.get(self.experiment, VALID_PATHS[self.experiment][0])
        if self.path not in VALID_PATHS[self.experiment]:
            raise ConfigurationError(
                f"{self.path!r} invalid for {self.experiment}; use one of "
                f"{VALID_PATHS[self.experiment]}",
                field="path",
            )
        self.layout = tuple(int(v) for v in self.layout)
        self.accessible = tuple(int(v) for v in self.accessible)
        if self.experiment == "sector":
            if not self.layout or any(v < 1 for v in self.layout):
                raise ConfigurationError("sector experiment needs positive sector sizes", field="layout")
            if not self.accessible:
                raise ConfigurationError("sector experiment needs accessible sectors", field="accessible")
        self.horizons = tuple(float(v) for v in self.horizons)
        if not self.horizons or any(v <= 0 for v in self.horizons):
            raise ConfigurationError("horizons must be positive", field="horizons")

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        data = dict(data)
        if "class" in data:
            data["classes"] = data.pop("class")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown keys {sorted(unknown)}", field=sorted(unknown)[0])
        if "experiment" not in data:
            raise ConfigurationError("missing", field="experiment")
        return cls(**data)

    def label(self) -> str:
        return self.name or self.experiment


@dataclass
class Report:
    name: str
    experiment: str
    columns: list
    rows: list
    summary: list
    metadata: dict = field(default_factory=dict)
    extra_json: list | None = None

    @property
    def passed(self) -> bool:
        return all(s["passed"] for s in self.summary)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format_value(row[c]) for c in self.columns])
        return buf.getvalue()

    def summary_json(self) -> dict:
        return {
            "name": self.name,
            "experiment": self.experiment,
            "passed": self.passed,
            "metadata": self.metadata,
            "results": self.summary,
            **({"fits": self.extra_json} if self.extra_json is not None else {}),
        }


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple)):
        return " ".join(format_value(x) for x in v)
    return str(v)


ENHANCEMENT_COLUMNS = [
    "class", "n", "path", "samples", "p_aa_mean", "p_aa_stderr", "p_ab_mean",
    "p_ab_stderr", "ratio", "analytic_ratio", "seed",
]


def _enhancement_row(r: birthmark.EnhancementReport) -> dict:
    return {
        "class": r.cls.value,
        "n": r.n,
        "path": r.path,
        "samples": r.samples,
        "p_aa_mean": r.p_aa,
        "p_aa_stderr": r.p_aa_stats.stderr,
        "p_ab_mean": r.p_ab,
        "p_ab_stderr": r.p_ab_stats.stderr,
        "ratio": r.ratio,
        "analytic_ratio": r.analytic_ratio,
        "seed": r.seed,
    }


def _enhancement_summary(r: birthmark.EnhancementReport) -> dict:
    verdicts = r.verdicts(NSIGMA)
    return {
        "class": r.cls.value,
        "n": r.n,
        "checks": {
            "p_aa": _check(r.p_aa, r.p_aa_stats.stderr, r.analytic_p_aa, verdicts["p_aa"]),
            "p_ab": _check(r.p_ab, r.p_ab_stats.stderr, r.analytic_p_ab, verdicts["p_ab"]),
            "ratio": _check(r.ratio, r.ratio_stderr, r.analytic_ratio, verdicts["ratio"]),
        },
        "band_nsigma": NSIGMA,
        "degenerate_events": r.metadata.get("degenerate_events", 0),
        "passed": all(verdicts.values()),
    }


def _check(value, stderr, analytic, ok):
    return {"value": value, "stderr": stderr, "analytic": analytic, "passed": bool(ok)}


def _run_enhancement(cfg):
    rows, summary = [], []
    for c in cfg.classes:
        for n in cfg.n:
            r = birthmark.estimate_enhancement(
                c, n, cfg.samples, cfg.seed, cfg.path, workers=cfg.workers
            )
            rows.append(_enhancement_row(r))
            summary.append(_enhancement_summary(r))
    return ENHANCEMENT_COLUMNS, rows, summary, None


MOMENT_COLUMNS = [
    "class", "n", "source", "samples", "e_pi_sq_mean", "e_pi_sq_stderr", "e_pi_sq_analytic",
    "e_pi_pj_mean", "e_pi_pj_stderr", "e_pi_pj_analytic", "normalization_residual", "seed",
]


def _run_moments(cfg):
    rows, summary = [], []
    for c in cfg.classes:
        for n in cfg.n:
            est = moments.estimate_moments(c, n, cfg.samples, cfg.seed, cfg.path, workers=cfg.workers)
            ref = est.analytic
            pair = est.e_pi_pj
            pj_ref = float(ref.e_pi_pj) if ref.e_pi_pj is not None else math.nan
            rows.append({
                "class": c,
                "n": n,
                "source": est.source,
                "samples": cfg.samples,
                "e_pi_sq_mean": est.e_pi_sq.mean,
                "e_pi_sq_stderr": est.e_pi_sq.stderr,
                "e_pi_sq_analytic": float(ref.e_pi_sq),
                "e_pi_pj_mean": pair.mean if pair else math.nan,
                "e_pi_pj_stderr": pair.stderr if pair else math.nan,
                "e_pi_pj_analytic": pj_ref,
                "normalization_residual": ref.normalization_residual(),
                "seed": cfg.seed,
            })
            checks = {
                "e_pi_sq": _check(est.e_pi_sq.mean, est.e_pi_sq.stderr, float(ref.e_pi_sq),
                                  est.e_pi_sq.within(float(ref.e_pi_sq), NSIGMA)),
                "normalization": _check(ref.normalization_residual(), 0.0, 0.0,
                                        abs(ref.normalization_residual()) <= 1e-12),
            }
            if pair is not None:
                checks["e_pi_pj"] = _check(pair.mean, pair.stderr, pj_ref, pair.within(pj_ref, NSIGMA))
            summary.append({
                "class": c, "n": n, "checks": checks, "band_nsigma": NSIGMA,
                "passed": all(ch["passed"] for ch in checks.values()),
            })
    return MOMENT_COLUMNS, rows, summary, None


TENSOR_COLUMNS = [
    "class", "n", "method", "samples", "diagonal_mean", "diagonal_stderr", "diagonal_analytic",
    "pair_moment", "pair_analytic", "pairing_ratio", "analytic_pairing_ratio", "residual",
    "residual_sigma", "seed",
]


def _run_tensor(cfg):
    rows, summary, fits = [], [], []
    for c in cfg.classes:
        for n in cfg.n:
            if cfg.path == "dense":
                fit = moments.estimate_fourth_tensor(c, n, cfg.samples, cfg.seed, workers=cfg.workers)
            else:
                fit = moments.estimate_fourth_tensor_sliced(c, n, cfg.samples, cfg.seed, workers=cfg.workers)
            ref = moments.analytic_moments(c, n)
            d_ref = float(ref.e_pi_pj)
            ratio = moments.pairing_ratio(fit)
            rows.append({
                "class": c,
                "n": n,
                "method": fit.method,
                "samples": cfg.samples,
                "diagonal_mean": fit.diagonal.mean,
                "diagonal_stderr": fit.diagonal.stderr,
                "diagonal_analytic": float(ref.e_pi_sq),
                "pair_moment": fit.pair_moment,
                "pair_analytic": d_ref,
                "pairing_ratio": ratio,
                "analytic_pairing_ratio": float(fit.cls.pairing_factor),
                "residual": fit.residual,
                "residual_sigma": fit.residual_sigma,
                "seed": cfg.seed,
            })
            checks = {
                "diagonal": _check(fit.diagonal.mean, fit.diagonal.stderr, float(ref.e_pi_sq),
                                   fit.diagonal.within(float(ref.e_pi_sq), NSIGMA)),
                "off_pattern_sigma": _check(fit.residual_sigma, 1.0, 0.0,
                                            fit.residual_sigma < OFF_PATTERN_NSIGMA),
            }
            for name, est in fit.coefficients.items():
                checks[name] = _check(est.mean, est.stderr, d_ref, _within_abs(est, d_ref))
            summary.append({
                "class": c, "n": n, "checks": checks, "band_nsigma": NSIGMA,
                "off_pattern_nsigma": OFF_PATTERN_NSIGMA,
                "passed": all(ch["passed"] for ch in checks.values()),
            })
            fits.append(fit.to_json())
    return TENSOR_COLUMNS, rows, summary, fits


def _within_abs(est, target, floor=1e-12):
    # dense-fit coefficients can have a vanishing stderr; keep a rounding floor
    return abs(est.mean - target) <= max(NSIGMA * est.stderr, floor)


SECTOR_COLUMNS = ENHANCEMENT_COLUMNS[:1] + ["layout", "accessible", "d"] + ENHANCEMENT_COLUMNS[1:]


def _run_sector(cfg):
    layout = sectors.SectorLayout(cfg.layout, cfg.accessible)
    rows, summary = [], []
    for c in cfg.classes:
        r = sectors.estimate_sector_ratio(layout, c, cfg.samples, cfg.seed, cfg.path, workers=cfg.workers)
        row = _enhancement_row(r)
        row.update(layout=list(layout.sector_dims), accessible=list(layout.accessible),
                   d=layout.accessible_dim)
        rows.append(row)
        s = _enhancement_summary(r)
        s.update(layout=list(layout.sector_dims), accessible=list(layout.accessible),
                 d=layout.accessible_dim)
        summary.append(s)
    return SECTOR_COLUMNS, rows, summary, None


CONVERGENCE_COLUMNS = ["class", "n", "pair", "T", "value", "limit", "abs_error", "envelope"]


def _run_convergence(cfg):
    rows, summary = [], []
    for c in cfg.classes:
        for n in cfg.n:
            spec = decompose(sample_matrix(c, n, cfg.seed))
            a = sample_haar_state(c, n, cfg.seed, stream=1)
            b = sample_haar_state(c, n, cfg.seed, stream=2)
            for pair, (x, y) in (("return", (a, a)), ("transition", (a, b))):
                curve = convergence_curve(spec, x, y, cfg.horizons)
                for row, env in zip(curve.rows(), curve.envelope):
                    rows.append({"class": c, "n": n, "pair": pair, **row, "envelope": float(env)})
                err = curve.abs_errors
                rel_last = float(curve.rel_errors[-1])
                checks = {
                    "final_rel_error": _check(rel_last, 0.0, 0.0, rel_last < CONVERGENCE_RTOL),
                    "error_decreases": _check(float(err[-1]), 0.0, float(err[0]),
                                              len(err) < 2 or err[-1] < err[0]),
                    "envelope_bounds_error": _check(float(np.max(err - curve.envelope)), 0.0, 0.0,
                                                    bool(np.all(err <= curve.envelope + 1e-14))),
                    "envelope_monotone": _check(0.0, 0.0, 0.0,
                                                bool(np.all(np.diff(curve.envelope) <= 0))),
                }
                summary.append({
                    "class": c, "n": n, "pair": pair, "limit": curve.limit,
                    "mean_level_spacing": spec.mean_level_spacing, "unit": curve.unit,
                    "checks": checks, "rtol": CONVERGENCE_RTOL,
                    "passed": all(ch["passed"] for ch in checks.values()),
                })
    return CONVERGENCE_COLUMNS, rows, summary, None


_RUNNERS = {
    "enhancement": _run_enhancement,
    "moments": _run_moments,
    "tensor": _run_tensor,
    "sector": _run_sector,
    "convergence": _run_convergence,
}


def run(cfg: ExperimentConfig) -> Report:
    """Execute one experiment. Output depends only on the config, never on workers."""
    columns, rows, summary, extra = _RUNNERS[cfg.experiment](cfg)
    cfg_meta = {k: v for k, v in asdict(cfg).items() if k not in ("out", "workers")}
    meta = {"generator": GENERATOR_ID, "config": cfg_meta}
    if cfg.experiment == "convergence":
        meta["time_unit"] = "inverse mean level spacing"
    return Report(cfg.label(), cfg.experiment, columns, rows, summary, meta, extra)


def write_report(report: Report, out_dir) -> list:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{report.name}.csv"
        json_path = out / f"{report.name}.json"
        csv_path.write_text(report.csv_text(), encoding="utf-8")
        json_path.write_text(_dumps(report.summary_json()), encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write results to {out}: {exc}") from exc
    return [csv_path, json_path]


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def verify_all_configs(seed=0, samples=None, workers=1) -> list:
    """The standard suite: one config per closed-form prediction."""

    def s(default):
        return samples or default

    common = {"seed": seed, "workers": workers}
    return [
        ExperimentConfig("enhancement", n=(8, 32, 128), samples=s(100_000), name="enhancement_dirichlet", **common),
        ExperimentConfig("enhancement", n=(64,), samples=s(1_000), path="matrix", name="enhancement_matrix", **common),
        ExperimentConfig("moments", n=(2, 4, 8, 16), samples=s(1_000_000), name="moments", **common),
        ExperimentConfig("tensor", n=(8,), samples=s(1_000_000), path="dense", name="tensor", **common),
        ExperimentConfig("sector", classes=("GUE",), layout=(4, 4), accessible=(0,),
                         samples=s(100_000), name="sector_gue_8_4", **common),
        ExperimentConfig("sector", classes=("GOE",), layout=(4, 4, 8), accessible=(0,),
                         samples=s(100_000), name="sector_goe_16_4", **common),
        ExperimentConfig("convergence", n=(16,), name="convergence", **common),
    ]
