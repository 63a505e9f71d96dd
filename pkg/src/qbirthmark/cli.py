"""Command-line front end.

Precedence for every field: built-in defaults < ``--config`` JSON < flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import BirthmarkError, ConfigurationError, OutputError
from .harness import EXPERIMENTS, ExperimentConfig, run, verify_all_configs, write_report

log = logging.getLogger("qbirthmark")

_FLAG_FIELDS = {
    "classes": "classes",
    "n": "n",
    "samples": "samples",
    "seed": "seed",
    "path": "path",
    "layout": "layout",
    "accessible": "accessible",
    "horizons": "horizons",
    "out": "out",
    "workers": "workers",
}


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--class", dest="classes", nargs="+", help="GUE, GOE or both")
    p.add_argument("--n", type=int, nargs="+", help="Hilbert-space dimension(s)")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--path", help="estimator path (experiment specific)")
    p.add_argument("--layout", type=int, nargs="+", help="sector dimensions")
    p.add_argument("--accessible", type=int, nargs="+", help="accessible sector indices")
    p.add_argument("--horizons", type=float, nargs="+", help="horizons in inverse mean gaps")
    p.add_argument("--out", help="output directory for CSV and JSON results")
    p.add_argument("--workers", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qbirthmark",
        description="Monte Carlo checks of return-probability enhancement in GOE/GUE systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _add_common(sub.add_parser(name, help=f"run the {name} experiment"))
    _add_common(sub.add_parser("verify-all", help="run every standard check"))
    return parser


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}", field="config") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON in {path}: {exc}", field="config") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a JSON object", field="config")
    return data


def config_from_args(args) -> ExperimentConfig:
    data = _load_config(args.config)
    data["experiment"] = args.command
    for attr, key in _FLAG_FIELDS.items():
        value = getattr(args, attr)
        if value is not None:
            data[key] = value
    return ExperimentConfig.from_dict(data)


def _print_summary(report, stream):
    for s in report.summary:
        tag = "PASS" if s["passed"] else "FAIL"
        where = " ".join(f"{k}={s[k]}" for k in ("class", "n", "pair", "d") if k in s)
        detail = "; ".join(
            f"{name}={ch['value']:.6g} (ref {ch['analytic']:.6g})" for name, ch in s["checks"].items()
        )
        print(f"[{tag}] {report.name} {where}: {detail}", file=stream)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "verify-all":
            base = _load_config(args.config)
            seed = args.seed if args.seed is not None else base.get("seed", 0)
            samples = args.samples if args.samples is not None else base.get("samples")
            workers = args.workers if args.workers is not None else base.get("workers", 1)
            configs = verify_all_configs(seed=seed, samples=samples, workers=workers)
            out = args.out if args.out is not None else base.get("out")
        else:
            configs = [config_from_args(args)]
            out = configs[0].out
        ok = True
        for cfg in configs:
            report = run(cfg)
            ok = ok and report.passed
            if out:
                write_report(report, out)
                _print_summary(report, sys.stdout)
            else:
                sys.stdout.write(report.csv_text())
                _print_summary(report, sys.stderr)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 3
    except BirthmarkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
