"""Command-line front end.

    edgesplit thresholds --config cfg.json --out outdir
    edgesplit place      --config cfg.json --out outdir [--strategy ...]
    edgesplit sweep      --config cfg.json --out outdir
    edgesplit simulate   --config cfg.json --out outdir [--trials N] [--seed S]

Outputs are CSV (12 significant digits, provenance in leading '#' comment
lines) plus JSON where noted. Exit codes: 0 ok, 2 config error, 3 numerical
failure, 4 a simulate consistency check failed.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import QUAD_EPSABS, QUAD_EPSREL
from .config import ExperimentConfig, load_config
from .cost_model import cost_model
from .errors import ConfigError, NumericalError
from .placement import run_strategy
from .simulate import RNG_ALGORITHM, sim_report_json, simulate
from .splitting import (
    ThresholdPolicy,
    backward_induction,
    expected_etc,
    forced_offload_policy,
    one_sla_optimality_probability,
    one_sla_thresholds,
    stop_probabilities,
)

_FMT = "{:.12g}"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return _FMT.format(x)


def _jsonable(obj):
    """Replace non-finite floats so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def _metadata(cfg: ExperimentConfig, seed=None) -> dict:
    dists = cfg.stage_dists(1)
    floor = dists[0].support_lo if dists[0].kind != "discrete" else None
    return {
        "tool": "edgesplit",
        "version": __version__,
        "config_sha256": cfg.config_hash(),
        "rng_algorithm": RNG_ALGORITHM,
        "seed": cfg.seed if seed is None else seed,
        "snr_floor": floor,
        "quad_epsabs": QUAD_EPSABS,
        "quad_epsrel": QUAD_EPSREL,
    }


def _write_csv(path: Path, metadata: dict, header: str, rows: list[str]):
    lines = [f"# {k}={_fmt(v) if isinstance(v, float) else v}" for k, v in metadata.items()]
    lines.append(header)
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _horizon(cfg: ExperimentConfig) -> int:
    return cfg.horizon_M if cfg.horizon_M is not None else cfg.network.N


def _policy_for_rule(rule: str, M: int, cfg, dists) -> ThresholdPolicy:
    if M == 0:
        return forced_offload_policy(rule, cfg.network, cfg.params, dists)
    if rule == "optimal":
        return backward_induction(M, cfg.network, cfg.params, dists)
    return one_sla_thresholds(M, cfg.network, cfg.params, dists)


def cmd_thresholds(cfg: ExperimentConfig, out: Path) -> int:
    M = _horizon(cfg)
    dists = cfg.stage_dists(max(M, 1) + 1)
    rows = []
    for rule in ("optimal", "one_sla"):
        policy = _policy_for_rule(rule, M, cfg, dists)
        for n in range(1, M + 2):
            threshold = policy.thresholds[n - 1] if n <= M else None
            value = policy.value_table[n - 1] if policy.value_table else None
            rows.append(f"{n},{rule},{_fmt(threshold)},{_fmt(value)}")
    _write_csv(out / "thresholds.csv", _metadata(cfg),
               "stage,rule,threshold_snr,value_table", rows)
    return 0


def _check_closed_form_applicable(cfg: ExperimentConfig):
    if "mlp_closed_form" not in cfg.strategies:
        return
    if cfg.mlp is None:
        raise ConfigError("strategy mlp_closed_form needs an MLP network",
                          field="strategies")
    if not cfg.mlp.is_equal_width:
        raise ConfigError("strategy mlp_closed_form needs equal widths at every layer",
                          field="strategies")


def cmd_place(cfg: ExperimentConfig, out: Path) -> int:
    _check_closed_form_applicable(cfg)
    dists = cfg.stage_dists(cfg.network.N + 1)
    reports = []
    for strategy in cfg.strategies:
        reports.append(run_strategy(strategy, cfg.network, cfg.params, dists, mlp=cfg.mlp))
    rows = [r for rep in reports for r in rep.to_csv_rows()]
    _write_csv(out / "placement.csv", _metadata(cfg),
               "strategy,M,Z,expected_etc,psi,best", rows)
    _write_json(out / "placement.json", {
        "metadata": _metadata(cfg),
        "reports": [rep.to_json_dict() for rep in reports],
    })
    return 0


def _sweep_point(cfg: ExperimentConfig, variable: str, value):
    """Params/distributions/label for one sweep point."""
    if variable == "distance_m":
        dists = cfg.stage_dists(cfg.network.N + 1, distance_override=value)
        return cfg.params, dists, value
    if variable == "updates_per_model":
        pdict = cfg.params.to_json_dict()
        pdict["updates_per_model"] = "inf" if math.isinf(value) else value
        from .cost_model import SystemParams

        params = SystemParams.from_json_dict(pdict)
        return params, cfg.stage_dists(cfg.network.N + 1, params=params), value
    raise ConfigError(f"unsupported sweep variable {variable!r}", field="sweep.variable")


def cmd_sweep(cfg: ExperimentConfig, out: Path) -> int:
    if cfg.sweep is None:
        raise ConfigError("sweep command needs a 'sweep' section", field="sweep")
    _check_closed_form_applicable(cfg)
    rows = []
    if cfg.sweep.variable == "M":
        allowed = ("optimal_exhaustive", "one_sla_exhaustive")
        bad = [s for s in cfg.strategies if s not in allowed]
        if bad:
            raise ConfigError(
                f"an M sweep evaluates stopping rules; unsupported strategies {bad}",
                field="strategies")
        dists = cfg.stage_dists(cfg.network.N + 1)
        cm = cost_model(cfg.network, cfg.params)
        for M in cfg.sweep.values:
            opt_prob = one_sla_optimality_probability(M, cfg.network, cfg.params, dists) if M >= 1 else 1.0
            for strategy in cfg.strategies:
                rule = "optimal" if strategy == "optimal_exhaustive" else "one_sla"
                policy = _policy_for_rule(rule, M, cfg, dists)
                ee = expected_etc(policy, cfg.network, cfg.params, dists)
                z = cm.total_cost(M, ee)
                rows.append(f"{_fmt(float(M))},{strategy},{M},{_fmt(z)},{_fmt(ee)},{_fmt(opt_prob)}")
    else:
        for value in cfg.sweep.values:
            params, dists, axis_value = _sweep_point(cfg, cfg.sweep.variable, value)
            for strategy in cfg.strategies:
                rep = run_strategy(strategy, cfg.network, params, dists, mlp=cfg.mlp)
                best = rep.row(rep.best_M)
                rows.append(
                    f"{_fmt(float(axis_value))},{strategy},{rep.best_M},"
                    f"{_fmt(best.Z)},{_fmt(best.expected_etc)},"
                )
    _write_csv(out / "sweep.csv", _metadata(cfg),
               "axis_value,strategy,best_M,Z,expected_etc,optimality_prob", rows)
    return 0


def cmd_simulate(cfg: ExperimentConfig, out: Path) -> int:
    M = _horizon(cfg)
    dists = cfg.stage_dists(max(M, 1) + 1)
    rules = []
    for strategy in cfg.strategies:
        if strategy == "optimal_exhaustive":
            rules.append("optimal")
        elif strategy == "one_sla_exhaustive":
            rules.append("one_sla")
        else:
            raise ConfigError(
                f"simulate evaluates stopping rules; strategy {strategy!r} unsupported",
                field="strategies")

    entries = []
    csv_rows = []
    all_ok = True
    for rule in rules:
        policy = _policy_for_rule(rule, M, cfg, dists)
        result = simulate(policy, cfg.network, cfg.params, dists, cfg.trials, cfg.seed)
        analytic_mean = expected_etc(policy, cfg.network, cfg.params, dists)
        analytic_probs = stop_probabilities(policy, dists)
        mean_delta = result.mean_etc - analytic_mean
        mean_ok = abs(mean_delta) <= max(3.0 * result.std_error, 1e-12 * max(1.0, abs(analytic_mean)))
        bins_ok = True
        for freq, p in zip(result.stop_histogram, analytic_probs):
            sigma = math.sqrt(max(p * (1.0 - p), 0.0) / result.trials)
            if abs(freq - p) > 3.0 * sigma + 1.0 / result.trials:
                bins_ok = False
        all_ok = all_ok and mean_ok and bins_ok
        entry = sim_report_json(result, policy, cfg.network, cfg.params, dists)
        entry.update({
            "rule": rule,
            "analytic_mean_etc": analytic_mean,
            "mean_delta": mean_delta,
            "analytic_stop_probabilities": list(map(float, analytic_probs)),
            "checks": {"mean_within_3_sigma": mean_ok, "histogram_within_3_sigma": bins_ok},
        })
        entries.append(entry)
        for n, (freq, p) in enumerate(zip(result.stop_histogram, analytic_probs), start=1):
            csv_rows.append(f"{rule},{n},{_fmt(freq)},{_fmt(float(p))}")

    _write_json(out / "sim.json", {
        "metadata": _metadata(cfg),
        "results": entries,
        "all_checks_passed": all_ok,
    })
    _write_csv(out / "sim.csv", _metadata(cfg),
               "rule,stage,frequency,analytic_probability", csv_rows)
    return 0 if all_ok else 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgesplit",
        description="Plan layer placement and online split points for device-edge inference.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("thresholds", "write per-stage stopping thresholds for both rules"),
        ("place", "optimize the number of on-device layers"),
        ("sweep", "run a parameter sweep from the config's sweep section"),
        ("simulate", "Monte Carlo validation of the stopping rules"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="path to the experiment JSON")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--trials", type=int, help="override the config trial count")
        p.add_argument("--updates", help="override updates per model ('inf' allowed)")
        p.add_argument("--strategy", action="append",
                       help="restrict to a strategy (repeatable)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if args.updates is not None:
            raw.setdefault("params", {})["updates_per_model"] = args.updates
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.trials is not None:
            raw["trials"] = args.trials
        if args.strategy:
            raw["strategies"] = args.strategy
        cfg = load_config(raw)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        handler = {
            "thresholds": cmd_thresholds,
            "place": cmd_place,
            "sweep": cmd_sweep,
            "simulate": cmd_simulate,
        }[args.command]
        return handler(cfg, out)
    except (ConfigError, json.JSONDecodeError, FileNotFoundError) as exc:
        field = getattr(exc, "field", None)
        where = f" (field: {field})" if field else ""
        print(f"edgesplit: config error{where}: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"edgesplit: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
