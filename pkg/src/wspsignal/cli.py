"""Command-line interface: `test`, `simulate`, `evaluate`, `power`.

simulate/power read a plain-text key-value config file (``key = value``,
``#`` comments, comma-separated lists) so every run is reproducible from
the config plus its master_seed. All numeric output uses 6 significant
digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import pandas as pd

from . import detect, evaluate, fit, simulate
from .models import SurvivalSample

DEFAULT_LEVELS = [round(0.01 * k, 2) for k in range(1, 11)]


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


class ConfigError(ValueError):
    pass


class RunConfig:
    """Key-value run manifest; unknown keys are rejected so typos fail loudly."""

    def __init__(self, values: dict, allowed: set):
        unknown = set(values) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        self._values = values

    @classmethod
    def load(cls, path, allowed):
        values = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
        return cls(values, allowed)

    def get(self, key, default=None):
        return self._values.get(key, default)

    def require(self, key):
        if key not in self._values:
            raise ConfigError(f"missing required config key: {key}")
        return self._values[key]

    def get_int(self, key, default=None):
        v = self.get(key)
        return default if v is None else int(v)

    def get_float(self, key, default=None):
        v = self.get(key)
        return default if v is None else float(v)

    def _list(self, key, default, conv):
        v = self.get(key)
        if v is None:
            return list(default)
        try:
            return [conv(x.strip()) for x in v.split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError(f"config key {key}: {exc}") from exc

    def get_floats(self, key, default=()):
        return self._list(key, default, float)

    def get_ints(self, key, default=()):
        return self._list(key, default, int)

    def get_strs(self, key, default=()):
        return self._list(key, default, str)


def _read_dataset(path, window_end) -> SurvivalSample:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != ["id", "time", "status"]:
            raise ConfigError(f"{path}: expected CSV header 'id,time,status'")
        for rownum, row in enumerate(reader, start=2):
            if len(row) < 3:
                raise ConfigError(f"{path}: row {rownum}: expected 3 columns")
            try:
                t = float(row[1])
                status = int(row[2])
            except ValueError:
                raise ConfigError(f"{path}: row {rownum}: non-numeric time or status")
            if t <= 0:
                raise ConfigError(f"{path}: row {rownum}: time must be positive")
            if t > window_end:
                raise ConfigError(f"{path}: row {rownum}: time beyond window end {window_end:g}")
            if status not in (0, 1):
                raise ConfigError(f"{path}: row {rownum}: status must be 0 or 1")
            records.append((t, status))
    if not records:
        raise ConfigError(f"{path}: dataset is empty")
    return SurvivalSample.from_records(records, window_end)


def _component_report(name, label, sample, model, level):
    """Fit one base test for the report; returns a dict of display fields."""
    if sample.n_events == 0:
        return {"component": name, "status": "not_estimable", "note": "no events"}
    f = fit.fit_weibull(sample) if model == "weibull" else fit.fit_pgw(sample)
    if not f.converged:
        return {"component": name, "status": "not_estimable"}
    entry = {"component": name, "status": "converged"}
    indices = (0,) if model == "weibull" else (0, 1)
    for i in indices:
        ci = fit.wald_interval(f, i, level)
        pname = f.param_names[i]
        entry[pname] = {
            "estimate": float(f.estimates[i]),
            "ci_lower": ci.lower,
            "ci_upper": ci.upper,
            "p_value": fit.shape_pvalue(f, i),
        }
    entry["scale"] = float(f.estimates[-1])
    return entry


def cmd_test(args) -> int:
    sample = _read_dataset(args.data, args.window_end)
    if sample.n_events == 0:
        raise ConfigError(f"{args.data}: dataset has no events")
    spec = detect.TestSpec(args.combination, args.significance)
    outcome = detect.run_combination(sample, spec)
    members = detect._MEMBERS[spec.combination]
    report = {
        "combination": spec.combination,
        "significance": spec.significance,
        "signal": outcome.signal,
        "n_observations": len(sample),
        "n_events": sample.n_events,
        "components": [],
    }
    builders = {
        "wsp": lambda: _component_report("wsp", "WSP", sample, "weibull", spec.significance),
        "cwsp": lambda: _component_report(
            "cwsp", "cWSP",
            detect.censor_at(sample, sample.window_end / 2.0), "weibull", spec.significance,
        ),
        "pwsp": lambda: _component_report("pwsp", "pWSP", sample, "pgw", spec.significance),
    }
    for m in members:
        report["components"].append(builders[m]())

    print(f"combination: {report['combination']}  significance: {_fmt(spec.significance)}")
    print(f"observations: {report['n_observations']}  events: {report['n_events']}")
    for comp in report["components"]:
        print(f"  {comp['component']}: {comp['status']}")
        for pname in ("shape", "nu", "gamma"):
            if pname in comp:
                v = comp[pname]
                print(
                    f"    {pname} = {_fmt(v['estimate'])} "
                    f"[{_fmt(v['ci_lower'])}, {_fmt(v['ci_upper'])}]  p = {_fmt(v['p_value'])}"
                )
    print(f"decision: {'signal' if outcome.signal else 'no signal'}")
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(report, fh, indent=2)
    return 0


_SIM_KEYS = {
    "n_obs", "background_rate", "adr_rate_rel", "adr_sd_days", "window_end",
    "replications", "master_seed", "combinations", "significance_levels",
    "output", "threads",
}


def _sim_grid_from_config(cfg: RunConfig):
    window = cfg.get_float("window_end", simulate.DEFAULT_WINDOW)
    grid = simulate.default_grid(
        n_obs=cfg.get_ints("n_obs", (5000, 10000, 20000, 50000)),
        background_rates=cfg.get_floats("background_rate", (0.01, 0.05, 0.10)),
        adr_rates=cfg.get_floats("adr_rate_rel", (0.0, 0.1, 0.2, 0.5, 1.0)),
        sd_days=cfg.get_floats("adr_sd_days", simulate.DEFAULT_SD_DAYS),
        window_end=window,
        replications=cfg.get_int("replications", 1000),
        master_seed=cfg.get_int("master_seed", 0),
    )
    specs = simulate.default_specs(
        combinations=cfg.get_strs("combinations", detect.COMBINATIONS),
        levels=cfg.get_floats("significance_levels", DEFAULT_LEVELS),
    )
    return grid, specs


def cmd_simulate(args) -> int:
    cfg = RunConfig.load(args.config, _SIM_KEYS)
    grid, specs = _sim_grid_from_config(cfg)
    threads = args.threads or cfg.get_int("threads") or os.cpu_count() or 1
    out = args.output or cfg.require("output")
    rows = simulate.run_grid(grid, specs, threads=threads)
    simulate.write_outcomes(rows, out)
    print(f"wrote {len(rows)} outcome rows to {out}")
    return 0


def _load_outcomes(path) -> pd.DataFrame:
    frame = pd.read_csv(path)
    missing = [c for c in simulate.OUTCOME_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigError(f"{path}: outcome CSV missing columns {missing}")
    return frame


def _ranking_block(summaries, stratum_key, value, by, top_k):
    block = summaries[summaries[stratum_key] == value]
    ranked = evaluate.rank(block, by=by).head(top_k)
    lines = [f"Ranking by {by}  ({stratum_key} = {_fmt(value)})"]
    lines.append(f"{'rank':>4}  {'combination':<12} {'signif.':>8} {by:>10} {'fp':>8} {'tp':>8}")
    for i, row in enumerate(ranked.itertuples(), start=1):
        lines.append(
            f"{i:>4}  {row.combination:<12} {_fmt(row.significance):>8} "
            f"{getattr(row, by):>10.4f} {row.fp:>8.4f} {row.tp:>8.4f}"
        )
    return "\n".join(lines)


def cmd_evaluate(args) -> int:
    outcomes = _load_outcomes(args.outcomes)
    summaries = evaluate.summarize(outcomes, group_keys=(args.stratify,))
    strata = sorted(summaries[args.stratify].unique())
    report_parts = []
    for by in ("auc", "accuracy"):
        ranked_all = []
        for value in strata:
            block = summaries[summaries[args.stratify] == value]
            ranked_all.append(evaluate.rank(block, by=by).head(args.top_k))
            report_parts.append(_ranking_block(summaries, args.stratify, value, by, args.top_k))
        pd.concat(ranked_all).to_csv(
            f"{args.output_prefix}_{by}.csv", index=False, float_format="%.6g"
        )
    report = "\n\n".join(report_parts) + "\n"
    with open(f"{args.output_prefix}_report.txt", "w") as fh:
        fh.write(report)
    print(report, end="")
    return 0


_POWER_KEYS = {
    "background_rate", "adr_rate_rel", "adr_sd_days", "window_end",
    "replications", "master_seed", "combination", "significance",
    "targets", "n_grid", "granularity", "output", "threads",
}


def cmd_power(args) -> int:
    cfg = RunConfig.load(args.config, _POWER_KEYS)
    window = cfg.get_float("window_end", simulate.DEFAULT_WINDOW)
    spec = detect.TestSpec(
        cfg.get("combination", "dWSP-pWSP"), cfg.get_float("significance", 0.01)
    )
    targets = cfg.get_floats("targets", (0.8, 0.9))
    n_grid = cfg.get_ints("n_grid")
    if not n_grid:
        raise ConfigError("missing required config key: n_grid")
    sd_days = cfg.get_floats("adr_sd_days", simulate.DEFAULT_SD_DAYS)
    reps = cfg.get_int("replications", 500)
    seed = cfg.get_int("master_seed", 0)
    granularity = cfg.get_int("granularity", 50)
    threads = args.threads or cfg.get_int("threads") or os.cpu_count() or 1
    out = args.output or cfg.require("output")

    rows = []
    for bg in cfg.get_floats("background_rate", (0.05,)):
        for adr in cfg.get_floats("adr_rate_rel", (1.0,)):
            templates = [
                simulate.Scenario(
                    n_obs=n_grid[0], background_rate=bg, adr_rate_rel=adr,
                    adr_sd_rel=sd / window, window_end=window,
                    replications=max(1, reps // len(sd_days)), master_seed=seed,
                )
                for sd in sd_days
            ]
            for target in targets:
                res = evaluate.sample_size_search(
                    target, templates, spec, n_grid,
                    granularity=granularity, threads=threads,
                )
                rows.append(
                    {
                        "background_rate": _fmt(bg),
                        "adr_rate_rel": _fmt(adr),
                        "combination": spec.combination,
                        "significance": _fmt(spec.significance),
                        "target": _fmt(target),
                        "n_required": f">{max(n_grid)}" if res.exceeds_grid else res.n_required,
                        "n_events_mean": "" if res.n_events_mean is None else _fmt(res.n_events_mean),
                        "power": "" if res.power is None else _fmt(res.power),
                        "mc_se": "" if res.mc_se is None else _fmt(res.mc_se),
                    }
                )
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    for r in rows:
        print(
            f"bg {r['background_rate']}  adr {r['adr_rate_rel']}  target {r['target']}: "
            f"n = {r['n_required']}  (mean events {r['n_events_mean'] or 'n/a'})"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsp-signal",
        description="Shape-parameter signal detection for adverse drug reactions "
        "from time-to-event data, with simulation and evaluation tooling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run a test combination on a dataset CSV")
    p_test.add_argument("data", help="CSV with header id,time,status (status 1=event)")
    p_test.add_argument("--combination", default="dWSP-pWSP", choices=detect.COMBINATIONS)
    p_test.add_argument("--significance", type=float, default=0.01)
    p_test.add_argument("--window-end", type=float, default=simulate.DEFAULT_WINDOW)
    p_test.add_argument("--output", help="optional JSON report path")
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="run a simulation grid from a config file")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--output", help="overrides the config's output path")
    p_sim.add_argument("--threads", type=int)
    p_sim.set_defaults(func=cmd_simulate)

    p_eval = sub.add_parser("evaluate", help="rank combinations from an outcome CSV")
    p_eval.add_argument("--outcomes", required=True)
    p_eval.add_argument("--stratify", default="background_rate")
    p_eval.add_argument("--top-k", type=int, default=10)
    p_eval.add_argument("--output-prefix", default="ranking")
    p_eval.set_defaults(func=cmd_evaluate)

    p_pow = sub.add_parser("power", help="power estimation and sample-size search")
    p_pow.add_argument("--config", required=True)
    p_pow.add_argument("--output", help="overrides the config's output path")
    p_pow.add_argument("--threads", type=int)
    p_pow.set_defaults(func=cmd_power)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
