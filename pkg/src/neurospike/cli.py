"""Command line entry point: ``neurospike run|verify|scenarios``.

Exit status is 0 when every enabled check passes, 1 when a check fails or a
run aborts (zeno guard, divergence), and 2 for bad arguments or configs.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analysis, io, simulator
from .config import ConfigError, bundled_scenarios, parse_overrides, parse_scenario
from .simulator import Scenario, SimulationError, Trace

OUT_ENV = "NEUROSPIKE_OUT"
MODES = ("neurospike", "continuous", "blended")


@dataclass
class RunConfig:
    scenario: str
    out_dir: Path
    mode: str = "neurospike"
    overrides: dict = field(default_factory=dict)


def _out_dir(flag: Optional[str], scenario_name: str) -> Path:
    if flag:
        return Path(flag)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    return Path("neurospike-out") / scenario_name


def _failure(check: str, message: str) -> dict:
    return {"check": check, "message": message}


def _run_mode(mode: str, sc: Scenario) -> tuple[Optional[Trace], float, Optional[str]]:
    fn = {"neurospike": simulator.run, "continuous": simulator.run_continuous,
          "blended": simulator.run_blended}[mode]
    start = time.perf_counter()
    try:
        trace = fn(sc)
    except SimulationError as exc:
        return None, time.perf_counter() - start, f"{type(exc).__name__}: {exc}"
    return trace, time.perf_counter() - start, None


def _spike_checks(trace: Trace, sc: Scenario) -> tuple[dict, list[dict]]:
    report, failures = {}, []
    if sc.mu == 0:
        amp = analysis.verify_amp_bound(trace, sc)
        report["amp_bound"] = {"passed": amp.passed, "bound": amp.bound, "slack": amp.slack,
                               "max_abs": amp.max_abs, "worst": float(amp.max_abs.max())}
        if not amp.passed:
            failures.append(_failure("amp_bound", f"max |integrated error| {amp.max_abs.max():.6g} "
                                                  f"exceeds {amp.bound:.6g} + slack"))
    else:
        report["amp_bound"] = {"skipped": f"mu={sc.mu!r} is nonzero"}
    dwell = analysis.min_dwell(trace, sc)
    report["dwell"] = {"passed": dwell.passed, "min_gap": dwell.min_gap, "floor": dwell.floor,
                       "tolerance": dwell.tolerance}
    if not dwell.passed:
        failures.append(_failure("dwell", "an inter-spike gap fell below its dwell floor"))
    return report, failures


def run_command(cfg: RunConfig) -> int:
    sc = parse_scenario(cfg.scenario, cfg.overrides)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    from . import plots

    modes = MODES if cfg.mode == "all" else (cfg.mode,)
    window = sc.analysis_window
    summary: dict = {"scenario": sc.name, "digest": sc.digest(), "window": window, "modes": {}}
    failures: list[dict] = []
    traces: dict[str, Trace] = {}
    for mode in modes:
        trace, wall, err = _run_mode(mode, sc)
        entry: dict = {"wall_clock_s": wall}
        summary["modes"][mode] = entry
        if err:
            entry["error"] = err
            failures.append(_failure(mode, err))
            continue
        traces[mode] = trace
        entry["trace_digest"] = trace.digest()
        entry["states_csv"] = io.write_states_csv(trace, out / f"{mode}_states.csv").name
        if mode == "neurospike":
            entry["spikes_csv"] = io.write_spikes_csv(trace, out / "neurospike_spikes.csv").name

    reference = traces.get("blended")
    if reference is None and "neurospike" in traces:
        reference, _, _ = _run_mode("blended", sc)
    for mode in ("neurospike", "continuous"):
        if mode not in traces:
            continue
        trace = traces[mode]
        entry = summary["modes"][mode]
        entry["max_pairwise_distance"] = analysis.max_pairwise_distance(trace, window)
        if reference is not None:
            sync = analysis.sync_error(trace, reference, window)
            entry["sync"] = {"tail_sup": sync.tail_sup, "worst": sync.worst}
            if sc.state_dim == 2:
                entry["orbit_distance"] = [analysis.orbit_distance(trace, reference, window, agent=i)
                                           for i in range(sc.n_agents)]
    if "neurospike" in traces:
        trace = traces["neurospike"]
        stats = analysis.spike_statistics(trace, sc)
        summary["spike_stats"] = {
            "total_spikes": stats.total_spikes, "per_agent_counts": stats.per_agent_counts,
            "per_agent_rate": stats.per_agent_rate, "mean_rate": stats.mean_rate,
            "payload_rate": stats.payload_rate, "steady_rate": stats.steady_rate,
            "predicted_rate": stats.predicted_rate, "steady_window": stats.steady_window,
        }
        checks, fails = _spike_checks(trace, sc)
        summary["checks"] = checks
        failures += fails
        if "continuous" in traces:
            m = (trace.t >= window[0]) & (trace.t <= window[1])
            summary["continuous_gap"] = float(np.abs(trace.x[m] - traces["continuous"].x[m]).max())

    for mode, trace in traces.items():
        ref = reference if mode != "blended" else None
        plots.plot_states(trace, out / f"{mode}_states.svg", reference=ref, title=f"{sc.name}: {mode}")
        if sc.state_dim == 2:
            split = sc.coupling_start if sc.coupling_start > 0 else None
            plots.plot_phase(trace, out / f"{mode}_phase.svg", reference=ref, split=split,
                             title=f"{sc.name}: {mode}")

    summary["failures"] = failures
    io.write_json(summary, out / "summary.json")
    _print_run(summary, out)
    return 1 if failures else 0


def _print_run(summary: dict, out: Path) -> None:
    print(f"scenario {summary['scenario']}  digest {summary['digest'][:12]}  window {summary['window']}")
    for mode, entry in summary["modes"].items():
        line = f"  {mode:<11} {entry['wall_clock_s']:7.2f} s"
        if "error" in entry:
            line += f"  ERROR {entry['error']}"
        if "sync" in entry:
            line += f"  sync worst {entry['sync']['worst']:.4g}"
        if "orbit_distance" in entry:
            line += f"  orbit distance worst {max(entry['orbit_distance']):.4g}"
        print(line)
    if "spike_stats" in summary:
        s = summary["spike_stats"]
        print(f"  spikes {s['total_spikes']}  mean rate {s['mean_rate']:.1f}/s per agent")
    if "continuous_gap" in summary:
        print(f"  sup gap to continuous {summary['continuous_gap']:.4g}")
    for f in summary["failures"]:
        print(f"  FAIL {f['check']}: {f['message']}")
    print(f"artifacts in {out}")


def verify_command(cfg: RunConfig) -> int:
    sc = parse_scenario(cfg.scenario, cfg.overrides)
    results: list[dict] = []

    first, _, err = _run_mode("neurospike", sc)
    if err:
        results.append({"check": "simulation", "status": "fail", "detail": err})
        for name in ("amp_bound", "dwell", "determinism"):
            results.append({"check": name, "status": "fail", "detail": "no trace: simulation aborted"})
    else:
        checks, _ = _spike_checks(first, sc)
        amp = checks["amp_bound"]
        if "skipped" in amp:
            results.append({"check": "amp_bound", "status": "skipped", "detail": amp["skipped"]})
        else:
            results.append({"check": "amp_bound", "status": "pass" if amp["passed"] else "fail",
                            "detail": f"max {amp['worst']:.6g} vs bound {amp['bound']:.6g} "
                                      f"(+ slack up to {np.max(amp['slack']):.3g})"})
        dwell = checks["dwell"]
        results.append({"check": "dwell", "status": "pass" if dwell["passed"] else "fail",
                        "detail": f"tolerance {dwell['tolerance']:.3g}"})
        second, _, err2 = _run_mode("neurospike", sc)
        same = err2 is None and second.digest() == first.digest()
        results.append({"check": "determinism", "status": "pass" if same else "fail",
                        "detail": err2 or f"trace digest {first.digest()[:12]}"})

    params = analysis.LemmaParams(p=3.0, a=1.0, kappa=3.0, g=1.0, h=1.0)
    lemma = analysis.sample_check_lemma(params, seed=sc.seed)
    results.append({"check": "lemma", "status": "pass" if lemma.passed else "fail",
                    "detail": f"{lemma.n_samples} samples, threshold {lemma.threshold:.6g}, "
                              f"worst margin {lemma.worst_margin:.4g}"})

    for r in results:
        print(f"{r['status'].upper():<7} {r['check']:<12} {r['detail']}")
    failed = [r for r in results if r["status"] == "fail"]
    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        io.write_json({"scenario": sc.name, "digest": sc.digest(), "checks": results,
                       "failures": failed}, cfg.out_dir / "verify.json")
    return 1 if failed else 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="neurospike", description="Spike-coupled multi-agent simulator.")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("scenario", help="scenario file, or the name of a bundled scenario")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a scenario parameter (repeatable)")
        p.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or neurospike-out/NAME)")
        p.add_argument("--seed", type=int, help="shorthand for --set seed=N")

    p_run = sub.add_parser("run", help="simulate a scenario and write traces, plots and a summary")
    common(p_run)
    p_run.add_argument("--mode", choices=MODES + ("all",), default="neurospike")
    p_ver = sub.add_parser("verify", help="run the property checks on a scenario")
    common(p_ver)
    sub.add_parser("scenarios", help="list bundled scenarios")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.verb == "scenarios":
        for name in bundled_scenarios():
            print(name)
        return 0
    try:
        overrides = parse_overrides(args.overrides)
        if args.seed is not None:
            overrides["seed"] = str(args.seed)
        sc_name = Path(args.scenario).stem
        cfg = RunConfig(args.scenario, _out_dir(args.out, sc_name), getattr(args, "mode", "neurospike"),
                        overrides)
        if args.verb == "run":
            return run_command(cfg)
        return verify_command(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
