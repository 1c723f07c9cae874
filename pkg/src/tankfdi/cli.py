"""Command-line entry point wiring the pipeline together.

Subcommands: simulate, tune, detect, evaluate, compare, render. All
randomness flows from explicit --seed flags so runs are replayable; every
file-writing subcommand also drops a ``<output>.run.json`` with the
resolved options. Exit codes: 0 success, 2 usage/config error, 3 simulation
divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import fuzzy, harness, plant, render, residuals, tuner

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _load_plant(path: str | None) -> plant.PlantParams:
    if path is None:
        return plant.PlantParams()
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise plant.SchemaError(f"plant config is not valid JSON: {exc}") from exc
    return plant.PlantParams.from_dict(obj)


def _write_run_config(path: str, command: str, options: dict) -> None:
    payload = {"schema": 1, "command": command, "options": options}
    with open(path + ".run.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolve_suite(args) -> tuple[list[plant.FaultScenario], tuple[float, float]]:
    if getattr(args, "suite", None):
        return harness.load_suite(args.suite)
    n = getattr(args, "generate", None)
    if not n:
        raise plant.SchemaError("either --suite FILE or --generate N is required")
    suite = harness.generate_suite(n, args.suite_seed)
    return suite, (1.0, 0.8)


# ---------------------------------------------------------------------------
# Subcommands

def cmd_simulate(args) -> int:
    params = _load_plant(args.plant)
    scenario, inputs = plant.load_scenario(args.scenario)
    trace = plant.run(scenario, params, inputs, mode=args.mode)
    plant.write_trace_csv(trace, args.out_trace)
    times, resid = residuals.residual_trace(trace, params, tau=args.tau)
    residuals.write_residual_csv(times, resid, args.out_residuals,
                                 include_initial_zero_row=True,
                                 t0=float(trace.times[0]))
    _write_run_config(args.out_trace, "simulate", {
        "scenario": args.scenario, "plant": args.plant, "mode": args.mode,
        "tau": args.tau, "out_trace": args.out_trace,
        "out_residuals": args.out_residuals,
    })
    print(f"wrote {len(trace)} frames to {args.out_trace} "
          f"and residuals to {args.out_residuals}")
    return EXIT_OK


def cmd_tune(args) -> int:
    params = _load_plant(args.plant)
    suite, inputs = _resolve_suite(args)
    objective = tuner.make_fitness(suite, params, inputs,
                                   max_fault_order=args.max_fault_order)
    if args.method == "pso":
        opt = tuner.PsoParams(swarm_size=args.swarm_size,
                              iterations=args.iterations,
                              c1=args.c1, c2=args.c2, seed=args.seed)
        best, history, mean_history = tuner.pso_tune(objective, opt)
        hyper = {"method": "pso", "swarm_size": opt.swarm_size,
                 "iterations": opt.iterations, "c1": opt.c1, "c2": opt.c2}
    else:
        opt = tuner.GaParams(population=args.population,
                             max_generations=args.max_generations,
                             stall_generations=args.stall_generations,
                             elite_count=args.elite_count,
                             crossover_fraction=args.crossover_fraction,
                             mutation_rate=args.mutation_rate, seed=args.seed)
        best, history, mean_history = tuner.ga_tune(objective, opt)
        hyper = {"method": "ga", "population": opt.population,
                 "max_generations": opt.max_generations,
                 "stall_generations": opt.stall_generations,
                 "elite_count": opt.elite_count,
                 "crossover_fraction": opt.crossover_fraction,
                 "mutation_rate": opt.mutation_rate}

    cfg, _ = fuzzy.params_to_config(best, max_fault_order=args.max_fault_order)
    fuzzy.save_config(cfg, args.out_config)
    with open(args.out_history, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("iteration,best_fitness,mean_fitness\n")
        for i, (b, m) in enumerate(zip(history, mean_history)):
            fh.write(f"{i},{b!r},{m!r}\n")
    _write_run_config(args.out_config, "tune", {
        **hyper, "seed": args.seed, "suite": args.suite,
        "generate": args.generate, "suite_seed": args.suite_seed,
        "plant": args.plant, "max_fault_order": args.max_fault_order,
        "out_config": args.out_config, "out_history": args.out_history,
    })
    print(f"final fitness: {history[-1]!r}")
    print(f"wrote tuned config to {args.out_config}, history to {args.out_history}")
    return EXIT_OK


def cmd_detect(args) -> int:
    params = _load_plant(args.plant)
    cfg = fuzzy.load_config(args.config)
    scenario, inputs = plant.load_scenario(args.scenario)
    trace = plant.run(scenario, params, inputs)
    times, resid = residuals.residual_trace(
        trace, params, tau=harness.DERIVATIVE_TAU_FACTOR * scenario.dt,
        spike_window=harness.DERIVATIVE_SPIKE_WINDOW)
    degrees, flags = fuzzy.detect_trace(resid, cfg)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        header = (["t"] + [f"deg_{v}" for v in plant.VARIABLES]
                  + [f"flag_{v}" for v in plant.VARIABLES])
        fh.write(",".join(header) + "\n")
        for i, t in enumerate(times):
            cells = [repr(float(t))]
            cells += [repr(float(x)) for x in degrees[i]]
            cells += [str(int(x)) for x in flags[i]]
            fh.write(",".join(cells) + "\n")
    if args.dot:
        graph = render.CausalGraph()
        with open(args.dot, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render.emit_dot(graph, degrees[-1]))
    _write_run_config(args.out, "detect", {
        "config": args.config, "scenario": args.scenario,
        "plant": args.plant, "out": args.out, "dot": args.dot,
    })
    print(f"wrote degrees for {len(times)} samples to {args.out}")
    return EXIT_OK


def _render_reports(out_dir: str, cfg, bank: harness.ResidualBank) -> None:
    os.makedirs(out_dir, exist_ok=True)
    kernel = fuzzy.DetectorKernel(cfg)
    graph = render.CausalGraph()
    for idx in range(len(bank.scenarios)):
        degrees = kernel.degrees(bank.residuals[idx])
        path = os.path.join(out_dir, f"scenario_{idx:03d}.dot")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render.emit_dot(graph, degrees[-1]))


def cmd_evaluate(args) -> int:
    params = _load_plant(args.plant)
    cfg = fuzzy.load_config(args.config)
    suite, inputs = _resolve_suite(args)
    bank = harness.ResidualBank.from_suite(suite, params, inputs, jobs=args.jobs)
    reports, metrics = harness.evaluate_bank(cfg, bank)
    name = args.name or os.path.splitext(os.path.basename(args.config))[0]
    harness.write_metrics_csv([harness.metrics_row(name, metrics)], args.out)
    if args.reports:
        harness.write_reports_jsonl(reports, args.reports)
    if args.render:
        _render_reports(args.render, cfg, bank)
    _write_run_config(args.out, "evaluate", {
        "config": args.config, "suite": args.suite, "generate": args.generate,
        "suite_seed": args.suite_seed, "plant": args.plant, "name": name,
        "jobs": args.jobs, "out": args.out, "reports": args.reports,
        "render": args.render,
    })
    print(harness.format_table([harness.metrics_row(name, metrics)]))
    return EXIT_OK


def cmd_compare(args) -> int:
    params = _load_plant(args.plant)
    configs = []
    for spec in args.config:
        if "=" not in spec:
            raise plant.SchemaError(
                f"--config expects NAME=PATH, got {spec!r}")
        name, path = spec.split("=", 1)
        configs.append((name, fuzzy.load_config(path)))
    suite, inputs = _resolve_suite(args)
    bank = harness.ResidualBank.from_suite(suite, params, inputs, jobs=args.jobs)
    rows = []
    for name, cfg in configs:
        _, metrics = harness.evaluate_bank(cfg, bank)
        rows.append(harness.metrics_row(name, metrics))
        if args.render:
            _render_reports(os.path.join(args.render, name), cfg, bank)
    harness.write_metrics_csv(rows, args.out)
    _write_run_config(args.out, "compare", {
        "configs": list(args.config), "suite": args.suite,
        "generate": args.generate, "suite_seed": args.suite_seed,
        "plant": args.plant, "jobs": args.jobs, "out": args.out,
        "render": args.render,
    })
    print(harness.format_table(rows))
    return EXIT_OK


def cmd_render(args) -> int:
    values = [float(x) for x in args.degrees.split(",")]
    if len(values) != 7:
        raise plant.SchemaError("--degrees needs exactly 7 comma-separated values")
    no_color = args.no_color or bool(os.environ.get("NO_COLOR"))
    if args.ansi:
        sys.stdout.write(render.emit_ansi(values, no_color=no_color))
    dot = render.emit_dot(render.CausalGraph(), values)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dot)
    elif not args.ansi:
        sys.stdout.write(dot)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser

def _add_suite_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--suite", help="suite JSON file")
    p.add_argument("--generate", type=int, metavar="N",
                   help="generate an N-scenario suite instead of loading one")
    p.add_argument("--suite-seed", type=int, default=42,
                   help="seed for --generate (default 42)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tankfdi",
        description="Three-tank fault detection: simulate, detect, tune, evaluate.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario, write trace and residual CSVs")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--plant", help="plant parameter JSON file")
    p.add_argument("--mode", choices=("linear", "nonlinear"), default="linear")
    p.add_argument("--tau", type=float, default=None,
                   help="derivative smoothing time constant (default: off)")
    p.add_argument("--out-trace", required=True)
    p.add_argument("--out-residuals", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tune", help="optimize detector membership parameters")
    p.add_argument("--method", choices=("pso", "ga"), required=True)
    _add_suite_options(p)
    p.add_argument("--plant", help="plant parameter JSON file")
    p.add_argument("--seed", type=int, default=42, help="optimizer seed")
    p.add_argument("--max-fault-order", type=int,
                   default=fuzzy.DEFAULT_MAX_FAULT_ORDER)
    p.add_argument("--swarm-size", type=int, default=30)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--c1", type=float, default=2.8)
    p.add_argument("--c2", type=float, default=1.3)
    p.add_argument("--population", type=int, default=30)
    p.add_argument("--max-generations", type=int, default=100)
    p.add_argument("--stall-generations", type=int, default=50)
    p.add_argument("--elite-count", type=int, default=2)
    p.add_argument("--crossover-fraction", type=float, default=0.8)
    p.add_argument("--mutation-rate", type=float, default=0.05)
    p.add_argument("--out-config", required=True)
    p.add_argument("--out-history", required=True)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("detect", help="stream a scenario through a detector config")
    p.add_argument("--config", required=True, help="detector config JSON")
    p.add_argument("--scenario", required=True)
    p.add_argument("--plant")
    p.add_argument("--out", required=True, help="degree/flag CSV output")
    p.add_argument("--dot", help="write a final-state DOT snapshot here")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score one detector config over a suite")
    p.add_argument("--config", required=True)
    p.add_argument("--name", help="row label (default: config file stem)")
    _add_suite_options(p)
    p.add_argument("--plant")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel scenario simulations")
    p.add_argument("--out", required=True, help="metrics CSV output")
    p.add_argument("--reports", help="per-scenario JSONL output")
    p.add_argument("--render", metavar="DIR",
                   help="also write per-scenario DOT files")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="side-by-side metrics for several configs")
    p.add_argument("--config", action="append", required=True, metavar="NAME=PATH",
                   help="repeatable; e.g. --config tuned=cfg.json")
    _add_suite_options(p)
    p.add_argument("--plant")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="metrics CSV output")
    p.add_argument("--render", metavar="DIR")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render", help="emit a colored graph for seven degrees")
    p.add_argument("--degrees", required=True,
                   help="seven comma-separated alarm degrees")
    p.add_argument("--dot", help="write DOT here instead of stdout")
    p.add_argument("--ansi", action="store_true",
                   help="print colored terminal rows instead of DOT")
    p.add_argument("--no-color", action="store_true")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except plant.SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except plant.SimulationDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
