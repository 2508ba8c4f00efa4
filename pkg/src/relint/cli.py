"""Command-line entry points: analyze, simulate, benchmark, serve."""

import argparse
import json
import os
import socket
import sys
from dataclasses import dataclass

from .data import SimulationSpec, load_csv, simulate, write_csv, write_ground_truth
from .errors import (
    DegenerateDistribution,
    FoldError,
    InfeasibleConstraints,
    LabelError,
    MalformedProblem,
    NumericalFailure,
    OptimizationFailure,
    ParseError,
    SpecError,
)
from .evalharness import DEFAULT_BENCHMARK_CONFIGS, config_label, run_benchmark
from .results import AnalysisParams, analyze

DEFAULT_PORT = 8000
PORT_ENV_VAR = "RELINT_PORT"


@dataclass(frozen=True)
class AnalyzeConfig:
    """Everything `cmd_analyze` needs; validation mirrors AnalysisParams."""

    input_path: str
    label_column: str = "label"
    delta: float = 0.001
    pi_coverage: float = 0.999
    n_probes: int = 50
    seed: int = 0
    workers: int = None
    output_path: str = None

    def params(self):
        return AnalysisParams(
            delta=self.delta,
            pi_coverage=self.pi_coverage,
            n_probes=self.n_probes,
            seed=self.seed,
            workers=self.workers,
        )


def _write_text(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def cmd_analyze(config):
    dataset = load_csv(config.input_path, label_column=config.label_column)
    result = analyze(dataset, config.params())
    _write_text(config.output_path, json.dumps(result.to_document(), indent=2) + "\n")
    return 0


def cmd_simulate(args):
    spec = SimulationSpec(
        n_strong=args.strong,
        n_weak=args.weak,
        n_irrelevant=args.irrelevant,
        n_samples=args.samples,
        random_seed=args.seed,
        label_flip_rate=args.flip_rate,
    )
    dataset, truth = simulate(spec)
    data_path = f"{args.output}.csv"
    truth_path = f"{args.output}.truth.csv"
    write_csv(data_path, dataset)
    write_ground_truth(truth_path, dataset, truth)
    print(f"wrote {data_path} and {truth_path}")
    return 0


def _load_benchmark_configs(path):
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, list) or not raw:
        raise SpecError(f"{path}: expected a non-empty JSON list of configs")
    configs = []
    for entry in raw:
        configs.append(
            SimulationSpec(
                n_strong=int(entry["n_strong"]),
                n_weak=int(entry["n_weak"]),
                n_irrelevant=int(entry["n_irrelevant"]),
                n_samples=int(entry["n_samples"]),
                label_flip_rate=float(entry.get("label_flip_rate", 0.0)),
            )
        )
    return tuple(configs)


def cmd_benchmark(args):
    if args.configs is not None:
        configs = _load_benchmark_configs(args.configs)
    else:
        configs = DEFAULT_BENCHMARK_CONFIGS
    params = AnalysisParams(
        delta=args.delta,
        pi_coverage=args.pi_p,
        n_probes=args.probes,
        workers=args.workers,
    )
    report = run_benchmark(configs, replicates=args.replicates, params=params)
    report.write_json(f"{args.output}.json")
    report.write_csv(f"{args.output}.csv")
    fully_failed = []
    for result in report.configs:
        stats = result.aggregates()
        label = config_label(result.spec)
        if stats["failed"] == stats["replicates"]:
            fully_failed.append(label)
            print(f"{label}: all {stats['replicates']} replicates failed")
            continue
        print(
            f"{label}: precision {stats['mean_precision']:.3f} "
            f"recall {stats['mean_recall']:.3f} f1 {stats['mean_f1']:.3f} "
            f"({stats['failed']} failed)"
        )
    print(f"wrote {args.output}.json and {args.output}.csv")
    if fully_failed:
        print(f"configs with no surviving replicates: {', '.join(fully_failed)}", file=sys.stderr)
        return 2
    return 0


def _resolve_port(flag_value):
    if flag_value is not None:
        return int(flag_value)
    env_value = os.environ.get(PORT_ENV_VAR)
    if env_value is not None:
        try:
            return int(env_value)
        except ValueError as exc:
            raise SpecError(f"{PORT_ENV_VAR} must be an integer, got {env_value!r}") from exc
    return DEFAULT_PORT


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    port = _resolve_port(args.port)
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((args.host, port))
    except OSError as exc:
        print(f"cannot bind {args.host}:{port}: {exc}", file=sys.stderr)
        return 1
    finally:
        probe.close()
    uvicorn.run(create_app(), host=args.host, port=port, log_level="warning")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="relint",
        description=(
            "Feature relevance intervals for linear classification: fit an "
            "L1-regularized SVM, bound each feature's usable weight range, "
            "and separate strong, weak, and irrelevant features."
        ),
    )
    commands = parser.add_subparsers(dest="command", required=True)

    analyze_parser = commands.add_parser(
        "analyze", help="analyze a labeled CSV and write interval/class JSON"
    )
    analyze_parser.add_argument("input", help="CSV file with a header and a label column")
    analyze_parser.add_argument("--label-column", default="label")
    analyze_parser.add_argument("--delta", type=float, default=0.001,
                                help="weight-budget relaxation factor")
    analyze_parser.add_argument("--pi-p", type=float, default=0.999, dest="pi_p",
                                help="prediction-interval coverage for the noise threshold")
    analyze_parser.add_argument("--probes", type=int, default=50,
                                help="number of permutation probes")
    analyze_parser.add_argument("--seed", type=int, default=0)
    analyze_parser.add_argument("--workers", type=int, default=None,
                                help="parallel LP workers (default: all cores)")
    analyze_parser.add_argument("--output", "-o", default=None,
                                help="output JSON path (default: stdout)")

    simulate_parser = commands.add_parser(
        "simulate", help="generate a labeled dataset with known feature classes"
    )
    simulate_parser.add_argument("--strong", type=int, required=True)
    simulate_parser.add_argument("--weak", type=int, required=True)
    simulate_parser.add_argument("--irrelevant", type=int, required=True)
    simulate_parser.add_argument("--samples", type=int, default=500)
    simulate_parser.add_argument("--seed", type=int, default=0)
    simulate_parser.add_argument("--flip-rate", type=float, default=0.0)
    simulate_parser.add_argument("--output", "-o", required=True,
                                 help="path prefix for <prefix>.csv and <prefix>.truth.csv")

    benchmark_parser = commands.add_parser(
        "benchmark", help="score selection quality over simulated configurations"
    )
    benchmark_parser.add_argument("--replicates", type=int, default=10)
    benchmark_parser.add_argument("--configs", default=None,
                                  help="JSON file with a list of config objects")
    benchmark_parser.add_argument("--delta", type=float, default=0.001)
    benchmark_parser.add_argument("--pi-p", type=float, default=0.999, dest="pi_p")
    benchmark_parser.add_argument("--probes", type=int, default=50)
    benchmark_parser.add_argument("--workers", type=int, default=None)
    benchmark_parser.add_argument("--output", "-o", required=True,
                                  help="report path prefix for .json and .csv")

    serve_parser = commands.add_parser("serve", help="start the HTTP session service")
    serve_parser.add_argument("--port", type=int, default=None,
                              help=f"listen port (default: ${PORT_ENV_VAR} or {DEFAULT_PORT})")
    serve_parser.add_argument("--host", default="127.0.0.1")

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            config = AnalyzeConfig(
                input_path=args.input,
                label_column=args.label_column,
                delta=args.delta,
                pi_coverage=args.pi_p,
                n_probes=args.probes,
                seed=args.seed,
                workers=args.workers,
                output_path=args.output,
            )
            return cmd_analyze(config)
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "benchmark":
            return cmd_benchmark(args)
        return cmd_serve(args)
    except (ParseError, LabelError, SpecError, FoldError, MalformedProblem, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        OptimizationFailure,
        NumericalFailure,
        InfeasibleConstraints,
        DegenerateDistribution,
    ) as exc:
        print(f"optimization failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
