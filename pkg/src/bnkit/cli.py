"""Command-line front end.

Subcommands: validate, query, dsep, sample, convert, evaluate.  Exit codes:
0 success, 1 domain error (impossible evidence, no accepted samples,
not-polytree, invalid model), 2 usage or parse error.  Errors also land on
stderr as one JSON line with a stable machine-readable code.  JSON and CSV
outputs omit timings so repeated runs with the same seed are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .engines import ENGINE_IDS, EngineOptions, run_engine
from .errors import BnkitError, EngineError, FormatError
from .evaluation import run_evaluation
from .network import BayesianNetwork, d_separated
from .pgmx import inspect_model, parse_model, serialize_model
from .sampling import SamplerConfig, direct_sample

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _default_seed() -> int:
    return int(os.environ.get("BNKIT_SEED", "0"))


def _split_names(values) -> list[str]:
    names: list[str] = []
    for value in values or []:
        names.extend(part for part in value.split(",") if part)
    return names


def _parse_bindings(net: BayesianNetwork, pairs) -> dict[str, int]:
    bindings: dict[str, str] = {}
    for pair in pairs or []:
        for token in pair.split(","):
            if not token:
                continue
            if "=" not in token:
                raise BnkitError(
                    "bad-binding", f"expected name=state, got {token!r}"
                )
            name, state = token.split("=", 1)
            bindings[name] = state
    return net.assignment(bindings)


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path: str):
    with open(path, "rb") as fh:
        return parse_model(fh.read())


def _engine_options(args) -> EngineOptions:
    return EngineOptions(
        iterations=args.iterations,
        tolerance=args.tolerance,
        samples=args.samples,
        seed=args.seed if args.seed is not None else _default_seed(),
        burn_in=args.burn_in,
        damping=args.damping,
        schedule=args.schedule,
    )


def _add_engine_flags(parser):
    parser.add_argument("--engine", choices=ENGINE_IDS, default="enum")
    parser.add_argument("--iterations", type=int, default=200)
    parser.add_argument("--tolerance", type=float, default=1e-6)
    parser.add_argument("--samples", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--burn-in", type=int, default=None, dest="burn_in")
    parser.add_argument("--damping", type=float, default=0.0)
    parser.add_argument(
        "--schedule", choices=("sequential", "flooding"), default="sequential"
    )


def cmd_validate(args) -> int:
    with open(args.model, "rb") as fh:
        _, report = inspect_model(fh.read())
    lines = []
    for finding in report.errors:
        lines.append(f"error {finding}")
    for finding in report.warnings:
        lines.append(f"warning {finding}")
    if report.ok:
        lines.append("model is valid")
    _emit("".join(line + "\n" for line in lines), args.output)
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_query(args) -> int:
    doc = _load(args.model)
    net = doc.network
    evidence = _parse_bindings(net, args.evidence)
    targets = _split_names(args.target) or None
    result = run_engine(net, args.engine, evidence, _engine_options(args), targets)
    if targets:
        wanted = set(targets) | set(evidence)
        result.posteriors = {
            k: v for k, v in result.posteriors.items() if k in wanted
        }
    if args.format == "json":
        _emit(
            json.dumps(result.as_dict(include_timing=False), sort_keys=True, indent=2)
            + "\n",
            args.output,
        )
    elif args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["variable", "state", "probability"])
        for name, dist in result.posteriors.items():
            for state, p in dist.as_dict().items():
                writer.writerow([name, state, repr(p)])
        _emit(buf.getvalue(), args.output)
    else:
        lines = []
        for name, dist in result.posteriors.items():
            pretty = ", ".join(f"{s}: {p:.6f}" for s, p in dist.as_dict().items())
            lines.append(f"{name}  {pretty}")
        if result.evidence_probability is not None:
            lines.append(f"P(evidence) = {result.evidence_probability:.10g}")
        diag = result.diagnostics
        lines.append(
            f"engine={diag.engine} iterations={diag.iterations} "
            f"converged={diag.converged}"
        )
        _emit("".join(line + "\n" for line in lines), args.output)
    return EXIT_OK


def cmd_dsep(args) -> int:
    doc = _load(args.model)
    separated = d_separated(
        doc.network,
        _split_names(args.x),
        _split_names(args.y),
        _split_names(args.given),
    )
    _emit(("true" if separated else "false") + "\n", args.output)
    return EXIT_OK


def cmd_sample(args) -> int:
    doc = _load(args.model)
    net = doc.network
    seed = args.seed if args.seed is not None else _default_seed()
    samples = direct_sample(net, SamplerConfig(args.count, seed=seed))
    names = [v.name for v in net.variables]
    if args.format == "json":
        rows = [
            {
                name: net.variables[i].states[row[i]]
                for i, name in enumerate(names)
            }
            for row in samples
        ]
        _emit(json.dumps(rows, sort_keys=True, indent=2) + "\n", args.output)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names)
        for row in samples:
            writer.writerow(
                [net.variables[i].states[row[i]] for i in range(len(names))]
            )
        _emit(buf.getvalue(), args.output)
    return EXIT_OK


def cmd_convert(args) -> int:
    doc = _load(args.model)
    data = serialize_model(doc, expand=args.expand)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    doc = _load(args.model)
    report = run_evaluation(
        doc,
        _split_names(args.diagnoses),
        _split_names(args.characteristics),
        per_diagnosis_count=args.per_diagnosis,
        generation_engines=[args.gen_engine],
        classification_engines=_split_names(args.engines),
        seed=args.seed if args.seed is not None else _default_seed(),
        engine_options=EngineOptions(
            seed=args.seed if args.seed is not None else _default_seed()
        ),
    )
    text = report.to_json() + "\n" if args.format == "json" else report.to_csv()
    _emit(text, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnkit",
        description="Discrete Bayesian-network toolkit (validate, query, "
        "dsep, sample, convert, evaluate)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file and print findings")
    p.add_argument("model")
    p.add_argument("--output")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("query", help="posterior distributions under evidence")
    p.add_argument("model")
    p.add_argument("--evidence", nargs="*", default=[], metavar="NAME=STATE")
    p.add_argument("--target", nargs="*", default=[], metavar="NAME")
    _add_engine_flags(p)
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.add_argument("--output")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("dsep", help="d-separation test")
    p.add_argument("model")
    p.add_argument("--x", nargs="*", default=[], required=True)
    p.add_argument("--y", nargs="*", default=[], required=True)
    p.add_argument("--given", nargs="*", default=[])
    p.add_argument("--output")
    p.set_defaults(fn=cmd_dsep)

    p = sub.add_parser("sample", help="draw full ancestral samples")
    p.add_argument("model")
    p.add_argument("-n", "--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("convert", help="re-serialize a model file")
    p.add_argument("model")
    p.add_argument("--expand", action="store_true")
    p.add_argument("--output")
    p.set_defaults(fn=cmd_convert)

    p = sub.add_parser("evaluate", help="self-sampling classification report")
    p.add_argument("model")
    p.add_argument("--diagnoses", nargs="*", default=[], required=True)
    p.add_argument("--characteristics", nargs="*", default=[], required=True)
    p.add_argument("--per-diagnosis", type=int, default=200, dest="per_diagnosis")
    p.add_argument("--gen-engine", default="jt", choices=ENGINE_IDS, dest="gen_engine")
    p.add_argument("--engines", nargs="*", default=["enum"])
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    p.set_defaults(fn=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as err:
        print(
            json.dumps({"error": "file-not-found", "message": str(err)}),
            file=sys.stderr,
        )
        return EXIT_USAGE
    except EngineError as err:
        print(json.dumps({"error": err.code, "message": str(err)}), file=sys.stderr)
        return EXIT_DOMAIN
    except FormatError as err:
        print(json.dumps({"error": err.code, "message": str(err)}), file=sys.stderr)
        return EXIT_DOMAIN if err.code == "invalid-model" else EXIT_USAGE
    except BnkitError as err:
        print(json.dumps({"error": err.code, "message": str(err)}), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
