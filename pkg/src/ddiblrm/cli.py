"""Command-line interface.

Subcommands
-----------
fit               sample the posterior; writes ``summary.csv`` and ``diagnostics.json``
evaluate-grid     fit, then write ``surface.csv`` and one ``marginal_<drug>.csv`` per drug
scenario          run built-in data scenarios; writes one directory per scenario and setting
check-properties  evaluate the structural property matrix of the model variants

Exit codes: 0 success, 1 invalid input or I/O failure, 2 unconverged sampler
without ``--force-unconverged``, 3 property matrix differs from the expected one
(with ``--assert-paper``). Errors go to standard error prefixed with
``error[<kind>]:``.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .decision import DEFAULT_GRID_DOSES, IntervalSpec, evaluate_grid, marginal_summary
from .inference import NonConvergenceError, SamplerConfig, run_mcmc
from .io import (
    diagnostics_dict,
    load_config,
    read_cohorts,
    write_json,
    write_scenario_tree,
    write_summary,
    write_surface,
    write_table,
)
from .model import InvalidInputError
from .properties import (
    EXPECTED_MATRIX,
    matrix_matches_expected,
    property_matrix,
    render_matrix,
)
from .scenarios import builtin_scenarios, get_scenario, run_all

EXIT_OK, EXIT_INVALID, EXIT_UNCONVERGED, EXIT_MISMATCH = 0, 1, 2, 3


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {v}")
    return v


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors; the default status 2 is reserved
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error[usage]: {message}", file=sys.stderr)
        sys.exit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ddiblrm", description="Bayesian dose-toxicity models for drug combinations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config_required):
        sp.add_argument("--config", required=config_required, help="YAML run configuration")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=_u64, help="sampler seed, overrides the configuration")
        sp.add_argument("--force-unconverged", action="store_true",
                        help="write decision outputs even if the chains did not converge")

    for name, text in (("fit", "sample the posterior"), ("evaluate-grid", "posterior toxicity surface on the dose grid")):
        sp = sub.add_parser(name, help=text)
        common(sp, True)
        sp.add_argument("--data", required=True, help="cohort CSV file")

    sp = sub.add_parser("scenario", help="run built-in data scenarios")
    common(sp, False)
    ids = [s.id for s in builtin_scenarios()]
    sp.add_argument("--scenario", default="all", help=f"scenario id or 'all' ({', '.join(ids)})")

    sp = sub.add_parser("check-properties", help="structural property matrix of the model variants")
    sp.add_argument("--out", help="output directory for properties.csv and witnesses.json")
    sp.add_argument("--seed", type=_u64, default=0, help="seed of the randomized checks")
    sp.add_argument("--assert-paper", action="store_true",
                    help="exit with status 3 unless the matrix equals the published one")
    return p


def _fit(args, config):
    data = read_cohorts(args.data, config.model)
    draws = run_mcmc(data, config.model, config.priors, config.sampler)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_summary(draws, out / "summary.csv")
    write_json(diagnostics_dict(draws, config.sampler), out / "diagnostics.json")
    return draws


def cmd_fit(args) -> int:
    config = _load(args)
    draws = _fit(args, config)
    draws.require_converged(args.force_unconverged, what="posterior")
    return EXIT_OK


def cmd_evaluate_grid(args) -> int:
    config = _load(args)
    draws = _fit(args, config)
    draws.require_converged(args.force_unconverged, what="posterior")
    spec, out = config.model, Path(args.out)
    rows = evaluate_grid(draws, spec, config.grid_points(), config.intervals, force=True)
    write_surface(rows, out / "surface.csv", spec.drug_names)
    for i, name in enumerate(spec.drug_names):
        ladder = DEFAULT_GRID_DOSES if config.grid is None else config.grid[i]
        m = marginal_summary(draws, spec, i, ladder, config.intervals, force=True)
        write_surface(m, out / f"marginal_{name}.csv", spec.drug_names)
    return EXIT_OK


def cmd_scenario(args) -> int:
    sampler, intervals = SamplerConfig(), IntervalSpec()
    if args.config:
        # scenarios define their own models; only sampler and intervals are taken
        config = load_config(args.config)
        sampler, intervals = config.sampler, config.intervals
    if args.seed is not None:
        sampler = dataclasses.replace(sampler, seed=args.seed)
    scenarios = builtin_scenarios() if args.scenario == "all" else [get_scenario(args.scenario)]
    results = run_all(sampler, intervals, scenarios, force=args.force_unconverged)
    write_scenario_tree(results, args.out, sampler)
    return EXIT_OK


def cmd_check_properties(args) -> int:
    reports = property_matrix(seed=args.seed)
    print(render_matrix(reports))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_property_outputs(reports, out)
    if args.assert_paper and not matrix_matches_expected(reports):
        bad = [
            f"{p.value}/{v.value}: got {'pass' if r.passed else 'fail'}"
            for p, row in reports.items()
            for v, r in row.items()
            if r.passed != EXPECTED_MATRIX[p][v]
        ]
        print("error[property-mismatch]: " + "; ".join(bad), file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def _write_property_outputs(reports, out: Path):
    flat = [r for row in reports.values() for r in row.values()]
    rows = [[r.property_id.value, r.variant.value, "true" if r.passed else "false", repr(r.tolerance)] for r in flat]
    write_table(out / "properties.csv", ("property", "variant", "passed", "tolerance"), rows)
    write_json(
        [dict(property=r.property_id.value, variant=r.variant.value, passed=r.passed,
              seed=r.seed, witness=r.witness, details=r.details) for r in flat],
        out / "witnesses.json",
    )


def _load(args):
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, sampler=dataclasses.replace(config.sampler, seed=args.seed))
    return config


COMMANDS = {
    "fit": cmd_fit,
    "evaluate-grid": cmd_evaluate_grid,
    "scenario": cmd_scenario,
    "check-properties": cmd_check_properties,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NonConvergenceError as exc:
        print(f"error[unconverged]: {exc} (rerun with --force-unconverged to override)", file=sys.stderr)
        return EXIT_UNCONVERGED
    except InvalidInputError as exc:
        print(f"error[invalid-input]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
