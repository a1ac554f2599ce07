"""Command-line front end.

Subcommands: ``generate`` (random or fixed models plus a trajectory dataset),
``compute`` (dwell time from a dataset), ``mu`` (growth factors and dwell time
from externally supplied certificates), ``validate`` (Monte Carlo decay check
of a dwell time against known models).

Exit codes separate mathematical outcomes from data problems:
0 success, 2 no feasible rate on the grid, 3 data fails the independence
requirement, 4 parse/validation/usage error, 5 generation failure, 6 at least
one validation run failed the decay criterion.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from . import data as datamod
from . import sim as simmod
from .data import CertificateRecord, DwellTimeResult
from .dwell import AlgorithmConfig, compute_min_dwell, dwell_time, mu_max
from .errors import (
    AssumptionViolatedError,
    DwellCertError,
    GenerationError,
    InfeasibleGridError,
    NotPositiveDefiniteError,
    ParseError,
    ValidationError,
)
from .linalg import cholesky, sym_eig
from .lmi import SolverOptions

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_ASSUMPTION = 3
EXIT_INVALID = 4
EXIT_GENERATION = 5
EXIT_VALIDATION_FAILED = 6


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage failures exit with the validation code."""

    def error(self, message):
        raise _UsageError(message)


def _atomic_write(path: str, content: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(content)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _read(path: str) -> str:
    try:
        with open(path, "r") as handle:
            return handle.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def _log_config(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    pairs = " ".join(f"{k}={v!r}" for k, v in resolved.items())
    print(f"config: {pairs}", file=sys.stderr)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dwellcert", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate models and a trajectory dataset")
    gen.add_argument("--modes", type=int, default=None,
                     help="number of subsystems (required without --coeffs)")
    gen.add_argument("--dim", type=int, default=None,
                     help="state dimension (required without --coeffs)")
    gen.add_argument("--length", type=int, required=True,
                     help="trace length L (L+1 states per subsystem)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--tol", type=float, default=1e-8,
                     help="column-independence tolerance for accepting traces")
    gen.add_argument("--coeffs", default=None,
                     help="models document with fixed coefficients")
    gen.add_argument("--initial-states", default=None,
                     help="JSON list of initial states, one per subsystem")
    gen.add_argument("--out-data", required=True)
    gen.add_argument("--out-models", required=True)
    gen.set_defaults(func=cmd_generate)

    comp = sub.add_parser("compute", help="compute a stabilizing dwell time")
    comp.add_argument("--data", default=None, help="dataset document")
    comp.add_argument("--data-csv", nargs="+", default=None,
                      help="comma-separated trace tables, one file per subsystem")
    comp.add_argument("--h", type=float, default=0.1)
    comp.add_argument("--eps", type=float, default=0.01)
    comp.add_argument("--tol", type=float, default=1e-8)
    comp.add_argument("--max-iter", type=int, default=20000)
    comp.add_argument("--feas-tol", type=float, default=1e-8)
    comp.add_argument("--optimize-tau", action="store_true")
    comp.add_argument("--h-refine", action="store_true")
    comp.add_argument("--out", required=True)
    comp.set_defaults(func=cmd_compute)

    mu = sub.add_parser("mu", help="growth factors and dwell time from certificates")
    mu.add_argument("--certificates", required=True)
    mu.add_argument("--eps", type=float, default=0.01)
    mu.add_argument("--out", required=True)
    mu.set_defaults(func=cmd_mu)

    val = sub.add_parser("validate", help="Monte Carlo decay validation")
    val.add_argument("--models", required=True)
    val.add_argument("--tau", type=int, required=True)
    val.add_argument("--runs", type=int, default=1000)
    val.add_argument("--horizon", type=int, default=500)
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--out-report", required=True)
    val.add_argument("--out-norms", required=True)
    val.set_defaults(func=cmd_validate)

    return parser


def cmd_generate(args) -> int:
    if args.length < 1:
        raise ValidationError(f"--length must be >= 1, got {args.length}")
    rng = np.random.default_rng(args.seed)
    if args.coeffs is not None:
        models = simmod.parse_models(_read(args.coeffs))
        if args.modes is not None and args.modes != len(models):
            raise ValidationError(
                f"--modes {args.modes} disagrees with {len(models)} models in "
                f"{args.coeffs}"
            )
        if args.dim is not None and args.dim != models[0].dimension:
            raise ValidationError(
                f"--dim {args.dim} disagrees with model dimension "
                f"{models[0].dimension}"
            )
    else:
        if args.modes is None or args.dim is None:
            raise ValidationError("--modes and --dim are required without --coeffs")
        if args.modes < 1 or args.dim < 1:
            raise ValidationError("--modes and --dim must be >= 1")
        models = [
            simmod.random_schur_companion(args.dim, rng) for _ in range(args.modes)
        ]
    initial_states = None
    if args.initial_states is not None:
        import json

        try:
            raw = json.loads(_read(args.initial_states))
        except ValueError as exc:
            raise ParseError(f"bad initial-states document: {exc}") from exc
        states = raw.get("initial_states") if isinstance(raw, dict) else raw
        initial_states = [np.asarray(x, dtype=float) for x in states]
        if len(initial_states) != len(models):
            raise ValidationError(
                f"{len(initial_states)} initial states for {len(models)} models"
            )
    dataset = simmod.generate_dataset(
        models, args.length, rng, args.tol, initial_states=initial_states
    )
    _atomic_write(args.out_models, simmod.serialize_models(models))
    _atomic_write(args.out_data, datamod.serialize_dataset(dataset))
    print(f"wrote {len(models)} models to {args.out_models}")
    print(f"wrote dataset ({dataset.n_subsystems} traces, dimension "
          f"{dataset.dimension}) to {args.out_data}")
    return EXIT_OK


def cmd_compute(args) -> int:
    if (args.data is None) == (args.data_csv is None):
        raise ValidationError("exactly one of --data or --data-csv is required")
    if args.data is not None:
        dataset = datamod.parse_dataset(_read(args.data))
    else:
        traces = [datamod.parse_trace_csv(_read(path)) for path in args.data_csv]
        dataset = datamod.dataset_from_traces(traces)
    config = AlgorithmConfig(
        h=args.h,
        epsilon=args.eps,
        independence_tol=args.tol,
        solver=SolverOptions(max_iterations=args.max_iter, feas_tol=args.feas_tol),
        optimize_tau=args.optimize_tau,
        h_refine=args.h_refine,
    )
    result = compute_min_dwell(dataset, config)
    _atomic_write(args.out, datamod.serialize_result(result))
    print(f"lambda_s = {result.lambda_s}")
    print(f"mu = {result.mu}")
    print(f"tau = {result.tau}")
    return EXIT_OK


def cmd_mu(args) -> int:
    lambda_s, certificates = datamod.parse_certificates(_read(args.certificates))
    if not args.eps > 0.0:
        raise ValidationError(f"--eps must be > 0, got {args.eps}")
    records = []
    for sid, p in certificates:
        scale = max(float(np.linalg.norm(p)), 1e-14)
        if float(np.linalg.norm(p - p.T)) > 1e-9 * scale:
            raise ValidationError(
                f"certificate {sid}: P is not symmetric", subsystem_id=sid, field="P"
            )
        try:
            cholesky(0.5 * (p + p.T))
        except NotPositiveDefiniteError as exc:
            raise ValidationError(
                f"certificate {sid}: P is not positive definite",
                subsystem_id=sid,
                field="P",
            ) from exc
        margin_pd = float(sym_eig(p).eigenvalues[0])
        records.append(CertificateRecord(id=sid, P=p, margin_pd=margin_pd))
    mu, mu_matrix = mu_max([p for _, p in certificates])
    tau = dwell_time(mu, lambda_s, args.eps)
    result = DwellTimeResult(
        lambda_s=lambda_s,
        epsilon=args.eps,
        mu=mu,
        tau=tau,
        mu_matrix=mu_matrix,
        certificates=tuple(records),
    )
    _atomic_write(args.out, datamod.serialize_result(result))
    print(f"lambda_s = {lambda_s}")
    print(f"mu = {mu}")
    print(f"tau = {tau}")
    return EXIT_OK


def cmd_validate(args) -> int:
    models = simmod.parse_models(_read(args.models))
    if args.runs < 1:
        raise ValidationError(f"--runs must be >= 1, got {args.runs}")
    if args.tau < 1:
        raise ValidationError(f"--tau must be >= 1, got {args.tau}")
    if args.horizon < 1:
        raise ValidationError(f"--horizon must be >= 1, got {args.horizon}")
    report = simmod.monte_carlo_gas(
        models, args.tau, args.runs, args.horizon, args.seed
    )
    _atomic_write(args.out_report, simmod.report_summary(report))
    _atomic_write(args.out_norms, simmod.norms_table(report))
    print(f"{report.passes}/{report.runs} runs reached the decay threshold")
    return EXIT_OK if report.all_passed else EXIT_VALIDATION_FAILED


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    _log_config(args)
    try:
        return args.func(args)
    except InfeasibleGridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except AssumptionViolatedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DwellCertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
