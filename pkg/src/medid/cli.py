"""Command-line surface.

Subcommands: ``validate``, ``observe``, ``truth``, ``identify``, ``audit``,
``sample``, ``estimate``, ``report``.

Exit codes: 0 for successful runs (non-identification, refusals, and
violated assumptions are report content, not failures); 1 for operational
errors (missing files, malformed models, enumeration cap); 2 for usage
errors including estimand syntax errors.

Machine output (``--format machine``) is line-oriented and versioned: the
first line is ``format_version<TAB>1``; every subsequent line is
tab-separated fields whose first field names the record type. Exact values
are printed as ``n/d`` rationals and floats via ``repr``, so every printed
value re-reads at full precision.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import oracle
from .audit import audit_estimand
from .errors import EstimandSyntaxError, MedidError
from .estimand import (
    EstimandExpr,
    IdentSource,
    OracleSource,
    evaluate,
    parse_estimand,
    required_assumptions,
)
from .ident import RoleView
from .joint import format_number
from .modelfile import load_model, load_roles
from .sample import Dataset, fit_frequency_joint, sample_dataset
from .scm import DEFAULT_ENUMERATION_CAP, validate_scm

FORMAT_VERSION = 1

DEFAULT_EPS = Fraction(1, 10**9)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("human", "machine"), default="human")
    p.add_argument(
        "--cap",
        type=int,
        default=int(os.environ.get("MEDID_CAP", DEFAULT_ENUMERATION_CAP)),
        help="maximum number of noise configurations to enumerate",
    )
    p.add_argument(
        "--mode",
        choices=("exact", "float"),
        default=os.environ.get("MEDID_MODE", "exact"),
        help="arithmetic mode",
    )
    p.add_argument(
        "--eps",
        type=float,
        default=float(os.environ.get("MEDID_EPS", 1e-9)),
        help="tolerance for float-mode comparisons",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medid",
        description="Exact causal mediation analysis on finite structural models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file for well-formedness")
    p.add_argument("model")
    _add_common(p)

    p = sub.add_parser("observe", help="print the observed joint distribution")
    p.add_argument("model")
    p.add_argument("--out", help="write TSV here instead of stdout")
    _add_common(p)

    p = sub.add_parser("truth", help="evaluate estimands by counterfactual enumeration")
    p.add_argument("model")
    p.add_argument("--estimand", action="append", required=True)
    _add_common(p)

    p = sub.add_parser("identify", help="evaluate estimands via identification formulas")
    p.add_argument("model", nargs="?")
    p.add_argument("--data", help="CSV dataset (with --roles) instead of a model")
    p.add_argument("--roles", help="roles file describing the CSV columns")
    p.add_argument("--estimand", action="append", required=True)
    _add_common(p)

    p = sub.add_parser("audit", help="assemble and audit estimand assumptions")
    p.add_argument("model", nargs="?")
    p.add_argument("--data")
    p.add_argument("--roles")
    p.add_argument("--estimand", action="append", required=True)
    _add_common(p)

    p = sub.add_parser("sample", help="draw a seeded dataset from a model")
    p.add_argument("model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("estimate", help="plug-in estimate from a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--roles", required=True)
    p.add_argument("--estimand", action="append", required=True)
    _add_common(p)

    p = sub.add_parser("report", help="full per-estimand report for a model")
    p.add_argument("model")
    p.add_argument("--estimand", action="append")
    _add_common(p)

    return parser


def _machine_header(out) -> None:
    out.write(f"format_version\t{FORMAT_VERSION}\n")


def _load_validated_model(path: str):
    model = load_model(path)
    report = validate_scm(model)
    if not report.ok:
        raise MedidError(
            "model failed validation:\n" + "\n".join(f"  {v}" for v in report.violations)
        )
    return model


def _parse_estimands(texts) -> list[tuple[str, EstimandExpr]]:
    return [(t, parse_estimand(t)) for t in texts]


def _ident_inputs(args):
    """(joint, roles) from either a model or a dataset + roles file."""
    if args.data is not None:
        if args.roles is None:
            raise UsageError("--data requires --roles")
        if args.model is not None:
            raise UsageError("provide either a model or --data, not both")
        roles_vars = load_roles(args.roles)
        with open(args.data, encoding="utf-8") as fh:
            data = Dataset.from_csv(fh.read(), [(v.name, v.states) for v in roles_vars])
        return fit_frequency_joint(data), RoleView(tuple(roles_vars)), None
    if args.model is None:
        raise UsageError("provide a model or --data with --roles")
    model = _load_validated_model(args.model)
    joint = oracle.observed_joint(model, args.cap)
    return joint, RoleView(model.variables), model


def _render(value, mode: str) -> str:
    if mode == "float":
        return repr(float(value))
    return format_number(value)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args, out) -> int:
    model = load_model(args.model)
    report = validate_scm(model)
    if args.format == "machine":
        _machine_header(out)
        out.write(f"ok\t{'true' if report.ok else 'false'}\n")
        for v in report.violations:
            out.write(f"violation\t{v}\n")
    else:
        if report.ok:
            out.write("model is valid\n")
        else:
            out.write("model is INVALID:\n")
            for v in report.violations:
                out.write(f"  {v}\n")
    return 0


def cmd_observe(args, out) -> int:
    model = _load_validated_model(args.model)
    joint = oracle.observed_joint(model, args.cap)
    if args.mode == "float":
        joint = joint.as_float()
    text = joint.to_tsv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        out.write(f"wrote {args.out}\n")
    else:
        out.write(text)
    return 0


def _eval_command(args, out, source_builder) -> int:
    estimands = _parse_estimands(args.estimand)
    source = source_builder()
    if args.format == "machine":
        _machine_header(out)
    for text, expr in estimands:
        try:
            value = _render(evaluate(expr, source), args.mode)
            if args.format == "machine":
                out.write(f"value\t{text}\t{value}\n")
            else:
                out.write(f"{text} = {value}\n")
        except MedidError as exc:
            if args.format == "machine":
                out.write(f"refusal\t{text}\t{exc}\n")
            else:
                out.write(f"{text}: not computed: {exc}\n")
    return 0


def cmd_truth(args, out) -> int:
    model = _load_validated_model(args.model)
    return _eval_command(args, out, lambda: OracleSource(model, args.cap))


def cmd_identify(args, out) -> int:
    joint, roles, _ = _ident_inputs(args)
    if args.mode == "float":
        joint = joint.as_float()
    return _eval_command(args, out, lambda: IdentSource(joint, roles))


def cmd_audit(args, out) -> int:
    estimands = _parse_estimands(args.estimand)
    joint, roles, model = _ident_inputs(args)
    eps = Fraction(0) if args.mode == "exact" else Fraction(args.eps).limit_denominator(10**12)
    if args.format == "machine":
        _machine_header(out)
    for text, expr in estimands:
        source = model if model is not None else (joint, roles)
        report = audit_estimand(source, expr, eps=eps, cap=args.cap)
        if args.format == "machine":
            out.write(f"estimand\t{text}\t{'identified' if report.identified else 'not-identified'}\n")
            for e in report.entries:
                witness = "; ".join(
                    ", ".join(f"{k}={v}" for k, v in w) for w in e.witnesses
                )
                dev = "" if e.deviation is None else format_number(e.deviation)
                out.write(
                    "entry\t"
                    + "\t".join(
                        [
                            e.entry.family,
                            e.entry.kind,
                            e.verdict,
                            e.basis,
                            dev,
                            witness,
                            e.entry.statement,
                        ]
                    )
                    + "\n"
                )
        else:
            out.write(f"== {text}: {'identified' if report.identified else 'NOT identified'}\n")
            for e in report.entries:
                flag = " (interpretive)" if e.entry.interpretive else ""
                out.write(f"  [{e.verdict}/{e.basis}] {e.entry.statement}{flag}\n")
                for w in e.witnesses:
                    out.write("      witness: " + ", ".join(f"{k}={v}" for k, v in w) + "\n")
                if e.deviation is not None and e.verdict == "VIOLATED":
                    out.write(f"      max deviation: {format_number(e.deviation)}\n")
    return 0


def cmd_sample(args, out) -> int:
    model = _load_validated_model(args.model)
    data = sample_dataset(model, args.n, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(data.to_csv())
    out.write(f"wrote {args.n} rows to {args.out}\n")
    return 0


def cmd_estimate(args, out) -> int:
    roles_vars = load_roles(args.roles)
    with open(args.data, encoding="utf-8") as fh:
        data = Dataset.from_csv(fh.read(), [(v.name, v.states) for v in roles_vars])
    joint = fit_frequency_joint(data)
    if args.mode == "float":
        joint = joint.as_float()
    roles = RoleView(tuple(roles_vars))
    args.model = None
    return _eval_command(args, out, lambda: IdentSource(joint, roles))


def _report_catalog(model) -> list[str]:
    names = ["EY(0)", "EY(1)", "TE"]
    m_states = model.mediator.states
    names += [f"CDE({m})" for m in m_states]
    names += ["IDE(0)", "IDE(1)", "IIE(0)", "IIE(1)"]
    names += ["NDE0", "NIE1", "NDE1", "NIE0"]
    return names


def cmd_report(args, out) -> int:
    model = _load_validated_model(args.model)
    estimands = _parse_estimands(args.estimand or _report_catalog(model))
    osrc = OracleSource(model, args.cap)
    joint = oracle.observed_joint(model, args.cap)
    roles = RoleView(model.variables)
    isrc = IdentSource(joint.as_float() if args.mode == "float" else joint, roles)
    eps = Fraction(0) if args.mode == "exact" else Fraction(args.eps).limit_denominator(10**12)

    if args.format == "machine":
        _machine_header(out)
    for text, expr in estimands:
        truth = _render(evaluate(expr, osrc), args.mode)
        try:
            identified_value = _render(evaluate(expr, isrc), args.mode)
            refusal = ""
        except MedidError as exc:
            identified_value = ""
            refusal = str(exc)
        report = audit_estimand(model, expr, eps=eps, cap=args.cap)
        n_violated = sum(
            1
            for e in report.entries
            if e.verdict == "VIOLATED" and not e.entry.interpretive
        )
        status = "identified" if report.identified else "not-identified"
        if args.format == "machine":
            out.write(
                "row\t"
                + "\t".join([text, truth, identified_value, refusal, status, str(n_violated)])
                + "\n"
            )
        else:
            shown = identified_value if identified_value else f"not computed ({refusal})"
            out.write(f"{text}:\n")
            out.write(f"  oracle     {truth}\n")
            out.write(f"  identified {shown}\n")
            out.write(f"  audit      {status} ({n_violated} violated)\n")
    return 0


_COMMANDS = {
    "validate": cmd_validate,
    "observe": cmd_observe,
    "truth": cmd_truth,
    "identify": cmd_identify,
    "audit": cmd_audit,
    "sample": cmd_sample,
    "estimate": cmd_estimate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, sys.stdout)
    except (EstimandSyntaxError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MedidError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
