"""Command line interface.

Commands: assess, fit, bootstrap, datasets, catalog.  Exit codes: 0 on
success, 1 for usage problems, 2 for data problems (unknown dataset or
model, unreadable or invalid table), 3 when a computation cannot finish.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bootstrap import MODE_MULTINOMIAL, MODE_POISSON, bootstrap_assess
from .errors import ComputationError, TableError
from .fitting import fit_all, fit_model
from .models import (
    DF_CONVENTIONS,
    DF_POISSON_CELLS,
    enumerate_models,
    model_summary,
    observed_statistic_count,
)
from .odds import MEMBERSHIP_INSIDE, MEMBERSHIP_OUTSIDE, assess
from .tables import (
    builtin_dataset,
    builtin_dataset_description,
    builtin_dataset_names,
    sniff_and_load,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_COMPUTE = 3

TOL_ENV = "MISSTAB_TOL"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; route through our codes
    def error(self, message):
        raise _UsageError(message)


def _load_source(source: str):
    if source in builtin_dataset_names():
        return builtin_dataset(source), source
    if os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
        return sniff_and_load(text), source
    raise TableError(f"unknown dataset or file: {source}")


def _env_tol():
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return None
    try:
        value = float(raw)
    except ValueError:
        raise _UsageError(f"{TOL_ENV} must be a number, got {raw!r}")
    if value <= 0:
        raise _UsageError(f"{TOL_ENV} must be positive, got {raw!r}")
    return value


def _resolve_tol(args):
    env = _env_tol()
    if getattr(args, "tol", None) is not None:
        return args.tol, False
    if env is not None:
        return env, True
    return 1e-10, False


def _header_lines(table, source, tol=None, from_env=False):
    lines = [
        f"source: {source}",
        f"shape: {table.schema.shape}",
        f"N: {table.N}",
    ]
    if tol is not None:
        suffix = f" ({TOL_ENV})" if from_env else ""
        lines.append(f"tolerance: {tol:g}{suffix}")
    return lines


def _fmt(x: float) -> str:
    return f"{x:.4g}"


def _print_assess_text(table, source, verdict, tol, from_env, out):
    for line in _header_lines(table, source, tol, from_env):
        print(line, file=out)
    print(file=out)
    for fam in verdict.families:
        print(f"variable {fam.variable}:", file=out)
        for rec in fam.records:
            label = rec.query.label()
            if rec.membership == MEMBERSHIP_INSIDE:
                body = f"{rec.value} ∈ {rec.interval}"
            elif rec.membership == MEMBERSHIP_OUTSIDE:
                body = f"{rec.value} ∉ {rec.interval}"
            else:
                body = f"{rec.value} vs {rec.interval}  [undefined]"
            note = f"  ({rec.note})" if rec.note else ""
            print(f"  {label}: {body}{note}", file=out)
        print(
            f"  suggested class for {fam.variable}: {fam.suggested_class}",
            file=out,
        )
    print(file=out)
    print(verdict.statement, file=out)


def _cmd_assess(args, out):
    table, source = _load_source(args.source)
    verdict = assess(table)
    tol, from_env = (None, False)
    env = _env_tol()
    if env is not None:
        tol, from_env = env, True
    if args.format == "json":
        payload = {
            "command": "assess",
            "source": source,
            "shape": table.schema.shape,
            "N": table.N,
        }
        if tol is not None:
            payload["tolerance"] = tol
        payload.update(verdict.as_dict())
        print(json.dumps(payload, indent=2), file=out)
    else:
        _print_assess_text(table, source, verdict, tol, from_env, out)
    return EXIT_OK


def _fit_row(fit) -> dict:
    row = model_summary(fit.model, fit.schema, fit.df_convention)
    row.update(
        {
            "G2": fit.G2,
            "p_value": fit.p_value,
            "aic": fit.aic,
            "bic": fit.bic,
            "method": fit.method,
            "converged": fit.converged,
            "boundary": fit.boundary,
            "iterations": fit.iterations,
        }
    )
    return row


def _fit_notes(fit) -> str:
    notes = []
    if fit.perfect_fit:
        notes.append("perfect")
    if fit.boundary:
        notes.append("boundary")
    if not fit.converged:
        notes.append("no-converge")
    return ",".join(notes)


def _print_fit_text(table, source, fits, tol, from_env, out):
    for line in _header_lines(table, source, tol, from_env):
        print(line, file=out)
    print(
        f"observed statistics: {observed_statistic_count(table.schema)}",
        file=out,
    )
    print(file=out)
    rows = [
        (
            f.model_id,
            f.model.mechanism_display(f.schema),
            str(f.n_params),
            str(f.df),
            _fmt(f.G2),
            _fmt(f.p_value),
            _fmt(f.aic),
            _fmt(f.bic),
            f.method,
            _fit_notes(f),
        )
        for f in fits
    ]
    head = (
        "model",
        "mechanisms",
        "par",
        "df",
        "G2",
        "p",
        "AIC",
        "BIC",
        "method",
        "notes",
    )
    widths = [
        max(len(head[i]), *(len(r[i]) for r in rows))
        for i in range(len(head))
    ]
    print(
        "  ".join(h.ljust(w) for h, w in zip(head, widths)).rstrip(),
        file=out,
    )
    for r in rows:
        print(
            "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip(),
            file=out,
        )


def _cmd_fit(args, out):
    table, source = _load_source(args.source)
    tol, from_env = _resolve_tol(args)
    if args.model is not None:
        fits = [
            fit_model(
                args.model,
                table,
                tol=tol,
                max_iter=args.max_iter,
                df_convention=args.df_convention,
            )
        ]
    else:
        fits = list(
            fit_all(
                table,
                tol=tol,
                max_iter=args.max_iter,
                df_convention=args.df_convention,
            )
        )
    if args.format == "json":
        payload = {
            "command": "fit",
            "source": source,
            "shape": table.schema.shape,
            "N": table.N,
            "tolerance": tol,
            "df_convention": args.df_convention,
            "observed_statistics": observed_statistic_count(table.schema),
            "fits": [_fit_row(f) for f in fits],
        }
        print(json.dumps(payload, indent=2), file=out)
    else:
        _print_fit_text(table, source, fits, tol, from_env, out)
    return EXIT_OK


def _cmd_bootstrap(args, out):
    table, source = _load_source(args.source)
    tol, from_env = _resolve_tol(args)
    summary = bootstrap_assess(
        table,
        args.model,
        n_replicates=args.replicates,
        seed=args.seed,
        mode=args.mode,
    )
    if args.format == "json":
        payload = {
            "command": "bootstrap",
            "source": source,
            "shape": table.schema.shape,
            "N": table.N,
            "tolerance": tol,
            "seed": args.seed,
        }
        payload.update(summary.as_dict())
        print(json.dumps(payload, indent=2), file=out)
    else:
        for line in _header_lines(table, source, tol, from_env):
            print(line, file=out)
        print(
            f"model: {summary.model_id}  replicates: "
            f"{summary.n_replicates}  mode: {summary.mode}  "
            f"seed: {args.seed}",
            file=out,
        )
        print(file=out)
        for fam in summary.families:
            print(
                f"variable {fam.variable}: {fam.percent_mar:.2f}% MAR"
                f"  (counted {fam.n_counted}, excluded {fam.n_excluded})",
                file=out,
            )
        print(
            f"overall: {summary.percent_mar:.2f}% MAR"
            f"  (counted {summary.overall_counted},"
            f" excluded {summary.overall_excluded})",
            file=out,
        )
    return EXIT_OK


def _cmd_datasets(args, out):
    names = builtin_dataset_names()
    if args.format == "json":
        payload = {
            "command": "datasets",
            "datasets": [
                {
                    "name": n,
                    "shape": builtin_dataset(n).schema.shape,
                    "N": builtin_dataset(n).N,
                    "description": builtin_dataset_description(n),
                }
                for n in names
            ],
        }
        print(json.dumps(payload, indent=2), file=out)
    else:
        for n in names:
            t = builtin_dataset(n)
            print(
                f"{n}  [{t.schema.shape}, N={t.N}]"
                f"  {builtin_dataset_description(n)}",
                file=out,
            )
    return EXIT_OK


def _cmd_catalog(args, out):
    table, source = _load_source(args.source)
    schema = table.schema
    models = enumerate_models(schema)
    summaries = [
        model_summary(m, schema, args.df_convention) for m in models
    ]
    if args.format == "json":
        payload = {
            "command": "catalog",
            "source": source,
            "shape": schema.shape,
            "observed_statistics": observed_statistic_count(schema),
            "df_convention": args.df_convention,
            "models": summaries,
        }
        print(json.dumps(payload, indent=2), file=out)
    else:
        print(f"source: {source}", file=out)
        print(f"shape: {schema.shape}", file=out)
        print(
            f"observed statistics: {observed_statistic_count(schema)}",
            file=out,
        )
        print(file=out)
        rows = [
            (
                s["id"],
                s["mechanisms"],
                str(s["parameters"]),
                str(s["df"]),
                "perfect" if s["perfect_fit"] else "",
            )
            for s in summaries
        ]
        head = ("model", "mechanisms", "par", "df", "notes")
        widths = [
            max(len(head[i]), *(len(r[i]) for r in rows))
            for i in range(len(head))
        ]
        print(
            "  ".join(h.ljust(w) for h, w in zip(head, widths)).rstrip(),
            file=out,
        )
        for r in rows:
            print(
                "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip(),
                file=out,
            )
    return EXIT_OK


def _add_format(p):
    p.add_argument(
        "--format",
        choices=("text", "json", "structured"),
        default="text",
        help="output format (structured is an alias of json)",
    )


def _add_fit_options(p):
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument(
        "--df-convention",
        choices=DF_CONVENTIONS,
        default=DF_POISSON_CELLS,
    )


def build_parser() -> _Parser:
    parser = _Parser(
        prog="misstab",
        description=(
            "Assess missing-data mechanisms and fit non-response models"
            " for incomplete contingency tables."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "assess",
        help="containment checks of non-response odds in response intervals",
    )
    p.add_argument("source", help="builtin dataset name or table file")
    _add_format(p)
    p.set_defaults(func=_cmd_assess)

    p = sub.add_parser("fit", help="fit the non-response model catalog")
    p.add_argument("source")
    p.add_argument("--model", default=None, help="fit one model by id")
    _add_fit_options(p)
    _add_format(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser(
        "bootstrap",
        help="parametric bootstrap of the assessment under one model",
    )
    p.add_argument("source")
    p.add_argument("--model", required=True)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--mode",
        choices=(MODE_MULTINOMIAL, MODE_POISSON),
        default=MODE_MULTINOMIAL,
    )
    _add_fit_options(p)
    _add_format(p)
    p.set_defaults(func=_cmd_bootstrap)

    p = sub.add_parser("datasets", help="list builtin datasets")
    _add_format(p)
    p.set_defaults(func=_cmd_datasets)

    p = sub.add_parser(
        "catalog", help="list the model catalog for a table's shape"
    )
    p.add_argument("source")
    p.add_argument(
        "--df-convention",
        choices=DF_CONVENTIONS,
        default=DF_POISSON_CELLS,
    )
    _add_format(p)
    p.set_defaults(func=_cmd_catalog)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    out = sys.stdout
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and friends
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if args.format == "structured":
        args.format = "json"
    try:
        return args.func(args, out)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TableError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ComputationError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
