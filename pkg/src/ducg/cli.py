"""Command-line interface.

Subcommands::

    ducg validate --model M
    ducg verify --model M --cases C [--cap 10] [--seed 42] [--top-k 1]
                [--out report.json] [--format text|machine]
    ducg serve [--port P] [--data-dir D]

Exit codes: 0 success, 1 usage error, 2 data error.  ``DUCG_PORT`` and
``DUCG_DATA_DIR`` override the serve flags when set.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import DucgError, ModelFormatError
from .model import ChiefComplaintModel
from .modelfile import load_model_file
from .validation import validate
from .verify import ingest, render_report, run_verification

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_chief_complaint_model(path: str) -> ChiefComplaintModel:
    loaded = load_model_file(path)
    if not isinstance(loaded, ChiefComplaintModel):
        raise ModelFormatError("expected a fused model file, got single-disease modules", path)
    return loaded


def _cmd_validate(args) -> int:
    try:
        model = _load_chief_complaint_model(args.model)
    except (DucgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    report = validate(model)
    for finding in report.errors:
        print(f"error   {finding}")
    for finding in report.warnings:
        print(f"warning {finding}")
    if report.ok:
        print(f"model {model.model_id}: ok ({len(model.variables)} variables, "
              f"{len(model.diseases)} diseases)")
        return EXIT_OK
    print(f"model {model.model_id}: {len(report.errors)} error(s)")
    return EXIT_DATA


def _cmd_verify(args) -> int:
    try:
        model = _load_chief_complaint_model(args.model)
        records = ingest(args.cases, model)
    except (DucgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if not records:
        print("warning: empty case corpus", file=sys.stderr)
    report = run_verification(
        model, records, cap=args.cap, seed=args.seed, top_k=args.top_k
    )
    rendered = render_report(report, format=args.format)
    print(rendered)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(render_report(report, format="machine"))
    return EXIT_OK


def resolve_serve_config(args) -> tuple[int, str]:
    """Flags provide the defaults; the environment overrides them."""
    port = int(os.environ.get("DUCG_PORT", args.port))
    data_dir = os.environ.get("DUCG_DATA_DIR", args.data_dir)
    return port, data_dir


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import build_app

    port, data_dir = resolve_serve_config(args)
    app = build_app(data_dir)
    uvicorn.run(app, host="0.0.0.0", port=port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ducg", description="dynamic uncertain causality graph engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a model file")
    p_validate.add_argument("--model", required=True)
    p_validate.set_defaults(func=_cmd_validate)

    p_verify = sub.add_parser("verify", help="run the verification protocol on a case corpus")
    p_verify.add_argument("--model", required=True)
    p_verify.add_argument("--cases", required=True)
    p_verify.add_argument("--cap", type=int, default=10)
    p_verify.add_argument("--seed", type=int, default=42)
    p_verify.add_argument("--top-k", type=int, default=1, dest="top_k")
    p_verify.add_argument("--out", default=None)
    p_verify.add_argument("--format", choices=("text", "machine"), default="text")
    p_verify.set_defaults(func=_cmd_verify)

    p_serve = sub.add_parser("serve", help="run the diagnosis session service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--data-dir", default="./ducg-data", dest="data_dir")
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
