"""Command line front: validate, merge, compile, run, export, serve."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .compile import compile_range, load_bundle_dir
from .errors import CompileError, SgcrError
from .export import export_topology
from .kernel import parse_attack_script, run_range
from .merge import merge_bundle
from .scl.parse import serialize_scl
from .scl.validate import validate_bundle


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgcr",
        description="Compile model bundles into a runnable cyber range.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="cross-check a bundle directory")
    p.add_argument("bundle", help="directory holding the bundle files")

    p = sub.add_parser("merge", help="merge a bundle into one document")
    p.add_argument("bundle")
    p.add_argument("-o", "--output", help="write here instead of stdout")

    p = sub.add_parser("compile", help="build and summarize a range")
    p.add_argument("bundle")

    p = sub.add_parser("run", help="step a range and emit its run log")
    p.add_argument("bundle")
    p.add_argument("--steps", type=int, default=None,
                   help="tick count (default: the bundle's data length)")
    p.add_argument("--tick-ms", type=float, default=100.0)
    p.add_argument("--realtime", action="store_true",
                   help="pace ticks against the wall clock")
    p.add_argument("--attack", help="adversary script file")
    p.add_argument("-o", "--output", help="write the log here")

    p = sub.add_parser("export", help="render a topology layer")
    p.add_argument("bundle")
    p.add_argument("--what", choices=("power", "cyber"), default="power")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("-o", "--output")

    p = sub.add_parser("serve", help="REST/websocket gateway for a range")
    p.add_argument("bundle")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--tick-ms", type=float, default=100.0)
    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_validate(args) -> int:
    bundle = load_bundle_dir(args.bundle)
    report = validate_bundle(bundle.scl_documents(), bundle.supplements)
    print(report.summary())
    return 0 if report.ok else 1


def _cmd_merge(args) -> int:
    bundle = load_bundle_dir(args.bundle)
    merged = merge_bundle(bundle.ssds, seds=bundle.seds,
                          scds=bundle.scds, icds=bundle.icds)
    if merged.scd is not None:
        # one self-contained document: primary plant plus devices
        doc = replace(merged.scd, processes=merged.ssd.processes)
    else:
        doc = merged.ssd
    _emit(serialize_scl(doc), args.output)
    for warning in merged.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def _cmd_compile(args) -> int:
    spec = compile_range(load_bundle_dir(args.bundle))
    print(f"devices:  {len(spec.ieds)}")
    print(f"plcs:     {len(spec.plc_programs)}")
    print(f"points:   {len(spec.registrations)}")
    print(f"bindings: {len(spec.bindings)}")
    print(f"buses:    {len(spec.network.buses)}")
    print(f"nodes:    {len(spec.topology.nodes)}")
    print(f"steps:    {spec.n_steps}")
    return 0


def _cmd_run(args) -> int:
    spec = compile_range(load_bundle_dir(args.bundle))
    attack = None
    if args.attack:
        with open(args.attack, encoding="utf-8") as fh:
            attack = parse_attack_script(fh.read())
    log = run_range(spec, steps=args.steps, tick_ms=args.tick_ms,
                    attack=attack, realtime=args.realtime)
    _emit(log.text, args.output)
    return 0


def _cmd_export(args) -> int:
    spec = compile_range(load_bundle_dir(args.bundle))
    _emit(export_topology(spec, args.what, args.format), args.output)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .gateway import create_app

    spec = compile_range(load_bundle_dir(args.bundle))
    app = create_app(spec, tick_ms=args.tick_ms, realtime=True)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "merge": _cmd_merge,
    "compile": _cmd_compile,
    "run": _cmd_run,
    "export": _cmd_export,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CompileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SgcrError as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
