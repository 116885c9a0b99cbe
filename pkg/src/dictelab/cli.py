"""Command-line front end.

Subcommands: check (typecheck a program), elaborate (print elaborations at
either stage), run (evaluate the first elaboration), coherence (enumerate
and compare all elaborations), decompose (compare direct vs composed
target elaborations), meta (trace-check type safety, optionally fuzzing).

Exit codes: 0 success, 1 parse/type error, 2 coherence or decomposition
violation, 3 resource limit reached (fuel or enumeration truncation).
Setting the environment variable TCC_COLOR=0 disables styling.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import fd_core, harness, syntax as S, target_core
from .fd_core import FuelExhausted
from .parser import ParseError, parse_context, parse_program
from .source_typer import Limits, SrcTypeError, typecheck_program

EXIT_OK = 0
EXIT_TYPE_ERROR = 1
EXIT_VIOLATION = 2
EXIT_RESOURCE = 3


@dataclass
class CliConfig:
    command: str
    input_path: str
    stage: str = "target"           # fd | target
    mode: str = "composed"          # direct | composed
    all: bool = False
    max_depth: int = 32
    max_elaborations: int = 256
    fuel: int = 100_000
    format: str = "text"            # text | json
    contexts_dir: str | None = None
    emit_degenerate_wrappers: bool = False
    seed: int = 0
    generate: int = 0

    @property
    def limits(self) -> Limits:
        return Limits(self.max_depth, self.max_elaborations)


def _style(text: str, code: str) -> str:
    if os.environ.get("TCC_COLOR") == "0" or not sys.stdout.isatty():
        return text
    return f"\x1b[{code}m{text}\x1b[0m"


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dictelab",
        description="Typecheck, elaborate and coherence-check programs "
                    "in a small language with type classes.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", help="source program")
        p.add_argument("--max-depth", type=int, default=32,
                       help="constraint resolution depth limit")
        p.add_argument("--max-elaborations", type=int, default=256,
                       help="cap on enumerated elaborations")
        p.add_argument("--fuel", type=int, default=100_000,
                       help="evaluation step budget")
        p.add_argument("--format", choices=["text", "json"], default="text")
        p.add_argument("--emit-degenerate-wrappers", action="store_true",
                       help="kept for rule-shape fidelity; empty binder "
                            "lists already print without wrappers")
        return p

    p = add("check", "typecheck and report the program type")
    p = add("elaborate", "print elaborations")
    p.add_argument("--stage", choices=["fd", "target"], default="target")
    p.add_argument("--mode", choices=["direct", "composed"],
                   default="composed")
    p.add_argument("--all", action="store_true",
                   help="print every elaboration, not just the first")
    p = add("run", "evaluate the first elaboration")
    p.add_argument("--stage", choices=["fd", "target"], default="target")
    p.add_argument("--mode", choices=["direct", "composed"],
                   default="composed")
    p = add("coherence", "evaluate all elaborations and compare results")
    p.add_argument("--contexts-dir",
                   help="directory of *.ctx files with one-hole contexts")
    p = add("decompose", "compare direct and composed target elaborations")
    p = add("meta", "trace-check type safety of every elaboration")
    p.add_argument("--seed", type=int, default=0,
                   help="base seed for generated terms")
    p.add_argument("--generate", type=int, default=0,
                   help="additionally check this many generated terms")
    return ap


def parse_args(argv) -> CliConfig:
    ns = _build_parser().parse_args(argv)
    return CliConfig(
        command=ns.command, input_path=ns.file,
        stage=getattr(ns, "stage", "target"),
        mode=getattr(ns, "mode", "composed"),
        all=getattr(ns, "all", False),
        max_depth=ns.max_depth, max_elaborations=ns.max_elaborations,
        fuel=ns.fuel, format=ns.format,
        contexts_dir=getattr(ns, "contexts_dir", None),
        emit_degenerate_wrappers=ns.emit_degenerate_wrappers,
        seed=getattr(ns, "seed", 0),
        generate=getattr(ns, "generate", 0))


def _load_program(cfg: CliConfig):
    text = Path(cfg.input_path).read_text()
    return parse_program(text)


def _elaborations(cfg: CliConfig, result):
    """Pretty-printed elaborations at the configured stage/mode."""
    if cfg.stage == "fd":
        return [S.pretty(ie) for _, ie in result.fd_elabs]
    if cfg.mode == "direct":
        return [S.pretty(te) for te in result.tgt_elabs]
    out = []
    for sigma, ie in result.fd_elabs:
        _, te = fd_core.fd_typecheck_expr(sigma, result.fd_class_env, (), ie)
        out.append(S.pretty(te))
    return out


def _emit_json(cfg: CliConfig, result, elaborations, results,
               coherent: bool, truncated: bool):
    print(json.dumps({
        "program": cfg.input_path,
        "type": S.pretty(result.main_type) if result else "",
        "elaborations": elaborations,
        "results": results,
        "coherent": coherent,
        "truncated": truncated,
    }, ensure_ascii=False, indent=2))


def cmd_check(cfg: CliConfig) -> int:
    p = _load_program(cfg)
    r = typecheck_program(p, cfg.limits)
    classes = sum(1 for e in r.GC)
    instances = sum(1 for e in r.P)
    if cfg.format == "json":
        _emit_json(cfg, r, [], [], True, r.fd_truncated or r.tgt_truncated)
    else:
        print(f"main : {S.pretty(r.main_type)}")
        print(f"{classes} class(es), {instances} instance(s), "
              f"{len(r.fd_elabs)} elaboration(s)")
    return EXIT_OK


def cmd_elaborate(cfg: CliConfig) -> int:
    p = _load_program(cfg)
    r = typecheck_program(p, cfg.limits)
    elabs = _elaborations(cfg, r)
    shown = elabs if cfg.all else elabs[:1]
    if cfg.format == "json":
        _emit_json(cfg, r, shown, [], True,
                   r.fd_truncated or r.tgt_truncated)
    else:
        for t in shown:
            print(t)
    return EXIT_OK


def cmd_run(cfg: CliConfig) -> int:
    p = _load_program(cfg)
    r = typecheck_program(p, cfg.limits)
    if cfg.stage == "fd":
        sigma, ie = r.fd_elabs[0]
        value = S.pretty(fd_core.fd_eval(sigma, ie, cfg.fuel))
    elif cfg.mode == "direct":
        value = S.pretty(target_core.tgt_eval(r.tgt_elabs[0], cfg.fuel))
    else:
        sigma, ie = r.fd_elabs[0]
        _, te = fd_core.fd_typecheck_expr(sigma, r.fd_class_env, (), ie)
        value = S.pretty(target_core.tgt_eval(te, cfg.fuel))
    if cfg.format == "json":
        _emit_json(cfg, r, [], [value], True,
                   r.fd_truncated or r.tgt_truncated)
    else:
        print(value)
    return EXIT_OK


def _load_contexts(cfg: CliConfig):
    if not cfg.contexts_dir:
        return None
    ctxs = []
    for path in sorted(Path(cfg.contexts_dir).glob("*.ctx")):
        ctxs.append(parse_context(path.read_text()))
    return ctxs


def cmd_coherence(cfg: CliConfig) -> int:
    p = _load_program(cfg)
    rep = harness.check_coherence(
        p, cfg.limits, cfg.fuel, contexts=_load_contexts(cfg),
        program_name=cfg.input_path)
    if cfg.format == "json":
        r = typecheck_program(p, cfg.limits)
        elabs = _elaborations(cfg, r)
        results = [rep.witness_value] * len(elabs) if rep.all_kleene_equal \
            else []
        _emit_json(cfg, r, elabs, results, rep.all_kleene_equal,
                   rep.truncated)
    else:
        for line in harness.coherence_lines(rep):
            print(_style(line, "31") if "VIOLATION" in line else line)
    if not rep.all_kleene_equal:
        return EXIT_VIOLATION
    if rep.truncated:
        return EXIT_RESOURCE
    return EXIT_OK


def cmd_decompose(cfg: CliConfig) -> int:
    p = _load_program(cfg)
    rep = harness.check_decomposition(p, cfg.limits,
                                      program_name=cfg.input_path)
    if cfg.format == "json":
        r = typecheck_program(p, cfg.limits)
        _emit_json(cfg, r, _elaborations(cfg, r), [], rep.equal,
                   rep.truncated)
    else:
        for line in harness.decomposition_lines(rep):
            print(line)
    if not rep.equal:
        return EXIT_VIOLATION
    if rep.truncated:
        return EXIT_RESOURCE
    return EXIT_OK


def cmd_meta(cfg: CliConfig) -> int:
    p = _load_program(cfg)
    r = typecheck_program(p, cfg.limits)
    reports = []
    for sigma, ie in r.fd_elabs:
        reports.append(harness.check_metatheory(
            sigma, r.fd_class_env, ie, cfg.fuel))
    if r.fd_elabs:
        sigma, _ = r.fd_elabs[0]
        for i in range(cfg.generate):
            e = harness.generate_fd_term(cfg.seed + i, 4, sigma,
                                         r.fd_class_env)
            reports.append(harness.check_metatheory(
                sigma, r.fd_class_env, e, cfg.fuel))
    all_ok = all(m.preservation_ok and m.progress_ok and m.fuel_ok
                 for m in reports)
    if cfg.format == "json":
        _emit_json(cfg, r, [], [], all_ok,
                   any(not m.fuel_ok for m in reports))
    else:
        for i, m in enumerate(reports):
            print(f"-- elaboration {i}")
            for line in harness.meta_lines(m):
                print(line)
    if not all_ok:
        if any(not m.fuel_ok for m in reports):
            return EXIT_RESOURCE
        return EXIT_VIOLATION
    return EXIT_OK


_COMMANDS = {
    "check": cmd_check,
    "elaborate": cmd_elaborate,
    "run": cmd_run,
    "coherence": cmd_coherence,
    "decompose": cmd_decompose,
    "meta": cmd_meta,
}


def main(argv=None) -> int:
    cfg = parse_args(argv)
    try:
        return _COMMANDS[cfg.command](cfg)
    except ParseError as err:
        print(f"{cfg.input_path}:{err}", file=sys.stderr)
        return EXIT_TYPE_ERROR
    except SrcTypeError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_TYPE_ERROR
    except fd_core.FdTypeError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_TYPE_ERROR
    except target_core.TgtTypeError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_TYPE_ERROR
    except FuelExhausted:
        print("error: fuel exhausted", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_TYPE_ERROR


if __name__ == "__main__":
    sys.exit(main())
