"""
distillkit command line

Every command prints one report-1 JSON document on stdout (or a text view
with --human). Exit codes: 0 success (an Unknown verdict included), 2 input
error, 3 contract violation, 4 suite failure.

Usage:
    distillkit analyze state.qsf.json --seed 3 --restarts 128
    distillkit witness corpus/bell.qsf.json --copies 1
    distillkit generate b-irreducible-template --M 4 --N 4 --seed 1 --out corpus/
    distillkit verify --suite sr2-cc --trials 100 --seed 7
"""

import argparse
import json
import sys
import time
import traceback
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import structlog
from pydantic import ValidationError

from .. import __version__
from ..config import load_settings
from ..core.qsf import dump_state, read_state_file
from ..core.state import BipartiteState
from ..errors import EXIT_OK, EXIT_SUITE, ConfigError, DistillError, SuiteFailure, exit_code_for
from ..generators.corpus import FAMILIES, generate, write_fixture
from ..models.report import ErrorDetail, ErrorReport, InputDescriptor, Report
from ..models.settings import Settings
from ..observability import RunLog, configure_logging
from ..suites import ALL_SUITES, SUITES, run_suite
from ..analysis.decision import decide, verify_verdict
from ..analysis.normal_forms import (
    cc_normal_form,
    ppt_rank_n_canonical,
    sr3_tridiagonal_form,
    sr3_two_by_n_realify,
)
from ..analysis.schmidt import operator_schmidt, schmidt_rank_report
from ..analysis.structure import a_decompose, b_decompose
from ..analysis.witness import run_witness_search, verify_witness
from .render import render_human, to_json

logger = structlog.get_logger(__name__)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="Config file (default: config.yaml).")
    common.add_argument("--log-level", default="WARNING", help="structlog level on stderr.")
    common.add_argument("--log-dir", type=Path, default=None, help="Write a per-run JSONL event log here.")
    common.add_argument("--human", action="store_true", help="Print a text view instead of JSON.")
    common.add_argument("--timings", action="store_true", help="Include wall-clock timings in the report.")
    common.add_argument("--threads", type=int, default=None, help="Workers for search restarts.")
    common.add_argument("--seed", type=int, default=None, help="Root seed for searches and generators.")
    common.add_argument("--restarts", type=int, default=None, help="Seeded restarts for witness search.")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    ap = argparse.ArgumentParser(prog="distillkit", description="Bipartite entanglement distillability analysis.")
    ap.add_argument("--version", action="version", version=f"distillkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="Run the full decision pipeline.")
    p.add_argument("path", type=Path)

    p = sub.add_parser("witness", parents=[common], help="Search a Schmidt-rank-two witness.")
    p.add_argument("path", type=Path)
    p.add_argument("--copies", type=int, choices=(1, 2), default=1)

    p = sub.add_parser("schmidt", parents=[common], help="Operator Schmidt decomposition.")
    p.add_argument("path", type=Path)

    p = sub.add_parser("decompose", parents=[common], help="Direct-sum decomposition.")
    p.add_argument("path", type=Path)
    p.add_argument("--side", choices=("A", "B"), default="B")

    p = sub.add_parser("normal-form", parents=[common], help="Canonical forms of special classes.")
    p.add_argument("path", type=Path)
    p.add_argument("--form", choices=("cc", "sr3", "ppt-rank-n"), required=True)

    p = sub.add_parser("generate", parents=[common], help="Generate a seeded fixture.")
    p.add_argument("family", choices=sorted(FAMILIES))
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--N1", type=int, default=None)
    p.add_argument("--N2", type=int, default=None)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--sr", type=int, default=None)
    npt = p.add_mutually_exclusive_group()
    npt.add_argument("--npt", dest="npt", action="store_const", const=True, default=None)
    npt.add_argument("--ppt", dest="npt", action="store_const", const=False)
    p.add_argument("--weight", type=float, default=None)
    p.add_argument("--kind", choices=("irreducible", "scalar_block"), default=None)
    p.add_argument("--zero-column", action="store_true", default=None)
    p.add_argument("--out", type=Path, default=None, help="Corpus root; prints the state when omitted.")

    p = sub.add_parser("verify", parents=[common], help="Run a property verification suite.")
    p.add_argument("--suite", choices=sorted(SUITES) + [ALL_SUITES], required=True)
    p.add_argument("--trials", type=int, default=None)

    return ap


def _settings_for(args) -> Settings:
    settings = load_settings(args.config)
    search = {k: v for k, v in (("seed", args.seed), ("restarts", args.restarts), ("threads", args.threads))
              if v is not None}
    if not search:
        return settings

    data = settings.model_dump()
    data["search"].update(search)
    if args.seed is not None:
        data["product_search"]["seed"] = args.seed
    try:
        return Settings.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        flag = "--" + str(first["loc"][-1]).replace("_", "-")
        raise ConfigError(f"Invalid {flag}: {first['msg']}")


def _load(args, settings: Settings) -> BipartiteState:
    return read_state_file(args.path, normalize=True, pol=settings.tolerance)


def _budget_echo(settings: Settings) -> Dict[str, Any]:
    return {
        "search": settings.search.model_dump(),
        "product_search": settings.product_search.model_dump(),
        "tolerance": settings.tolerance.model_dump(),
    }


def _report(args, command: str, settings: Settings, rho: Optional[BipartiteState] = None,
            source: Optional[str] = None, **fields) -> Report:
    return Report(
        tool_version=__version__,
        command=command,
        input=InputDescriptor(
            source=source or str(getattr(args, "path", "")),
            dimA=rho.dim_a if rho is not None else None,
            dimB=rho.dim_b if rho is not None else None,
        ),
        budget=_budget_echo(settings),
        **fields,
    )


def cmd_analyze(args, settings: Settings, run_log: Optional[RunLog]) -> Report:
    rho = _load(args, settings)
    started = time.perf_counter()
    verdict = decide(rho, settings, run_log)
    if run_log is not None:
        run_log.log_verdict(verdict.kind.value, verdict.provenance, round(time.perf_counter() - started, 6))
    return _report(args, "analyze", settings, rho, facts=verdict.facts, verdict=verdict.to_dict(),
                   certificates={"verification": verify_verdict(rho, verdict)})


def cmd_witness(args, settings: Settings, run_log: Optional[RunLog]) -> Report:
    rho = _load(args, settings)
    outcome = run_witness_search(rho, args.copies, settings.search)
    result: Dict[str, Any] = {"found": outcome.witness is not None, "search": outcome.report()}
    certificates = {}
    if outcome.witness is not None:
        result["value"] = outcome.witness.value
        certificates = {"witness": outcome.witness.to_dict(),
                        "verification": verify_witness(rho, outcome.witness)}
    return _report(args, "witness", settings, rho, result=result, certificates=certificates)


def cmd_schmidt(args, settings: Settings, run_log: Optional[RunLog]) -> Report:
    rho = _load(args, settings)
    report = schmidt_rank_report(rho)
    return _report(args, "schmidt", settings, rho, result=report,
                   certificates={"decomposition": operator_schmidt(rho).to_dict()})


def cmd_decompose(args, settings: Settings, run_log: Optional[RunLog]) -> Report:
    rho = _load(args, settings)
    tree = a_decompose(rho) if args.side == "A" else b_decompose(rho)
    result = {"side": args.side, "irreducible": tree.is_leaf, "parts": len(tree.leaves())}
    return _report(args, "decompose", settings, rho, result=result, certificates={"tree": tree.to_dict()})


def cmd_normal_form(args, settings: Settings, run_log: Optional[RunLog]) -> Report:
    rho = _load(args, settings)
    if args.form == "cc":
        form = cc_normal_form(rho).to_dict()
    elif args.form == "ppt-rank-n":
        form = ppt_rank_n_canonical(rho, settings.search.seed).to_dict()
    elif rho.dim_a == 2:
        local_map, ppt = sr3_two_by_n_realify(rho)
        form = {"form": "sr3-two-by-n", "map": local_map.to_dict(), "ppt": ppt}
    else:
        found = sr3_tridiagonal_form(rho)
        form = found.to_dict() if found is not None else {"form": "sr3", "found": False}
    return _report(args, "normal-form", settings, rho, result={"form": args.form},
                   certificates={"normal_form": form})


def _family_params(args) -> Dict[str, Any]:
    keys = ("M", "N", "N1", "N2", "rank", "sr", "npt", "weight", "kind", "zero_column")
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


def cmd_generate(args, settings: Settings, run_log: Optional[RunLog]) -> Report:
    seed = args.seed if args.seed is not None else 0
    params = _family_params(args)
    state = generate(args.family, params, seed, settings.tolerance)
    result: Dict[str, Any] = {"family": args.family, "params": params, "seed": seed, "labels": state.meta}
    if args.out is not None:
        result["path"] = str(write_fixture(state, args.family, params, seed, args.out))
    else:
        result["state"] = json.loads(dump_state(state, include_factor=state.factor is not None))
    return _report(args, "generate", settings, state, source=f"generate:{args.family}", result=result)


def cmd_verify(args, settings: Settings, run_log: Optional[RunLog]) -> Report:
    seed = args.seed if args.seed is not None else 0
    summary = run_suite(args.suite, args.trials, seed, settings)
    return _report(args, "verify", settings, source=f"suite:{args.suite}", result=summary)


COMMANDS: Dict[str, Callable[..., Report]] = {
    "analyze": cmd_analyze,
    "witness": cmd_witness,
    "schmidt": cmd_schmidt,
    "decompose": cmd_decompose,
    "normal-form": cmd_normal_form,
    "generate": cmd_generate,
    "verify": cmd_verify,
}


def _error_module(error: BaseException) -> Optional[str]:
    frames = traceback.extract_tb(error.__traceback__)
    for frame in reversed(frames):
        parts = Path(frame.filename).with_suffix("").parts
        if "distillkit" in parts:
            return ".".join(parts[parts.index("distillkit"):])
    return None


def _emit(document: Dict[str, Any], human: bool):
    print(render_human(document) if human else to_json(document))


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    run_log = None
    started = time.perf_counter()
    try:
        settings = _settings_for(args)
        if args.log_dir is not None:
            run_log = RunLog(args.log_dir, args.command, str(getattr(args, "path", args.command)))
        report = COMMANDS[args.command](args, settings, run_log)
    except SuiteFailure as e:
        document = {
            "schema": "report-1",
            "tool_version": __version__,
            "command": args.command,
            "input": {"source": f"suite:{getattr(args, 'suite', '')}"},
            "result": e.summary,
        }
        _emit(document, args.human)
        return EXIT_SUITE
    except DistillError as e:
        if run_log is not None:
            run_log.log_failure(e)
        error = ErrorReport(error=ErrorDetail(type=type(e).__name__, message=str(e), module=_error_module(e)))
        _emit(error.model_dump(), args.human)
        return exit_code_for(e)

    document = report.to_json_dict()
    if args.timings:
        document["timings"] = {"total": round(time.perf_counter() - started, 6)}
    _emit(document, args.human)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
