"""Batch command-line interface.

Subcommands wire file I/O to the library pipeline and emit JSON reports
(stdout) with diagnostics on stderr.  Exit codes are a stable contract:

    0   success; for classify: verdict quantum_state
    1   I/O or parse error
    10  classify: verdict popt_only
    20  classify: verdict not_popt
    30  classify: invalid input operator
    40  extend: oracle values inconsistent with any linear functional
    41  extend: tomography grid incomplete (missing entries listed)
    50  check: constraint violated
    51  dilate: construction failed (non-positive element / not CP)

Every flag can be preset through an environment variable with the
``POPTLAB_`` prefix, e.g. ``POPTLAB_SEED=7``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import __version__
from .bell import optimize_chsh
from .contexts import ContextSamplePlan
from .dilation import POVM, naimark_dilate, stinespring_dilate
from .errors import (
    InconsistentOracle,
    InvalidInput,
    InvalidPOVM,
    NotCompletelyPositive,
    PoptlabError,
    UnsupportedQuery,
)
from .fixtures import GeneratorSpec, generate
from .jordan import ClassifyConfig, LinearMapRep, classify
from .measures import (
    OperatorBackedMeasure,
    check_no_disturbance,
    check_no_disturbance_operator,
    check_no_signalling,
    gleason_extend,
    scenario_from_json,
    scenario_to_json,
    tomography_family,
)
from .operator_core import identity
from .serialize import (
    infer_factor_dims,
    matrix_from_json,
    state_from_json,
    state_to_json,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_POPT_ONLY = 10
EXIT_NOT_POPT = 20
EXIT_INVALID = 30
EXIT_INCONSISTENT = 40
EXIT_INCOMPLETE = 41
EXIT_VIOLATED = 50
EXIT_DILATION = 51


@dataclass(frozen=True)
class RunConfig:
    tol_herm: float = 1e-10
    tol_eig: float = 1e-9
    tol_popt: float = 1e-8
    tol_orientation: float = 1e-8
    tol_constraint: float = 1e-10
    restarts: int = 64
    samples: int = 50
    seed: int = 0
    fmt: str = "json"
    output: str | None = None

    def __post_init__(self):
        for name in ("tol_herm", "tol_eig", "tol_popt", "tol_orientation", "tol_constraint"):
            if getattr(self, name) <= 0:
                raise InvalidInput(f"{name} must be positive")


def _env(name: str, cast, default):
    raw = os.environ.get(f"POPTLAB_{name}")
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError as exc:
        raise SystemExit(f"poptlab: bad value for POPTLAB_{name}: {exc}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poptlab", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"poptlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-herm", type=float, default=_env("TOL_HERM", float, 1e-10))
    common.add_argument("--tol-eig", type=float, default=_env("TOL_EIG", float, 1e-9))
    common.add_argument("--tol-popt", type=float, default=_env("TOL_POPT", float, 1e-8))
    common.add_argument("--tol-orientation", type=float, default=_env("TOL_ORIENTATION", float, 1e-8))
    common.add_argument("--tol-constraint", type=float, default=_env("TOL_CONSTRAINT", float, 1e-10))
    common.add_argument("--restarts", type=int, default=_env("RESTARTS", int, 64))
    common.add_argument("--samples", type=int, default=_env("SAMPLES", int, 50))
    common.add_argument("--seed", type=int, default=_env("SEED", int, 0))
    common.add_argument("--format", dest="fmt", choices=("json", "text"), default=_env("FORMAT", str, "json"))
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--dims", type=int, nargs=2, metavar=("D1", "D2"), default=None, help="bipartite factor dimensions")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("classify", parents=[common], help="run the full state-classification pipeline")
    p.add_argument("path")
    p = sub.add_parser("extend", parents=[common], help="reconstruct the backing operator from a tomography grid or scenario")
    p.add_argument("path")
    p.add_argument("--allow-dim2", action="store_true", help="permit dimension-2 reconstruction (operator-backed round trips only)")
    p = sub.add_parser("dilate", parents=[common], help="Naimark-dilate a POVM or Stinespring-dilate a map")
    p.add_argument("path")
    p.add_argument("--kind", choices=("auto", "naimark", "stinespring"), default="auto")
    p = sub.add_parser("chsh", parents=[common], help="optimize the CHSH functional of a state")
    p.add_argument("path")
    p = sub.add_parser("check", parents=[common], help="verify a marginalisation constraint")
    p.add_argument("path")
    p.add_argument("--constraint", choices=("no-signalling", "no-disturbance"), default="no-signalling")
    p = sub.add_parser("generate", parents=[common], help="emit a named fixture as state/scenario JSON")
    p.add_argument("kind")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="extra generator parameter")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        tol_herm=args.tol_herm,
        tol_eig=args.tol_eig,
        tol_popt=args.tol_popt,
        tol_orientation=args.tol_orientation,
        tol_constraint=args.tol_constraint,
        restarts=args.restarts,
        samples=args.samples,
        seed=args.seed,
        fmt=args.fmt,
        output=args.output,
    )


def _load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SystemExit2(EXIT_IO, f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise SystemExit2(EXIT_IO, f"parse error in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}")


class SystemExit2(Exception):
    """Exit request carrying the code and a stderr diagnostic."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(payload: dict[str, Any], cfg: RunConfig, text: str | None = None) -> None:
    """Write the report once; JSON is key-sorted so runs are byte-identical."""
    if cfg.fmt == "json":
        body = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        body = (text or json.dumps(payload, sort_keys=True, indent=2)) + "\n"
    if cfg.output:
        tmp = cfg.output + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(body)
        os.replace(tmp, cfg.output)
    else:
        sys.stdout.write(body)


def _load_state(path: str, args: argparse.Namespace) -> tuple[np.ndarray, tuple[int, int]]:
    obj = _load_json(path)
    try:
        rho, embedded = state_from_json(obj)
    except InvalidInput as exc:
        raise SystemExit2(EXIT_IO, str(exc))
    dims = tuple(args.dims) if args.dims else embedded
    try:
        dims = infer_factor_dims(rho.shape[0], dims)
    except InvalidInput as exc:
        raise SystemExit2(EXIT_IO, str(exc))
    return rho, dims


def cmd_classify(args: argparse.Namespace, cfg: RunConfig) -> int:
    rho, dims = _load_state(args.path, args)
    report = classify(
        rho,
        dims,
        ClassifyConfig(
            herm_tol=cfg.tol_herm,
            psd_tol=cfg.tol_eig,
            popt_tol=cfg.tol_popt,
            orientation_tol=cfg.tol_orientation,
            restarts=cfg.restarts,
            samples=cfg.samples,
            seed=cfg.seed,
        ),
    )
    text = f"verdict: {report.verdict}"
    if report.orientation is not None:
        text += f" (orientation {report.orientation.tag})"
    _emit(report.to_json(), cfg, text)
    return {"quantum_state": EXIT_OK, "popt_only": EXIT_POPT_ONLY, "not_popt": EXIT_NOT_POPT}.get(
        report.verdict, EXIT_INVALID
    )


def cmd_extend(args: argparse.Namespace, cfg: RunConfig) -> int:
    obj = _load_json(args.path)
    if isinstance(obj, dict) and "values" in obj:
        from .measures import oracle_from_grid

        oracle, dims, missing = oracle_from_grid(obj)
        if missing:
            raise SystemExit2(EXIT_INCOMPLETE, f"grid is missing {len(missing)} entries: {missing[:20]}")
    elif isinstance(obj, dict) and "table" in obj:
        mu = scenario_from_json(obj)
        dims = (mu.d1, mu.d2)
        aug1 = tomography_family(dims[0]) + [identity(dims[0])]
        aug2 = tomography_family(dims[1]) + [identity(dims[1])]
        missing = []
        for a, p in enumerate(aug1):
            for b, q in enumerate(aug2):
                try:
                    mu.evaluate(p, q)
                except UnsupportedQuery:
                    missing.append((a, b))
        if missing:
            raise SystemExit2(
                EXIT_INCOMPLETE,
                f"scenario does not cover the tomography grid; missing {len(missing)} entries: {missing[:20]}",
            )
        oracle = mu.evaluate
    else:
        raise SystemExit2(EXIT_IO, "input is neither a tomography grid nor a scenario")
    try:
        rho, residual = gleason_extend(oracle, dims, allow_dim2=args.allow_dim2, return_residual=True)
    except InconsistentOracle as exc:
        raise SystemExit2(EXIT_INCONSISTENT, str(exc))
    payload = {"state": state_to_json(rho, dims), "residual": residual}
    _emit(payload, cfg, f"reconstructed {dims[0] * dims[1]}-dimensional operator, residual {residual:.3e}")
    return EXIT_OK


def cmd_dilate(args: argparse.Namespace, cfg: RunConfig) -> int:
    obj = _load_json(args.path)
    kind = args.kind
    if kind == "auto":
        kind = "naimark" if isinstance(obj, dict) and "elements" in obj else "stinespring"
    try:
        if kind == "naimark":
            weight = matrix_from_json(obj["weight"]) if obj.get("weight") else None
            povm = POVM(tuple(matrix_from_json(e) for e in obj["elements"]), weight=weight)
            dil = naimark_dilate(povm)
        else:
            rep = LinearMapRep(int(obj["d_in"]), int(obj["d_out"]), matrix_from_json(obj["choi"]))
            dil = stinespring_dilate(rep, require_cp=True, tol=cfg.tol_eig)
    except (KeyError, TypeError, ValueError, InvalidInput) as exc:
        raise SystemExit2(EXIT_IO, f"malformed dilation input: {exc}")
    except (InvalidPOVM, NotCompletelyPositive) as exc:
        raise SystemExit2(EXIT_DILATION, str(exc))
    _emit(dil.to_json(), cfg, f"dilated to K = {dil.dim_K}")
    return EXIT_OK


def cmd_chsh(args: argparse.Namespace, cfg: RunConfig) -> int:
    rho, dims = _load_state(args.path, args)
    result = optimize_chsh(rho, dims, restarts=cfg.restarts, seed=cfg.seed)
    _emit(result.to_json(), cfg, f"optimized CHSH value {result.value:.6f}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace, cfg: RunConfig) -> int:
    obj = _load_json(args.path)
    if isinstance(obj, dict) and "table" in obj:
        mu = scenario_from_json(obj)
        if args.constraint == "no-signalling":
            report = check_no_signalling(mu, tol=cfg.tol_constraint)
        else:
            report = check_no_disturbance(mu, tol=cfg.tol_constraint)
    else:
        rho, dims = _load_state(args.path, args)
        mu = OperatorBackedMeasure(rho, dims)
        plan = ContextSamplePlan(n_random=cfg.samples, seed=cfg.seed)
        if args.constraint == "no-signalling":
            report = check_no_signalling(mu, plan, tol=cfg.tol_constraint)
        else:
            report = check_no_disturbance_operator(mu, n_families=max(cfg.samples // 4, 1), seed=cfg.seed, tol=cfg.tol_constraint)
    status = "satisfied" if report.satisfied else f"violated ({report.max_violation:.3e}) by {report.witness}"
    _emit(report.to_json(), cfg, f"{args.constraint}: {status}")
    if not report.satisfied:
        print(f"poptlab: {args.constraint} violated: {report.witness}", file=sys.stderr)
        return EXIT_VIOLATED
    return EXIT_OK


def cmd_generate(args: argparse.Namespace, cfg: RunConfig) -> int:
    params: dict[str, Any] = {}
    for item in args.param:
        if "=" not in item:
            raise SystemExit2(EXIT_IO, f"--param expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    dims = tuple(args.dims) if args.dims else (3, 3)
    try:
        fixture = generate(GeneratorSpec(args.kind, dims, args.seed, params))
    except PoptlabError as exc:
        raise SystemExit2(EXIT_IO, str(exc))
    if fixture.state is not None:
        payload = state_to_json(fixture.state, dims)
    else:
        payload = scenario_to_json(fixture.table)
    payload["kind"] = args.kind
    payload["certificate"] = fixture.certificate
    _emit(payload, cfg, f"generated {args.kind} fixture")
    return EXIT_OK


_COMMANDS = {
    "classify": cmd_classify,
    "extend": cmd_extend,
    "dilate": cmd_dilate,
    "chsh": cmd_chsh,
    "check": cmd_check,
    "generate": cmd_generate,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return _COMMANDS[args.command](args, cfg)
    except SystemExit2 as exc:
        print(f"poptlab: {exc}", file=sys.stderr)
        return exc.code
    except PoptlabError as exc:
        print(f"poptlab: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
