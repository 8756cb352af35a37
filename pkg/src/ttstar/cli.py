"""Command-line front end: ``ttstar <command> [input...] [options]``.

Exit codes: 0 when every checked identity holds, 1 for a mathematical
failure (a residual above tolerance, IS violated, ...), 2 for unreadable or
invalid input.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import connection, fixtures, hodge, model, spectrum, sylvester
from .errors import (
    CommonEigenvalue,
    ISViolated,
    NonConstant,
    NotFlat,
    PreconditionViolated,
    TtstarError,
    UnknownFixture,
)
from .jets import covariant_d

COMMANDS = ("check", "solve-phi", "spectrum", "monodromy", "hodge-to-vhs", "vhs-to-ttstar", "gen")

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple = ()
    tol: float = 1e-9
    steps: int = 4096
    with_weight: bool = False
    weight: int | None = None
    seed: int | None = None
    output: str = "text"
    jobs: int = 1
    stamp: bool = False


class MathFailure(Exception):
    """Raised inside a command to report a mathematical (exit 1) outcome with data."""

    def __init__(self, message, data=None):
        super().__init__(message)
        self.data = data or {}


# ---------------------------------------------------------------------------
# JSON with 17 significant digits


def _fmt(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x + 0.0, ".17g")


def to_json(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{_fmt(obj.real)}, {_fmt(obj.imag)}]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{to_json(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# commands; each returns (report or None, data)


def _read(path: str) -> bytes:
    try:
        return sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    except OSError as exc:
        raise model.ParseError(f"cannot read {path}: {exc}") from exc


def _matrix(rows):
    return np.array([[complex(v) if not isinstance(v, list) else complex(*v) for v in row] for row in rows])


def cmd_check(path, cfg):
    B = model.load(_read(path))
    return model.full_report(B, cfg.tol), {}


def cmd_solve_phi(path, cfg):
    doc = model.parse_json(_read(path))
    if isinstance(doc, dict) and "rank" in doc:
        B = model.from_dict(doc)
        Q = B.Q.constant_part()
        dU = [f.constant_part() for f in covariant_d(B.connection(), B.U)]
    else:
        if not isinstance(doc, dict) or set(doc) != {"Q", "dU"}:
            raise model.SchemaError("expected an object with keys Q and dU, or a bundle", None)
        try:
            Q = _matrix(doc["Q"])
            dU = [_matrix(m) for m in doc["dU"]]
        except (TypeError, ValueError) as exc:
            raise model.SchemaError(f"bad matrix entry: {exc}", "Q") from exc
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or any(m.shape != Q.shape for m in dU):
            raise model.SchemaError("Q and every dU must be square of one size", "dU")
    isr = sylvester.is_condition(Q, cfg.tol)
    data = {"is_margin": isr.margin, "Q_eigenvalues": isr.eigenvalues}
    try:
        C = sylvester.recover_higgs(Q, dU, cfg.tol)
    except (ISViolated, CommonEigenvalue) as exc:
        raise MathFailure(str(exc), data) from exc
    rep = model.CheckReport(cfg.tol)
    rep.add("IS-margin", isr.margin, lower_bound=True)
    rep.add("UCQ", sylvester.ucq_residual(Q, C, dU))
    data["higgs"] = C
    return rep, data


def cmd_spectrum(path, cfg):
    B = model.load(_read(path))
    rep = model.CheckReport(cfg.tol)
    if B.kappa is not None:
        s = spectrum.pairing_spectrum(B.Q.constant_part(), B.metric.constant_part(), B.kappa, cfg.tol)
        rep.add("pairing", float(np.abs(s.eigenvalues + s.eigenvalues[::-1]).max()))
        rep.add("trace", abs(s.trace), tol=B.rank * cfg.tol)
    else:
        try:
            s = spectrum.flat_diagonalize(B.Q, B.connection(), B.metric, cfg.tol)
        except (NotFlat, NonConstant) as exc:
            raise MathFailure(f"{type(exc).__name__}: {exc}") from exc
    data = s.to_dict()
    data["diagonalizing_frame"] = s.diagonalizing_frame
    return rep, data


def cmd_monodromy(path, cfg):
    B = model.load(_read(path))
    if cfg.weight is not None:
        B = B.replace(weight=cfg.weight)
    F = connection.assemble(B, with_weight=cfg.with_weight)
    num = connection.monodromy_numeric(F, cfg.steps)
    rep = model.CheckReport(cfg.tol)
    data = {"T": num.T, "steps": num.steps, "with_weight": cfg.with_weight, "A0": F.A0}
    if F.is_constant():
        closed = connection.monodromy_closed(F.A0)
        rep.add("numeric-vs-closed", num.residual, tol=max(cfg.tol, 1e-8))
        data["T_closed"] = closed.T
    rep.add("liouville", num.liouville_defect(), tol=1e-6)
    return rep, data


def cmd_hodge_to_vhs(path, cfg):
    B = model.load(_read(path))
    w = cfg.weight if cfg.weight is not None else (B.weight or 0)
    V = hodge.ttstar_to_vhs(B, w, cfg.tol)
    return hodge.polarization_signs(V, cfg.tol), hodge.vhs_to_dict(V)


def cmd_vhs_to_ttstar(path, cfg):
    weight, grading, k, kappa = hodge.load_vhs(_read(path))
    if kappa is None:
        try:
            kappa = hodge.exchange_kappa(grading)
        except PreconditionViolated:
            kappa = None
    B = hodge.vhs_to_ttstar(grading, k, weight=weight, kappa=kappa, tol=cfg.tol)
    return model.full_report(B, cfg.tol), {"bundle": model.to_dict(B)}


HANDLERS = {
    "check": cmd_check,
    "solve-phi": cmd_solve_phi,
    "spectrum": cmd_spectrum,
    "monodromy": cmd_monodromy,
    "hodge-to-vhs": cmd_hodge_to_vhs,
    "vhs-to-ttstar": cmd_vhs_to_ttstar,
}


def run_one(path: str, cfg: RunConfig):
    """Run one input; returns ``(exit_code, json_text, human_text, diagnostic)``."""
    doc = {"command": cfg.command, "input": path}
    diag = ""
    try:
        rep, data = HANDLERS[cfg.command](path, cfg)
        code = EXIT_PASS if rep.verdict else EXIT_FAIL
        doc.update(verdict="pass" if rep.verdict else "fail",
                   residuals={k: r.value for k, r in rep.residuals.items() if not r.skipped}, data=data)
        text = rep.to_text()
        if rep.failures:
            text += "\nfailed: " + ", ".join(rep.failures)
    except MathFailure as exc:
        code = EXIT_FAIL
        doc.update(verdict="fail", residuals={}, data={**exc.data, "reason": str(exc)})
        text = f"fail: {exc}"
        if "is_margin" in exc.data:
            text += f"\nIS margin: {exc.data['is_margin']:.17g}"
    except (TtstarError, ValueError) as exc:
        code = EXIT_ERROR
        field = getattr(exc, "field", None)
        doc.update(verdict="error", residuals={}, data={"error": type(exc).__name__, "message": str(exc),
                                                         "field": field})
        text = f"error: {type(exc).__name__}: {exc}"
        diag = f"{path}: {type(exc).__name__}: {exc}"
    return code, to_json(doc), text, diag


def _run_one_packed(args):
    path, cfg_dict = args
    return run_one(path, RunConfig(**cfg_dict))


def run_gen(cfg: RunConfig, out=sys.stdout, err=sys.stderr) -> int:
    if not cfg.inputs:
        print("error: gen needs a fixture name", file=err)
        return EXIT_ERROR
    name, *rest = cfg.inputs
    try:
        B = fixtures.generate(name, *rest)
    except (UnknownFixture, ValueError) as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=err)
        return EXIT_ERROR
    out.write(to_json(model.to_dict(B)) + "\n")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ttstar", description="Check and construct tt*-bundle data.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("inputs", nargs="*", help="input files ('-' for stdin); for gen, the fixture name and arguments")
    ap.add_argument("--tol", type=float, default=1e-9)
    ap.add_argument("--steps", type=int, default=4096)
    ap.add_argument("--with-weight", action="store_true")
    ap.add_argument("--weight", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--output", choices=("text", "json"), default="text")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--stamp", action="store_true")
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_PASS
    cfg = RunConfig(ns.command, tuple(ns.inputs), ns.tol, ns.steps, ns.with_weight, ns.weight, ns.seed,
                    ns.output, max(1, ns.jobs), ns.stamp)
    if cfg.command == "gen":
        return run_gen(cfg, out, err)
    if not cfg.inputs:
        print(f"error: {cfg.command} needs at least one input file", file=err)
        return EXIT_ERROR
    if cfg.jobs > 1 and len(cfg.inputs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_one_packed, [(p, asdict(cfg)) for p in cfg.inputs]))
    else:
        results = [run_one(p, cfg) for p in cfg.inputs]
    for path, (code, doc, text, diag) in zip(cfg.inputs, results):
        if diag:
            print(diag, file=err)
        if cfg.output == "json":
            out.write(doc + "\n")
        else:
            out.write(f"== {cfg.command} {path}\n")
            if cfg.stamp:
                out.write(f"at {datetime.datetime.now(datetime.timezone.utc).isoformat()}\n")
            out.write(text + "\n")
    return max(code for code, *_ in results)


if __name__ == "__main__":
    sys.exit(main())
