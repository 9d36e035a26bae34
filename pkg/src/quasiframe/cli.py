"""Command line entry point: ``quasiframe <group> <command> ...``.

Exit codes: 0 success, 1 usage or input error, 2 when certification finds a
frame/dual pair with no negativity (a theorem violation, i.e. a bug).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import frames as fr
from .duals import DualFrame, canonical_dual, min_eigen_objective, optimize_dual_negativity, probe_residual
from .operators import HermitianOperator
from .representation import (
    NegativityTheoremViolation,
    born_check,
    certify_negativity,
    negativity_effect,
    negativity_state,
    rep_effect,
    rep_state,
)
from .wigner import (
    DEFAULT_GRID,
    FockState,
    PhaseGrid,
    density_integral,
    marginals,
    reconstruct_from_wigner,
    wigner_transform,
    wigner_values,
)


class InputError(Exception):
    pass


@dataclass
class CommandResult:
    exit_code: int
    report_path: str | None
    summary: str


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _write_json(obj: dict, path) -> str | None:
    if path is None:
        return None
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")
    return str(path)


def _load_frame(path) -> fr.Frame:
    try:
        return fr.Frame.from_json(_load_json(path))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_dual(path) -> DualFrame:
    try:
        return DualFrame.from_json(_load_json(path))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_operator(path) -> HermitianOperator:
    try:
        return HermitianOperator.from_json(_load_json(path))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _check_pair(frame: fr.Frame, dual: DualFrame) -> None:
    if dual.parent_hash != frame.content_hash():
        raise InputError("hash mismatch: the dual was not computed from this frame")


def cmd_frame_build(kind: str, d: int | None = None, n: int | None = None, seed: int = 0, out=None) -> CommandResult:
    if kind == "sic2":
        frame = fr.sic_frame_qubit()
    elif d is None:
        raise InputError(f"frame kind {kind!r} needs -d")
    elif kind == "wootters":
        frame = fr.wootters_frame(d)
    elif kind == "mub":
        frame = fr.mub_frame(d)
    elif kind in ("random-povm", "random"):
        n = d * d if n is None else n
        build = fr.random_ic_povm if kind == "random-povm" else fr.random_frame
        frame = build(d, n, seed)
    else:
        raise InputError(f"unknown frame kind {kind!r}")
    path = _write_json(frame.to_json(), out)
    report = fr.frame_report(frame)
    return CommandResult(0, path, f"{len(frame)} elements, {report.summary()}")


def cmd_frame_check(frame_path, tol: float = fr.RANK_TOL, out=None) -> CommandResult:
    frame = _load_frame(frame_path)
    report = fr.frame_report(frame, tol)
    path = _write_json(report.to_json(), out)
    return CommandResult(0, path, f"{len(frame)} elements, {report.summary()}")


def cmd_dual(frame_path, mode: str = "canonical", out=None, *, iters=2000, step0=0.5, seed=0,
             full_space=False, report=None) -> CommandResult:
    frame = _load_frame(frame_path)
    if mode == "canonical":
        dual = canonical_dual(frame)
        lam = min_eigen_objective(dual.stack)[0]
        path = _write_json(dual.to_json(), out)
        res = probe_residual(frame, dual)
        return CommandResult(0, path, f"canonical dual, dual lambda_min={lam:.6g}, residual={res:.2e}")
    if mode == "optimize":
        result = optimize_dual_negativity(frame, iters, step0, seed, unit_trace=not full_space)
        path = _write_json(result.best.to_json(), out)
        if report is None and out is not None:
            report = str(out) + ".report.json"
        _write_json(result.to_json(), report)
        return CommandResult(0, path, f"optimized dual over {result.iters} iterations, best min lambda_min={result.value:.6g}")
    raise InputError(f"unknown dual mode {mode!r}")


def cmd_certify(frame_path, dual_path, out=None) -> CommandResult:
    frame = _load_frame(frame_path)
    dual = _load_dual(dual_path)
    _check_pair(frame, dual)
    try:
        report = certify_negativity(frame, dual)
    except NegativityTheoremViolation as exc:
        return CommandResult(2, None, f"theorem violation: {exc}")
    path = _write_json(report.to_json(), out)
    return CommandResult(0, path, report.summary())


def cmd_rep(what: str, frame_path=None, dual_path=None, state_path=None, effect_path=None, out=None) -> CommandResult:
    result: dict = {}
    parts = []
    frame = _load_frame(frame_path) if frame_path else None
    dual = _load_dual(dual_path) if dual_path else None
    if frame is not None and dual is not None:
        _check_pair(frame, dual)
    try:
        if what in ("state", "born"):
            q = rep_state(frame, _load_operator(state_path))
            neg = negativity_state(q)
            result["state"] = {"values": q.values.tolist(), "negativity": neg}
            parts.append(f"state values [{', '.join(f'{v:.6g}' for v in q.values)}], negativity {neg:.6g}")
        if what in ("effect", "born"):
            f = rep_effect(dual, _load_operator(effect_path))
            neg = negativity_effect(f)
            result["effect"] = {"values": f.values.tolist(), "negativity": neg}
            parts.append(f"effect values [{', '.join(f'{v:.6g}' for v in f.values)}], negativity {neg:.6g}")
        if what == "born":
            bc = born_check(frame, dual, _load_operator(state_path), _load_operator(effect_path))
            result["born"] = bc._asdict()
            parts.append(f"Tr(rho E)={bc.lhs:.12g}, sum={bc.rhs:.12g}, residual={bc.residual:.2e}")
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    path = _write_json(result, out)
    return CommandResult(0, path, "; ".join(parts))


def cmd_wigner(state_path, grid_spec: str | None = None, out=None, with_marginals: bool = False,
               with_reconstruct: bool = False, csv_path=None) -> CommandResult:
    try:
        state = FockState.from_json(_load_json(state_path))
        grid = PhaseGrid.parse(grid_spec) if grid_spec else DEFAULT_GRID
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    w = wigner_transform(state, grid)
    w00 = float(wigner_values(state, 0.0, 0.0))
    parts = [f"W(0,0)={w00:.6f}", f"min={w.values.min():.6f}", f"integral={w.integral():.6f}"]
    if grid_spec is None:
        g = DEFAULT_GRID
        parts.append(f"default grid {g.q_min:g},{g.q_max:g},{g.p_min:g},{g.p_max:g},{g.n_q},{g.n_p}")
    path = _write_json(w.to_json(), out)
    if csv_path is not None:
        Path(csv_path).write_text(w.to_csv())
    if with_marginals:
        m = marginals(w)
        mobj = {"q": grid.q.tolist(), "q_density": m.q_density.tolist(),
                "p": grid.p.tolist(), "p_density": m.p_density.tolist()}
        if out is not None:
            _write_json(mobj, str(out) + ".marginals.json")
        parts.append(f"q-marginal mass={density_integral(m.q_density, grid.q):.6f}")
        parts.append(f"p-marginal mass={density_integral(m.p_density, grid.p):.6f}")
    if with_reconstruct:
        rec = reconstruct_from_wigner(w, state.cutoff, state)
        parts.append(f"reconstruction residual={rec.max_error:.2e}")
    return CommandResult(0, path, ", ".join(parts))


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed for randomized constructions")
    p.add_argument("--tol", type=float, default=fr.RANK_TOL, help="relative rank tolerance")
    p.add_argument("--out", default=None, help="output JSON path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasiframe", description="Frames, duals and negativity of quasi-probability representations.")
    groups = parser.add_subparsers(dest="group", required=True)

    frame = groups.add_parser("frame").add_subparsers(dest="command", required=True)
    p = frame.add_parser("build", help="construct a named frame")
    p.add_argument("kind", choices=["wootters", "sic2", "mub", "random-povm", "random"])
    p.add_argument("-d", type=int, default=None)
    p.add_argument("-n", type=int, default=None)
    _common(p)
    p = frame.add_parser("check", help="report bounds, completeness, positivity, tightness")
    p.add_argument("frame")
    _common(p)

    dual = groups.add_parser("dual").add_subparsers(dest="command", required=True)
    p = dual.add_parser("canonical", help="canonical (minimum-norm, unit-trace) dual")
    p.add_argument("frame")
    _common(p)
    p = dual.add_parser("optimize", help="maximize the smallest dual eigenvalue")
    p.add_argument("frame")
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--step0", type=float, default=0.5)
    p.add_argument("--full-space", action="store_true", help="also vary the dual traces")
    p.add_argument("--report", default=None, help="optimizer report path (default: OUT.report.json)")
    _common(p)

    p = groups.add_parser("certify", help="certify negativity of a frame/dual pair")
    p.add_argument("frame")
    p.add_argument("dual")
    _common(p)

    rep = groups.add_parser("rep").add_subparsers(dest="command", required=True)
    p = rep.add_parser("state")
    p.add_argument("frame")
    p.add_argument("state")
    _common(p)
    p = rep.add_parser("effect")
    p.add_argument("dual")
    p.add_argument("effect")
    _common(p)
    p = rep.add_parser("born")
    for name in ("frame", "dual", "state", "effect"):
        p.add_argument(name)
    _common(p)

    wig = groups.add_parser("wigner").add_subparsers(dest="command", required=True)
    p = wig.add_parser("transform", help="Wigner function of a Fock-basis density matrix")
    p.add_argument("state")
    p.add_argument("--grid", default=None, help="qmin,qmax,pmin,pmax,nq,np (default -6,6,-6,6,201,201)")
    p.add_argument("--csv", default=None, help="also write q,p,W rows to this CSV file")
    p.add_argument("--marginals", action="store_true")
    p.add_argument("--reconstruct", action="store_true")
    _common(p)
    return parser


def dispatch(args: argparse.Namespace) -> CommandResult:
    g, c = args.group, getattr(args, "command", None)
    if g == "frame" and c == "build":
        return cmd_frame_build(args.kind, args.d, args.n, args.seed, args.out)
    if g == "frame" and c == "check":
        return cmd_frame_check(args.frame, args.tol, args.out)
    if g == "dual":
        return cmd_dual(args.frame, c, args.out, iters=getattr(args, "iters", 2000),
                        step0=getattr(args, "step0", 0.5), seed=args.seed,
                        full_space=getattr(args, "full_space", False), report=getattr(args, "report", None))
    if g == "certify":
        return cmd_certify(args.frame, args.dual, args.out)
    if g == "rep":
        return cmd_rep(c, getattr(args, "frame", None), getattr(args, "dual", None),
                       getattr(args, "state", None), getattr(args, "effect", None), args.out)
    if g == "wigner":
        return cmd_wigner(args.state, args.grid, args.out, args.marginals, args.reconstruct, args.csv)
    raise InputError(f"unknown command {g} {c}")


def run(argv=None) -> CommandResult:
    args = build_parser().parse_args(argv)
    try:
        return dispatch(args)
    except (InputError, ValueError, RuntimeError) as exc:
        return CommandResult(1, None, f"error: {exc}")


def main(argv=None) -> int:
    result = run(argv)
    stream = sys.stdout if result.exit_code == 0 else sys.stderr
    print(result.summary, file=stream)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
