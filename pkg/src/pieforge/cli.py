"""Command-line interface.

Subcommands::

    pieforge check <model>
    pieforge convert <model> -o pie.json
    pieforge simulate <model|pie.json> [--dt DT] [--tend T] [--modes M] -o out.csv [--states states.csv]
    pieforge verify [--builtin ID | --model PATH | --seed N --cases K] [-o report.json]
    pieforge reconstruct <pie.json> <states.csv> [-o primal.csv]

``<model>`` is a model file or the id of a bundled example (``pieforge list``
prints them).  Exit codes: 0 ok, 1 usage, 2 invalid model, 3 inadmissible
boundary conditions, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import io
from .converter import InadmissibleError, ModelError, check_admissible, convert_gpde
from .discretize import SpectralBasis, discretize, discretize_pie
from .gpde import validate
from .oracle import report_json, verify_all
from .simulate import (SimulationError, gain_row, pencil_eigenvalues, read_states_csv, run,
                       write_outputs_csv, write_states_csv)

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INADMISSIBLE, EXIT_NUMERICAL = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; 2 is reserved for invalid models here
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt_matrix(m) -> str:
    rows = m.to_strings()
    return "[" + ", ".join("[" + ", ".join(r) + "]" for r in rows) + "]"


def _load_target(spec):
    """``(model or None, pie or None, cfg, signals, feedback)`` for a path or builtin id."""
    data = io.resolve_raw(spec)
    if io.is_pie_data(data):
        pie, cfg, sig, fb = io.load_pie(spec, full=True)
        return None, pie, cfg, sig, fb
    model, cfg, sig, fb = io.resolve(spec)
    return model, None, cfg, sig, fb


def cmd_list(args, out):
    for name in io.builtin_ids():
        print(name, file=out)
    return EXIT_OK


def cmd_check(args, out):
    model = io.resolve(args.model)[0]
    diags = validate(model)
    for d in diags:
        print(d, file=out)
    if any(d.level == "error" for d in diags):
        print("invalid", file=out)
        return EXIT_INVALID
    info = check_admissible(model)
    print(f"n = {list(model.n.n)}  n_S = {model.n.n_S}  n_BC = {model.n_bc}", file=out)
    print(f"B_T = {_fmt_matrix(info['B_T'])}", file=out)
    print(f"det(B_T) = {info['det']}", file=out)
    print(f"cond(B_T) = {info['cond']:.6g}", file=out)
    if not info["admissible"]:
        print("inadmissible", file=out)
        return EXIT_INADMISSIBLE
    print("admissible", file=out)
    return EXIT_OK


def cmd_convert(args, out):
    model = io.resolve(args.model)[0]
    pie = convert_gpde(model)
    extra = io.run_sections(io.resolve_raw(args.model))
    io.save_pie(pie, args.output, extra)
    d = pie.dims
    print(f"wrote {args.output}: x={d['x']} xhat={d['xhat']} w={d['w']} u={d['u']} z={d['z']} y={d['y']}",
          file=out)
    return EXIT_OK


def cmd_simulate(args, out):
    model, pie, cfg, signals, fb = _load_target(args.target)
    if args.dt is not None:
        cfg.dt = args.dt
    if args.tend is not None:
        cfg.t_end = args.tend
    if args.modes is not None:
        cfg.M = args.modes
    if args.stride is not None:
        cfg.stride = args.stride
    cfg.__post_init__()
    pie = pie or convert_gpde(model)
    disc = discretize_pie(pie, SpectralBasis(cfg.M, pie.dom[0], pie.dom[1]))
    K = None
    if fb and not args.open_loop:
        K = gain_row(disc, fb.get("K_x"), fb.get("k_xf"))
    traj = run(pie, cfg, signals.get("w"), signals.get("u"), K=K, disc=disc)
    write_outputs_csv(traj, args.output)
    if args.states:
        write_states_csv(traj, args.states)
    rise = float(np.max(np.diff(traj.energy), initial=0.0))
    print(f"steps={int(round(cfg.t_end / cfg.dt))} M={cfg.M} recorded={len(traj.t)} "
          f"final energy={traj.energy[-1]:.6g} max energy increase={rise:.3g}"
          + (" (closed loop)" if K is not None else ""), file=out)
    if args.eigs:
        ev = pencil_eigenvalues(disc, K)
        ev = ev[np.argsort(-ev.real)][: args.eigs]
        for lam in ev:
            print(f"eig {lam.real:+.10g} {lam.imag:+.10g}i", file=out)
    return EXIT_OK


def cmd_verify(args, out):
    if args.builtin and args.model:
        raise UsageError("verify: give at most one of --builtin and --model")
    target = args.builtin or args.model
    if target is not None and args.builtin and args.builtin not in io.builtin_ids():
        raise io.ModelFileError(f"no builtin model {args.builtin!r}; available: {', '.join(io.builtin_ids())}")
    if target is None and args.cases < 1:
        raise UsageError("verify: --cases must be positive")
    rep = verify_all(target, seed=args.seed, cases=args.cases)
    text = report_json(rep)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
        summary = ", ".join(f"{k}={v}" for k, v in sorted(rep["summary"].items()))
        print(f"{rep['target']}: {summary}", file=out)
    else:
        print(text, file=out)
    return EXIT_OK if rep["ok"] else EXIT_NUMERICAL


def cmd_reconstruct(args, out):
    pie = io.load_pie(args.pie)
    ts, nodes, steps = read_states_csv(args.states)
    basis = SpectralBasis(len(nodes) - 1, pie.dom[0], pie.dom[1])
    if not np.allclose(nodes, basis.nodes, rtol=0, atol=1e-12):
        raise SimulationError("state CSV nodes are not the Chebyshev nodes of the PIE domain")
    d = pie.dims
    mats = {k: discretize(pie.ops[k], basis) for k in ("T", "Tw", "Tu")}
    rows = []
    for t, st in zip(ts, steps):
        vec = np.concatenate([st["x"], np.ravel(st["xf"])])
        if vec.size != d["x"] + d["xhat"] * basis.size:
            raise SimulationError("state CSV does not match the PIE dimensions")
        full = mats["T"] @ vec
        for key, sig in (("Tw", st["w"]), ("Tu", st["u"])):
            if sig.size:
                full = full + mats[key] @ sig
        xo, ch = full[: d["x"]], full[d["x"]:].reshape(d["xhat"], basis.size)
        for j, s in enumerate(basis.nodes):
            rows.append(np.concatenate([[t, s], xo, ch[:, j]]))
    header = ["t", "s"] + [f"x{i + 1}" for i in range(d["x"])] + [f"xh{i + 1}" for i in range(d["xhat"])]
    data = np.array(rows).reshape(len(rows), len(header))
    target = args.output or out
    np.savetxt(target, data, delimiter=",", header=",".join(header), comments="", fmt="%.17g")
    if args.output:
        print(f"wrote {args.output}: {len(ts)} steps x {basis.size} nodes", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pieforge", description="Convert ODE-PDE models to PIEs, verify and simulate them.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("list", help="list bundled example models")
    sp.set_defaults(func=cmd_list)

    sp = sub.add_parser("check", help="validate a model and test admissibility of its boundary conditions")
    sp.add_argument("model")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("convert", help="convert a model to a PIE file")
    sp.add_argument("model")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("simulate", help="simulate a model or PIE file")
    sp.add_argument("target")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--tend", type=float)
    sp.add_argument("--modes", type=int, help="polynomial degree M of the collocation basis")
    sp.add_argument("--stride", type=int, help="record every k-th step")
    sp.add_argument("-o", "--output", required=True, help="CSV of t, z, y, energy")
    sp.add_argument("--states", help="CSV of PIE state snapshots")
    sp.add_argument("--open-loop", action="store_true", help="ignore the feedback section")
    sp.add_argument("--eigs", type=int, default=0, metavar="K",
                    help="print the K rightmost eigenvalues of the discretized pencil")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run the verification oracles")
    sp.add_argument("--builtin")
    sp.add_argument("--model")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cases", type=int, default=20)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("reconstruct", help="primal states from a PIE file and a state CSV")
    sp.add_argument("pie")
    sp.add_argument("states")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_reconstruct)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args, out)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except InadmissibleError as exc:
        print(f"inadmissible: {exc}", file=err)
        return EXIT_INADMISSIBLE
    except (io.ModelFileError, ModelError) as exc:
        print(f"invalid model: {exc}", file=err)
        return EXIT_INVALID
    except (SimulationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=err)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"invalid model: {exc}", file=err)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
