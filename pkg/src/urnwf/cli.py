"""Command line front end.

Nine subcommands expose the exact tables, the simulators, the analytic
limits, and the verification harness.  CSV is the canonical output
format; floats are printed with 17 significant digits so reruns
byte-reproduce.  Every file written via --out is accompanied by
<out>.manifest.json recording the subcommand, the resolved parameters,
the seed, the tool version, and a timestamp; rerunning with the
manifest's parameters reproduces the numeric columns exactly.

Seed resolution: an explicit --seed wins, else the URNWF_SEED
environment variable, else 0.

Exit codes: 0 on success (and PASS for the verdict-bearing commands
converge, moments, compare), 1 when such a verdict is FAIL, 2 on usage
or validation errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .diffusion import SdeConfig, em_simulate
from .errors import DomainError
from .harness import (
    RATE_TARGETS,
    Region,
    beta_shift_check,
    chain_vs_diffusion,
    infinitesimal_check,
    rate_sweep_q,
)
from .limit_analytic import LimitPoint, diffusion_coeffs, eval_limit, eval_vs
from .season_exact import QTable, UrnState
from .season_mc import RngStream, simulate_coupled_batch, simulate_seasons
from .wf_chain import ChainConfig, run_chain

_ENV_SEED = "URNWF_SEED"


def _fmt(value: float) -> str:
    """Scientific notation with 17 significant digits."""
    return format(float(value), ".16e")


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return _fmt(value)


def _emit_csv(out: Optional[str], header: Sequence[str], rows: Iterable[Sequence]):
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _write_manifest(out: Optional[str], subcommand: str, params: dict, seed) -> None:
    if out is None:
        return
    manifest = {
        "subcommand": subcommand,
        "params": params,
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(out + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(_ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise DomainError(f"{_ENV_SEED} must be an integer, got {env!r}")
    return 0


def _params(args, names: Sequence[str]) -> dict:
    return {name: getattr(args, name.replace("-", "_")) for name in names}


def _int_list(text: str) -> list:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list:
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}")


def _apply_jobs(jobs: Optional[int]) -> None:
    if jobs is None:
        return
    if jobs < 1:
        raise DomainError("--jobs must be at least 1")
    import numba

    numba.set_num_threads(min(jobs, numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------- subcommands


def _cmd_exact_table(args) -> int:
    table = QTable(args.kind, args.max_n, args.max_n)
    idx = np.arange(args.max_n + 1)
    W, B = np.meshgrid(idx, idx, indexing="ij")
    sum_wb = W + B

    def rows():
        for f in range(args.max_n + 1):
            if f:
                table.advance(f)
            m = sum_wb <= args.max_n - f
            layer = table.current_layer
            for w, b, val in zip(W[m], B[m], layer[m]):
                yield (w, b, f, val)

    _emit_csv(args.out, ("w", "b", "f", "value"), rows())
    _write_manifest(args.out, "exact-table", _params(args, ["max_n", "kind"]), None)
    return 0


def _cmd_season_sim(args) -> int:
    seed = _resolve_seed(args)
    state = UrnState(args.w, args.b, args.f)
    rng = RngStream(seed, 0)
    if args.coupled:
        red1, red2 = simulate_coupled_batch(state, rng, args.reps)
        header = ("replica", "drawn_urn1", "drawn_urn2")
        rows = zip(range(args.reps), red1, red2)
    elif args.aggregate:
        xs, ys = simulate_seasons(state, rng, args.reps)
        xs = xs.astype(float)
        ys = ys.astype(float)
        cov = float(np.cov(xs, ys, ddof=1)[0, 1]) if args.reps > 1 else 0.0
        header = ("reps", "x_mean", "y_mean", "x_var", "y_var", "xy_cov")
        rows = [
            (
                args.reps,
                xs.mean(),
                ys.mean(),
                xs.var(ddof=1) if args.reps > 1 else 0.0,
                ys.var(ddof=1) if args.reps > 1 else 0.0,
                cov,
            )
        ]
    else:
        xs, ys = simulate_seasons(state, rng, args.reps)
        header = ("replica", "x", "y")
        rows = zip(range(args.reps), xs, ys)
    _emit_csv(args.out, header, rows)
    _write_manifest(
        args.out,
        "season-sim",
        _params(args, ["w", "b", "f", "reps", "coupled", "aggregate"]),
        seed,
    )
    return 0


def _cmd_limit_eval(args) -> int:
    ev = eval_limit(LimitPoint(args.x, args.y, args.z))
    if args.json:
        json.dump(dataclasses.asdict(ev), sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0
    print(f"T = {_fmt(ev.T)}")
    print(f"u = {_fmt(ev.u)}")
    print(f"v = {_fmt(ev.v)}")
    for name, grad in (("T", ev.grad_T), ("u", ev.grad_u), ("v", ev.grad_v)):
        print(f"grad_{name} = ({_fmt(grad[0])}, {_fmt(grad[1])}, {_fmt(grad[2])})")
    return 0


def _cmd_vs_curve(args) -> int:
    if args.points < 2:
        raise DomainError("--points must be at least 2")
    xs = np.linspace(0.0, 1.0, args.points)

    def rows():
        for x in xs:
            ev = eval_vs(args.s, float(x))
            c = diffusion_coeffs(args.s, float(x), args.beta)
            yield (x, ev.v_s, ev.v_s_prime, ev.v_s_second, c.a, c.b)

    _emit_csv(args.out, ("x", "v_s", "v_s_prime", "v_s_second", "a", "b"), rows())
    _write_manifest(args.out, "vs-curve", _params(args, ["s", "points", "beta"]), None)
    return 0


def _cmd_chain_sim(args) -> int:
    seed = _resolve_seed(args)
    cfg = ChainConfig(
        n=args.n,
        s=args.s,
        beta=args.beta,
        x0=args.x0,
        generations=args.gens,
        seed=seed,
    )

    def rows():
        for r in range(args.reps):
            traj = run_chain(cfg, replica=r)
            for g, x in enumerate(traj.states):
                yield (r, g, x)

    _emit_csv(args.out, ("replica", "gen", "x"), rows())
    _write_manifest(
        args.out,
        "chain-sim",
        _params(args, ["n", "s", "beta", "x0", "gens", "reps"]),
        seed,
    )
    return 0


def _cmd_diffusion_sim(args) -> int:
    seed = _resolve_seed(args)
    cfg = SdeConfig(
        s=args.s,
        beta=args.beta,
        x0=args.x0,
        dt=args.dt,
        t_end=args.t_end,
        seed=seed,
        model=args.model,
    )

    def rows():
        for r in range(args.reps):
            path = em_simulate(cfg, replica=r)
            for k, (t, x) in enumerate(zip(path.times, path.values)):
                yield (r, k, t, x)

    _emit_csv(args.out, ("replica", "step", "t", "x"), rows())
    _write_manifest(
        args.out,
        "diffusion-sim",
        _params(args, ["model", "s", "beta", "x0", "dt", "t_end", "reps"]),
        seed,
    )
    return 0


def _cmd_converge(args) -> int:
    if (args.y0 is None) == (args.region_s is None):
        raise DomainError("give exactly one of --y0 and --region-s")
    region = (
        Region.y_floor(args.y0) if args.y0 is not None else Region.s_capped(args.region_s)
    )
    if len(args.band) != 2:
        raise DomainError("--band needs exactly two values lo,hi")
    lo, hi = args.band
    rt = rate_sweep_q(region, args.ns, args.target)
    _emit_csv(
        args.out,
        ("N", "sup_error", "coverage"),
        zip(rt.ns, rt.sup_errors, rt.coverages),
    )
    _write_manifest(
        args.out,
        "converge",
        _params(args, ["target", "y0", "region_s", "ns", "band"]),
        None,
    )
    ok = lo <= rt.fitted_slope <= hi
    if args.json:
        report = dataclasses.asdict(rt)
        report["region"] = {"kind": region.kind, "value": region.value}
        report["band"] = [lo, hi]
        report["passed"] = ok
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
    verdict = "PASS" if ok else "FAIL"
    print(
        f"{verdict}: target={rt.target} slope={rt.fitted_slope:.4f} "
        f"band=[{lo:.2f},{hi:.2f}] r2={rt.fit_r2:.4f} C={rt.fitted_constant:.4g}"
    )
    return 0 if ok else 1


def _cmd_moments(args) -> int:
    seed = _resolve_seed(args)
    rep = infinitesimal_check(
        args.n_list,
        args.x_grid,
        args.s,
        args.beta,
        args.reps,
        seed,
        x_cap=args.x_cap,
    )
    _emit_csv(
        args.out,
        (
            "n", "x", "b_hat", "b_se", "b_ref", "a_hat", "a_se", "a_ref",
            "b_within", "a_within",
        ),
        (
            (
                r.n, r.x, r.b_hat, r.b_se, r.b_ref, r.a_hat, r.a_se, r.a_ref,
                r.b_within, r.a_within,
            )
            for r in rep.rows
        ),
    )
    _write_manifest(
        args.out,
        "moments",
        _params(args, ["n_list", "x_grid", "s", "beta", "reps", "x_cap"]),
        seed,
    )
    if args.json:
        json.dump(dataclasses.asdict(rep), sys.stdout, indent=2)
        sys.stdout.write("\n")
    ok = rep.all_within
    verdict = "PASS" if ok else "FAIL"
    n_bad = sum(1 for r in rep.rows if not (r.a_within and r.b_within))
    print(f"{verdict}: {len(rep.rows) - n_bad}/{len(rep.rows)} cells within envelope")
    return 0 if ok else 1


def _cmd_compare(args) -> int:
    seed = _resolve_seed(args)
    rep = chain_vs_diffusion(
        args.n,
        args.s,
        args.beta,
        args.x0,
        args.t,
        args.reps,
        seed,
        dt=args.dt,
        model=args.model,
    )
    fields = [f.name for f in dataclasses.fields(rep)]
    numeric = [f for f in fields if f not in ("model",)]
    _emit_csv(
        args.out,
        tuple(numeric) + ("mean_ok", "var_ok"),
        [tuple(getattr(rep, f) for f in numeric) + (rep.mean_ok, rep.var_ok)],
    )
    _write_manifest(
        args.out,
        "compare",
        _params(args, ["model", "n", "s", "beta", "x0", "t", "reps", "dt"]),
        seed,
    )
    if args.json:
        report = dataclasses.asdict(rep)
        report["mean_ok"] = rep.mean_ok
        report["var_ok"] = rep.var_ok
        report["passed"] = rep.passed
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
    verdict = "PASS" if rep.passed else "FAIL"
    print(
        f"{verdict}: model={rep.model} |dmean|={abs(rep.chain_mean - rep.sde_mean):.5f}"
        f" tol={rep.mean_tol:.5f} |dvar|={abs(rep.chain_var - rep.sde_var):.5f}"
        f" tol={rep.var_tol:.5f}"
    )
    return 0 if rep.passed else 1


# -------------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urnwf",
        description="Urn-season population model: exact tables, simulators, "
        "analytic limits, and verification sweeps.",
    )
    parser.add_argument("--version", action="version", version=f"urnwf {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, seed=False):
        p.add_argument("--out", help="write CSV here (default: stdout)")
        p.add_argument("--jobs", type=int, help="cap compiled-kernel thread count")
        if seed:
            p.add_argument(
                "--seed", type=int, help=f"RNG seed (default: ${_ENV_SEED} or 0)"
            )

    p = sub.add_parser("exact-table", help="dump exact avoidance tables as CSV")
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--kind", choices=("q", "qtilde"), default="q")
    common(p)
    p.set_defaults(func=_cmd_exact_table)

    p = sub.add_parser("season-sim", help="Monte-Carlo single seasons")
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--f", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--coupled", action="store_true", help="run the two-urn coupling")
    p.add_argument("--aggregate", action="store_true", help="emit moment summary only")
    common(p, seed=True)
    p.set_defaults(func=_cmd_season_sim)

    p = sub.add_parser("limit-eval", help="evaluate the large-population limit")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_limit_eval)

    p = sub.add_parser("vs-curve", help="tabulate v_s and diffusion coefficients")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    common(p)
    p.set_defaults(func=_cmd_vs_curve)

    p = sub.add_parser("chain-sim", help="simulate the finite-population chain")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--gens", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    common(p, seed=True)
    p.set_defaults(func=_cmd_chain_sim)

    p = sub.add_parser("diffusion-sim", help="simulate the limiting SDE")
    p.add_argument("--model", choices=("indirect", "classical"), default="indirect")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--reps", type=int, required=True)
    common(p, seed=True)
    p.set_defaults(func=_cmd_diffusion_sim)

    p = sub.add_parser("converge", help="convergence-rate sweep with verdict")
    p.add_argument("--target", choices=RATE_TARGETS, required=True)
    p.add_argument("--y0", type=float, help="black-floor region parameter")
    p.add_argument("--region-s", type=float, help="draw-cap region parameter")
    p.add_argument("--ns", type=_int_list, required=True, help="e.g. 50,100,200,400")
    p.add_argument(
        "--band",
        type=_float_list,
        default=[-1.3, -0.7],
        help="acceptance band for the fitted slope (default -1.3,-0.7)",
    )
    p.add_argument("--json", action="store_true")
    common(p)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("moments", help="one-step drift/variance vs coefficients")
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--x-grid", type=_float_list, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--x-cap", type=float, help="required cap on x when s >= 1")
    p.add_argument("--json", action="store_true")
    common(p, seed=True)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("compare", help="chain vs SDE terminal-moment agreement")
    p.add_argument("--model", choices=("indirect", "classical"), default="indirect")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--json", action="store_true")
    common(p, seed=True)
    p.set_defaults(func=_cmd_compare)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        _apply_jobs(getattr(args, "jobs", None))
        return args.func(args)
    except (DomainError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
