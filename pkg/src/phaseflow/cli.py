"""Command line front end: ``phaseflow {evolve,experiment,graph}``.

Exit codes: 0 success, 2 bad arguments or inputs, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .allen_cahn import StepRejected, ac_reference, obstacle_hit_time, regularized_flow
from .functionals import ginzburg_landau, lyapunov_H, mbo_lyapunov_J
from .graph import GENERATORS, Graph, GraphError, format_edge_list, read_edge_list
from .lab import (convergence_order_experiment, cp1_sample, cp2_experiment,
                  gamma_convergence_experiment, mcf_agreement_experiment, parallel_map, pinning_map)
from .mcf import elmo_mcf_flow, new_mcf_step, vggob_mcf_step
from .semidiscrete import SchemeParams, sd_run
from .spectral import SpectralError, decompose
from .splitting import ts_step
from .trajectory import Trajectory

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _default_jobs() -> int:
    raw = os.environ.get("PHASEFLOW_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_graph_args(p: argparse.ArgumentParser, required: bool = True):
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--graph", help="edge-list file with lines 'i j w'")
    src.add_argument("--generator", choices=sorted(GENERATORS))
    p.add_argument("--n", type=int, default=6, help="number of vertices for --generator")
    p.add_argument("--weight", type=float, default=1.0, help="edge weight for generated graphs")
    p.add_argument("--inter", type=float, default=0.05, help="cross weight for two-cluster")
    p.add_argument("--p-edge", type=float, default=0.4, help="edge probability for random graphs")
    p.add_argument("--r", type=float, default=0.0, help="degree exponent in [0, 1]")
    p.add_argument("--seed", type=int, default=0)


def build_graph(args) -> Graph:
    if args.graph:
        try:
            return read_edge_list(args.graph, r=args.r)
        except OSError as exc:
            raise UsageError(f"cannot read graph: {exc}") from None
    name = args.generator
    if name == "random":
        return GENERATORS[name](args.n, p=args.p_edge, seed=args.seed, r=args.r)
    if name == "two-cluster":
        return GENERATORS[name](args.n, inter=args.inter, weight=args.weight, r=args.r)
    return GENERATORS[name](args.n, weight=args.weight, r=args.r)


def parse_u0(spec: str, n: int, seed: int) -> np.ndarray:
    """Initial state from ``indicator:i,j``, ``const:a``, ``values:a,b,..``,
    ``random[:lo:hi]`` or ``binary-random``."""
    kind, _, rest = spec.partition(":")
    rng = np.random.default_rng(seed)
    try:
        if kind == "indicator":
            u = np.zeros(n)
            idx = [int(x) for x in rest.split(",") if x.strip()]
            if any(not 0 <= i < n for i in idx):
                raise UsageError(f"indicator vertex out of range in {spec!r}")
            u[idx] = 1.0
        elif kind == "const":
            u = np.full(n, float(rest))
        elif kind == "values":
            u = np.array([float(x) for x in rest.split(",")])
            if u.size != n:
                raise UsageError(f"{spec!r} has {u.size} values for {n} vertices")
        elif kind == "random":
            lo, hi = (0.0, 1.0) if not rest else (float(x) for x in rest.split(":"))
            u = rng.uniform(lo, hi, n)
        elif kind == "binary-random":
            u = (rng.random(n) < 0.5).astype(float)
        else:
            raise UsageError(f"unknown initial state {spec!r}")
    except ValueError as exc:
        raise UsageError(f"bad initial state {spec!r}: {exc}") from None
    if np.any(u < 0) or np.any(u > 1):
        raise UsageError("initial state must lie in [0, 1]")
    return u


def provenance(g: Graph, args, scheme: str, **extra) -> dict:
    rec = {"graph_hash": g.fingerprint(), "n_vertices": g.n_vertices, "r": g.r,
           "scheme": scheme, "seed": args.seed, "version": __version__}
    rec.update(extra)
    return rec


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _clean(obj):
    """Replace NaN and infinities by None so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _csv_text(rows: list, header_lines=()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------

def _set_trajectory(sets, g, dec, tau, eps) -> Trajectory:
    states = np.array([s.astype(float) for s in sets])
    energies = None
    if dec is not None:
        energies = [{"H": lyapunov_H(g, dec, eps, tau, u), "GL": ginzburg_landau(g, eps, u),
                     "J": mbo_lyapunov_J(g, dec, tau, u)} for u in states]
    return Trajectory(tau * np.arange(len(states)), states, np.full_like(states, np.nan),
                      "set", energies)


def cmd_evolve(args) -> int:
    g = build_graph(args)
    dec = decompose(g)
    u0 = parse_u0(args.u0, g.n_vertices, args.seed)
    scheme = args.scheme
    eps, tau = args.eps, args.tau
    extra = {"epsilon": eps}
    summary = {}
    if scheme in ("mbo", "semidiscrete", "splitting", "vggob", "new-mcf") and tau is None:
        raise UsageError(f"--tau is required for scheme {scheme}")
    if scheme == "mbo":
        if not np.all((u0 == 0) | (u0 == 1)):
            raise UsageError("mbo needs a binary initial state")
        # the threshold scheme is the semi-discrete scheme with eps = tau
        traj = sd_run(g, dec, SchemeParams(tau, tau), u0, args.steps, scheme_tag="mbo")
        extra.update(tau=tau, lambda_=1.0, energy_epsilon=tau)
    elif scheme == "semidiscrete":
        params = SchemeParams(eps, tau)
        traj = sd_run(g, dec, params, u0, args.steps)
        extra.update(tau=tau, lambda_=params.lam, regime=params.regime)
    elif scheme == "splitting":
        params = SchemeParams(eps, tau)
        states = [u0]
        for _ in range(args.steps):
            states.append(ts_step(g, dec, params, states[-1]))
        states = np.array(states)
        energies = [{"H": lyapunov_H(g, dec, eps, tau, u), "GL": ginzburg_landau(g, eps, u),
                     "J": mbo_lyapunov_J(g, dec, tau, u)} for u in states]
        traj = Trajectory(tau * np.arange(len(states)), states, np.full_like(states, np.nan),
                          "splitting", energies, meta={"epsilon": eps, "tau": tau})
        extra.update(tau=tau)
    elif scheme in ("ac-reference", "regularized"):
        if args.t_end is None:
            raise UsageError(f"--t-end is required for scheme {scheme}")
        n_samples = max(1, int(math.ceil(args.t_end * args.samples_per_unit)))
        grid = np.linspace(0.0, args.t_end, n_samples + 1)
        if scheme == "ac-reference":
            tau_ref = args.tau_ref or eps / 1024
            traj = ac_reference(g, dec, eps, u0, grid, tau_ref, args.reference)
            extra.update(tau=tau_ref, reference=args.reference)
        else:
            traj = regularized_flow(g, dec, eps, args.nu, u0, t_grid=grid, dt=args.dt)
            extra.update(nu=args.nu, dt=traj.meta["dt"])
        traj.energies = [{"H": math.nan, "GL": ginzburg_landau(g, eps, u), "J": math.nan}
                         for u in traj.states]
        summary["obstacle_hit_time"] = obstacle_hit_time(traj)
    elif scheme in ("vggob", "new-mcf"):
        if not np.all((u0 == 0) | (u0 == 1)):
            raise UsageError(f"{scheme} needs a binary initial state")
        cur = u0.astype(bool)
        sets = [cur]
        for _ in range(args.steps):
            nxt = vggob_mcf_step(g, cur, tau) if scheme == "vggob" else new_mcf_step(g, dec, cur, tau)
            if np.array_equal(nxt, cur):
                break
            sets.append(nxt)
            cur = nxt
        traj = _set_trajectory(sets, g, dec, tau, eps)
        traj.fixed_point = len(sets) <= args.steps
        extra.update(tau=tau)
    elif scheme == "elmo":
        traj = elmo_mcf_flow(g, u0, args.p_norm, args.dt or 0.01, args.steps)
        extra.update(p=args.p_norm, dt_max=traj.meta["dt_max"])
        traj.meta.pop("dt_used", None)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown scheme {scheme}")
    if "lambda_" in extra:
        extra["lambda"] = extra.pop("lambda_")
    prov = provenance(g, args, scheme, **extra)
    text = traj.to_csv() if args.format == "csv" else traj.to_json(prov) + "\n"
    _emit(text, args.out)
    summary.update({"steps": len(traj) - 1, "fixed_point": traj.fixed_point,
                    "final_u": traj.final.tolist()})
    if traj.energies:
        summary["final_energies"] = traj.energies[-1]
    stream = sys.stdout if args.out else sys.stderr
    print(json.dumps(_clean(summary), sort_keys=True), file=stream)
    return 0


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------

def _cp1_worker(job):
    g, eps, u0, T, seed, tau_ref = job
    return cp1_sample(g, decompose(g), eps, u0, T, seed, tau_ref)


def _cp2_worker(job):
    g, eps, u0, v0, T, tau_ref = job
    return cp2_experiment(g, decompose(g), eps, u0, v0, T, tau_ref)


def cmd_experiment(args) -> int:
    g = build_graph(args)
    dec = decompose(g)
    kind = args.kind
    eps = args.eps
    rng = np.random.default_rng(args.seed)
    head = [f"experiment={kind}", f"graph_hash={g.fingerprint()}", f"r={g.r!r}", f"eps={eps!r}",
            f"seed={args.seed}", f"version={__version__}"]
    if kind == "convergence":
        taus = args.taus or [f * eps for f in (0.2, 0.1, 0.05, 0.025)]
        u0 = parse_u0(args.u0, g.n_vertices, args.seed) if args.u0 else rng.uniform(0.3, 0.7, g.n_vertices)
        res = convergence_order_experiment(g, dec, eps, u0, args.t, taus, args.tau_ref)
        rows = res["rows"]
        head += [f"t={args.t!r}", f"tau_ref={res['tau_ref']!r}", f"slope={res['slope']!r}",
                 f"monotone={res['monotone']}"]
    elif kind == "gamma":
        eps_list = args.eps_list or [1.0, 0.5, 0.25, 0.125]
        res = gamma_convergence_experiment(g, eps_list, args.grid, dec=dec)
        rows = res["rows"]
        head += [f"nonincreasing={res['nonincreasing']}", f"final_within_grid={res['final_within_grid']}",
                 f"bound_holds={res['bound_holds']}"]
    elif kind == "cp2":
        jobs = []
        for _ in range(args.samples):
            u0 = rng.random(g.n_vertices)
            v0 = np.clip(u0 - rng.uniform(0, 0.3, g.n_vertices), 0, 1)
            jobs.append((g, eps, u0, v0, args.t_end, args.tau_ref))
        results = parallel_map(_cp2_worker, jobs, args.jobs)
        rows = [{"seed": k, "pass": r["passed"], "max_excess": r["max_excess"]}
                for k, r in enumerate(results)]
    elif kind == "cp1":
        seeds = np.random.SeedSequence(args.seed).spawn(args.samples)
        u0 = rng.random(g.n_vertices)
        results = parallel_map(_cp1_worker, [(g, eps, u0, args.t_end, s, args.tau_ref) for s in seeds],
                               args.jobs)
        discarded = sum(r["discarded"] for r in results)
        rows = [{"seed": k, "pass": r["passed"], "discarded": r["discarded"],
                 "max_excess": r["max_excess"]} for k, r in enumerate(results)]
        head.append(f"discard_rate={discarded / len(results)!r}")
    elif kind == "pinning-map":
        lambdas = args.lambdas or [0.25, 0.5, 1.0]
        rows = pinning_map(g, lambdas, dec=dec)
    elif kind == "mcf-agreement":
        taus = args.taus or [0.05, 0.1, 0.2, 0.4]
        rows = mcf_agreement_experiment(g, taus, args.samples, args.steps, args.seed, dec)
    else:  # pragma: no cover
        raise UsageError(kind)
    _emit(_csv_text(rows, head), args.out)
    return 0


# ---------------------------------------------------------------------------
# graph
# ---------------------------------------------------------------------------

def cmd_graph(args) -> int:
    g = build_graph(args)
    header = None
    if args.header:
        header = f"generator={args.generator} n={g.n_vertices} seed={args.seed} hash={g.fingerprint()}"
    _emit(format_edge_list(g, header), args.out)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaseflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evolve", help="run a scheme and write its trajectory")
    _add_graph_args(ev)
    ev.add_argument("--scheme", required=True,
                    choices=["mbo", "semidiscrete", "splitting", "ac-reference", "regularized",
                             "vggob", "new-mcf", "elmo"])
    ev.add_argument("--eps", type=float, default=1.0)
    ev.add_argument("--tau", type=float)
    ev.add_argument("--steps", type=int, default=100)
    ev.add_argument("--t-end", type=float)
    ev.add_argument("--tau-ref", type=float)
    ev.add_argument("--reference", choices=["semi-discrete", "splitting"], default="semi-discrete")
    ev.add_argument("--samples-per-unit", type=int, default=200)
    ev.add_argument("--nu", type=float, default=0.05)
    ev.add_argument("--dt", type=float)
    ev.add_argument("--p-norm", type=float, default=2.0)
    ev.add_argument("--u0", default="random")
    ev.add_argument("--format", choices=["json", "csv"], default="json")
    ev.add_argument("--out")
    ev.set_defaults(func=cmd_evolve)

    ex = sub.add_parser("experiment", help="run a numerical experiment and write a CSV table")
    ex.add_argument("kind", choices=["convergence", "gamma", "cp1", "cp2", "pinning-map", "mcf-agreement"])
    _add_graph_args(ex)
    ex.add_argument("--eps", type=float, default=1.0)
    ex.add_argument("--t", type=float, default=0.5)
    ex.add_argument("--t-end", type=float, default=1.0)
    ex.add_argument("--taus", type=_floats)
    ex.add_argument("--tau-ref", type=float)
    ex.add_argument("--eps-list", type=_floats)
    ex.add_argument("--grid", type=int, default=20)
    ex.add_argument("--lambdas", type=_floats)
    ex.add_argument("--samples", type=int, default=20)
    ex.add_argument("--steps", type=int, default=10)
    ex.add_argument("--u0")
    ex.add_argument("--jobs", type=int, default=_default_jobs())
    ex.add_argument("--out")
    ex.set_defaults(func=cmd_experiment)

    gr = sub.add_parser("graph", help="write a generated graph as an edge list")
    _add_graph_args(gr)
    gr.add_argument("--header", action="store_true", help="prefix a provenance comment")
    gr.add_argument("--out")
    gr.set_defaults(func=cmd_graph)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GraphError, OSError) as exc:
        print(f"phaseflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SpectralError, StepRejected, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"phaseflow: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"phaseflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
