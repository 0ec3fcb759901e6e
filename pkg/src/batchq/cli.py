"""Command line front end.

Subcommands:

    batchq analytic  --spec spec.json --what {mgf,moments,pmf,cumulants,covariance}
    batchq limit     --mode {batch-scaling,fluid,diffusion}
    batchq simulate  --spec spec.json --t-grid ... --reps R
    batchq compare   --spec spec.json --t T --reps R [--theta ...]
    batchq route     --k K --service ...

Every command writes delimited output to --out with values printed at full
double precision (%.17g) and drops a JSON manifest next to it recording the
argv, resolved seed and produced files, so a run can be replayed bit for bit.

Exit codes: 0 success, 1 a compare tolerance was breached, 2 bad usage,
3 a numerical domain error, 4 a simulation configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .analytic import (
    MomentPair,
    cumulant_scaled,
    cumulant_scaled_limit,
    diffusion_params,
    fluid_mgf,
    mean_var_random,
    scaled_limit_mgf,
    scaled_steady_limit_mgf,
    scaled_steady_mgf_fixed,
    steady_pmf_fixed_markov,
    subqueue_covariance,
    subqueue_correlation,
    transient_mgf_fixed,
)
from .errors import DomainError, SimConfigError
from .model import (
    EmpiricalService,
    ExponentialService,
    DeterministicService,
    FixedBatch,
    QueueSpec,
    RatePattern,
    UniformService,
    load_spec,
)
from .routing import (
    RoutingProblem,
    build_matrix,
    matrix_to_csv,
    solve_phi,
    subqueue_mean_loads,
    verify_equalization,
)
from .simulator import (
    IdenticalRouting,
    ModuloCapRouting,
    OrderStatRouting,
    SimConfig,
    mgf_point_estimates,
    replicate,
    replication_counts,
)
from .steady_state import rep_random_general, scaled_limit_sample

THETA_CAP = 5.0


def _fmt(x) -> str:
    return "%.17g" % float(x)


def _parse_grid(text: str, allow_inf: bool = False) -> list[float]:
    """Parse either a comma list ("0,0.5,1,inf") or an inclusive range
    ("start:step:stop")."""
    text = text.strip()
    if not text:
        raise ValueError("empty grid")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad grid {text!r}: expected start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if not (math.isfinite(start) and math.isfinite(step) and math.isfinite(stop)):
            raise ValueError("range grids must be finite")
        if step <= 0:
            raise ValueError("grid step must be positive")
        if stop < start:
            raise ValueError("grid stop is before start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        v = math.inf if tok.lower() == "inf" else float(tok)
        if math.isinf(v) and not allow_inf:
            raise ValueError("inf is not allowed in this grid")
        vals.append(v)
    if not vals:
        raise ValueError("empty grid")
    return vals


def _parse_int_list(text: str) -> list[int]:
    vals = [int(tok) for tok in text.split(",") if tok.strip()]
    if not vals:
        raise ValueError("empty list")
    return vals


def _check_theta_cap(thetas) -> None:
    for th in thetas:
        if abs(th) > THETA_CAP:
            raise DomainError(
                f"|theta| = {abs(th):g} exceeds the command line cap of {THETA_CAP:g}")


def _resolve_jobs(args) -> int:
    """--jobs, with 0 meaning every core the machine has."""
    jobs = getattr(args, "jobs", 1)
    if jobs is None or jobs <= 0:
        return os.cpu_count() or 1
    return int(jobs)


def _resolve_seed(args) -> int:
    """--seed, overridden by the BATCHQ_SEED environment variable."""
    env = os.environ.get("BATCHQ_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"BATCHQ_SEED={env!r} is not an integer") from None
    return int(getattr(args, "seed", 0) or 0)


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_manifest(args, command: str, seed, outputs: list[str]) -> str:
    params = {}
    for key, val in vars(args).items():
        if key.startswith("_") or key == "func":
            continue
        if isinstance(val, (list, tuple)):
            params[key] = list(val)
        else:
            params[key] = val
    manifest = {
        "command": command,
        "argv": list(getattr(args, "_argv", [])),
        "params": params,
        "seed": seed,
        "version": __version__,
        "outputs": [os.path.basename(p) for p in outputs],
    }
    path = args.out + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _plot_stem(out: str) -> str:
    stem, _ = os.path.splitext(out)
    return stem


# ----------------------------------------------------------------- analytic

def cmd_analytic(args) -> int:
    spec = load_spec(args.spec)
    outputs = [args.out]
    what = args.what

    if what == "mgf":
        if not args.t_grid or not args.theta_grid:
            raise ValueError("--what mgf needs both --t-grid and --theta-grid")
        ts = _parse_grid(args.t_grid, allow_inf=True)
        thetas = _parse_grid(args.theta_grid)
        _check_theta_cap(thetas)
        rows = []
        table = {}
        for t in ts:
            for th in thetas:
                val = transient_mgf_fixed(spec, th, t)
                table[(t, th)] = val
                rows.append([_fmt(t), _fmt(th), _fmt(val)])
        _write_csv(args.out, ["t", "theta", "mgf"], rows)
        if args.plot:
            from .plots import save_mgf_grid
            finite_ts = [t for t in ts if math.isfinite(t)]
            if finite_ts:
                png = _plot_stem(args.out) + ".png"
                grid = [[table[(t, th)] for t in finite_ts] for th in thetas]
                save_mgf_grid(png, finite_ts, thetas, grid)
                outputs.append(png)

    elif what == "moments":
        if not args.t_grid:
            raise ValueError("--what moments needs --t-grid")
        ts = _parse_grid(args.t_grid, allow_inf=True)
        rows = []
        finite = []
        for t in ts:
            mv = mean_var_random(spec, t)
            rows.append([_fmt(t), _fmt(mv.mean), _fmt(mv.variance)])
            if math.isfinite(t):
                finite.append((t, mv.mean, mv.variance))
        _write_csv(args.out, ["t", "mean", "variance"], rows)
        if args.plot and finite:
            from .plots import save_moments
            png = _plot_stem(args.out) + ".png"
            save_moments(png, [f[0] for f in finite], [f[1] for f in finite],
                         [f[2] for f in finite])
            outputs.append(png)

    elif what == "pmf":
        n = args.n
        if n is None:
            if not isinstance(spec.batch, FixedBatch):
                raise ValueError("--what pmf needs a fixed batch spec or --n")
            n = spec.batch.n
        if not isinstance(spec.service, ExponentialService):
            raise ValueError("--what pmf needs exponential service")
        if not spec.rate.is_stationary:
            raise ValueError("--what pmf needs a constant arrival rate")
        pmf = steady_pmf_fixed_markov(n, spec.rate.base, spec.service.mu, args.j_max)
        rows = [[str(j), _fmt(p)] for j, p in enumerate(pmf)]
        _write_csv(args.out, ["j", "prob"], rows)
        if args.plot:
            from .plots import save_pmf
            png = _plot_stem(args.out) + ".png"
            save_pmf(png, np.arange(len(pmf)), pmf)
            outputs.append(png)

    elif what == "cumulants":
        n = args.n
        if n is None:
            if not isinstance(spec.batch, FixedBatch):
                raise ValueError("--what cumulants needs a fixed batch spec or --n")
            n = spec.batch.n
        if not isinstance(spec.service, ExponentialService):
            raise ValueError("--what cumulants needs exponential service")
        if not spec.rate.is_stationary:
            raise ValueError("--what cumulants needs a constant arrival rate")
        orders = _parse_int_list(args.orders)
        rows = []
        for k in orders:
            val = cumulant_scaled(k, n, spec.rate.base, spec.service.mu)
            lim = cumulant_scaled_limit(k, spec.rate.base, spec.service.mu)
            rows.append([str(k), _fmt(val), _fmt(lim)])
        _write_csv(args.out, ["order", "cumulant", "limit"], rows)

    elif what == "covariance":
        if not args.t_grid:
            raise ValueError("--what covariance needs --t-grid")
        if not isinstance(spec.service, ExponentialService):
            raise ValueError("--what covariance needs exponential service")
        ts = _parse_grid(args.t_grid, allow_inf=True)
        mu = spec.service.mu
        rows = []
        finite = []
        for t in ts:
            cov = subqueue_covariance(spec.rate, mu, t)
            corr = math.nan
            if spec.rate.is_stationary:
                try:
                    corr = subqueue_correlation(spec.q0, spec.q0,
                                                spec.rate.base, mu, t)
                except DomainError:
                    pass
            rows.append([_fmt(t), _fmt(cov), _fmt(corr)])
            if math.isfinite(t):
                finite.append((t, corr))
        _write_csv(args.out, ["t", "covariance", "correlation"], rows)
        if args.plot and finite:
            from .plots import save_curve
            png = _plot_stem(args.out) + ".png"
            save_curve(png, [f[0] for f in finite], [f[1] for f in finite],
                       xlabel="t", ylabel="correlation")
            outputs.append(png)

    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown --what {what!r}")

    outputs.append(_write_manifest(args, "analytic", None, outputs))
    print(f"[analytic] {what}: wrote {args.out}")
    return 0


# -------------------------------------------------------------------- limit

def cmd_limit(args) -> int:
    outputs = [args.out]
    seed = _resolve_seed(args)

    if args.mode == "batch-scaling":
        thetas = _parse_grid(args.theta_grid)
        _check_theta_cap(thetas)
        sizes = _parse_int_list(args.n_list)
        if any(n < 1 for n in sizes):
            raise ValueError("--n-list entries must be >= 1")
        tvals = _parse_grid(args.t, allow_inf=True)
        if len(tvals) != 1:
            raise ValueError("--t takes a single value for batch-scaling")
        t = tvals[0]
        lam, mu = args.lam, args.mu
        rows = []
        curves = {n: [] for n in sizes}
        limit_curve = []
        for th in thetas:
            for n in sizes:
                if math.isinf(t):
                    val = scaled_steady_mgf_fixed(th, n, lam, mu)
                else:
                    spec_n = QueueSpec(RatePattern(lam), FixedBatch(n),
                                       ExponentialService(mu), 0)
                    val = transient_mgf_fixed(spec_n, th / n, t)
                curves[n].append(val)
                rows.append([_fmt(th), str(n), _fmt(val)])
            if math.isinf(t):
                lim = scaled_steady_limit_mgf(th, lam, mu)
            else:
                lim = scaled_limit_mgf(th, t, lam, mu)
            limit_curve.append(lim)
            rows.append([_fmt(th), "inf", _fmt(lim)])
        _write_csv(args.out, ["theta", "n", "mgf"], rows)
        if args.plot:
            from .plots import save_mgf_convergence
            png = _plot_stem(args.out) + ".png"
            named = [(str(n), curves[n]) for n in sizes] + [("inf", limit_curve)]
            save_mgf_convergence(png, thetas, named)
            outputs.append(png)
        if args.density_n:
            if not math.isinf(t):
                raise ValueError("--density-n draws the steady law; use --t inf")
            draws = scaled_limit_sample(args.density_n, lam, mu, seed,
                                        args.density_draws)
            hist, edges = np.histogram(draws, bins=args.density_bins, density=True)
            dpath = _plot_stem(args.out) + "_density.csv"
            _write_csv(dpath, ["bin_left", "bin_right", "density"],
                       [[_fmt(edges[i]), _fmt(edges[i + 1]), _fmt(hist[i])]
                        for i in range(len(hist))])
            outputs.append(dpath)
            if args.plot:
                from .plots import save_density
                png = _plot_stem(args.out) + "_density.png"
                save_density(png, draws, bins=args.density_bins)
                outputs.append(png)

    elif args.mode == "fluid":
        thetas = _parse_grid(args.theta_grid)
        _check_theta_cap(thetas)
        ts = _parse_grid(args.t_grid)
        lam, mu = args.lam, args.mu
        mean_b = args.mean_batch
        rows = []
        grid = [[0.0] * len(ts) for _ in thetas]
        for j, t in enumerate(ts):
            for i, th in enumerate(thetas):
                val = fluid_mgf(th, t, lam, mu, mean_b, args.q0)
                grid[i][j] = val
                rows.append([_fmt(t), _fmt(th), _fmt(val)])
        _write_csv(args.out, ["t", "theta", "mgf"], rows)
        if args.plot:
            from .plots import save_mgf_grid
            png = _plot_stem(args.out) + ".png"
            save_mgf_grid(png, ts, thetas, grid)
            outputs.append(png)

    elif args.mode == "diffusion":
        lam, mu = args.lam, args.mu
        mv = diffusion_params(lam, mu, args.mean_batch, args.second_moment_batch)
        _write_csv(args.out, ["mean", "variance"],
                   [[_fmt(mv.mean), _fmt(mv.variance)]])

    else:  # pragma: no cover
        raise ValueError(f"unknown --mode {args.mode!r}")

    outputs.append(_write_manifest(args, "limit", seed, outputs))
    print(f"[limit] {args.mode}: wrote {args.out}")
    return 0


# ----------------------------------------------------------------- simulate

def _parse_subqueues(text):
    if text is None or text == "none":
        return None
    if text == "identical":
        return IdenticalRouting()
    for prefix, cls in (("order-stat:", OrderStatRouting),
                        ("modulo-cap:", ModuloCapRouting)):
        if text.startswith(prefix):
            return cls(int(text[len(prefix):]))
    raise ValueError(
        f"bad --subqueues {text!r}: expected none, identical, "
        "order-stat:K or modulo-cap:K")


def cmd_simulate(args) -> int:
    spec = load_spec(args.spec)
    # Let infinite times through the parser; SimConfig rejects them with a
    # pointer at the closed-form entry points (exit 4).
    ts = _parse_grid(args.t_grid, allow_inf=True)
    if args.reps < 1:
        raise ValueError("--reps must be at least 1")
    seed = _resolve_seed(args)
    finite_ts = [t for t in ts if math.isfinite(t)]
    horizon = args.horizon if args.horizon is not None else max(finite_ts or ts)
    mode = _parse_subqueues(args.subqueues)
    config = SimConfig(spec=spec, horizon=horizon, snapshot_times=tuple(ts),
                       replications=args.reps, base_seed=seed,
                       subqueue_mode=mode)
    summary = replicate(config, jobs=_resolve_jobs(args))
    outputs = [args.out]
    summary.to_csv(args.out)
    if mode is not None:
        ppath = _plot_stem(args.out) + "_pairs.csv"
        summary.pairs_to_csv(ppath)
        outputs.append(ppath)
    if args.plot:
        from .plots import save_sim_summary
        analytic = None
        try:
            analytic = [mean_var_random(spec, t).mean for t in ts]
        except DomainError:
            pass
        png = _plot_stem(args.out) + ".png"
        save_sim_summary(png, list(summary.times), list(summary.means),
                         list(summary.standard_errors), analytic=analytic)
        outputs.append(png)
    outputs.append(_write_manifest(args, "simulate", seed, outputs))
    print(f"[simulate] {args.reps} replications -> {args.out}")
    return 0


# ------------------------------------------------------------------ compare

def _variance_se(x: np.ndarray) -> float:
    """Standard error of the sample variance (normal-theory-free)."""
    n = len(x)
    s2 = x.var(ddof=1)
    m4 = ((x - x.mean()) ** 4).mean()
    inner = m4 - s2 * s2 * (n - 3) / (n - 1)
    return math.sqrt(max(inner, 0.0) / n)


def cmd_compare(args) -> int:
    spec = load_spec(args.spec)
    ref_spec = load_spec(args.reference_spec) if args.reference_spec else spec
    tvals = _parse_grid(args.t)
    if len(tvals) != 1:
        raise ValueError("--t takes a single finite value")
    t = tvals[0]
    if args.reps < 2:
        raise ValueError("--reps must be at least 2 so standard errors exist")
    thetas = _parse_grid(args.theta) if args.theta else []
    _check_theta_cap(thetas)
    seed = _resolve_seed(args)

    exponential = isinstance(ref_spec.service, ExponentialService)
    if exponential:
        ref_mv = mean_var_random(ref_spec, t)
    else:
        if spec.q0 > 0 or ref_spec.q0 > 0:
            raise ValueError(
                "general service comparisons need q0 = 0 and a t deep enough "
                "to be effectively steady")
        if not ref_spec.rate.is_stationary:
            raise ValueError("general service comparisons need a constant rate")
        rep = rep_random_general(ref_spec.batch, ref_spec.rate.base,
                                 ref_spec.service)
        ref_mv = MomentPair(rep.mean(), rep.variance())
    if thetas and exponential and not isinstance(ref_spec.batch, FixedBatch):
        raise ValueError("transient mgf references need a fixed batch size")

    config = SimConfig(spec=spec, horizon=t, snapshot_times=(t,),
                       replications=args.reps, base_seed=seed)
    counts, _ = replication_counts(config, jobs=_resolve_jobs(args))
    col = counts[:, 0].astype(float)

    rows = []
    zmax = 0.0

    sim_mean = col.mean()
    se_mean = col.std(ddof=1) / math.sqrt(len(col))
    z = (sim_mean - ref_mv.mean) / se_mean if se_mean > 0 else math.inf
    zmax = max(zmax, abs(z))
    rows.append(["mean", _fmt(t), _fmt(ref_mv.mean), _fmt(sim_mean),
                 _fmt(se_mean), _fmt(z)])

    sim_var = col.var(ddof=1)
    se_var = _variance_se(col)
    z = (sim_var - ref_mv.variance) / se_var if se_var > 0 else math.inf
    zmax = max(zmax, abs(z))
    rows.append(["variance", _fmt(t), _fmt(ref_mv.variance), _fmt(sim_var),
                 _fmt(se_var), _fmt(z)])

    for th in thetas:
        if exponential:
            ref_val = transient_mgf_fixed(ref_spec, th, t)
        else:
            ref_val = rep.mgf(th)
        est, se = mgf_point_estimates(counts, th)
        z = (est[0] - ref_val) / se[0] if se[0] > 0 else math.inf
        zmax = max(zmax, abs(z))
        rows.append([f"mgf@{th:g}", _fmt(t), _fmt(ref_val), _fmt(est[0]),
                     _fmt(se[0]), _fmt(z)])

    _write_csv(args.out, ["quantity", "t", "reference", "estimate", "se", "z"],
               rows)
    outputs = [args.out]
    outputs.append(_write_manifest(args, "compare", seed, outputs))
    ok = zmax <= args.z_threshold
    print(f"[compare] max |z| = {zmax:.3f} over {len(rows)} checks "
          f"(threshold {args.z_threshold:g}) -> {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


# -------------------------------------------------------------------- route

def _parse_service(args):
    kind = args.service
    if kind == "exponential":
        return ExponentialService(args.mu)
    if kind == "deterministic":
        return DeterministicService(args.duration)
    if kind == "uniform":
        return UniformService(args.high)
    if kind == "empirical":
        if not args.samples_file:
            raise ValueError("--service empirical needs --samples-file")
        samples = np.loadtxt(args.samples_file, ndmin=1)
        return EmpiricalService(tuple(float(v) for v in samples))
    raise ValueError(f"unknown --service {kind!r}")  # pragma: no cover


def cmd_route(args) -> int:
    service = _parse_service(args)
    problem = RoutingProblem(k=args.k, service=service, lam=args.lam)
    matrix = build_matrix(problem)
    solution = solve_phi(problem)
    outputs = [args.out]
    solution.to_csv(args.out)
    if args.matrix_out:
        matrix_to_csv(matrix, args.matrix_out)
        outputs.append(args.matrix_out)
    loads = subqueue_mean_loads(problem, solution)
    seed = _resolve_seed(args)
    if args.verify_reps > 0:
        report = verify_equalization(problem, solution, args.verify_reps,
                                     base_seed=seed, jobs=_resolve_jobs(args))
        vpath = _plot_stem(args.out) + "_verify.csv"
        report.to_csv(vpath)
        outputs.append(vpath)
        if report.skipped:
            print("[route] verification skipped: split is infeasible")
        else:
            print(f"[route] verification max pairwise |z| = "
                  f"{report.max_pairwise_z:.3f} over {args.verify_reps} runs")
    if args.plot:
        from .plots import save_phi
        png = _plot_stem(args.out) + ".png"
        save_phi(png, solution.full_phi())
        outputs.append(png)
    outputs.append(_write_manifest(args, "route", seed, outputs))
    flat = ", ".join(f"phi_{i + 1} = {v:.6g}"
                     for i, v in enumerate(solution.full_phi()))
    print(f"[route] k = {args.k}: {flat}; feasible = {solution.feasible}; "
          f"common load = {loads[0]:.6g}")
    return 0


# --------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="batchq",
        description="Analytics and simulation for infinite-server queues "
                    "with batch arrivals.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form transforms and moments")
    p.add_argument("--spec", required=True, help="queue spec JSON file")
    p.add_argument("--what", required=True,
                   choices=["mgf", "moments", "pmf", "cumulants", "covariance"])
    p.add_argument("--t-grid", help="times: comma list (inf ok) or start:step:stop")
    p.add_argument("--theta-grid", help="transform arguments, |theta| <= 5")
    p.add_argument("--n", type=int, help="batch size override for pmf/cumulants")
    p.add_argument("--j-max", type=int, default=200,
                   help="largest pmf index (default 200)")
    p.add_argument("--orders", default="1,2,3,4,5",
                   help="cumulant orders, comma list (default 1..5)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--plot", action="store_true",
                   help="also render a PNG next to --out")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("limit", help="scaling regimes and their limits")
    p.add_argument("--mode", required=True,
                   choices=["batch-scaling", "fluid", "diffusion"])
    p.add_argument("--lam", type=float, default=1.0, help="arrival rate")
    p.add_argument("--mu", type=float, default=1.0, help="service rate")
    p.add_argument("--mean-batch", type=float, default=1.0,
                   help="mean batch size (fluid/diffusion)")
    p.add_argument("--second-moment-batch", type=float, default=1.0,
                   help="E[N^2] of the batch size (diffusion)")
    p.add_argument("--q0", type=float, default=0.0,
                   help="scaled initial level for fluid mode")
    p.add_argument("--theta-grid", default="-1:0.025:0.5")
    p.add_argument("--n-list", default="1,2,4,8,16",
                   help="batch sizes for batch-scaling, comma list")
    p.add_argument("--t", default="inf",
                   help="time for batch-scaling (default inf = steady state)")
    p.add_argument("--t-grid", default="0.25:0.25:3", help="times for fluid")
    p.add_argument("--density-n", type=int,
                   help="also sample the scaled steady law at this n")
    p.add_argument("--density-draws", type=int, default=100000)
    p.add_argument("--density-bins", type=int, default=80)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("simulate", help="replicated discrete-event runs")
    p.add_argument("--spec", required=True)
    p.add_argument("--t-grid", required=True,
                   help="finite snapshot times: comma list or start:step:stop")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float,
                   help="run length (default: last snapshot)")
    p.add_argument("--subqueues", default="none",
                   help="none, identical, order-stat:K or modulo-cap:K")
    p.add_argument("--jobs", type=int, default=0,
                   help="worker processes (0 = all cores, the default)")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare",
                       help="simulation against closed form with z-scores")
    p.add_argument("--spec", required=True)
    p.add_argument("--reference-spec",
                   help="score the simulation against this spec instead "
                        "(negative control)")
    p.add_argument("--t", required=True, help="single snapshot time")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--theta", help="optional mgf checks, comma list")
    p.add_argument("--z-threshold", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("route",
                       help="batch split that equalizes sub-queue loads")
    p.add_argument("--k", type=int, required=True, help="number of sub-queues")
    p.add_argument("--service", required=True,
                   choices=["exponential", "deterministic", "uniform",
                            "empirical"])
    p.add_argument("--mu", type=float, default=1.0,
                   help="rate for exponential service")
    p.add_argument("--duration", type=float, default=1.0,
                   help="length for deterministic service")
    p.add_argument("--high", type=float, default=1.0,
                   help="upper end for uniform service")
    p.add_argument("--samples-file",
                   help="whitespace separated draws for empirical service")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--reps", "--verify-reps", dest="verify_reps", type=int,
                   default=0,
                   help="replications for the simulated equalization check "
                        "(0 = skip)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=0)
    p.add_argument("--matrix-out", help="also write the mean matrix CSV here")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_route)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage and 0 on --help/--version
        if exc.code in (None, 0):
            return 0
        return 2
    args._argv = list(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SimConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
