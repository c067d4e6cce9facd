"""``asydim`` command line: generators, estimators, heat and spectral pipelines, checks.

Every subcommand accepts ``--config FILE`` (a JSON object whose keys mirror
the long flags, with dashes or underscores), ``--dry-run``, ``--seed`` and
``--threads``. Explicit flags override the config file.

Exit status: 0 on success (warnings go to ``<out>.log``), 2 on a
configuration or input error, 3 on a numerical or estimation failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import shlex
import sys
import warnings

import numpy as np

from . import io as aio
from .dimension import asymptotic_dim, kolmogorov_dim
from .discretization import (build_graph, build_net, read_edge_list, verify_net,
                             write_edge_list, write_net)
from .errors import (AsydimError, ConfigError, DiscretizationError, DomainError, EstimationError,
                     NumericalError, ResourceError)
from .fitting import LIMSUP, MODES, ScaleGrid, geometric_grid, parse_grid
from .heat import (SCHEMES, AveragingScheme, LaplacianModel, ProductLaplacianModel, heat_matrix,
                   roe_spectral_measure, roe_theta, semigroup_dim)
from .metric import (EXACT_LIMIT, MetricSpace, covering_number, exact_covering_number,
                     exact_packing_number, packing_number)
from .spaces import (davies_end, end_volume, flat_end, gen_lattice, gen_parabolic_region,
                     grid_graph, log_end_volume, oscillating_dim_gap, oscillating_end,
                     path_graph, cycle_graph)
from .spectral import (counting_function, eccentricity_test, novikov_shubin, power_exponent,
                       read_monotone, rearrangement, singular_trace, write_monotone,
                       GeneralizedLimitAt0)

log = logging.getLogger("asydim")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


# -- parser -------------------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="JSON file of flag values (flags override)")
    p.add_argument("--dry-run", action="store_true", help="validate and print the resolved run")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $ASYDIM_THREADS or 1)")
    p.add_argument("--out", help="output CSV (stdout when omitted)")


def _graph_source(p):
    p.add_argument("--graph", required=True, help="TSV edge list u<TAB>v<TAB>weight")
    p.add_argument("--power", type=int, default=1,
                   help="Cartesian power of the graph (2 gives the planar product surrogate)")
    p.add_argument("--base", default="center", help="basepoint index or 'center'")
    p.add_argument("--t", default="1..1e4:geometric:40", help="time grid")
    p.add_argument("--r", default="auto", help="radius grid for the exhaustion average")
    p.add_argument("--scheme", default="cesaro_log", choices=SCHEMES)
    p.add_argument("--conductance", default="unit", choices=("unit", "weight"))
    p.add_argument("--window", type=int, default=4)


def build_parser():
    parser = argparse.ArgumentParser(prog="asydim",
                                     description="Large-scale dimension and heat-trace invariants.")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("gen", help="generate model spaces and volume tables")
    _common(p)
    p.add_argument("kind", choices=("lattice", "region", "end", "graph"))
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--halfwidth", type=int, default=10)
    p.add_argument("--metric", default="sup", choices=("sup", "euclidean"))
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--x-max", type=float, default=100.0)
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--profile", default="davies", choices=("davies", "flat", "oscillating"))
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--D", type=float, default=2.0)
    p.add_argument("--r", default="1..1e6")
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--graph-kind", default="path", choices=("path", "cycle", "grid"))
    p.add_argument("--n", type=int, default=64)
    subs["gen"] = p

    p = sub.add_parser("dim", help="Kolmogorov / asymptotic dimension estimates")
    _common(p)
    p.add_argument("--input", required=True, help="points CSV, distance matrix CSV or edge TSV")
    p.add_argument("--metric", default="euclidean", choices=("euclidean", "sup", "matrix", "graph"))
    p.add_argument("--r", default="auto", help="inner radii")
    p.add_argument("--R", default="auto", help="outer radii")
    p.add_argument("--mode", default=LIMSUP, choices=MODES)
    p.add_argument("--method", default="covering", choices=("covering", "packing", "volume"))
    p.add_argument("--kind", default="asymptotic", choices=("asymptotic", "kolmogorov"))
    p.add_argument("--base", type=int, default=0)
    p.add_argument("--window", type=int, default=4)
    p.add_argument("--min-ratio", type=float, default=4.0)
    subs["dim"] = p

    p = sub.add_parser("heat", help="heat trace theta(t) by exhaustion averages")
    _common(p)
    _graph_source(p)
    subs["heat"] = p

    p = sub.add_parser("ns", help="Novikov-Shubin exponent by three routes")
    _common(p)
    _graph_source(p)
    subs["ns"] = p

    p = sub.add_parser("trace", help="rearrangement, power exponent, eccentricity, singular trace")
    _common(p)
    p.add_argument("action", choices=("rearrange", "alpha", "eccentric", "singular"))
    p.add_argument("--mu", help="monotone function CSV (mu_T for 'singular')")
    p.add_argument("--mu-a", help="numerator monotone function CSV for 'singular'")
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--window", type=int, default=4)
    subs["trace"] = p

    p = sub.add_parser("check", help="finite certificates of the structural inequalities")
    _common(p)
    p.add_argument("what", choices=("lemma111", "net", "heat"))
    p.add_argument("--input", help="points CSV (lemma111, net)")
    p.add_argument("--graph", help="edge TSV (heat)")
    p.add_argument("--metric", default="euclidean", choices=("euclidean", "sup"))
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--t", default="0.1,1,10")
    subs["check"] = p
    return parser, subs


def _config_defaults(argv, subs):
    """Load ``--config`` and push its keys into the chosen subparser's defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return None
    try:
        with open(known.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {known.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    cmd = next((a for a in argv if a in subs), cfg.get("command"))
    if cmd not in subs:
        raise ConfigError("config names no valid command")
    parser = subs[cmd]
    dests = {a.dest for a in parser._actions}
    defaults = {}
    for key, value in cfg.items():
        if key == "command":
            continue
        dest = key.replace("-", "_")
        if dest not in dests:
            raise ConfigError(f"unknown config key {key!r} for '{cmd}'")
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        defaults[dest] = value
    parser.set_defaults(**defaults)
    # positional arguments cannot take defaults from set_defaults alone
    positional = [a for a in parser._actions if not a.option_strings and a.dest in defaults]
    return cmd, positional, defaults


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("ASYDIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"ASYDIM_THREADS must be an integer, got {env!r}") from exc
    return 1


# -- output helpers -----------------------------------------------------------------

class _Run:
    """Output plumbing shared by the subcommands."""

    def __init__(self, args, argv):
        self.args = args
        self.command = "asydim " + " ".join(shlex.quote(a) for a in argv)
        self.warned = []

    def header(self, **extra):
        return aio.provenance_lines(self.command, self.args.seed, extra)

    def emit(self, columns, rows, path=None, **extra):
        path = path or self.args.out
        if path:
            aio.write_csv(path, columns, rows, self.header(**extra))
        else:
            import csv
            w = csv.writer(sys.stdout, lineterminator="\n")
            for line in self.header(**extra):
                sys.stdout.write(f"# {line}\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([c if isinstance(c, str) else ("" if c is None else aio.format_real(c))
                            for c in row])

    def sibling(self, suffix):
        if not self.args.out:
            return None
        root, ext = os.path.splitext(self.args.out)
        return f"{root}{suffix}{ext or '.csv'}"


def _dry(args, **resolved):
    print(json.dumps({"command": args.command, "dry_run": True,
                      **{k: _jsonable(v) for k, v in resolved.items()}}, indent=2, sort_keys=True))
    return EXIT_OK


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and math.isinf(v):
        return aio.INF_TOKEN
    return v


def _load_space(args):
    path = args.input
    if not os.path.exists(path):
        raise ConfigError(f"input {path} does not exist")
    if args.metric in ("euclidean", "sup"):
        return MetricSpace(aio.read_points(path), args.metric, basepoint=args.base)
    if args.metric == "matrix":
        return MetricSpace(matrix=aio.read_matrix(path), metric="matrix", basepoint=args.base)
    return read_edge_list(path).metric_space(basepoint=args.base)


def _nn_scale(space):
    """Median nearest-neighbour distance, the default inner radius."""
    m = min(space.size, 200)
    idx = np.linspace(0, space.size - 1, m).astype(int)
    nn = []
    for i in idx:
        d = space.distances_from(int(i))
        d = d[d > 0]
        if d.size:
            nn.append(d.min())
    return float(np.median(nn)) if nn else 1.0


def _resolve_dim_grid(args, space):
    r = np.array([_nn_scale(space)]) if args.r == "auto" else parse_grid(args.r)
    if args.R == "auto":
        ecc = space.eccentricity()
        lo = args.min_ratio * float(np.max(r))
        if ecc <= lo:
            raise EstimationError(f"space too small: eccentricity {ecc} below {lo}")
        R = geometric_grid(lo, ecc, 1.5)
    else:
        R = parse_grid(args.R)
    return ScaleGrid(r, R, args.window, args.min_ratio)


# -- subcommands --------------------------------------------------------------------

def cmd_gen(args, run):
    if args.kind == "lattice":
        n = (2 * args.halfwidth + 1) ** args.dim
        if args.dry_run:
            return _dry(args, kind="lattice", points=n, dim=args.dim, metric=args.metric)
        space = gen_lattice(args.dim, args.halfwidth, args.metric)
        cols = ["id"] + [f"c{i}" for i in range(args.dim)]
        run.emit(cols, ([i, *map(float, row)] for i, row in enumerate(space.coords)),
                 metric=args.metric, basepoint=space.basepoint)
    elif args.kind == "region":
        if args.dry_run:
            return _dry(args, kind="region", alpha=args.alpha, x_max=args.x_max)
        space = gen_parabolic_region(args.alpha, args.x_max, args.spacing)
        run.emit(["id", "c0", "c1"], ([i, *map(float, row)] for i, row in enumerate(space.coords)),
                 alpha=args.alpha)
    elif args.kind == "end":
        r = parse_grid(args.r)
        if args.dry_run:
            return _dry(args, kind="end", profile=args.profile, r=r)
        return _gen_end(args, run, r)
    else:
        if args.dry_run:
            return _dry(args, kind="graph", graph_kind=args.graph_kind, n=args.n, dim=args.dim)
        if args.graph_kind == "path":
            g = path_graph(args.n)
        elif args.graph_kind == "cycle":
            g = cycle_graph(args.n)
        else:
            g = grid_graph(*([args.n] * args.dim))
        if args.out:
            write_edge_list(g, args.out, run.header())
        else:
            for line in run.header():
                print(f"# {line}")
            print(f"# n={g.n}")
            for u, v, w in g.edges:
                print(f"{int(u)}\t{int(v)}\t{float(w)!r}")
    return EXIT_OK


def _gen_end(args, run, r):
    if args.profile == "oscillating":
        rep = oscillating_dim_gap(args.max_n)
        end = oscillating_end(args.max_n)
        rows = [(a, log_end_volume(end, a - 1.0), e) for a, e in rep.merged]
        run.emit(["R", "log_volume", "exponent"], rows, profile="oscillating",
                 max_n=args.max_n, limsup=aio.format_real(rep.limsup),
                 liminf=aio.format_real(rep.liminf))
        return EXIT_OK
    end = davies_end(args.D, args.N) if args.profile == "davies" else flat_end(args.N)
    run.emit(["r", "volume"], ((x, end_volume(end, x)) for x in r), profile=end.name, N=args.N)
    return EXIT_OK


def cmd_dim(args, run):
    space = _load_space(args)
    grid = _resolve_dim_grid(args, space)
    if args.dry_run:
        return _dry(args, points=space.size, r=grid.r_values, R=grid.R_values,
                    window=grid.window_size, mode=args.mode, method=args.method)
    if args.kind == "kolmogorov":
        est = kolmogorov_dim(space, grid, args.method)
    else:
        est = asymptotic_dim(space, grid, args.mode, args.method, workers=_threads(args))
    rows = []
    for (scale, count) in est.scale_table:
        rows.append([scale, count, None, None, None])
    for (lo, hi), slope in est.window_slopes:
        rows.append([None, None, lo, hi, slope])
    rows.append(["summary", est.mode, est.method, "value", est.value])
    run.emit(["scale", "count", "window_lo", "window_hi", "slope"], rows,
             kind=args.kind, r_used=est.diagnostics.get("r_used", ""))
    return EXIT_OK


def _heat_model(args):
    if not os.path.exists(args.graph):
        raise ConfigError(f"graph {args.graph} does not exist")
    g = read_edge_list(args.graph)
    if not g.connected:
        raise DomainError("heat pipelines need a connected graph")
    base_model = LaplacianModel(g, args.conductance)
    if args.power < 1:
        raise ConfigError("--power must be at least 1")
    model = base_model if args.power == 1 else ProductLaplacianModel(*[base_model] * args.power)
    if args.base == "center":
        d = base_model.distances(0)
        far = int(np.argmax(d))
        dfar = base_model.distances(far)
        c = int(np.argmin(np.maximum(dfar, base_model.distances(int(np.argmax(dfar))))))
        base = c if args.power == 1 else model.join([c] * args.power)
    else:
        base = int(args.base)
        if not 0 <= base < model.n:
            raise DomainError(f"basepoint {base} outside [0, {model.n})")
    r = "auto" if args.r == "auto" else parse_grid(args.r)
    return model, base, r


def _warn_saturated(tr):
    if np.any(tr.saturated):
        log.warning("%d of %d times lie past the saturation cutoff (t_sat %.6g)",
                    int(tr.saturated.sum()), tr.t.size, tr.t_sat)


def cmd_heat(args, run):
    t = parse_grid(args.t)
    if args.dry_run:
        return _dry(args, graph=args.graph, t=t, r=args.r, scheme=args.scheme, power=args.power)
    model, base, r = _heat_model(args)
    tr = roe_theta(model, t, base, r, AveragingScheme(args.scheme))
    _warn_saturated(tr)
    rows = zip(tr.t, tr.theta, tr.sup_pt, tr.saturated.astype(int))
    run.emit(["t", "theta", "sup_pt", "t_sat_flag"], rows, basepoint=base,
             t_sat=aio.format_real(tr.t_sat), scheme=args.scheme)
    return EXIT_OK


def cmd_ns(args, run):
    t = parse_grid(args.t)
    if args.dry_run:
        return _dry(args, graph=args.graph, t=t, r=args.r, scheme=args.scheme, power=args.power)
    model, base, r = _heat_model(args)
    tr = roe_theta(model, t, base, r, AveragingScheme(args.scheme))
    _warn_saturated(tr)
    theta = tr.as_function()
    if theta.args.size < args.window:
        raise EstimationError(f"only {theta.args.size} pre-saturation times; "
                              f"saturation time is {tr.t_sat:.4g}")
    meas = roe_spectral_measure(model, base, r, AveragingScheme(args.scheme))
    N = counting_function(meas)
    lam_grid = 1.0 / theta.args[::-1]
    rep = novikov_shubin(theta, N, lam_grid, args.window, inverse=True)
    ad = semigroup_dim(model, theta.args, args.window)
    theta_path = run.sibling("_theta")
    n_path = run.sibling("_N")
    run.emit(["t", "theta", "t_sat_flag"], zip(tr.t, tr.theta, tr.saturated.astype(int)),
             path=theta_path or None, table="theta")
    atoms = N.atoms_below(lam_grid)
    run.emit(["lambda", "N"], zip(atoms, N(atoms) - float(N(0.0))), path=n_path, table="N")
    rows = [("alpha0_theta", rep.alpha_theta), ("alpha0_N", rep.alpha_N),
            ("alpha0_inverse", rep.alpha_inverse), ("route_gap", rep.route_gap),
            ("semigroup_dim", ad.value), ("t_sat", tr.t_sat)]
    run.emit(["quantity", "value"], rows, basepoint=base, table="summary")
    return EXIT_OK


def cmd_trace(args, run):
    if not args.mu:
        raise ConfigError("--mu is required")
    for path in (args.mu, args.mu_a):
        if path and not os.path.exists(path):
            raise ConfigError(f"{path} does not exist")
    if args.dry_run:
        return _dry(args, action=args.action, mu=args.mu, mu_a=args.mu_a, fraction=args.fraction)
    mu = read_monotone(args.mu)
    if args.action == "rearrange":
        out = rearrangement(mu)
        write_monotone(out, args.out or sys.stdout, run.header())
        return EXIT_OK
    if args.action == "alpha":
        run.emit(["quantity", "value"], [("alpha", power_exponent(mu, args.window))])
    elif args.action == "eccentric":
        rep = eccentricity_test(mu, args.fraction)
        run.emit(["quantity", "value"], [("label", rep.label), ("branch", rep.branch),
                                         ("limit", rep.limit), ("tail_exponent", rep.tail_exponent)])
    else:
        if not args.mu_a:
            raise ConfigError("--mu-a is required for 'singular'")
        res = singular_trace(read_monotone(args.mu_a), mu, GeneralizedLimitAt0(fraction=args.fraction),
                             full=True)
        run.emit(["quantity", "value"], [("trace", res.value), ("branch", res.branch),
                                         ("shift_sensitivity", res.shift_sensitivity)])
    return EXIT_OK


def cmd_check(args, run):
    if args.what in ("lemma111", "net"):
        if not args.input or not os.path.exists(args.input):
            raise ConfigError("--input points CSV is required")
        if args.dry_run:
            return _dry(args, what=args.what, r=args.r, eps=args.eps, R=args.R)
        space = MetricSpace(aio.read_points(args.input), args.metric)
        if args.what == "lemma111":
            return _check_sandwich(space, args, run)
        net = build_net(space, args.eps, args.R)
        graph = build_graph(space, net)
        ok = verify_net(space, net)
        if args.out:
            write_net(net, run.sibling("_net"), run.header())
            write_edge_list(graph, run.sibling("_graph").replace(".csv", ".tsv"), run.header())
        run.emit(["quantity", "value"], [("centers", int(net.centers.size)),
                                         ("covering_radius", net.covering_radius),
                                         ("certified", int(ok)), ("edges", graph.num_edges),
                                         ("connected", int(graph.connected))])
        return EXIT_OK if ok else EXIT_NUMERIC
    if not args.graph or not os.path.exists(args.graph):
        raise ConfigError("--graph edge list is required")
    t = parse_grid(args.t)
    if args.dry_run:
        return _dry(args, what="heat", t=t)
    model = LaplacianModel(read_edge_list(args.graph))
    rows = []
    for ti in t:
        H = heat_matrix(model, ti)
        H2 = heat_matrix(model, 2 * ti)
        rows.append((ti, float(np.max(np.abs(H.sum(axis=1) - 1))),
                     float(np.max(np.abs(np.diag(H2) - (H * H).sum(axis=1)))),
                     float(np.max(np.abs(H - H.T))), float(H.min())))
    run.emit(["t", "mass_error", "semigroup_error", "asymmetry", "min_entry"], rows)
    return EXIT_OK


def _check_sandwich(space, args, run):
    r = args.r
    omega = np.arange(space.size)
    if space.size <= EXACT_LIMIT:
        n_r = exact_covering_number(space, omega, r)
        nu_r = exact_packing_number(space, omega, r)
        n_2r = exact_covering_number(space, omega, 2 * r)
        how = "exact"
    else:
        n_r = covering_number(space, omega, r).count
        nu_r = packing_number(space, omega, r).count
        n_2r = covering_number(space, omega, 2 * r).lower_bound
        how = "greedy bounds"
    holds = n_r >= nu_r >= n_2r
    run.emit(["quantity", "value"], [("n_r", n_r), ("nu_r", nu_r), ("n_2r", n_2r),
                                     ("holds", int(holds)), ("method", how)], r=r)
    print(f"n_r={n_r} >= nu_r={nu_r} >= n_2r={n_2r}: {'holds' if holds else 'VIOLATED'}",
          file=sys.stderr)
    return EXIT_OK if holds else EXIT_NUMERIC


COMMANDS = {"gen": cmd_gen, "dim": cmd_dim, "heat": cmd_heat, "ns": cmd_ns,
            "trace": cmd_trace, "check": cmd_check}


def _setup_logging(args):
    """Send warnings to ``<out>.log`` when writing to a file, else to stderr."""
    logging.captureWarnings(True)
    root = logging.getLogger()
    for h in list(root.handlers):
        if getattr(h, "_asydim", False):
            root.removeHandler(h)
    handler = (logging.FileHandler(args.out + ".log", mode="w", encoding="utf-8", delay=True)
               if args.out else logging.StreamHandler(sys.stderr))
    handler._asydim = True
    handler.setLevel(logging.WARNING)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    return handler


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        resolved = _config_defaults(argv, subs)
        if resolved:
            cmd, positional, defaults = resolved
            if cmd not in argv:
                argv = [cmd] + argv
            # a positional given only in the config goes right after the command
            for action in positional:
                i = argv.index(cmd)
                rest = [a for a in argv[i + 1:] if not a.startswith("-")]
                if not any(a in (action.choices or ()) for a in rest):
                    argv.insert(i + 1, str(defaults[action.dest]))
    except ConfigError as exc:
        print(f"asydim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    args = parser.parse_args(argv)
    handler = _setup_logging(args)
    run = _Run(args, argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return COMMANDS[args.command](args, run)
    except (ConfigError, DomainError, FileNotFoundError) as exc:
        print(f"asydim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, EstimationError, DiscretizationError, ResourceError) as exc:
        print(f"asydim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except AsydimError as exc:
        print(f"asydim: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    finally:
        logging.getLogger().removeHandler(handler)
        handler.close()


if __name__ == "__main__":
    sys.exit(main())
