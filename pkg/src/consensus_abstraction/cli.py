"""Command-line front end.

Exit codes: 0 success or certified, 2 uncertified best-effort result,
1 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import __version__, generators
from .abstraction import (
    AbstractionError,
    PartitionedNetwork,
    abstract,
    abstract_parallel,
    abstract_until,
    abstraction_report,
    check_epsilon,
    partition_report,
    sampling_distribution,
)
from .bounds import h2_error_report, output_error_bound
from .graph import GraphError, laplacian, read_edgelist, write_edgelist
from .measures import MeasureError, catalog, normalized_index, parse_measure, relative_loss, view
from .reporting import dumps
from .simulate import SimulationError, simulate_first_order, simulate_pair_error, simulate_second_order, write_csv
from .sparsity_demo import RegularizationInstance, demo_report, format_demo
from .spectral import SpectralError, loewner_epsilon

EXIT_OK, EXIT_ERROR, EXIT_UNCERTIFIED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# -- helpers -----------------------------------------------------------------


def _emit(text: str, out):
    if out and out != "-":
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path):
    g, _ = read_edgelist(path)
    return g


def _resolve_measures(names, reference):
    if not names or names == ["all"]:
        return catalog(reference)
    out = []
    for name in names:
        if name == "all":
            out.extend(catalog(reference))
        else:
            out.append(parse_measure(name, reference))
    return out


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(x, ".17g") if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _config(args) -> dict:
    # thread count and output destination never change results
    skip = {"func", "threads", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# -- commands ----------------------------------------------------------------


def cmd_generate(args) -> int:
    kind = args.kind
    if kind == "complete":
        g = generators.complete(args.n, args.w)
    elif kind == "path":
        g = generators.path(args.n, args.w)
    elif kind == "cycle":
        g = generators.cycle(args.n, args.w)
    elif kind == "star":
        g = generators.star(args.n, args.w)
    elif kind == "ring":
        g = generators.ring_lattice(args.n, args.k, args.w)
    elif kind == "gnm":
        g = generators.gnm_random(args.n, args.m, args.seed)
    elif kind == "two-cut":
        g = generators.two_component_cut(args.half, args.links, args.seed)
    elif kind == "exp-decay":
        g = generators.exp_decay(args.n, args.c, args.gamma)
    elif kind == "proximity":
        g = generators.proximity(args.n, args.side, args.radius, args.seed)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown kind {kind}")
    comment = f"generated by consensus-abstraction: {kind} seed={args.seed}"
    if args.out and args.out != "-":
        write_edgelist(g, args.out, comment)
    else:
        from .graph import format_edgelist

        sys.stdout.write(format_edgelist(g, comment))
    print(f"n={g.n} m={g.m} seed={args.seed}", file=sys.stderr)
    return EXIT_OK


def cmd_measure(args) -> int:
    g = _load(args.input)
    v = view(g)
    v.spec.require_connected()
    descs = _resolve_measures(args.measures, v)
    rows = []
    for d in descs:
        rows.append(
            {
                "name": d.name,
                "value": d(v),
                "order": d.order(v.n),
                "normalized": normalized_index(d, v),
            }
        )
    if args.format == "csv":
        text = _csv_text(["name", "value", "order", "normalized"], [list(r.values()) for r in rows])
    else:
        text = dumps({"n": g.n, "m": g.m, "measures": rows})
    _emit(text, args.out)
    return EXIT_OK


def cmd_abstract(args) -> int:
    g = _load(args.input)
    view(g).spec.require_connected()
    measures = _resolve_measures(args.measures, g)
    if args.epsilon is not None:
        check_epsilon(g.n, args.epsilon)
        res = abstract_until(
            g,
            args.epsilon,
            args.seed,
            args.retries,
            C=args.C,
            d=args.d,
            budget=args.budget,
            threads=args.threads,
            measures=measures,
        )
        certified = bool(res.certified)
    else:
        res = abstract(g, args.d, args.seed, budget=args.budget, measures=measures)
        certified = res.epsilon_certified < 1
    h2 = None
    if view(res.graph_s).connected:
        h2 = h2_error_report(g, res.graph_s, res.epsilon_certified).to_dict()
    report = abstraction_report(g, res, h2_error=h2, config=_config(args))
    report["certified"] = certified
    if args.abstract_out:
        write_edgelist(
            res.graph_s,
            args.abstract_out,
            f"abstraction eps*={res.epsilon_certified:.17g} seed={args.seed}",
        )
    if args.pi_csv:
        pi = sampling_distribution(g)
        rows = [[int(i), int(j), float(p)] for (i, j, _), p in zip(g.edges(), pi)]
        with open(args.pi_csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(_csv_text(["i", "j", "pi"], rows))
    if args.format == "csv":
        text = _csv_text(
            ["name", "order_alpha", "value_original", "value_abstract", "relative_loss"],
            [list(r.values()) for r in report["measures"]],
        )
    else:
        text = dumps(report)
    _emit(text, args.out)
    return EXIT_OK if certified else EXIT_UNCERTIFIED


def cmd_verify(args) -> int:
    g = _load(args.original)
    gs = _load(args.abstract)
    if g.n != gs.n:
        raise UsageError("graphs have different node counts")
    view(g).spec.require_connected()
    eps = loewner_epsilon(g, laplacian(gs))
    descs = _resolve_measures(args.measures, g)
    vs = view(gs)
    rows = []
    for d in descs:
        rows.append(
            {
                "name": d.name,
                "order_alpha": d.order(g.n),
                "value_original": d(g),
                "value_abstract": d(vs) if vs.connected else math.inf,
                "relative_loss": relative_loss(d, g, vs),
            }
        )
    report = {
        "n": g.n,
        "m_original": g.m,
        "m_abstract": gs.m,
        "subset": gs.edge_set() <= g.edge_set(),
        "epsilon_certified": eps,
        "measures": rows,
        "losses_within_epsilon": all(r["relative_loss"] <= eps + 1e-9 for r in rows),
        "weight_total_original": g.total_weight(),
        "weight_total_abstract": gs.total_weight(),
    }
    if vs.connected:
        h2 = h2_error_report(g, gs, eps)
        report["h2_error"] = h2.to_dict()
        report["bound_chain_holds"] = h2.chain_holds()
    if args.format == "csv":
        text = _csv_text(list(rows[0]), [list(r.values()) for r in rows]) if rows else ""
    else:
        text = dumps(report)
    _emit(text, args.out)
    return EXIT_OK


def cmd_partition_abstract(args) -> int:
    base = _load(args.base)
    parts = tuple(_load(p) for p in args.parts)
    net = PartitionedNetwork(base, parts)
    res = abstract_parallel(
        net, args.epsilon, args.seed, threads=args.threads, max_retries=args.retries, C=args.C
    )
    report = partition_report(res)
    report["config"] = _config(args)
    if args.abstract_out:
        write_edgelist(res.graph_s, args.abstract_out, f"partitioned abstraction seed={args.seed}")
    _emit(dumps(report), args.out)
    return EXIT_OK if report["certified"] else EXIT_UNCERTIFIED


def cmd_simulate(args) -> int:
    g = _load(args.input)
    kw = dict(dt=args.dt, t_total=args.t_total, t_burn=args.t_burn, trials=args.trials, seed=args.seed, threads=args.threads)
    extra = {}
    if args.abstract:
        gs = _load(args.abstract)
        stats = simulate_pair_error(laplacian(g), laplacian(gs), **kw)
        eps = loewner_epsilon(g, laplacian(gs))
        extra = {"epsilon_certified": eps, "output_error_bound": output_error_bound(g, eps) if eps < 1 else None}
        if view(gs).connected:
            from .bounds import h2_error_exact

            extra["output_error_exact"] = h2_error_exact(g, gs) ** 2
    elif args.order == 2:
        stats = simulate_second_order(g, args.beta, **kw)
    else:
        stats = simulate_first_order(g, noise=not args.no_noise, x0=_x0(g.n, args) if args.no_noise else None, **kw)
    if args.csv_out:
        write_csv(stats, args.csv_out)
    if args.format == "csv":
        buf = io.StringIO()
        names = list(stats.per_trial)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", *names])
        for k in range(stats.trials):
            w.writerow([k, *(format(float(stats.per_trial[c][k]), ".17g") for c in names)])
        text = buf.getvalue()
    else:
        out = stats.to_dict()
        out["seed"] = args.seed
        out.update(extra)
        out["config"] = _config(args)
        text = dumps(out)
    _emit(text, args.out)
    return EXIT_OK


def _x0(n, args):
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 1 << 20]))
    return rng.standard_normal(n)


def cmd_demo_l1(args) -> int:
    inst = RegularizationInstance(args.n, args.w0, args.gamma)
    report = demo_report(inst)
    text = dumps(report) if args.format == "json" else format_demo(report) + "\n"
    _emit(text, args.out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for trials and parts")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = _Parser(prog="consensus-abstraction", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("generate", parents=[common], help="write a graph family as an edge list")
    s.add_argument("kind", choices=("complete", "path", "cycle", "star", "ring", "gnm", "two-cut", "exp-decay", "proximity"))
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--m", type=int, default=20)
    s.add_argument("--w", type=float, default=1.0)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--half", type=int, default=20)
    s.add_argument("--links", type=int, default=100)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--gamma", type=float, default=0.05)
    s.add_argument("--side", type=float, default=30.0)
    s.add_argument("--radius", type=float, default=10.0)
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("measure", parents=[common], help="evaluate performance measures")
    s.add_argument("input")
    s.add_argument("--measures", nargs="+", default=["all"])
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("abstract", parents=[common], help="sparsify a network and certify it")
    s.add_argument("input")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--d", type=float)
    s.add_argument("--C", type=float, default=18.0, help="constant in d = C eps^-2 ln n")
    s.add_argument("--retries", type=int, default=20)
    s.add_argument("--budget", choices=("samples", "links"), default="samples",
                   help="d n / 2 counts draws (samples) or expected distinct links (links)")
    s.add_argument("--measures", nargs="+", default=["all"])
    s.add_argument("--abstract-out", help="edge-list path for the abstraction")
    s.add_argument("--pi-csv", help="write the sampling distribution as CSV")
    s.set_defaults(func=cmd_abstract)

    s = sub.add_parser("verify", parents=[common], help="certify a given abstraction")
    s.add_argument("original")
    s.add_argument("abstract")
    s.add_argument("--measures", nargs="+", default=["all"])
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("partition-abstract", parents=[common], help="sparsify parts over a fixed base")
    s.add_argument("--base", required=True)
    s.add_argument("--parts", nargs="+", required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--C", type=float, default=18.0)
    s.add_argument("--retries", type=int, default=20)
    s.add_argument("--abstract-out")
    s.set_defaults(func=cmd_partition_abstract)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo simulation")
    s.add_argument("input")
    s.add_argument("--abstract", help="second network for the paired output error")
    s.add_argument("--order", type=int, choices=(1, 2), default=1)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--dt", type=float)
    s.add_argument("--t-total", type=float)
    s.add_argument("--t-burn", type=float)
    s.add_argument("--trials", type=int, default=8)
    s.add_argument("--no-noise", action="store_true", help="noise-free run from a random start")
    s.add_argument("--csv-out", help="per-trial estimates as CSV")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("demo-l1", parents=[common], help="l1 versus l0 sparsification example")
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--w0", type=float, default=1.0)
    s.add_argument("--gamma", type=float, default=2.0)
    s.set_defaults(func=cmd_demo_l1, format="text")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "abstract" and args.epsilon is None and args.d is None:
        parser.error("abstract needs --epsilon or --d")
    try:
        return args.func(args)
    except (GraphError, MeasureError, AbstractionError, SimulationError, SpectralError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
