#!/usr/bin/env python3

import argparse
import json
import logging
import math
import sys
import warnings

from walktrace import experiment_tools
from walktrace.expander_tools import hks_audit, is_rc_expander, pseudorandom_audit, trace_expansion_audit
from walktrace.graph_tools import CompleteGraph
from walktrace.metadata import AuditReport, EnumerationBudgetError, PropertyCheck
from walktrace.mixing_tools import buffer_bound, empirical_mixing_time, js_reference, sampled_phi, stationary_distribution
from walktrace.random_models import SeedStream
from walktrace.walk_tools import Walk, default_length, run_walk, trace_view

EXPERIMENTS = ("simulate", "hitting", "pipeline")


def _add_config_flags(parser):
    parser.add_argument("--config", type=str, help="flat key=value config file")
    parser.add_argument("--model", type=str, choices=["complete", "gnp"], help="base graph model")
    parser.add_argument("--n", type=int, help="number of vertices")
    parser.add_argument("--p", type=float, help="edge probability of G(n,p)")
    parser.add_argument("--alpha", type=float, help="G(n,p) with p = alpha ln n / n")
    parser.add_argument("--epsilon", type=float, help="walk length (1+epsilon) n ln n; adaptive when absent")
    parser.add_argument("--k", type=int, help="cover multiplicity")
    parser.add_argument("--laziness", type=str, choices=["none", "half", "inverse-n"], help="stay probability of the walk")
    parser.add_argument("--runs", type=int, help="number of runs")
    parser.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    parser.add_argument("--out", type=str, help="JSONL output, resumed when it exists")
    parser.add_argument("--workers", type=int, help="parallel worker processes")
    parser.add_argument("--delta0", type=float, help="SMALL threshold coefficient")
    parser.add_argument("--rho", type=float, help="visit-count coefficient")
    parser.add_argument("--samples", type=int, help="sampled sets per audit")
    parser.add_argument("--audits", type=str, help="comma-separated subset of pseudorandom,trace_expansion,mixing")
    parser.add_argument("--kappa-target", type=int, dest="kappa_target", help="also test the trace for this vertex connectivity")
    parser.add_argument("--record-stays", action="store_true", dest="record_stays", help="lazy stays enter the trace as loops")
    parser.add_argument("--verbose", action="store_true", help="log progress")


def _parser():
    # use argument_default=argparse.SUPPRESS so that only the given flags override the config
    parser = argparse.ArgumentParser(
        prog="walktrace",
        description="Random walk traces: hitting times, pipeline audits, mixing",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        argument_default=argparse.SUPPRESS,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _add_config_flags(sub.add_parser(name, help=f"{name} experiment", argument_default=argparse.SUPPRESS))

    audit = sub.add_parser("audit", help="expansion audits of a base graph and of a walk trace on it", argument_default=argparse.SUPPRESS)
    _add_config_flags(audit)
    audit.add_argument("--graph", type=str, help="graph file or model spec (gnp:n=1000,p=0.05, complete:n=300); default from --model/--n")
    audit.add_argument("--walk", type=str, help="replay file of a saved walk; its trace is audited and its base graph is the default")
    audit.add_argument("--properties", type=str, help="comma-separated subset of p1..p6, e1, e2, q1q2, rc (default p1..p6,e1,e2)")
    audit.add_argument("--hks-d", type=float, dest="hks_d", help="d of the HKS criterion q1q2 (range not enforced, default 12)")
    audit.add_argument("--beta", type=float, help="E1 threshold; without it E1 passes on a positive ratio")
    audit.add_argument("--radius", type=int, help="R of the rc certificate (default n // 4)")
    audit.add_argument("--c", type=float, help="expansion factor of the rc certificate (default 2)")

    mix = sub.add_parser("mix", help="empirical mixing time of the half-lazy walk", argument_default=argparse.SUPPRESS)
    _add_config_flags(mix)
    mix.add_argument("--graph", type=str, help="graph file or model spec; default from --model/--n")
    mix.add_argument("--xi", type=float, help="target distance, default 1/n")

    summarize = sub.add_parser("summarize", help="summary table of a JSONL record file", argument_default=argparse.SUPPRESS)
    summarize.add_argument("records", type=str, help="JSONL record file")
    summarize.add_argument("--csv", type=str, help="write the summary as CSV")
    summarize.add_argument("--latex", action="store_true", help="print a LaTeX table")
    return parser


def _pick(report, source, names, prefix):
    for name in names:
        report.checks[prefix + name] = source[name]


def _alpha(G, cfg):
    n = G.n
    if cfg.alpha is not None:
        return cfg.alpha
    if cfg.p is not None:
        return cfg.p * n / math.log(n)
    # edge density of the simple graph
    return len(G.pairs()) / (n * (n - 1) / 2) * n / math.log(n)


def _audit(cfg, graph=None, walk=None, properties="p1..p6,e1,e2", hks_d=None, beta=None, radius=None, c=2.0):
    s = SeedStream(cfg.seed, 0)
    wanted = experiment_tools.parse_properties(properties)
    if hks_d is not None and "q1q2" not in wanted:
        wanted.append("q1q2")
    w = Walk.load(walk) if walk is not None else None
    if graph is not None:
        G = experiment_tools.graph_from_spec(graph, s)
    elif w is not None:
        G = w.base
    else:
        G = experiment_tools.build_model(cfg, s)
    n = G.n
    report = AuditReport()

    base = [p.upper() for p in wanted if p.startswith("p")]
    if base and not isinstance(G, CompleteGraph):
        _pick(report, pseudorandom_audit(G, _alpha(G, cfg), cfg.samples, s.child("audit", "pseudorandom")), base, "base.")
    if "rc" in wanted:
        R = n // 4 if radius is None else radius
        try:
            cert = is_rc_expander(G, R, c)
        except EnumerationBudgetError:
            warnings.warn(f"Exact ({R},{c})-certification on {n} vertices is too large, sampling {cfg.samples} sets instead.")
            cert = is_rc_expander(G, R, c, "sampled", cfg.samples, s.child("audit", "rc"))
        report.add(PropertyCheck("base.rc", cert.passed, cert.exact, None, None, cert.witness, cert.sets_checked, f"R = {R}, c = {c}"))

    if {"e1", "e2", "q1q2"} & set(wanted):
        if w is None:
            length = default_length(n, 0.2 if cfg.epsilon is None else cfg.epsilon)
            w = run_walk(G, experiment_tools.start_vertex(G, s), length, cfg.laziness, s, cfg.record_stays)
        T = trace_view(w)
        traced = [p.upper() for p in wanted if p in ("e1", "e2")]
        if traced:
            _pick(report, trace_expansion_audit(T, beta, cfg.samples, s.child("audit", "trace")), traced, "trace.")
        if "q1q2" in wanted:
            d = 12.0 if hks_d is None else hks_d
            report.merge(hks_audit(T, d, cfg.samples, s.child("audit", "hks"), enforce_range=False), "hks.")
    print(json.dumps({"passed": report.passed, "failed": report.failed(), "checks": report.to_dict()}, default=str, indent=1))


def _mix(cfg, graph=None, xi=None):
    s = SeedStream(cfg.seed, 0)
    G = experiment_tools.graph_from_spec(graph, s) if graph is not None else experiment_tools.build_model(cfg, s)
    if isinstance(G, CompleteGraph):
        G = G.to_multigraph()
    n = G.n
    xi = 1 / n if xi is None else xi
    result = empirical_mixing_time(G, xi, s.child("mixing"))
    phi, _ = sampled_phi(G, cfg.samples, s.child("phi"))
    pi_min = float(stationary_distribution(G)[1:].min())
    print(f"mixing steps tau({xi:.3g}) = {result.steps} ({result.regime}, {result.starts} starts)")
    print(f"reference 3601 ln n = {buffer_bound(n):.1f}, 1800 ln(2n/xi) = {js_reference(n, xi):.1f}")
    print(f"js_bound inputs: sampled conductance upper bound = {phi:.4f}, pi_min = {pi_min:.4g}")
    print(f"TV non-increasing along the trajectory: {result.monotone}")


def _summarize(records, csv=None, latex=False):
    summary = experiment_tools.summarize(experiment_tools.read_records(records))
    for quantity, statistic, value in summary.rows():
        print(f"{quantity:>24s}  {statistic:>10s}  {value}")
    if csv is not None:
        summary.to_csv(csv)
    if latex:
        print(summary.to_latex())


def walktrace(argv=None) -> int:
    kwargs = vars(_parser().parse_args(argv))
    command = kwargs.pop("command")
    logging.basicConfig(level=logging.INFO if kwargs.pop("verbose", False) else logging.WARNING)
    try:
        if command == "summarize":
            _summarize(**kwargs)
            return 0
        extra = {key: kwargs.pop(key) for key in ("graph", "walk", "properties", "hks_d", "beta", "radius", "c", "xi") if key in kwargs}
        if "audits" in kwargs:
            kwargs["audits"] = [a.strip() for a in kwargs["audits"].split(",") if a.strip()]
        if "laziness" in kwargs:
            kwargs["laziness"] = kwargs["laziness"].replace("-", "_")
        path = kwargs.pop("config", None)
        cfg = experiment_tools.load_config(path, command=command, **kwargs)
        if command == "audit":
            _audit(cfg, **extra)
        elif command == "mix":
            _mix(cfg, **extra)
        else:
            count = 0
            for record in experiment_tools.run_experiment(cfg):
                count += 1
                if cfg.out is None:
                    print(record.to_json())
            if cfg.out is not None:
                print(f"{count} run(s) written to {cfg.out}")
    except ValueError as err:
        print(f"walktrace: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"walktrace: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(walktrace())
