import csv
import logging
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Iterable, Iterator, List, Optional

import numpy as np
from dotenv import dotenv_values
from pylatexenc.latexencode import unicode_to_latex
from scipy import stats

from walktrace import metadata
from walktrace.expander_tools import pseudorandom_audit, trace_expansion_audit
from walktrace.graph_tools import CompleteGraph, Graph, read_graph
from walktrace.hamilton_tools import is_hamiltonian
from walktrace.mixing_tools import buffer_bound, empirical_mixing_time
from walktrace.pipeline_tools import pipeline_params, run_pipeline
from walktrace.random_models import SeedStream, complete_graph, sample_gnp, sample_gnp_alpha
from walktrace.structure_tools import is_connected, is_k_connected
from walktrace.walk_tools import Walk, default_length, hitting_times, k_cover_time, min_degree_times, run_walk, trace_view

logger = logging.getLogger(__name__)

KINDS = ("hitting", "simulate", "pipeline")
AUDITS = ("pseudorandom", "trace_expansion", "mixing")
PROPERTIES = ("p1", "p2", "p3", "p4", "p5", "p6", "e1", "e2", "q1q2", "rc")
_INTS = ("n", "k", "runs", "seed", "workers", "samples", "kappa_target")
_FLOATS = ("p", "alpha", "epsilon", "delta0", "rho")


def _convert(key: str, text: Optional[str]) -> Any:
    if text is None or text.strip() == "" or text.strip().lower() == "none":
        return None
    text = text.strip()
    try:
        if key == "audits":
            return [a.strip() for a in text.split(",") if a.strip()]
        if key == "record_stays":
            if text.lower() not in ("true", "false", "1", "0"):
                raise ValueError(text)
            return text.lower() in ("true", "1")
        if key in _INTS:
            return int(text)
        if key in _FLOATS:
            return float(text)
    except ValueError:
        raise metadata.ConfigError(f"Cannot read config value {key} = '{text}'.")
    return text


def load_config(path: Optional[str] = None, **overrides) -> metadata.ExperimentConfig:
    """load_config defaults, then a flat key=value file, then keyword overrides (None values are ignored)

    Parameters
    ----------
    path : str, optional
        config file read with python-dotenv
    **overrides
        values that take precedence over the file, typically CLI flags

    Returns
    -------
    ExperimentConfig
        validated configuration
    """
    known = {f.name for f in fields(metadata.ExperimentConfig)}
    values = {}
    if path is not None:
        if not os.path.exists(path):
            raise metadata.ConfigError(f"Config file {path} does not exist.")
        for key, text in dotenv_values(path).items():
            key = key.lower()
            if key not in known:
                raise metadata.ConfigError(f"Unknown config key '{key}' in {path}.")
            values[key] = _convert(key, text)
    for key, value in overrides.items():
        if key not in known:
            raise metadata.ConfigError(f"Unknown config key '{key}'.")
        if value is not None:
            values[key] = value
    values = {k: v for k, v in values.items() if v is not None or k in ("p", "alpha", "epsilon", "out", "kappa_target", "record_stays")}
    cfg = metadata.ExperimentConfig(**values)
    unknown = [a for a in cfg.audits if a not in AUDITS]
    if unknown:
        raise metadata.ConfigError(f"Unknown audits {unknown}, expected a subset of {list(AUDITS)}.")
    return cfg


def build_model(cfg: metadata.ExperimentConfig, s: SeedStream) -> Graph:
    if cfg.model == "complete":
        return complete_graph(cfg.n)
    if cfg.p is not None:
        return sample_gnp(cfg.n, cfg.p, s.child("model"))
    return sample_gnp_alpha(cfg.n, cfg.alpha, s.child("model"))


def graph_from_spec(spec: str, s: SeedStream) -> Graph:
    """A graph file (see write_graph) or a model spec such as ``gnp:n=1000,p=0.05``, ``gnp:n=1000,alpha=8`` or ``complete:n=300``."""
    if os.path.exists(spec):
        return read_graph(spec)
    model, _, rest = spec.partition(":")
    model = model.strip()
    if model not in ("complete", "gnp"):
        raise metadata.ConfigError(f"Graph '{spec}' is neither a file nor a model spec like gnp:n=100,p=0.1.")
    values = {}
    for item in rest.split(","):
        if not item.strip():
            continue
        key, sep, text = item.partition("=")
        key = key.strip()
        if not sep or key not in ("n", "p", "alpha"):
            raise metadata.ConfigError(f"Cannot read '{item}' in graph spec '{spec}', expected n=, p= or alpha=.")
        values[key] = _convert(key, text)
    return build_model(load_config(model=model, **values), s)


def parse_properties(text: str) -> List[str]:
    """Comma-separated audit names; ``p1..p6`` stands for all six pseudo-randomness properties."""
    wanted = []
    for token in text.split(","):
        token = token.strip().lower()
        if not token:
            continue
        if token == "p1..p6":
            wanted += [f"p{i}" for i in range(1, 7)]
        elif token in PROPERTIES:
            wanted.append(token)
        else:
            raise metadata.ConfigError(f"Unknown property '{token}', expected a subset of p1..p6, e1, e2, q1q2, rc.")
    return list(dict.fromkeys(wanted))


def start_vertex(G: Graph, s: SeedStream) -> int:
    rng = s.child("start").generator()
    if isinstance(G, CompleteGraph):
        return int(rng.integers(1, G.n + 1))
    movable = np.flatnonzero(G.degree_array()[1:] > 0) + 1
    if len(movable) == 0:
        raise ValueError(f"The sampled graph on {G.n} vertices has no edges; the walk cannot move.")
    return int(rng.choice(movable))


def _length_cap(n: int) -> int:
    return max(n, math.ceil(10 * n * math.log(max(n, 2))))


def adaptive_walk(G: Graph, cfg: metadata.ExperimentConfig, s: SeedStream, min_length: int = 0) -> Walk:
    """Walk extended in blocks of n steps until the k-cover and the 2k-th minimum degree resolve, or 10 n ln n."""
    n, k = G.n, cfg.k
    cap = _length_cap(n)
    w = run_walk(G, start_vertex(G, s), min(cap, max(n, min_length)), cfg.laziness, s, cfg.record_stays)
    while w.length < cap:
        tau = k_cover_time(w, k)
        degree_ok = n <= 2 * k or min_degree_times(w, 2 * k)[-1] is not None
        if tau is not None and tau + 1 <= w.length and degree_ok:
            break
        w = w.extend(min(n, cap - w.length), s)
    return w


def _resolved(record: metadata.HittingRecord) -> bool:
    n = record.n
    wanted = [record.tau_C(record.K)] + [t for m, t in enumerate(record.connectivity, 1) if n > m]
    if n >= 3:
        wanted.append(record.tau_H)
    if n % 2 == 0:
        wanted.append(record.tau_PM)
    return all(t is not None for t in wanted)


def _hitting_run(G: Graph, cfg: metadata.ExperimentConfig, s: SeedStream):
    if cfg.epsilon is not None:
        w = run_walk(G, start_vertex(G, s), default_length(G.n, cfg.epsilon), cfg.laziness, s, cfg.record_stays)
        record = hitting_times(w, cfg.k, s.child("hitting"))
    else:
        w = adaptive_walk(G, cfg, s)
        record = hitting_times(w, cfg.k, s.child("hitting"))
        cap = _length_cap(G.n)
        while not _resolved(record) and w.length < cap:
            w = w.extend(min(G.n, cap - w.length), s)
            record = hitting_times(w, cfg.k, s.child("hitting"))
    audits = {"violations": record.violations(), "length": w.length, "tau_H_exact": record.tau_H_exact}
    return record.to_dict(), audits


def _simulate_run(G: Graph, cfg: metadata.ExperimentConfig, s: SeedStream):
    epsilon = 0.2 if cfg.epsilon is None else cfg.epsilon
    w = run_walk(G, start_vertex(G, s), default_length(G.n, epsilon), cfg.laziness, s, cfg.record_stays)
    trace = trace_view(w)
    verdict = is_hamiltonian(trace, s.child("hamilton"))
    hitting = {
        "length": w.length,
        "cover": [k_cover_time(w, j) for j in range(1, cfg.k + 1)],
        "max_multiplicity": trace.max_multiplicity,
    }
    audits = {"connected": is_connected(trace), "hamiltonian": verdict.hamiltonian, "hamiltonian_exact": verdict.exact}
    if cfg.kappa_target is not None:
        audits[f"kappa_at_least_{cfg.kappa_target}"] = is_k_connected(trace, cfg.kappa_target)
    n = G.n
    if "pseudorandom" in cfg.audits and not isinstance(G, CompleteGraph):
        alpha = cfg.alpha if cfg.alpha is not None else cfg.p * n / math.log(n)
        audits["pseudorandom"] = pseudorandom_audit(G, alpha, cfg.samples, s.child("audit", "pseudorandom")).to_dict()
    if "trace_expansion" in cfg.audits:
        audits["trace_expansion"] = trace_expansion_audit(trace, None, cfg.samples, s.child("audit", "trace")).to_dict()
    if "mixing" in cfg.audits:
        mix = empirical_mixing_time(G if not isinstance(G, CompleteGraph) else G.to_multigraph(), 1 / n, s.child("audit", "mixing"))
        audits["mixing"] = {"steps": mix.steps, "reference": buffer_bound(n), "monotone": mix.monotone, "regime": mix.regime}
    return hitting, audits


def _pipeline_run(G: Graph, cfg: metadata.ExperimentConfig, s: SeedStream):
    if not isinstance(G, CompleteGraph):
        raise metadata.ConfigError("The pipeline runs on the complete graph only.")
    params = pipeline_params(G.n, cfg.k, cfg.delta0, cfg.rho)
    w = adaptive_walk(G, cfg, s, params.t_plus)
    report = run_pipeline(w, params, s.child("pipeline"), cfg.samples)
    hitting = {"length": w.length, "cover": [k_cover_time(w, j) for j in range(1, cfg.k + 1)], "params": vars(params)}
    audits = report.to_dict()
    audits["passed"] = report.passed
    return hitting, audits


def run_one(cfg: metadata.ExperimentConfig, run_index: int) -> metadata.RunRecord:
    """One run, a pure function of (cfg, run_index)."""
    t0 = time.perf_counter()
    s = SeedStream(cfg.seed, run_index)
    G = build_model(cfg, s)
    if cfg.command == "pipeline":
        hitting, audits = _pipeline_run(G, cfg, s)
    elif cfg.command == "simulate":
        hitting, audits = _simulate_run(G, cfg, s)
    else:
        hitting, audits = _hitting_run(G, cfg, s)
    elapsed = time.perf_counter() - t0
    return metadata.RunRecord(run_index, cfg.seed, cfg.command, cfg.to_dict(), hitting, audits, elapsed)


def _run_one_from_dict(cfg: Dict[str, Any], run_index: int) -> str:
    return run_one(metadata.ExperimentConfig(**cfg), run_index).to_json()


def read_records(path: str) -> List[metadata.RunRecord]:
    with open(path, "r") as f:
        return [metadata.RunRecord.from_json(line) for line in f if line.strip()]


def run_experiment(cfg: metadata.ExperimentConfig) -> Iterator[metadata.RunRecord]:
    """run_experiment every run index of cfg, in parallel when cfg.workers > 1

    Records go through a single sink: each line is flushed to cfg.out as soon
    as its run completes, so an interrupted experiment keeps its output. Run
    indices already present in cfg.out are skipped.

    Parameters
    ----------
    cfg : ExperimentConfig
        validated configuration

    Yields
    ------
    RunRecord
        records in completion order
    """
    if cfg.command not in KINDS:
        raise metadata.ConfigError(f"Unknown experiment kind '{cfg.command}', expected one of {list(KINDS)}.")
    if cfg.command == "pipeline" and cfg.model != "complete":
        raise metadata.ConfigError("The pipeline runs on the complete graph only.")
    if cfg.command == "pipeline" and cfg.n < 16:
        raise metadata.ConfigError(f"The pipeline needs n >= 16, got n = {cfg.n}.")
    done = set()
    if cfg.out is not None and os.path.exists(cfg.out):
        done = {r.run_index for r in read_records(cfg.out)}
        if done:
            warnings.warn(f"Resuming {cfg.out}: skipping {len(done)} completed run(s).")
    todo = [i for i in range(cfg.runs) if i not in done]
    logger.info(f"{cfg.command}: {len(todo)} run(s) on {cfg.model}(n={cfg.n}) with {cfg.workers} worker(s).")

    sink = open(cfg.out, "a") if cfg.out is not None else None
    try:
        if cfg.workers == 1:
            results = (run_one(cfg, i).to_json() for i in todo)
            for line in results:
                yield _emit(line, sink)
        else:
            with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
                futures = [ex.submit(_run_one_from_dict, cfg.to_dict(), i) for i in todo]
                for f in as_completed(futures):
                    yield _emit(f.result(), sink)
    finally:
        if sink is not None:
            sink.close()


def _emit(line: str, sink) -> metadata.RunRecord:
    record = metadata.RunRecord.from_json(line)
    if sink is not None:
        sink.write(line + "\n")
        sink.flush()
    logger.info(f"run {record.run_index} done in {record.elapsed:.2f}s")
    return record


def ks_statistic(sample: Iterable[float], cdf="gumbel_r") -> float:
    """Kolmogorov-Smirnov distance of a sample to a scipy distribution name or a callable CDF."""
    sample = np.asarray(list(sample), dtype=float)
    if len(sample) == 0:
        raise ValueError("KS statistic of an empty sample.")
    return float(stats.kstest(sample, cdf).statistic)


@dataclass
class Summary:
    kind: str = "hitting"
    n: int = 0
    runs: int = 0
    fractions: Dict[str, float] = field(default_factory=lambda: {})
    means: Dict[str, float] = field(default_factory=lambda: {})
    quantiles: Dict[str, List[float]] = field(default_factory=lambda: {})
    ks: Dict[str, float] = field(default_factory=lambda: {})

    def rows(self) -> List[List[Any]]:
        out = [["runs", "count", self.runs]]
        out += [[q, "fraction", v] for q, v in self.fractions.items()]
        out += [[q, "mean", v] for q, v in self.means.items()]
        for q, (q05, q50, q95) in self.quantiles.items():
            out += [[q, "q05", q05], [q, "q50", q50], [q, "q95", q95]]
        out += [[q, "ks_gumbel", v] for q, v in self.ks.items()]
        return out

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["quantity", "statistic", "value"])
            writer.writerows(self.rows())

    def to_latex(self) -> str:
        bs = "\\"
        lines = [f"{bs}begin{{tabular}}{{llr}}", f"quantity & statistic & value {bs}{bs}", f"{bs}hline"]
        for quantity, statistic, value in self.rows():
            value = f"{value:.4g}" if isinstance(value, float) else str(value)
            lines.append(f"{unicode_to_latex(quantity)} & {statistic.replace('_', ' ')} & {value} {bs}{bs}")
        lines.append(f"{bs}end{{tabular}}")
        return "\n".join(lines)


def _series(records: List[metadata.RunRecord]) -> Dict[str, List[Optional[float]]]:
    out = {}
    for r in records:
        h = r.hitting
        for k, t in enumerate(h.get("cover", []), 1):
            out.setdefault(f"τ_C^{k}", []).append(t)
        for m, t in enumerate(h.get("min_degree", []), 1):
            out.setdefault(f"τ_δ^{m}", []).append(t)
        for m, t in enumerate(h.get("connectivity", []), 1):
            out.setdefault(f"τ_κ^{m}", []).append(t)
        for key, label in (("tau_H", "τ_H"), ("tau_PM", "τ_PM")):
            if key in h:
                out.setdefault(label, []).append(h[key])
    return out


def _fraction(a: List[Optional[int]], b: List[Optional[int]], shift: int = 0) -> Optional[float]:
    pairs = [(x, y) for x, y in zip(a, b) if x is not None and y is not None]
    if not pairs:
        return None
    return sum(1 for x, y in pairs if x == y + shift) / len(pairs)


def summarize(records: Iterable[metadata.RunRecord]) -> Summary:
    """summarize fractions, means, quantiles and the Gumbel KS distance of (τ_C - n ln n)/n over a homogeneous record set"""
    records = sorted(records, key=lambda r: r.run_index)
    if not records:
        raise ValueError("Cannot summarize an empty record set.")
    kinds = {r.kind for r in records}
    sizes = {r.params.get("n") for r in records}
    if len(kinds) > 1 or len(sizes) > 1:
        raise ValueError(f"Records mix kinds {sorted(kinds)} or sizes {sorted(map(str, sizes))}.")
    n = int(sizes.pop())
    summary = Summary(kinds.pop(), n, len(records))
    series = _series(records)

    def add_fraction(label, a, b, shift=0):
        if a in series and b in series:
            value = _fraction(series[a], series[b], shift)
            if value is not None:
                summary.fractions[label] = value

    add_fraction("τ_H = τ_C + 1", "τ_H", "τ_C^1", 1)
    add_fraction("τ_PM = τ_C", "τ_PM", "τ_C^1")
    K = sum(1 for key in series if key.startswith("τ_C^"))
    for k in range(1, K + 1):
        add_fraction(f"τ_δ^{2 * k - 1} = τ_C^{k}", f"τ_δ^{2 * k - 1}", f"τ_C^{k}")
        add_fraction(f"τ_δ^{2 * k} = τ_C^{k} + 1", f"τ_δ^{2 * k}", f"τ_C^{k}", 1)
    for m in range(1, 2 * K + 1):
        add_fraction(f"τ_κ^{m} = τ_δ^{m}", f"τ_κ^{m}", f"τ_δ^{m}")

    violations = [len(r.audits.get("violations", [])) for r in records]
    summary.fractions["no violations"] = sum(1 for v in violations if v == 0) / len(records)
    if summary.kind == "pipeline":
        summary.fractions["pipeline passed"] = sum(1 for r in records if r.audits.get("passed")) / len(records)
        checks = sorted({name for r in records for name, c in r.audits.items() if isinstance(c, dict) and "passed" in c})
        for name in checks:
            summary.fractions[f"{name} passed"] = sum(1 for r in records if r.audits.get(name, {}).get("passed")) / len(records)
    if summary.kind == "simulate":
        for name in ("connected", "hamiltonian"):
            summary.fractions[name] = sum(1 for r in records if r.audits.get(name)) / len(records)
        for name in sorted({a for r in records for a in r.audits if a.startswith("kappa_at_least_")}):
            summary.fractions[name] = sum(1 for r in records if r.audits.get(name)) / len(records)

    for label, values in series.items():
        present = np.array([v for v in values if v is not None], dtype=float)
        if len(present) == 0:
            continue
        summary.means[label] = float(present.mean())
        summary.quantiles[label] = [float(x) for x in np.quantile(present, [0.05, 0.5, 0.95])]

    covers = [t for t in series.get("τ_C^1", []) if t is not None]
    if covers and n > 1:
        normalized = (np.array(covers, dtype=float) - n * math.log(n)) / n
        summary.means["(τ_C - n ln n)/n"] = float(normalized.mean())
        summary.ks["(τ_C - n ln n)/n"] = ks_statistic(normalized)
    return summary
