"""Serialisation of an analysis into ``report.json`` and plot-ready tables."""

from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .graph import GraphError, WeightedGraph, weight_distribution, write_edge_list
from .pipeline import AnalysisResult, RunConfig

REPORT_VERSION = 1
EIGS_COLUMNS = ("rank", "eigenvalue", "upper_bound", "lower_bound", "side")
WEIGHTDIST_COLUMNS = ("weight", "count", "cumulative_fraction")


def _num(x):
    """JSON-safe number: numpy scalars unwrapped, non-finite values become null."""
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def _nums(values) -> list:
    return [_num(v) for v in np.asarray(values).ravel()]


def _graph_summary(g: WeightedGraph) -> dict:
    return {"nodes": g.n, "links": g.num_links, "nonzero_entries": g.num_entries,
            "density": _num(g.density), "total_weight": _num(g.total_weight),
            "weight_granularity": g.weight_granularity}


def _spectral_section(res: AnalysisResult) -> dict:
    est = res.estimate
    tests = None
    if est.test_report is not None:
        tests = {"method": est.test_report.method, "alpha": _num(est.test_report.alpha),
                 "entries": [{"eigenvalue": _num(e.eigenvalue), "statistic": _num(e.statistic),
                              "value": _num(e.value), "significant": bool(e.significant)}
                             for e in est.test_report.entries]}
    return {"eigenvalues": _nums(est.data_eigenvalues),
            "upper_bound": _num(est.upper_bound), "lower_bound": _num(est.lower_bound),
            "upper_limit": _num(est.upper_limit), "bound_method": est.bound_method,
            "sampled_maxima": _nums(est.sampled_maxima),
            "sampled_minima": _nums(est.sampled_minima),
            "d_pos": est.d_pos, "d_neg": est.d_neg, "tests": tests}


def _rejection_section(res: AnalysisResult) -> dict | None:
    sig = res.signal
    if sig is None:
        return None
    kept = np.zeros(res.graph.n, dtype=bool)
    kept[sig.retained] = True
    nodes = [{"label": res.graph.node_labels[i], "norm": _num(sig.data_norms[i]),
              "expected_norm": _num(sig.expected_norms[i]), "retained": bool(kept[i]),
              "projection": _nums(sig.projection[i])}
             for i in range(res.graph.n)]
    return {"retained_count": int(sig.retained.size), "rejected_count": int(sig.rejected.size),
            "signal_network": _graph_summary(sig.signal_graph), "nodes": nodes}


def _partition_section(res: AnalysisResult) -> dict | None:
    cl = res.clusters
    if cl is None:
        return None
    part = cl.partition
    out = {"method": cl.method, "groups": part.num_groups, "quality": _num(part.quality),
           "converged": bool(part.converged),
           "sizes": [int(len(x)) for x in part.groups()]}
    if cl.consensus is not None:
        out["consensus"] = {"iterations": cl.consensus.iterations,
                            "k_max": cl.consensus.k_max,
                            "null_value": _num(cl.consensus.null_value),
                            "converged": bool(cl.consensus.converged)}
    if cl.scan is not None:
        out["multiway"] = {"k": [int(k) for k in cl.scan.ks],
                           "quality": _nums(cl.scan.qualities), "knee": int(cl.scan.knee)}
    return out


def _kpartite_section(res: AnalysisResult) -> dict | None:
    kp = res.kpartite
    if kp is None:
        return None
    kept = set(int(i) for i in kp.retained_nodes)
    nodes = []
    for i in range(res.graph.n):
        entry = {"label": res.graph.node_labels[i], "norm": _num(kp.data_norms[i]),
                 "expected_norm": _num(kp.expected_norms[i]), "retained": i in kept}
        if kp.groups is not None:
            entry["group"] = kp.groups.get(i)
        nodes.append(entry)
    return {"negative_eigenvalues": _nums(kp.negative_values),
            "sign_split": kp.groups is not None, "nodes": nodes}


def build_report(res: AnalysisResult, config: RunConfig, source: str = "") -> dict:
    """Plain-dict report; contains no timestamps so identical runs serialise identically."""
    return {
        "version": REPORT_VERSION,
        "source": source,
        "config": {"null": config.null, "num_samples": config.num_samples,
                   "kappa": _num(config.kappa), "sampler": config.sampler,
                   "seed": config.seed, "bound": config.bound, "alpha": _num(config.alpha),
                   "cluster": config.cluster, "restarts": config.restarts},
        "input_nodes": res.input_nodes,
        "graph": _graph_summary(res.graph),
        "structure": res.structure,
        "spectral": _spectral_section(res),
        "rejection": _rejection_section(res),
        "partition": _partition_section(res),
        "kpartite": _kpartite_section(res),
        "notes": list(res.notes),
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def report_schema() -> dict:
    text = resources.files("netspectra").joinpath("report.schema.json").read_text("utf-8")
    return json.loads(text)


def eigs_rows(res: AnalysisResult) -> list[dict]:
    est = res.estimate
    rows = []
    for r, lam in enumerate(est.data_eigenvalues, start=1):
        side = "above" if lam > est.upper_bound else "below" if lam < est.lower_bound else "bulk"
        rows.append({"rank": r, "eigenvalue": lam, "upper_bound": est.upper_bound,
                     "lower_bound": est.lower_bound, "side": side})
    return rows


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in columns])


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def weightdist_rows(g: WeightedGraph, kappa: float = 1.0) -> list[dict]:
    """Data weight distribution; empty for real weights without a ``kappa`` scaling."""
    try:
        summary = weight_distribution(g, kappa)
    except GraphError:
        return []
    return [{"weight": s.weight_value, "count": s.observed_count,
             "cumulative_fraction": s.cumulative_fraction} for s in summary]


def partition_tsv(res: AnalysisResult) -> str:
    buf = io.StringIO()
    if res.clusters is not None:
        labels = res.signal.signal_graph.node_labels
        for label, grp in zip(labels, res.clusters.partition.assignment):
            buf.write(f"{label}\t{int(grp)}\n")
    return buf.getvalue()


def write_outputs(res: AnalysisResult, config: RunConfig, out_dir, source: str = "") -> dict:
    """Write ``report.json``, ``signal.tsv``, ``partition.tsv``, ``eigs.csv`` and ``weightdist.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = build_report(res, config, source)
    (out / "report.json").write_text(report_json(report), encoding="utf-8")
    with open(out / "signal.tsv", "w", encoding="utf-8") as fh:
        if res.signal is not None:
            write_edge_list(res.signal.signal_graph, fh)
    (out / "partition.tsv").write_text(partition_tsv(res), encoding="utf-8")
    _write_csv(out / "eigs.csv", EIGS_COLUMNS, eigs_rows(res))
    _write_csv(out / "weightdist.csv", WEIGHTDIST_COLUMNS, weightdist_rows(res.graph, config.kappa))
    return report
