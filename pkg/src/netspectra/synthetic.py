"""Weighted stochastic block models with an optional halo of noise nodes."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

from .graph import WeightedGraph
from .nullmodels import sample_rng

log = logging.getLogger(__name__)

_SYNTH_STREAM = 0x51B0


class SyntheticError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 400
    g: int = 4
    p_within: float = 0.2
    p_between: float = 0.05
    p_noise: float = 0.0
    f_noise: float = 0.0
    lambda_s: float = 200.0
    seed: int = 0

    def __post_init__(self):
        for name in ("p_within", "p_between", "p_noise"):
            p = getattr(self, name)
            if not 0 <= p <= 1:
                raise SyntheticError(f"{name} must lie in [0, 1]")
        if self.g < 1 or self.n % self.g:
            raise SyntheticError("n must be divisible by the number of groups")
        if self.f_noise < 0:
            raise SyntheticError("f_noise must be nonnegative")

    @property
    def num_noise(self) -> int:
        return int(np.floor(self.n * self.f_noise))

    @property
    def total_nodes(self) -> int:
        return self.n + self.num_noise


@dataclass
class GroundTruth:
    module_of: np.ndarray  # group label of each of the first n nodes
    noise_nodes: np.ndarray  # indices n..T-1
    target_strengths: np.ndarray | None = None  # Poisson draws the weights were built from

    @property
    def total_nodes(self) -> int:
        return len(self.module_of) + len(self.noise_nodes)

    @property
    def modular_nodes(self) -> np.ndarray:
        return np.arange(len(self.module_of))


def generate_wsbm(spec: SyntheticSpec) -> tuple[WeightedGraph, GroundTruth]:
    """Draw a weighted block-model network and its planted labels.

    Links are independent Bernoulli draws (within/between module rates, and
    ``p_noise`` for any pair touching a noise node). Strengths are drawn from
    ``Poisson(lambda_s)`` independently of the links; each link then carries
    weight ``1 + Poisson(budget * s_i s_j / sum_links s s)``, the same rule as
    the sparse null model, with the budget being half the total strength minus
    the number of links.
    """
    rng = sample_rng(spec.seed, 0, _SYNTH_STREAM)
    T = spec.total_nodes
    size = spec.n // spec.g
    module = np.repeat(np.arange(spec.g), size)
    labels = np.concatenate([module, np.full(spec.num_noise, -1)])

    iu = np.triu_indices(T, 1)
    li, lj = labels[iu[0]], labels[iu[1]]
    probs = np.where(li == lj, spec.p_within, spec.p_between)
    probs = np.where((li < 0) | (lj < 0), spec.p_noise, probs)
    linked = rng.random(probs.shape) < probs

    s = rng.poisson(spec.lambda_s, size=T).astype(float)
    w = np.zeros(probs.shape)
    m = int(linked.sum())
    if m:
        prods = s[iu[0][linked]] * s[iu[1][linked]]
        budget = max(0.0, s.sum() / 2 - m)
        denom = prods.sum()
        extra = rng.poisson(budget * prods / denom) if denom > 0 else 0
        w[linked] = 1.0 + extra
    else:
        log.warning("synthetic spec %s produced an empty network", spec)
    W = np.zeros((T, T))
    W[iu] = w
    W = W + W.T
    names = [f"m{i}" for i in range(spec.n)] + [f"noise{i}" for i in range(spec.num_noise)]
    truth = GroundTruth(module, np.arange(spec.n, T), s)
    return WeightedGraph(tuple(names), W), truth


SWEEP_COLUMNS = ("p_within", "p_between", "p_noise", "f_noise", "replicate", "detected",
                 "d_pos", "groups_found", "vi_own_group", "vi_single_group", "tpr", "tnr",
                 "runtime_ms")


@dataclass
class SweepConfig:
    """How each synthetic network is analysed during a sweep."""

    null: str = "sparse_wcm"
    num_samples: int = 100
    kappa: float = 1.0
    bound: str = "mean"
    alpha: float = 0.975
    cluster: str = "kmeans"
    restarts: int = 100
    replicates: int = 50
    seed: int = 0
    jobs: int = 1
    timing: bool = True


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(round(float(x), 10))
    return str(x)


def sweep_cells(grid: Iterable[SyntheticSpec], config: SweepConfig):
    """Yield ``(cell_index, replicate, spec)`` with a derived seed per network."""
    for c, base in enumerate(grid):
        for r in range(config.replicates):
            seed = int(np.random.SeedSequence([config.seed, c, r]).generate_state(1)[0])
            yield c, r, replace(base, seed=seed)


def run_replicate(spec: SyntheticSpec, config: SweepConfig) -> dict:
    from .pipeline import analyze_synthetic

    t0 = time.perf_counter()
    row = analyze_synthetic(spec, config)
    row["runtime_ms"] = int(round((time.perf_counter() - t0) * 1000)) if config.timing else 0
    return row


def sweep_detection(grid: Iterable[SyntheticSpec], config: SweepConfig,
                    progress: Callable[[str], None] | None = None) -> list[dict]:
    """Analyse ``config.replicates`` fresh networks per grid point.

    A failing network is logged and recorded with empty result columns rather
    than aborting the sweep.
    """
    rows = []
    for c, r, spec in sweep_cells(list(grid), config):
        base = {"p_within": spec.p_within, "p_between": spec.p_between,
                "p_noise": spec.p_noise, "f_noise": spec.f_noise, "replicate": r}
        try:
            result = run_replicate(spec, config)
        except Exception as exc:  # recorded per cell, not fatal
            log.error("cell %d replicate %d failed: %s", c, r, exc)
            result = {}
        rows.append({**{k: None for k in SWEEP_COLUMNS}, **base, **result})
        if progress is not None and r == config.replicates - 1:
            progress(f"cell {c}: p_within={spec.p_within} p_between={spec.p_between} "
                     f"p_noise={spec.p_noise} f_noise={spec.f_noise} done")
    return rows


def write_sweep_csv(rows: list[dict], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row.get(k)) for k in SWEEP_COLUMNS])


def sweep_csv_string(rows: list[dict]) -> str:
    buf = io.StringIO()
    write_sweep_csv(rows, buf)
    return buf.getvalue()
