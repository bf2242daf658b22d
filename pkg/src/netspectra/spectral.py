"""Comparison matrices, their spectra, and null-model eigenvalue bounds."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import stats
from scipy.sparse.linalg import eigsh

from .graph import WeightedGraph
from .nullmodels import NullEnsemble, sample_rng

# above this size only extremal eigenpairs are computed, iteratively
DENSE_LIMIT = 2000
_PERMUTATION_STREAM = 0x9E37
EXACT_PERMUTATION_MAX = 12

MEAN = "mean"
CI = "ci"
TTEST = "ttest"
PERMUTATION = "perm"
BOUND_METHODS = (MEAN, CI, TTEST, PERMUTATION)


class SpectralError(ValueError):
    pass


def comparison_matrix(g: WeightedGraph | np.ndarray, expectation: np.ndarray) -> np.ndarray:
    W = g.weights if isinstance(g, WeightedGraph) else np.asarray(g, dtype=float)
    P = np.asarray(expectation, dtype=float)
    if W.shape != P.shape:
        raise SpectralError(f"shape mismatch: weights {W.shape} vs expectation {P.shape}")
    return W - P


def _check_symmetric(M: np.ndarray) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SpectralError("matrix must be square")
    scale = np.abs(M).max() if M.size else 0.0
    if M.size and np.abs(M - M.T).max() > 1e-10 * max(scale, 1e-300):
        raise SpectralError("matrix is not symmetric")


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each eigenvector is made positive
    if vectors.size == 0:
        return vectors
    rows = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[rows, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1
    return vectors * signs


def eig_symmetric(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvectors."""
    M = np.asarray(M, dtype=float)
    _check_symmetric(M)
    try:
        vals, vecs = np.linalg.eigh((M + M.T) / 2)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigendecomposition did not converge: {exc}") from exc
    order = np.argsort(vals, kind="stable")[::-1]
    return vals[order], _fix_signs(vecs[:, order])


def extremal_eigenvalues(M: np.ndarray) -> tuple[float, float]:
    n = M.shape[0]
    if n <= DENSE_LIMIT:
        vals = scipy.linalg.eigvalsh(M, check_finite=False)
        return float(vals[-1]), float(vals[0])
    top = eigsh(M, k=1, which="LA", tol=1e-8, return_eigenvectors=False)
    bottom = eigsh(M, k=1, which="SA", tol=1e-8, return_eigenvectors=False)
    return float(top[0]), float(bottom[0])


def extreme_eigenpairs(M: np.ndarray, d: int, largest: bool = True):
    """The ``d`` largest (or smallest) eigenpairs, most extreme first."""
    n = M.shape[0]
    if d <= 0:
        return np.zeros(0), np.zeros((n, 0))
    if n <= DENSE_LIMIT:
        lo, hi = (n - d, n - 1) if largest else (0, d - 1)
        vals, vecs = scipy.linalg.eigh(M, subset_by_index=(lo, hi), check_finite=False)
    else:
        vals, vecs = eigsh(M, k=d, which="LA" if largest else "SA", tol=1e-8)
    order = np.argsort(vals, kind="stable")
    if largest:
        order = order[::-1]
    return vals[order], _fix_signs(vecs[:, order])


@dataclass
class TestEntry:
    __test__ = False

    eigenvalue: float
    statistic: float
    value: float  # p-value, or the CI limit for confidence intervals
    significant: bool


@dataclass
class TestReport:
    __test__ = False

    method: str
    alpha: float
    entries: list[TestEntry] = field(default_factory=list)

    @property
    def num_significant(self) -> int:
        return sum(e.significant for e in self.entries)


def _mean_sd(sampled_maxima) -> tuple[np.ndarray, float, float]:
    x = np.asarray(sampled_maxima, dtype=float)
    sd = float(x.std(ddof=1)) if x.size > 1 else 0.0
    return x, float(x.mean()), sd


def ci_limit(sampled_maxima, alpha: float = 0.975) -> float:
    x, mean, sd = _mean_sd(sampled_maxima)
    if x.size < 2:
        raise SpectralError("a confidence interval needs at least two samples")
    return mean + stats.t.ppf(alpha, x.size - 1) * sd / np.sqrt(x.size)


def ci_test(sampled_maxima, eigenvalues, alpha: float = 0.975) -> TestReport:
    """Compare each eigenvalue to the upper confidence limit of the mean maximum."""
    limit = ci_limit(sampled_maxima, alpha)
    report = TestReport(CI, alpha)
    for lam in np.asarray(eigenvalues, dtype=float):
        report.entries.append(TestEntry(float(lam), float(lam - limit), float(limit),
                                        bool(lam > limit)))
    return report


def t_test_eig(sampled_maxima, eigenvalue: float, alpha: float = 0.975) -> TestEntry:
    """Left-tailed one-sample t-test of the mean sampled maximum against ``eigenvalue``."""
    x, mean, sd = _mean_sd(sampled_maxima)
    if x.size < 2 or sd == 0:
        raise SpectralError("t-test needs at least two samples with nonzero spread")
    t = (mean - eigenvalue) / (sd / np.sqrt(x.size))
    p = float(stats.t.cdf(t, x.size - 1))
    return TestEntry(float(eigenvalue), float(t), p, p < 1 - alpha)


def permutation_test(sampled_maxima, eigenvalue: float, n_permutations: int = 10000,
                     seed: int = 0, alpha: float = 0.975, exact: bool | None = None) -> TestEntry:
    """One-sample sign-flip test on the summed deviations ``sum(max_i - eigenvalue)``.

    The p-value is the fraction of sign patterns whose summed deviation is at
    most the observed one. All ``2**N`` patterns are enumerated when ``N`` is at
    most 12 (or ``exact`` is set); otherwise ``n_permutations`` random patterns
    are drawn.
    """
    dev = np.asarray(sampled_maxima, dtype=float) - eigenvalue
    observed = dev.sum()
    N = dev.size
    if exact is None:
        exact = N <= EXACT_PERMUTATION_MAX
    if exact:
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=N)))
    else:
        rng = sample_rng(seed, 0, _PERMUTATION_STREAM)
        signs = rng.choice((-1.0, 1.0), size=(n_permutations, N))
    replicates = signs @ dev
    # tolerance absorbs summation-order rounding between replicate and observed sums
    tol = 1e-12 * max(np.abs(dev).sum(), 1e-300)
    p = float(np.mean(replicates <= observed + tol))
    return TestEntry(float(eigenvalue), float(observed), p, p < 1 - alpha)


@dataclass
class SpectralEstimate:
    data_eigenvalues: np.ndarray
    data_eigenvectors: np.ndarray
    upper_bound: float
    lower_bound: float
    sampled_maxima: np.ndarray
    sampled_minima: np.ndarray
    d_pos: int
    d_neg: int
    bound_method: str = MEAN
    upper_limit: float | None = None
    test_report: TestReport | None = None

    @property
    def retained_vectors(self) -> np.ndarray:
        return self.data_eigenvectors[:, : self.d_pos]

    @property
    def retained_values(self) -> np.ndarray:
        return self.data_eigenvalues[: self.d_pos]

    @property
    def negative_vectors(self) -> np.ndarray:
        if self.d_neg == 0:
            return self.data_eigenvectors[:, :0]
        return self.data_eigenvectors[:, ::-1][:, : self.d_neg]

    @property
    def negative_values(self) -> np.ndarray:
        return self.data_eigenvalues[::-1][: self.d_neg]

    @property
    def structure(self) -> bool:
        return self.d_pos > 0 or self.d_neg > 0


def estimate_bounds(ensemble: NullEnsemble, expectation: np.ndarray | None = None,
                    jobs: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Extreme eigenvalues of each sampled comparison matrix ``P*_i - <P>``."""
    P = ensemble.expectation if expectation is None else expectation
    pairs = ensemble.map(lambda S: extremal_eigenvalues(S - P), jobs)
    arr = np.array(pairs, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def detect_dimensions(eigenvalues, upper: float, lower: float) -> tuple[int, int]:
    """Counts of eigenvalues strictly above ``upper`` and strictly below ``lower``."""
    lam = np.asarray(eigenvalues, dtype=float)
    return int(np.sum(lam > upper)), int(np.sum(lam < lower))


def spectral_estimate(g: WeightedGraph, ensemble: NullEnsemble, bound: str = MEAN,
                      alpha: float = 0.975, n_permutations: int = 10000,
                      jobs: int | None = None) -> SpectralEstimate:
    """Data spectrum, sampled bounds and retained dimension counts.

    ``bound`` chooses how ``d_pos`` is decided: ``mean`` counts eigenvalues
    above the mean sampled maximum; ``ci`` uses the upper confidence limit at
    level ``alpha``; ``ttest`` and ``perm`` keep eigenvalues above the mean whose
    p-value is below ``1 - alpha``. ``d_neg`` always uses the mean minimum.
    """
    if bound not in BOUND_METHODS:
        raise SpectralError(f"unknown bound method {bound!r}")
    C = comparison_matrix(g, ensemble.expectation)
    vals, vecs = eig_symmetric(C)
    maxima, minima = estimate_bounds(ensemble, jobs=jobs)
    upper, lower = float(maxima.mean()), float(minima.mean())
    d_pos, d_neg = detect_dimensions(vals, upper, lower)
    report = None
    limit = upper
    if bound == CI:
        report = ci_test(maxima, vals[:d_pos], alpha)
        limit = ci_limit(maxima, alpha)
        d_pos = int(np.sum(vals > limit))
    elif bound in (TTEST, PERMUTATION):
        report = TestReport(bound, alpha)
        for lam in vals[:d_pos]:
            if bound == TTEST:
                entry = t_test_eig(maxima, lam, alpha)
            else:
                entry = permutation_test(maxima, lam, n_permutations,
                                         ensemble.spec.seed, alpha)
            report.entries.append(entry)
        # leading eigenvalues only: stop at the first non-significant one
        kept = 0
        for entry in report.entries:
            if not entry.significant:
                break
            kept += 1
        d_pos = kept
    return SpectralEstimate(vals, vecs, upper, lower, maxima, minima, d_pos, d_neg,
                            bound, limit, report)
