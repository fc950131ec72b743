"""Topic geometry: Jensen-Shannon distances, PCoA layouts, relevance ranking.

Jensen-Shannon divergence is computed with base-2 logarithms so values live in
[0, 1]; every downstream threshold is interpreted on that scale. The layout is
classical principal coordinates analysis with a dependency-free cyclic Jacobi
eigensolver (the matrices here are small and symmetric).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, NumericError
from .ioutil import fmt, read_tsv, write_tsv
from .topicmodel import TopicModel, TopicWeights
from .vocab import DocTermMatrix

_NORM_TOL = 1e-9
_SYM_TOL = 1e-12


@dataclass
class DistanceMatrix:
    values: np.ndarray
    kind: str  # "square_intra" | "rect_cross"

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        self.values = v
        if self.kind not in ("square_intra", "rect_cross"):
            raise NumericError(f"unknown distance matrix kind {self.kind!r}")
        if v.ndim != 2:
            raise NumericError("distance matrix must be 2-dimensional")
        if v.size and (v.min() < -_NORM_TOL or v.max() > 1 + _NORM_TOL):
            raise NumericError("distance values must lie in [0, 1]")
        if self.kind == "square_intra":
            if v.shape[0] != v.shape[1]:
                raise NumericError("square_intra matrix must be square")
            if np.abs(v - v.T).max() > _SYM_TOL:
                raise NumericError("square_intra matrix must be symmetric")
            if np.abs(np.diag(v)).max() > _SYM_TOL:
                raise NumericError("square_intra matrix must have a zero diagonal")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass
class Layout:
    coords: np.ndarray   # (n, 2)
    sizes: np.ndarray    # (n,), positive, proportional to topic weights
    stress: float        # Frobenius gap between input and layout distances


@dataclass
class RelevanceConfig:
    lambda_: float = 0.6
    top_n: int = 20

    def validate(self) -> None:
        if not (0.0 <= self.lambda_ <= 1.0):
            raise ConfigError(f"relevance lambda must be in [0, 1], got {self.lambda_}")
        if self.top_n < 1:
            raise ConfigError(f"relevance top_n must be >= 1, got {self.top_n}")


def _check_distribution(p: np.ndarray, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise NumericError(f"{name} must be a vector")
    if p.size and p.min() < 0:
        raise NumericError(f"{name} has negative entries")
    if abs(p.sum() - 1.0) > _NORM_TOL:
        raise NumericError(f"{name} does not sum to 1 (sum={p.sum()!r})")
    return p


def js_divergence(p, q) -> float:
    """Base-2 Jensen-Shannon divergence, in [0, 1]; 0*log(0) counts as 0."""
    p = _check_distribution(p, "p")
    q = _check_distribution(q, "q")
    if p.shape != q.shape:
        raise NumericError(f"length mismatch: {p.shape[0]} vs {q.shape[0]}")
    m = 0.5 * (p + q)
    pm = p > 0
    qm = q > 0
    kl_p = float(np.sum(p[pm] * np.log2(p[pm] / m[pm])))
    kl_q = float(np.sum(q[qm] * np.log2(q[qm] / m[qm])))
    return 0.5 * kl_p + 0.5 * kl_q


def topic_distance_matrix(model: TopicModel) -> DistanceMatrix:
    """Pairwise Jensen-Shannon divergence between the model's topic-term rows."""
    k = model.k_topics
    if k < 2:
        raise ConfigError(f"need at least 2 topics for a distance matrix, got {k}")
    values = np.zeros((k, k), dtype=np.float64)
    for i in range(k):
        for j in range(i + 1, k):
            d = js_divergence(model.phi[i], model.phi[j])
            values[i, j] = d
            values[j, i] = d
    return DistanceMatrix(values=values, kind="square_intra")


# -- Classical PCoA via cyclic Jacobi rotations ----------------------------------

def _jacobi_eigh(matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 200):
    """Eigendecomposition of a small symmetric matrix by cyclic Jacobi sweeps.

    Sweeps run in a fixed (row, column) order until the off-diagonal Frobenius
    norm drops below ``tol``, so the result is deterministic.
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    n = a.shape[0]
    vecs = np.eye(n)
    if n == 1:
        return np.array([a[0, 0]]), vecs
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(a * a) - np.sum(np.diag(a) ** 2))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0

                vec_p = vecs[:, p].copy()
                vec_q = vecs[:, q].copy()
                vecs[:, p] = c * vec_p - s * vec_q
                vecs[:, q] = s * vec_p + c * vec_q
    else:
        off = np.sqrt(np.sum(a * a) - np.sum(np.diag(a) ** 2))
        if off > tol:
            raise NumericError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
    return np.diag(a).copy(), vecs


def pcoa_layout(dist: DistanceMatrix, sizes: TopicWeights) -> Layout:
    """Classical PCoA: embed a square distance matrix into 2-D coordinates.

    Double-centers the squared distances, takes the top-2 eigenpairs, scales
    eigenvectors by sqrt(eigenvalue) (non-positive eigenvalues give a zero
    axis), and flips each axis so its largest-magnitude coordinate is positive.
    """
    if dist.kind != "square_intra":
        raise NumericError("pcoa_layout requires a square intra-corpus distance matrix")
    n = dist.rows
    weights = np.asarray(sizes.weights, dtype=np.float64)
    if weights.shape[0] != n:
        raise NumericError(f"sizes cover {weights.shape[0]} topics, distances cover {n}")
    if weights.size and weights.min() <= 0:
        raise NumericError("bubble sizes must be positive")

    d_sq = dist.values**2
    centering = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * centering @ d_sq @ centering
    b = 0.5 * (b + b.T)  # clean up rounding asymmetry before Jacobi

    eigvals, eigvecs = _jacobi_eigh(b)
    order = np.argsort(-eigvals, kind="stable")
    coords = np.zeros((n, 2), dtype=np.float64)
    for axis in range(min(2, n)):
        lam = eigvals[order[axis]]
        if lam > 0:
            column = eigvecs[:, order[axis]] * np.sqrt(lam)
            peak = np.argmax(np.abs(column))
            if column[peak] < 0:
                column = -column
            coords[:, axis] = column

    diff = coords[:, None, :] - coords[None, :, :]
    layout_dist = np.sqrt(np.sum(diff**2, axis=2))
    stress = float(np.linalg.norm(dist.values - layout_dist))
    return Layout(coords=coords, sizes=weights.copy(), stress=stress)


def relevant_terms(
    model: TopicModel,
    matrix: DocTermMatrix,
    terms: list[str],
    k: int,
    config: RelevanceConfig,
) -> list[tuple[str, float]]:
    """Rank a topic's terms by relevance = lambda*log(phi) + (1-lambda)*log(phi/p).

    ``p`` is the empirical corpus term probability (token counts normalized);
    natural logarithms (the ranking is base-invariant). Ties break by the
    canonical term order.
    """
    config.validate()
    if not (0 <= k < model.k_topics):
        raise ConfigError(f"topic index {k} out of range [0, {model.k_topics})")
    if model.phi.shape[1] != matrix.n_terms or len(terms) != matrix.n_terms:
        raise NumericError(
            f"model has {model.phi.shape[1]} terms, matrix has {matrix.n_terms}, "
            f"term list has {len(terms)}"
        )
    log_phi = np.log(model.phi[k])
    if config.lambda_ == 1.0:
        scores = log_phi
    else:
        totals = np.bincount(matrix.term_idx, weights=matrix.counts, minlength=matrix.n_terms)
        grand = totals.sum()
        if grand == 0 or totals.min() == 0:
            raise DataError("corpus term probabilities unavailable: some terms never occur")
        log_p = np.log(totals / grand)
        scores = config.lambda_ * log_phi + (1.0 - config.lambda_) * (log_phi - log_p)
    order = np.argsort(-scores, kind="stable")
    return [(terms[int(j)], float(scores[j])) for j in order[: config.top_n]]


# -- Persistence ------------------------------------------------------------------

def write_distance_matrix(
    dist: DistanceMatrix, row_labels: list[str], col_labels: list[str], path: Path | str
) -> None:
    """TSV with a header row and a leading label column."""
    if len(row_labels) != dist.rows or len(col_labels) != dist.cols:
        raise NumericError("label counts do not match distance matrix shape")
    write_tsv(
        path,
        ["topic"] + list(col_labels),
        ([row_labels[i]] + [fmt(x) for x in dist.values[i]] for i in range(dist.rows)),
    )


def read_distance_matrix(path: Path | str, kind: str) -> tuple[list[str], list[str], DistanceMatrix]:
    header, rows = read_tsv(path)
    col_labels = header[1:]
    row_labels = [r[0] for r in rows]
    values = np.asarray([[float(x) for x in r[1:]] for r in rows], dtype=np.float64)
    return row_labels, col_labels, DistanceMatrix(values=values, kind=kind)


def write_layout(layout: Layout, labels: list[str], path: Path | str) -> None:
    write_tsv(
        path,
        ["topic", "x", "y", "size"],
        (
            [labels[i], fmt(layout.coords[i, 0]), fmt(layout.coords[i, 1]), fmt(layout.sizes[i])]
            for i in range(len(labels))
        ),
    )


def read_layout(path: Path | str) -> tuple[list[str], Layout]:
    header, rows = read_tsv(path)
    if header != ["topic", "x", "y", "size"]:
        raise DataError(f"{path}: unexpected layout header {header}")
    labels = [r[0] for r in rows]
    coords = np.asarray([[float(r[1]), float(r[2])] for r in rows], dtype=np.float64)
    sizes = np.asarray([float(r[3]) for r in rows], dtype=np.float64)
    return labels, Layout(coords=coords, sizes=sizes, stress=float("nan"))
