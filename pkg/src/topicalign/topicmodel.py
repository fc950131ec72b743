"""Latent Dirichlet Allocation fitted by collapsed Gibbs sampling.

Single chain, point estimate from the final sweep. Each token's topic is
resampled proportionally to

    (n_dk + alpha) * (n_kw + beta) / (n_k + V * beta)

with the token itself excluded from the counts, and after the last sweep

    phi_kw   = (n_kw + beta) / (n_k + V * beta)
    theta_dk = (n_dk + alpha) / (n_d + K * alpha)

so empty documents come out exactly uniform. Runs are bit-reproducible for a
fixed (matrix, K, priors, iterations, seed).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, NumericError
from .ioutil import fmt, write_tsv
from .vocab import DocTermMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Priors:
    """Symmetric Dirichlet concentrations for theta (alpha) and phi (beta)."""

    alpha_dir: float
    beta_dir: float

    @staticmethod
    def default_for(k_topics: int) -> "Priors":
        # Griffiths-Steyvers convention: alpha = 50/K, beta = 0.01.
        return Priors(alpha_dir=50.0 / k_topics, beta_dir=0.01)

    def validate(self) -> None:
        if not (self.alpha_dir > 0 and self.beta_dir > 0):
            raise ConfigError(
                f"priors must be strictly positive, got alpha={self.alpha_dir}, beta={self.beta_dir}"
            )


@dataclass
class TopicModel:
    k_topics: int
    vocab_ref: str                     # checksum of the vocabulary fitted against
    phi: np.ndarray                    # (K, V), rows sum to 1
    theta: np.ndarray                  # (D, K), rows sum to 1
    priors: Priors
    seed: int
    iterations: int
    loglik_trace: list[tuple[int, float]]  # (sweep, corpus log-likelihood)
    assignments: np.ndarray | None = None  # final token -> topic, for audit


@dataclass
class TopicWeights:
    """Corpus-level topic shares (token-weighted average of theta rows)."""

    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)


# -- Sampler kernel ------------------------------------------------------------
#
# Written in the numba-compatible subset of Python; compiled with numba when
# available, otherwise runs as-is (slow but identical algorithm). Uses the
# kernel-local Mersenne Twister seeded at entry, so results do not depend on
# any RNG state outside the fit.

def _loglik_from_counts(doc_of, word_of, doc_len, alpha, beta, v_beta, k_alpha,
                        n_dk, n_kw, n_k):
    total = 0.0
    k_topics = n_k.shape[0]
    for i in range(doc_of.shape[0]):
        d = doc_of[i]
        w = word_of[i]
        denom_d = doc_len[d] + k_alpha
        p = 0.0
        for kk in range(k_topics):
            p += ((n_dk[d, kk] + alpha) / denom_d) * ((n_kw[kk, w] + beta) / (n_k[kk] + v_beta))
        total += np.log(p)
    return total


def _gibbs_kernel(doc_of, word_of, doc_len, k_topics, n_terms, alpha, beta,
                  n_sweeps, seed, ll_every, z, n_dk, n_kw, n_k, ll_sweeps, ll_values):
    np.random.seed(seed)
    n_tokens = doc_of.shape[0]
    v_beta = n_terms * beta
    k_alpha = k_topics * alpha

    for i in range(n_tokens):
        k = int(np.random.random() * k_topics)
        if k >= k_topics:
            k = k_topics - 1
        z[i] = k
        n_dk[doc_of[i], k] += 1
        n_kw[k, word_of[i]] += 1
        n_k[k] += 1

    cum = np.empty(k_topics, dtype=np.float64)
    n_rec = 0
    for s in range(n_sweeps):
        for i in range(n_tokens):
            d = doc_of[i]
            w = word_of[i]
            k = z[i]
            n_dk[d, k] -= 1
            n_kw[k, w] -= 1
            n_k[k] -= 1

            total = 0.0
            for kk in range(k_topics):
                total += (n_dk[d, kk] + alpha) * (n_kw[kk, w] + beta) / (n_k[kk] + v_beta)
                cum[kk] = total
            r = np.random.random() * total
            k_new = k_topics - 1
            for kk in range(k_topics):
                if r <= cum[kk]:
                    k_new = kk
                    break

            z[i] = k_new
            n_dk[d, k_new] += 1
            n_kw[k_new, w] += 1
            n_k[k_new] += 1

        if (s + 1) % ll_every == 0 or s == n_sweeps - 1:
            if n_rec == 0 or ll_sweeps[n_rec - 1] != s + 1:
                ll_sweeps[n_rec] = s + 1
                ll_values[n_rec] = _loglik_from_counts(
                    doc_of, word_of, doc_len, alpha, beta, v_beta, k_alpha, n_dk, n_kw, n_k
                )
                n_rec += 1
    return n_rec


try:  # pragma: no cover - exercised implicitly by every fit
    from numba import njit

    _loglik_from_counts = njit(cache=True)(_loglik_from_counts)
    _gibbs_kernel = njit(cache=True)(_gibbs_kernel)
except ImportError:  # pragma: no cover
    logger.warning("numba not available; the Gibbs sampler will run unaccelerated")


def fit(
    matrix: DocTermMatrix,
    k_topics: int,
    priors: Priors | None = None,
    iterations: int = 1000,
    seed: int = 0,
    ll_every: int = 10,
    keep_assignments: bool = True,
) -> TopicModel:
    """Run the collapsed Gibbs sampler and return the final-sweep point estimate."""
    if k_topics < 1:
        raise ConfigError(f"topic count must be >= 1, got {k_topics}")
    if iterations < 1:
        raise ConfigError(f"iterations must be >= 1, got {iterations}")
    if ll_every < 1:
        raise ConfigError(f"ll_every must be >= 1, got {ll_every}")
    priors = priors if priors is not None else Priors.default_for(k_topics)
    priors.validate()
    if matrix.n_tokens == 0:
        raise DataError("cannot fit a topic model: matrix has no in-vocabulary tokens")

    doc_of = np.repeat(matrix.doc_idx, matrix.counts).astype(np.int32)
    word_of = np.repeat(matrix.term_idx, matrix.counts).astype(np.int32)
    doc_len = matrix.doc_lengths.astype(np.int64)

    n_dk = np.zeros((matrix.n_docs, k_topics), dtype=np.int32)
    n_kw = np.zeros((k_topics, matrix.n_terms), dtype=np.int32)
    n_k = np.zeros(k_topics, dtype=np.int64)
    z = np.zeros(len(doc_of), dtype=np.int32)
    max_records = iterations // ll_every + 2
    ll_sweeps = np.zeros(max_records, dtype=np.int64)
    ll_values = np.zeros(max_records, dtype=np.float64)

    logger.info(
        "fit: D=%d V=%d tokens=%d K=%d iterations=%d seed=%d",
        matrix.n_docs, matrix.n_terms, len(doc_of), k_topics, iterations, seed,
    )
    n_rec = _gibbs_kernel(
        doc_of, word_of, doc_len, k_topics, matrix.n_terms,
        float(priors.alpha_dir), float(priors.beta_dir),
        int(iterations), int(seed) % (2**32), int(ll_every),
        z, n_dk, n_kw, n_k, ll_sweeps, ll_values,
    )

    phi = (n_kw + priors.beta_dir) / (n_k[:, None] + matrix.n_terms * priors.beta_dir)
    theta = (n_dk + priors.alpha_dir) / (doc_len[:, None] + k_topics * priors.alpha_dir)
    trace = [(int(ll_sweeps[i]), float(ll_values[i])) for i in range(n_rec)]

    return TopicModel(
        k_topics=k_topics,
        vocab_ref=matrix.vocab_checksum,
        phi=phi,
        theta=theta,
        priors=priors,
        seed=seed,
        iterations=iterations,
        loglik_trace=trace,
        assignments=z if keep_assignments else None,
    )


def corpus_topic_weights(model: TopicModel, matrix: DocTermMatrix) -> TopicWeights:
    """Token-weighted average of theta rows: weight_k = sum_d n_d*theta_dk / sum_d n_d."""
    if model.theta.shape[0] != matrix.n_docs:
        raise NumericError(
            f"model covers {model.theta.shape[0]} documents, matrix has {matrix.n_docs}"
        )
    lengths = matrix.doc_lengths.astype(np.float64)
    total = lengths.sum()
    if total == 0:
        raise DataError("matrix has no tokens")
    return TopicWeights(weights=lengths @ model.theta / total)


def log_likelihood(model: TopicModel, matrix: DocTermMatrix) -> float:
    """Corpus log-likelihood under the point estimates: sum over tokens of
    log sum_k theta_dk * phi_kw."""
    if model.theta.shape[0] != matrix.n_docs or model.phi.shape[1] != matrix.n_terms:
        raise NumericError(
            f"model shape ({model.theta.shape[0]} docs, {model.phi.shape[1]} terms) does not "
            f"match matrix ({matrix.n_docs} docs, {matrix.n_terms} terms)"
        )
    if len(matrix.counts) == 0:
        raise DataError("matrix has no tokens")
    p = np.einsum("ek,ke->e", model.theta[matrix.doc_idx], model.phi[:, matrix.term_idx])
    return float(matrix.counts @ np.log(p))


# -- Persistence ----------------------------------------------------------------

def save_model(model: TopicModel, directory: Path | str, doc_ids: list[str] | None = None) -> list[Path]:
    """Write phi.tsv, theta.tsv and meta.json (floats at 9 significant digits)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    k_topics, n_terms = model.phi.shape

    phi_path = directory / "phi.tsv"
    write_tsv(
        phi_path,
        ["topic"] + [f"v{j}" for j in range(n_terms)],
        ([str(k)] + [fmt(x) for x in model.phi[k]] for k in range(k_topics)),
    )
    theta_path = directory / "theta.tsv"
    labels = doc_ids if doc_ids is not None else [str(d) for d in range(model.theta.shape[0])]
    if len(labels) != model.theta.shape[0]:
        raise NumericError("doc_ids length does not match theta rows")
    write_tsv(
        theta_path,
        ["doc"] + [f"k{k}" for k in range(k_topics)],
        ([labels[d]] + [fmt(x) for x in model.theta[d]] for d in range(model.theta.shape[0])),
    )
    meta_path = directory / "meta.json"
    meta = {
        "k_topics": model.k_topics,
        "alpha_dir": model.priors.alpha_dir,
        "beta_dir": model.priors.beta_dir,
        "seed": model.seed,
        "iterations": model.iterations,
        "vocab_checksum": model.vocab_ref,
        "loglik_trace": [[s, v] for s, v in model.loglik_trace],
        "n_docs": model.theta.shape[0],
        "n_terms": n_terms,
    }
    with open(meta_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [phi_path, theta_path, meta_path]


def load_model(directory: Path | str) -> tuple[TopicModel, list[str]]:
    """Load a persisted model; returns (model, theta row labels)."""
    directory = Path(directory)
    meta = json.loads((directory / "meta.json").read_text("utf-8"))
    phi = _read_labeled_tsv(directory / "phi.tsv")[1]
    labels, theta = _read_labeled_tsv(directory / "theta.tsv")
    model = TopicModel(
        k_topics=int(meta["k_topics"]),
        vocab_ref=str(meta["vocab_checksum"]),
        phi=phi,
        theta=theta,
        priors=Priors(alpha_dir=float(meta["alpha_dir"]), beta_dir=float(meta["beta_dir"])),
        seed=int(meta["seed"]),
        iterations=int(meta["iterations"]),
        loglik_trace=[(int(s), float(v)) for s, v in meta["loglik_trace"]],
        assignments=None,
    )
    if model.phi.shape != (model.k_topics, int(meta["n_terms"])):
        raise DataError(f"{directory}: phi.tsv shape does not match meta.json")
    if model.theta.shape != (int(meta["n_docs"]), model.k_topics):
        raise DataError(f"{directory}: theta.tsv shape does not match meta.json")
    return model, labels


def _read_labeled_tsv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        lines = fh.read().splitlines()
    labels: list[str] = []
    rows: list[list[float]] = []
    for line in lines[1:]:
        parts = line.split("\t")
        labels.append(parts[0])
        rows.append([float(x) for x in parts[1:]])
    return labels, np.asarray(rows, dtype=np.float64)
