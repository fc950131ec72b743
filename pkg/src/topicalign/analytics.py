"""Corpus-level topic analyses: co-occurrence networks, core and characteristic
documents, temporal trends, category profiles, sub-corpus extraction, and
citation-cluster pseudo-topics."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, document_tokens
from .delineation import ClusterAssignment
from .errors import ConfigError, DataError, NumericError
from .ioutil import fmt, write_tsv
from .vocab import DocTermMatrix, Vocabulary

logger = logging.getLogger(__name__)


@dataclass
class CooccurrenceGraph:
    nodes: list[int]
    edges: list[tuple[int, int, int]]   # (i, j, shared document count), i < j
    threshold_used: float


@dataclass
class SpecializationStats:
    frac_above_075: float
    frac_above_05: float
    core_sizes: list[int]      # per topic, documents with weight > core threshold
    core_threshold: float
    n_docs: int                # nonempty documents considered


@dataclass
class CharacteristicDocs:
    per_topic: list[list[tuple[int, float]]]  # (doc row, weight), descending weight
    coverage: float                           # fraction of considered docs listed anywhere
    threshold: float


@dataclass
class TrendTable:
    years: list[int]
    weights: np.ndarray           # (Y, K), each row sums to 1
    year_tokens: np.ndarray       # (Y,)
    relative_change: np.ndarray   # (Y, K), vs the first year
    excluded_no_year: int


@dataclass
class ProfileMatrix:
    groups: list[str]
    values: np.ndarray            # (K, G), each topic row sums to 1


@dataclass
class PseudoTopics:
    """Per-cluster normalized term distributions, comparable to fitted topics."""

    cluster_ids: list[str]
    phi: np.ndarray               # (C, V), rows sum to 1
    vocab_ref: str
    skipped_clusters: list[str]   # clusters with zero in-vocabulary tokens


def cooccurrence_graph(theta: np.ndarray, t: float) -> CooccurrenceGraph:
    """Edges between topics that co-occur with weight >= t in the same document."""
    if not (0.0 < t < 1.0):
        raise ConfigError(f"co-occurrence threshold must be in (0, 1), got {t}")
    theta = np.asarray(theta, dtype=np.float64)
    active = theta >= t
    co = active.T.astype(np.int64) @ active.astype(np.int64)
    k = theta.shape[1]
    edges = [
        (i, j, int(co[i, j]))
        for i in range(k)
        for j in range(i + 1, k)
        if co[i, j] > 0
    ]
    return CooccurrenceGraph(nodes=list(range(k)), edges=edges, threshold_used=t)


def _considered_rows(theta: np.ndarray, doc_lengths: np.ndarray | None) -> np.ndarray:
    if doc_lengths is None:
        return np.ones(theta.shape[0], dtype=bool)
    lengths = np.asarray(doc_lengths)
    if lengths.shape[0] != theta.shape[0]:
        raise NumericError("doc_lengths does not match theta rows")
    return lengths > 0


def specialization_stats(
    theta: np.ndarray,
    doc_lengths: np.ndarray | None = None,
    core_t: float = 0.5,
) -> SpecializationStats:
    """How concentrated documents are on single topics.

    Fractions are over nonempty documents (all rows when lengths are absent);
    a topic's core is the set of documents with weight on it > core_t.
    """
    if not (0.0 < core_t < 1.0):
        raise ConfigError(f"core threshold must be in (0, 1), got {core_t}")
    theta = np.asarray(theta, dtype=np.float64)
    mask = _considered_rows(theta, doc_lengths)
    rows = theta[mask]
    n = rows.shape[0]
    if n == 0:
        return SpecializationStats(0.0, 0.0, [0] * theta.shape[1], core_t, 0)
    max_w = rows.max(axis=1)
    return SpecializationStats(
        frac_above_075=float(np.mean(max_w > 0.75)),
        frac_above_05=float(np.mean(max_w > 0.5)),
        core_sizes=[int(np.sum(rows[:, k] > core_t)) for k in range(theta.shape[1])],
        core_threshold=core_t,
        n_docs=n,
    )


def characteristic_documents(
    theta: np.ndarray,
    t: float,
    doc_lengths: np.ndarray | None = None,
) -> CharacteristicDocs:
    """Per-topic documents with weight > t, sorted by descending weight."""
    if not (0.0 < t < 1.0):
        raise ConfigError(f"characteristic threshold must be in (0, 1), got {t}")
    theta = np.asarray(theta, dtype=np.float64)
    mask = _considered_rows(theta, doc_lengths)
    listed: set[int] = set()
    per_topic: list[list[tuple[int, float]]] = []
    for k in range(theta.shape[1]):
        docs = [
            (d, float(theta[d, k]))
            for d in range(theta.shape[0])
            if mask[d] and theta[d, k] > t
        ]
        docs.sort(key=lambda item: (-item[1], item[0]))
        per_topic.append(docs)
        listed.update(d for d, _ in docs)
    considered = int(mask.sum())
    coverage = len(listed) / considered if considered else 0.0
    return CharacteristicDocs(per_topic=per_topic, coverage=coverage, threshold=t)


def temporal_trends(
    theta: np.ndarray,
    matrix: DocTermMatrix,
    years: list[int | None],
) -> TrendTable:
    """Token-weighted topic shares per year, plus relative change vs the first year.

    Documents without a year are excluded and counted; years whose documents
    carry no in-vocabulary tokens are dropped from the table.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if len(years) != theta.shape[0] or matrix.n_docs != theta.shape[0]:
        raise NumericError("years, matrix and theta must cover the same documents")
    lengths = matrix.doc_lengths.astype(np.float64)
    excluded = sum(1 for y in years if y is None)
    year_docs: dict[int, list[int]] = {}
    for d, y in enumerate(years):
        if y is not None:
            year_docs.setdefault(int(y), []).append(d)
    if not year_docs:
        raise DataError("no documents carry a year; cannot compute trends")

    kept_years: list[int] = []
    rows: list[np.ndarray] = []
    tokens: list[float] = []
    for y in sorted(year_docs):
        docs = year_docs[y]
        n_tokens = lengths[docs].sum()
        if n_tokens == 0:
            logger.info("year %d has no in-vocabulary tokens; dropped from trends", y)
            continue
        rows.append(lengths[docs] @ theta[docs] / n_tokens)
        tokens.append(n_tokens)
        kept_years.append(y)
    if not kept_years:
        raise DataError("no year has in-vocabulary tokens; cannot compute trends")
    weights = np.vstack(rows)
    relative = weights / weights[0] - 1.0
    return TrendTable(
        years=kept_years,
        weights=weights,
        year_tokens=np.asarray(tokens),
        relative_change=relative,
        excluded_no_year=excluded,
    )


def category_profiles(
    theta: np.ndarray,
    matrix: DocTermMatrix,
    doc_categories: list[list[str]],
    grouping: dict[str, str],
) -> ProfileMatrix:
    """Distribute each document's token mass over (topic, category group) cells.

    A document with m categories contributes n_d * theta_dk / m per category;
    categories missing from the grouping, and documents with no category at
    all, fall into the "unclassified" group. Topic rows are normalized.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if len(doc_categories) != theta.shape[0] or matrix.n_docs != theta.shape[0]:
        raise NumericError("doc_categories, matrix and theta must cover the same documents")
    groups = sorted(set(grouping.values()) | {"unclassified"})
    group_index = {g: i for i, g in enumerate(groups)}
    k = theta.shape[1]
    cells = np.zeros((k, len(groups)), dtype=np.float64)
    lengths = matrix.doc_lengths.astype(np.float64)
    for d in range(theta.shape[0]):
        if lengths[d] == 0:
            continue
        cats = doc_categories[d]
        if cats:
            share = lengths[d] / len(cats)
            targets = [group_index[grouping.get(c, "unclassified")] for c in cats]
        else:
            share = lengths[d]
            targets = [group_index["unclassified"]]
        for g in targets:
            cells[:, g] += share * theta[d]
    row_sums = cells.sum(axis=1, keepdims=True)
    if np.any(row_sums == 0):
        raise DataError("cannot normalize category profiles: corpus has no tokens")
    return ProfileMatrix(groups=groups, values=cells / row_sums)


def extract_subcorpus(
    corpus: Corpus,
    theta: np.ndarray,
    topics: set[int],
    t: float,
) -> Corpus:
    """Documents whose weight on ANY selected topic exceeds t."""
    if not topics:
        raise ConfigError("subcorpus extraction needs at least one topic index")
    if not (0.0 < t < 1.0):
        raise ConfigError(f"subcorpus threshold must be in (0, 1), got {t}")
    theta = np.asarray(theta, dtype=np.float64)
    if len(corpus) != theta.shape[0]:
        raise NumericError("corpus and theta must cover the same documents")
    selected = sorted(topics)
    if selected[0] < 0 or selected[-1] >= theta.shape[1]:
        raise ConfigError(f"topic indices {selected} out of range [0, {theta.shape[1]})")
    keep = theta[:, selected].max(axis=1) > t
    docs = [doc for d, doc in enumerate(corpus.documents) if keep[d]]
    fraction = len(docs) / len(corpus) if len(corpus) else 0.0
    if not docs:
        logger.warning("subcorpus extraction matched no documents (topics=%s, t=%g)", selected, t)
    return Corpus(
        name=corpus.name,
        documents=docs,
        provenance_note=(
            f"subcorpus: topics={selected}, threshold={t:g}, "
            f"kept {len(docs)} of {len(corpus)} ({fraction:.4f})"
        ),
    )


def cluster_pseudo_topics(
    corpus: Corpus,
    assignment: ClusterAssignment,
    vocab: Vocabulary,
) -> PseudoTopics:
    """Aggregate each cluster's member documents into a normalized term
    distribution, directly comparable to fitted topic-term rows."""
    doc_by_id = {doc.id: doc for doc in corpus.documents}
    cluster_ids = sorted(assignment.members)
    index = vocab.index
    kept: list[str] = []
    rows: list[np.ndarray] = []
    skipped: list[str] = []
    for cluster_id in cluster_ids:
        counts: Counter[int] = Counter()
        for doc_id in assignment.members[cluster_id]:
            doc = doc_by_id.get(doc_id)
            if doc is None:
                continue
            counts.update(index[t] for t in document_tokens(doc) if t in index)
        total = sum(counts.values())
        if total == 0:
            skipped.append(cluster_id)
            continue
        row = np.zeros(len(vocab), dtype=np.float64)
        for term, n in counts.items():
            row[term] = n / total
        kept.append(cluster_id)
        rows.append(row)
    if not kept:
        raise DataError("no cluster has in-vocabulary tokens; cannot build pseudo-topics")
    if skipped:
        logger.info("%d cluster(s) without in-vocabulary tokens omitted", len(skipped))
    return PseudoTopics(
        cluster_ids=kept,
        phi=np.vstack(rows),
        vocab_ref=vocab.checksum(),
        skipped_clusters=skipped,
    )


# -- Exports ----------------------------------------------------------------------

def write_cooccurrence(graph: CooccurrenceGraph, path: Path | str) -> None:
    write_tsv(
        path,
        ["topic_i", "topic_j", "shared_docs"],
        ([str(i), str(j), str(n)] for i, j, n in graph.edges),
    )


def write_trends(table: TrendTable, labels: list[str], path: Path | str, relative: bool = False) -> None:
    values = table.relative_change if relative else table.weights
    write_tsv(
        path,
        ["year"] + list(labels),
        (
            [str(table.years[y])] + [fmt(x) for x in values[y]]
            for y in range(len(table.years))
        ),
    )


def write_profiles(profiles: ProfileMatrix, labels: list[str], path: Path | str) -> None:
    write_tsv(
        path,
        ["topic"] + profiles.groups,
        (
            [labels[k]] + [fmt(x) for x in profiles.values[k]]
            for k in range(profiles.values.shape[0])
        ),
    )


def write_characteristic_docs(
    chars: CharacteristicDocs,
    labels: list[str],
    corpus: Corpus,
    path: Path | str,
) -> None:
    rows = []
    for k, docs in enumerate(chars.per_topic):
        for d, weight in docs:
            doc = corpus.documents[d]
            rows.append([labels[k], doc.id, fmt(weight), doc.title])
    write_tsv(path, ["topic", "doc_id", "weight", "title"], rows)
