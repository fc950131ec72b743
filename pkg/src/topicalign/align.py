"""Cross-corpus topic alignment over a concatenated vocabulary.

Two fitted models are compared by embedding each topic-term distribution into
the union of the two vocabularies and taking pairwise Jensen-Shannon
divergences. The summary artifacts are the rectangular distance matrix with
row/column marginal averages, the selected closest pairs, and per-topic "echo"
flags marking topics unusually close to the whole opposite topic set.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import ConfigError, DataError, NumericError
from .geometry import DistanceMatrix, js_divergence
from .ioutil import fmt, write_tsv
from .vocab import Vocabulary

_NORM_TOL = 1e-9


class TopicDistributions(Protocol):
    """Anything exposing topic-term rows tied to a vocabulary checksum."""

    phi: np.ndarray
    vocab_ref: str


@dataclass
class UnionVocab:
    terms: list[str]
    map_a: np.ndarray      # source index -> union index
    map_b: np.ndarray
    shared_count: int
    checksum_a: str
    checksum_b: str

    def __len__(self) -> int:
        return len(self.terms)


@dataclass
class AlignmentResult:
    cross: DistanceMatrix
    row_means: np.ndarray
    col_means: np.ndarray
    grand_mean: float
    pairs: list[tuple[int, int, float]]   # (row topic, col topic, distance), ascending
    echo_a: list[bool]
    echo_b: list[bool]
    threshold: float
    top_n: int | None


def union_vocabulary(vocab_a: Vocabulary, vocab_b: Vocabulary) -> UnionVocab:
    """Union of two canonical vocabularies, again in canonical order."""
    for name, vocab in (("A", vocab_a), ("B", vocab_b)):
        if vocab.terms != sorted(vocab.terms):
            raise DataError(f"vocabulary {name} is not in canonical order")
    set_a, set_b = set(vocab_a.terms), set(vocab_b.terms)
    terms = sorted(set_a | set_b)
    index = {t: i for i, t in enumerate(terms)}
    return UnionVocab(
        terms=terms,
        map_a=np.asarray([index[t] for t in vocab_a.terms], dtype=np.int64),
        map_b=np.asarray([index[t] for t in vocab_b.terms], dtype=np.int64),
        shared_count=len(set_a & set_b),
        checksum_a=vocab_a.checksum(),
        checksum_b=vocab_b.checksum(),
    )


def embed_topic(phi_row, index_map: np.ndarray, union_size: int) -> np.ndarray:
    """Copy a topic's term mass through the index map; zero elsewhere."""
    phi_row = np.asarray(phi_row, dtype=np.float64)
    index_map = np.asarray(index_map, dtype=np.int64)
    if phi_row.shape[0] != index_map.shape[0]:
        raise NumericError(
            f"distribution has {phi_row.shape[0]} entries, map has {index_map.shape[0]}"
        )
    if index_map.size and (index_map.min() < 0 or index_map.max() >= union_size):
        raise NumericError("index map exceeds the union vocabulary size")
    if abs(phi_row.sum() - 1.0) > _NORM_TOL:
        raise NumericError(f"topic distribution does not sum to 1 (sum={phi_row.sum()!r})")
    out = np.zeros(union_size, dtype=np.float64)
    out[index_map] = phi_row
    return out


def cross_distances(
    model_a: TopicDistributions,
    model_b: TopicDistributions,
    uv: UnionVocab,
) -> DistanceMatrix:
    """Jensen-Shannon divergence between every (topic A, topic B) pair."""
    if model_a.vocab_ref != uv.checksum_a:
        raise DataError("model A vocabulary checksum does not match the union vocabulary")
    if model_b.vocab_ref != uv.checksum_b:
        raise DataError("model B vocabulary checksum does not match the union vocabulary")
    union_size = len(uv)
    emb_a = [embed_topic(row, uv.map_a, union_size) for row in model_a.phi]
    emb_b = [embed_topic(row, uv.map_b, union_size) for row in model_b.phi]
    values = np.zeros((len(emb_a), len(emb_b)), dtype=np.float64)
    for i, pa in enumerate(emb_a):
        for j, pb in enumerate(emb_b):
            values[i, j] = js_divergence(pa, pb)
    return DistanceMatrix(values=values, kind="rect_cross")


def alignment_summary(
    cross: DistanceMatrix,
    threshold: float = 0.5,
    top_n: int | None = None,
    echo_rule: str = "grand_mean",
) -> AlignmentResult:
    """Marginal averages, closest-pair selection, and echo flags.

    Pairs are either all entries strictly below ``threshold`` or, when
    ``top_n`` is given, the top_n smallest entries (ties broken by row then
    column index). A topic is echo-flagged when its marginal mean distance is
    below the grand mean of all entries ("grand_mean" rule) or within the
    lowest quartile of its side's marginal means ("quartile" rule).
    """
    if not (0.0 <= threshold <= 1.0):
        raise ConfigError(f"alignment threshold must be in [0, 1], got {threshold}")
    if top_n is not None and top_n < 1:
        raise ConfigError(f"alignment top_n must be >= 1, got {top_n}")
    if echo_rule not in ("grand_mean", "quartile"):
        raise ConfigError(f"unknown echo rule {echo_rule!r}")
    values = cross.values
    row_means = values.mean(axis=1)
    col_means = values.mean(axis=0)
    grand_mean = float(values.mean())

    entries = sorted(
        (float(values[i, j]), i, j)
        for i in range(cross.rows)
        for j in range(cross.cols)
    )
    if top_n is not None:
        chosen = entries[:top_n]
    else:
        chosen = [e for e in entries if e[0] < threshold]
    pairs = [(i, j, d) for d, i, j in chosen]

    if echo_rule == "grand_mean":
        echo_a = [bool(m < grand_mean) for m in row_means]
        echo_b = [bool(m < grand_mean) for m in col_means]
    else:
        cut_a = float(np.quantile(row_means, 0.25))
        cut_b = float(np.quantile(col_means, 0.25))
        echo_a = [bool(m <= cut_a) for m in row_means]
        echo_b = [bool(m <= cut_b) for m in col_means]

    return AlignmentResult(
        cross=cross,
        row_means=row_means,
        col_means=col_means,
        grand_mean=grand_mean,
        pairs=pairs,
        echo_a=echo_a,
        echo_b=echo_b,
        threshold=threshold,
        top_n=top_n,
    )


# -- Persistence ------------------------------------------------------------------

def write_alignment_json(result: AlignmentResult, path: Path | str) -> None:
    payload = {
        "matrix": [[float(x) for x in row] for row in result.cross.values],
        "row_means": [float(x) for x in result.row_means],
        "col_means": [float(x) for x in result.col_means],
        "grand_mean": result.grand_mean,
        "pairs": [{"a": i, "b": j, "distance": d} for i, j, d in result.pairs],
        "echo_a": result.echo_a,
        "echo_b": result.echo_b,
        "threshold": result.threshold,
        "top_n": result.top_n,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_alignment_json(path: Path | str) -> AlignmentResult:
    payload = json.loads(Path(path).read_text("utf-8"))
    return AlignmentResult(
        cross=DistanceMatrix(values=np.asarray(payload["matrix"], dtype=np.float64), kind="rect_cross"),
        row_means=np.asarray(payload["row_means"], dtype=np.float64),
        col_means=np.asarray(payload["col_means"], dtype=np.float64),
        grand_mean=float(payload["grand_mean"]),
        pairs=[(int(p["a"]), int(p["b"]), float(p["distance"])) for p in payload["pairs"]],
        echo_a=[bool(x) for x in payload["echo_a"]],
        echo_b=[bool(x) for x in payload["echo_b"]],
        threshold=float(payload["threshold"]),
        top_n=None if payload["top_n"] is None else int(payload["top_n"]),
    )


def write_cross_matrix_tsv(
    result: AlignmentResult,
    labels_a: list[str],
    labels_b: list[str],
    path: Path | str,
) -> None:
    """Cross matrix TSV with the marginal means appended as an extra row/column."""
    if len(labels_a) != result.cross.rows or len(labels_b) != result.cross.cols:
        raise NumericError("label counts do not match the cross matrix shape")
    header = ["topic"] + list(labels_b) + ["row_mean"]
    rows = []
    for i in range(result.cross.rows):
        rows.append(
            [labels_a[i]]
            + [fmt(x) for x in result.cross.values[i]]
            + [fmt(result.row_means[i])]
        )
    rows.append(
        ["col_mean"] + [fmt(x) for x in result.col_means] + [fmt(result.grand_mean)]
    )
    write_tsv(path, header, rows)
