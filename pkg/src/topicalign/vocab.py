"""Modeling vocabulary and sparse document-term count matrix.

The vocabulary keeps every non-stopword term that occurs in at least
``min_df`` distinct documents, in lexicographic order so indices (and hence
fitted models) are reproducible across runs and platforms.
"""
from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .corpus import Corpus, document_tokens
from .errors import ConfigError, DataError, NumericError
from .ioutil import read_tsv, write_tsv

logger = logging.getLogger(__name__)


@dataclass
class Vocabulary:
    terms: list[str]            # lexicographic order, index 0..V-1
    index: dict[str, int]
    doc_freq: list[int]         # aligned with terms
    min_df: int
    stoplist_hash: str

    def __len__(self) -> int:
        return len(self.terms)

    def checksum(self) -> str:
        """Content hash binding fitted models to the exact term list."""
        h = hashlib.sha256()
        for term in self.terms:
            h.update(term.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


@dataclass
class DocTermMatrix:
    """Sparse nonnegative count matrix in (doc, term, count) triples.

    Rows align with ``doc_ids``; documents with no in-vocabulary token are
    kept as empty rows so downstream indices stay aligned with the corpus.
    """

    doc_ids: list[str]
    doc_idx: np.ndarray        # int32, one entry per triple
    term_idx: np.ndarray       # int32
    counts: np.ndarray         # int64, all positive
    n_docs: int
    n_terms: int
    doc_lengths: np.ndarray    # int64, per-document in-vocabulary token totals
    vocab_checksum: str

    @property
    def n_tokens(self) -> int:
        return int(self.doc_lengths.sum())

    def empty_doc_ids(self) -> list[str]:
        return [self.doc_ids[d] for d in range(self.n_docs) if self.doc_lengths[d] == 0]

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_docs, self.n_terms), dtype=np.int64)
        np.add.at(dense, (self.doc_idx, self.term_idx), self.counts)
        return dense


def load_stoplist(path: Path | str) -> set[str]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"stoplist file not found: {path}")
    terms: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            term = line.strip().lower()
            if term and not term.startswith("#"):
                terms.add(term)
    return terms


def load_default_stoplist() -> set[str]:
    text = resources.files("topicalign.data").joinpath("stopwords_en.txt").read_text("utf-8")
    return {
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    }


def stoplist_checksum(stoplist: set[str]) -> str:
    h = hashlib.sha256()
    for term in sorted(stoplist):
        h.update(term.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def build_vocabulary(corpus: Corpus, stoplist: set[str], min_df: int) -> Vocabulary:
    """Collect terms that are not stopwords and occur in >= min_df documents."""
    if min_df < 1:
        raise ConfigError(f"min_df must be >= 1, got {min_df}")
    df: Counter[str] = Counter()
    for doc in corpus.documents:
        df.update(set(document_tokens(doc)))
    terms = sorted(t for t, n in df.items() if n >= min_df and t not in stoplist)
    if not terms:
        raise DataError(
            f"vocabulary is empty at min_df={min_df}; lower min_df or check the stoplist"
        )
    return Vocabulary(
        terms=terms,
        index={t: i for i, t in enumerate(terms)},
        doc_freq=[df[t] for t in terms],
        min_df=min_df,
        stoplist_hash=stoplist_checksum(stoplist),
    )


def count_matrix(corpus: Corpus, vocab: Vocabulary) -> DocTermMatrix:
    """Count in-vocabulary term occurrences per document (title + abstract)."""
    doc_rows: list[int] = []
    term_cols: list[int] = []
    values: list[int] = []
    lengths = np.zeros(len(corpus), dtype=np.int64)
    index = vocab.index
    for d, doc in enumerate(corpus.documents):
        counts = Counter(
            index[t] for t in document_tokens(doc) if t in index
        )
        for t in sorted(counts):
            doc_rows.append(d)
            term_cols.append(t)
            values.append(counts[t])
        lengths[d] = sum(counts.values())

    matrix = DocTermMatrix(
        doc_ids=corpus.ids(),
        doc_idx=np.asarray(doc_rows, dtype=np.int32),
        term_idx=np.asarray(term_cols, dtype=np.int32),
        counts=np.asarray(values, dtype=np.int64),
        n_docs=len(corpus),
        n_terms=len(vocab),
        doc_lengths=lengths,
        vocab_checksum=vocab.checksum(),
    )
    empty = matrix.empty_doc_ids()
    if empty:
        logger.info(
            "%s: %d document(s) with no in-vocabulary tokens kept as empty rows",
            corpus.name,
            len(empty),
        )
    return matrix


# -- Persistence --------------------------------------------------------------

def write_vocabulary(vocab: Vocabulary, path: Path | str) -> None:
    """TSV export: (index, term, doc_freq) plus a JSON sidecar with the rest."""
    path = Path(path)
    write_tsv(
        path,
        ["index", "term", "doc_freq"],
        ([str(i), t, str(n)] for i, (t, n) in enumerate(zip(vocab.terms, vocab.doc_freq))),
    )
    meta = {
        "min_df": vocab.min_df,
        "stoplist_hash": vocab.stoplist_hash,
        "checksum": vocab.checksum(),
    }
    with open(path.with_suffix(".meta.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_vocabulary(path: Path | str) -> Vocabulary:
    path = Path(path)
    header, rows = read_tsv(path)
    if header != ["index", "term", "doc_freq"]:
        raise DataError(f"{path}: unexpected vocabulary header {header}")
    terms = [r[1] for r in rows]
    doc_freq = [int(r[2]) for r in rows]
    meta_path = path.with_suffix(".meta.json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text("utf-8"))
        min_df, stop_hash = int(meta["min_df"]), str(meta["stoplist_hash"])
    else:
        min_df, stop_hash = 1, ""
    vocab = Vocabulary(
        terms=terms,
        index={t: i for i, t in enumerate(terms)},
        doc_freq=doc_freq,
        min_df=min_df,
        stoplist_hash=stop_hash,
    )
    if terms != sorted(terms):
        raise DataError(f"{path}: vocabulary terms are not in canonical order")
    return vocab


def write_matrix(matrix: DocTermMatrix, directory: Path | str, prefix: str = "matrix") -> list[Path]:
    """Sparse TSV triples plus a doc-id sidecar and a small JSON meta file."""
    directory = Path(directory)
    entries_path = directory / f"{prefix}.tsv"
    docs_path = directory / f"{prefix}_docs.tsv"
    meta_path = directory / f"{prefix}_meta.json"
    write_tsv(
        entries_path,
        ["doc_index", "term_index", "count"],
        (
            [str(int(d)), str(int(t)), str(int(c))]
            for d, t, c in zip(matrix.doc_idx, matrix.term_idx, matrix.counts)
        ),
    )
    write_tsv(
        docs_path,
        ["doc_index", "doc_id"],
        ([str(i), doc_id] for i, doc_id in enumerate(matrix.doc_ids)),
    )
    meta = {
        "n_docs": matrix.n_docs,
        "n_terms": matrix.n_terms,
        "vocab_checksum": matrix.vocab_checksum,
    }
    meta_path.parent.mkdir(parents=True, exist_ok=True)
    with open(meta_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [entries_path, docs_path, meta_path]


def read_matrix(directory: Path | str, prefix: str = "matrix") -> DocTermMatrix:
    directory = Path(directory)
    header, rows = read_tsv(directory / f"{prefix}.tsv")
    if header != ["doc_index", "term_index", "count"]:
        raise DataError(f"{directory}: unexpected matrix header {header}")
    _, doc_rows = read_tsv(directory / f"{prefix}_docs.tsv")
    doc_ids = [r[1] for r in doc_rows]
    meta = json.loads((directory / f"{prefix}_meta.json").read_text("utf-8"))
    n_docs, n_terms = int(meta["n_docs"]), int(meta["n_terms"])
    if len(doc_ids) != n_docs:
        raise DataError(f"{directory}: doc sidecar lists {len(doc_ids)} ids, meta says {n_docs}")

    doc_idx = np.asarray([int(r[0]) for r in rows], dtype=np.int32)
    term_idx = np.asarray([int(r[1]) for r in rows], dtype=np.int32)
    counts = np.asarray([int(r[2]) for r in rows], dtype=np.int64)
    if len(doc_idx) and (doc_idx.min() < 0 or doc_idx.max() >= n_docs):
        raise NumericError(f"{directory}: matrix doc index out of bounds")
    if len(term_idx) and (term_idx.min() < 0 or term_idx.max() >= n_terms):
        raise NumericError(f"{directory}: matrix term index out of bounds")
    if len(counts) and counts.min() <= 0:
        raise NumericError(f"{directory}: matrix counts must be positive")
    lengths = np.zeros(n_docs, dtype=np.int64)
    np.add.at(lengths, doc_idx, counts)
    return DocTermMatrix(
        doc_ids=doc_ids,
        doc_idx=doc_idx,
        term_idx=term_idx,
        counts=counts,
        n_docs=n_docs,
        n_terms=n_terms,
        doc_lengths=lengths,
        vocab_checksum=str(meta.get("vocab_checksum", "")),
    )
