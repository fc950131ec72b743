"""Document ingestion, tokenization, and seed-query matching.

A corpus is an ordered list of text records: publication titles+abstracts on
the supply side, or policy question texts on the demand side (stored in the
``abstract`` field either way). Ingestion is JSONL, one record per line with
fields ``{id, title, abstract, year, categories[], cluster}``.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DataError

logger = logging.getLogger(__name__)

# Lowercase alphanumeric runs (underscore excluded); length >= 2, not purely
# numeric. This is the single tokenization rule used everywhere downstream.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

TokenStream = list[str]

YEAR_MIN, YEAR_MAX = 1900, 2100


@dataclass
class Document:
    """One text record with its metadata."""

    id: str
    title: str = ""
    abstract: str = ""
    year: int | None = None
    categories: list[str] = field(default_factory=list)
    cluster_id: str | None = None
    seed_flag: bool = False

    @property
    def has_abstract(self) -> bool:
        return bool(self.abstract.strip())


@dataclass
class Corpus:
    """An ordered, duplicate-free collection of documents.

    Treated as read-only after construction except for ``seed_flag``, which
    :func:`match_seed` refreshes in place.
    """

    name: str
    documents: list[Document]
    provenance_note: str = ""

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    def empty_text_ids(self) -> list[str]:
        """Ids of records that carry neither title nor abstract text."""
        return [d.id for d in self.documents if not (d.title.strip() or d.abstract.strip())]


def tokenize(text: str) -> TokenStream:
    """Lowercase and split on non-alphanumerics; drop 1-char and all-digit tokens."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2 and not t.isdigit()]


def document_tokens(doc: Document) -> TokenStream:
    """Canonical token stream of a document: title tokens then abstract tokens."""
    return tokenize(doc.title) + tokenize(doc.abstract)


def _coerce_year(value, path: Path, lineno: int) -> int | None:
    if value is None:
        return None
    try:
        year = int(value)
    except (TypeError, ValueError):
        raise DataError(f"{path}: line {lineno}: year {value!r} is not an integer")
    if not YEAR_MIN <= year <= YEAR_MAX:
        raise DataError(
            f"{path}: line {lineno}: year {year} outside [{YEAR_MIN}, {YEAR_MAX}]"
        )
    return year


def parse_documents(path: Path | str, format: str = "jsonl") -> Corpus:
    """Read a corpus file, preserving record order.

    Records missing both title and abstract are kept (flagged via
    :meth:`Corpus.empty_text_ids`); malformed lines and duplicate ids abort
    with the offending line numbers.
    """
    if format != "jsonl":
        raise ConfigError(f"unsupported corpus format: {format!r} (expected 'jsonl')")
    path = Path(path)
    if not path.exists():
        raise DataError(f"corpus file not found: {path}")

    documents: list[Document] = []
    first_line_of: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON ({exc.msg})")
            if not isinstance(record, dict):
                raise DataError(f"{path}: line {lineno}: record is not a JSON object")
            raw_id = record.get("id")
            if raw_id is None or str(raw_id) == "":
                raise DataError(f"{path}: line {lineno}: missing document id")
            doc_id = str(raw_id)
            if doc_id in first_line_of:
                raise DataError(
                    f"{path}: duplicate document id {doc_id!r} on lines "
                    f"{first_line_of[doc_id]} and {lineno}"
                )
            first_line_of[doc_id] = lineno
            cluster = record.get("cluster")
            documents.append(
                Document(
                    id=doc_id,
                    title=str(record.get("title") or ""),
                    abstract=str(record.get("abstract") or ""),
                    year=_coerce_year(record.get("year"), path, lineno),
                    categories=[str(c) for c in (record.get("categories") or [])],
                    cluster_id=None if cluster is None else str(cluster),
                )
            )

    corpus = Corpus(name=path.stem, documents=documents, provenance_note=f"ingested from {path.name}")
    empty = corpus.empty_text_ids()
    if empty:
        logger.info("%s: %d record(s) with no text retained", path.name, len(empty))
    return corpus


def write_jsonl(corpus: Corpus, path: Path | str) -> None:
    """Serialize a corpus in the same schema it was ingested from."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in corpus.documents:
            fh.write(
                json.dumps(
                    {
                        "id": doc.id,
                        "title": doc.title,
                        "abstract": doc.abstract,
                        "year": doc.year,
                        "categories": doc.categories,
                        "cluster": doc.cluster_id,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def match_seed(corpus: Corpus, pattern: str) -> set[str]:
    """Tag documents whose title or abstract contains a token starting with the
    pattern's prefix. Only trailing-wildcard patterns (``prefix*``) are supported.

    Refreshes ``seed_flag`` on every document and returns the matching ids.
    """
    if not pattern.endswith("*") or pattern.count("*") != 1 or len(pattern) < 2:
        raise DataError(
            f"unsupported seed pattern {pattern!r}: expected a nonempty prefix "
            "followed by a single trailing '*'"
        )
    prefix = pattern[:-1].lower()
    matched: set[str] = set()
    for doc in corpus.documents:
        hit = any(tok.startswith(prefix) for tok in document_tokens(doc))
        doc.seed_flag = hit
        if hit:
            matched.add(doc.id)
    return matched


def filter_with_text(corpus: Corpus) -> Corpus:
    """Keep only documents with a nonempty abstract, preserving order."""
    kept = [d for d in corpus.documents if d.has_abstract]
    return Corpus(name=corpus.name, documents=kept, provenance_note=corpus.provenance_note)


def load_seed_ids(path: Path | str) -> set[str]:
    """Read an explicit seed-id file: one document id per line."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"seed-id file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return {line.strip() for line in fh if line.strip()}


def write_seed_ids(seeds: set[str], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc_id in sorted(seeds):
            fh.write(doc_id + "\n")
