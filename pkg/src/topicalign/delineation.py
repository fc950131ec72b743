"""Seed-corpus expansion through citation micro-clusters.

The analysis corpus is grown from the seed set by pulling in every
micro-cluster whose fraction of seed documents reaches a threshold alpha.
The clustering itself is an input artifact (TSV of doc_id -> cluster_id).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus, filter_with_text
from .errors import ConfigError, DataError


@dataclass
class ClusterAssignment:
    """Document-to-cluster mapping plus the per-cluster member lists."""

    doc_to_cluster: dict[str, str]
    members: dict[str, list[str]]

    @classmethod
    def from_pairs(cls, pairs, source: str = "<pairs>") -> "ClusterAssignment":
        doc_to_cluster: dict[str, str] = {}
        members: dict[str, list[str]] = {}
        first_pos: dict[str, int] = {}
        for pos, (doc_id, cluster_id) in enumerate(pairs, start=1):
            doc_id, cluster_id = str(doc_id), str(cluster_id)
            if doc_id in doc_to_cluster:
                raise DataError(
                    f"{source}: document {doc_id!r} assigned twice "
                    f"(entries {first_pos[doc_id]} and {pos})"
                )
            first_pos[doc_id] = pos
            doc_to_cluster[doc_id] = cluster_id
            members.setdefault(cluster_id, []).append(doc_id)
        return cls(doc_to_cluster=doc_to_cluster, members=members)

    def member_counts(self) -> dict[str, int]:
        return {c: len(ids) for c, ids in self.members.items()}

    def __len__(self) -> int:
        return len(self.doc_to_cluster)


@dataclass
class DelineationConfig:
    alpha: float
    keep_seed_documents: bool = True

    def validate(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise ConfigError(f"delineation alpha must be in (0, 1], got {self.alpha}")


def read_assignment(path: Path | str) -> ClusterAssignment:
    """Read a headerless two-column TSV: doc_id <tab> cluster_id."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"cluster assignment file not found: {path}")
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise DataError(f"{path}: line {lineno}: expected 'doc_id<TAB>cluster_id'")
            pairs.append((parts[0], parts[1]))
    return ClusterAssignment.from_pairs(pairs, source=str(path))


def write_assignment(assignment: ClusterAssignment, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc_id, cluster_id in assignment.doc_to_cluster.items():
            fh.write(f"{doc_id}\t{cluster_id}\n")


def cluster_seed_fractions(assignment: ClusterAssignment, seeds: set[str]) -> dict[str, float]:
    """Per-cluster fraction of members that belong to the seed set.

    Clusters without any seed member are reported with fraction 0. Seeds with
    no cluster assignment contribute to no cluster.
    """
    if not assignment.doc_to_cluster:
        raise DataError("empty cluster assignment")
    return {
        cluster_id: sum(1 for d in ids if d in seeds) / len(ids)
        for cluster_id, ids in assignment.members.items()
    }


def expand_corpus(
    full_corpus: Corpus,
    seeds: set[str],
    assignment: ClusterAssignment,
    config: DelineationConfig,
) -> Corpus:
    """Delineate the analysis corpus: seed documents plus all members of every
    cluster whose seed fraction is at least alpha, then drop abstract-less docs.

    Ties at exactly alpha are included. Document order follows the full corpus.
    """
    config.validate()
    fractions = cluster_seed_fractions(assignment, seeds)
    included = sorted(c for c, f in fractions.items() if f >= config.alpha)

    wanted: set[str] = set(seeds) if config.keep_seed_documents else set()
    for cluster_id in included:
        wanted.update(assignment.members[cluster_id])

    known = set(full_corpus.ids())
    missing = sorted(wanted - known)
    if missing:
        shown = ", ".join(missing[:50])
        more = f" (+{len(missing) - 50} more)" if len(missing) > 50 else ""
        raise DataError(f"delineation references ids absent from the corpus: {shown}{more}")

    selected = [d for d in full_corpus.documents if d.id in wanted]
    result = Corpus(
        name=full_corpus.name,
        documents=selected,
        provenance_note=(
            f"delineated: alpha={config.alpha:g}, clusters_included={len(included)}, "
            f"keep_seed_documents={config.keep_seed_documents}, "
            f"selected={len(selected)} of {len(full_corpus)}"
        ),
    )
    return filter_with_text(result)
