"""Shared helpers for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

from topicalign.corpus import Corpus, Document


def make_corpus(
    abstracts: list[str],
    name: str = "test",
    titles: list[str] | None = None,
    years: list[int | None] | None = None,
    categories: list[list[str]] | None = None,
    clusters: list[str | None] | None = None,
) -> Corpus:
    docs = []
    for i, abstract in enumerate(abstracts):
        docs.append(
            Document(
                id=f"d{i:03d}",
                title=titles[i] if titles else "",
                abstract=abstract,
                year=years[i] if years else None,
                categories=categories[i] if categories else [],
                cluster_id=clusters[i] if clusters else None,
            )
        )
    return Corpus(name=name, documents=docs)


def greedy_tv_match(phi_a: np.ndarray, phi_b: np.ndarray) -> list[float]:
    """Greedily pair rows of two topic-term matrices by total-variation distance."""
    pairs = sorted(
        (0.5 * float(np.abs(phi_a[i] - phi_b[j]).sum()), i, j)
        for i in range(phi_a.shape[0])
        for j in range(phi_b.shape[0])
    )
    used_a: set[int] = set()
    used_b: set[int] = set()
    dists = []
    for d, i, j in pairs:
        if i not in used_a and j not in used_b:
            used_a.add(i)
            used_b.add(j)
            dists.append(d)
    return dists


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
