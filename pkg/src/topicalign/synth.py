"""Synthetic corpus generation for demos and tests.

Documents are drawn from a planted topic model, so recovery quality can be
checked against the generating distributions. The demo writer produces a
paired supply/demand dataset plus a ready-to-run pipeline configuration.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .corpus import Corpus, Document, write_jsonl


def make_terms(prefix: str, n: int) -> list[str]:
    """Synthetic term strings: lowercase, alphanumeric, never purely numeric."""
    width = max(2, len(str(n - 1)))
    return [f"{prefix}{i:0{width}d}" for i in range(n)]


def generate_lda_corpus(
    name: str,
    terms: list[str],
    n_docs: int,
    k_topics: int,
    doc_length: int | tuple[int, int],
    seed: int,
    theta_conc: float = 0.5,
    phi_conc: float = 0.08,
) -> tuple[Corpus, np.ndarray, np.ndarray]:
    """Draw a corpus from a planted LDA model.

    Returns (corpus, true topic-term rows, true document-topic rows). Document
    text goes into the abstract field; titles stay empty so the planted
    vocabulary is exactly the token universe.
    """
    rng = np.random.default_rng(seed)
    v = len(terms)
    phi = rng.dirichlet(np.full(v, phi_conc), size=k_topics)
    theta = rng.dirichlet(np.full(k_topics, theta_conc), size=n_docs)
    cum_phi = np.cumsum(phi, axis=1)
    documents = []
    for d in range(n_docs):
        if isinstance(doc_length, tuple):
            length = int(rng.integers(doc_length[0], doc_length[1] + 1))
        else:
            length = int(doc_length)
        topic_counts = rng.multinomial(length, theta[d])
        words: list[str] = []
        for k in range(k_topics):
            if topic_counts[k] == 0:
                continue
            draws = np.searchsorted(cum_phi[k], rng.random(topic_counts[k]))
            words.extend(terms[int(w)] for w in np.minimum(draws, v - 1))
        documents.append(
            Document(id=f"{name}-{d:05d}", title="", abstract=" ".join(words))
        )
    corpus = Corpus(name=name, documents=documents, provenance_note=f"synthetic seed={seed}")
    return corpus, phi, theta


_CATEGORY_CODES = ["NUT", "SUR", "BIO", "NEU", "PUB", "SOC", "PSY", "GEN", "CAR", "PED"]
_CATEGORY_GROUPS = {
    "NUT": "medical",
    "SUR": "medical",
    "CAR": "medical",
    "PED": "medical",
    "BIO": "biology",
    "NEU": "biology",
    "GEN": "biology",
    "PUB": "public_health",
    "SOC": "social",
    "PSY": "social",
}


def write_demo(
    outdir: Path | str,
    seed: int = 20240601,
    supply_docs: int = 2000,
    demand_docs: int = 222,
    supply_k: int = 20,
    demand_k: int = 30,
    iterations: int = 1000,
) -> Path:
    """Write the bundled synthetic dataset and its pipeline config; returns the
    config path.

    The supply corpus carries years, category codes, citation-cluster ids, a
    seed marker token ("obesity") with a per-cluster injection rate, and a few
    abstract-less records; the demand corpus mimics short policy questions over
    a vocabulary that partially overlaps the supply vocabulary.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    shared_terms = make_terms("mid", 500)
    supply_terms = sorted(make_terms("sup", 1500) + shared_terms)
    demand_terms = sorted(shared_terms + make_terms("dem", 300))

    supply, _, supply_theta = generate_lda_corpus(
        "supply", supply_terms, supply_docs, supply_k, (40, 60), int(rng.integers(2**31)),
        theta_conc=0.4, phi_conc=0.05,
    )
    demand, _, _ = generate_lda_corpus(
        "demand", demand_terms, demand_docs, demand_k, (30, 80), int(rng.integers(2**31)),
        theta_conc=0.3, phi_conc=0.06,
    )

    # Supply metadata: clusters with decreasing seed-marker rates, topic-biased
    # years (drift for the trends table) and category codes (for profiles).
    n_clusters = 40
    cluster_rates = np.concatenate(
        [np.full(8, 0.95), np.full(8, 0.60), np.full(8, 0.35), np.full(8, 0.15), np.full(8, 0.02)]
    )
    top_topic = supply_theta.argmax(axis=1)
    assignment_rows: list[tuple[str, str]] = []
    for d, doc in enumerate(supply.documents):
        cluster = int(rng.integers(n_clusters))
        doc.cluster_id = f"c{cluster:02d}"
        assignment_rows.append((doc.id, doc.cluster_id))
        if rng.random() < cluster_rates[cluster]:
            doc.title = "obesity " + " ".join(doc.abstract.split()[:3])
        else:
            doc.title = " ".join(doc.abstract.split()[:4])
        drift = top_topic[d] / max(supply_k - 1, 1)
        doc.year = 2000 + int(np.clip(rng.normal(4 + 8 * drift, 2.5), 0, 13))
        first = _CATEGORY_CODES[int(top_topic[d]) % len(_CATEGORY_CODES)]
        doc.categories = [first]
        if rng.random() < 0.35:
            second = _CATEGORY_CODES[int(rng.integers(len(_CATEGORY_CODES)))]
            if second != first:
                doc.categories.append(second)
        if rng.random() < 0.03:
            doc.abstract = ""

    for doc in demand.documents:
        doc.title = " ".join(doc.abstract.split()[:5])
        doc.year = 2009 + int(rng.integers(7))

    write_jsonl(supply, outdir / "supply.jsonl")
    write_jsonl(demand, outdir / "demand.jsonl")
    with open(outdir / "clusters.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for doc_id, cluster_id in assignment_rows:
            fh.write(f"{doc_id}\t{cluster_id}\n")
    with open(outdir / "grouping.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for code in _CATEGORY_CODES:
            fh.write(f"{code}\t{_CATEGORY_GROUPS[code]}\n")

    config = {
        "paths": {
            "supply_corpus": "supply.jsonl",
            "demand_corpus": "demand.jsonl",
            "cluster_assignment": "clusters.tsv",
            "category_grouping": "grouping.tsv",
            "stoplist": None,
            "seed_ids": None,
            "output_dir": "out",
        },
        "seed_pattern": "obes*",
        "delineation": {"alpha": 0.3, "keep_seed_documents": True},
        "supply": {
            "k": supply_k,
            "alpha_dir": None,
            "beta_dir": 0.01,
            "iterations": iterations,
            "seed": 101,
            "min_df": 3,
        },
        "demand": {
            "k": demand_k,
            "alpha_dir": None,
            "beta_dir": 0.01,
            "iterations": iterations,
            "seed": 202,
            "min_df": 2,
        },
        "relevance": {"lambda": 0.6, "top_n": 20},
        "alignment": {"threshold": 0.5, "top_n": None},
        "analytics": {"cooccurrence_t": 0.25, "core_t": 0.5, "characteristic_t": 0.85},
        "zoom": {
            "topics": [0, 1],
            "t": 0.25,
            "k": 10,
            "iterations": max(iterations // 2, 1),
            "seed": 303,
            "min_df": 3,
        },
        "report": {"maps": True, "alignment": True},
    }
    config_path = outdir / "config.json"
    with open(config_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(config, fh, indent=2)
        fh.write("\n")
    return config_path
