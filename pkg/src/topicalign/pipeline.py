"""End-to-end pipeline: one JSON config in, a directory of stage artifacts out.

Stages run in a fixed order (ingest, delineate, fit, map, align, analytics,
report) and communicate only through files, so the pipeline can be restarted
from any stage directory. A manifest listing every artifact with its sha256
checksum is written at the end of a run; with fixed seeds, reruns are
byte-identical.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from . import align as align_mod
from . import analytics as analytics_mod
from . import geometry, report, topicmodel
from .corpus import (
    Corpus,
    filter_with_text,
    load_seed_ids,
    match_seed,
    parse_documents,
    write_jsonl,
    write_seed_ids,
)
from .delineation import DelineationConfig, expand_corpus, read_assignment
from .errors import ConfigError, DataError
from .geometry import RelevanceConfig
from .ioutil import fmt, sha256_file, write_tsv
from .topicmodel import Priors, corpus_topic_weights, load_model, save_model
from .vocab import (
    build_vocabulary,
    count_matrix,
    load_default_stoplist,
    load_stoplist,
    read_matrix,
    read_vocabulary,
    write_matrix,
    write_vocabulary,
)

logger = logging.getLogger(__name__)

STAGES = ["ingest", "delineate", "fit", "map", "align", "analytics", "report"]


@dataclass
class FitParams:
    k: int
    alpha_dir: float | None
    beta_dir: float
    iterations: int
    seed: int
    min_df: int

    def priors(self) -> Priors:
        if self.alpha_dir is None:
            return Priors(alpha_dir=50.0 / self.k, beta_dir=self.beta_dir)
        return Priors(alpha_dir=self.alpha_dir, beta_dir=self.beta_dir)

    def validate(self, side: str) -> None:
        if self.k < 1:
            raise ConfigError(f"{side}.k must be >= 1, got {self.k}")
        if self.iterations < 1:
            raise ConfigError(f"{side}.iterations must be >= 1, got {self.iterations}")
        if self.min_df < 1:
            raise ConfigError(f"{side}.min_df must be >= 1, got {self.min_df}")
        self.priors().validate()


@dataclass
class PipelineConfig:
    supply_corpus: Path
    demand_corpus: Path
    cluster_assignment: Path | None
    category_grouping: Path | None
    stoplist: Path | None
    seed_ids: Path | None
    output_dir: Path
    seed_pattern: str
    delineation: DelineationConfig
    supply: FitParams
    demand: FitParams
    relevance: RelevanceConfig
    align_threshold: float
    align_top_n: int | None
    cooccurrence_t: float
    core_t: float
    characteristic_t: float
    zoom_topics: list[int]
    zoom_t: float
    zoom: FitParams
    report_maps: bool
    report_alignment: bool


def _resolve(base: Path, value: str | None) -> Path | None:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def load_config(
    path: Path | str,
    out_override: Path | str | None = None,
    seed_override: int | None = None,
) -> PipelineConfig:
    """Parse and validate the pipeline configuration JSON."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})")
    base = path.parent

    try:
        paths = raw["paths"]
        supply_corpus = _resolve(base, paths["supply_corpus"])
        demand_corpus = _resolve(base, paths["demand_corpus"])
        output_dir = _resolve(base, paths.get("output_dir", "out"))

        def fit_params(section: dict, default_min_df: int) -> FitParams:
            return FitParams(
                k=int(section["k"]),
                alpha_dir=None if section.get("alpha_dir") is None else float(section["alpha_dir"]),
                beta_dir=float(section.get("beta_dir", 0.01)),
                iterations=int(section.get("iterations", 1000)),
                seed=int(section.get("seed", 0)),
                min_df=int(section.get("min_df", default_min_df)),
            )

        delineation_raw = raw.get("delineation", {})
        relevance_raw = raw.get("relevance", {})
        alignment_raw = raw.get("alignment", {})
        analytics_raw = raw.get("analytics", {})
        zoom_raw = raw.get("zoom", {})
        report_raw = raw.get("report", {})
        cfg = PipelineConfig(
            supply_corpus=supply_corpus,
            demand_corpus=demand_corpus,
            cluster_assignment=_resolve(base, paths.get("cluster_assignment")),
            category_grouping=_resolve(base, paths.get("category_grouping")),
            stoplist=_resolve(base, paths.get("stoplist")),
            seed_ids=_resolve(base, paths.get("seed_ids")),
            output_dir=output_dir,
            seed_pattern=str(raw.get("seed_pattern", "obes*")),
            delineation=DelineationConfig(
                alpha=float(delineation_raw.get("alpha", 0.1)),
                keep_seed_documents=bool(delineation_raw.get("keep_seed_documents", True)),
            ),
            supply=fit_params(raw["supply"], default_min_df=100),
            demand=fit_params(raw["demand"], default_min_df=1),
            relevance=RelevanceConfig(
                lambda_=float(relevance_raw.get("lambda", 0.6)),
                top_n=int(relevance_raw.get("top_n", 20)),
            ),
            align_threshold=float(alignment_raw.get("threshold", 0.5)),
            align_top_n=None if alignment_raw.get("top_n") is None else int(alignment_raw["top_n"]),
            cooccurrence_t=float(analytics_raw.get("cooccurrence_t", 0.25)),
            core_t=float(analytics_raw.get("core_t", 0.5)),
            characteristic_t=float(analytics_raw.get("characteristic_t", 0.85)),
            zoom_topics=[int(k) for k in zoom_raw.get("topics", [])],
            zoom_t=float(zoom_raw.get("t", 0.25)),
            zoom=FitParams(
                k=int(zoom_raw.get("k", 10)),
                alpha_dir=None if zoom_raw.get("alpha_dir") is None else float(zoom_raw["alpha_dir"]),
                beta_dir=float(zoom_raw.get("beta_dir", 0.01)),
                iterations=int(zoom_raw.get("iterations", 1000)),
                seed=int(zoom_raw.get("seed", 0)),
                min_df=int(zoom_raw.get("min_df", raw["supply"].get("min_df", 100))),
            ),
            report_maps=bool(report_raw.get("maps", True)),
            report_alignment=bool(report_raw.get("alignment", True)),
        )
    except KeyError as exc:
        raise ConfigError(f"{path}: missing config key {exc}")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed config value ({exc})")

    if out_override is not None:
        cfg.output_dir = Path(out_override)
    if seed_override is not None:
        cfg.supply.seed = int(seed_override)
        cfg.demand.seed = int(seed_override) + 1
        cfg.zoom.seed = int(seed_override) + 2

    for label, p in [("supply_corpus", cfg.supply_corpus), ("demand_corpus", cfg.demand_corpus)]:
        if not p.exists():
            raise ConfigError(f"configured {label} does not exist: {p}")
    for label, p in [
        ("cluster_assignment", cfg.cluster_assignment),
        ("category_grouping", cfg.category_grouping),
        ("stoplist", cfg.stoplist),
        ("seed_ids", cfg.seed_ids),
    ]:
        if p is not None and not p.exists():
            raise ConfigError(f"configured {label} does not exist: {p}")

    cfg.delineation.validate()
    cfg.supply.validate("supply")
    cfg.demand.validate("demand")
    cfg.relevance.validate()
    if not (0.0 <= cfg.align_threshold <= 1.0):
        raise ConfigError(f"alignment threshold must be in [0, 1], got {cfg.align_threshold}")
    for name, t in [
        ("cooccurrence_t", cfg.cooccurrence_t),
        ("core_t", cfg.core_t),
        ("characteristic_t", cfg.characteristic_t),
        ("zoom.t", cfg.zoom_t),
    ]:
        if not (0.0 < t < 1.0):
            raise ConfigError(f"analytics threshold {name} must be in (0, 1), got {t}")
    return cfg


def topic_labels(prefix: str, k: int) -> list[str]:
    return [f"{prefix}{i + 1}" for i in range(k)]


def _stoplist(cfg: PipelineConfig) -> set[str]:
    return load_stoplist(cfg.stoplist) if cfg.stoplist else load_default_stoplist()


# -- Stages -----------------------------------------------------------------------

def stage_ingest(cfg: PipelineConfig) -> None:
    out = cfg.output_dir / "ingest"
    supply = parse_documents(cfg.supply_corpus)
    demand = parse_documents(cfg.demand_corpus)
    if cfg.seed_ids is not None:
        seeds = load_seed_ids(cfg.seed_ids)
        unknown = seeds - set(supply.ids())
        if unknown:
            raise DataError(
                f"seed-id file lists {len(unknown)} id(s) absent from the supply corpus, "
                f"e.g. {sorted(unknown)[:5]}"
            )
        for doc in supply.documents:
            doc.seed_flag = doc.id in seeds
    else:
        seeds = match_seed(supply, cfg.seed_pattern)
    logger.info("ingest: %d supply docs, %d demand docs, %d seeds", len(supply), len(demand), len(seeds))
    write_jsonl(supply, out / "supply.jsonl")
    write_jsonl(demand, out / "demand.jsonl")
    write_seed_ids(seeds, out / "seed_ids.txt")


def stage_delineate(cfg: PipelineConfig) -> None:
    out = cfg.output_dir / "delineate"
    supply = parse_documents(cfg.output_dir / "ingest" / "supply.jsonl")
    seeds = load_seed_ids(cfg.output_dir / "ingest" / "seed_ids.txt")
    if cfg.cluster_assignment is not None:
        assignment = read_assignment(cfg.cluster_assignment)
        from .delineation import cluster_seed_fractions

        fractions = cluster_seed_fractions(assignment, seeds)
        delineated = expand_corpus(supply, seeds, assignment, cfg.delineation)
        write_tsv(
            out / "cluster_fractions.tsv",
            ["cluster_id", "members", "seed_fraction", "included"],
            (
                [
                    c,
                    str(len(assignment.members[c])),
                    fmt(fractions[c]),
                    str(int(fractions[c] >= cfg.delineation.alpha)),
                ]
                for c in sorted(fractions)
            ),
        )
    else:
        delineated = filter_with_text(supply)
        delineated.provenance_note = "no cluster assignment provided; text-filtered seed corpus"
        logger.info("delineate: no cluster assignment, using the filtered supply corpus")
    logger.info("delineate: %s", delineated.provenance_note)
    write_jsonl(delineated, out / "supply_delineated.jsonl")


def _fit_one(
    cfg: PipelineConfig, side: str, corpus: Corpus, params: FitParams, out: Path
) -> None:
    stop = _stoplist(cfg)
    vocab = build_vocabulary(corpus, stop, params.min_df)
    matrix = count_matrix(corpus, vocab)
    model = topicmodel.fit(
        matrix,
        params.k,
        priors=params.priors(),
        iterations=params.iterations,
        seed=params.seed,
    )
    write_jsonl(corpus, out / "corpus.jsonl")
    write_vocabulary(vocab, out / "vocab.tsv")
    write_matrix(matrix, out)
    save_model(model, out / "model", doc_ids=matrix.doc_ids)
    with open(out / "empty_docs.txt", "w", encoding="utf-8", newline="\n") as fh:
        for doc_id in matrix.empty_doc_ids():
            fh.write(doc_id + "\n")
    logger.info(
        "fit[%s]: D=%d V=%d tokens=%d K=%d", side, matrix.n_docs, matrix.n_terms,
        matrix.n_tokens, params.k,
    )


def stage_fit(cfg: PipelineConfig, side: str = "both") -> None:
    if side in ("supply", "both"):
        corpus = parse_documents(cfg.output_dir / "delineate" / "supply_delineated.jsonl")
        _fit_one(cfg, "supply", corpus, cfg.supply, cfg.output_dir / "fit" / "supply")
    if side in ("demand", "both"):
        corpus = filter_with_text(
            parse_documents(cfg.output_dir / "ingest" / "demand.jsonl")
        )
        _fit_one(cfg, "demand", corpus, cfg.demand, cfg.output_dir / "fit" / "demand")


def _map_one(cfg: PipelineConfig, side: str, prefix: str) -> None:
    fit_dir = cfg.output_dir / "fit" / side
    out = cfg.output_dir / "map" / side
    model, _ = load_model(fit_dir / "model")
    matrix = read_matrix(fit_dir)
    vocab = read_vocabulary(fit_dir / "vocab.tsv")
    labels = topic_labels(prefix, model.k_topics)

    dist = geometry.topic_distance_matrix(model)
    weights = corpus_topic_weights(model, matrix)
    layout = geometry.pcoa_layout(dist, weights)
    tables = [
        geometry.relevant_terms(model, matrix, vocab.terms, k, cfg.relevance)
        for k in range(model.k_topics)
    ]

    geometry.write_distance_matrix(dist, labels, labels, out / "distances.tsv")
    geometry.write_layout(layout, labels, out / "layout.tsv")
    write_tsv(
        out / "relevant_terms.tsv",
        ["topic", "rank", "term", "relevance"],
        (
            [labels[k], str(rank + 1), term, fmt(score)]
            for k in range(model.k_topics)
            for rank, (term, score) in enumerate(tables[k])
        ),
    )
    with open(out / "map_meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"stress": layout.stress, "labels": labels}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if cfg.report_maps:
        report.emit_map(
            layout,
            labels,
            out / "map.svg",
            out / "map.html",
            term_tables=tables,
            title=f"Topic map: {side}",
        )


def stage_map(cfg: PipelineConfig) -> None:
    _map_one(cfg, "supply", "S")
    _map_one(cfg, "demand", "D")


def stage_align(cfg: PipelineConfig) -> None:
    out = cfg.output_dir / "align"
    vocab_a = read_vocabulary(cfg.output_dir / "fit" / "supply" / "vocab.tsv")
    vocab_b = read_vocabulary(cfg.output_dir / "fit" / "demand" / "vocab.tsv")
    model_a, _ = load_model(cfg.output_dir / "fit" / "supply" / "model")
    model_b, _ = load_model(cfg.output_dir / "fit" / "demand" / "model")
    uv = align_mod.union_vocabulary(vocab_a, vocab_b)
    cross = align_mod.cross_distances(model_a, model_b, uv)
    result = align_mod.alignment_summary(
        cross, threshold=cfg.align_threshold, top_n=cfg.align_top_n
    )
    align_mod.write_alignment_json(result, out / "alignment.json")
    align_mod.write_cross_matrix_tsv(
        result,
        topic_labels("S", cross.rows),
        topic_labels("D", cross.cols),
        out / "cross_matrix.tsv",
    )
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "union_meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(
            {
                "union_size": len(uv),
                "shared_count": uv.shared_count,
                "supply_terms": len(vocab_a.terms),
                "demand_terms": len(vocab_b.terms),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    logger.info(
        "align: union=%d shared=%d pairs=%d", len(uv), uv.shared_count, len(result.pairs)
    )


def _analytics_one(cfg: PipelineConfig, side: str, prefix: str) -> None:
    fit_dir = cfg.output_dir / "fit" / side
    out = cfg.output_dir / "analytics" / side
    model, _ = load_model(fit_dir / "model")
    matrix = read_matrix(fit_dir)
    corpus = parse_documents(fit_dir / "corpus.jsonl")
    labels = topic_labels(prefix, model.k_topics)
    theta = model.theta

    graph = analytics_mod.cooccurrence_graph(theta, cfg.cooccurrence_t)
    analytics_mod.write_cooccurrence(graph, out / "cooccurrence.tsv")

    stats = analytics_mod.specialization_stats(theta, matrix.doc_lengths, core_t=cfg.core_t)
    with open(out / "specialization.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(
            {
                "frac_above_075": stats.frac_above_075,
                "frac_above_05": stats.frac_above_05,
                "core_threshold": stats.core_threshold,
                "core_sizes": stats.core_sizes,
                "n_docs": stats.n_docs,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")

    chars = analytics_mod.characteristic_documents(theta, cfg.characteristic_t, matrix.doc_lengths)
    analytics_mod.write_characteristic_docs(chars, labels, corpus, out / "characteristic_docs.tsv")
    with open(out / "characteristic_meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"coverage": chars.coverage, "threshold": chars.threshold}, fh, indent=2, sort_keys=True)
        fh.write("\n")

    years = [doc.year for doc in corpus.documents]
    if any(y is not None for y in years):
        trends = analytics_mod.temporal_trends(theta, matrix, years)
        analytics_mod.write_trends(trends, labels, out / "trends.tsv")
        analytics_mod.write_trends(trends, labels, out / "trends_relative.tsv", relative=True)
    else:
        logger.info("analytics[%s]: no years available, trends skipped", side)

    grouping: dict[str, str]
    if cfg.category_grouping is not None:
        grouping = {}
        with open(cfg.category_grouping, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 2:
                    raise DataError(
                        f"{cfg.category_grouping}: line {lineno}: expected 'category<TAB>group'"
                    )
                grouping[parts[0]] = parts[1]
    else:
        observed = {c for doc in corpus.documents for c in doc.categories}
        grouping = {c: c for c in sorted(observed)}
    profiles = analytics_mod.category_profiles(
        theta, matrix, [doc.categories for doc in corpus.documents], grouping
    )
    analytics_mod.write_profiles(profiles, labels, out / "profiles.tsv")

    if side == "supply" and cfg.cluster_assignment is not None:
        vocab = read_vocabulary(fit_dir / "vocab.tsv")
        assignment = read_assignment(cfg.cluster_assignment)
        pseudo = analytics_mod.cluster_pseudo_topics(corpus, assignment, vocab)
        uv = align_mod.union_vocabulary(vocab, vocab)
        cross = align_mod.cross_distances(pseudo, model, uv)
        geometry.write_distance_matrix(
            cross, pseudo.cluster_ids, labels, out / "pseudo_topic_distances.tsv"
        )


def stage_analytics(cfg: PipelineConfig) -> None:
    _analytics_one(cfg, "supply", "S")
    _analytics_one(cfg, "demand", "D")


def stage_report(cfg: PipelineConfig) -> None:
    if not cfg.report_alignment:
        logger.info("report: alignment report disabled by config")
        return
    out = cfg.output_dir / "report"
    result = align_mod.read_alignment_json(cfg.output_dir / "align" / "alignment.json")
    _, layout_a = geometry.read_layout(cfg.output_dir / "map" / "supply" / "layout.tsv")
    _, layout_b = geometry.read_layout(cfg.output_dir / "map" / "demand" / "layout.tsv")
    report.emit_alignment_report(
        result,
        layout_a,
        layout_b,
        topic_labels("S", result.cross.rows),
        topic_labels("D", result.cross.cols),
        out / "alignment_report.html",
        out / "alignment_matrix.tsv",
        svg_path=out / "alignment_map.svg",
    )


_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "delineate": stage_delineate,
    "fit": stage_fit,
    "map": stage_map,
    "align": stage_align,
    "analytics": stage_analytics,
    "report": stage_report,
}


def write_manifest(
    cfg: PipelineConfig, status: str = "ok", failed_stage: str | None = None, error: str | None = None
) -> dict:
    """Checksum every artifact under the output directory into manifest.json."""
    entries = []
    if cfg.output_dir.exists():
        for path in sorted(cfg.output_dir.rglob("*")):
            if path.is_file() and path.name != "manifest.json":
                entries.append(
                    {
                        "path": str(path.relative_to(cfg.output_dir)),
                        "sha256": sha256_file(path),
                        "bytes": path.stat().st_size,
                    }
                )
    manifest = {"status": status, "artifacts": entries}
    if failed_stage is not None:
        manifest["status"] = "FAILED"
        manifest["failed_stage"] = failed_stage
        manifest["error"] = error or ""
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    with open(cfg.output_dir / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def run_pipeline(cfg: PipelineConfig, stage: str | None = None) -> dict:
    """Run all stages (or one) and write the artifact manifest."""
    if stage is not None and stage not in _STAGE_FUNCS:
        raise ConfigError(f"unknown stage {stage!r}; expected one of {STAGES}")
    selected = [stage] if stage is not None else STAGES
    for name in selected:
        logger.info("stage %s: start", name)
        try:
            _STAGE_FUNCS[name](cfg)
        except Exception as exc:
            write_manifest(cfg, failed_stage=name, error=f"{type(exc).__name__}: {exc}")
            raise
        logger.info("stage %s: done", name)
    return write_manifest(cfg)


def run_zoom(cfg: PipelineConfig) -> dict:
    """Extract the configured sub-corpus, refit it, and map it (separate from `run`)."""
    if not cfg.zoom_topics:
        raise ConfigError("zoom requires a nonempty zoom.topics list in the config")
    out = cfg.output_dir / "zoom"
    fit_dir = cfg.output_dir / "fit" / "supply"
    try:
        model, _ = load_model(fit_dir / "model")
        corpus = parse_documents(fit_dir / "corpus.jsonl")
        sub = analytics_mod.extract_subcorpus(
            corpus, model.theta, set(cfg.zoom_topics), cfg.zoom_t
        )
        write_jsonl(sub, out / "subcorpus.jsonl")
        with open(out / "zoom_meta.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(
                {
                    "topics": sorted(cfg.zoom_topics),
                    "threshold": cfg.zoom_t,
                    "parent_docs": len(corpus),
                    "subcorpus_docs": len(sub),
                    "provenance": sub.provenance_note,
                },
                fh,
                indent=2,
                sort_keys=True,
            )
            fh.write("\n")
        if len(sub) == 0:
            logger.warning("zoom: empty sub-corpus, refit skipped")
            return write_manifest(cfg)
        _fit_one(cfg, "zoom", sub, cfg.zoom, out)

        model_z, _ = load_model(out / "model")
        matrix_z = read_matrix(out)
        vocab_z = read_vocabulary(out / "vocab.tsv")
        labels = topic_labels("Z", model_z.k_topics)
        dist = geometry.topic_distance_matrix(model_z)
        weights = corpus_topic_weights(model_z, matrix_z)
        layout = geometry.pcoa_layout(dist, weights)
        tables = [
            geometry.relevant_terms(model_z, matrix_z, vocab_z.terms, k, cfg.relevance)
            for k in range(model_z.k_topics)
        ]
        geometry.write_distance_matrix(dist, labels, labels, out / "distances.tsv")
        geometry.write_layout(layout, labels, out / "layout.tsv")
        if cfg.report_maps:
            report.emit_map(
                layout, labels, out / "map.svg", out / "map.html",
                term_tables=tables, title="Topic map: zoom",
            )
    except Exception as exc:
        write_manifest(cfg, failed_stage="zoom", error=f"{type(exc).__name__}: {exc}")
        raise
    return write_manifest(cfg)
