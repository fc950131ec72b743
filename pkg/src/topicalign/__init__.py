"""topicalign: topic-model mapping and cross-corpus alignment toolkit."""

from .align import (
    AlignmentResult,
    UnionVocab,
    alignment_summary,
    cross_distances,
    embed_topic,
    union_vocabulary,
)
from .analytics import (
    CharacteristicDocs,
    CooccurrenceGraph,
    ProfileMatrix,
    PseudoTopics,
    SpecializationStats,
    TrendTable,
    category_profiles,
    characteristic_documents,
    cluster_pseudo_topics,
    cooccurrence_graph,
    extract_subcorpus,
    specialization_stats,
    temporal_trends,
)
from .corpus import (
    Corpus,
    Document,
    filter_with_text,
    load_seed_ids,
    match_seed,
    parse_documents,
    tokenize,
    write_jsonl,
)
from .delineation import (
    ClusterAssignment,
    DelineationConfig,
    cluster_seed_fractions,
    expand_corpus,
    read_assignment,
)
from .errors import ConfigError, DataError, NumericError
from .geometry import (
    DistanceMatrix,
    Layout,
    RelevanceConfig,
    js_divergence,
    pcoa_layout,
    relevant_terms,
    topic_distance_matrix,
)
from .pipeline import PipelineConfig, load_config, run_pipeline, run_zoom
from .topicmodel import (
    Priors,
    TopicModel,
    TopicWeights,
    corpus_topic_weights,
    fit,
    load_model,
    log_likelihood,
    save_model,
)
from .vocab import (
    DocTermMatrix,
    Vocabulary,
    build_vocabulary,
    count_matrix,
    load_default_stoplist,
    load_stoplist,
)

__version__ = "0.1.0"
