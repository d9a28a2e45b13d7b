"""Dynamic character networks with sentiment and topic signals from chaptered narratives."""
from .corpus import (
    Chapter,
    CharacterRoster,
    Corpus,
    RosterEntry,
    SegmentationConfig,
    Timeline,
    UnitRef,
    detect_appearances,
    parse_narrative,
    tokenize,
)
from .network import (
    CharacterNetwork,
    CoAppearanceNetwork,
    CommunityPartition,
    GrowthSeries,
    StageAnnotation,
    build_network,
    centralities,
    detect_communities,
    detect_stages,
    growth_series,
    path_statistics,
)
from .sentiment import (
    SentimentLexicon,
    SentimentScorer,
    aggregate_spi,
    community_cosentiments,
    cosentiment,
    score_chapter,
)
from .sequence import SequenceBundler, book_vectors, bundle_sequences, sequence_snapshots

__version__ = "0.1.0"
