"""TF-IDF construction, NMF topic extraction and character topical states."""
from .nmf import MultiplicativeNMF, TopicModel, nnmf, topic_keywords
from .states import (
    Phase,
    TopicalState,
    TransferLabel,
    check_phases,
    classify_transfers,
    community_topics,
    pearson,
    phase_analysis,
    phase_states,
    topical_state,
)
from .tfidf import TfidfMatrixBuilder, Vocabulary, build_tfidf

__all__ = [
    "MultiplicativeNMF", "TopicModel", "nnmf", "topic_keywords",
    "Phase", "TopicalState", "TransferLabel", "check_phases", "classify_transfers",
    "community_topics", "pearson", "phase_analysis", "phase_states", "topical_state",
    "TfidfMatrixBuilder", "Vocabulary", "build_tfidf",
]
