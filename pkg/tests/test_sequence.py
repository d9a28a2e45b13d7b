import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from narranet.corpus import SegmentationConfig, parse_narrative
from narranet.network import build_network
from narranet.resources import lesmiserables_dir
from narranet.sequence import (
    BookCompositionVector,
    Sequence,
    SequenceBundler,
    attach_sentiment,
    book_vectors,
    bundle_sequences,
    cosine,
    jaccard,
    sequence_snapshots,
)
from oracles import bundling_oracle, cosine_oracle
from synthetic import make_novel

MARKERS = SegmentationConfig.load(lesmiserables_dir() / "segmentation.yaml")


def vecs(*rows):
    return [
        BookCompositionVector((1, i + 1), (i + 1,), np.asarray(r, dtype=float))
        for i, r in enumerate(rows)
    ]


def _two_book_corpus():
    raw = ("VOLUME I\nBOOK FIRST\nCHAPTER I\nx\nCHAPTER II\ny\n"
           "BOOK SECOND\nCHAPTER I\nz\nBOOK THIRD\nCHAPTER I\nw\n")
    markers = SegmentationConfig(
        chapter_pattern=MARKERS.chapter_pattern,
        book_pattern=MARKERS.book_pattern,
        volume_pattern=MARKERS.volume_pattern,
    )
    return parse_narrative(raw, markers)


def test_book_vectors_fixture():
    corpus = _two_book_corpus()
    tl = {"A": [1], "B": [2, 3], "C": [3]}
    out = book_vectors(tl, corpus)
    assert [v.book for v in out] == [(1, 1), (1, 2)]  # third book has nobody
    assert out[0].vector.tolist() == [1, 1, 0]
    assert out[1].vector.tolist() == [0, 1, 1]
    assert out[0].chapters == (1, 2)
    counted = book_vectors({"A": [1], "B": [1, 2]}, corpus, weighting="count")
    assert counted[0].vector.tolist() == [1, 2]


def test_book_vectors_on_synthetic_novel():
    text, tl, _ = make_novel(seed=11, n_volumes=2, books_per_volume=3, empty_books=(2,))
    corpus = parse_narrative(text, MARKERS)
    out = book_vectors(tl, corpus)
    assert len(out) == 5
    assert (1, 2) not in {v.book for v in out}
    assert all(v.vector.shape == (len(tl),) and v.vector.any() for v in out)


def test_hand_cosine_bundling():
    b = SequenceBundler().fit(vecs((1, 0), (0, 1), (0, 1)))
    assert b.similarities_.tolist() == [0.0, 1.0]
    assert b.threshold_ == 0.5
    assert b.labels_.tolist() == [1, 2, 2]
    assert [s.books for s in b.sequences_] == [((1, 1),), ((1, 2), (1, 3))]
    assert b.get_params() == {"threshold": "auto", "similarity": "cosine"}


def test_identical_vectors_one_sequence():
    seqs = bundle_sequences(vecs((1, 1, 0), (1, 1, 0), (1, 1, 0)))
    assert len(seqs) == 1 and seqs[0].chapters == (1, 2, 3)


def test_single_book():
    assert len(bundle_sequences(vecs((1, 0)))) == 1


def test_jaccard():
    assert jaccard(np.array([1, 1, 0.0]), np.array([0, 1, 1.0])) == pytest.approx(1 / 3)
    seqs = bundle_sequences(vecs((1, 1, 0), (0, 1, 1), (0, 0, 1)), similarity="jaccard")
    assert [s.index for s in seqs] == list(range(1, len(seqs) + 1))


binary_rows = st.lists(
    st.lists(st.integers(0, 1), min_size=5, max_size=5).filter(any), min_size=1, max_size=12
)


@settings(max_examples=80)
@given(binary_rows)
def test_bundling_matches_union_find_oracle(rows):
    b = SequenceBundler().fit(vecs(*rows))
    sims, thr, groups = bundling_oracle(rows)
    np.testing.assert_allclose(b.similarities_, sims, atol=1e-12)
    assert b.threshold_ == pytest.approx(thr)
    got = [[i for i, lab in enumerate(b.labels_) if lab == k] for k in range(1, b.labels_.max() + 1)]
    assert got == groups
    assert all(0 <= s <= 1 + 1e-12 for s in b.similarities_)


@settings(max_examples=60)
@given(binary_rows, st.floats(0, 1), st.floats(0, 1))
def test_threshold_monotone_and_partition(rows, t1, t2):
    lo, hi = sorted((t1, t2))
    a = bundle_sequences(vecs(*rows), threshold=lo)
    b = bundle_sequences(vecs(*rows), threshold=hi)
    assert len(b) >= len(a)
    chapters = [c for s in a for c in s.chapters]
    assert chapters == list(range(1, len(rows) + 1))


def test_cosine_matches_oracle():
    u, v = np.array([1.0, 2, 0, 3]), np.array([0.0, 1, 1, 1])
    assert cosine(u, v) == pytest.approx(cosine_oracle(u, v))
    assert cosine(np.zeros(3), np.ones(3)) == 0


def test_attach_sentiment_and_sign():
    seqs = attach_sentiment([Sequence(1, ((1, 1),), (1, 2)), Sequence(2, ((1, 2),), (3,))],
                            {1: 0.2, 2: -0.1, 3: -0.4})
    assert seqs[0].mean_spi == pytest.approx(0.05) and seqs[0].sign == "positive"
    assert seqs[1].sign == "negative"
    assert Sequence.from_json(seqs[0].to_json()) == seqs[0]


def test_snapshot_fractions():
    tl = {"A": [1, 2], "B": [1], "C": [1], "D": [2], "E": [3]}
    cos = {("A", "B"): 0.1, ("A", "C"): 0.2, ("B", "C"): -0.3, ("A", "D"): 0.0}
    seqs = [Sequence(1, ((1, 1),), (1,)), Sequence(2, ((1, 2),), (2,)), Sequence(3, ((1, 3),), (3,))]
    snaps = sequence_snapshots(seqs, tl, cos)
    assert (snaps[0].pos_fraction, snaps[0].neg_fraction) == pytest.approx((2 / 3, 1 / 3))
    assert snaps[1].signs == {("A", "D"): 0}
    assert (snaps[2].network.n_edges, snaps[2].pos_fraction, snaps[2].neg_fraction) == (0, 0, 0)
    full = build_network(tl)
    for s in snaps:
        assert set(s.network.edges) <= set(full.edges)


def test_local_snapshot_mode():
    tl = {"A": [1, 2], "B": [1, 2]}
    cos = {("A", "B"): 0.5}
    seqs = [Sequence(1, ((1, 1),), (1,)), Sequence(2, ((1, 2),), (2,))]
    snaps = sequence_snapshots(seqs, tl, cos, spi_by_chapter={1: -0.2, 2: 0.3}, baseline=0.0)
    assert snaps[0].signs[("A", "B")] == -1 and snaps[1].signs[("A", "B")] == 1
    with pytest.raises(ValueError):
        sequence_snapshots(seqs, tl, cos, spi_by_chapter={1: 0, 2: 0})
