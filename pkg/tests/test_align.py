import numpy as np
import pytest

from topicalign.align import (
    alignment_summary,
    cross_distances,
    embed_topic,
    read_alignment_json,
    union_vocabulary,
    write_alignment_json,
    write_cross_matrix_tsv,
)
from topicalign.errors import ConfigError, DataError, NumericError
from topicalign.geometry import DistanceMatrix, js_divergence, topic_distance_matrix
from topicalign.ioutil import read_tsv
from topicalign.topicmodel import fit
from topicalign.vocab import Vocabulary, build_vocabulary, count_matrix

from conftest import make_corpus
from test_geometry import jsd_oracle


def vocab_of(terms):
    terms = sorted(terms)
    return Vocabulary(
        terms=terms,
        index={t: i for i, t in enumerate(terms)},
        doc_freq=[1] * len(terms),
        min_df=1,
        stoplist_hash="",
    )


def fitted(texts, k=2, seed=5, iterations=40):
    corpus = make_corpus(texts)
    vocab = build_vocabulary(corpus, set(), 1)
    matrix = count_matrix(corpus, vocab)
    return vocab, matrix, fit(matrix, k, iterations=iterations, seed=seed)


class TestUnionVocabulary:
    def test_overlapping(self):
        uv = union_vocabulary(vocab_of(["a1", "b1"]), vocab_of(["b1", "c1"]))
        assert uv.terms == ["a1", "b1", "c1"]
        assert uv.shared_count == 1
        assert len(uv) == 2 + 2 - uv.shared_count

    def test_disjoint(self):
        uv = union_vocabulary(vocab_of(["a1", "a2"]), vocab_of(["b1", "b2"]))
        assert uv.shared_count == 0
        assert len(uv) == 4

    def test_maps_are_injective_and_correct(self):
        va, vb = vocab_of(["a1", "c1"]), vocab_of(["b1", "c1"])
        uv = union_vocabulary(va, vb)
        assert [uv.terms[i] for i in uv.map_a] == va.terms
        assert [uv.terms[i] for i in uv.map_b] == vb.terms
        assert len(set(uv.map_a.tolist())) == len(uv.map_a)

    def test_rejects_noncanonical(self):
        bad = Vocabulary(terms=["b1", "a1"], index={"b1": 0, "a1": 1},
                         doc_freq=[1, 1], min_df=1, stoplist_hash="")
        with pytest.raises(DataError):
            union_vocabulary(bad, vocab_of(["c1"]))


class TestEmbedTopic:
    def test_identity_map_pads_with_zeros(self):
        out = embed_topic([0.4, 0.6], np.array([0, 1]), 4)
        assert out.tolist() == [0.4, 0.6, 0.0, 0.0]

    def test_mass_conserved(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 10))
            row = rng.dirichlet(np.full(n, 0.5))
            positions = rng.choice(n + 5, size=n, replace=False)
            out = embed_topic(row, positions, n + 5)
            assert abs(out.sum() - row.sum()) <= 1e-12

    def test_hand_placed(self):
        out = embed_topic([0.2, 0.3, 0.5], np.array([4, 0, 2]), 5)
        assert out.tolist() == [0.3, 0.0, 0.5, 0.0, 0.2]

    def test_map_out_of_range(self):
        with pytest.raises(NumericError):
            embed_topic([0.5, 0.5], np.array([0, 7]), 5)

    def test_unnormalized_rejected(self):
        with pytest.raises(NumericError):
            embed_topic([0.5, 0.2], np.array([0, 1]), 3)


class TestCrossDistances:
    def test_self_comparison_zero_diagonal_and_equals_intra(self, rng):
        texts = [" ".join(f"w{int(rng.integers(8))}" for _ in range(15)) for _ in range(20)]
        vocab, matrix, model = fitted(texts, k=3)
        uv = union_vocabulary(vocab, vocab)
        cross = cross_distances(model, model, uv)
        intra = topic_distance_matrix(model)
        assert np.abs(np.diag(cross.values)).max() <= 1e-12
        assert np.abs(cross.values - intra.values).max() <= 1e-12

    def test_disjoint_vocabularies_all_ones(self):
        va, _, ma = fitted(["aa bb aa bb", "bb aa aa"], k=2, iterations=20)
        vb, _, mb = fitted(["cc dd cc", "dd cc dd dd"], k=2, iterations=20)
        uv = union_vocabulary(va, vb)
        cross = cross_distances(ma, mb, uv)
        assert np.abs(cross.values - 1.0).max() <= 1e-12

    def test_matches_embed_plus_jsd_oracle(self, rng):
        texts_a = [" ".join(f"a{int(rng.integers(5))}" for _ in range(10)) for _ in range(12)]
        texts_b = [" ".join(rng.choice(["a0", "a1", "b0", "b1"]) for _ in range(10)) for _ in range(12)]
        va, _, ma = fitted(texts_a, k=2)
        vb, _, mb = fitted(texts_b, k=2)
        uv = union_vocabulary(va, vb)
        cross = cross_distances(ma, mb, uv)
        for i in range(2):
            for j in range(2):
                pa = embed_topic(ma.phi[i], uv.map_a, len(uv))
                pb = embed_topic(mb.phi[j], uv.map_b, len(uv))
                assert cross.values[i, j] == pytest.approx(jsd_oracle(pa, pb), abs=1e-13)

    def test_checksum_mismatch(self, rng):
        texts = [" ".join(f"w{int(rng.integers(6))}" for _ in range(10)) for _ in range(10)]
        va, _, ma = fitted(texts, k=2)
        uv = union_vocabulary(va, va)
        ma.vocab_ref = "tampered"
        with pytest.raises(DataError):
            cross_distances(ma, ma, uv)


class TestAlignmentSummary:
    def test_threshold_selection(self):
        values = np.array([[0.1, 0.9, 0.4], [0.8, 0.45, 0.95]])
        cross = DistanceMatrix(values=values, kind="rect_cross")
        result = alignment_summary(cross, threshold=0.5)
        assert [(i, j) for i, j, _ in result.pairs] == [(0, 0), (0, 2), (1, 1)]
        assert [d for _, _, d in result.pairs] == sorted(d for _, _, d in result.pairs)

    def test_top_n_selection(self, rng):
        values = rng.uniform(0.0, 1.0, size=(6, 8))
        cross = DistanceMatrix(values=values, kind="rect_cross")
        result = alignment_summary(cross, threshold=0.5, top_n=23)
        assert len(result.pairs) == 23
        dists = [d for _, _, d in result.pairs]
        assert dists == sorted(dists)
        oracle = sorted(
            (float(values[i, j]), i, j) for i in range(6) for j in range(8)
        )[:23]
        assert [(i, j) for _, i, j in oracle] == [(i, j) for i, j, _ in result.pairs]

    def test_hand_arithmetic_example(self):
        values = np.array([[0.1, 0.9], [0.8, 0.9]])
        cross = DistanceMatrix(values=values, kind="rect_cross")
        result = alignment_summary(cross, threshold=0.5)
        np.testing.assert_allclose(result.row_means, [0.5, 0.85])
        np.testing.assert_allclose(result.col_means, [0.45, 0.9])
        assert result.grand_mean == pytest.approx(0.675)
        assert result.echo_a == [True, False]
        assert result.echo_b == [True, False]

    def test_threshold_superset_property(self, rng):
        values = rng.uniform(0.0, 1.0, size=(5, 5))
        cross = DistanceMatrix(values=values, kind="rect_cross")
        small = {(i, j) for i, j, _ in alignment_summary(cross, threshold=0.3).pairs}
        large = {(i, j) for i, j, _ in alignment_summary(cross, threshold=0.7).pairs}
        assert small <= large

    def test_echo_invariant_under_opposite_permutation(self, rng):
        values = rng.uniform(0.0, 1.0, size=(4, 6))
        perm = rng.permutation(6)
        base = alignment_summary(DistanceMatrix(values=values, kind="rect_cross"), 0.5)
        permuted = alignment_summary(
            DistanceMatrix(values=values[:, perm], kind="rect_cross"), 0.5
        )
        assert base.echo_a == permuted.echo_a
        assert [base.echo_b[p] for p in perm] == permuted.echo_b

    def test_quartile_rule(self, rng):
        values = rng.uniform(0.0, 1.0, size=(8, 8))
        cross = DistanceMatrix(values=values, kind="rect_cross")
        result = alignment_summary(cross, 0.5, echo_rule="quartile")
        cut = np.quantile(values.mean(axis=1), 0.25)
        assert result.echo_a == [bool(m <= cut) for m in values.mean(axis=1)]

    def test_validation(self):
        cross = DistanceMatrix(values=np.array([[0.2]]), kind="rect_cross")
        with pytest.raises(ConfigError):
            alignment_summary(cross, threshold=1.5)
        with pytest.raises(ConfigError):
            alignment_summary(cross, threshold=0.5, top_n=0)
        with pytest.raises(ConfigError):
            alignment_summary(cross, threshold=0.5, echo_rule="nope")


class TestAlignmentIO:
    def test_json_roundtrip(self, rng, tmp_path):
        values = rng.uniform(0.0, 1.0, size=(3, 4))
        result = alignment_summary(DistanceMatrix(values=values, kind="rect_cross"), 0.5)
        path = tmp_path / "alignment.json"
        write_alignment_json(result, path)
        loaded = read_alignment_json(path)
        np.testing.assert_array_equal(loaded.cross.values, result.cross.values)
        assert loaded.pairs == result.pairs
        assert loaded.echo_a == result.echo_a
        assert loaded.grand_mean == result.grand_mean

    def test_matrix_tsv_margins(self, rng, tmp_path):
        values = rng.uniform(0.0, 1.0, size=(3, 2))
        result = alignment_summary(DistanceMatrix(values=values, kind="rect_cross"), 0.5)
        path = tmp_path / "cross.tsv"
        write_cross_matrix_tsv(result, ["S1", "S2", "S3"], ["D1", "D2"], path)
        header, rows = read_tsv(path)
        assert header == ["topic", "D1", "D2", "row_mean"]
        assert rows[-1][0] == "col_mean"
        # recompute the margins from the matrix cells in the file
        cells = np.array([[float(x) for x in row[1:3]] for row in rows[:-1]])
        for i, row in enumerate(rows[:-1]):
            assert float(row[3]) == pytest.approx(cells[i].mean(), rel=1e-6)
        for j in range(2):
            assert float(rows[-1][1 + j]) == pytest.approx(cells[:, j].mean(), rel=1e-6)
        assert float(rows[-1][3]) == pytest.approx(cells.mean(), rel=1e-6)
