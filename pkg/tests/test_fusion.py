"""Fused retrieval tests: score arithmetic, exactness against an exhaustive
oracle, degenerate weights, and missing-modality handling."""

import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsearch.documents import DocumentStore, VideoDocument
from vsearch.embeddings import Embedding, ReferenceEmbedder
from vsearch.errors import EmptyCorpus
from vsearch.fusion import FusionConfig, fuse, fused_search_embedded
from vsearch.hnsw import HnswIndex, IndexParams

from oracles.ranking import fused_scores_oracle


class TestFuse:
    def test_halfway(self):
        assert fuse(0.5, 1.0, 0.0) == 0.5

    def test_endpoints(self):
        assert fuse(0.0, 0.7, 0.3) == 0.3
        assert fuse(1.0, 0.7, 0.3) == 0.7

    @given(
        st.floats(0, 1),
        st.floats(-1, 1, allow_nan=False),
        st.floats(-1, 1, allow_nan=False),
    )
    @settings(max_examples=300, deadline=None)
    def test_matches_formula(self, alpha, v, a):
        assert fuse(alpha, v, a) == alpha * v + (1.0 - alpha) * a


class TestFusionConfig:
    def test_defaults(self):
        cfg = FusionConfig()
        assert (cfg.alpha, cfg.m_cand, cfg.k) == (0.5, 100, 10)

    def test_validation(self):
        with pytest.raises(ValueError):
            FusionConfig(alpha=1.5)
        with pytest.raises(ValueError):
            FusionConfig(alpha=-0.1)
        with pytest.raises(ValueError):
            FusionConfig(k=0)
        with pytest.raises(ValueError):
            FusionConfig(k=20, m_cand=10)


def _unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _build_corpus(tmp_path, n, dim, seed, missing_every=0):
    """Store + indexes with n docs; every missing_every-th doc drops a modality."""
    rng = np.random.default_rng(seed)
    store = DocumentStore(str(tmp_path / "docs"))
    params = IndexParams(m=8, ef_construction=40, ef_search=40, seed=3)
    vision = HnswIndex(dim, params)
    audio = HnswIndex(dim, params)
    oracle_docs = {}
    for i in range(n):
        vid = f"v{i:04d}"
        drop = missing_every and i % missing_every == 0
        v_vec = _unit(rng, dim)
        a_vec = _unit(rng, dim)
        if drop and i % (2 * missing_every) == 0:
            vision_emb = Embedding(np.zeros(dim), missing=True)
            oracle_docs[vid] = (None, a_vec)
        elif drop:
            a_tmp = a_vec
            vision_emb = Embedding(v_vec)
            oracle_docs[vid] = (v_vec, None)
        else:
            vision_emb = Embedding(v_vec)
            oracle_docs[vid] = (v_vec, a_vec)
        audio_missing = drop and i % (2 * missing_every) != 0
        audio_emb = (
            Embedding(np.zeros(dim), missing=True) if audio_missing else Embedding(a_vec)
        )
        doc = VideoDocument(
            video_id=vid,
            vision=vision_emb,
            audio=audio_emb,
            index_text=f"doc {i}",
            transcription=f"doc {i}",
            description="",
            language="en",
            n_used=0,
        )
        store.add(doc)
        if not vision_emb.missing:
            vision.insert(vid, vision_emb.values)
        if not audio_emb.missing:
            audio.insert(vid, audio_emb.values)
    return store, vision, audio, oracle_docs


class TestFusedSearch:
    def test_empty_corpus(self, tmp_path):
        store = DocumentStore(str(tmp_path / "docs"))
        params = IndexParams(m=4, ef_construction=8, ef_search=8, seed=0)
        with pytest.raises(EmptyCorpus):
            fused_search_embedded(
                Embedding(np.ones(8) / np.sqrt(8)),
                store,
                HnswIndex(8, params),
                HnswIndex(8, params),
                FusionConfig(k=1, m_cand=1),
            )

    def test_matches_exhaustive_oracle_exactly(self, tmp_path):
        dim = 24
        store, vision, audio, oracle_docs = _build_corpus(tmp_path, 120, dim, seed=11)
        rng = np.random.default_rng(99)
        for qi in range(25):
            q = _unit(rng, dim)
            alpha = rng.choice([0.0, 0.25, 0.5, 0.75, 1.0])
            cfg = FusionConfig(alpha=float(alpha), m_cand=120, k=10)
            got = fused_search_embedded(
                Embedding(q), store, vision, audio, cfg, ef_search=120
            )
            want = fused_scores_oracle(oracle_docs, q, float(alpha))[:10]
            assert [r.video_id for r in got] == [w[0] for w in want], f"query {qi}"
            for r, w in zip(got, want):
                # loop-sum oracle differs from numpy dot in the last ulp
                assert r.fused_score == pytest.approx(w[1], abs=1e-12)
                assert r.vision_score == pytest.approx(w[2], abs=1e-12)
                assert r.audio_score == pytest.approx(w[3], abs=1e-12)
                # bitwise invariant: scores come from the float64 store
                doc = store.get(r.video_id)
                v_exact = 0.0 if doc.vision.missing else float(doc.vision.values @ q)
                a_exact = 0.0 if doc.audio.missing else float(doc.audio.values @ q)
                assert r.vision_score == v_exact
                assert r.audio_score == a_exact
                assert r.fused_score == float(alpha) * v_exact + (1.0 - float(alpha)) * a_exact

    def test_missing_modalities_respected(self, tmp_path):
        dim = 24
        store, vision, audio, oracle_docs = _build_corpus(
            tmp_path, 90, dim, seed=5, missing_every=3
        )
        rng = np.random.default_rng(7)
        q = _unit(rng, dim)
        got = fused_search_embedded(
            Embedding(q), store, vision, audio, FusionConfig(alpha=0.5, m_cand=90, k=90),
            ef_search=90,
        )
        want = fused_scores_oracle(oracle_docs, q, 0.5)
        assert [r.video_id for r in got] == [w[0] for w in want]
        by_id = {r.video_id: r for r in got}
        for vid, (v_vec, a_vec) in oracle_docs.items():
            if v_vec is None:
                assert by_id[vid].vision_score == 0.0
            if a_vec is None:
                assert by_id[vid].audio_score == 0.0

    def test_alpha_one_is_vision_order(self, tmp_path):
        dim = 16
        store, vision, audio, oracle_docs = _build_corpus(tmp_path, 60, dim, seed=2)
        q = _unit(np.random.default_rng(1), dim)
        got = fused_search_embedded(
            Embedding(q), store, vision, audio, FusionConfig(alpha=1.0, m_cand=60, k=60),
            ef_search=60,
        )
        scores = np.array([r.vision_score for r in got])
        assert np.all(np.diff(scores) <= 0)
        for r in got:
            assert r.fused_score == r.vision_score

    def test_rank_field_positions(self, tmp_path):
        dim = 16
        store, vision, audio, _ = _build_corpus(tmp_path, 30, dim, seed=8)
        q = _unit(np.random.default_rng(3), dim)
        got = fused_search_embedded(
            Embedding(q), store, vision, audio, FusionConfig(k=10, m_cand=30), ef_search=30
        )
        assert [r.rank for r in got] == list(range(1, 11))

    def test_k_larger_than_corpus(self, tmp_path):
        dim = 16
        store, vision, audio, _ = _build_corpus(tmp_path, 5, dim, seed=4)
        q = _unit(np.random.default_rng(6), dim)
        got = fused_search_embedded(
            Embedding(q), store, vision, audio, FusionConfig(k=10, m_cand=50), ef_search=50
        )
        assert len(got) == 5

    def test_text_query_path(self, tmp_path):
        """End to end through the embedder: planted doc wins at alpha=0."""
        store = DocumentStore(str(tmp_path / "docs"))
        params = IndexParams(m=4, ef_construction=16, ef_search=16, seed=0)
        vision = HnswIndex(32, params)
        audio = HnswIndex(32, params)
        ref = ReferenceEmbedder(32)
        texts = {"hit": "volcano erupts tonight", "miss1": "cat video", "miss2": "stock chart"}
        for vid, text in texts.items():
            emb = ref.embed_text(text)
            store.add(
                VideoDocument(
                    video_id=vid,
                    vision=Embedding(np.zeros(32), missing=True),
                    audio=emb,
                    index_text=text,
                    transcription=text,
                    description="",
                    language="en",
                    n_used=0,
                )
            )
            audio.insert(vid, emb.values)
        got = fused_search_embedded(
            ref.embed_text("volcano erupts tonight"),
            store,
            vision,
            audio,
            FusionConfig(alpha=0.0, k=3, m_cand=3),
        )
        assert got[0].video_id == "hit"
        assert got[0].audio_score == pytest.approx(1.0, abs=1e-12)

    def test_tie_broken_by_id(self, tmp_path):
        store = DocumentStore(str(tmp_path / "docs"))
        params = IndexParams(m=4, ef_construction=8, ef_search=8, seed=0)
        vision = HnswIndex(4, params)
        audio = HnswIndex(4, params)
        shared = np.array([1.0, 0.0, 0.0, 0.0])
        for vid in ("zz", "aa", "mm"):
            store.add(
                VideoDocument(
                    video_id=vid,
                    vision=Embedding(shared),
                    audio=Embedding(np.zeros(4), missing=True),
                    index_text="x",
                    transcription="x",
                    description="",
                    language="en",
                    n_used=0,
                )
            )
            vision.insert(vid, shared)
        got = fused_search_embedded(
            Embedding(shared), store, vision, audio, FusionConfig(k=3, m_cand=3)
        )
        assert [r.video_id for r in got] == ["aa", "mm", "zz"]
