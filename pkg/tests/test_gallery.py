import json

import numpy as np
import pytest

from adathresh import (
    DimensionMismatchError,
    EmptyGalleryError,
    Gallery,
    GalleryFormatError,
    InputContractError,
    ZeroVectorError,
)


def two_identity_gallery() -> Gallery:
    g = Gallery(3)
    g.register("a", [1.0, 0.0, 0.0])
    g.register("a", [0.9, 0.1, 0.0])
    g.register("b", [0.0, 1.0, 0.0])
    return g


class TestRegister:
    def test_first_insertion(self):
        g = Gallery(3)
        g.register("a", [1, 0, 0])
        assert g.identities == ["a"]
        assert len(g) == 1
        assert g.change_counter == 1

    def test_ids_independent_of_content(self):
        g = Gallery(3)
        i1 = g.register("a", [1, 0, 0])
        i2 = g.register("a", [1, 0, 0])
        assert i1 != i2
        assert len(g.embeddings_of("a")) == 2

    def test_dimension_mismatch(self):
        g = Gallery(3)
        with pytest.raises(DimensionMismatchError):
            g.register("a", [1, 0])

    def test_zero_vector_rejected(self):
        g = Gallery(3)
        with pytest.raises(ZeroVectorError):
            g.register("a", [0, 0, 0])

    def test_non_finite_rejected(self):
        g = Gallery(3)
        with pytest.raises(InputContractError):
            g.register("a", [1.0, float("nan"), 0.0])

    def test_empty_label_rejected(self):
        g = Gallery(3)
        with pytest.raises(InputContractError):
            g.register("", [1, 0, 0])

    def test_registrations_counter(self):
        g = two_identity_gallery()
        assert g.registrations_since_adapt == 3
        g.mark_adapted()
        assert g.registrations_since_adapt == 0
        g.register("c", [0, 0, 1])
        assert g.registrations_since_adapt == 1

    def test_vectors_stored_as_ingested(self):
        g = Gallery(2)
        g.register("a", [3.0, 4.0])
        stored = g.embeddings_of("a")[0].vector
        assert stored.tolist() == [3.0, 4.0]

    def test_tiny_dimension_rejected(self):
        with pytest.raises(InputContractError):
            Gallery(1)


class TestRemove:
    def test_last_embedding_drops_identity(self):
        g = Gallery(3)
        iid = g.register("a", [1, 0, 0])
        g.register("b", [0, 1, 0])
        assert g.remove(iid) is True
        assert "a" not in g.identities

    def test_unknown_id(self):
        g = two_identity_gallery()
        before = g.change_counter
        assert g.remove("nope") is False
        assert g.change_counter == before

    def test_partial_removal_keeps_identity(self):
        g = Gallery(3)
        iid = g.register("a", [1, 0, 0])
        g.register("a", [0, 1, 0])
        assert g.remove(iid) is True
        assert g.identities == ["a"]
        assert len(g.embeddings_of("a")) == 1

    def test_counter_strictly_increases_per_mutation(self):
        g = Gallery(3)
        start = g.change_counter
        ids = [g.register("a", [1, 0, 0]) for _ in range(4)]
        g.remove(ids[0])
        g.remove(ids[1])
        assert g.change_counter == start + 6


class TestMatchQuery:
    def test_identical_vector_matches(self):
        g = Gallery(3)
        g.register("a", [1, 0, 0])
        r = g.match_query([1, 0, 0], 0.5)
        assert r.matched and r.identity == "a" and r.best_similarity == 1.0

    def test_orthogonal_unmatched(self):
        g = Gallery(3)
        g.register("a", [1, 0, 0])
        r = g.match_query([0, 1, 0], 0.5)
        assert not r.matched
        assert r.identity is None
        assert r.best_similarity == 0.0

    def test_best_of_two_identities(self):
        # cos(query, a) = 0.8, cos(query, b) = 1.0
        g = Gallery(3)
        g.register("a", [1, 0, 0])
        g.register("b", [0.8, 0.6, 0.0])
        r = g.match_query([0.8, 0.6, 0.0], 0.9)
        assert r.matched and r.identity == "b"
        assert r.best_similarity == pytest.approx(1.0, abs=1e-12)

    def test_tie_breaks_to_lowest_label(self):
        g = Gallery(3)
        g.register("zed", [1, 0, 0])
        g.register("ann", [1, 0, 0])
        r = g.match_query([1, 0, 0], 0.5)
        assert r.identity == "ann"

    def test_threshold_minus_one_always_matches(self):
        rng = np.random.default_rng(60)
        g = Gallery(4)
        for i in range(3):
            g.register(f"id{i}", rng.standard_normal(4))
        for _ in range(20):
            assert g.match_query(rng.standard_normal(4), -1.0).matched

    def test_matched_monotone_in_threshold(self):
        rng = np.random.default_rng(61)
        g = Gallery(4)
        for i in range(3):
            g.register(f"id{i}", rng.standard_normal(4))
        q = rng.standard_normal(4)
        results = [g.match_query(q, t).matched for t in np.linspace(-1, 1, 41)]
        # once unmatched, stays unmatched as the threshold grows
        assert all(a or not b for a, b in zip(results, results[1:]))

    def test_empty_gallery(self):
        g = Gallery(3)
        with pytest.raises(EmptyGalleryError):
            g.match_query([1, 0, 0], 0.5)

    def test_dimension_mismatch(self):
        g = two_identity_gallery()
        with pytest.raises(DimensionMismatchError):
            g.match_query([1, 0], 0.5)


class TestPersistence:
    def round_trip(self, g, path):
        g.save(path)
        loaded = Gallery.load(path)
        assert loaded.dimension == g.dimension
        assert loaded.identities == g.identities
        assert loaded.change_counter == g.change_counter
        assert loaded.registrations_since_adapt == g.registrations_since_adapt
        for label in g.identities:
            orig = g.embeddings_of(label)
            back = loaded.embeddings_of(label)
            assert [e.instance_id for e in orig] == [e.instance_id for e in back]
            for a, b in zip(orig, back):
                assert np.array_equal(a.vector, b.vector)  # bit-exact
        return loaded

    def test_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(62)
        g = Gallery(5)
        for i in range(3):
            for _ in range(2):
                g.register(f"person {i}", rng.standard_normal(5))
        g.remove(g.embeddings_of("person 0")[0].instance_id)
        self.round_trip(g, tmp_path / "gallery.csv")

    def test_json_round_trip(self, tmp_path):
        rng = np.random.default_rng(63)
        g = Gallery(4)
        for i in range(2):
            g.register(f"id{i}", rng.standard_normal(4))
        self.round_trip(g, tmp_path / "gallery.json")

    def test_header_only_csv(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("identity,instance_id,v0,v1,v2\n")
        g = Gallery.load(path)
        assert g.dimension == 3
        assert len(g) == 0

    def test_mixed_row_widths(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "identity,instance_id,v0,v1\n"
            "a,e1,1.0,0.0\n"
            "b,e2,1.0,0.0,0.5\n"
        )
        with pytest.raises(GalleryFormatError):
            Gallery.load(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("name,vec0,vec1\n")
        with pytest.raises(GalleryFormatError):
            Gallery.load(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "nothing.csv"
        path.write_text("")
        with pytest.raises(GalleryFormatError):
            Gallery.load(path)

    def test_duplicate_instance_ids(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text(
            "identity,instance_id,v0,v1\n"
            "a,e1,1.0,0.0\n"
            "b,e1,0.0,1.0\n"
        )
        with pytest.raises(GalleryFormatError):
            Gallery.load(path)

    def test_unparseable_value(self, tmp_path):
        path = tmp_path / "junk.csv"
        path.write_text(
            "identity,instance_id,v0,v1\n"
            "a,e1,1.0,zebra\n"
        )
        with pytest.raises(GalleryFormatError):
            Gallery.load(path)

    def test_zero_row_rejected(self, tmp_path):
        path = tmp_path / "zero.csv"
        path.write_text(
            "identity,instance_id,v0,v1\n"
            "a,e1,0.0,0.0\n"
        )
        with pytest.raises(GalleryFormatError):
            Gallery.load(path)

    def test_plain_json_without_counters(self, tmp_path):
        path = tmp_path / "foreign.json"
        payload = {
            "dimension": 2,
            "embeddings": [
                {"identity": "a", "instance_id": "x1", "vector": [1.0, 0.0]}
            ],
        }
        path.write_text(json.dumps(payload))
        g = Gallery.load(path)
        assert g.change_counter == 1  # behaves as freshly registered

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputContractError):
            Gallery.load(tmp_path / "absent.csv")


class TestConcurrency:
    def test_readers_survive_a_writer(self):
        # single-writer, multiple-reader: queries against snapshots must not
        # trip over concurrent registrations
        import threading

        rng = np.random.default_rng(64)
        g = Gallery(8)
        for i in range(4):
            g.register(f"id{i}", rng.standard_normal(8))
        errors = []

        def writer():
            try:
                for i in range(200):
                    g.register(f"new{i}", np.arange(1.0, 9.0) + i)
            except Exception as exc:  # pragma: no cover - failure path
                errors.append(exc)

        def reader():
            try:
                q = rng.standard_normal(8)
                for _ in range(200):
                    g.match_query(q, 0.5)
            except Exception as exc:  # pragma: no cover - failure path
                errors.append(exc)

        threads = [threading.Thread(target=writer)] + [
            threading.Thread(target=reader) for _ in range(3)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        assert g.change_counter == 4 + 200
