import io

import numpy as np
import pytest

from xlmap.embedio import (Embedding, load_dictionary, load_embeddings,
                           save_embeddings)


def _load(text, **kw):
    return load_embeddings(io.StringIO(text), **kw)


class TestLoadEmbeddings:
    def test_basic_parse(self):
        emb = _load("2 3\ncat 1 0 0\ndog 0 1 0\n")
        assert emb.words == ("cat", "dog")
        assert emb.dim == 3
        np.testing.assert_array_equal(emb.vectors, [[1, 0, 0], [0, 1, 0]])
        assert emb.vectors.dtype == np.float32

    def test_duplicate_keeps_first(self):
        emb = _load("3 2\na 1 0\na 2 0\nb 0 1\n")
        assert emb.words == ("a", "b")
        np.testing.assert_array_equal(emb.vectors, [[1, 0], [0, 1]])

    def test_max_vocab(self):
        text = "4 2\nw0 1 0\nw1 2 0\nw2 3 0\nw3 4 0\n"
        assert len(_load(text, max_vocab=2)) == 2
        assert len(_load(text, max_vocab=100)) == 4

    def test_max_vocab_counts_valid_rows(self):
        # the duplicate does not use up the budget
        emb = _load("3 2\na 1 0\na 2 0\nb 0 1\n", max_vocab=2)
        assert emb.words == ("a", "b")

    def test_zero_row_dropped_with_warning(self):
        with pytest.warns(UserWarning):
            emb = _load("2 2\nzero 0 0\nok 1 0\n")
        assert emb.words == ("ok",)

    def test_scientific_notation(self):
        emb = _load("1 2\nw 1.5e-3 -2E4\n")
        np.testing.assert_allclose(emb.vectors, [[1.5e-3, -2e4]], rtol=1e-6)

    def test_binary_stream(self):
        emb = load_embeddings(io.BytesIO("1 2\nwé 1 2\n".encode("utf-8")))
        assert emb.words == ("wé",)

    @pytest.mark.parametrize("text", [
        "bad header\nw 1 2\n",
        "1\nw 1\n",
        "x 2\nw 1 2\n",
        "1 2\nw 1\n",
        "1 2\nw 1 2 3\n",
        "1 2\nw 1 abc\n",
        "1 2\nw 1 inf\n",
    ])
    def test_malformed_inputs(self, text):
        with pytest.raises(ValueError):
            _load(text)

    def test_empty_after_filtering(self):
        with pytest.warns(UserWarning):
            with pytest.raises(ValueError):
                _load("1 2\nzero 0 0\n")


class TestSaveEmbeddings:
    def test_single_word_format(self):
        emb = Embedding(words=("x",), vectors=np.array([[1.0, 2.0]], dtype=np.float32))
        buf = io.StringIO()
        save_embeddings(emb, buf)
        assert buf.getvalue() == "1 2\nx 1 2\n"

    def test_roundtrip_exact(self):
        rng = np.random.default_rng(0)
        emb = Embedding(words=tuple(f"w{i}" for i in range(30)),
                        vectors=rng.standard_normal((30, 7)).astype(np.float32))
        buf = io.StringIO()
        save_embeddings(emb, buf)
        again = load_embeddings(io.StringIO(buf.getvalue()))
        assert again.words == emb.words
        np.testing.assert_array_equal(again.vectors, emb.vectors)

        buf2 = io.StringIO()
        save_embeddings(again, buf2)
        assert buf2.getvalue() == buf.getvalue()

    def test_roundtrip_within_tolerance(self):
        rng = np.random.default_rng(1)
        emb = Embedding(words=("a", "b"),
                        vectors=(10 * rng.standard_normal((2, 4))).astype(np.float32))
        buf = io.StringIO()
        save_embeddings(emb, buf)
        again = load_embeddings(io.StringIO(buf.getvalue()))
        np.testing.assert_allclose(again.vectors, emb.vectors, atol=1e-5)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            emb = Embedding(words=(), vectors=np.zeros((0, 3), dtype=np.float32))
            save_embeddings(emb, io.StringIO())

    def test_path_roundtrip(self, tmp_path):
        emb = Embedding(words=("über", "b"),
                        vectors=np.array([[1, 2], [3, 4]], dtype=np.float32))
        path = tmp_path / "emb.txt"
        save_embeddings(emb, path)
        again = load_embeddings(path)
        assert again.words == emb.words


class TestLoadDictionary:
    def test_tab_separated(self):
        pairs = load_dictionary(io.StringIO("two\tdue\n"))
        assert pairs.pairs == (("two", "due"),)

    def test_duplicates_removed(self):
        pairs = load_dictionary(io.StringIO("two due\ntwo due\n"))
        assert pairs.pairs == (("two", "due"),)

    def test_multiple_targets_kept(self):
        pairs = load_dictionary(io.StringIO("two due\ntwo 2\n"))
        assert len(pairs) == 2
        assert pairs.targets_by_source["two"] == {"due", "2"}

    def test_1500_distinct_pairs(self):
        text = "".join(f"s{i}\tt{i}\n" for i in range(1500))
        assert len(load_dictionary(io.StringIO(text))) == 1500

    def test_short_line_rejected(self):
        with pytest.raises(ValueError):
            load_dictionary(io.StringIO("loner\n"))

    def test_blank_lines_skipped(self):
        pairs = load_dictionary(io.StringIO("a b\n\n  \nc d\n"))
        assert len(pairs) == 2


class TestEmbeddingType:
    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            Embedding(words=("a", "a"), vectors=np.zeros((2, 2), dtype=np.float32))
        with pytest.raises(ValueError):
            Embedding(words=("a",), vectors=np.zeros((2, 2), dtype=np.float32))

    def test_vectors_locked(self):
        emb = Embedding(words=("a",), vectors=np.ones((1, 2), dtype=np.float32))
        with pytest.raises(ValueError):
            emb.vectors[0, 0] = 5.0

    def test_word_index(self):
        emb = Embedding(words=("a", "b"), vectors=np.eye(2, dtype=np.float32))
        assert emb.word_index == {"a": 0, "b": 1}
