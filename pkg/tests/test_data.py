import numpy as np
import pytest

import lexmap as lm
from lexmap.errors import FormatError, ParseError, ValidationError


class TestLoadLexicon:
    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "lex.csv"
        path.write_text("form,frequency\nhund,120\nkat,30\n", encoding="utf-8")
        lex = lm.load_lexicon(path)
        assert lex.forms == ["hund", "kat"]
        assert lex.frequencies.tolist() == [120, 30]
        out = tmp_path / "copy.csv"
        lex.save(out)
        assert lm.load_lexicon(out) == lex

    def test_tsv_by_suffix_and_forced_format(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("form\tfrequency\tpronunciation\nwen4ti2\t7\twen4ti2\n", encoding="utf-8")
        lex = lm.load_lexicon(path)
        assert lex[0].pronunciation == "wen4ti2"
        forced = lm.load_lexicon(path, fmt="tsv")
        assert forced == lex

    def test_missing_header_column(self, tmp_path):
        path = tmp_path / "lex.csv"
        path.write_text("word,count\na,1\n", encoding="utf-8")
        with pytest.raises(FormatError):
            lm.load_lexicon(path)

    def test_bad_frequency_names_line(self, tmp_path):
        path = tmp_path / "lex.csv"
        path.write_text("form,frequency\na,1\nb,x\n", encoding="utf-8")
        with pytest.raises(ParseError, match=r"lex\.csv:3"):
            lm.load_lexicon(path)

    def test_negative_frequency_rejected(self, tmp_path):
        path = tmp_path / "lex.csv"
        path.write_text("form,frequency\na,-2\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            lm.load_lexicon(path)

    def test_narrow_row_rejected(self, tmp_path):
        path = tmp_path / "lex.csv"
        path.write_text("form,frequency\nonlyform\n", encoding="utf-8")
        with pytest.raises(ParseError, match=r":2"):
            lm.load_lexicon(path)

    def test_homographs_kept_as_rows(self, tmp_path):
        path = tmp_path / "lex.csv"
        path.write_text("form,frequency\nbank,5\nbank,3\n", encoding="utf-8")
        lex = lm.load_lexicon(path)
        assert len(lex) == 2
        assert lex.form_to_id()["bank"] == 0

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            lm.load_lexicon(tmp_path / "absent.csv")


class TestLoadEmbeddings:
    def test_round_trip_exact_floats(self, tmp_path):
        rng = np.random.default_rng(0)
        lex = lm.Lexicon.from_rows([("aa", 1), ("bb", 2)])
        S = rng.standard_normal((2, 4))
        table = lm.embedding_table_from_matrix(lex, S)
        path = tmp_path / "emb.txt"
        table.save(path)
        back = lm.load_embeddings(path)
        assert back.dimension == 4
        for e in lex:
            assert np.array_equal(back.vectors[e.form], S[e.id])

    def test_wrong_component_count(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("1 3\nword 0.5 0.5\n", encoding="utf-8")
        with pytest.raises(FormatError, match=":2"):
            lm.load_embeddings(path)

    def test_non_numeric_component(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("1 2\nword 0.5 oops\n", encoding="utf-8")
        with pytest.raises(FormatError):
            lm.load_embeddings(path)

    def test_non_finite_component(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("1 2\nword 0.5 inf\n", encoding="utf-8")
        with pytest.raises(FormatError):
            lm.load_embeddings(path)

    def test_header_row_count_mismatch(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("3 2\na 1 2\nb 3 4\n", encoding="utf-8")
        with pytest.raises(FormatError, match="declares 3"):
            lm.load_embeddings(path)

    def test_duplicates_keep_first(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 2\nw 1.0 2.0\nw 9.0 9.0\n", encoding="utf-8")
        table = lm.load_embeddings(path)
        assert table.duplicates_skipped == 1
        assert table.vectors["w"].tolist() == [1.0, 2.0]


class TestAlign:
    def test_drops_and_recompacts(self, tmp_path):
        lex = lm.Lexicon.from_rows([("a", 1), ("b", 2), ("c", 3)])
        table = lm.EmbeddingTable(
            dimension=2, vectors={"a": np.array([1.0, 0.0]), "c": np.array([0.0, 1.0])}
        )
        new_lex, S, dropped = lm.align(lex, table)
        assert dropped == ["b"]
        assert new_lex.forms == ["a", "c"]
        assert [e.id for e in new_lex] == [0, 1]
        assert np.array_equal(S, np.array([[1.0, 0.0], [0.0, 1.0]]))

    def test_empty_intersection(self):
        lex = lm.Lexicon.from_rows([("a", 1)])
        table = lm.EmbeddingTable(dimension=2, vectors={"z": np.zeros(2)})
        with pytest.raises(ValidationError):
            lm.align(lex, table)

    def test_idempotent(self):
        lex = lm.Lexicon.from_rows([("a", 1), ("b", 2)])
        table = lm.EmbeddingTable(
            dimension=2, vectors={"a": np.array([1.0, 2.0]), "b": np.array([3.0, 4.0])}
        )
        lex1, S1, _ = lm.align(lex, table)
        lex2, S2, dropped = lm.align(lex1, table)
        assert lex1 == lex2 and np.array_equal(S1, S2) and dropped == []


class TestEventStreams:
    def test_expansion_multiset_matches_frequencies(self):
        lex = lm.Lexicon.from_rows([("a", 3), ("b", 0), ("c", 2)])
        stream = lm.expand_to_events(lex, seed=4)
        assert np.bincount(stream.events, minlength=3).tolist() == [3, 0, 2]

    def test_expansion_deterministic_and_seed_sensitive(self):
        lex = lm.Lexicon.from_rows([("a", 5), ("b", 5), ("c", 5)])
        s1 = lm.expand_to_events(lex, seed=1).events
        s2 = lm.expand_to_events(lex, seed=1).events
        s3 = lm.expand_to_events(lex, seed=2).events
        assert np.array_equal(s1, s2)
        assert not np.array_equal(s1, s3)

    def test_as_listed_policy_keeps_order(self):
        lex = lm.Lexicon.from_rows([("a", 2), ("b", 1)])
        stream = lm.expand_to_events(lex, policy="as_listed")
        assert stream.events.tolist() == [0, 0, 1]

    def test_all_zero_frequencies_rejected(self):
        lex = lm.Lexicon.from_rows([("a", 0), ("b", 0)])
        with pytest.raises(ValidationError):
            lm.expand_to_events(lex)

    def test_load_event_stream_skips_unknown(self, tmp_path):
        lex = lm.Lexicon.from_rows([("a", 1), ("b", 1)])
        path = tmp_path / "events.txt"
        path.write_text("a\nmystery\nb\n\na\n", encoding="utf-8")
        stream = lm.load_event_stream(path, lex)
        assert stream.events.tolist() == [0, 1, 0]
        assert stream.skipped == 1

    def test_load_event_stream_homograph_lowest_id(self, tmp_path):
        lex = lm.Lexicon.from_rows([("bank", 1), ("bank", 1)])
        path = tmp_path / "events.txt"
        path.write_text("bank\n", encoding="utf-8")
        assert lm.load_event_stream(path, lex).events.tolist() == [0]

    def test_load_event_stream_nothing_resolves(self, tmp_path):
        lex = lm.Lexicon.from_rows([("a", 1)])
        path = tmp_path / "events.txt"
        path.write_text("x\ny\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            lm.load_event_stream(path, lex)


class TestSynthLexicon:
    def test_frequency_law(self):
        lex, _ = lm.synth_lexicon(25, 4, zipf_exponent=1.5, seed=0, base_count=300)
        expected = [max(1, round(300 / i**1.5)) for i in range(1, 26)]
        assert lex.frequencies.tolist() == expected

    def test_forms_unique_and_deterministic(self):
        lex1, S1 = lm.synth_lexicon(60, 5, seed=8)
        lex2, S2 = lm.synth_lexicon(60, 5, seed=8)
        assert len(set(lex1.forms)) == 60
        assert lex1 == lex2
        assert np.array_equal(S1, S2)

    def test_semantic_matrix_shape(self):
        _, S = lm.synth_lexicon(10, 7, seed=1)
        assert S.shape == (10, 7)

    def test_too_small_m_rejected(self):
        with pytest.raises(ValidationError):
            lm.synth_lexicon(1, 4)

    def test_bad_exponent_rejected(self):
        with pytest.raises(ValidationError):
            lm.synth_lexicon(5, 4, zipf_exponent=0.0)
