"""Lexical table loading and per-sentence shortlist construction."""

import numpy as np
import pytest

from beamnmt.errors import FormatError
from beamnmt.model import Vocabulary
from beamnmt.shortlist import ShortList, build_shortlist, load_freq_list, load_lex_table


@pytest.fixture
def trg_vocab():
    return Vocabulary.from_tokens(["x", "y", "z", "w"])  # ids 2..5


class TestLexicalTable:
    def test_sorted_by_descending_probability(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a x 0.9\na y 0.1\n", encoding="utf-8")
        table = load_lex_table(p, trg_vocab)
        assert table.get("a") == [("x", 0.9), ("y", 0.1)]

    def test_probability_ties_break_lexicographically(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a z 0.5\na y 0.5\na x 0.5\n", encoding="utf-8")
        table = load_lex_table(p, trg_vocab)
        assert table.get("a") == [("x", 0.5), ("y", 0.5), ("z", 0.5)]

    def test_out_of_range_probability_reports_line(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a x 0.9\na y 1.5\n", encoding="utf-8")
        with pytest.raises(FormatError, match=":2:"):
            load_lex_table(p, trg_vocab)

    def test_zero_probability_rejected(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a x 0.0\n", encoding="utf-8")
        with pytest.raises(FormatError, match=":1:"):
            load_lex_table(p, trg_vocab)

    def test_non_numeric_probability_reports_line(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a x high\n", encoding="utf-8")
        with pytest.raises(FormatError, match="non-numeric"):
            load_lex_table(p, trg_vocab)

    def test_unknown_target_maps_to_unk(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a qqq 0.7\n", encoding="utf-8")
        table = load_lex_table(p, trg_vocab)
        assert table.get("a") == [("<unk>", 0.7)]

    def test_duplicates_keep_max(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a x 0.2\na x 0.8\na x 0.5\n", encoding="utf-8")
        table = load_lex_table(p, trg_vocab)
        assert table.get("a") == [("x", 0.8)]

    def test_unknown_source_contributes_nothing(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a x 0.9\n", encoding="utf-8")
        table = load_lex_table(p, trg_vocab)
        assert table.get("nope") == []


class TestFreqList:
    def test_maps_and_counts_skipped(self, tmp_path, trg_vocab):
        p = tmp_path / "freq.txt"
        p.write_text("y\nmissing\nx\n", encoding="utf-8")
        ids, skipped = load_freq_list(p, trg_vocab)
        assert ids == [3, 2]
        assert skipped == 1


class TestShortList:
    def test_always_contains_reserved(self):
        sl = ShortList.from_ids([5, 3])
        assert sl.global_ids[0] == 0 and sl.global_ids[1] == 1

    def test_inverse_roundtrip(self):
        sl = ShortList.from_ids([0, 1, 4, 9])
        for local, global_id in enumerate(sl.global_ids):
            assert sl.local(int(global_id)) == local

    def test_rejects_unsorted_direct_construction(self):
        with pytest.raises(ValueError):
            ShortList(np.array([0, 1, 5, 3]))

    def test_full_covers_vocabulary(self):
        sl = ShortList.full(7)
        assert list(sl.global_ids) == list(range(7))


class TestBuildShortlist:
    def test_full_coverage_when_k_is_vocab(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a x 0.9\n", encoding="utf-8")
        table = load_lex_table(p, trg_vocab)
        freq = list(range(len(trg_vocab)))
        sl = build_shortlist(table, freq, ["a"], K=len(trg_vocab), Kprime=0, trg_vocab=trg_vocab)
        assert list(sl.global_ids) == list(range(len(trg_vocab)))

    def test_top_kprime_only(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a x 0.9\na y 0.1\n", encoding="utf-8")
        table = load_lex_table(p, trg_vocab)
        sl = build_shortlist(table, [], ["a"], K=0, Kprime=1, trg_vocab=trg_vocab)
        assert list(sl.global_ids) == [0, 1, 2]  # "</s>", "<unk>", "x"

    def test_monotone_in_k(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a x 0.9\nb z 0.8\nb w 0.2\n", encoding="utf-8")
        table = load_lex_table(p, trg_vocab)
        freq = [4, 2, 5, 3]
        src = ["a", "b"]
        for kp in (0, 1, 2):
            previous: set[int] = set()
            for k in range(0, 5):
                sl = build_shortlist(table, freq, src, K=k, Kprime=kp, trg_vocab=trg_vocab)
                current = set(int(i) for i in sl.global_ids)
                assert previous <= current
                previous = current

    def test_monotone_in_kprime(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a x 0.9\na y 0.5\na z 0.2\n", encoding="utf-8")
        table = load_lex_table(p, trg_vocab)
        previous: set[int] = set()
        for kp in range(0, 4):
            sl = build_shortlist(table, [], ["a"], K=0, Kprime=kp, trg_vocab=trg_vocab)
            current = set(int(i) for i in sl.global_ids)
            assert previous <= current
            previous = current

    def test_repeated_source_tokens_no_effect(self, tmp_path, trg_vocab):
        p = tmp_path / "lex.txt"
        p.write_text("a x 0.9\na y 0.5\n", encoding="utf-8")
        table = load_lex_table(p, trg_vocab)
        once = build_shortlist(table, [2], ["a"], K=1, Kprime=2, trg_vocab=trg_vocab)
        thrice = build_shortlist(table, [2], ["a", "a", "a"], K=1, Kprime=2, trg_vocab=trg_vocab)
        assert list(once.global_ids) == list(thrice.global_ids)

    def test_negative_k_rejected(self, trg_vocab):
        from beamnmt.shortlist import LexicalTable

        with pytest.raises(ValueError):
            build_shortlist(LexicalTable({}), [], [], K=-1, Kprime=0, trg_vocab=trg_vocab)
