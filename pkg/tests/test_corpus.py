"""Corpus model, I/O and preprocessing transforms."""

import random

import pytest

from corpusmine import corpus
from corpusmine.errors import FormatError, MissingFactorError


def test_plain_round_trip(tmp_path):
    lines = ["a b c", "d e", "a b c"]
    p = tmp_path / "c.txt"
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    c = corpus.load_corpus(p)
    assert [s.text for s in c] == lines
    out = tmp_path / "out.txt"
    corpus.save_corpus(c, out)
    assert out.read_bytes() == p.read_bytes()


def test_empty_line_rejected(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("a b\n\nc d\n", encoding="utf-8")
    with pytest.raises(FormatError):
        corpus.load_corpus(p)


def test_factored_round_trip(tmp_path):
    line = "John|john|NNP|NP00SP0 's|'s|POS runs|run|VBZ"
    p = tmp_path / "f.txt"
    p.write_text(line + "\n", encoding="utf-8")
    c = corpus.load_corpus(p, format="factored")
    s = c.sentences[0]
    assert s.tokens[0].ne == "NP00SP0"
    assert s.tokens[1].pos == "POS" and s.tokens[1].ne is None
    assert s.factored_text() == line
    out = tmp_path / "out.txt"
    corpus.save_corpus(c, out, format="factored")
    assert out.read_text(encoding="utf-8") == line + "\n"


def test_too_many_factors_rejected():
    with pytest.raises(FormatError):
        corpus.Sentence.from_factored("a|b|c|d|e")


def test_tsv_parallel_and_two_file(tmp_path):
    tsv = tmp_path / "p.tsv"
    tsv.write_text("a b\tx y z\nc\tw\n", encoding="utf-8")
    pc = corpus.load_corpus(tsv, format="tsv-parallel")
    assert len(pc) == 2
    assert pc.pairs[0].target.text == "x y z"

    src = tmp_path / "s.txt"
    tgt = tmp_path / "t.txt"
    src.write_text("a b\nc\n", encoding="utf-8")
    tgt.write_text("x y z\nw\n", encoding="utf-8")
    pc2 = corpus.load_parallel(src, tgt)
    assert pc2.pairs == pc.pairs

    tgt.write_text("x y z\n", encoding="utf-8")
    with pytest.raises(FormatError):
        corpus.load_parallel(src, tgt)


def test_dedup_keeps_first_occurrence():
    c = corpus.Corpus.from_lines(["a b", "c", "a b", "c", "d"])
    assert [s.text for s in corpus.dedup(c)] == ["a b", "c", "d"]


def test_dedup_parallel_compares_both_sides():
    pc = corpus.ParallelCorpus(
        (
            corpus.SentencePair(corpus.Sentence.from_plain("a"), corpus.Sentence.from_plain("x")),
            corpus.SentencePair(corpus.Sentence.from_plain("a"), corpus.Sentence.from_plain("y")),
            corpus.SentencePair(corpus.Sentence.from_plain("a"), corpus.Sentence.from_plain("x")),
        )
    )
    deduped = corpus.dedup(pc)
    assert len(deduped) == 2
    assert deduped.pairs[1].target.text == "y"


def test_length_filter_drops_either_side():
    def pair(ns, nt):
        return corpus.SentencePair(
            corpus.Sentence.from_plain(" ".join(["w"] * ns)),
            corpus.Sentence.from_plain(" ".join(["w"] * nt)),
        )

    pc = corpus.ParallelCorpus((pair(3, 3), pair(4, 3), pair(3, 4), pair(4, 4)))
    kept = corpus.length_filter(pc, max_len=3)
    assert len(kept) == 1
    # exactly max_len tokens survive
    assert len(corpus.length_filter(pc, max_len=4)) == 4


def test_normalize_numbers_digit_runs():
    s = corpus.Sentence.from_plain("Vitamin D 1,25-OH level 300")
    out = corpus.normalize_numbers(s)
    assert out.text == "Vitamin D @num@,@num@-OH level @num@"


def test_normalize_numbers_keeps_factors():
    s = corpus.Sentence.from_factored("12|twelve|CD")
    out = corpus.normalize_numbers(s)
    assert out.tokens[0].surface == "@num@"
    assert out.tokens[0].lemma == "twelve"


def test_normalize_apostrophes():
    s = corpus.Sentence.from_plain("country’s debt")
    assert corpus.normalize_apostrophes(s).text == "country's debt"


def test_hyphen_alt_markup():
    lex = corpus.Lexicon({"slow": "lento", "growing": "creciente", "self": "auto"})
    s = corpus.Sentence.from_plain("a slow-growing economy")
    assert (
        corpus.hyphen_alt_markup(s, lex)
        == 'a <alt trans="lento creciente">slow-growing</alt> economy'
    )
    # any untranslatable part leaves the token unchanged
    s2 = corpus.Sentence.from_plain("fast-growing self-slow")
    assert corpus.hyphen_alt_markup(s2, lex) == 'fast-growing <alt trans="auto lento">self-slow</alt>'
    # leading/trailing hyphens are not split points
    s3 = corpus.Sentence.from_plain("-slow slow- --")
    assert corpus.hyphen_alt_markup(s3, lex) == "-slow slow- --"


def test_lexicon_first_translation_wins(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("slow\tlento\nslow\tdespacio\n", encoding="utf-8")
    assert corpus.Lexicon.load(p).lookup("slow") == "lento"


FACTORED_LINES = [
    "America|america|NNP|NP00G00 's|'s|POS savings|saving|NNS rate|rate|NN .|.|Fp",
    "rates|rate|NNS fell|fall|VBD .|.|Fp",
]


def test_factor_views():
    c = corpus.Corpus(tuple(corpus.Sentence.from_factored(l) for l in FACTORED_LINES), id="x")
    assert corpus.factor_view(c, "f").sentences[0].text == "America 's savings rate ."
    assert corpus.factor_view(c, "fn").sentences[0].text == "NP00G00 's savings rate ."
    assert corpus.factor_view(c, "l").sentences[0].text == "america 's saving rate ."
    assert corpus.factor_view(c, "ln").sentences[0].text == "NP00G00 's saving rate ."
    assert corpus.factor_view(c, "t").sentences[0].text == "NNP POS NNS NN Fp"
    assert corpus.factor_view(c, "tn").sentences[0].text == "NP00G00 POS NNS NN Fp"
    # the non-NE sentence is identical under t and tn
    assert corpus.factor_view(c, "tn").sentences[1].text == "NNS VBD Fp"


def test_factor_view_missing_factors():
    plain = corpus.Corpus.from_lines(["a b"], id="plain")
    with pytest.raises(MissingFactorError):
        corpus.factor_view(plain, "l")
    with pytest.raises(MissingFactorError):
        corpus.factor_view(plain, "t")
    # *n views require at least one NE-bearing token
    no_ne = corpus.Corpus(
        (corpus.Sentence.from_factored("a|a|DT b|b|NN"),), id="no-ne"
    )
    with pytest.raises(MissingFactorError):
        corpus.factor_view(no_ne, "tn")
    with pytest.raises(MissingFactorError):
        corpus.factor_view(no_ne, "bogus")


def test_random_round_trips():
    rng = random.Random(7)
    vocab = ["alpha", "beta", "gamma", "x1", "y-2", "z'3"]
    for _ in range(50):
        lines = [
            " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 12)))
            for _ in range(rng.randint(1, 20))
        ]
        c = corpus.Corpus.from_lines(lines)
        assert [s.text for s in c] == lines
        assert [s.text for s in corpus.dedup(c)] == list(dict.fromkeys(lines))
