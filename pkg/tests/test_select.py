"""Data-selection criteria, ranking, thresholds and score-file I/O."""

import math
import random

import pytest

from corpusmine import corpus, lm, select
from corpusmine.errors import MissingFactorError, ToolkitError


def _oracle_edit_distance(a, b):
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        for j in range(len(b) + 1):
            if i == 0:
                d[i][j] = j
            elif j == 0:
                d[i][j] = i
            else:
                d[i][j] = min(
                    d[i - 1][j] + 1,
                    d[i][j - 1] + 1,
                    d[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
                )
    return d[len(a)][len(b)]


def test_edit_distance_against_oracle():
    rng = random.Random(17)
    alphabet = ["a", "b", "c", "d", "e"]
    for _ in range(300):
        a = [rng.choice(alphabet) for _ in range(rng.randint(1, 10))]
        b = [rng.choice(alphabet) for _ in range(rng.randint(1, 10))]
        assert select.edit_distance(a, b) == _oracle_edit_distance(a, b)


def test_fms_hand_cases():
    assert select.fms("a b c d".split(), "a b c d".split()) == 1.0
    assert select.fms("a b c d".split(), "a b x d".split()) == 0.75
    assert select.fms(["x"], "a b c d".split()) == 0.0  # clamped at 0


def test_score_fms_averages_over_references():
    general = corpus.Corpus.from_lines(["a b c d", "x y z"])
    reference = corpus.Corpus.from_lines(["a b c d", "a b x d"])
    scores = select.score_fms(general, reference)
    assert scores[0] == pytest.approx((1.0 + 0.75) / 2)
    assert scores[1] == 0.0


def test_score_fms_threads_and_cutoff():
    rng = random.Random(23)
    alphabet = ["a", "b", "c", "d", "e", "f"]
    general = corpus.Corpus.from_lines(
        [" ".join(rng.choice(alphabet) for _ in range(rng.randint(1, 9))) for _ in range(40)]
    )
    reference = corpus.Corpus.from_lines(
        [" ".join(rng.choice(alphabet) for _ in range(rng.randint(1, 9))) for _ in range(10)]
    )
    exact = select.score_fms(general, reference)
    assert select.score_fms(general, reference, threads=4) == exact
    # oracle for the exact scores
    for src, got in zip(general, exact):
        want = sum(select.fms(src.words, r.words) for r in reference) / len(reference)
        assert math.isclose(got, want, rel_tol=1e-12)
    # the cutoff only ever lowers a score (pruned pairs contribute 0)
    pruned = select.score_fms(general, reference, cutoff=0.8)
    assert all(p <= e + 1e-12 for p, e in zip(pruned, exact))


def test_cosine_scores():
    general = corpus.Corpus.from_lines(["a b", "x y", "a a"])
    in_domain = corpus.Corpus.from_lines(["a b"])
    scores = select.score_cosine(general, in_domain)
    assert scores[0] == pytest.approx(1.0)
    assert scores[1] == 0.0
    assert 0.0 < scores[2] < 1.0


def test_cross_entropy_is_length_normalized():
    model = lm.train(corpus.Corpus.from_lines(["a a a a", "a a"]), order=1, smoothing="witten-bell")
    short = select.sentence_cross_entropy(model, corpus.Sentence.from_plain("a a"))
    long = select.sentence_cross_entropy(model, corpus.Sentence.from_plain("a a a a a a"))
    # same per-word cost regime: values stay comparable instead of scaling with length
    assert abs(short - long) < 1.0


def test_moore_lewis_zero_when_models_match():
    model = lm.train(corpus.Corpus.from_lines(["a b c", "b c a"]), order=2, smoothing="witten-bell")
    general = corpus.Corpus.from_lines(["a b", "c b a", "a c"])
    scores = select.score_moore_lewis(general, model, model)
    assert scores == [0.0, 0.0, 0.0]


def test_bilingual_ml_is_sum_of_sides():
    src_in = lm.train(corpus.Corpus.from_lines(["a b", "b a"]), order=1, smoothing="witten-bell")
    src_out = lm.train(corpus.Corpus.from_lines(["c d"]), order=1, smoothing="witten-bell",
                       vocab=src_in.vocab)
    tgt_in = lm.train(corpus.Corpus.from_lines(["x y", "y x"]), order=1, smoothing="witten-bell")
    tgt_out = lm.train(corpus.Corpus.from_lines(["w z"]), order=1, smoothing="witten-bell",
                       vocab=tgt_in.vocab)
    pairs = corpus.ParallelCorpus(
        tuple(
            corpus.SentencePair(corpus.Sentence.from_plain(s), corpus.Sentence.from_plain(t))
            for s, t in (("a b", "x y"), ("c d", "w z"))
        )
    )
    both = select.score_bilingual_ml(pairs, src_in, src_out, tgt_in, tgt_out)
    src_only = select.score_moore_lewis(pairs.source_corpus(), src_in, src_out)
    tgt_only = select.score_moore_lewis(pairs.target_corpus(), tgt_in, tgt_out)
    for b, s, t in zip(both, src_only, tgt_only):
        assert math.isclose(b, s + t, abs_tol=1e-12)


def test_sample_out_subset_is_seeded():
    general = corpus.Corpus.from_lines(["s%d" % i for i in range(50)])
    a = select.sample_out_subset(general, 10, seed=4)
    b = select.sample_out_subset(general, 10, seed=4)
    c = select.sample_out_subset(general, 10, seed=5)
    assert [s.text for s in a] == [s.text for s in b]
    assert [s.text for s in a] != [s.text for s in c]
    with pytest.raises(ToolkitError):
        select.sample_out_subset(general, 51, seed=0)


def test_select_top_floor_and_ties():
    scores = [0.5, 0.9, 0.5, 0.1, 0.9]
    res = select.select_top(scores, 60, select.HIGHER)
    assert res.indices == [1, 4, 0]  # floor(0.6*5)=3; ties keep input order
    res_low = select.select_top(scores, 40, select.LOWER)
    assert res_low.indices == [3, 0]
    with pytest.raises(ToolkitError):
        select.select_top(scores, 10, select.HIGHER)  # floor -> 0 kept
    with pytest.raises(ToolkitError):
        select.select_top(scores, 0, select.HIGHER)
    with pytest.raises(ToolkitError):
        select.select_top(scores, 101, select.HIGHER)


def test_select_top_prefix_nesting():
    rng = random.Random(31)
    scores = [rng.random() for _ in range(97)]
    previous = []
    for k in (10, 25, 50, 75, 100):
        kept = select.select_top(scores, k, select.LOWER).indices
        assert kept[: len(previous)] == previous
        previous = kept
    assert sorted(previous) == list(range(97))  # K=100 keeps everything


def test_threshold_filter_is_strict():
    scores = [0.2, 0.5, 0.8]
    assert select.threshold_filter(scores, 0.5, select.HIGHER).indices == [2]
    assert select.threshold_filter(scores, 0.5, select.LOWER).indices == [0]


def test_factored_select_views():
    lines_general = [
        "America|america|NNP|NP00G00 fell|fall|VBD .|.|Fp",
        "rates|rate|NNS fell|fall|VBD .|.|Fp",
        "dogs|dog|NNS bark|bark|VBP .|.|Fp",
    ]
    lines_in = ["Europe|europe|NNP|NP00G00 fell|fall|VBD .|.|Fp"]
    general = corpus.Corpus(tuple(corpus.Sentence.from_factored(l) for l in lines_general), id="g")
    in_domain = corpus.Corpus(tuple(corpus.Sentence.from_factored(l) for l in lines_in), id="i")
    res = select.factored_select(general, in_domain, "tn", "cosine", k=34)
    assert res.indices == [0]  # NE substitution makes sentence 0 the match
    with pytest.raises(ToolkitError):
        select.factored_select(general, in_domain, "f", "mml", k=50)
    plain = corpus.Corpus.from_lines(["a b"], id="plain")
    with pytest.raises(MissingFactorError):
        select.factored_select(plain, in_domain, "ln", "cosine", k=50)


def test_sharded_scoring_is_order_preserving():
    general = corpus.Corpus.from_lines(["a b", "x y", "a a", "b b", "y x", "a b a"])
    in_domain = corpus.Corpus.from_lines(["a b", "b a"])
    base = select.score_cosine(general, in_domain)
    for threads in (2, 3, 8):
        assert select.score_cosine(general, in_domain, threads=threads) == base


def test_score_file_round_trip(tmp_path):
    scores = [0.1, 0.25, 1e-17, 3.5]
    path = tmp_path / "scores.tsv"
    select.write_scores(path, scores, {"criterion": "cosine", "direction": select.HIGHER})
    loaded, meta = select.read_scores(path)
    assert loaded == scores
    assert meta["criterion"] == "cosine"
    assert meta["direction"] == select.HIGHER


def test_selection_file_round_trip(tmp_path):
    res = select.select_top([0.4, 0.9, 0.1], 67, select.HIGHER, criterion="ce")
    path = tmp_path / "sel.txt"
    select.write_selection(path, res, {"k": 67, "seed": 0})
    loaded = select.read_selection(path)
    assert loaded.indices == res.indices
    assert loaded.criterion == "ce"
    assert loaded.direction == select.HIGHER
