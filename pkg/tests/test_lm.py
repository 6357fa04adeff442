"""N-gram model estimation, smoothing, perplexity, EM mixtures and model files."""

import math
import random
from collections import Counter

import pytest

from corpusmine import corpus, lm
from corpusmine.errors import ToolkitError


def _random_corpus(rng, vocab, n_sents=None, max_len=8):
    n = n_sents or rng.randint(2, 12)
    return corpus.Corpus.from_lines(
        [
            " ".join(rng.choice(vocab) for _ in range(rng.randint(1, max_len)))
            for _ in range(n)
        ]
    )


def _brute_force_counts(lines, order):
    """Independent n-gram counter: BOS padding, one EOS per sentence."""
    grams = Counter()
    for line in lines:
        words = [lm.BOS] * (order - 1) + line.split() + [lm.EOS]
        for n in range(1, order + 1):
            for i in range(order - 1 if n == order else 0, len(words) - n + 1):
                g = tuple(words[i : i + n])
                if g == (lm.BOS,) * n:
                    continue
                grams[g] += 1
    return grams


def test_vocabulary_reserved_symbols():
    v = lm.Vocabulary(["b", "a", "b"])
    assert v.symbol(0) == lm.BOS and v.symbol(1) == lm.EOS and v.symbol(2) == lm.UNK
    assert v.id("b") == 3 and v.id("a") == 4
    assert v.id("never-seen") == v.id(lm.UNK)
    assert list(v.event_ids()) == [1, 2, 3, 4]  # everything but BOS
    with pytest.raises(ToolkitError):
        lm.Vocabulary.from_corpus(corpus.Corpus.from_lines(["a <unk> b"]))


def test_mle_matches_count_ratios():
    lines = ["a b a", "b a", "a a b"]
    model = lm.train(corpus.Corpus.from_lines(lines), order=2, smoothing="mle")
    grams = _brute_force_counts(lines, 2)
    ctx_totals = Counter()
    for g, c in grams.items():
        if len(g) == 2:
            ctx_totals[g[:1]] += c
    for g, c in grams.items():
        if len(g) == 2:
            assert model.prob(g[1], g[:1]) == c / ctx_totals[g[:1]]
    # unseen-in-context event hits the floor, not zero
    assert model.prob("a", ("zzz",)) >= lm.UNK_FLOOR


def test_distributions_normalize():
    rng = random.Random(11)
    vocab = ["a", "b", "c", "d", "e"]
    for smoothing in lm.SMOOTHING_MODES:
        for _ in range(10):
            order = rng.randint(1, 3)
            model = lm.train(_random_corpus(rng, vocab), order=order, smoothing=smoothing)
            for ctx in model.stored_contexts():
                total = sum(
                    model.conditional_ids(w, ctx) for w in model.vocab.event_ids()
                )
                assert abs(total - 1.0) < 1e-6, (smoothing, order, ctx, total)


def test_uniform_perplexity_equals_vocab_size():
    # 5 event types (3 words + EOS + UNK), every unigram equally frequent
    train = corpus.Corpus.from_lines(["a b c"])
    model = lm.train(train, order=1, smoothing="mle")
    test = corpus.Corpus.from_lines(["a c b", "b"])
    assert abs(lm.perplexity(model, test) - 4.0) < 1e-9 * 4.0  # EOS is the 4th event
    # with UNK occupying probability mass: witten-bell spreads to 5 events
    assert model.prob("a") == 0.25


def test_perplexity_is_two_to_the_entropy():
    rng = random.Random(3)
    vocab = ["a", "b", "c", "d"]
    for smoothing in lm.SMOOTHING_MODES:
        model = lm.train(_random_corpus(rng, vocab, n_sents=20), order=2, smoothing=smoothing)
        test = _random_corpus(rng, vocab, n_sents=5)
        h = lm.cross_entropy(model, test)
        assert math.isclose(lm.perplexity(model, test), 2.0 ** h, rel_tol=1e-12)


def test_witten_bell_hand_case():
    # context (a): counts b:2, c:1 -> T=2, total=3, gamma=2/5
    model = lm.train(
        corpus.Corpus.from_lines(["a b", "a b", "a c"]), order=2, smoothing="witten-bell"
    )
    def unigram(w):
        return model.conditional_ids(model.vocab.id(w), ())

    assert math.isclose(model.prob("b", ("a",)), 2.0 / 5.0 + 2.0 / 5.0 * unigram("b"))
    assert math.isclose(model.prob("c", ("a",)), 1.0 / 5.0 + 2.0 / 5.0 * unigram("c"))


def test_kneser_ney_prefers_diverse_histories():
    # "c" follows many histories, "d" always follows the same one, with equal
    # unigram frequency -> continuation probability of c must win
    lines = ["a c", "b c", "e c", "g c", "f d", "f d", "f d", "f d"]
    model = lm.train(corpus.Corpus.from_lines(lines), order=2, smoothing="modified-kneser-ney")
    uni_c = model.conditional_ids(model.vocab.id("c"), ())
    uni_d = model.conditional_ids(model.vocab.id("d"), ())
    assert uni_c > uni_d


def test_kneser_ney_fallback_warning(caplog):
    import logging

    with caplog.at_level(logging.WARNING, logger="corpusmine.lm"):
        lm.train(corpus.Corpus.from_lines(["a b"]), order=2, smoothing="modified-kneser-ney")
    assert any("falling back" in r.message for r in caplog.records)


def test_bos_never_predicted():
    rng = random.Random(5)
    model = lm.train(_random_corpus(rng, ["a", "b", "c"], n_sents=10), order=2)
    assert lm.BOS not in list(model.vocab.event_symbols())
    assert model.prob("a", (lm.BOS,)) > 0  # but BOS is a valid history


def test_mixture_em_interior_optimum():
    a = lm.train(corpus.Corpus.from_lines(["a a b", "a b a", "b a a"]), order=1, smoothing="witten-bell")
    b = lm.train(corpus.Corpus.from_lines(["c c d", "c d c", "d c c"]), order=1,
                 smoothing="witten-bell", vocab=a.vocab)
    dev = corpus.Corpus.from_lines(["a a", "c c", "a c"])
    mix = lm.interpolate([a, b], dev)
    assert abs(sum(mix.weights) - 1.0) < 1e-9
    history = mix.dev_loglik_history
    assert all(history[i + 1] >= history[i] - 1e-12 for i in range(len(history) - 1))
    # grid-search oracle over w in [0, 1]
    events = [list(lm.sentence_events(s)) for s in dev]

    def loglik(w):
        total = 0.0
        for evs in events:
            for word, hist in evs:
                total += math.log(w * a.prob(word, hist) + (1 - w) * b.prob(word, hist))
        return total

    grid = [i / 100 for i in range(101)]
    best = max(grid, key=loglik)
    assert abs(mix.weights[0] - best) < 0.02
    # mixture must not lose to either component on dev
    ppl = [lm.perplexity(m, dev) for m in (a, b)]
    assert lm.perplexity(mix, dev) <= min(ppl) + 1e-6


def test_mixture_validation():
    model = lm.train(corpus.Corpus.from_lines(["a b"]), order=1, smoothing="witten-bell")
    with pytest.raises(ToolkitError):
        lm.MixtureModel([model], [0.5])
    with pytest.raises(ToolkitError):
        lm.interpolate([model], corpus.Corpus.from_lines([]))  # empty dev


def test_model_file_round_trip(tmp_path):
    rng = random.Random(9)
    for smoothing in lm.SMOOTHING_MODES:
        model = lm.train(_random_corpus(rng, ["a", "b", "c", "d"], n_sents=15),
                         order=3, smoothing=smoothing)
        p1 = tmp_path / ("m1." + smoothing)
        lm.write_model(model, p1)
        loaded = lm.read_model(p1)
        assert loaded.order == model.order and loaded.smoothing == model.smoothing
        # identical queries
        for _ in range(50):
            w = rng.choice(["a", "b", "c", "d", "zzz"])
            hist = tuple(rng.choice(["a", "b"]) for _ in range(rng.randint(0, 3)))
            assert math.isclose(loaded.prob(w, hist), model.prob(w, hist), rel_tol=1e-9)
        # write(read(file)) is byte-identical
        p2 = tmp_path / ("m2." + smoothing)
        lm.write_model(loaded, p2)
        assert p2.read_bytes() == p1.read_bytes()


def test_model_file_header(tmp_path):
    model = lm.train(corpus.Corpus.from_lines(["a b c"]), order=2, smoothing="witten-bell")
    path = tmp_path / "m.lm"
    lm.write_model(model, path)
    text = path.read_text(encoding="utf-8")
    assert text.startswith("\\smoothing: witten-bell\n")
    assert "\\data\\" in text and "\\1-grams:" in text and "\\2-grams:" in text
