"""Domain-relevance scoring of general-corpus sentences, ranking and selection.

Criteria: cosine tf-idf against the in-domain corpus, per-word cross-entropy
under an in-domain LM, cross-entropy difference between in-domain and
general-domain LMs (monolingual and bilingual), and averaged fuzzy matching
score (word edit distance).  All LM-based scores are length-normalized
(bits per event).
"""

import math
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import lm
from .corpus import Corpus, factor_view
from .errors import FormatError, ToolkitError

HIGHER = "higher-is-better"
LOWER = "lower-is-better"

CRITERION_DIRECTIONS = {
    "cosine": HIGHER,
    "ce": LOWER,
    "ml": LOWER,
    "mml": LOWER,
    "fms": HIGHER,
}


@dataclass(frozen=True)
class ScoredSentence:
    index: int
    score: float
    criterion: str


@dataclass
class SelectionResult:
    indices: list
    criterion: str
    direction: str
    note: str = ""


def _words_of(item):
    if hasattr(item, "words"):
        return item.words
    if isinstance(item, str):
        return item.split()
    return list(item)


def _map_sharded(fn, items, threads=1):
    """Apply fn to each item, optionally across thread shards.

    Output order always equals input order, so results are identical for any
    thread count."""
    items = list(items)
    if threads <= 1 or len(items) < 2 * threads:
        return [fn(x) for x in items]
    bounds = [len(items) * i // threads for i in range(threads + 1)]
    shards = [items[bounds[i] : bounds[i + 1]] for i in range(threads)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda shard: [fn(x) for x in shard], shards))
    return [r for part in parts for r in part]


# --- cosine tf-idf ------------------------------------------------------------


def score_cosine(general, in_domain, threads=1):
    """Cosine between each general sentence's tf-idf vector and the tf-idf
    vector of the whole in-domain corpus taken as one pseudo-document.

    tf is the raw in-sentence count; idf = log(|D|/df) with |D| the number of
    general sentences and df clamped to >= 1.
    """
    gen_sents = [_words_of(s) for s in general]
    if not gen_sents or len(in_domain.sentences if hasattr(in_domain, "sentences") else in_domain) == 0:
        raise ToolkitError("both corpora must be non-empty")
    n_docs = len(gen_sents)
    df = Counter()
    for words in gen_sents:
        df.update(set(words))

    def idf(term):
        return math.log(n_docs / max(df[term], 1))

    query_tf = Counter()
    for s in in_domain:
        query_tf.update(_words_of(s))
    query = {t: c * idf(t) for t, c in query_tf.items()}
    query_norm = math.sqrt(sum(v * v for v in query.values()))

    def one(words):
        tf = Counter(words)
        dot = 0.0
        norm = 0.0
        for t, c in tf.items():
            w = c * idf(t)
            norm += w * w
            qv = query.get(t)
            if qv is not None:
                dot += w * qv
        denom = math.sqrt(norm) * query_norm
        return dot / denom if denom > 0 and dot != 0.0 else 0.0

    return _map_sharded(one, gen_sents, threads)


# --- perplexity-based criteria ------------------------------------------------


def sentence_cross_entropy(model, sentence):
    """Per-event cross-entropy (bits) of one sentence: word events plus EOS."""
    events = list(lm.sentence_events(_words_of(sentence)))
    total = sum(math.log2(model.prob(w, h)) for w, h in events)
    return -total / len(events)


def score_cross_entropy(general, in_lm, threads=1):
    return _map_sharded(lambda s: sentence_cross_entropy(in_lm, s), general, threads)


def score_moore_lewis(general, in_lm, out_lm, threads=1):
    """Cross-entropy difference H_in(x) - H_out(x); lower is more in-domain."""
    return _map_sharded(
        lambda s: sentence_cross_entropy(in_lm, s) - sentence_cross_entropy(out_lm, s),
        general,
        threads,
    )


def score_bilingual_ml(general, in_src_lm, out_src_lm, in_tgt_lm, out_tgt_lm, threads=1):
    """Bilingual cross-entropy difference summed over both sides of each pair."""

    def one(pair):
        return (
            sentence_cross_entropy(in_src_lm, pair.source)
            - sentence_cross_entropy(out_src_lm, pair.source)
        ) + (
            sentence_cross_entropy(in_tgt_lm, pair.target)
            - sentence_cross_entropy(out_tgt_lm, pair.target)
        )

    return _map_sharded(one, general, threads)


def sample_out_subset(general, size, seed):
    """Seeded random general-corpus subset used to train the out-domain LM."""
    sentences = list(general.sentences if hasattr(general, "sentences") else general)
    if size > len(sentences):
        raise ToolkitError("subset size exceeds corpus size")
    rng = random.Random(seed)
    picked = sorted(rng.sample(range(len(sentences)), size))
    return Corpus(tuple(sentences[i] for i in picked), id="out-subset-seed%d" % seed)


def train_selection_models(general, in_domain, order=4, seed=0,
                           smoothing="modified-kneser-ney"):
    """Train the in/out LM pair for cross-entropy-difference scoring.

    Both models share the in-domain vocabulary; the out-domain model is
    trained on a seeded random general subset equal in size to the in-domain
    corpus."""
    in_lm = lm.train(in_domain, order=order, smoothing=smoothing)
    out_subset = sample_out_subset(general, len(in_domain), seed)
    out_lm = lm.train(out_subset, order=order, smoothing=smoothing, vocab=in_lm.vocab)
    return in_lm, out_lm


# --- fuzzy matching score -----------------------------------------------------


def edit_distance(a, b):
    """Word-level Levenshtein distance between two token sequences."""
    a = _words_of(a)
    b = _words_of(b)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, wa in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, wb in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (wa != wb))
        prev = cur
    return prev[len(b)]


def fms(a, b):
    """Fuzzy matching score: 1 - edit_distance / max length, clamped to [0,1]."""
    a = _words_of(a)
    b = _words_of(b)
    score = 1.0 - edit_distance(a, b) / max(len(a), len(b))
    return min(max(score, 0.0), 1.0)


def _encode(sentences, table):
    out = []
    for words in sentences:
        out.append([table.setdefault(w, len(table)) for w in words])
    return out


def _led_against_refs(src, refs_padded, ref_lens):
    """Exact edit distance of one sequence against a padded batch of refs."""
    n_refs, max_len = refs_padded.shape
    prev = np.tile(np.arange(max_len + 1, dtype=np.int32), (n_refs, 1))
    cur = np.empty_like(prev)
    for i, sym in enumerate(src, 1):
        cur[:, 0] = i
        cost = (refs_padded != sym).astype(np.int32)
        for j in range(1, max_len + 1):
            np.minimum(prev[:, j] + 1, cur[:, j - 1] + 1, out=cur[:, j])
            np.minimum(cur[:, j], prev[:, j - 1] + cost[:, j - 1], out=cur[:, j])
        prev, cur = cur, prev
    return prev[np.arange(n_refs), ref_lens]


def score_fms(general, reference, cutoff=None, threads=1):
    """Mean FMS of each general sentence against every reference sentence.

    Exact quadratic DP by default.  With a cutoff, pairs whose length bound
    1 - |len difference| / max length falls below it contribute 0 to the
    average (approximate fast mode)."""
    table = {}
    gen = _encode([_words_of(s) for s in general], table)
    refs = _encode([_words_of(s) for s in reference], table)
    if not refs:
        raise ToolkitError("reference corpus must be non-empty")
    n_refs = len(refs)
    max_len = max(len(r) for r in refs)
    padded = np.full((n_refs, max_len), -1, dtype=np.int64)
    for i, r in enumerate(refs):
        padded[i, : len(r)] = r
    ref_lens = np.array([len(r) for r in refs])

    def one(src):
        src_len = len(src)
        maxes = np.maximum(ref_lens, src_len)
        if cutoff is not None:
            bound = 1.0 - np.abs(ref_lens - src_len) / maxes
            live = np.nonzero(bound >= cutoff)[0]
            if live.size == 0:
                return 0.0
            led = _led_against_refs(src, padded[live], ref_lens[live])
            scores = np.clip(1.0 - led / maxes[live], 0.0, 1.0)
            return float(scores.sum() / n_refs)
        led = _led_against_refs(src, padded, ref_lens)
        scores = np.clip(1.0 - led / maxes, 0.0, 1.0)
        return float(scores.mean())

    return _map_sharded(one, gen, threads)


# --- ranking and selection ----------------------------------------------------


def _ranked_indices(scores, direction):
    sign = -1.0 if direction == HIGHER else 1.0
    return sorted(range(len(scores)), key=lambda i: (sign * scores[i], i))


def select_top(scores, k, direction, criterion="", note=""):
    """Keep the best floor(k/100 * |corpus|) sentences; ties break by index."""
    if not 0 < k <= 100:
        raise ToolkitError("K must be in (0, 100]")
    n = int(k / 100.0 * len(scores))
    if n == 0:
        raise ToolkitError("K=%g keeps zero sentences of %d" % (k, len(scores)))
    ranked = _ranked_indices(scores, direction)
    return SelectionResult(ranked[:n], criterion, direction, note=note)


def threshold_filter(scores, theta, direction, criterion="", note=""):
    """Keep sentences scoring strictly better than theta."""
    if direction == HIGHER:
        keep = [i for i in _ranked_indices(scores, direction) if scores[i] > theta]
    else:
        keep = [i for i in _ranked_indices(scores, direction) if scores[i] < theta]
    return SelectionResult(keep, criterion, direction, note=note)


def factored_select(general, in_domain, view, criterion, k=None, theta=None,
                    order=4, seed=0, smoothing="modified-kneser-ney",
                    threads=1):
    """Score through a linguistic factor view, select over original sentences.

    Both corpora are projected with the chosen view, scored with the chosen
    criterion, and the resulting ranking indexes the original corpus."""
    direction = CRITERION_DIRECTIONS.get(criterion)
    if direction is None or criterion == "mml":
        raise ToolkitError("unsupported factored criterion %r" % criterion)
    gen_proj = factor_view(general, view)
    in_proj = factor_view(in_domain, view)
    if criterion == "cosine":
        scores = score_cosine(gen_proj, in_proj, threads=threads)
    elif criterion == "ce":
        in_lm = lm.train(in_proj, order=order, smoothing=smoothing)
        scores = score_cross_entropy(gen_proj, in_lm, threads=threads)
    elif criterion == "ml":
        in_lm, out_lm = train_selection_models(
            gen_proj, in_proj, order=order, seed=seed, smoothing=smoothing
        )
        scores = score_moore_lewis(gen_proj, in_lm, out_lm, threads=threads)
    else:  # fms
        scores = score_fms(gen_proj, in_proj, threads=threads)
    note = "view=%s seed=%d" % (view, seed)
    if theta is not None:
        return threshold_filter(scores, theta, direction, criterion, note=note)
    return select_top(scores, 100 if k is None else k, direction, criterion, note=note)


# --- score and selection files ------------------------------------------------


def write_scores(path, scores, meta=None):
    lines = []
    for key, value in (meta or {}).items():
        lines.append("# %s: %s" % (key, value))
    for i, s in enumerate(scores):
        lines.append("%d\t%s" % (i, repr(float(s))))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_scores(path):
    scores = {}
    meta = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line.lstrip("# ")
            if ":" in body:
                key, value = body.split(":", 1)
                meta[key.strip()] = value.strip()
            continue
        idx, score = line.split("\t")
        scores[int(idx)] = float(score)
    out = [0.0] * (max(scores) + 1 if scores else 0)
    for i, s in scores.items():
        out[i] = s
    if len(scores) != len(out):
        raise FormatError("%s: missing score indices" % path)
    return out, meta


def write_selection(path, result, meta=None):
    header = {"criterion": result.criterion, "direction": result.direction}
    if result.note:
        header["note"] = result.note
    header.update(meta or {})
    lines = ["# %s: %s" % (k, v) for k, v in header.items()]
    lines += [str(i) for i in result.indices]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_selection(path):
    meta = {}
    indices = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line.lstrip("# ")
            if ":" in body:
                key, value = body.split(":", 1)
                meta[key.strip()] = value.strip()
            continue
        indices.append(int(line))
    return SelectionResult(
        indices,
        meta.get("criterion", ""),
        meta.get("direction", HIGHER),
        note=meta.get("note", ""),
    )
