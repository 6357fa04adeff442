"""Cross-language document retrieval over comparable collections.

TF-IDF query generation from a (pre-translated) source document, classic
coord/tf/idf/norm retrieval scoring, a relative length filter around the
source length, and micro-averaged P/R/F1 evaluation.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, ToolkitError


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple

    def __post_init__(self):
        if len(self.tokens) < 1:
            raise FormatError("document %r is empty" % self.id)

    def __len__(self):
        return len(self.tokens)


class DocumentIndex:
    """Term/document frequencies and lengths for a fixed collection."""

    def __init__(self, documents):
        docs = list(documents)
        if not docs:
            raise ToolkitError("cannot index an empty collection")
        ids = [d.id for d in docs]
        if len(set(ids)) != len(ids):
            raise FormatError("duplicate document ids in collection")
        self.documents = {d.id: d for d in docs}
        self.n_docs = len(docs)
        self.tf = {d.id: Counter(d.tokens) for d in docs}
        self.lengths = {d.id: len(d.tokens) for d in docs}
        self.df = Counter()
        for d in docs:
            self.df.update(set(d.tokens))

    def doc_ids(self):
        return sorted(self.documents)


@dataclass
class Query:
    """Weighted query terms, sorted by weight descending."""

    terms: list
    size: int


@dataclass
class LengthFilterParams:
    delta: float
    multiplier: float = 4.0

    def __post_init__(self):
        if self.delta < 0:
            raise ToolkitError("delta must be >= 0")


def estimate_delta(parallel_corpus):
    """Mean relative length deviation |l_t - l_s| / l_s over a parallel corpus."""
    pairs = list(parallel_corpus.pairs)
    if not pairs:
        raise ToolkitError("cannot estimate delta from an empty corpus")
    return sum(
        abs(len(p.target) - len(p.source)) / len(p.source) for p in pairs
    ) / len(pairs)


def generate_query(doc, lambda_percent, index, stopwords=frozenset()):
    """Pick the top ceil(lambda_percent * len(doc)) terms by tf-idf weight.

    Weight is f(w,d) * log(|D| / f(w,D)); for terms absent from the index the
    idf factor is fixed at 1 so the weight reduces to the raw count.
    Stopwords are removed before ranking; numbers are kept."""
    if not 0 < lambda_percent <= 1:
        raise ToolkitError("lambda_percent must be in (0, 1]")
    counts = Counter(t for t in doc.tokens if t not in stopwords)
    weighted = []
    for term, f in counts.items():
        df = index.df.get(term, 0)
        weight = f * math.log(index.n_docs / df) if df > 0 else float(f)
        weighted.append((term, weight))
    weighted.sort(key=lambda tw: (-tw[1], tw[0]))
    size = max(1, math.ceil(lambda_percent * len(doc)))
    return Query(weighted[:size], size)


def score_document(query, doc_id, index):
    """coord(q,d) * sum over matched query terms of tf * idf * bst * norm.

    Concretization: tf = sqrt(raw count), idf = 1 + ln(|D| / (df + 1)),
    bst = 1, norm = 1 / sqrt(|d|)."""
    if not query.terms:
        return 0.0
    tf = index.tf[doc_id]
    norm = 1.0 / math.sqrt(index.lengths[doc_id])
    matched = 0
    total = 0.0
    for term, _ in query.terms:
        f = tf.get(term, 0)
        if f > 0:
            matched += 1
            idf = 1.0 + math.log(index.n_docs / (index.df.get(term, 0) + 1.0))
            total += math.sqrt(f) * idf * norm
    coord = matched / len(query.terms)
    return coord * total


def length_filter_candidates(source_len, index, params):
    """Documents whose length falls in source_len * (1 +/- multiplier*delta)."""
    if source_len < 1:
        raise ToolkitError("source length must be >= 1")
    spread = params.multiplier * params.delta
    lo = source_len * (1.0 - spread)
    hi = source_len * (1.0 + spread)
    return {d for d, n in index.lengths.items() if lo <= n <= hi}


def retrieve(source_doc, index, lambda_percent, n_best, params=None,
             stopwords=frozenset()):
    """Rank candidate documents for one source document.

    Pipeline: optional length filter, query generation, scoring over the
    surviving candidates, top n_best by score (ties by document id)."""
    if params is not None:
        candidates = length_filter_candidates(len(source_doc), index, params)
    else:
        candidates = set(index.documents)
    query = generate_query(source_doc, lambda_percent, index, stopwords)
    scored = [(score_document(query, d, index), d) for d in candidates]
    scored.sort(key=lambda sd: (-sd[0], sd[1]))
    return [(d, s) for s, d in scored[:n_best]]


def evaluate_retrieval(results, gold):
    """Micro-averaged precision/recall/F1 over all queries.

    results: source id -> ranked target ids; gold: source id -> set of
    relevant target ids."""
    retrieved = 0
    relevant = 0
    hits = 0
    for src, targets in gold.items():
        got = results.get(src, [])
        retrieved += len(got)
        relevant += len(targets)
        hits += sum(1 for t in got if t in targets)
    p = hits / retrieved if retrieved else 0.0
    r = hits / relevant if relevant else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


# --- collection and result files ----------------------------------------------


def load_collection(path):
    """Load documents from a TSV of `doc_id<TAB>text` or a directory of
    UTF-8 token files (file name = document id)."""
    path = Path(path)
    docs = []
    if path.is_dir():
        for child in sorted(path.iterdir()):
            if child.is_file():
                tokens = tuple(child.read_text(encoding="utf-8").split())
                docs.append(Document(child.name, tokens))
    else:
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            fields = line.split("\t", 1)
            if len(fields) != 2:
                raise FormatError("%s line %d: expected doc_id<TAB>text" % (path, lineno))
            docs.append(Document(fields[0], tuple(fields[1].split())))
    return docs


def load_stopwords(path):
    return frozenset(
        line.strip()
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    )


def load_gold(path):
    gold = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise FormatError("%s line %d: expected source_id<TAB>target_id" % (path, lineno))
        gold.setdefault(fields[0], set()).add(fields[1])
    return gold


def write_results(results, path, header_lines=()):
    lines = list(header_lines)
    for src in sorted(results):
        for rank, (doc_id, score) in enumerate(results[src], 1):
            lines.append("%s\t%d\t%s\t%s" % (src, rank, doc_id, repr(score)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
