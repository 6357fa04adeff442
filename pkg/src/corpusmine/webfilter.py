"""Domain filtering of harvested document collections.

Topic-relevance scoring of located documents (term occurrences weighted by
term and location weights), ppl1 perplexity scoring, top-K% document
filtering, and the combined document-then-sentence K/N filter.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

from . import lm
from .errors import FormatError, ToolkitError

LOCATIONS = ("title", "headings", "metadata", "body")


@dataclass(frozen=True)
class TopicTerm:
    tokens: tuple
    weight: float
    topic_class: str

    def __post_init__(self):
        if len(self.tokens) < 1:
            raise FormatError("topic terms must be non-empty")


@dataclass
class TopicDefinition:
    entries: list


@dataclass
class LocationWeights:
    """Per-location weights; defaults are explicit and configurable."""

    title: float = 10.0
    headings: float = 4.0
    metadata: float = 2.0
    body: float = 1.0

    def __post_init__(self):
        for loc in LOCATIONS:
            if getattr(self, loc) < 0:
                raise ToolkitError("location weights must be >= 0")

    def get(self, location):
        return getattr(self, location)


@dataclass
class LocatedDocument:
    """Document text split into the four location classes, line by line."""

    id: str
    sections: dict

    def __post_init__(self):
        for loc in self.sections:
            if loc not in LOCATIONS:
                raise FormatError("unknown location class %r" % loc)
        if not any(self.sections.get(loc) for loc in LOCATIONS):
            raise FormatError("document %r has no content in any location" % self.id)

    def lines(self, location):
        return self.sections.get(location, [])

    def all_lines(self):
        for loc in LOCATIONS:
            for line in self.lines(loc):
                yield line


def default_term_weight(term_tokens):
    """A term's default relevance weight is its length in tokens."""
    if not term_tokens:
        raise ToolkitError("term must be non-empty")
    return float(len(term_tokens))


def count_occurrences(term_tokens, tokens):
    """Occurrences of a contiguous token run; overlapping matches count."""
    k = len(term_tokens)
    term = list(term_tokens)
    return sum(1 for i in range(len(tokens) - k + 1) if tokens[i : i + k] == term)


def topic_relevance(doc, topic, loc_weights=None):
    """Weighted occurrence sum over all topic terms and location classes."""
    if loc_weights is None:
        loc_weights = LocationWeights()
    score = 0.0
    for loc in LOCATIONS:
        wl = loc_weights.get(loc)
        if wl == 0:
            continue
        line_tokens = [line.split() for line in doc.lines(loc)]
        for entry in topic.entries:
            n = sum(count_occurrences(entry.tokens, toks) for toks in line_tokens)
            score += n * entry.weight * wl
    return score


def filter_documents_topk(scored_docs, k):
    """Best floor(k/100 * |docs|) document ids by score, ties by id."""
    if not 0 < k <= 100:
        raise ToolkitError("K must be in (0, 100]")
    ranked = sorted(scored_docs, key=lambda ds: (-ds[1], ds[0]))
    n = int(k / 100.0 * len(ranked))
    return [doc_id for doc_id, _ in ranked[:n]]


def ppl1(model, sentence):
    """Perplexity whose word count excludes the end-of-sentence event.

    10 ** (-log10 P / W) with P over word events plus EOS and W the number
    of words only."""
    if hasattr(sentence, "words"):
        words = sentence.words
    elif isinstance(sentence, str):
        words = sentence.split()
    else:
        words = list(sentence)
    if not words:
        raise ToolkitError("ppl1 of an empty sentence is undefined")
    log10p = sum(
        math.log10(model.prob(w, h)) for w, h in lm.sentence_events(words)
    )
    return 10.0 ** (-log10p / len(words))


def combined_filter(docs, topic, k, n, in_lm, loc_weights=None):
    """Document-then-sentence filter.

    Keeps the top K% of documents by topic relevance, splits the survivors
    into sentences (lines), ranks them ascending by ppl1 under the in-domain
    LM and keeps the top N%.  Returns (doc_id, sentence) pairs."""
    if not 0 < n <= 100:
        raise ToolkitError("N must be in (0, 100]")
    scored = [(d.id, topic_relevance(d, topic, loc_weights)) for d in docs]
    kept_ids = set(filter_documents_topk(scored, k))
    by_id = {d.id: d for d in docs}
    sentences = [
        (d.id, line)
        for d in docs
        if d.id in kept_ids
        for line in d.all_lines()
        if line.split()
    ]
    ranked = sorted(
        range(len(sentences)),
        key=lambda i: (ppl1(in_lm, sentences[i][1]), i),
    )
    keep = int(n / 100.0 * len(sentences))
    return [sentences[i] for i in ranked[:keep]]


# --- file formats ---------------------------------------------------------------


def load_topic_file(path):
    """TSV `term<TAB>weight<TAB>class`; a blank weight falls back to the
    term's token count."""
    entries = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise FormatError("%s line %d: expected term<TAB>weight<TAB>class"
                              % (path, lineno))
        tokens = tuple(fields[0].split())
        if not tokens:
            raise FormatError("%s line %d: empty term" % (path, lineno))
        weight = float(fields[1]) if fields[1].strip() else default_term_weight(tokens)
        entries.append(TopicTerm(tokens, weight, fields[2]))
    return TopicDefinition(entries)


def parse_located_document(doc_id, text):
    """Sectioned text with #title/#headings/#metadata/#body markers; plain
    text without markers is treated as all-body."""
    sections = {}
    current = None
    has_marker = any(
        line.strip() in ("#" + loc for loc in LOCATIONS) for line in text.splitlines()
    )
    if not has_marker:
        body = [line for line in text.splitlines() if line.strip()]
        return LocatedDocument(doc_id, {"body": body})
    for line in text.splitlines():
        stripped = line.strip()
        if stripped in ("#" + loc for loc in LOCATIONS):
            current = stripped[1:]
            sections.setdefault(current, [])
            continue
        if not stripped:
            continue
        if current is None:
            raise FormatError("document %r: content before the first section marker"
                              % doc_id)
        sections[current].append(line)
    return LocatedDocument(doc_id, sections)


def load_located_collection(path):
    """Directory of sectioned/plain document files, or a TSV of
    `doc_id<TAB>text` treated as all-body documents."""
    path = Path(path)
    docs = []
    if path.is_dir():
        for child in sorted(path.iterdir()):
            if child.is_file():
                docs.append(
                    parse_located_document(child.name, child.read_text(encoding="utf-8"))
                )
    else:
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            fields = line.split("\t", 1)
            if len(fields) != 2:
                raise FormatError("%s line %d: expected doc_id<TAB>text" % (path, lineno))
            docs.append(LocatedDocument(fields[0], {"body": [fields[1]]}))
    return docs
