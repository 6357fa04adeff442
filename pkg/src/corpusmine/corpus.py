"""Corpus data model, I/O and deterministic preprocessing transforms.

Input text is assumed pre-tokenized: tokens are whitespace-delimited and the
toolkit never re-tokenizes.  Factored corpora carry up to four factors per
token (``surface|lemma|pos|ne``); trailing factors may be omitted.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import FormatError, MissingFactorError, ToolkitError

FACTOR_SEP = "|"
NUMBER_PLACEHOLDER = "@num@"
FACTOR_VIEWS = ("f", "fn", "l", "ln", "t", "tn")

_DIGIT_RUN = re.compile(r"[0-9]+")
# split point: U+002D between two non-hyphen characters
_HYPHEN_SPLIT = re.compile(r"(?<=[^-])-(?=[^-])")


@dataclass(frozen=True)
class Token:
    """One token with optional lemma/POS/NE factors."""

    surface: str
    lemma: Optional[str] = None
    pos: Optional[str] = None
    ne: Optional[str] = None

    def __post_init__(self):
        if not self.surface:
            raise FormatError("token surface must be non-empty")
        if any(c.isspace() for c in self.surface) or FACTOR_SEP in self.surface:
            raise FormatError(
                "token surface may not contain whitespace or %r: %r"
                % (FACTOR_SEP, self.surface)
            )


@dataclass(frozen=True)
class Sentence:
    tokens: tuple

    def __post_init__(self):
        if len(self.tokens) < 1:
            raise FormatError("sentences must contain at least one token")

    def __len__(self):
        return len(self.tokens)

    @property
    def words(self):
        return [t.surface for t in self.tokens]

    @property
    def text(self):
        return " ".join(t.surface for t in self.tokens)

    @classmethod
    def from_plain(cls, line):
        return cls(tuple(Token(w) for w in line.split()))

    @classmethod
    def from_factored(cls, line):
        tokens = []
        for chunk in line.split():
            parts = chunk.split(FACTOR_SEP)
            if len(parts) > 4:
                raise FormatError("too many factors in token %r" % chunk)
            parts += [""] * (4 - len(parts))
            tokens.append(
                Token(
                    parts[0],
                    lemma=parts[1] or None,
                    pos=parts[2] or None,
                    ne=parts[3] or None,
                )
            )
        return cls(tuple(tokens))

    def factored_text(self):
        chunks = []
        for t in self.tokens:
            parts = [t.surface, t.lemma or "", t.pos or "", t.ne or ""]
            while len(parts) > 1 and parts[-1] == "":
                parts.pop()
            chunks.append(FACTOR_SEP.join(parts))
        return " ".join(chunks)


@dataclass(frozen=True)
class SentencePair:
    source: Sentence
    target: Sentence


@dataclass(frozen=True)
class Corpus:
    sentences: tuple
    id: str = ""

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @classmethod
    def from_lines(cls, lines, id=""):
        return cls(tuple(Sentence.from_plain(l) for l in lines), id=id)


@dataclass(frozen=True)
class ParallelCorpus:
    pairs: tuple
    id: str = ""

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def source_corpus(self):
        return Corpus(tuple(p.source for p in self.pairs), id=self.id + ".src")

    def target_corpus(self):
        return Corpus(tuple(p.target for p in self.pairs), id=self.id + ".tgt")


@dataclass(frozen=True)
class Lexicon:
    """Source word -> single target phrase; the first listed translation wins."""

    entries: dict = field(default_factory=dict)

    def lookup(self, word):
        return self.entries.get(word)

    @classmethod
    def load(cls, path):
        entries = {}
        for line in _read_lines(path, allow_empty=True):
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise FormatError("lexicon line needs source<TAB>target: %r" % line)
            src, tgt = fields[0], fields[1]
            if " " in src:
                raise FormatError("lexicon keys must be single tokens: %r" % src)
            entries.setdefault(src, tgt)
        return cls(entries)


def _read_lines(path, allow_empty=False):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError("%s is not valid UTF-8: %s" % (path, exc)) from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not allow_empty:
        for i, line in enumerate(lines):
            if not line.strip():
                raise FormatError("%s: empty line %d" % (path, i + 1))
    return lines


def load_corpus(path, format="plain", id=None):
    """Load a corpus file.

    format: 'plain' (one sentence per line), 'factored'
    (``surface|lemma|pos|ne`` tokens) or 'tsv-parallel'
    (``source<TAB>target``).  Two-file parallel input goes through
    :func:`load_parallel`.
    """
    if id is None:
        id = Path(path).name
    lines = _read_lines(path)
    if format == "plain":
        return Corpus(tuple(Sentence.from_plain(l) for l in lines), id=id)
    if format == "factored":
        return Corpus(tuple(Sentence.from_factored(l) for l in lines), id=id)
    if format == "tsv-parallel":
        pairs = []
        for i, line in enumerate(lines):
            fields = line.split("\t")
            if len(fields) != 2:
                raise FormatError(
                    "%s line %d: expected source<TAB>target" % (path, i + 1)
                )
            pairs.append(
                SentencePair(Sentence.from_plain(fields[0]), Sentence.from_plain(fields[1]))
            )
        return ParallelCorpus(tuple(pairs), id=id)
    raise FormatError("unknown corpus format %r" % format)


def load_parallel(source_path, target_path, format="plain", id=None):
    """Load a two-file parallel corpus; the files must have equal line counts."""
    if id is None:
        id = "%s-%s" % (Path(source_path).name, Path(target_path).name)
    src_lines = _read_lines(source_path)
    tgt_lines = _read_lines(target_path)
    if len(src_lines) != len(tgt_lines):
        raise FormatError(
            "line-count mismatch: %s has %d lines, %s has %d"
            % (source_path, len(src_lines), target_path, len(tgt_lines))
        )
    parse = Sentence.from_factored if format == "factored" else Sentence.from_plain
    pairs = tuple(
        SentencePair(parse(s), parse(t)) for s, t in zip(src_lines, tgt_lines)
    )
    return ParallelCorpus(pairs, id=id)


def save_corpus(corpus, path, format="plain"):
    render = (lambda s: s.factored_text()) if format == "factored" else (lambda s: s.text)
    data = "".join(render(s) + "\n" for s in corpus.sentences)
    Path(path).write_text(data, encoding="utf-8", newline="\n")


def save_parallel(corpus, path):
    data = "".join(
        p.source.text + "\t" + p.target.text + "\n" for p in corpus.pairs
    )
    Path(path).write_text(data, encoding="utf-8", newline="\n")


def dedup(corpus):
    """Keep the first occurrence of each distinct sentence (or pair)."""
    seen = set()
    kept = []
    items = corpus.pairs if isinstance(corpus, ParallelCorpus) else corpus.sentences
    for item in items:
        if item not in seen:
            seen.add(item)
            kept.append(item)
    if isinstance(corpus, ParallelCorpus):
        return ParallelCorpus(tuple(kept), id=corpus.id)
    return Corpus(tuple(kept), id=corpus.id)


def length_filter(corpus, max_len=80):
    """Drop pairs where either side exceeds max_len tokens (strictly)."""
    if max_len < 1:
        raise ToolkitError("max_len must be >= 1")
    kept = tuple(
        p for p in corpus.pairs if len(p.source) <= max_len and len(p.target) <= max_len
    )
    return ParallelCorpus(kept, id=corpus.id)


def normalize_numbers(sentence):
    """Replace every maximal ASCII digit run with the @num@ placeholder."""
    tokens = tuple(
        Token(
            _DIGIT_RUN.sub(NUMBER_PLACEHOLDER, t.surface),
            lemma=t.lemma,
            pos=t.pos,
            ne=t.ne,
        )
        for t in sentence.tokens
    )
    return Sentence(tokens)


def normalize_apostrophes(sentence):
    """Replace U+2019 with the plain ASCII apostrophe U+0027."""
    tokens = tuple(
        Token(t.surface.replace("’", "'"), lemma=t.lemma, pos=t.pos, ne=t.ne)
        for t in sentence.tokens
    )
    return Sentence(tokens)


def hyphen_alt_markup(sentence, lexicon):
    """Annotate hyphenated words whose parts are all translatable.

    A token with internal hyphens is split on them; when every part has a
    lexicon entry the token is wrapped as
    ``<alt trans="T1 ... Tk">original</alt>``, else emitted unchanged.
    Returns the annotated sentence as text.
    """
    out = []
    for t in sentence.tokens:
        parts = _HYPHEN_SPLIT.split(t.surface)
        if len(parts) > 1:
            translations = [lexicon.lookup(p) for p in parts]
            if all(tr is not None for tr in translations):
                out.append('<alt trans="%s">%s</alt>' % (" ".join(translations), t.surface))
                continue
        out.append(t.surface)
    return " ".join(out)


def _project_token(token, view):
    if view in ("fn", "ln", "tn") and token.ne is not None:
        return token.ne
    base = view[0]
    if base == "f":
        return token.surface
    if base == "l":
        if token.lemma is None:
            raise MissingFactorError("token %r has no lemma factor" % token.surface)
        return token.lemma
    if token.pos is None:
        raise MissingFactorError("token %r has no POS factor" % token.surface)
    return token.pos


def factor_view(corpus, view):
    """Project a factored corpus onto one factor stream.

    Views: f (surface), l (lemma), t (POS tag); the *n variants substitute a
    token's NE category for its base projection whenever one is present.
    """
    if view not in FACTOR_VIEWS:
        raise MissingFactorError("unknown factor view %r" % view)
    if view.endswith("n") and not any(
        t.ne is not None for s in corpus.sentences for t in s.tokens
    ):
        raise MissingFactorError(
            "view %r requires NE factors but no token in %r carries one"
            % (view, corpus.id)
        )
    projected = tuple(
        Sentence(tuple(Token(_project_token(t, view)) for t in s.tokens))
        for s in corpus.sentences
    )
    return Corpus(projected, id="%s.%s" % (corpus.id, view))
