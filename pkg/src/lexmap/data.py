"""Lexicon, embedding and event-stream I/O plus synthetic data generation.

All loaders produce immutable values that are safe to share across threads.
Text is handled as unicode scalar sequences throughout.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ParseError, ValidationError


@dataclass(frozen=True)
class LexiconEntry:
    """One word row: id equals the row position and stays contiguous."""

    id: int
    form: str
    frequency: int
    pronunciation: str | None = None


class Lexicon:
    """Ordered word entries with token frequencies.

    Homographs (repeated forms) are retained as separate rows; row identity,
    not the form string, is what evaluation scores against.
    """

    def __init__(self, entries):
        entries = list(entries)
        for pos, e in enumerate(entries):
            if e.id != pos:
                raise ValidationError(
                    f"entry id {e.id} at position {pos}: ids must be 0-based and contiguous"
                )
            if e.frequency < 0:
                raise ValidationError(f"entry {e.form!r}: negative frequency {e.frequency}")
        self._entries = tuple(entries)

    @classmethod
    def from_rows(cls, rows):
        """Build from (form, frequency[, pronunciation]) tuples; ids assigned by position."""
        entries = []
        for i, row in enumerate(rows):
            pron = row[2] if len(row) > 2 else None
            entries.append(LexiconEntry(i, str(row[0]), int(row[1]), pron))
        return cls(entries)

    def __len__(self):
        return len(self._entries)

    def __getitem__(self, i):
        return self._entries[i]

    def __iter__(self):
        return iter(self._entries)

    def __eq__(self, other):
        return isinstance(other, Lexicon) and self._entries == other._entries

    @property
    def forms(self):
        return [e.form for e in self._entries]

    @property
    def frequencies(self):
        return np.array([e.frequency for e in self._entries], dtype=np.int64)

    def has_pronunciations(self):
        return any(e.pronunciation is not None for e in self._entries)

    def form_to_id(self):
        """Map each form to its lowest row id (homographs resolve to the first row)."""
        out = {}
        for e in self._entries:
            out.setdefault(e.form, e.id)
        return out

    def save(self, path, fmt=None):
        """Write the header `form,frequency[,pronunciation]` plus one row per entry."""
        path = Path(path)
        delim = _delimiter(path, fmt)
        with_pron = self.has_pronunciations()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, delimiter=delim, lineterminator="\n")
            header = ["form", "frequency"] + (["pronunciation"] if with_pron else [])
            writer.writerow(header)
            for e in self._entries:
                row = [e.form, str(e.frequency)]
                if with_pron:
                    row.append(e.pronunciation or "")
                writer.writerow(row)


@dataclass
class EmbeddingTable:
    """Staging area for real-valued word vectors before alignment."""

    dimension: int
    vectors: dict
    duplicates_skipped: int = 0

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(f"{len(self.vectors)} {self.dimension}\n")
            for form, vec in self.vectors.items():
                comps = " ".join(repr(float(v)) for v in vec)
                fh.write(f"{form} {comps}\n")


@dataclass(frozen=True)
class EventStream:
    """Lexicon row ids in learning order."""

    events: np.ndarray
    skipped: int = 0

    def __len__(self):
        return len(self.events)


def _delimiter(path, fmt):
    if fmt is not None:
        if fmt not in ("csv", "tsv"):
            raise ValidationError(f"unknown lexicon format {fmt!r} (expected csv or tsv)")
        return "\t" if fmt == "tsv" else ","
    return "\t" if Path(path).suffix.lower() == ".tsv" else ","


def load_lexicon(path, fmt=None):
    """Read a lexicon file with header `form,frequency[,pronunciation]`.

    Frequencies must parse as non-negative integers; duplicate forms are kept
    as separate rows.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"lexicon file not found: {path}")
    delim = _delimiter(path, fmt)
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delim)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file, expected a header row") from None
        cols = {name.strip(): i for i, name in enumerate(header)}
        for required in ("form", "frequency"):
            if required not in cols:
                raise FormatError(f"{path}: header must name a {required!r} column")
        i_form, i_freq = cols["form"], cols["frequency"]
        i_pron = cols.get("pronunciation")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            width = max(i_form, i_freq, i_pron if i_pron is not None else 0)
            if len(row) <= width:
                raise ParseError(f"{path}:{lineno}: expected {width + 1} fields, got {len(row)}")
            try:
                freq = int(row[i_freq])
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: frequency {row[i_freq]!r} is not an integer"
                ) from None
            if freq < 0:
                raise ValidationError(f"{path}:{lineno}: negative frequency {freq}")
            pron = None
            if i_pron is not None and row[i_pron].strip():
                pron = row[i_pron]
            rows.append((row[i_form], freq, pron))
    return Lexicon.from_rows(rows)


def load_embeddings(path):
    """Read a text embedding file: first line `m q`, then `form v1 .. vq` per line.

    Duplicate forms keep the first occurrence; the skip count is recorded on
    the returned table.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"embedding file not found: {path}")
    vectors = {}
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise FormatError(f"{path}:1: expected header 'm q', got {' '.join(header)!r}")
        try:
            declared_m, q = int(header[0]), int(header[1])
        except ValueError:
            raise FormatError(f"{path}:1: non-integer counts in header") from None
        if q < 1:
            raise FormatError(f"{path}:1: dimension must be positive, got {q}")
        n_rows = 0
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            n_rows += 1
            form, comps = parts[0], parts[1:]
            if len(comps) != q:
                raise FormatError(
                    f"{path}:{lineno}: expected {q} components for {form!r}, got {len(comps)}"
                )
            try:
                vec = np.array([float(c) for c in comps], dtype=np.float64)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric vector component") from None
            if not np.all(np.isfinite(vec)):
                raise FormatError(f"{path}:{lineno}: non-finite vector component")
            if form in vectors:
                duplicates += 1
            else:
                vectors[form] = vec
    if n_rows != declared_m:
        raise FormatError(f"{path}: header declares {declared_m} rows, file has {n_rows}")
    return EmbeddingTable(dimension=q, vectors=vectors, duplicates_skipped=duplicates)


def align(lexicon, table):
    """Drop entries without an embedding, recompact ids, and stack the matrix.

    Returns (lexicon, semantic_matrix, dropped_forms). Aligning an already
    aligned pair is the identity.
    """
    kept, dropped = [], []
    for e in lexicon:
        if e.form in table.vectors:
            kept.append(e)
        else:
            dropped.append(e.form)
    if not kept:
        raise ValidationError("no lexicon entry has an embedding; nothing to align")
    new_lex = Lexicon.from_rows((e.form, e.frequency, e.pronunciation) for e in kept)
    S = np.stack([np.asarray(table.vectors[e.form], dtype=np.float64) for e in kept])
    return new_lex, S, dropped


def expand_to_events(lexicon, policy="seeded_shuffle", seed=0):
    """Repeat each row id by its frequency; total length is the token count.

    `seeded_shuffle` permutes the expansion deterministically from the seed;
    `as_listed` keeps lexicon order. Zero-frequency words never appear.
    """
    freqs = lexicon.frequencies
    if freqs.sum() == 0:
        raise ValidationError("all frequencies are zero; no events to expand")
    ids = np.repeat(np.arange(len(lexicon), dtype=np.int64), freqs)
    if policy == "seeded_shuffle":
        np.random.default_rng(seed).shuffle(ids)
    elif policy != "as_listed":
        raise ValidationError(f"unknown expansion policy {policy!r}")
    return EventStream(events=ids)


def load_event_stream(path, lexicon):
    """Read one form per line in temporal order and resolve against the lexicon.

    Unresolvable forms are skipped and counted; homograph forms resolve to the
    lowest matching row id.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"event file not found: {path}")
    resolve = lexicon.form_to_id()
    events, skipped = [], 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            form = line.strip()
            if not form:
                continue
            wid = resolve.get(form)
            if wid is None:
                skipped += 1
            else:
                events.append(wid)
    if not events:
        raise ValidationError(f"{path}: no event resolves against the lexicon")
    return EventStream(events=np.array(events, dtype=np.int64), skipped=skipped)


def synth_lexicon(
    m,
    q,
    zipf_exponent=1.0,
    seed=0,
    base_count=1000,
    consonants="ptks",
    vowels="aiu",
    max_syllables=3,
):
    """Generate m unique pseudo-words with Zipfian counts and normal vectors.

    The rank-i word gets frequency round(base_count / i**zipf_exponent) with a
    floor of 1, so every word is learnable at least once. Forms are CV-syllable
    strings drawn from a deliberately small inventory so that n-gram cues are
    heavily shared, as they are in natural lexicons. The syllable count per
    word grows automatically if the requested m exceeds the inventory.
    """
    if m < 2:
        raise ValidationError(f"need at least 2 words, got m={m}")
    if q < 1:
        raise ValidationError(f"semantic dimension must be positive, got q={q}")
    if zipf_exponent <= 0:
        raise ValidationError(f"zipf exponent must be positive, got {zipf_exponent}")
    if base_count < 1:
        raise ValidationError(f"base count must be at least 1, got {base_count}")

    syllables = [c + v for c in consonants for v in vowels]
    n_syl = len(syllables)
    if n_syl == 0:
        raise ValidationError("empty syllable inventory")
    while sum(n_syl**k for k in range(1, max_syllables + 1)) < 2 * m and max_syllables < 12:
        max_syllables += 1
    if sum(n_syl**k for k in range(1, max_syllables + 1)) < m:
        raise ValidationError(f"syllable inventory too small for m={m}")

    rng = np.random.default_rng(seed)
    forms = []
    seen = set()
    while len(forms) < m:
        k = int(rng.integers(1, max_syllables + 1))
        form = "".join(syllables[int(j)] for j in rng.integers(0, n_syl, size=k))
        if form not in seen:
            seen.add(form)
            forms.append(form)

    freqs = [max(1, round(base_count / float(i) ** float(zipf_exponent))) for i in range(1, m + 1)]
    S = rng.standard_normal((m, q))
    lexicon = Lexicon.from_rows(zip(forms, freqs))
    return lexicon, S


def embedding_table_from_matrix(lexicon, S):
    """Wrap an aligned semantic matrix as an EmbeddingTable keyed by form."""
    S = np.asarray(S, dtype=np.float64)
    if len(lexicon) != S.shape[0]:
        raise ValidationError("lexicon size and matrix row count differ")
    return EmbeddingTable(dimension=S.shape[1], vectors={e.form: S[e.id] for e in lexicon})
