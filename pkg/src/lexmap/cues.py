"""Boundary-marked n-gram extraction and sparse binary cue matrix assembly."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import FormatError, ValidationError

CHANNELS = ("segmental", "tritone", "tone_marked")
SOURCES = ("orthography", "pronunciation")

_VOWELS = set("aeiouüvAEIOUÜV")


@dataclass(frozen=True)
class CueScheme:
    """How word forms are turned into cue strings.

    With the default single `segmental` channel the raw source string is
    n-grammed as-is. Adding `tritone` or `tone_marked` channels switches to the
    multichannel scheme for tone-annotated input (digits marking tones), in
    which the segmental channel operates on the tone-stripped string.
    """

    gram_size: int = 3
    boundary: str = "#"
    source: str = "orthography"
    channels: tuple = ("segmental",)

    def __post_init__(self):
        if self.gram_size < 1:
            raise ValidationError(f"gram size must be >= 1, got {self.gram_size}")
        if len(self.boundary) != 1:
            raise ValidationError(f"boundary must be a single symbol, got {self.boundary!r}")
        if self.source not in SOURCES:
            raise ValidationError(f"unknown cue source {self.source!r}")
        if not self.channels:
            raise ValidationError("cue scheme needs at least one channel")
        for ch in self.channels:
            if ch not in CHANNELS:
                raise ValidationError(f"unknown cue channel {ch!r}")


def extract_ngrams(form, n, boundary="#"):
    """All length-n windows of boundary+form+boundary, in order, duplicates kept.

    A form of L scalars yields L + 3 - n windows (possibly none when the
    padded string is shorter than n).
    """
    if not form:
        raise ValidationError("cannot extract n-grams from an empty form")
    if n < 1:
        raise ValidationError(f"gram size must be >= 1, got {n}")
    padded = boundary + form + boundary
    return [padded[i : i + n] for i in range(len(padded) - n + 1)]


def strip_tones(form):
    """Remove tone digits, leaving the segmental string."""
    return "".join(ch for ch in form if not ch.isdigit())


def tone_digits(form):
    """The tone-digit sequence of a syllable string, in order."""
    return "".join(ch for ch in form if ch.isdigit())


def tone_marked_units(form):
    """Split a tone-annotated form into symbol units, digits fused onto vowels.

    Each tone digit attaches to the nearest preceding vowel, so `wen4ti2`
    becomes [w, e4, n, t, i2] and an n-gram spans n units, some composite.
    """
    units = []
    for ch in form:
        if ch.isdigit():
            for j in range(len(units) - 1, -1, -1):
                if units[j][0] in _VOWELS:
                    units[j] += ch
                    break
            else:
                raise ValidationError(f"tone digit {ch!r} has no preceding vowel in {form!r}")
        else:
            units.append(ch)
    return units


def _unit_ngrams(units, n, boundary):
    padded = [boundary] + units + [boundary]
    return ["".join(padded[i : i + n]) for i in range(len(padded) - n + 1)]


def extract_multichannel(form, n, boundary="#", channels=CHANNELS):
    """Cue strings for a tone-annotated form, concatenated over channels.

    Channels: `segmental` n-grams the tone-stripped string, `tritone` n-grams
    the tone-digit sequence, `tone_marked` n-grams the vowel+digit unit
    sequence. Identical strings arising in different channels simply denote
    the same cue.
    """
    if not form:
        raise ValidationError("cannot extract n-grams from an empty form")
    tones = tone_digits(form)
    need_tones = [ch for ch in channels if ch in ("tritone", "tone_marked")]
    if need_tones and not tones:
        raise ValidationError(f"form {form!r} has no tone digits but {need_tones[0]} "
                              "cues were requested")
    grams = []
    for channel in channels:
        if channel == "segmental":
            grams.extend(extract_ngrams(strip_tones(form), n, boundary))
        elif channel == "tritone":
            grams.extend(extract_ngrams(tones, n, boundary))
        elif channel == "tone_marked":
            grams.extend(_unit_ngrams(tone_marked_units(form), n, boundary))
        else:
            raise ValidationError(f"unknown cue channel {channel!r}")
    return grams


@dataclass
class CueMatrix:
    """Sparse binary occurrence matrix: row per word, column per distinct cue."""

    matrix: sp.csr_array
    cues: list
    cue_index: dict

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def r(self):
        return self.matrix.shape[1]

    def row_cue_columns(self, i):
        """Sorted column indices of the cues present in word i."""
        start, stop = self.matrix.indptr[i], self.matrix.indptr[i + 1]
        return self.matrix.indices[start:stop]

    def save(self, path, index_path):
        """Write `m r` then `id idx1 idx2 ..` per word, plus the cue-index sidecar."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{self.m} {self.r}\n")
            for i in range(self.m):
                cols = " ".join(str(j) for j in self.row_cue_columns(i))
                fh.write(f"{i} {cols}\n" if cols else f"{i}\n")
        with open(index_path, "w", encoding="utf-8") as fh:
            for j, cue in enumerate(self.cues):
                fh.write(f"{j}\t{cue}\n")

    @classmethod
    def load(cls, path, index_path):
        cues = []
        with open(index_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh):
                idx, _, cue = line.rstrip("\n").partition("\t")
                if int(idx) != lineno or not cue:
                    raise FormatError(f"{index_path}:{lineno + 1}: bad cue-index row")
                cues.append(cue)
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise FormatError(f"{path}:1: expected header 'm r'")
            m, r = int(header[0]), int(header[1])
            if r != len(cues):
                raise FormatError(f"{path}: r={r} but cue index has {len(cues)} cues")
            indptr = [0]
            indices = []
            for lineno, line in enumerate(fh, start=2):
                parts = line.split()
                if not parts:
                    continue
                if int(parts[0]) != len(indptr) - 1:
                    raise FormatError(f"{path}:{lineno}: out-of-order word id")
                cols = sorted(int(p) for p in parts[1:])
                indices.extend(cols)
                indptr.append(len(indices))
            if len(indptr) - 1 != m:
                raise FormatError(f"{path}: header declares {m} words, file has {len(indptr) - 1}")
        matrix = sp.csr_array(
            (np.ones(len(indices)), np.array(indices, dtype=np.int32), np.array(indptr)),
            shape=(m, r),
        )
        return cls(matrix=matrix, cues=cues, cue_index={c: j for j, c in enumerate(cues)})


def _grams_for_entry(entry, scheme):
    if scheme.source == "pronunciation":
        text = entry.pronunciation
        if not text:
            raise ValidationError(
                f"entry {entry.id} ({entry.form!r}) has no pronunciation for this cue scheme"
            )
    else:
        text = entry.form
    if scheme.channels == ("segmental",):
        return extract_ngrams(text, scheme.gram_size, scheme.boundary)
    return extract_multichannel(text, scheme.gram_size, scheme.boundary, scheme.channels)


def build_cue_matrix(lexicon, scheme):
    """Assemble the binary cue matrix; columns in first-appearance order.

    Repeated grams within one word map to a single 1 (presence coding).
    A word yielding zero cues is a hard error: an all-zero row is unlearnable
    by every solver.
    """
    cue_index = {}
    cues = []
    indptr = [0]
    indices = []
    for entry in lexicon:
        grams = _grams_for_entry(entry, scheme)
        if not grams:
            raise ValidationError(
                f"entry {entry.id} ({entry.form!r}) yields no cues at n={scheme.gram_size}"
            )
        cols = set()
        for g in grams:
            j = cue_index.get(g)
            if j is None:
                j = len(cues)
                cue_index[g] = j
                cues.append(g)
            cols.add(j)
        indices.extend(sorted(cols))
        indptr.append(len(indices))
    matrix = sp.csr_array(
        (
            np.ones(len(indices), dtype=np.float64),
            np.array(indices, dtype=np.int32),
            np.array(indptr, dtype=np.int64),
        ),
        shape=(len(lexicon), len(cues)),
    )
    return CueMatrix(matrix=matrix, cues=cues, cue_index=cue_index)
