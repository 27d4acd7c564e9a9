"""Ordered-stream learning simulation.

Drives the incremental learner over an event stream, scoring the whole
lexicon at fixed intervals, tallying per-word counts inside each interval,
and relating the final state to the frequency-weighted closed-form solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError
from .evaluate import target_correlations
from .solvers import Mapping, _design_of, _whl_loop, predict


@dataclass
class TrajectoryResult:
    """Checkpoints are (events_seen, per-word correlation vector) pairs."""

    checkpoints: list
    batch_counts: np.ndarray
    eta: float
    interval: int
    mapping: Mapping

    @property
    def n_batches(self):
        return self.batch_counts.shape[1]


@dataclass
class FreqTimeStats:
    """Weighted moments of one word's counts over batch indices 1..B."""

    mean: float
    mode: int
    skewness: float
    kurtosis_t: float
    degenerate: bool


def run_trajectory(C, S, stream, eta, interval):
    """Train incrementally, scoring all words every `interval` events.

    The final mapping state is bit-identical to running the plain trainer
    on the same stream, because both share one update kernel. batch_counts
    row i tallies word i's occurrences inside each interval-sized batch
    (the last batch may be shorter).
    """
    X = _design_of(C)
    S_arr = _design_of(S)
    if sp.issparse(S_arr):
        S_arr = S_arr.toarray()
    S_arr = np.asarray(S_arr, dtype=np.float64)
    events = np.asarray(getattr(stream, "events", stream), dtype=np.int64)
    if interval < 1:
        raise ValidationError(f"checkpoint interval must be >= 1, got {interval}")
    if eta <= 0:
        raise ValidationError(f"learning rate must be positive, got {eta}")
    if events.size == 0:
        raise ValidationError("event stream is empty")
    m = X.shape[0]
    if events.min() < 0 or events.max() >= m:
        raise ValidationError("event stream references ids outside the lexicon")
    if S_arr.shape[0] != m:
        raise ValidationError("cue and semantic matrices disagree on row count")

    n = events.size
    n_batches = math.ceil(n / interval)
    batch_counts = np.zeros((m, n_batches), dtype=np.int64)
    batch_of = np.arange(n) // interval
    np.add.at(batch_counts, (events, batch_of), 1)

    checkpoints = []

    def on_checkpoint(done, F):
        rvec, _ = target_correlations(X @ F, S_arr)
        checkpoints.append((done, rvec))

    F = np.zeros((X.shape[1], S_arr.shape[1]))
    _whl_loop(X, S_arr, events, float(eta), F, interval, on_checkpoint)
    mapping = Mapping(
        data=F,
        method="WHL",
        direction="comprehension",
        hyperparams={"eta": float(eta), "events": int(n), "interval": int(interval)},
    )
    return TrajectoryResult(
        checkpoints=checkpoints,
        batch_counts=batch_counts,
        eta=float(eta),
        interval=int(interval),
        mapping=mapping,
    )


def freq_time_stats(counts):
    """Moments of one word's frequency-over-time distribution.

    Batch indices 1..B act as sample values weighted by counts. Excess
    kurtosis is tamed by a signed log1p so a single huge spike cannot
    dominate downstream regressions. Words confined to a single batch are
    degenerate: skewness and kurtosis_t are reported as 0.
    """
    w = np.asarray(counts, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError("counts must be a non-empty 1-d vector")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValidationError("counts must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise ValidationError("zero-count row; frequency-over-time stats undefined")
    v = np.arange(1, w.size + 1, dtype=np.float64)
    mean = float((w * v).sum() / total)
    mode = int(np.argmax(w)) + 1
    dev = v - mean
    m2 = float((w * dev**2).sum() / total)
    if m2 == 0.0:
        return FreqTimeStats(mean=mean, mode=mode, skewness=0.0, kurtosis_t=0.0, degenerate=True)
    m3 = float((w * dev**3).sum() / total)
    m4 = float((w * dev**4).sum() / total)
    skew = m3 / m2**1.5
    g2 = m4 / m2**2 - 3.0
    kurtosis_t = math.copysign(math.log1p(abs(g2)), g2)
    return FreqTimeStats(mean=mean, mode=mode, skewness=skew, kurtosis_t=kurtosis_t, degenerate=False)


def compare_whl_fil(traj, fil_mapping, C, S, freqs_from_stream=None):
    """Relate the final incremental state to the frequency-weighted solve.

    Returns per-word correlation vectors for both methods, the per-word
    difference, and the Pearson correlation between the two vectors.
    """
    if not traj.checkpoints:
        raise ValidationError("trajectory has no checkpoints")
    r_whl = traj.checkpoints[-1][1]
    S_arr = _design_of(S)
    if sp.issparse(S_arr):
        S_arr = S_arr.toarray()
    r_fil, _ = target_correlations(predict(C, fil_mapping), S_arr)
    if r_whl.shape != r_fil.shape:
        raise ValidationError("trajectory and mapping disagree on lexicon size")
    if freqs_from_stream is not None and len(freqs_from_stream) != r_whl.shape[0]:
        raise ValidationError("stream-count vector length does not match the lexicon")
    a = r_whl - r_whl.mean()
    b = r_fil - r_fil.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    pearson = float(a @ b / (na * nb)) if na > 0 and nb > 0 else 0.0
    return {
        "per_word_delta": r_whl - r_fil,
        "pearson_r": pearson,
        "r_whl": r_whl,
        "r_fil": r_fil,
    }


def write_trajectory_csv(path, traj):
    """Long-format scores: one row per (checkpoint, word).

    batch_count is the word's raw count inside that checkpoint's batch;
    batch_count_norm divides by the batch's maximal count, since figures
    built on these trajectories want both scales.
    """
    counts = traj.batch_counts
    batch_max = counts.max(axis=0)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("checkpoint_event_index,word_id,target_r,batch_count,batch_count_norm\n")
        for b, (done, rvec) in enumerate(traj.checkpoints):
            top = float(batch_max[b]) if b < counts.shape[1] else 0.0
            for i in range(rvec.shape[0]):
                c = int(counts[i, b]) if b < counts.shape[1] else 0
                norm = c / top if top > 0 else 0.0
                fh.write(f"{done},{i},{float(rvec[i])!r},{c},{norm!r}\n")


def write_stats_csv(path, lexicon, traj, deltas):
    """Per-word frequency-over-time moments next to the method delta.

    Words absent from the stream get empty moment cells and a set
    degenerate flag; their delta is still reported.
    """
    counts = traj.batch_counts
    deltas = np.asarray(deltas, dtype=np.float64)
    if deltas.shape[0] != counts.shape[0]:
        raise ValidationError("delta vector length does not match the lexicon")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("word_id,form,total_count,mean,mode,skewness,kurtosis_t,degenerate,delta_whl_fil\n")
        for e in lexicon:
            i = e.id
            total = int(counts[i].sum())
            if total == 0:
                fh.write(f"{i},{e.form},0,,,,,1,{float(deltas[i])!r}\n")
                continue
            st = freq_time_stats(counts[i])
            fh.write(
                f"{i},{e.form},{total},{st.mean!r},{st.mode},{st.skewness!r},"
                f"{st.kurtosis_t!r},{int(st.degenerate)},{float(deltas[i])!r}\n"
            )


def write_comparison_csv(path, lexicon, comparison):
    """Per-word scores of both methods plus a footer with their correlation."""
    r_whl = comparison["r_whl"]
    r_fil = comparison["r_fil"]
    delta = comparison["per_word_delta"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("word_id,form,r_whl,r_fil,delta\n")
        for e in lexicon:
            i = e.id
            fh.write(
                f"{i},{e.form},{float(r_whl[i])!r},{float(r_fil[i])!r},{float(delta[i])!r}\n"
            )
        fh.write(f"# pearson_r={comparison['pearson_r']!r}\n")
