"""Scoring of fitted mappings.

Evaluation is correlation based throughout: a word's predicted vector is
compared against every gold row, its own row has to win (strict scoring),
and 1 - r doubles as a simulated response-time measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError
from .solvers import predict


def _standardize_rows(M, name):
    """Center rows and scale to unit norm; zero-variance rows become zero.

    Zero-variance detection is exact (max equals min), not threshold based.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValidationError(f"{name} must be 2-d")
    if M.shape[1] < 2:
        raise ValidationError(f"{name} needs at least 2 columns for correlation")
    if not np.all(np.isfinite(M)):
        raise ValidationError(f"{name} contains non-finite entries")
    degenerate = M.max(axis=1) == M.min(axis=1)
    Z = M - M.mean(axis=1, keepdims=True)
    with np.errstate(over="ignore"):
        norms = np.linalg.norm(Z, axis=1)
    # rows whose squared norm overflows are as unusable as flat ones
    degenerate |= (norms == 0.0) | ~np.isfinite(norms)
    norms[degenerate] = 1.0
    Z /= norms[:, None]
    Z[degenerate] = 0.0
    return Z, degenerate


def _dense(M):
    inner = getattr(M, "matrix", M)
    if sp.issparse(inner):
        return inner.toarray()
    return np.asarray(inner, dtype=np.float64)


def target_correlations(S_hat, S):
    """Row-wise Pearson correlation of predictions with their own targets.

    Returns (r, degenerate) where degenerate marks rows whose predicted or
    gold vector has zero variance; those get r = 0 so 1 - r stays finite.
    """
    S_hat = _dense(S_hat)
    S = _dense(S)
    if S_hat.shape != S.shape:
        raise ValidationError(f"shape mismatch: predicted {S_hat.shape} vs target {S.shape}")
    Zh, dh = _standardize_rows(S_hat, "predicted matrix")
    Zs, ds = _standardize_rows(S, "target matrix")
    r = np.clip(np.einsum("ij,ij->i", Zh, Zs), -1.0, 1.0)
    degenerate = dh | ds
    r[degenerate] = 0.0
    return r, degenerate


def rt_measure(S_hat, S):
    """Simulated response time 1 - r per word, in [0, 2]."""
    r, degenerate = target_correlations(S_hat, S)
    return 1.0 - r, degenerate


@dataclass
class EvalReport:
    """Per-word ranking outcome plus the usual aggregates."""

    target_r: np.ndarray
    rank: np.ndarray
    correct_at: dict = field(default_factory=dict)
    degenerate: np.ndarray = None
    type_accuracy: dict = field(default_factory=dict)
    token_accuracy: dict = None
    mean_r: float = 0.0

    @property
    def m(self):
        return self.target_r.shape[0]


def accuracy_at_k(S_hat, S, k_list=(1, 10), freqs=None):
    """Strict evaluation: rank every word's own target among all m targets.

    The candidate score of word i against candidate j is the Pearson
    correlation of row i of the predictions with row j of the targets. Ties
    break toward the lower row index. correct_at[k] means rank <= k.
    """
    S_hat = _dense(S_hat)
    S = _dense(S)
    if S_hat.shape != S.shape:
        raise ValidationError(f"shape mismatch: predicted {S_hat.shape} vs target {S.shape}")
    m = S.shape[0]
    ks = sorted(set(int(k) for k in k_list))
    if not ks:
        raise ValidationError("k_list is empty")
    for k in ks:
        if k < 1 or k > m:
            raise ValidationError(f"k={k} outside [1, {m}]")
    Zh, dh = _standardize_rows(S_hat, "predicted matrix")
    Zs, ds = _standardize_rows(S, "target matrix")
    R = Zh @ Zs.T
    # values past +-1 are rounding artifacts and must not decide ranks
    np.clip(R, -1.0, 1.0, out=R)
    own = np.diagonal(R).copy()
    greater = (R > own[:, None]).sum(axis=1)
    equal = R == own[:, None]
    # ties: only candidates with a lower row index outrank the own target
    eq_lower = np.cumsum(equal, axis=1)
    idx = np.arange(m)
    prior_ties = np.where(idx > 0, eq_lower[idx, idx - 1], 0)
    rank = (1 + greater + prior_ties).astype(np.int64)
    degenerate = dh | ds
    own[degenerate] = 0.0
    correct_at = {k: rank <= k for k in ks}
    type_acc = {k: float(correct_at[k].mean()) for k in ks}
    token_acc = None
    if freqs is not None:
        token_acc = {k: token_weighted_accuracy(correct_at[k], freqs) for k in ks}
    return EvalReport(
        target_r=own,
        rank=rank,
        correct_at=correct_at,
        degenerate=degenerate,
        type_accuracy=type_acc,
        token_accuracy=token_acc,
        mean_r=float(own.mean()),
    )


def token_weighted_accuracy(correct_flags, freqs):
    """Accuracy with every word weighted by its corpus frequency."""
    flags = np.asarray(correct_flags, dtype=np.float64)
    f = np.asarray(freqs, dtype=np.float64)
    if flags.shape != f.shape:
        raise ValidationError("flags and frequencies must have equal length")
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        raise ValidationError("frequencies must be finite and non-negative")
    total = f.sum()
    if total <= 0:
        raise ValidationError("total frequency is zero; token accuracy undefined")
    return float((f * flags).sum() / total)


def priming_measure(prime_id, target_id, mapping, C, S):
    """1 - correlation of the prime's predicted vector with the target's gold vector."""
    X = getattr(C, "matrix", C)
    S = _dense(S)
    m = X.shape[0]
    for name, i in (("prime", prime_id), ("target", target_id)):
        if not 0 <= int(i) < m:
            raise ValidationError(f"{name} id {i} outside [0, {m})")
    row = X[[int(prime_id)]]
    s_hat = np.asarray(predict(row, mapping)).reshape(-1)
    r, _ = target_correlations(s_hat[None, :], S[[int(target_id)]])
    return float(1.0 - r[0])


@dataclass
class LogisticSummary:
    slope: float
    intercept: float
    slope_std_error: float
    wald_z: float
    converged: bool
    iterations: int


def logistic_freq_summary(correct_flags, freqs):
    """Fit P(correct) = logistic(a + b log(f+1)) by IRLS and report Wald stats.

    Stops after 50 iterations or when no coefficient moves by 1e-8. A slope
    walking past |b| = 50 is treated as complete separation: the result is
    returned with converged = False rather than raising.
    """
    y = np.asarray(correct_flags, dtype=np.float64)
    f = np.asarray(freqs, dtype=np.float64)
    if y.shape != f.shape or y.ndim != 1:
        raise ValidationError("flags and frequencies must be equal-length vectors")
    if not (np.any(y == 1.0) and np.any(y == 0.0)):
        raise ValidationError("need both correct and incorrect outcomes to fit")
    x = np.log1p(f)
    X = np.column_stack([np.ones_like(x), x])
    beta = np.zeros(2)
    converged = False
    it = 0
    cov = np.eye(2)
    for it in range(1, 51):
        eta = X @ beta
        with np.errstate(over="ignore"):
            mu = 1.0 / (1.0 + np.exp(-eta))
        w = np.clip(mu * (1.0 - mu), 1e-12, None)
        z = eta + (y - mu) / w
        XtW = X.T * w
        cov = np.linalg.inv(XtW @ X)
        new = cov @ (XtW @ z)
        step = np.max(np.abs(new - beta))
        beta = new
        if abs(beta[1]) > 50.0:
            converged = False
            break
        if step < 1e-8:
            converged = True
            break
    se = float(np.sqrt(cov[1, 1]))
    wald = float(beta[1] / se) if se > 0 else float("inf")
    return LogisticSummary(
        slope=float(beta[1]),
        intercept=float(beta[0]),
        slope_std_error=se,
        wald_z=wald,
        converged=converged,
        iterations=it,
    )


def write_report_csv(path, lexicon, report, ks=(1, 10)):
    """Per-word scoring rows, then '#'-prefixed aggregate footer lines.

    Column layout is id,form,frequency,target_r,rank,correct_at_<k>...,
    rt_measure with one correct column per requested k.
    """
    ks = sorted(set(int(k) for k in ks))
    for k in ks:
        if k not in report.correct_at:
            raise ValidationError(f"report holds no correct_at[{k}]")
    cols = ",".join(f"correct_at_{k}" for k in ks)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"id,form,frequency,target_r,rank,{cols},rt_measure\n")
        for e in lexicon:
            i = e.id
            flags = ",".join(str(int(report.correct_at[k][i])) for k in ks)
            r = float(report.target_r[i])
            fh.write(
                f"{i},{e.form},{e.frequency},{r!r},{int(report.rank[i])},{flags},{1.0 - r!r}\n"
            )
        for k in ks:
            fh.write(f"# type_accuracy@{k}={report.type_accuracy[k]!r}\n")
        if report.token_accuracy is not None:
            for k in ks:
                fh.write(f"# token_accuracy@{k}={report.token_accuracy[k]!r}\n")
        fh.write(f"# mean_r={report.mean_r!r}\n")


def write_priming_csv(path, rows):
    """Rows of (prime form, target form, condition label, measure)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("prime,target,condition,measure\n")
        for prime, target, condition, measure in rows:
            fh.write(f"{prime},{target},{condition},{float(measure)!r}\n")
