"""Mapping estimation: endstate, frequency-weighted, and incremental solvers.

All three estimators target the same linear system (design @ B = targets).
The closed-form routes go through the normal equations with a symmetric
positive-definite factorization; the incremental route applies the delta rule
one learning event at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DivergenceError, SolverError, ValidationError

METHODS = ("EL", "FIL", "WHL")
DIRECTIONS = ("comprehension", "production")
TRANSFORMS = ("raw", "log", "scaled")

JITTER_SCALE = 1e-8


@dataclass
class Mapping:
    """A fitted linear map plus the metadata needed to reproduce it."""

    data: np.ndarray
    method: str
    direction: str = "comprehension"
    hyperparams: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.data.shape


@dataclass
class WeightVector:
    """Per-word non-negative weights, already divided by their maximum."""

    values: np.ndarray
    transform: str
    normalizer: float
    k_div: float | None = None


def weights_from_freqs(freqs, transform="raw", k_div=None):
    """Turn frequency counts into solver weights.

    raw:    p_i = f_i / max_j f_j
    log:    p_i = log(f_i + 1) / max_j log(f_j + 1)   (backoff of 1)
    scaled: effective counts ceil(f_i / k_div), divided by their max

    Only relative weights matter to the weighted solve, so the division by
    the max is free and keeps the normal matrix well scaled.
    """
    f = np.asarray(freqs, dtype=np.float64)
    if f.ndim != 1 or f.size == 0:
        raise ValidationError("frequencies must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(f)) or np.any(f < 0):
        raise ValidationError("frequencies must be finite and non-negative")
    if transform == "raw":
        eff = f
    elif transform == "log":
        eff = np.log1p(f)
    elif transform == "scaled":
        if k_div is None or k_div < 1:
            raise ValidationError("scaled transform needs a divisor k_div >= 1")
        eff = np.ceil(f / float(k_div))
    else:
        raise ValidationError(f"unknown weight transform {transform!r}")
    k = float(eff.max())
    if k <= 0:
        raise ValidationError("all frequencies are zero; no signal to weight")
    return WeightVector(values=eff / k, transform=transform, normalizer=k, k_div=k_div)


def _design_of(X):
    """Accept a CueMatrix, sparse array, or ndarray as a design/target."""
    inner = getattr(X, "matrix", X)
    if sp.issparse(inner):
        return inner
    return np.asarray(inner, dtype=np.float64)


def _check_finite(X, name):
    data = X.data if sp.issparse(X) else X
    if not np.all(np.isfinite(data)):
        raise ValidationError(f"{name} contains non-finite entries")


def _gram(X):
    """X.T @ X as a dense array."""
    G = X.T @ X
    return G.toarray() if sp.issparse(G) else np.asarray(G)


def _cross(X, Y):
    """X.T @ Y as a dense array, tolerating sparse on either side."""
    if sp.issparse(Y) and not sp.issparse(X):
        return np.ascontiguousarray((Y.T @ X).T)
    H = X.T @ Y
    return H.toarray() if sp.issparse(H) else np.asarray(H)


def _solve_normal_equations(G, H, ridge):
    """Solve (G + ridge I) B = H by Cholesky; jitter retry on singular G.

    Returns (B, fallback_ridge or None).
    """
    a = G.shape[0]
    if ridge < 0:
        raise ValidationError(f"ridge must be non-negative, got {ridge}")
    A = G + ridge * np.eye(a) if ridge > 0 else G
    try:
        factor = cho_factor(A, check_finite=False)
        return cho_solve(factor, H, check_finite=False), None
    except LinAlgError:
        if ridge > 0:
            raise SolverError("normal matrix not positive definite at the given ridge") from None
    jitter = JITTER_SCALE * float(np.trace(G)) / a
    if jitter <= 0:
        raise SolverError("design matrix has zero energy; nothing to solve")
    try:
        factor = cho_factor(G + jitter * np.eye(a), check_finite=False)
    except LinAlgError:
        raise SolverError("normal matrix singular even after jitter fallback") from None
    return cho_solve(factor, H, check_finite=False), jitter


def solve_endstate(X, Y, ridge=0.0, direction="comprehension"):
    """Least-squares mapping B minimizing ||X B - Y||^2 (+ ridge penalty).

    Solves the normal equations via Cholesky; a singular normal matrix at
    ridge 0 triggers an automatic jitter retry recorded in hyperparams.
    """
    X = _design_of(X)
    Y = _design_of(Y)
    if X.shape[0] != Y.shape[0]:
        raise ValidationError(f"row mismatch: design has {X.shape[0]}, targets {Y.shape[0]}")
    _check_finite(X, "design matrix")
    _check_finite(Y, "target matrix")
    G = _gram(X)
    H = _cross(X, Y)
    B, fallback = _solve_normal_equations(G, H, ridge)
    hyper = {"ridge": float(ridge)}
    if fallback is not None:
        hyper["fallback_ridge"] = fallback
    return Mapping(data=B, method="EL", direction=direction, hyperparams=hyper)


def solve_fil(X, Y, weights, ridge=0.0, direction="comprehension"):
    """Frequency-weighted least squares: (X'PX + ridge I) B = X'PY, P = diag(p).

    Algebraically identical to the plain solve on row-scaled sqrt(P)X and
    sqrt(P)Y, i.e. to solving on matrices whose rows are repeated by
    frequency, but computed without materializing either. Rows with p_i = 0
    exert no influence.
    """
    p = np.asarray(getattr(weights, "values", weights), dtype=np.float64)
    X = _design_of(X)
    Y = _design_of(Y)
    if p.ndim != 1 or p.size != X.shape[0]:
        raise ValidationError("weight vector length must equal the number of rows")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValidationError("weights must be finite and non-negative")
    if not np.any(p > 0):
        raise ValidationError("all weights are zero; no signal to fit")
    if X.shape[0] != Y.shape[0]:
        raise ValidationError(f"row mismatch: design has {X.shape[0]}, targets {Y.shape[0]}")
    _check_finite(X, "design matrix")
    _check_finite(Y, "target matrix")
    if sp.issparse(X):
        Xw = X.multiply(p[:, None]).tocsr()
    else:
        Xw = p[:, None] * X
    G = _cross(X, Xw)
    if sp.issparse(Y):
        Yw = Y.multiply(p[:, None]).tocsr()
    else:
        Yw = p[:, None] * Y
    H = _cross(X, Yw)
    B, fallback = _solve_normal_equations(G, H, ridge)
    hyper = {"ridge": float(ridge)}
    wv = weights if isinstance(weights, WeightVector) else None
    if wv is not None:
        hyper["transform"] = wv.transform
        if wv.k_div is not None:
            hyper["k_div"] = float(wv.k_div)
    if fallback is not None:
        hyper["fallback_ridge"] = fallback
    return Mapping(data=B, method="FIL", direction=direction, hyperparams=hyper)


def _binary_csr(X):
    return sp.issparse(X) and X.format == "csr" and np.all(X.data == 1.0)


def _whl_loop(X, targets, events, eta, F, interval=None, on_checkpoint=None):
    """Apply the delta rule over the stream in place.

    F <- F + x_t' (y_t - x_t F) eta, one event at a time. Binary csr designs
    take a fast path touching only the active rows of F. on_checkpoint fires
    after every `interval` events and at stream end.
    """
    n = len(events)
    fast = _binary_csr(X)
    if fast:
        indptr, indices = X.indptr, X.indices
    else:
        X = X.toarray() if sp.issparse(X) else np.asarray(X, dtype=np.float64)
    # overflow here is the divergence we detect; keep it from warning first
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(n):
            w = int(events[t])
            if fast:
                cols = indices[indptr[w] : indptr[w + 1]]
                err = targets[w] - F[cols].sum(axis=0)
                if not np.all(np.isfinite(err)):
                    raise DivergenceError(t)
                F[cols] += eta * err
            else:
                x = X[w]
                err = targets[w] - x @ F
                if not np.all(np.isfinite(err)):
                    raise DivergenceError(t)
                F += eta * np.outer(x, err)
            done = t + 1
            if on_checkpoint is not None and (done == n or (interval and done % interval == 0)):
                on_checkpoint(done, F)
    return F


def train_whl(C, S, stream, eta, init=None, checkpoint_every=None):
    """Incremental delta-rule training over an ordered event stream.

    Starts from the zero matrix (or a given Mapping) and applies
    F <- F + c' (s - c F) eta per event. With checkpoint_every set, returns
    (mapping, checkpoints) where each checkpoint is (events_seen, per-word
    target correlation vector); otherwise returns just the mapping.
    """
    X = _design_of(C)
    S = _design_of(S)
    if sp.issparse(S):
        S = S.toarray()
    S = np.asarray(S, dtype=np.float64)
    events = np.asarray(getattr(stream, "events", stream), dtype=np.int64)
    if eta <= 0:
        raise ValidationError(f"learning rate must be positive, got {eta}")
    if events.size == 0:
        raise ValidationError("event stream is empty")
    if events.min() < 0 or events.max() >= X.shape[0]:
        raise ValidationError("event stream references ids outside the lexicon")
    r, q = X.shape[1], S.shape[1]
    if init is None:
        F = np.zeros((r, q))
    else:
        F = np.array(getattr(init, "data", init), dtype=np.float64, copy=True)
        if F.shape != (r, q):
            raise ValidationError(f"init shape {F.shape} does not match ({r}, {q})")

    checkpoints = [] if checkpoint_every else None
    on_checkpoint = None
    if checkpoint_every:
        if checkpoint_every < 1:
            raise ValidationError("checkpoint interval must be >= 1")
        from .evaluate import target_correlations

        def on_checkpoint(done, current):
            rvec, _ = target_correlations(X @ current, S)
            checkpoints.append((done, rvec))

    _whl_loop(X, S, events, float(eta), F, checkpoint_every, on_checkpoint)
    mapping = Mapping(
        data=F,
        method="WHL",
        direction="comprehension",
        hyperparams={"eta": float(eta), "events": int(events.size)},
    )
    if checkpoint_every:
        return mapping, checkpoints
    return mapping


def predict(X, mapping):
    """Matrix product of an input (matrix or single row) with the mapping."""
    B = mapping.data if isinstance(mapping, Mapping) else np.asarray(mapping)
    X = _design_of(X)
    cols = X.shape[-1]
    if cols != B.shape[0]:
        raise ValidationError(f"input has {cols} columns but the mapping expects {B.shape[0]}")
    out = X @ B
    return np.asarray(out)


def solve_production(S, C, method="el", weights=None, ridge=0.0, eta=None, stream=None, init=None):
    """Fit the meaning-to-form direction: design = S, target = C.

    Identical machinery to the comprehension solvers with the roles of the
    matrices swapped; the returned mapping is marked as production.
    """
    S = _design_of(S)
    target = _design_of(C)
    method = method.lower()
    if method == "el":
        mapping = solve_endstate(S, target, ridge=ridge, direction="production")
    elif method == "fil":
        if weights is None:
            raise ValidationError("FIL production needs a weight vector")
        mapping = solve_fil(S, target, weights, ridge=ridge, direction="production")
    elif method == "whl":
        if eta is None or stream is None:
            raise ValidationError("WHL production needs eta and an event stream")
        dense_target = target.toarray() if sp.issparse(target) else target
        mapping = train_whl(S, dense_target, stream, eta, init=init)
        mapping.direction = "production"
    else:
        raise ValidationError(f"unknown method {method!r}")
    mapping.method = {"el": "EL", "fil": "FIL", "whl": "WHL"}[method]
    return mapping


def save_mapping(mapping, path):
    """Write `rows cols method direction ridge eta` then one row per line.

    Floats are printed with shortest round-trip precision, so load_mapping
    reproduces the values exactly.
    """
    rows, cols = mapping.data.shape
    ridge = float(mapping.hyperparams.get("ridge", 0.0))
    eta = mapping.hyperparams.get("eta")
    eta_txt = repr(float(eta)) if eta is not None else "nan"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{rows} {cols} {mapping.method} {mapping.direction} {ridge!r} {eta_txt}\n")
        for row in mapping.data:
            fh.write(" ".join(repr(float(v)) for v in row))
            fh.write("\n")


def load_mapping(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 6:
            raise ValidationError(f"{path}: malformed mapping header")
        rows, cols = int(header[0]), int(header[1])
        method, direction = header[2], header[3]
        if method not in METHODS or direction not in DIRECTIONS:
            raise ValidationError(f"{path}: unknown method or direction in header")
        ridge, eta = float(header[4]), float(header[5])
        data = np.empty((rows, cols))
        for i in range(rows):
            parts = fh.readline().split()
            if len(parts) != cols:
                raise ValidationError(f"{path}: row {i} has {len(parts)} values, expected {cols}")
            data[i] = [float(p) for p in parts]
    hyper = {"ridge": ridge}
    if not math.isnan(eta):
        hyper["eta"] = eta
    return Mapping(data=data, method=method, direction=direction, hyperparams=hyper)
