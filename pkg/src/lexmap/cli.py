"""Command-line surface: batch runs driven by key=value configs.

Every command resolves its settings as defaults < config file < flags,
echoes the resolved values into run.meta, and writes data only to files.
A failed run removes whatever it had already written and exits nonzero.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import data
from .cues import CueScheme, build_cue_matrix
from .errors import LexmapError, ValidationError
from .evaluate import (
    accuracy_at_k,
    priming_measure,
    target_correlations,
    write_priming_csv,
    write_report_csv,
)
from .solvers import (
    load_mapping,
    predict,
    save_mapping,
    solve_endstate,
    solve_fil,
    solve_production,
    train_whl,
    weights_from_freqs,
)
from .trajectory import (
    compare_whl_fil,
    run_trajectory,
    write_comparison_csv,
    write_stats_csv,
    write_trajectory_csv,
)

DEFAULTS = {
    "lexicon": None,
    "embeddings": None,
    "events": None,
    "conditions": None,
    "mapping": None,
    "mapping_a": None,
    "mapping_b": None,
    "outdir": ".",
    "format": None,
    "n": 3,
    "boundary": "#",
    "source": "orthography",
    "channels": "segmental",
    "method": "el",
    "direction": "comprehension",
    "transform": "raw",
    "k_div": None,
    "ridge": 0.0,
    "eta": 0.001,
    "seed": 0,
    "interval": 5000,
    "k_list": "1,10",
    "m": None,
    "q": None,
    "exponent": 1.0,
    "base_count": 1000,
    "with_events": False,
}

_INT_KEYS = ("n", "seed", "interval", "m", "q", "base_count")
_FLOAT_KEYS = ("ridge", "eta", "exponent", "k_div")
_BOOL_KEYS = ("with_events",)


def _coerce(key, raw):
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _BOOL_KEYS:
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return raw


def parse_config_file(path):
    """Read key=value lines; '#' starts a comment, blank lines are skipped."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"config file not found: {path}")
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValidationError(f"{path}:{lineno}: expected key=value, got {text!r}")
            key, _, value = text.partition("=")
            key, value = key.strip(), value.strip()
            if key not in DEFAULTS:
                raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                out[key] = _coerce(key, value)
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return out


def resolve_config(args):
    """defaults < config file < explicit flags; returns a plain dict."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(parse_config_file(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def write_run_meta(path, command, cfg):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"command={command}\n")
        for key in sorted(cfg):
            value = cfg[key]
            if value is None:
                continue
            fh.write(f"{key}={value}\n")


def _require(cfg, *keys):
    for key in keys:
        if cfg.get(key) is None:
            raise ValidationError(f"missing required setting {key!r}")


def _parse_k_list(cfg, m):
    ks = []
    for part in str(cfg["k_list"]).split(","):
        part = part.strip()
        if not part:
            continue
        k = int(part)
        if k < 1:
            raise ValidationError(f"k must be positive, got {k}")
        ks.append(min(k, m))
    if not ks:
        raise ValidationError("k_list resolved to no values")
    return tuple(sorted(set(ks)))


def _load_aligned(cfg):
    """Lexicon + embeddings + cue matrix, aligned to a common row order."""
    _require(cfg, "lexicon", "embeddings")
    lexicon = data.load_lexicon(cfg["lexicon"], cfg["format"])
    table = data.load_embeddings(cfg["embeddings"])
    lexicon, S, dropped = data.align(lexicon, table)
    scheme = CueScheme(
        gram_size=cfg["n"],
        boundary=cfg["boundary"],
        source=cfg["source"],
        channels=tuple(p.strip() for p in str(cfg["channels"]).split(",") if p.strip()),
    )
    cue = build_cue_matrix(lexicon, scheme)
    return lexicon, S, cue, dropped


def _events_for(cfg, lexicon):
    if cfg["events"]:
        return data.load_event_stream(cfg["events"], lexicon)
    return data.expand_to_events(lexicon, seed=cfg["seed"])


def _fit(cfg, lexicon, S, cue):
    method = str(cfg["method"]).lower()
    if cfg["direction"] == "production":
        weights = None
        if method == "fil":
            weights = weights_from_freqs(lexicon.frequencies, cfg["transform"], cfg["k_div"])
        return solve_production(
            S,
            cue,
            method=method,
            weights=weights,
            ridge=cfg["ridge"],
            eta=cfg["eta"] if method == "whl" else None,
            stream=_events_for(cfg, lexicon) if method == "whl" else None,
        )
    if method == "el":
        return solve_endstate(cue, S, ridge=cfg["ridge"])
    if method == "fil":
        weights = weights_from_freqs(lexicon.frequencies, cfg["transform"], cfg["k_div"])
        return solve_fil(cue, S, weights, ridge=cfg["ridge"])
    if method == "whl":
        return train_whl(cue, S, _events_for(cfg, lexicon), cfg["eta"])
    raise ValidationError(f"unknown method {cfg['method']!r} (expected el, fil, or whl)")


def _report(cfg, lexicon, S, cue, mapping, out_path):
    if mapping.direction == "production":
        design, target = S, cue.matrix.toarray()
    else:
        design, target = cue, S
    predicted = predict(design, mapping)
    ks = _parse_k_list(cfg, len(lexicon))
    report = accuracy_at_k(predicted, target, ks, freqs=lexicon.frequencies)
    write_report_csv(out_path, lexicon, report, ks)


def cmd_train(cfg, outdir, written):
    lexicon, S, cue, _ = _load_aligned(cfg)
    mapping = _fit(cfg, lexicon, S, cue)
    mapping_path = outdir / "mapping.txt"
    save_mapping(mapping, mapping_path)
    written.append(mapping_path)
    report_path = outdir / "report.csv"
    _report(cfg, lexicon, S, cue, mapping, report_path)
    written.append(report_path)


def cmd_eval(cfg, outdir, written):
    _require(cfg, "mapping")
    lexicon, S, cue, _ = _load_aligned(cfg)
    mapping = load_mapping(cfg["mapping"])
    report_path = outdir / "report.csv"
    _report(cfg, lexicon, S, cue, mapping, report_path)
    written.append(report_path)


def cmd_trajectory(cfg, outdir, written):
    _require(cfg, "events")
    lexicon, S, cue, _ = _load_aligned(cfg)
    stream = data.load_event_stream(cfg["events"], lexicon)
    traj = run_trajectory(cue, S, stream, cfg["eta"], cfg["interval"])
    counts = traj.batch_counts.sum(axis=1)
    weights = weights_from_freqs(counts, cfg["transform"], cfg["k_div"])
    fil = solve_fil(cue, S, weights, ridge=cfg["ridge"])
    comparison = compare_whl_fil(traj, fil, cue, S, counts)

    traj_path = outdir / "trajectory.csv"
    write_trajectory_csv(traj_path, traj)
    written.append(traj_path)
    stats_path = outdir / "stats.csv"
    write_stats_csv(stats_path, lexicon, traj, comparison["per_word_delta"])
    written.append(stats_path)
    comp_path = outdir / "comparison.csv"
    write_comparison_csv(comp_path, lexicon, comparison)
    written.append(comp_path)


def _read_conditions(path, resolve):
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"conditions file not found: {path}")
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or (lineno == 1 and text == "prime,target,condition"):
                continue
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != 3:
                raise ValidationError(f"{path}:{lineno}: expected prime,target,condition")
            prime, target, condition = parts
            for form in (prime, target):
                if form not in resolve:
                    raise ValidationError(f"{path}:{lineno}: unknown form {form!r}")
            rows.append((prime, target, condition))
    if not rows:
        raise ValidationError(f"{path}: no condition rows")
    return rows


def cmd_prime(cfg, outdir, written):
    _require(cfg, "conditions")
    lexicon, S, cue, _ = _load_aligned(cfg)
    if cfg["mapping"]:
        mapping = load_mapping(cfg["mapping"])
        if mapping.direction != "comprehension":
            raise ValidationError("priming needs a comprehension-direction mapping")
    else:
        mapping = _fit({**cfg, "direction": "comprehension"}, lexicon, S, cue)
    resolve = lexicon.form_to_id()
    rows = _read_conditions(cfg["conditions"], resolve)
    out_rows = []
    for prime, target, condition in rows:
        measure = priming_measure(resolve[prime], resolve[target], mapping, cue, S)
        out_rows.append((prime, target, condition, measure))
    prime_path = outdir / "priming.csv"
    write_priming_csv(prime_path, out_rows)
    written.append(prime_path)


def cmd_synth(cfg, outdir, written):
    _require(cfg, "m", "q")
    lexicon, S = data.synth_lexicon(
        cfg["m"],
        cfg["q"],
        zipf_exponent=cfg["exponent"],
        seed=cfg["seed"],
        base_count=cfg["base_count"],
    )
    lex_path = outdir / "lexicon.csv"
    lexicon.save(lex_path)
    written.append(lex_path)
    emb_path = outdir / "embeddings.txt"
    data.embedding_table_from_matrix(lexicon, S).save(emb_path)
    written.append(emb_path)
    if cfg["with_events"]:
        stream = data.expand_to_events(lexicon, seed=cfg["seed"])
        ev_path = outdir / "events.txt"
        forms = lexicon.forms
        with open(ev_path, "w", encoding="utf-8") as fh:
            for wid in stream.events:
                fh.write(forms[wid] + "\n")
        written.append(ev_path)


def cmd_compare(cfg, outdir, written):
    _require(cfg, "mapping_a", "mapping_b")
    lexicon, S, cue, _ = _load_aligned(cfg)
    map_a = load_mapping(cfg["mapping_a"])
    map_b = load_mapping(cfg["mapping_b"])
    if map_a.direction != map_b.direction:
        raise ValidationError("mappings to compare must share a direction")
    if map_a.direction == "production":
        design, target = S, cue.matrix.toarray()
    else:
        design, target = cue, S
    r_a, _ = target_correlations(predict(design, map_a), target)
    r_b, _ = target_correlations(predict(design, map_b), target)
    va = r_a - r_a.mean()
    vb = r_b - r_b.mean()
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    comparison = {
        "r_whl": r_a,
        "r_fil": r_b,
        "per_word_delta": r_a - r_b,
        "pearson_r": float(va @ vb / (na * nb)) if na > 0 and nb > 0 else 0.0,
    }
    comp_path = outdir / "comparison.csv"
    write_comparison_csv(comp_path, lexicon, comparison)
    written.append(comp_path)


_COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "trajectory": cmd_trajectory,
    "prime": cmd_prime,
    "synth": cmd_synth,
    "compare": cmd_compare,
}


def _add_common(sub):
    sub.add_argument("--config", help="key=value settings file")
    sub.add_argument("--outdir", help="output directory (default: current)")
    sub.add_argument("--seed", type=int)


def _add_data(sub):
    sub.add_argument("--lexicon", help="lexicon CSV/TSV path")
    sub.add_argument("--embeddings", help="embedding text file path")
    sub.add_argument("--format", choices=("csv", "tsv"), help="force lexicon delimiter")
    sub.add_argument("--n", type=int, help="gram size (default 3)")
    sub.add_argument("--boundary")
    sub.add_argument("--source", choices=("orthography", "pronunciation"))
    sub.add_argument("--channels", help="comma list: segmental,tritone,tone_marked")


def _add_solver(sub):
    sub.add_argument("--method", choices=("el", "fil", "whl"))
    sub.add_argument("--direction", choices=("comprehension", "production"))
    sub.add_argument("--transform", choices=("raw", "log", "scaled"))
    sub.add_argument("--k-div", dest="k_div", type=float)
    sub.add_argument("--ridge", type=float)
    sub.add_argument("--eta", type=float)
    sub.add_argument("--events", help="event stream file (one form per line)")
    sub.add_argument("--k-list", dest="k_list", help="comma list of accuracy cutoffs")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lexmap",
        description="Linear form-meaning mapping estimation and evaluation.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("train", help="fit a mapping and score it")
    _add_common(p)
    _add_data(p)
    _add_solver(p)

    p = subs.add_parser("eval", help="score an existing mapping file")
    _add_common(p)
    _add_data(p)
    p.add_argument("--mapping", help="mapping file to load")
    p.add_argument("--k-list", dest="k_list")

    p = subs.add_parser("trajectory", help="incremental learning with checkpoints")
    _add_common(p)
    _add_data(p)
    p.add_argument("--events", help="event stream file (required)")
    p.add_argument("--eta", type=float)
    p.add_argument("--interval", type=int, help="events per checkpoint (default 5000)")
    p.add_argument("--transform", choices=("raw", "log", "scaled"))
    p.add_argument("--k-div", dest="k_div", type=float)
    p.add_argument("--ridge", type=float)

    p = subs.add_parser("prime", help="prime-target measures from a conditions file")
    _add_common(p)
    _add_data(p)
    _add_solver(p)
    p.add_argument("--conditions", help="CSV rows prime,target,condition")
    p.add_argument("--mapping", help="reuse a saved mapping instead of fitting")

    p = subs.add_parser("synth", help="generate a synthetic lexicon")
    _add_common(p)
    p.add_argument("--m", type=int, help="lexicon size")
    p.add_argument("--q", type=int, help="semantic dimension")
    p.add_argument("--exponent", type=float, help="Zipf exponent (default 1.0)")
    p.add_argument("--base-count", dest="base_count", type=int)
    p.add_argument("--with-events", dest="with_events", action="store_const", const=True)

    p = subs.add_parser("compare", help="per-word score deltas of two mappings")
    _add_common(p)
    _add_data(p)
    p.add_argument("--mapping-a", dest="mapping_a", help="first mapping file")
    p.add_argument("--mapping-b", dest="mapping_b", help="second mapping file")

    return parser


def entry(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        outdir = Path(cfg["outdir"])
        outdir.mkdir(parents=True, exist_ok=True)
    except LexmapError as exc:
        print(f"lexmap: {exc}", file=sys.stderr)
        return 2
    written = []
    try:
        _COMMANDS[args.command](cfg, outdir, written)
        meta_path = outdir / "run.meta"
        write_run_meta(meta_path, args.command, cfg)
    except (LexmapError, OSError) as exc:
        for path in written:
            Path(path).unlink(missing_ok=True)
        print(f"lexmap: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(entry())
