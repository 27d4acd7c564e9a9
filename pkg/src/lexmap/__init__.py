"""Linear form-meaning mapping estimation for lexicons.

Three estimators over one linear system: a frequency-blind least-squares
endstate, a frequency-weighted variant, and an incremental delta-rule
learner, plus correlation-based evaluation, priming measures, and an
ordered-stream trajectory simulator.
"""

from .cues import CueMatrix, CueScheme, build_cue_matrix, extract_multichannel, extract_ngrams
from .data import (
    EmbeddingTable,
    EventStream,
    Lexicon,
    LexiconEntry,
    align,
    embedding_table_from_matrix,
    expand_to_events,
    load_embeddings,
    load_event_stream,
    load_lexicon,
    synth_lexicon,
)
from .errors import (
    DivergenceError,
    FormatError,
    LexmapError,
    ParseError,
    SolverError,
    ValidationError,
)
from .evaluate import (
    EvalReport,
    LogisticSummary,
    accuracy_at_k,
    logistic_freq_summary,
    priming_measure,
    rt_measure,
    target_correlations,
    token_weighted_accuracy,
)
from .solvers import (
    Mapping,
    WeightVector,
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
    FreqTimeStats,
    TrajectoryResult,
    compare_whl_fil,
    freq_time_stats,
    run_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "CueMatrix",
    "CueScheme",
    "DivergenceError",
    "EmbeddingTable",
    "EvalReport",
    "EventStream",
    "FormatError",
    "FreqTimeStats",
    "Lexicon",
    "LexiconEntry",
    "LexmapError",
    "LogisticSummary",
    "Mapping",
    "ParseError",
    "SolverError",
    "TrajectoryResult",
    "ValidationError",
    "WeightVector",
    "accuracy_at_k",
    "align",
    "build_cue_matrix",
    "compare_whl_fil",
    "embedding_table_from_matrix",
    "expand_to_events",
    "extract_multichannel",
    "extract_ngrams",
    "freq_time_stats",
    "load_embeddings",
    "load_event_stream",
    "load_lexicon",
    "load_mapping",
    "logistic_freq_summary",
    "predict",
    "priming_measure",
    "rt_measure",
    "run_trajectory",
    "save_mapping",
    "solve_endstate",
    "solve_fil",
    "solve_production",
    "synth_lexicon",
    "target_correlations",
    "token_weighted_accuracy",
    "train_whl",
    "weights_from_freqs",
]
