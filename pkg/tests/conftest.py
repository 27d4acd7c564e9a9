import numpy as np
import pytest

import lexmap as lm


@pytest.fixture
def tiny_lexicon_file(tmp_path):
    """Four words with disjoint letters, so bigram cue rows are orthogonal."""
    path = tmp_path / "lexicon.csv"
    path.write_text(
        "form,frequency\npa,40\nti,20\nku,10\nso,5\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture
def tiny_embeddings_file(tmp_path):
    # q=3 with pairwise-distinct row correlations, none equal to 1
    path = tmp_path / "embeddings.txt"
    path.write_text(
        "4 3\n"
        "pa 1.0 0.2 -0.3\n"
        "ti -0.5 1.0 0.4\n"
        "ku 0.3 -0.8 1.0\n"
        "so -1.0 -0.2 0.6\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture
def toy_fit():
    """Small crowded synthetic set plus cue matrix and frequencies."""
    lexicon, S = lm.synth_lexicon(40, 8, seed=3, base_count=500)
    cue = lm.build_cue_matrix(lexicon, lm.CueScheme(gram_size=3))
    return lexicon, S, cue


def random_sparse_binary(rng, m, r, max_nnz=4):
    """Binary csr design with at least one cue per row."""
    import scipy.sparse as sp

    indptr = [0]
    indices = []
    for _ in range(m):
        k = int(rng.integers(1, max_nnz + 1))
        cols = rng.choice(r, size=min(k, r), replace=False)
        indices.extend(sorted(int(c) for c in cols))
        indptr.append(len(indices))
    return sp.csr_array(
        (np.ones(len(indices)), np.array(indices), np.array(indptr)), shape=(m, r)
    )
