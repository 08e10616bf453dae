import itertools

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20211)


def unit(rng, n, R=None):
    if R is None:
        x = rng.standard_normal(n)
        return x / np.linalg.norm(x)
    X = rng.standard_normal((n, R))
    return X / np.linalg.norm(X, axis=0)


def loop_tensor(vectors):
    """Flat tensor product of a list of vectors by explicit index loops (first index slowest)."""
    shape = [len(v) for v in vectors]
    out = np.empty(int(np.prod(shape)))
    for flat, idx in enumerate(itertools.product(*[range(s) for s in shape])):
        val = 1.0
        for v, i in zip(vectors, idx):
            val *= v[i]
        out[flat] = val
    return out
