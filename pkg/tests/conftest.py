"""Shared test helpers: independent oracles and a fast PRNG word stream."""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


class NumpyWords:
    """Uniform 32-bit word stream for statistical tests (not Keccak)."""

    def __init__(self, seed):
        self.rng = np.random.default_rng(seed)
        self.buf = []
        self.words_out = 0
        self.permutes = 0

    def next_word(self):
        if not self.buf:
            self.buf = self.rng.integers(
                0, 1 << 32, size=1 << 16, dtype=np.uint64).tolist()
        self.words_out += 1
        return self.buf.pop()


def bitrev(i, bits):
    r = 0
    for _ in range(bits):
        r = (r << 1) | (i & 1)
        i >>= 1
    return r


def iterative_ntt(a, omega, q):
    """Independent oracle: iterative in-place NTT with initial bit-reversal
    (textbook form), normal-order output."""
    n = len(a)
    lgn = n.bit_length() - 1
    x = [a[bitrev(i, lgn)] for i in range(n)]
    for s in range(1, lgn + 1):
        m = 1 << s
        wm = pow(omega, n // m, q)
        for k in range(0, n, m):
            w = 1
            for j in range(m // 2):
                t = w * x[k + j + m // 2] % q
                u = x[k + j]
                x[k + j] = (u + t) % q
                x[k + j + m // 2] = (u - t) % q
                w = w * wm % q
    return x


def schoolbook_negacyclic(a, b, q):
    """Dense negacyclic product via direct convolution (numpy int64)."""
    conv = np.convolve(np.asarray(a, dtype=np.int64),
                       np.asarray(b, dtype=np.int64))
    out = np.zeros(len(a), dtype=np.int64)
    out[: len(a)] = conv[: len(a)]
    out[: len(conv) - len(a)] -= conv[len(a):]
    return (out % q).tolist()


def chi_square_pvalue(observed, expected):
    """Goodness-of-fit p-value with sparse tail buckets merged."""
    from scipy import stats

    obs, exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            obs.append(acc_o)
            exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and exp:
        obs[-1] += acc_o
        exp[-1] += acc_e
    exp = np.array(exp) * (sum(obs) / sum(exp))
    return stats.chisquare(obs, exp).pvalue


def fresh_machine(**kw):
    from sapphire import machine

    return machine.Machine(**kw)


@pytest.fixture
def numpy_words():
    return NumpyWords
