import random
import subprocess
import sys

import numpy as np

from oracles import lcs_brute
from reporteval import kernels


def test_lcs_matches_brute_force_oracle():
    rng = random.Random(42)
    for _ in range(300):
        a = [rng.choice("abcd") for _ in range(rng.randrange(0, 12))]
        b = [rng.choice("abcd") for _ in range(rng.randrange(0, 12))]
        assert kernels.lcs_length(a, b) == lcs_brute(a, b)


def test_lcs_numpy_fallback_matches_jit():
    rng = random.Random(1)
    for _ in range(100):
        a = np.array([rng.randrange(5) for _ in range(rng.randrange(0, 30))], dtype=np.int64)
        b = np.array([rng.randrange(5) for _ in range(rng.randrange(0, 30))], dtype=np.int64)
        assert kernels._lcs_len_numpy(a, b) == lcs_brute(a.tolist(), b.tolist())


def test_lcs_edge_cases():
    assert kernels.lcs_length([], ["a"]) == 0
    assert kernels.lcs_length(["a"], []) == 0
    assert kernels.lcs_length(["a", "b", "c"], ["a", "b", "c"]) == 3
    assert kernels.lcs_length(["a", "x", "b"], ["a", "b"]) == 2


def test_env_flag_selects_numpy_backend():
    code = (
        "import os; os.environ['REPORTEVAL_NUMBA'] = '0'; "
        "from reporteval import kernels; "
        "assert kernels.backend() == 'numpy'; "
        "assert kernels.lcs_length(list('abcab'), list('bca')) == 3; "
        "print('ok')"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "ok"
