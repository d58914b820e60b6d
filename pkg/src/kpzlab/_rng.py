"""Counter-style random streams shared by every sampler in the package.

Each Monte Carlo sample owns a xoshiro256** generator whose state is expanded
with splitmix64 from a 64-bit stream seed.  Stream seeds are a bijective mix of
``(master_seed, sample_index)``, so any sample can be regenerated on its own,
in any order, on any worker.
"""

import numba
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = (1 << 64) - 1


@numba.njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@numba.njit(cache=True)
def _stream_seed(master, index):
    return _mix64(_mix64(master + _GOLDEN) ^ (index * _GOLDEN + np.uint64(1)))


@numba.njit(cache=True)
def new_state(seed):
    s = np.empty(4, dtype=np.uint64)
    z = seed
    for k in range(4):
        z = z + _GOLDEN
        s[k] = _mix64(z)
    return s


@numba.njit(cache=True)
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@numba.njit(cache=True)
def uniform_open0(s):
    """Uniform on (0, 1]; zero is unreachable so ``-log`` stays finite."""
    return (np.float64(next_u64(s) >> np.uint64(11)) + 1.0) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def exponential(s, mean):
    return -mean * np.log(uniform_open0(s))


@numba.njit(cache=True)
def geometric_failures(s, p_success):
    """Number of failures before the first success (support 0, 1, 2, ...)."""
    if p_success >= 1.0:
        return 0
    if p_success <= 0.0:
        return -1  # infinite; callers treat -1 as "never"
    u = uniform_open0(s)
    return int(np.floor(np.log(u) / np.log1p(-p_success)))


def stream_seed(master_seed: int, sample_index: int) -> int:
    """Seed of the per-sample stream; a pure function of both arguments."""
    if sample_index < 0:
        raise ValueError("sample_index must be nonnegative")
    return int(_stream_seed(np.uint64(master_seed & _U64_MASK), np.uint64(sample_index)))


def as_seed(seed: int) -> np.uint64:
    return np.uint64(int(seed) & _U64_MASK)
