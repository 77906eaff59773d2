"""Deterministic per-trial seed derivation.

trial_seed(base, index) = splitmix64(base + (index+1) * GOLDEN mod 2^64),
where splitmix64 is the standard 64-bit finalizer.  Seeds are a pure
function of (base, index), so trials can be dispatched to workers in any
order without affecting results.
"""

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    z &= _M64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _M64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _M64
    return (z ^ (z >> 31)) & _M64


def trial_seed(base_seed: int, index: int) -> int:
    if index < 0:
        raise ValueError("trial index must be nonnegative")
    return splitmix64((base_seed + (index + 1) * _GOLDEN) & _M64)
