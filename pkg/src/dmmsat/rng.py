"""Seeded random streams.

All randomness comes from numpy's Philox4x64-10, a counter-based generator
with published known-answer vectors (Salmon et al., "Parallel random numbers:
as easy as 1, 2, 3", SC'11). A user seed is never fed to a generator
directly: it is combined with a fixed stream id through ``SeedSequence`` so
that the instance generator, the DMM initializer and the local-search solver
draw from independent streams derived from one integer.
"""

import numpy as np

# Stream ids. Changing any of these changes every generated instance.
STREAM_GENERATOR = 0
STREAM_DMM_INIT = 1
STREAM_SLS = 2
STREAM_SWEEP = 3

_MASK64 = (1 << 64) - 1


def make_rng(seed, stream):
    """Return a ``numpy.random.Generator`` over Philox for ``(seed, stream)``."""
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(entropy=seed & _MASK64, spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *keys):
    """Deterministically derive a 63-bit child seed from ``seed`` and integer keys."""
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=tuple(int(k) for k in keys))
    word = ss.generate_state(2, dtype=np.uint32)
    return (int(word[0]) << 31) ^ int(word[1])
