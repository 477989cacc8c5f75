"""Keyed, counter-based random streams.

Every random quantity in the package is drawn from a Philox generator whose
seed sequence is ``(master_seed, *key)``.  Sample ``k`` of job ``j`` therefore
sees the same numbers regardless of how work is split across processes, and
sign sequences are generated in fixed blocks so that enlarging a window never
changes signs that were already produced.
"""

import zlib

import numpy as np

#: Number of signs produced per keyed block.
BLOCK = 4096

_AXIS_CODES = {"xi": 0, "eta": 1}


def _encode(part):
    # SeedSequence needs non-negative integers; strings are hashed and
    # negative integers are zigzag-encoded.
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    part = int(part)
    return 2 * part if part >= 0 else -2 * part - 1


def stream(seed, *key):
    """Return a ``numpy.random.Generator`` for the key ``(seed, *key)``.

    Parameters
    ----------
    seed : int
        Master seed.
    *key : int or str
        Extra key components, e.g. an estimator name and a sample index.
    """
    entropy = [_encode(seed)] + [_encode(k) for k in key]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def axis_code(axis):
    try:
        return _AXIS_CODES[axis]
    except KeyError:
        raise ValueError(f"axis must be 'xi' or 'eta', got {axis!r}") from None


def block_uniforms(seed, axis, lo, hi):
    """Uniforms in [0, 1) for indices ``lo..hi`` of one axis.

    The value attached to index ``n`` depends only on ``(seed, axis, n)``.
    """
    code = axis_code(axis)
    b0, b1 = lo // BLOCK, hi // BLOCK
    parts = []
    for b in range(b0, b1 + 1):
        u = stream(seed, "signs", code, b).random(BLOCK)
        s = max(lo - b * BLOCK, 0)
        e = min(hi - b * BLOCK, BLOCK - 1)
        parts.append(u[s:e + 1])
    return np.concatenate(parts)
