"""Counter-based random streams keyed by (seed, trial, component, step).

Every uniform variate is a pure function of a 64-bit stream key and a draw
counter::

    u(key, j) = (mix64(key + (j + 1) * GOLDEN) >> 11 + 0.5) * 2**-53

which is the SplitMix64 sequence started at ``key``. Keys are derived by
folding integer parts into a running state::

    key = ROOT
    for part in parts:
        key = mix64(key ^ mix64((part + GOLDEN) mod 2**64))

``mix64`` is the SplitMix64 finalizer (Stafford variant 13). All arithmetic
is unsigned 64-bit with wraparound, so streams are identical on every
platform and independent of evaluation order, thread count, or how a caller
chooses to block its draws.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
ROOT = 0x5EC5_9A85_E000_0001

_U = np.uint64
_GOLDEN = _U(GOLDEN)
_M1 = _U(0xBF58476D1CE4E5B9)
_M2 = _U(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = _U(30), _U(27), _U(31), _U(11)
_INV53 = 2.0**-53

# stream tags so that different uses of one seed never collide
TAG_TRIAL = 1
TAG_SUPPORT = 2
TAG_COMPONENT = 3


def mix64(z):
    """SplitMix64 finalizer on a uint64 array (wraps modulo 2**64)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _as_u64(part):
    if isinstance(part, np.ndarray):
        return part.astype(np.uint64, copy=False)
    return np.asarray(int(part) & MASK64, dtype=np.uint64)


def derive_key(*parts):
    """Fold integer parts (ints or integer arrays, broadcast) into stream keys.

    Returns a Python int when every part is scalar, else a uint64 array.
    """
    key = np.asarray(ROOT, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for part in parts:
            key = mix64(key ^ mix64(_as_u64(part) + _GOLDEN))
    if key.ndim == 0:
        return int(key)
    return key


def uniforms(keys, start, count):
    """Uniforms in (0, 1) for draws ``start .. start+count-1`` of each key.

    ``keys`` is a scalar or 1-d array of stream keys; the result has shape
    ``(len(keys), count)`` (or ``(count,)`` for a scalar key).
    """
    keys = np.asarray(keys, dtype=np.uint64)
    counters = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        if keys.ndim == 0:
            x = keys + counters * _GOLDEN
        else:
            x = keys[:, None] + counters[None, :] * _GOLDEN
    x = mix64(x)
    return ((x >> _S11).astype(np.float64) + 0.5) * _INV53


class CounterStream:
    """A sequential view of one keyed stream with a numpy-like ``random``.

    Anything exposing ``random(size)`` can feed :func:`seqsparse.sample`;
    this class is the deterministic, substream-friendly choice.
    """

    def __init__(self, seed, *parts):
        self.key = derive_key(seed, *parts)
        self.position = 0

    def random(self, size=None):
        count = 1 if size is None else int(np.prod(size))
        u = uniforms(self.key, self.position, count)
        self.position += count
        if size is None:
            return float(u[0])
        return u.reshape(size)

    def spawn(self, *parts):
        return CounterStream(self.key, *parts)

    def __repr__(self):
        return f"CounterStream(key={self.key:#018x}, position={self.position})"


class Substreams:
    """Per-component streams for one problem instance.

    Component ``i`` on step ``k`` reads from ``derive_key(seed, TAG_COMPONENT,
    labels[i], k)``. ``labels`` defaults to the component index; passing a
    permutation lets a relabelled instance reuse the original streams.
    ``draws`` counts every uniform handed out.
    """

    def __init__(self, seed, labels=None):
        self.seed = int(seed) & MASK64
        self.labels = None if labels is None else np.asarray(labels, dtype=np.int64)
        self.draws = 0

    def keys(self, indices, step):
        indices = np.asarray(indices, dtype=np.int64)
        labels = indices if self.labels is None else self.labels[indices]
        return derive_key(self.seed, TAG_COMPONENT, labels.astype(np.uint64), step)

    def block(self, indices, step, start, count):
        """Uniforms of shape ``(len(indices), count)`` from draw ``start`` on."""
        indices = np.asarray(indices, dtype=np.int64)
        if count <= 0 or indices.size == 0:
            return np.empty((indices.size, max(count, 0)))
        self.draws += indices.size * count
        return uniforms(self.keys(indices, step), start, count)
