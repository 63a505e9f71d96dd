"""Counter-based random streams keyed by (master seed, stream index)."""

import numpy as np

from .errors import ConfigurationError

_U64 = 1 << 64

GENERATOR_ID = "numpy.random.Philox-4x64 key=seed+2**64*stream"


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < _U64:
        raise ConfigurationError("seed must be a 64-bit unsigned integer", field="seed")
    return seed


def make_rng(seed, stream=0):
    """Return a Generator for stream ``stream`` of master seed ``seed``.

    Philox is counter-based, so the 128-bit key ``seed | stream << 64`` gives
    statistically independent streams without any shared state.
    """
    seed = check_seed(seed)
    stream = int(stream)
    if not 0 <= stream < _U64:
        raise ConfigurationError("stream index must be a 64-bit unsigned integer", field="stream")
    return np.random.Generator(np.random.Philox(key=seed + stream * _U64))
