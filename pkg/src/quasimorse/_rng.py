import zlib

import numpy as np


def substream(seed, name):
    """Independent generator for one named use of the global seed."""
    key = zlib.crc32(name.encode("utf-8"))
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(key,))
    return np.random.default_rng(ss)
