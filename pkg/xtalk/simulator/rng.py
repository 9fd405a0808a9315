"""
Counter-based random streams.

Every stream is a Philox generator keyed by (seed, purpose) whose counter is
positioned by a block index, so the draws for a block depend only on
(seed, purpose, block) and never on the order blocks are processed in.
"""

import numpy as np

# Purposes occupy the upper 64 bits of the 128-bit Philox key
SIMULATION_STREAM = 1
BOOTSTRAP_STREAM = 2

# Each block owns 2**64 Philox counter values
_BLOCK_SHIFT = 64

# Families of derived seeds
SWEEP_FAMILY = 0
DARK_FAMILY = 1
POINT_FAMILY = 2


def block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    """
    Generator for one block of a stream.

    Args:
        seed: 64-bit unsigned seed
        stream: Purpose of the stream (simulation, bootstrap)
        block: Block index within the stream

    Returns:
        numpy Generator backed by a positioned Philox bit generator
    """
    key = (int(stream) << 64) | int(seed)
    counter = int(block) << _BLOCK_SHIFT
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def derive_seed(seed: int, index: int, family: int = SWEEP_FAMILY) -> int:
    """
    Child seed for the index-th member of a family (sweep points, dark runs,
    bootstrap of calibration points).

    Distinct (family, index) pairs give distinct, statistically independent seeds.
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(family), int(index)))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
