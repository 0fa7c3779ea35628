import logging
from typing import Any, Dict

import numpy as np
import torch


def seed_everything(seed: int, num_threads: int = 0):
    """Seeds the random generators of torch and numpy.

    Args:
        seed: The seed.
        num_threads: If positive, limit torch to this many threads. A single
            thread gives bitwise reproducible reductions on the CPU.
    """
    torch.manual_seed(seed)
    np.random.seed(seed)
    if num_threads > 0:
        torch.set_num_threads(num_threads)
    logging.debug(f'Seeded torch and numpy with {seed}')


def rng_state() -> Dict[str, Any]:
    """Returns the state of the torch and numpy random generators."""
    return {
        'torch': torch.get_rng_state(),
        'numpy': np.random.get_state(),
    }


def set_rng_state(state: Dict[str, Any]):
    """Restores a state returned by :func:`rng_state`."""
    torch.set_rng_state(state['torch'])
    np.random.set_state(state['numpy'])
