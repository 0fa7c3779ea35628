from .running_extrema import RunningExtrema, MAX, MIN  # noqa
from .seeding import seed_everything, rng_state, set_rng_state  # noqa
