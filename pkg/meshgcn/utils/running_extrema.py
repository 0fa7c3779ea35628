import math
from typing import Dict, Optional


MAX = 'max'
MIN = 'min'


class RunningExtrema:
    """Keeps the running extremum (max/min) of a set of named metrics, and
    the epoch at which each extremum was reached.

    A value only replaces the running extremum if it is strictly better, so
    the earliest epoch wins on ties. NaN values never become an extremum.

    Attributes:
        extremum: The extremum (max/min) to use.
        values: The running extremum per metric.
        epochs: The epoch at which each running extremum was reached.
    """
    def __init__(self, extremum: str):
        """
        Args:
            extremum: The extremum (max/min) to use.
        """
        if extremum not in [MAX, MIN]:
            raise ValueError(
                f'Unknown extremum "{extremum}". '
                f'Possible values: "{MAX}" and "{MIN}".'
            )
        self.extremum = extremum
        self.values: Dict[str, float] = {}
        self.epochs: Dict[str, int] = {}

    def is_new_extremum(self, key: str, val: float) -> bool:
        """Returns if the value is strictly better than the running extremum
        of the key."""
        val = float(val)
        if math.isnan(val):
            return False
        if key not in self.values:
            return True
        curr = self.values[key]
        return val > curr if self.extremum == MAX else val < curr

    def update(
        self,
        key: str,
        val: float,
        epoch: Optional[int] = None,
    ) -> bool:
        """Replaces the running value of the key if the value is a new
        extremum.

        Returns:
            ``True`` if the value became the new extremum.
        """
        if not self.is_new_extremum(key, val):
            return False
        self.values[key] = float(val)
        if epoch is not None:
            self.epochs[key] = epoch
        return True

    def clear(self):
        """Clears all running values."""
        self.values = {}
        self.epochs = {}
