from typing import Optional, Sequence


class ConfigError(ValueError):
    """Raised for an invalid configuration file or configuration value."""


class DisconnectedGraphError(ValueError):
    """Raised when an operation needs a connected graph but got several
    connected components."""
    def __init__(self, num_components: int):
        super().__init__(
            f'Expected a connected graph, got {num_components} connected '
            'components. Split the graph into its components first.'
        )
        self.num_components = num_components


class SingletonPartitionError(ValueError):
    """Raised when the hierarchy builder would have to split a partition
    that contains a single vertex."""
    def __init__(self, level: int, partition: int):
        super().__init__(
            f'Partition {partition} at level {level} contains a single '
            'vertex and cannot be split. Use a larger stop distance or a '
            'smaller maximum number of levels.'
        )
        self.level = level
        self.partition = partition


class ConvergenceError(RuntimeError):
    """Raised when an iterative eigen-solver does not converge.

    Attributes:
        n_iter: The number of iterations that were performed.
    """
    def __init__(self, n_iter: int, residual: float):
        super().__init__(
            f'Did not converge after {n_iter} iterations '
            f'(last relative residual {residual:.3e}).'
        )
        self.n_iter = n_iter
        self.residual = residual


class NonFiniteError(RuntimeError):
    """Raised when a loss or a gradient becomes NaN or infinite during
    training.

    Attributes:
        epoch: The epoch in which the problem occured (if known).
        step: The optimizer step in which the problem occured (if known).
        names: The names of the affected parameters (if any).
    """
    def __init__(
        self,
        message: str,
        epoch: Optional[int] = None,
        step: Optional[int] = None,
        names: Sequence[str] = (),
    ):
        where = []
        if epoch is not None:
            where.append(f'epoch {epoch}')
        if step is not None:
            where.append(f'step {step}')
        if len(names) > 0:
            where.append('parameters ' + ', '.join(names))
        if len(where) > 0:
            message = f'{message} ({"; ".join(where)})'
        super().__init__(message)
        self.epoch = epoch
        self.step = step
        self.names = list(names)
