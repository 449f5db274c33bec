"""Exception types raised by stereogan."""
from typing import List, Optional


class ShapeError(ValueError):
    """Image or tensor dimensions violate a precondition."""


class DatasetError(ValueError):
    """Dataset layout or content is invalid."""


class ConfigError(ValueError):
    """Run configuration failed validation.

    Carries every validation error, not only the first one.
    """

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        lines = "\n".join(f"  - {e}" for e in self.errors)
        super().__init__(f"Invalid configuration ({len(self.errors)} error(s)):\n{lines}")


class TrainingDivergedError(RuntimeError):
    """A loss term became non-finite during training."""

    def __init__(self, step: int, losses: dict, dump_path: Optional[str] = None):
        self.step = step
        self.losses = dict(losses)
        self.dump_path = dump_path
        where = f" (state dumped to {dump_path})" if dump_path else ""
        super().__init__(f"Non-finite loss at step {step}: {self.losses}{where}")


class CheckpointError(RuntimeError):
    """Checkpoint cannot be read or does not match the requested use."""
