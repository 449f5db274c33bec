"""History of generated images feeding discriminator updates."""
from typing import List, Optional

import numpy as np
import torch


class HistoryBuffer:
    """Capacity-limited store of past generator outputs.

    Until full, every pushed image is stored and returned. Once full, with
    probability 0.5 a uniformly chosen stored image is swapped out and
    returned in place of the new one; otherwise the new image is returned
    unstored.
    """

    def __init__(self, capacity: int = 50, rng: Optional[np.random.Generator] = None):
        if capacity < 1:
            raise ValueError(f"buffer capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.rng = rng if rng is not None else np.random.default_rng()
        self.store: List[torch.Tensor] = []

    def __len__(self) -> int:
        return len(self.store)

    def push_query(self, image: torch.Tensor) -> torch.Tensor:
        """Offer ``image`` to the buffer and return the image to show the discriminator."""
        image = image.detach()
        if len(self.store) < self.capacity:
            self.store.append(image.clone())
            return image
        if self.rng.random() < 0.5:
            index = int(self.rng.integers(len(self.store)))
            previous = self.store[index]
            self.store[index] = image.clone()
            return previous
        return image

    def state_dict(self) -> dict:
        """Capacity and stored images, for checkpointing."""
        return {"capacity": self.capacity, "store": [img.clone() for img in self.store]}

    def load_state_dict(self, state: dict) -> None:
        """Restore a buffer saved with ``state_dict``."""
        self.capacity = int(state["capacity"])
        self.store = [img.clone() for img in state["store"]]


def buffer_push_query(buffer: HistoryBuffer, image: torch.Tensor) -> torch.Tensor:
    """Functional form of ``HistoryBuffer.push_query``."""
    return buffer.push_query(image)
