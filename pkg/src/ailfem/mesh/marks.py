"""Element mark sets tied to a mesh size."""

from collections.abc import Iterable, Iterator
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class MarkSet:
    indices: np.ndarray  # sorted, unique
    n_elements: int

    @classmethod
    def from_indices(
        cls, indices: Iterable[int] | np.ndarray, n_elements: int
    ) -> "MarkSet":
        """Validate *indices* against a mesh with *n_elements* elements."""
        raw = indices if isinstance(indices, np.ndarray) else list(indices)
        array = np.asarray(raw).ravel()
        if array.size == 0:
            array = np.empty(0, dtype=np.int64)
        elif array.dtype.kind not in "iu":
            raise ValueError(f"element indices must be integers, got {array.dtype}")
        array = array.astype(np.int64)
        if array.size and (array.min() < 0 or array.max() >= n_elements):
            bad = array[(array < 0) | (array >= n_elements)][0]
            raise ValueError(
                f"invalid element index {int(bad)} for a mesh with {n_elements} elements"
            )
        unique = np.unique(array)
        if len(unique) != len(array):
            raise ValueError("mark set contains duplicate element indices")
        unique.setflags(write=False)
        return cls(indices=unique, n_elements=n_elements)

    @classmethod
    def coerce(
        cls, marked: "MarkSet | Iterable[int] | np.ndarray", n_elements: int
    ) -> "MarkSet":
        if isinstance(marked, MarkSet):
            if marked.n_elements != n_elements:
                raise ValueError(
                    f"mark set belongs to a mesh with {marked.n_elements} elements, "
                    f"not {n_elements}"
                )
            return marked
        return cls.from_indices(marked, n_elements)

    @classmethod
    def empty(cls, n_elements: int) -> "MarkSet":
        return cls.from_indices([], n_elements)

    def to_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_elements, dtype=bool)
        mask[self.indices] = True
        return mask

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices.tolist())

    def __contains__(self, element: object) -> bool:
        if not isinstance(element, (int, np.integer)):
            return False
        position = np.searchsorted(self.indices, element)
        return bool(
            position < len(self.indices) and self.indices[position] == element
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MarkSet):
            return NotImplemented
        return self.n_elements == other.n_elements and np.array_equal(
            self.indices, other.indices
        )

    def __hash__(self) -> int:
        return hash((self.n_elements, self.indices.tobytes()))
