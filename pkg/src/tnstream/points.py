"""Immutable point collections shared by every other module."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, EmptyPointSet, UnknownId


class PointSet:
    """A fixed set of d-dimensional points with unique non-negative integer ids.

    Coordinates are stored as a float64 array of shape (n, d); ids keep the
    order they were given in (arrival order for streams, row order for files).
    """

    __slots__ = ("ids", "coords", "_pos")

    def __init__(self, ids, coords):
        ids = np.asarray(ids, dtype=np.int64)
        try:
            coords = np.asarray(coords, dtype=np.float64)
        except ValueError:
            raise DimensionMismatch("rows have uneven coordinate counts") from None
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1)
        if coords.ndim != 2 or coords.shape[1] < 1:
            raise DimensionMismatch(f"coords must be (n, d) with d >= 1, got shape {coords.shape}")
        if len(ids) != len(coords):
            raise DimensionMismatch(f"{len(ids)} ids for {len(coords)} coordinate rows")
        if len(ids) == 0:
            raise EmptyPointSet("a PointSet holds at least one point")
        if np.any(ids < 0):
            raise ValueError("point ids must be non-negative")
        if len(np.unique(ids)) != len(ids):
            raise ValueError("point ids must be distinct")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        self.ids = ids
        self.ids.setflags(write=False)
        self.coords = coords
        self.coords.setflags(write=False)
        self._pos = {int(i): p for p, i in enumerate(ids)}

    @classmethod
    def from_coords(cls, coords):
        coords = np.asarray(coords, dtype=np.float64)
        return cls(np.arange(len(coords)), coords)

    def __len__(self):
        return len(self.ids)

    @property
    def dim(self):
        return self.coords.shape[1]

    def __contains__(self, point_id):
        return int(point_id) in self._pos

    def position(self, point_id):
        """Row index of a point id; raises UnknownId for ids not in the set."""
        try:
            return self._pos[int(point_id)]
        except KeyError:
            raise UnknownId(f"no point with id {point_id}") from None

    def coords_of(self, point_id):
        return self.coords[self.position(point_id)]

    def id_set(self):
        return set(int(i) for i in self.ids)
