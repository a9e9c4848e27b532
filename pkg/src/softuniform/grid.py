"""Integer codes for the soft subsets of a host.

A soft subset ``O`` of ``F`` is encoded by concatenating, parameter by
parameter, the section-local bitmask of ``O(e)`` inside ``F(e)``.  With this
encoding sectionwise union, intersection and complement are plain ``|``,
``&`` and ``^`` on codes, and ``x ∈_s O`` is a mask test.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import SoftElement, SoftRelation, SoftSet, bits
from .errors import SoftError


class SubsetGrid:
    def __init__(self, host: SoftSet):
        self.host = host
        self.points = [list(bits(m)) for m in host.masks]
        self.sizes = [len(p) for p in self.points]
        self.offsets = list(itertools.accumulate([0] + self.sizes[:-1]))
        self.width = sum(self.sizes)
        self.full = (1 << self.width) - 1
        self._local = [{u: i for i, u in enumerate(p)} for p in self.points]
        self._elements = None

    @property
    def total(self) -> int:
        """Number of soft subsets of the host."""
        return 1 << self.width

    def section_mask(self, k: int) -> int:
        return ((1 << self.sizes[k]) - 1) << self.offsets[k]

    def code(self, O: SoftSet) -> int:
        if O.universe != self.host.universe or O.params != self.host.params:
            raise SoftError("soft set over a different universe or parameter set")
        c = 0
        for k, m in enumerate(O.masks):
            if m & ~self.host.masks[k]:
                raise SoftError(f"not a soft subset of the host at parameter {self.host.params[k]!r}")
            loc = self._local[k]
            for u in bits(m):
                c |= 1 << (self.offsets[k] + loc[u])
        return c

    def decode(self, code: int) -> SoftSet:
        masks = []
        for k, pts in enumerate(self.points):
            m = 0
            local = code >> self.offsets[k]
            for i, u in enumerate(pts):
                if local >> i & 1:
                    m |= 1 << u
            masks.append(m)
        return SoftSet(self.host.universe, self.host.params, tuple(masks))

    def element_code(self, x: SoftElement) -> int:
        c = 0
        for k, u in enumerate(x.choice):
            try:
                c |= 1 << (self.offsets[k] + self._local[k][u])
            except KeyError:
                raise SoftError(f"{x!r} is not a soft element of the host") from None
        return c

    def local_rows(self, U: SoftRelation) -> list[list[int]]:
        """Per section, the relation rows as section-local masks."""
        out = []
        for k, pts in enumerate(self.points):
            loc = self._local[k]
            rows = []
            for u in pts:
                r = 0
                for v in bits(U.rows[k][u]):
                    r |= 1 << loc[v]
                rows.append(r)
            out.append(rows)
        return out

    def ball_code(self, U: SoftRelation, x: SoftElement) -> int:
        c = 0
        for k, u in enumerate(x.choice):
            loc = self._local[k]
            for v in bits(U.rows[k][u]):
                c |= 1 << (self.offsets[k] + loc[v])
        return c

    def is_vacuous(self, code: int) -> bool:
        """True when some section of the coded set is empty."""
        return any(code & self.section_mask(k) == 0 for k in range(len(self.sizes)))

    def elements(self) -> list[SoftElement]:
        if self._elements is None:
            self._elements = [
                SoftElement(self.host, c) for c in itertools.product(*self.points)
            ]
        return self._elements

    def element_codes(self) -> np.ndarray:
        return np.array([self.element_code(x) for x in self.elements()], dtype=np.int64)
