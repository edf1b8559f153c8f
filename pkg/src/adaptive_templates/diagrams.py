"""Persistence diagrams: points with multiplicity, coordinate frames and text I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np


class Frame(str, Enum):
    BIRTH_DEATH = "birth-death"
    BIRTH_LIFETIME = "birth-lifetime"


class DiagramFormatError(ValueError):
    """Raised for malformed diagram files; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


@dataclass(frozen=True)
class PersistencePoint:
    birth: float
    death: float
    multiplicity: int = 1

    def __post_init__(self):
        _check_point(self.birth, self.death, self.multiplicity)

    @property
    def persistence(self) -> float:
        return persistence(self)


def persistence(p: PersistencePoint) -> float:
    """Death minus birth; an infinite death gives ``inf``."""
    return p.death - p.birth


def _check_point(birth: float, death: float, mult: int) -> None:
    if math.isnan(birth) or math.isnan(death):
        raise ValueError("NaN coordinate")
    if not (0 <= birth < death) or math.isinf(birth):
        raise ValueError(f"point ({birth!r}, {death!r}) violates 0 <= birth < death")
    if int(mult) != mult or mult < 1:
        raise ValueError(f"multiplicity must be a positive integer, got {mult!r}")


def _merge(first: np.ndarray, second: np.ndarray, mult: np.ndarray):
    # exact bit equality; first-appearance order kept
    keys = np.stack([first, second], axis=1).astype(np.float64).view(np.uint64)
    seen: dict[tuple[int, int], int] = {}
    order: list[int] = []
    total: list[int] = []
    for i, (ka, kb) in enumerate(keys.tolist()):
        j = seen.get((ka, kb))
        if j is None:
            seen[(ka, kb)] = len(order)
            order.append(i)
            total.append(int(mult[i]))
        else:
            total[j] += int(mult[i])
    idx = np.asarray(order, dtype=np.intp)
    return first[idx], second[idx], np.asarray(total, dtype=np.int64)


class PersistenceDiagram:
    """Finite multiset of persistence points in one coordinate frame.

    Coordinates are held as two float arrays: ``births`` and ``second``
    (death in the birth-death frame, lifetime in the birth-lifetime frame).
    Infinite deaths are stored as ``inf``. Instances are immutable.
    """

    __slots__ = ("_births", "_second", "_mult", "_frame", "_inverse")

    def __init__(self, births=(), second=(), multiplicities=None, frame=Frame.BIRTH_DEATH):
        births = np.asarray(births, dtype=np.float64).reshape(-1)
        second = np.asarray(second, dtype=np.float64).reshape(-1)
        if births.shape != second.shape:
            raise ValueError("births and deaths differ in length")
        if multiplicities is None:
            mult = np.ones(len(births), dtype=np.int64)
        else:
            mult = np.asarray(multiplicities).reshape(-1)
            if mult.shape != births.shape:
                raise ValueError("multiplicities differ in length from points")
        frame = Frame(frame)
        for b, s, m in zip(births.tolist(), second.tolist(), mult.tolist()):
            if frame is Frame.BIRTH_DEATH:
                _check_point(b, s, m)
            else:
                # lifetime frame: second coordinate must be a positive lifetime
                _check_point(b, math.inf if s > 0 else b, m)
        births, second, mult = _merge(births, second, mult.astype(np.int64))
        for arr in (births, second, mult):
            arr.setflags(write=False)
        self._births = births
        self._second = second
        self._mult = mult
        self._frame = frame
        self._inverse = None

    @classmethod
    def from_points(cls, points: Iterable[PersistencePoint | tuple], frame=Frame.BIRTH_DEATH):
        b, d, m = [], [], []
        for p in points:
            if isinstance(p, PersistencePoint):
                b.append(p.birth), d.append(p.death), m.append(p.multiplicity)
            else:
                b.append(p[0]), d.append(p[1]), m.append(p[2] if len(p) > 2 else 1)
        return cls(b, d, m, frame=frame)

    @classmethod
    def from_array(cls, arr, frame=Frame.BIRTH_DEATH):
        """Build from an ``(n, 2)`` or ``(n, 3)`` array (third column = multiplicity)."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.size == 0:
            return cls(frame=frame)
        if arr.ndim != 2 or arr.shape[1] not in (2, 3):
            raise ValueError(f"expected an (n, 2) or (n, 3) array, got shape {arr.shape}")
        mult = arr[:, 2] if arr.shape[1] == 3 else None
        return cls(arr[:, 0], arr[:, 1], mult, frame=frame)

    @property
    def frame(self) -> Frame:
        return self._frame

    @property
    def births(self) -> np.ndarray:
        return self._births

    @property
    def second(self) -> np.ndarray:
        return self._second

    @property
    def multiplicities(self) -> np.ndarray:
        return self._mult

    @property
    def deaths(self) -> np.ndarray:
        if self._frame is Frame.BIRTH_DEATH:
            return self._second
        return self._births + self._second

    @property
    def lifetimes(self) -> np.ndarray:
        if self._frame is Frame.BIRTH_LIFETIME:
            return self._second
        return self._second - self._births

    def __len__(self) -> int:
        return len(self._births)

    def __iter__(self) -> Iterator[PersistencePoint]:
        for b, d, m in zip(self._births.tolist(), self.deaths.tolist(), self._mult.tolist()):
            yield PersistencePoint(b, d, m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        if self._frame is not other._frame or len(self) != len(other):
            return False
        return _as_counter(self) == _as_counter(other)

    __hash__ = None

    def __repr__(self) -> str:
        return f"PersistenceDiagram({len(self)} points, total multiplicity {self.total_multiplicity}, frame={self._frame.value})"

    @property
    def total_multiplicity(self) -> int:
        return int(self._mult.sum())

    def coords(self) -> np.ndarray:
        """``(n, 2)`` array of coordinates in the diagram's own frame."""
        return np.stack([self._births, self._second], axis=1)

    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self._second)

    def finite(self) -> "PersistenceDiagram":
        """Copy with infinite-death points removed."""
        keep = self.finite_mask()
        if keep.all():
            return self
        return PersistenceDiagram(self._births[keep], self._second[keep], self._mult[keep], self._frame)

    @property
    def n_infinite(self) -> int:
        return int(self._mult[~self.finite_mask()].sum())

    def cap_infinite(self, value: float) -> "PersistenceDiagram":
        """Replace infinite deaths by ``value``; points not dying after their birth are dropped."""
        births, deaths, mult = self._births, self.deaths.copy(), self._mult
        inf = ~np.isfinite(deaths)
        deaths[inf] = value
        keep = deaths > births
        out = PersistenceDiagram(births[keep], deaths[keep], mult[keep], Frame.BIRTH_DEATH)
        return out if self._frame is Frame.BIRTH_DEATH else to_birth_lifetime(out)

    def expanded(self) -> np.ndarray:
        """Coordinates with each point repeated by its multiplicity."""
        return np.repeat(self.coords(), self._mult, axis=0)

    def scaled_multiplicity(self, factor: int) -> "PersistenceDiagram":
        return PersistenceDiagram(self._births, self._second, self._mult * int(factor), self._frame)


def _as_counter(d: PersistenceDiagram) -> dict:
    keys = d.coords().view(np.uint64).tolist()
    return {tuple(k): int(m) for k, m in zip(keys, d.multiplicities.tolist())}


def to_birth_lifetime(D: PersistenceDiagram) -> PersistenceDiagram:
    if D.frame is not Frame.BIRTH_DEATH:
        raise ValueError("diagram is already in the birth-lifetime frame")
    out = PersistenceDiagram(D.births, D.second - D.births, D.multiplicities, Frame.BIRTH_LIFETIME)
    # a + (b - a) is not always b in floating point; remember the source
    out._inverse = D
    return out


def to_birth_death(D: PersistenceDiagram) -> PersistenceDiagram:
    if D.frame is not Frame.BIRTH_LIFETIME:
        raise ValueError("diagram is already in the birth-death frame")
    if D._inverse is not None:
        return D._inverse
    out = PersistenceDiagram(D.births, D.births + D.second, D.multiplicities, Frame.BIRTH_DEATH)
    out._inverse = D
    return out


def to_frame(D: PersistenceDiagram, frame) -> PersistenceDiagram:
    frame = Frame(frame)
    if D.frame is frame:
        return D
    return to_birth_lifetime(D) if frame is Frame.BIRTH_LIFETIME else to_birth_death(D)


def _parse_float(tok: str) -> float:
    t = tok.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    return float(t)


def parse_diagram(text: str, path=None) -> PersistenceDiagram:
    """Parse ``birth,death[,multiplicity]`` lines; ``#`` lines and blanks are skipped."""
    births, deaths, mults = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) not in (2, 3):
            raise DiagramFormatError(f"expected 2 or 3 fields, got {len(parts)}", lineno, path)
        try:
            b = _parse_float(parts[0])
            d = _parse_float(parts[1])
            m = int(parts[2]) if len(parts) == 3 else 1
        except ValueError as exc:
            raise DiagramFormatError(f"cannot parse {line!r} ({exc})", lineno, path) from None
        try:
            _check_point(b, d, m)
        except ValueError as exc:
            raise DiagramFormatError(str(exc), lineno, path) from None
        births.append(b)
        deaths.append(d)
        mults.append(m)
    return PersistenceDiagram(births, deaths, mults)


def read_diagram_file(path) -> PersistenceDiagram:
    path = Path(path)
    return parse_diagram(path.read_text(), path=path)


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def format_diagram(D: PersistenceDiagram) -> str:
    D = to_frame(D, Frame.BIRTH_DEATH)
    lines = []
    for b, d, m in zip(D.births.tolist(), D.deaths.tolist(), D.multiplicities.tolist()):
        lines.append(f"{_fmt(b)},{_fmt(d)}" if m == 1 else f"{_fmt(b)},{_fmt(d)},{m}")
    return "".join(line + "\n" for line in lines)


def write_diagram_file(D: PersistenceDiagram, path) -> None:
    Path(path).write_text(format_diagram(D))
