"""Template functions on the persistence plane and the diagram featurization they induce.

Every template is a compactly supported function ``f`` evaluated on
``(n, 2)`` arrays of points; a diagram is mapped to ``sum(mult * f(point))``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .diagrams import Frame, PersistenceDiagram, to_frame


class SupportWarning(UserWarning):
    """An ellipse support reaches below the horizontal axis of the working frame."""


def _as_points(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    return z.reshape(1, 2) if z.ndim == 1 else z


def _maybe_scalar(z, values):
    return float(values[0]) if np.ndim(z) == 1 else values


@dataclass(frozen=True)
class TentTemplate:
    """Pyramid of height 1 over the sup-norm ball of radius ``delta`` around ``center``."""

    center: tuple[float, float]
    delta: float
    kind = "tent"

    def __post_init__(self):
        a, b = self.center
        object.__setattr__(self, "center", (float(a), float(b)))
        if not (0 < self.delta < b):
            raise ValueError(f"tent needs 0 < delta < center lifetime, got delta={self.delta!r}, center={self.center!r}")

    def __call__(self, z):
        pts = _as_points(z)
        a, b = self.center
        dist = np.maximum(np.abs(pts[:, 0] - a), np.abs(pts[:, 1] - b))
        return _maybe_scalar(z, np.maximum(1.0 - dist / self.delta, 0.0))

    def params(self) -> list[float]:
        return [self.center[0], self.center[1], self.delta]


@dataclass(frozen=True)
class EllipseTemplate:
    """``1 - q(z)`` inside the ellipse ``q(z) = (z - center)^T A (z - center) < 1``, zero outside."""

    center: tuple[float, float]
    matrix: np.ndarray = field(repr=False)
    kind = "ellipse"

    def __post_init__(self):
        A = np.array(self.matrix, dtype=np.float64).reshape(2, 2)
        if abs(A[0, 1] - A[1, 0]) > 1e-12:
            raise ValueError("ellipse matrix is not symmetric")
        A[1, 0] = A[0, 1]
        if not np.all(np.isfinite(A)) or np.linalg.eigvalsh(A).min() <= 0:
            raise ValueError("ellipse matrix must be positive definite")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        lowest = self.center[1] - self.half_extent()[1]
        if lowest < 0:
            warnings.warn(f"ellipse support reaches y={lowest:.3g} below the axis", SupportWarning, stacklevel=3)

    def half_extent(self) -> tuple[float, float]:
        """Half widths of the axis-aligned box enclosing the support."""
        cov = np.linalg.inv(self.matrix)
        return math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1])

    def quadratic_form(self, z) -> np.ndarray:
        d = _as_points(z) - np.asarray(self.center)
        A = self.matrix
        return A[0, 0] * d[:, 0] ** 2 + 2 * A[0, 1] * d[:, 0] * d[:, 1] + A[1, 1] * d[:, 1] ** 2

    def __call__(self, z):
        q = self.quadratic_form(z)
        return _maybe_scalar(z, np.where(q < 1.0, 1.0 - q, 0.0))

    def params(self) -> list[float]:
        A = self.matrix
        return [self.center[0], self.center[1], A[0, 0], A[0, 1], A[1, 1]]

    def __eq__(self, other):
        if not isinstance(other, EllipseTemplate):
            return NotImplemented
        return self.center == other.center and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.center, tuple(self.matrix.ravel())))


def _lagrange_basis(knots: np.ndarray, i: int, x: np.ndarray) -> np.ndarray:
    out = np.ones_like(x)
    for k, t in enumerate(knots):
        if k != i:
            out = out * (x - t) / (knots[i] - t)
    return out


@dataclass(frozen=True)
class PolynomialMeshTemplate:
    """Product of 1-D Lagrange basis polynomials, clipped to a bounding box.

    Equals 1 at knot ``(x_knots[i], y_knots[j])`` and 0 at every other knot
    pair. The box defaults to the knot hull.
    """

    x_knots: tuple[float, ...]
    y_knots: tuple[float, ...]
    index: tuple[int, int]
    box: tuple[float, float, float, float] | None = None
    kind = "polymesh"

    def __post_init__(self):
        xs = tuple(float(v) for v in self.x_knots)
        ys = tuple(float(v) for v in self.y_knots)
        for name, ks in (("x", xs), ("y", ys)):
            if len(ks) < 1 or any(b <= a for a, b in zip(ks, ks[1:])):
                raise ValueError(f"{name} knots must be strictly increasing")
        i, j = int(self.index[0]), int(self.index[1])
        if not (0 <= i < len(xs) and 0 <= j < len(ys)):
            raise ValueError(f"index {(i, j)} outside the knot grid")
        box = self.box if self.box is not None else (xs[0], xs[-1], ys[0], ys[-1])
        box = tuple(float(v) for v in box)
        if box[0] > box[1] or box[2] > box[3]:
            raise ValueError("empty bounding box")
        object.__setattr__(self, "x_knots", xs)
        object.__setattr__(self, "y_knots", ys)
        object.__setattr__(self, "index", (i, j))
        object.__setattr__(self, "box", box)

    def __call__(self, z):
        pts = _as_points(z)
        x, y = pts[:, 0], pts[:, 1]
        val = _lagrange_basis(np.asarray(self.x_knots), self.index[0], x) * _lagrange_basis(
            np.asarray(self.y_knots), self.index[1], y
        )
        x0, x1, y0, y1 = self.box
        inside = (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        return _maybe_scalar(z, np.where(inside, val, 0.0))

    def params(self) -> list[float]:
        return [*self.index, *self.box, len(self.x_knots), len(self.y_knots), *self.x_knots, *self.y_knots]


Template = TentTemplate | EllipseTemplate | PolynomialMeshTemplate


def rescale_translate(f, n: int, m: Sequence[int] = (0, 0)):
    """Template ``z -> f(n * z + m / n)`` for a tent or ellipse ``f``."""
    if isinstance(f, PolynomialMeshTemplate) or not isinstance(f, (TentTemplate, EllipseTemplate)):
        raise TypeError(f"rescale_translate supports tent and ellipse templates, not {type(f).__name__}")
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    shift = np.asarray(m, dtype=np.float64) / n
    center = (np.asarray(f.center) - shift) / n
    if isinstance(f, TentTemplate):
        return TentTemplate((center[0], center[1]), f.delta / n)
    return EllipseTemplate((center[0], center[1]), (n * n) * f.matrix)


@dataclass(frozen=True)
class TemplateSystem:
    """Ordered, nonempty list of templates sharing a working frame."""

    templates: tuple
    frame: Frame = Frame.BIRTH_LIFETIME

    def __post_init__(self):
        object.__setattr__(self, "templates", tuple(self.templates))
        object.__setattr__(self, "frame", Frame(self.frame))
        if not self.templates:
            raise ValueError("template system is empty")

    def __len__(self):
        return len(self.templates)

    def __iter__(self):
        return iter(self.templates)

    def evaluate(self, points) -> np.ndarray:
        """``(n_points, n_templates)`` matrix of template values."""
        pts = _as_points(points)
        return np.column_stack([np.atleast_1d(t(pts)) for t in self.templates]) if len(pts) else np.zeros((0, len(self)))


def featurize(system: TemplateSystem, D: PersistenceDiagram) -> np.ndarray:
    """Vector of ``sum(mult(x) * f(x))`` over the finite points ``x`` of ``D``, one entry per template."""
    if D.frame is not system.frame:
        raise ValueError(f"diagram is in the {D.frame.value} frame but templates expect {system.frame.value}")
    D = D.finite()
    if len(D) == 0:
        return np.zeros(len(system))
    terms = D.multiplicities.astype(np.float64)[:, None] * system.evaluate(D.coords())
    # correctly rounded column sums, so the result does not depend on point order
    return np.array([math.fsum(col) for col in terms.T])


def featurize_collection(systems, diagrams, pair_mode: str = "concat") -> np.ndarray:
    """Stack feature vectors of many samples into a matrix.

    ``systems`` is one template system or a list with one system per
    homology dimension. ``diagrams`` holds one diagram per sample, or one
    tuple of diagrams (same length as ``systems``) per sample. In ``concat``
    mode the blocks are laid out dimension by dimension. Diagrams are moved to
    each system's frame first.
    """
    if pair_mode != "concat":
        raise ValueError(f"unknown pair_mode {pair_mode!r}")
    single = isinstance(systems, TemplateSystem)
    systems = [systems] if single else list(systems)
    rows = []
    for k, sample in enumerate(diagrams):
        if isinstance(sample, PersistenceDiagram):
            sample = (sample,)
        if len(sample) != len(systems):
            raise ValueError(f"sample {k} has {len(sample)} diagrams but {len(systems)} template systems were given")
        rows.append(np.concatenate([featurize(T, to_frame(D, T.frame)) for T, D in zip(systems, sample)]))
    if not rows:
        return np.zeros((0, sum(len(T) for T in systems)))
    return np.vstack(rows)


# -- construction helpers ---------------------------------------------------

def tent_grid(x_range, y_range, nx: int, ny: int, delta: float | None = None, frame=Frame.BIRTH_LIFETIME) -> TemplateSystem:
    """Regular mesh of tents on an ``nx`` by ``ny`` grid.

    Center lifetimes are ``y0 + spacing * k`` for ``k = 1..ny``, so the lowest
    row stays off the axis; ``delta`` defaults to half the lifetime spacing.
    """
    xs = np.linspace(x_range[0], x_range[1], nx)
    spacing = (y_range[1] - y_range[0]) / max(ny, 1)
    delta = spacing / 2 if delta is None else delta
    ys = y_range[0] + spacing * np.arange(1, ny + 1)
    return TemplateSystem([TentTemplate((x, y), delta) for x in xs for y in ys], frame)


def polymesh_grid(x_knots, y_knots, frame=Frame.BIRTH_LIFETIME) -> TemplateSystem:
    return TemplateSystem(
        [PolynomialMeshTemplate(tuple(x_knots), tuple(y_knots), (i, j)) for i in range(len(x_knots)) for j in range(len(y_knots))],
        frame,
    )


# -- manifest I/O -------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x)) if not isinstance(x, (int, np.integer)) else str(int(x))


def format_templates(system: TemplateSystem) -> str:
    lines = [f"# frame={system.frame.value}"]
    for t in system.templates:
        lines.append(",".join([t.kind, *(_fmt(p) for p in t.params())]))
    return "\n".join(lines) + "\n"


def parse_templates(text: str, path=None) -> TemplateSystem:
    frame = Frame.BIRTH_LIFETIME
    templates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("frame="):
                frame = Frame(body.split("=", 1)[1].strip())
            continue
        kind, *fields = line.split(",")
        try:
            if kind == "tent":
                a, b, d = map(float, fields)
                templates.append(TentTemplate((a, b), d))
            elif kind == "ellipse":
                cx, cy, a11, a12, a22 = map(float, fields)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", SupportWarning)
                    templates.append(EllipseTemplate((cx, cy), np.array([[a11, a12], [a12, a22]])))
            elif kind == "polymesh":
                i, j = int(fields[0]), int(fields[1])
                box = tuple(map(float, fields[2:6]))
                nx, ny = int(fields[6]), int(fields[7])
                knots = list(map(float, fields[8:]))
                if len(knots) != nx + ny:
                    raise ValueError(f"expected {nx + ny} knots, got {len(knots)}")
                templates.append(PolynomialMeshTemplate(tuple(knots[:nx]), tuple(knots[nx:]), (i, j), box))
            else:
                raise ValueError(f"unknown template kind {kind!r}")
        except (ValueError, IndexError) as exc:
            where = f"{path}:" if path else ""
            raise ValueError(f"{where}line {lineno}: {exc}") from None
    return TemplateSystem(templates, frame)


def write_templates(system: TemplateSystem, path) -> None:
    Path(path).write_text(format_templates(system))


def read_templates(path) -> TemplateSystem:
    return parse_templates(Path(path).read_text(), path=path)
