"""Design-space geometry and the evaluated-design container.

All internal geometry (distances, Voronoi ownership, maximin) operates on
coordinates normalized to the unit cube ``[0, 1]^d``; raw coordinates only
appear at the evaluator boundary and in user-facing files.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from .errors import ConfigError, DuplicatePointError, OutOfBoundsError

# Minimum normalized distance between two design points. Below any meaningful
# sampling resolution, above floating-point noise.
DUPLICATE_TOL = 1e-12

# corners_center needs 2^d + 1 points; cap where that stops being affordable.
MAX_CORNER_DIM = 10


@dataclass(frozen=True)
class DesignSpace:
    """Axis-aligned box domain of the black-box inputs.

    Parameters
    ----------
    lower, upper : sequence of float
        Per-axis bounds, ``lower[k] < upper[k]`` for every axis.
    """

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if len(lower) != len(upper):
            raise ConfigError("lower and upper must have the same length")
        if len(lower) < 1:
            raise ConfigError("design space needs at least one axis")
        if not all(np.isfinite(lower)) or not all(np.isfinite(upper)):
            raise ConfigError("bounds must be finite")
        if any(lo >= up for lo, up in zip(lower, upper)):
            raise ConfigError("every axis needs lower < upper")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @cached_property
    def _lo(self):
        return np.asarray(self.lower, dtype=float)

    @cached_property
    def _span(self):
        return np.asarray(self.upper, dtype=float) - self._lo

    def normalize(self, coords):
        """Map raw coordinates into the unit cube."""
        return (np.asarray(coords, dtype=float) - self._lo) / self._span

    def denormalize(self, unit_coords):
        """Map unit-cube coordinates back to raw domain coordinates."""
        return self._lo + np.asarray(unit_coords, dtype=float) * self._span

    def contains(self, coords) -> bool:
        """Inclusive bounds check."""
        c = np.asarray(coords, dtype=float)
        if c.shape != (self.dim,):
            return False
        return bool(np.all(c >= self._lo) and np.all(c <= self._lo + self._span))

    @property
    def midpoint(self):
        return self._lo + 0.5 * self._span


@dataclass(frozen=True)
class EvaluatedPoint:
    """One evaluated input with its observed response.

    ``iteration`` is 0 for initial-design points and the 1-based adaptive
    step index afterwards.
    """

    coords: tuple
    response: float
    iteration: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "coords", tuple(float(c) for c in np.atleast_1d(self.coords))
        )
        object.__setattr__(self, "response", float(self.response))
        object.__setattr__(self, "iteration", int(self.iteration))
        if self.iteration < 0:
            raise ConfigError("iteration must be non-negative")


@dataclass(frozen=True)
class Design:
    """Immutable snapshot of all evaluated points.

    Mutation goes through :meth:`append`, which validates the candidate and
    returns a new snapshot; any number of readers may share an instance.
    """

    space: DesignSpace
    points: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        for p in self.points:
            if len(p.coords) != self.space.dim:
                raise ConfigError(
                    f"point dimension {len(p.coords)} != space dimension {self.space.dim}"
                )

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def x(self):
        """Raw coordinates, shape (n, d)."""
        if not self.points:
            return np.empty((0, self.space.dim))
        return np.asarray([p.coords for p in self.points], dtype=float)

    @cached_property
    def u(self):
        """Normalized coordinates, shape (n, d)."""
        if not self.points:
            return np.empty((0, self.space.dim))
        return self.space.normalize(self.x)

    @cached_property
    def y(self):
        """Responses, shape (n,)."""
        return np.asarray([p.response for p in self.points], dtype=float)

    @cached_property
    def iterations(self):
        return np.asarray([p.iteration for p in self.points], dtype=int)

    def append(self, point: EvaluatedPoint) -> "Design":
        """Validate and append, returning a new snapshot.

        Raises
        ------
        OutOfBoundsError
            If the coordinates fall outside the design space.
        DuplicatePointError
            If the candidate is within ``DUPLICATE_TOL`` (normalized) of an
            existing point; the error reports the offender and the distance.
        """
        if not self.space.contains(point.coords):
            raise OutOfBoundsError(
                f"point {point.coords} outside bounds "
                f"{self.space.lower} .. {self.space.upper}"
            )
        if self.points:
            dist = np.linalg.norm(self.u - self.space.normalize(point.coords), axis=1)
            nearest = int(np.argmin(dist))
            if dist[nearest] <= DUPLICATE_TOL:
                raise DuplicatePointError(nearest, dist[nearest])
        return Design(self.space, self.points + (point,))


def validate_and_append(design: Design, point: EvaluatedPoint) -> Design:
    """Functional spelling of :meth:`Design.append`."""
    return design.append(point)


def min_distance(candidate, design: Design) -> float:
    """Normalized Euclidean distance from ``candidate`` (raw coords) to the
    nearest design point.
    """
    if len(design) == 0:
        raise ConfigError("min_distance needs a non-empty design")
    c = design.space.normalize(candidate)
    return float(np.min(np.linalg.norm(design.u - c, axis=1)))


def initial_design(space: DesignSpace, scheme: str, seed: int, size=None):
    """Build the raw coordinates of an initial design.

    Parameters
    ----------
    scheme : {"corners_center", "latin_hypercube"}
        ``corners_center`` returns the 2^d corners plus the domain midpoint
        (d <= 10). ``latin_hypercube`` returns a seeded LHS with exactly one
        point per axis stratum; ``size`` is required and must be >= d + 1.
    seed : int
        Drives the LHS generator; corner designs are seed-independent.

    Returns
    -------
    ndarray of shape (k, d)
    """
    d = space.dim
    if scheme == "corners_center":
        if d > MAX_CORNER_DIM:
            raise ConfigError(
                f"corners_center needs 2^{d}+1 points; infeasible above d={MAX_CORNER_DIM}"
            )
        corners = np.asarray(
            list(product(*zip(space.lower, space.upper))), dtype=float
        )
        return np.vstack([corners, space.midpoint])
    if scheme == "latin_hypercube":
        if size is None:
            raise ConfigError("latin_hypercube needs an explicit size")
        size = int(size)
        if size < d + 1:
            raise ConfigError(f"latin_hypercube size must be >= d+1 ({d + 1})")
        rng = np.random.default_rng(seed)
        unit = np.empty((size, d))
        for j in range(d):
            unit[:, j] = (rng.permutation(size) + rng.random(size)) / size
        return space.denormalize(unit)
    raise ConfigError(f"unknown initial-design scheme {scheme!r}")
