"""Analytic test functions, noisy evaluators, and design-distribution metrics."""

from dataclasses import dataclass

import numpy as np

from .design import Design, DesignSpace
from .errors import ConfigError
from .noise import add_noise

PEAKS_SPACE = DesignSpace(lower=(-3.0, -3.0), upper=(3.0, 3.0))


def peaks(x, y):
    """Two-dimensional test surface with three peaks and three valleys.

    f(x, y) = 3 (1-x)^2 exp(-x^2 - (y+1)^2)
              - 10 (x/5 - x^3 - y^5) exp(-x^2 - y^2)
              - (1/3) exp(-(x+1)^2 - y^2)

    Conventionally studied on [-3, 3]^2, where it is strongly nonlinear
    inside roughly [-2, 2]^2 and almost flat near the boundary.
    Broadcasts over array inputs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    term1 = 3.0 * (1.0 - x) ** 2 * np.exp(-(x**2) - (y + 1.0) ** 2)
    term2 = -10.0 * (x / 5.0 - x**3 - y**5) * np.exp(-(x**2) - y**2)
    term3 = -np.exp(-((x + 1.0) ** 2) - y**2) / 3.0
    out = term1 + term2 + term3
    return float(out) if out.ndim == 0 else out


class Evaluator:
    """Callable wrapping a deterministic function with seeded output noise.

    Holds its own generator: the call order defines the noise stream, so
    one evaluator instance must not be shared across concurrent callers.
    ``calls`` counts every evaluation for budget accounting.
    """

    def __init__(self, fn, space, noise_lambda, seed, name="custom"):
        self._fn = fn
        self.space = space
        self.noise_lambda = float(noise_lambda)
        self.name = name
        self._rng = np.random.default_rng(seed)
        self.calls = 0

    def __call__(self, coords) -> float:
        self.calls += 1
        value = float(self._fn(np.asarray(coords, dtype=float)))
        return add_noise(value, self.noise_lambda, self._rng)

    def true_value(self, coords) -> float:
        """Noise-free value; does not touch the stream or the counter."""
        return float(self._fn(np.asarray(coords, dtype=float)))


def make_evaluator(name, noise_lambda, seed, dim=None, coefficients=None, matrix=None):
    """Build a named evaluator with N(0, lambda) output noise.

    Supported names:

    - ``peaks``: the surface above on [-3, 3]^2 (dim must be 2).
    - ``linear``: affine ``c[0] + c[1:] . p`` on [0, 1]^dim; ``coefficients``
      has length dim+1 and defaults to all ones.
    - ``quadratic``: ``p . Q p`` on [0, 1]^dim; ``matrix`` defaults to the
      identity.
    """
    if name == "peaks":
        if dim not in (None, 2):
            raise ConfigError("peaks is two-dimensional")
        return Evaluator(
            lambda p: peaks(p[0], p[1]), PEAKS_SPACE, noise_lambda, seed, name
        )
    if dim is None:
        raise ConfigError(f"{name!r} needs an explicit dim")
    d = int(dim)
    space = DesignSpace(lower=(0.0,) * d, upper=(1.0,) * d)
    if name == "linear":
        c = np.ones(d + 1) if coefficients is None else np.asarray(coefficients, float)
        if c.shape != (d + 1,):
            raise ConfigError(f"linear needs {d + 1} coefficients (intercept first)")
        return Evaluator(lambda p: c[0] + c[1:] @ p, space, noise_lambda, seed, name)
    if name == "quadratic":
        q = np.eye(d) if matrix is None else np.asarray(matrix, float)
        if q.shape != (d, d):
            raise ConfigError(f"quadratic needs a {d}x{d} matrix")
        return Evaluator(lambda p: p @ q @ p, space, noise_lambda, seed, name)
    raise ConfigError(f"unknown evaluator {name!r}")


@dataclass(frozen=True)
class Region:
    """Axis-aligned sub-box used to quantify where samples landed."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        if len(self.lower) != len(self.upper):
            raise ConfigError("region bounds must have equal length")
        if any(lo > up for lo, up in zip(self.lower, self.upper)):
            raise ConfigError("region needs lower <= upper")

    def contains(self, coords) -> bool:
        c = np.asarray(coords, dtype=float)
        return bool(
            np.all(c >= np.asarray(self.lower)) and np.all(c <= np.asarray(self.upper))
        )


def region_fraction(design: Design, region: Region) -> float:
    """Fraction of adaptive-phase points (iteration >= 1) inside the region.

    Initial-design points are excluded because their placement carries no
    information about the sampling behavior. Returns 0.0 for a design
    without adaptive points.
    """
    adaptive = [p for p in design.points if p.iteration >= 1]
    if not adaptive:
        return 0.0
    inside = sum(1 for p in adaptive if region.contains(p.coords))
    return inside / len(adaptive)


def nn_distance_stats(design: Design):
    """Mean and coefficient of variation of nearest-neighbor distances.

    Distances are normalized; the CV uses the population standard
    deviation. A low CV means evenly spread points; clustering drives it
    up.
    """
    n = len(design)
    if n < 2:
        raise ConfigError("nearest-neighbor stats need at least 2 points")
    diff = design.u[:, None, :] - design.u[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    np.fill_diagonal(dist, np.inf)
    nn = dist.min(axis=1)
    mean = float(nn.mean())
    cv = float(nn.std() / mean)
    return mean, cv
