"""Local-gradient exploitation scores.

For each evaluated reference point a small neighborhood is selected, a
gradient is estimated from it by least squares, and the nonlinearity score
sums how far the neighbors' responses deviate from that local linear
prediction. Scores are recomputed from scratch every iteration; at desk
scale the O(n^2) cost is irrelevant and incremental bookkeeping is not
worth its complexity.

Neighborhood rule
-----------------
The first neighbor is the nearest point to the reference; each further
neighbor maximizes

    (min distance to the already-selected neighbors) / (distance to the reference)

with ties broken toward the lowest index. The numerator rewards spread
around the reference, the denominator keeps the neighborhood local. This
greedy rule is a documented stand-in: it is deterministic, O(n * T) per
reference point, and favors close-but-spread neighborhoods.
"""

from dataclasses import dataclass

import numpy as np

from .design import Design
from .errors import ConfigError

# Relative singular-value cutoff for the least-squares gradient solve.
SV_CUTOFF = 1e-10


@dataclass(frozen=True)
class Neighborhood:
    """Reference design index plus its selected neighbor indices."""

    ref_index: int
    neighbor_indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "ref_index", int(self.ref_index))
        object.__setattr__(
            self, "neighbor_indices", tuple(int(i) for i in self.neighbor_indices)
        )
        if self.ref_index in self.neighbor_indices:
            raise ConfigError("reference point cannot be its own neighbor")
        if len(set(self.neighbor_indices)) != len(self.neighbor_indices):
            raise ConfigError("neighbor indices must be distinct")
        if len(self.neighbor_indices) < 1:
            raise ConfigError("neighborhood must contain at least one point")

    @property
    def t(self) -> int:
        return len(self.neighbor_indices)


@dataclass(frozen=True)
class GradientEstimate:
    """Least-squares gradient (response units per normalized input unit)."""

    g: np.ndarray
    residual_norm: float


def select_neighborhood(design: Design, r: int, t_max: int) -> Neighborhood:
    """Greedily select ``min(t_max, n-1)`` neighbors of design point ``r``."""
    n = len(design)
    if n < 2:
        raise ConfigError("neighborhood selection needs at least 2 design points")
    if t_max < 1:
        raise ConfigError("t_max must be >= 1")
    r = int(r)
    u = design.u
    d_ref = np.linalg.norm(u - u[r], axis=1)
    d_ref[r] = np.inf

    selected = [int(np.argmin(d_ref))]
    # Running min distance from every candidate to the selected set.
    d_sel = np.linalg.norm(u - u[selected[0]], axis=1)
    target = min(int(t_max), n - 1)
    while len(selected) < target:
        ratio = d_sel / d_ref
        ratio[selected] = -np.inf
        ratio[r] = -np.inf
        pick = int(np.argmax(ratio))
        selected.append(pick)
        d_sel = np.minimum(d_sel, np.linalg.norm(u - u[pick], axis=1))
    return Neighborhood(ref_index=r, neighbor_indices=tuple(selected))


def estimate_gradient(design: Design, nb: Neighborhood) -> GradientEstimate:
    """Gradient at the reference point from its neighborhood.

    Solves ``A g = b`` in the least-squares sense, where row i of ``A`` is
    the normalized offset of neighbor i from the reference and ``b_i`` the
    response difference. Rank-deficient or underdetermined systems yield
    the minimum-norm solution (singular values below ``SV_CUTOFF`` times
    the largest are treated as zero).
    """
    idx = list(nb.neighbor_indices)
    y = design.y
    if not np.all(np.isfinite(y[idx + [nb.ref_index]])):
        raise ConfigError("responses must be finite to estimate a gradient")
    a = design.u[idx] - design.u[nb.ref_index]
    b = y[idx] - y[nb.ref_index]
    g, _, _, _ = np.linalg.lstsq(a, b, rcond=SV_CUTOFF)
    residual = float(np.linalg.norm(a @ g - b))
    return GradientEstimate(g=g, residual_norm=residual)


def nonlinearity_score(design: Design, nb: Neighborhood, grad: GradientEstimate) -> float:
    """Sum of absolute deviations from the local linear prediction.

    Zero exactly when the responses in the neighborhood are affine in the
    inputs (up to floating-point residue).
    """
    idx = list(nb.neighbor_indices)
    offsets = design.u[idx] - design.u[nb.ref_index]
    predicted = design.y[nb.ref_index] + offsets @ grad.g
    return float(np.sum(np.abs(design.y[idx] - predicted)))


def noise_bound_rhs(deterministic_score: float, zeta) -> float:
    """Upper bound for the score computed from noisy responses.

    ``zeta`` holds the per-neighbor absolute noise differences
    ``|eps_i - eps_r|``; the bound is the deterministic score plus their
    sum and holds for any fixed gradient by the triangle inequality.
    """
    z = np.asarray(zeta, dtype=float)
    if z.size and np.any(z < 0):
        raise ConfigError("noise terms must be non-negative")
    return float(deterministic_score) + float(np.sum(z))


def exploitation_scores(design: Design, t_max: int):
    """Nonlinearity score for every design point, shape (n,).

    Per-point work only reads the immutable design snapshot, so the loop
    could run in any order (or in parallel) without changing the result.
    """
    n = len(design)
    scores = np.empty(n)
    for r in range(n):
        nb = select_neighborhood(design, r, t_max)
        grad = estimate_gradient(design, nb)
        scores[r] = nonlinearity_score(design, nb, grad)
    return scores
