"""Monte-Carlo estimation of relative Voronoi cell volumes.

Each design point owns the pool points closer to it than to any other
design point; the share of pool points it owns estimates the relative
volume of its Voronoi cell. Only the ranking of cell sizes matters
downstream, so a Monte-Carlo estimate replaces a full tessellation.
"""

from dataclasses import dataclass, replace

import numpy as np

from .design import Design, DesignSpace
from .errors import ConfigError

# Pool rows are processed in fixed-size blocks to bound the size of the
# intermediate distance matrix; results are independent of the block size.
_BLOCK = 4096


@dataclass(frozen=True)
class MonteCarloPool:
    """Uniform test points in the unit cube, optionally with ownership.

    ``owner[j]`` is the index of the design point nearest to ``points[j]``
    (lowest index on ties) and ``owner_dist[j]`` the corresponding
    normalized distance.
    """

    points: np.ndarray
    seed: int
    owner: np.ndarray = None
    owner_dist: np.ndarray = None

    def __len__(self):
        return self.points.shape[0]


def build_pool(space: DesignSpace, m: int, seed: int) -> MonteCarloPool:
    """Draw ``m`` i.i.d. uniform points in the unit cube, deterministically.

    The same ``(m, seed)`` pair always yields the identical pool.
    """
    m = int(m)
    if m < 1:
        raise ConfigError("pool size must be >= 1")
    rng = np.random.default_rng(seed)
    return MonteCarloPool(points=rng.random((m, space.dim)), seed=int(seed))


def nearest_design_point(unit_points, design: Design):
    """Index of and distance to the nearest design point for each row.

    Ties break to the lowest design index. Brute force over blocks; the
    result does not depend on execution order.
    """
    if len(design) == 0:
        raise ConfigError("ownership needs a non-empty design")
    pts = np.atleast_2d(np.asarray(unit_points, dtype=float))
    owner = np.empty(len(pts), dtype=np.intp)
    dist = np.empty(len(pts))
    for start in range(0, len(pts), _BLOCK):
        block = pts[start : start + _BLOCK]
        d = np.linalg.norm(block[:, None, :] - design.u[None, :, :], axis=2)
        idx = np.argmin(d, axis=1)
        owner[start : start + len(block)] = idx
        dist[start : start + len(block)] = d[np.arange(len(block)), idx]
    return owner, dist


def assign_owners(pool: MonteCarloPool, design: Design) -> MonteCarloPool:
    """Return a copy of ``pool`` with every point assigned to its nearest
    design point."""
    owner, dist = nearest_design_point(pool.points, design)
    return replace(pool, owner=owner, owner_dist=dist)


def estimate_volumes(pool: MonteCarloPool, n_design: int):
    """Relative Voronoi cell volumes from pool ownership counts.

    Returns
    -------
    ndarray of shape (n_design,)
        ``v[i] = (# pool points owned by i) / len(pool)``; the counts sum
        to the pool size, so the scores sum to one.
    """
    if pool.owner is None:
        raise ConfigError("assign_owners must run before estimate_volumes")
    n_design = int(n_design)
    if n_design < 1:
        raise ConfigError("n_design must be >= 1")
    counts = np.bincount(pool.owner, minlength=n_design)
    if len(counts) > n_design:
        raise ConfigError("pool ownership references more points than n_design")
    return counts / len(pool)
