"""Hybrid sequential sampler: exploration + exploitation, one point at a time.

Every iteration scores each evaluated point twice: a Voronoi-volume
exploration score ``v`` (sums to one) and a nonlinearity exploitation
score ``e``. The hybrid score is ``h = v + e / sum(e)``, so both
components are comparable and weighted equally; when the responses look
exactly linear (``sum(e)`` below 1e-12) the sampler degrades to pure
exploration instead of dividing by zero. The top-ranked point's Voronoi
cell is then searched for the pool candidate farthest from the existing
design (maximin), and that candidate is evaluated.

Seeding
-------
All randomness derives from one master seed through
``derive_seed(master, stream, index)``; stream 0 feeds the per-step
Monte-Carlo pool, stream 1 the evaluator's noise generator, stream 2 the
initial design. Identical configuration therefore reproduces identical
runs bit for bit, and concurrent scoring cannot perturb any stream.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .design import (
    DUPLICATE_TOL,
    Design,
    DesignSpace,
    EvaluatedPoint,
    initial_design,
)
from .errors import BudgetExhaustedError, ConfigError, EvaluationError
from .exploitation import exploitation_scores
from .exploration import MonteCarloPool, assign_owners, build_pool, estimate_volumes

POOL_STREAM = 0
NOISE_STREAM = 1
INITIAL_STREAM = 2

# Below this total exploitation mass the responses are treated as linear.
EXPLOIT_EPS = 1e-12


def derive_seed(master_seed, stream, index=0) -> int:
    """Deterministic child seed for (stream, index) under a master seed."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(stream), int(index)))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SamplerConfig:
    """Immutable run configuration.

    Parameters
    ----------
    space : DesignSpace
    budget : int
        Total number of evaluations, initial design included.
    master_seed : int
        Root of every random stream in the run.
    noise_lambda : float
        Variance of the synthetic output noise (metadata here; the
        evaluator owns the actual noise stream).
    t_max : int, optional
        Neighborhood size cap for exploitation; defaults to ``2 * dim``.
    mc_points : int, optional
        Monte-Carlo pool size; defaults to ``max(1000, 100 * n)`` each
        step, so the estimate tightens as cells shrink.
    initial_scheme : {"auto", "corners_center", "latin_hypercube"}
        "auto" picks corners_center up to d=4 and a Latin hypercube of
        ``5 * dim`` points above.
    initial_size : int, optional
        Latin-hypercube size override.
    exploration_only : bool
        Skip exploitation entirely (pure Voronoi sampling).
    """

    space: DesignSpace
    budget: int
    master_seed: int
    noise_lambda: float = 0.0
    t_max: int = None
    mc_points: int = None
    initial_scheme: str = "auto"
    initial_size: int = None
    exploration_only: bool = False

    def __post_init__(self):
        if int(self.budget) < 1:
            raise ConfigError("budget must be >= 1")
        if float(self.noise_lambda) < 0:
            raise ConfigError("noise_lambda must be >= 0")
        if self.t_max is not None and int(self.t_max) < 1:
            raise ConfigError("t_max must be >= 1")
        if self.mc_points is not None and int(self.mc_points) < 1:
            raise ConfigError("mc_points must be >= 1")
        if self.initial_scheme not in ("auto", "corners_center", "latin_hypercube"):
            raise ConfigError(f"unknown initial scheme {self.initial_scheme!r}")

    @property
    def resolved_t_max(self) -> int:
        return int(self.t_max) if self.t_max is not None else 2 * self.space.dim

    def resolved_scheme(self):
        """Concrete (scheme, size) pair after applying the defaults."""
        d = self.space.dim
        scheme = self.initial_scheme
        if scheme == "auto":
            scheme = "corners_center" if d <= 4 else "latin_hypercube"
        if scheme == "corners_center":
            return scheme, None
        return scheme, int(self.initial_size) if self.initial_size else 5 * d

    def pool_size(self, n_design: int) -> int:
        if self.mc_points is not None:
            return int(self.mc_points)
        return max(1000, 100 * n_design)


@dataclass(frozen=True, eq=False)
class ScoreTable:
    """Per-point scores for one adaptive iteration."""

    iteration: int
    v: np.ndarray
    e: np.ndarray
    h: np.ndarray


@dataclass(frozen=True)
class RunState:
    """Snapshot of a run: configuration, evaluated design, pending proposal.

    Serializing a state and resuming later reproduces exactly the
    proposals an uninterrupted run would have made, because every
    proposal is a pure function of (config, design).
    """

    config: SamplerConfig
    design: Design
    pending: tuple = None

    @classmethod
    def fresh(cls, config: SamplerConfig) -> "RunState":
        state = cls(config=config, design=Design(config.space))
        if config.budget < len(state.initial_points):
            raise ConfigError(
                f"budget {config.budget} smaller than the initial design "
                f"({len(state.initial_points)} points)"
            )
        return state

    @cached_property
    def initial_points(self):
        scheme, size = self.config.resolved_scheme()
        return initial_design(
            self.config.space,
            scheme,
            seed=derive_seed(self.config.master_seed, INITIAL_STREAM),
            size=size,
        )

    @property
    def iteration(self) -> int:
        """Number of adaptive evaluations performed so far."""
        return max(0, len(self.design) - len(self.initial_points))

    @property
    def next_iteration(self) -> int:
        """Iteration tag for the next appended point (0 during the initial
        phase, then the 1-based adaptive step index)."""
        n = len(self.design)
        k0 = len(self.initial_points)
        return 0 if n < k0 else n - k0 + 1


def aggregate_scores(v, e):
    """Hybrid score ``h = v + e / sum(e)`` (pure exploration if the
    exploitation mass is negligible)."""
    v = np.asarray(v, dtype=float)
    e = np.asarray(e, dtype=float)
    if v.shape != e.shape:
        raise ConfigError("score vectors must have equal length")
    if np.any(e < 0):
        raise ConfigError("exploitation scores must be non-negative")
    if abs(v.sum() - 1.0) > 1e-9:
        raise ConfigError("exploration scores must sum to 1")
    total = e.sum()
    if total < EXPLOIT_EPS:
        return v.copy()
    return v + e / total


def rank(h, v):
    """Indices ordered by h descending, then v descending, then index."""
    h = np.asarray(h, dtype=float)
    v = np.asarray(v, dtype=float)
    if h.shape != v.shape:
        raise ConfigError("score vectors must have equal length")
    return np.lexsort((-v, -h))


def propose_next(design: Design, pool: MonteCarloPool, table: ScoreTable):
    """Maximin candidate from the best-ranked point's Voronoi cell.

    Scans cells in rank order; inside a cell the pool point farthest from
    the whole design wins (its distance to the design is its distance to
    the cell owner). Cells whose candidates would duplicate a design
    point are skipped; if every cell is exhausted the global maximin pool
    point is returned. Returns normalized coordinates.
    """
    if pool.owner is None:
        raise ConfigError("pool ownership must be assigned before proposing")
    if len(pool) == 0:
        raise ConfigError("candidate pool is empty")
    for r in rank(table.h, table.v):
        members = np.flatnonzero(pool.owner == r)
        if members.size == 0:
            continue
        dist = pool.owner_dist[members]
        usable = dist > DUPLICATE_TOL
        if not np.any(usable):
            continue
        pick = members[usable][np.argmax(dist[usable])]
        return pool.points[pick].copy()
    usable = pool.owner_dist > DUPLICATE_TOL
    if np.any(usable):
        pick = np.flatnonzero(usable)[np.argmax(pool.owner_dist[usable])]
        return pool.points[pick].copy()
    raise ConfigError("no usable candidate in the pool (all would duplicate)")


def propose(state: RunState):
    """Next evaluation point (raw coordinates) plus its score table.

    During the initial phase the precomputed design is served point by
    point and the table is None; afterwards the full scoring pipeline
    runs. Pure function of the state.
    """
    config = state.config
    n = len(state.design)
    if n >= config.budget:
        raise BudgetExhaustedError(f"budget of {config.budget} evaluations reached")
    plan = state.initial_points
    if n < len(plan):
        return plan[n].copy(), None

    step_index = state.next_iteration
    pool = build_pool(
        config.space,
        config.pool_size(n),
        derive_seed(config.master_seed, POOL_STREAM, step_index),
    )
    pool = assign_owners(pool, state.design)
    v = estimate_volumes(pool, n)
    if config.exploration_only:
        e = np.zeros(n)
    else:
        e = exploitation_scores(state.design, config.resolved_t_max)
    h = aggregate_scores(v, e)
    table = ScoreTable(iteration=step_index, v=v, e=e, h=h)
    candidate = propose_next(state.design, pool, table)
    return config.space.denormalize(candidate), table


def append_observation(state: RunState, coords, response) -> RunState:
    """Record an evaluation and clear any pending proposal."""
    point = EvaluatedPoint(
        coords=tuple(np.asarray(coords, dtype=float)),
        response=response,
        iteration=state.next_iteration,
    )
    return replace(state, design=state.design.append(point), pending=None)


def step(state: RunState, evaluator):
    """Propose, evaluate, append. Returns (new state, score table or None).

    If the evaluator raises, the state is left untouched and the proposed
    point travels with the error for retry.
    """
    coords, table = propose(state)
    try:
        response = float(evaluator(coords))
    except Exception as exc:
        raise EvaluationError(coords, str(exc)) from exc
    if not np.isfinite(response):
        raise EvaluationError(coords, f"non-finite response {response!r}")
    return append_observation(state, coords, response), table


@dataclass(frozen=True, eq=False)
class RunResult:
    """Final design plus the per-iteration score history."""

    design: Design
    tables: tuple
    state: RunState


def run(config: SamplerConfig, evaluator) -> RunResult:
    """Evaluate the initial design, then step until the budget is spent.

    The evaluator is called exactly ``budget`` times.
    """
    state = RunState.fresh(config)
    tables = []
    while len(state.design) < config.budget:
        state, table = step(state, evaluator)
        if table is not None:
            tables.append(table)
    return RunResult(design=state.design, tables=tuple(tables), state=state)
