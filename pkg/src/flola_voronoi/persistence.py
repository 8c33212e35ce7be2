"""Run-directory artifacts: CSV tables, JSON state, and locking.

File formats (stable; evolve additively only)
---------------------------------------------
``samples.csv``
    Header ``x1,...,xd,y,iteration``; one row per evaluation, ordered by
    iteration then insertion. Raw (un-normalized) coordinates.
``proposed.csv`` / ``observed.csv``
    Headers ``x1,...,xd`` and ``x1,...,xd,y``; exactly one data row.
``scores_<k>.csv``
    Header ``index,v,e,h``; one row per design point at adaptive step k.
``state.json``
    Self-describing snapshot: ``format``, ``version``, ``config`` (bounds,
    budget, master seed, all sampler knobs), ``iteration``, ``pending``,
    ``points``. Reloading it reproduces future proposals exactly.
``run.json``
    The flags that launched a run plus tool versions; together with the
    package version it fully determines ``samples.csv``.

All numbers use the ``.`` decimal separator and 17 significant digits
(lossless float64 round-trip); line endings are ``\\n``.
"""

import json
import os
import platform
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .design import Design, DesignSpace, EvaluatedPoint
from .errors import ConfigError, LockHeldError, RunError
from .sampler import RunState, SamplerConfig

STATE_FORMAT = "flola-voronoi/state"
STATE_VERSION = 1
LOCK_NAME = ".lock"


def fmt_float(x) -> str:
    """Locale-independent float with 17 significant digits."""
    return format(float(x), ".17g")


def _write_text(path, text):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def coordinate_header(dim: int):
    return [f"x{k + 1}" for k in range(dim)]


def write_samples_csv(path, design: Design):
    lines = [",".join(coordinate_header(design.space.dim) + ["y", "iteration"])]
    for p in design.points:
        cells = [fmt_float(c) for c in p.coords] + [fmt_float(p.response), str(p.iteration)]
        lines.append(",".join(cells))
    _write_text(path, "\n".join(lines) + "\n")


def write_proposed_csv(path, coords):
    coords = np.atleast_1d(np.asarray(coords, dtype=float))
    lines = [
        ",".join(coordinate_header(len(coords))),
        ",".join(fmt_float(c) for c in coords),
    ]
    _write_text(path, "\n".join(lines) + "\n")


def write_scores_csv(path, table):
    lines = ["index,v,e,h"]
    for i, (v, e, h) in enumerate(zip(table.v, table.e, table.h)):
        lines.append(f"{i},{fmt_float(v)},{fmt_float(e)},{fmt_float(h)}")
    _write_text(path, "\n".join(lines) + "\n")


def read_observed_csv(path, dim: int):
    """Parse ``observed.csv`` rows into (coords, response) pairs."""
    path = Path(path)
    if not path.exists():
        raise RunError(f"observed file {path} does not exist")
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise RunError(f"observed file {path} is empty")
    expected = coordinate_header(dim) + ["y"]
    header = [c.strip() for c in lines[0].split(",")]
    if header != expected:
        raise RunError(
            f"observed header {header} does not match expected {expected}"
        )
    rows = []
    for ln in lines[1:]:
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) != dim + 1:
            raise RunError(f"observed row {ln!r} does not have {dim + 1} cells")
        values = [float(c) for c in cells]
        rows.append((tuple(values[:dim]), values[dim]))
    return rows


def config_to_dict(config: SamplerConfig) -> dict:
    return {
        "lower": list(config.space.lower),
        "upper": list(config.space.upper),
        "budget": config.budget,
        "master_seed": config.master_seed,
        "noise_lambda": config.noise_lambda,
        "t_max": config.t_max,
        "mc_points": config.mc_points,
        "initial_scheme": config.initial_scheme,
        "initial_size": config.initial_size,
        "exploration_only": config.exploration_only,
    }


def config_from_dict(payload: dict) -> SamplerConfig:
    return SamplerConfig(
        space=DesignSpace(lower=tuple(payload["lower"]), upper=tuple(payload["upper"])),
        budget=int(payload["budget"]),
        master_seed=int(payload["master_seed"]),
        noise_lambda=float(payload.get("noise_lambda", 0.0)),
        t_max=payload.get("t_max"),
        mc_points=payload.get("mc_points"),
        initial_scheme=payload.get("initial_scheme", "auto"),
        initial_size=payload.get("initial_size"),
        exploration_only=bool(payload.get("exploration_only", False)),
    )


def state_to_dict(state: RunState) -> dict:
    return {
        "format": STATE_FORMAT,
        "version": STATE_VERSION,
        "config": config_to_dict(state.config),
        "iteration": state.iteration,
        "pending": list(state.pending) if state.pending is not None else None,
        "points": [
            {"coords": list(p.coords), "response": p.response, "iteration": p.iteration}
            for p in state.design.points
        ],
    }


def state_from_dict(payload: dict) -> RunState:
    if payload.get("format") != STATE_FORMAT:
        raise RunError(f"not a state document: format={payload.get('format')!r}")
    if int(payload.get("version", -1)) > STATE_VERSION:
        raise RunError(f"state version {payload['version']} is newer than supported")
    config = config_from_dict(payload["config"])
    design = Design(config.space)
    for entry in payload["points"]:
        design = design.append(
            EvaluatedPoint(
                coords=tuple(entry["coords"]),
                response=entry["response"],
                iteration=entry["iteration"],
            )
        )
    pending = payload.get("pending")
    state = RunState(
        config=config,
        design=design,
        pending=tuple(pending) if pending is not None else None,
    )
    if state.iteration != int(payload.get("iteration", state.iteration)):
        raise RunError("state document is inconsistent: iteration does not match design")
    return state


def save_state(path, state: RunState):
    _write_text(path, json.dumps(state_to_dict(state), indent=2) + "\n")


def load_state(path) -> RunState:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"no state file at {path}; run 'init' (or 'run') first")
    return state_from_dict(json.loads(path.read_text()))


def write_run_json(path, payload: dict):
    doc = dict(payload)
    doc.setdefault("versions", {})
    doc["versions"].update(
        {
            "flola_voronoi": _package_version(),
            "numpy": np.__version__,
            "python": platform.python_version(),
        }
    )
    _write_text(path, json.dumps(doc, indent=2) + "\n")


def _package_version():
    from . import __version__

    return __version__


@contextmanager
def run_lock(run_dir):
    """Exclusive lock on a run directory; concurrent commands are rejected.

    A crash can leave the lock behind; removing ``.lock`` by hand is the
    documented recovery.
    """
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    lock_path = run_dir / LOCK_NAME
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise LockHeldError(
            f"run directory {run_dir} is locked by another command "
            f"(remove {lock_path} if that command crashed)"
        ) from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        try:
            os.unlink(lock_path)
        except FileNotFoundError:
            pass
