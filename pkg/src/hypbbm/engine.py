"""Branching layer: binary splits at an exponential rate on top of the
single-particle dynamics.

A run resolves in two phases. The first settles the branching skeleton
alone (ids, birth and split times) from each particle's first stream
draw, which makes the population-cap check exact. The second walks the
tree and fills in the spatial paths segment by segment. Every particle
owns a counter-based stream keyed by its id, so the output is a pure
function of the seed no matter how the tree is traversed.
"""

import heapq
import math
from dataclasses import dataclass, field, replace

import numpy as np

from hypbbm import rng as rng_mod
from hypbbm.diffusion import (
    DiffusionParams,
    advance_segment,
    envelope_violates,
    segment_times,
)
from hypbbm.errors import ConfigError, DomainError, UnknownParticleError

# Child ids are 2i+1 and 2i+2; keep them well inside int64.
_ID_LIMIT = 2**62

_NORMALIZATIONS = ("by-count", "by-mean")


@dataclass(frozen=True)
class SimConfig:
    """Full description of one branching run."""

    beta: float
    horizon: float
    dt: float = 0.01
    lam: float = 0.0
    onset: float = 1.0
    seed: int = rng_mod.DEFAULT_SEED
    max_particles: int = 2_000_000
    normalization: str = "by-count"

    def __post_init__(self):
        if not self.beta > 0.0:
            raise ConfigError(f"beta must be > 0, got {self.beta}")
        if not self.horizon > 0.0:
            raise ConfigError(f"horizon must be > 0, got {self.horizon}")
        if not self.dt > 0.0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if not self.lam > -0.5:
            raise ConfigError(f"lam must be > -0.5, got {self.lam}")
        if not self.onset >= 0.0:
            raise ConfigError(f"onset must be >= 0, got {self.onset}")
        if self.max_particles < 1:
            raise ConfigError(f"max_particles must be >= 1, got {self.max_particles}")
        if self.normalization not in _NORMALIZATIONS:
            raise ConfigError(
                f"normalization must be one of {_NORMALIZATIONS}, got {self.normalization!r}"
            )

    @property
    def diffusion(self):
        return DiffusionParams(lam=self.lam, dt=self.dt)

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class Particle:
    id: int
    parent: int | None
    birth_time: float
    x: float
    logY: float
    typical_ok: bool
    first_violation: float | None


@dataclass(frozen=True)
class Snapshot:
    """Population alive at the end of a run, sorted by particle id.

    first_violation is relative to the run's configured onset (it backs
    the per-particle flag); last_violation records the latest envelope
    breach at any checked time, which lets the typical set be recomputed
    for any onset after the fact.
    """

    config: SimConfig
    time: float
    t0: float
    start: tuple
    capped: bool
    ids: np.ndarray
    birth_times: np.ndarray
    x: np.ndarray
    logY: np.ndarray
    first_violation: np.ndarray
    last_violation: np.ndarray
    population_history: list = field(default_factory=list)

    @property
    def population(self):
        return len(self.ids)

    @property
    def duration(self):
        return self.time - self.t0

    @property
    def typical_ok(self):
        return np.isnan(self.first_violation)

    @property
    def particles(self):
        out = []
        for i in range(self.population):
            pid = int(self.ids[i])
            fv = self.first_violation[i]
            out.append(
                Particle(
                    id=pid,
                    parent=None if pid == 0 else (pid - 1) // 2,
                    birth_time=float(self.birth_times[i]),
                    x=float(self.x[i]),
                    logY=float(self.logY[i]),
                    typical_ok=bool(np.isnan(fv)),
                    first_violation=None if np.isnan(fv) else float(fv),
                )
            )
        return out

    def index_of(self, particle_id):
        i = int(np.searchsorted(self.ids, particle_id))
        if i >= self.population or self.ids[i] != particle_id:
            raise UnknownParticleError(particle_id)
        return i


def _lifetime(seed, pid, beta):
    """First draw of a particle's stream: its exponential branch clock."""
    return rng_mod.particle_rng(seed, pid).standard_exponential() / beta


def _skeleton(config, t0):
    """Resolve branch times and ids without touching the spatial state.

    Returns (t_end, capped, births, split, alive, history) where births
    maps id -> birth time, split maps id -> executed branch time, and
    alive lists the ids present at t_end.
    """
    t_end = t0 + config.horizon
    births = {0: t0}
    split = {}
    heap = [(t0 + _lifetime(config.seed, 0, config.beta), 0)]
    pop = 1
    capped = False
    history = [(t0, 1)]
    while heap and heap[0][0] < t_end:
        tb, pid = heapq.heappop(heap)
        if pop >= config.max_particles:
            capped = True
            t_end = tb
            heapq.heappush(heap, (tb, pid))
            break
        if 2 * pid + 2 >= _ID_LIMIT:
            raise RuntimeError("branching tree too deep for id arithmetic")
        split[pid] = tb
        for child in (2 * pid + 1, 2 * pid + 2):
            births[child] = tb
            heapq.heappush(heap, (tb + _lifetime(config.seed, child, config.beta), child))
        pop += 1
        history.append((tb, pop))
    alive = [pid for _, pid in heap]
    return t_end, capped, births, split, alive, history


def run(config, start=(0.0, 0.0), t0=0.0):
    """Run one branching simulation and capture the final population.

    The root starts at horizontal coordinate start[0] and log height
    start[1] at absolute time t0 (defaults: the point above the origin at
    unit height, time zero). All grid times and the typicality envelope
    are in absolute time, so a run can continue another one's particle.
    """
    params = config.diffusion
    t_end, capped, births, split, alive, history = _skeleton(config, t0)
    beta = config.beta
    onset = config.onset

    n_alive = len(alive)
    out_ids = np.empty(n_alive, dtype=np.int64)
    out_x = np.empty(n_alive)
    out_logy = np.empty(n_alive)
    out_birth = np.empty(n_alive)
    out_fv = np.empty(n_alive)
    out_lv = np.empty(n_alive)
    k = 0

    # Depth-first fill of spatial paths; each stack entry carries the
    # state inherited at birth plus the lineage's violation record.
    stack = [(0, float(start[0]), float(start[1]), math.nan, math.nan)]
    while stack:
        pid, x0, logy0, fv, lv = stack.pop()
        birth = births[pid]
        seg_end = split.get(pid, t_end)
        times, n_interior = segment_times(birth, seg_end, params.dt)
        gen = rng_mod.particle_rng(config.seed, pid)
        gen.standard_exponential()  # skip the branch clock drawn in phase one
        xs, logys = advance_segment(x0, logy0, birth, times, params, gen)

        is_leaf = pid not in split
        n_check = n_interior + (1 if is_leaf else 0)
        if n_check:
            viol = envelope_violates(logys[:n_check], times[:n_check], config.lam)
            vt = times[:n_check][viol]
            if vt.size:
                lv = vt[-1]
                if math.isnan(fv):
                    at_onset = vt[vt >= onset]
                    if at_onset.size:
                        fv = at_onset[0]

        if is_leaf:
            out_ids[k] = pid
            out_x[k] = xs[-1]
            out_logy[k] = logys[-1]
            out_birth[k] = birth
            out_fv[k] = fv
            out_lv[k] = lv
            k += 1
        else:
            xe, le = float(xs[-1]), float(logys[-1])
            stack.append((2 * pid + 2, xe, le, fv, lv))
            stack.append((2 * pid + 1, xe, le, fv, lv))

    order = np.argsort(out_ids)
    return Snapshot(
        config=config,
        time=t_end,
        t0=t0,
        start=(float(start[0]), float(start[1])),
        capped=capped,
        ids=out_ids[order],
        birth_times=out_birth[order],
        x=out_x[order],
        logY=out_logy[order],
        first_violation=out_fv[order],
        last_violation=out_lv[order],
        population_history=history,
    )


def typical_count(snapshot, onset):
    """Number of particles whose lineage respects the envelope from onset on."""
    if onset < 0.0:
        raise DomainError(f"onset must be >= 0, got {onset}")
    if onset > snapshot.time:
        raise DomainError(
            f"onset {onset} is past the snapshot time {snapshot.time}"
        )
    lv = snapshot.last_violation
    return int(np.count_nonzero(np.isnan(lv) | (lv < onset)))


def typical_mask(snapshot, onset):
    """Boolean per-particle version of typical_count, same onset rule."""
    if onset < 0.0 or onset > snapshot.time:
        raise DomainError(f"onset {onset} outside [0, {snapshot.time}]")
    lv = snapshot.last_violation
    return np.isnan(lv) | (lv < onset)


def lineage(snapshot, particle_id):
    """Ancestral path (time, x, logY) from the root to a live particle.

    Re-derives each ancestor's segment from its stream; the result is
    bit-identical to what the original run computed.
    """
    snapshot.index_of(particle_id)
    chain = [particle_id]
    while chain[-1] != 0:
        chain.append((chain[-1] - 1) // 2)
    chain.reverse()

    config = snapshot.config
    params = config.diffusion
    birth = snapshot.t0
    x0, logy0 = snapshot.start
    path = [(birth, x0, logy0)]
    for pid in chain:
        gen = rng_mod.particle_rng(config.seed, pid)
        clock = gen.standard_exponential() / config.beta
        seg_end = snapshot.time if pid == chain[-1] else birth + clock
        times, _ = segment_times(birth, seg_end, params.dt)
        xs, logys = advance_segment(x0, logy0, birth, times, params, gen)
        path.extend(zip(times.tolist(), xs.tolist(), logys.tolist()))
        x0, logy0 = float(xs[-1]), float(logys[-1])
        birth = seg_end
    return path


def write_snapshot_csv(snapshot, path):
    """One row per live particle; empty fields stand for absent values."""
    with open(path, "w") as fh:
        fh.write("id,parent,birth_time,x,logY,typical_ok,first_violation\n")
        for i in range(snapshot.population):
            pid = int(snapshot.ids[i])
            parent = "" if pid == 0 else str((pid - 1) // 2)
            fv = snapshot.first_violation[i]
            fv_str = "" if np.isnan(fv) else repr(float(fv))
            ok = "0" if not np.isnan(fv) else "1"
            fh.write(
                f"{pid},{parent},{float(snapshot.birth_times[i])!r},"
                f"{float(snapshot.x[i])!r},{float(snapshot.logY[i])!r},{ok},{fv_str}\n"
            )
