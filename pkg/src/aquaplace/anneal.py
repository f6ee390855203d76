"""Minimizers for frozen quadratic binary models.

Two built-in solvers share one seam: multi-start simulated annealing with
Metropolis single-flip moves under a geometric temperature ladder, and an
exact enumerator for small models used as the testing oracle. Results are
a deterministic function of (model, schedule seed): every run draws from
its own generator keyed by (seed, run index), so serial and prefix replays
agree bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .errors import SolverError
from .qubo import QuboModel

DEFAULT_SWEEPS = 1000
DEFAULT_RUNS = 100
BRUTE_FORCE_MAX_VARS = 24

# Stream id for the temperature probe, far outside any plausible run index.
_TEMP_PROBE_STREAM = 2**62


@dataclass(frozen=True)
class Schedule:
    """Annealing parameters; temperatures left as None self-scale per model."""

    t_hot: float | None = None
    t_cold: float | None = None
    sweeps: int = DEFAULT_SWEEPS
    runs: int = DEFAULT_RUNS
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sweeps < 1:
            raise SolverError("sweeps must be at least 1")
        if self.runs < 1:
            raise SolverError("runs must be at least 1")
        if self.t_hot is not None and self.t_hot <= 0:
            raise SolverError("t_hot must be positive")
        if self.t_cold is not None and self.t_cold <= 0:
            raise SolverError("t_cold must be positive")
        if self.t_hot is not None and self.t_cold is not None and self.t_cold >= self.t_hot:
            raise SolverError("t_cold must be below t_hot")


@dataclass(frozen=True)
class RunRecord:
    run_index: int
    assignment: tuple[int, ...]
    energy: float
    wall_time: float


@dataclass(frozen=True)
class AnnealResult:
    """Per-run final states plus the incumbent best (ties: lowest run index)."""

    records: tuple[RunRecord, ...]
    best_index: int
    t_hot: float
    t_cold: float
    sweeps: int
    seed: int

    @property
    def best(self) -> RunRecord:
        return self.records[self.best_index]

    def energies(self) -> list[float]:
        return [r.energy for r in self.records]


def resolve_temperatures(model: QuboModel, schedule: Schedule) -> tuple[float, float]:
    """Fill in missing temperatures from the model's own energy scale.

    The hot default is the largest |energy change| over 1000 single-bit
    flips, each probed from a fresh uniform-random state, so early sweeps
    accept nearly every move; the cold default is a factor 1e-3 below.
    """
    t_hot = schedule.t_hot
    if t_hot is None:
        rng = np.random.default_rng(np.random.SeedSequence((schedule.seed, _TEMP_PROBE_STREAM)))
        largest = 0.0
        if model.n > 0:
            for _ in range(1000):
                x = rng.integers(0, 2, size=model.n)
                i = int(rng.integers(model.n))
                largest = max(largest, abs(model.delta_energy(x, i)))
        t_hot = largest if largest > 0 else 1.0
    t_cold = schedule.t_cold if schedule.t_cold is not None else 1e-3 * t_hot
    if t_cold >= t_hot:
        raise SolverError(f"resolved t_cold {t_cold} not below t_hot {t_hot}")
    return t_hot, t_cold


def _temperature_ladder(t_hot: float, t_cold: float, sweeps: int) -> np.ndarray:
    if sweeps == 1:
        return np.array([t_hot])
    return t_hot * (t_cold / t_hot) ** (np.arange(sweeps) / (sweeps - 1))


# Vectorized screening slices start here and double on every miss, so the
# cost of finding the next accepted proposal stays proportional to the gap
# before it. Values only trade memory against numpy call overhead, never
# the outcome.
_CHUNK_MIN = 128
_CHUNK_MAX = 65536

# Proposal streams at most this long, on models this small, run through the
# plain Python loop, which beats vectorized screening while accepts are dense.
_SCALAR_CUTOFF = 100_000
_SCALAR_MAX_VARS = 64

# Incremental gains are rebuilt from scratch after this many accepted flips
# to stop float drift from accumulating over very long schedules.
_GAIN_REFRESH_INTERVAL = 4096


def _run_random_streams(
    rng: np.random.Generator, sweeps: int, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Visit orders and accept draws for one run, in a fixed draw order.

    Each sweep visits all variables in a fresh random order; every proposal
    consumes one uniform draw whether or not it is used. Both arrays are
    drawn up front (orders first, then draws), which pins the generator
    call sequence the determinism contract is stated over.
    """
    orders = rng.permuted(np.tile(np.arange(n), (sweeps, 1)), axis=1)
    draws = rng.random((sweeps, n))
    return orders.ravel(), draws.ravel()


def _screen_scalar(
    x: np.ndarray,
    gains: np.ndarray,
    q_matrix: np.ndarray,
    order: np.ndarray,
    draws: np.ndarray,
    flat_temps: np.ndarray,
) -> None:
    """Reference proposal loop: one accept decision at a time."""
    exp = math.exp
    n = x.shape[0]
    xs = x.tolist()
    gs = gains.tolist()
    rows = q_matrix.tolist()
    order_l = order.tolist()
    draws_l = draws.tolist()
    temps_l = flat_temps.tolist()
    for pos in range(len(order_l)):
        i = order_l[pos]
        delta = -gs[i] if xs[i] else gs[i]
        if delta <= 0.0 or draws_l[pos] < exp(-delta / temps_l[pos]):
            row = rows[i]
            if xs[i]:
                xs[i] = 0
                for k in range(n):
                    gs[k] -= row[k]
            else:
                xs[i] = 1
                for k in range(n):
                    gs[k] += row[k]
    x[:] = xs
    gains[:] = gs


def _screen_vectorized(
    x: np.ndarray,
    gains: np.ndarray,
    linear: np.ndarray,
    q_matrix: np.ndarray,
    order: np.ndarray,
    draws: np.ndarray,
    flat_temps: np.ndarray,
) -> None:
    """Slice-at-a-time proposal loop, identical in outcome to the scalar one.

    Under the current state every pending proposal's accept decision is
    precomputable, so the stream is screened in growing slices up to the
    first accept; the flip is applied and screening resumes after it.
    Rejected proposals leave the state untouched, which is what makes the
    batch decisions exact.
    """
    pos = 0
    total = order.shape[0]
    chunk = _CHUNK_MIN
    flips = 0
    while pos < total:
        end = min(pos + chunk, total)
        idx = order[pos:end]
        delta = np.where(x[idx] == 1, -gains[idx], gains[idx])
        accept = delta <= 0.0
        uphill = ~accept
        accept[uphill] = (
            draws[pos:end][uphill]
            < np.exp(-delta[uphill] / flat_temps[pos:end][uphill])
        )
        hits = np.nonzero(accept)[0]
        if hits.size == 0:
            pos = end
            chunk = min(chunk * 2, _CHUNK_MAX)
            continue
        first = int(hits[0])
        i = int(idx[first])
        if x[i] == 1:
            x[i] = 0
            gains -= q_matrix[i]
        else:
            x[i] = 1
            gains += q_matrix[i]
        flips += 1
        if flips % _GAIN_REFRESH_INTERVAL == 0:
            gains[:] = linear + q_matrix @ x
        pos += first + 1
        chunk = _CHUNK_MIN


def _anneal_single_run(
    n: int,
    linear: np.ndarray,
    q_matrix: np.ndarray,
    temps: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """One run: random start, n single-flip proposals per sweep."""
    x = rng.integers(0, 2, size=n)
    order, draws = _run_random_streams(rng, len(temps), n)
    flat_temps = np.repeat(temps, n)
    gains = linear + q_matrix @ x
    if order.shape[0] <= _SCALAR_CUTOFF and n <= _SCALAR_MAX_VARS:
        _screen_scalar(x, gains, q_matrix, order, draws, flat_temps)
    else:
        _screen_vectorized(x, gains, linear, q_matrix, order, draws, flat_temps)
    return x


def _dense_couplings(model: QuboModel) -> np.ndarray:
    """Symmetric zero-diagonal matrix of pair coefficients."""
    q_matrix = np.zeros((model.n, model.n))
    for (i, j), value in model.quadratic.items():
        q_matrix[i, j] = value
        q_matrix[j, i] = value
    return q_matrix


def simulated_anneal(model: QuboModel, schedule: Schedule) -> AnnealResult:
    """Run the full multi-start protocol and return every run's final state.

    Final energies are recomputed from scratch, never carried incrementally.
    """
    if not model.frozen:
        raise SolverError("model must be frozen before annealing")
    t_hot, t_cold = resolve_temperatures(model, schedule)
    temps = _temperature_ladder(t_hot, t_cold, schedule.sweeps)
    q_matrix = _dense_couplings(model)
    linear = np.asarray(model.linear, dtype=float)
    records = []
    for run_index in range(schedule.runs):
        rng = np.random.default_rng(np.random.SeedSequence((schedule.seed, run_index)))
        started = time.perf_counter()
        x = _anneal_single_run(model.n, linear, q_matrix, temps, rng)
        wall = time.perf_counter() - started
        records.append(
            RunRecord(
                run_index=run_index,
                assignment=tuple(int(b) for b in x),
                energy=model.energy(x),
                wall_time=wall,
            )
        )
    best_index = min(range(len(records)), key=lambda i: (records[i].energy, i))
    return AnnealResult(
        records=tuple(records),
        best_index=best_index,
        t_hot=t_hot,
        t_cold=t_cold,
        sweeps=schedule.sweeps,
        seed=schedule.seed,
    )


def brute_force(model: QuboModel, max_vars: int = BRUTE_FORCE_MAX_VARS) -> tuple[np.ndarray, float]:
    """Exact global minimum over all 2^n assignments; refuses n > ``max_vars``.

    Ties go to the lexicographically smallest assignment (x_0 most
    significant). The search splits the variables into two blocks and scans
    the cross-term matrix in blocks, which enumerates every assignment
    implicitly while staying vectorized.
    """
    n = model.n
    if n > max_vars:
        raise SolverError(f"brute force limited to {max_vars} variables, model has {n}")
    if n == 0:
        return np.zeros(0, dtype=np.int8), model.offset

    linear = np.asarray(model.linear)
    p = n // 2
    q = n - p
    a_bits = _lex_bit_matrix(p)
    b_bits = _lex_bit_matrix(q)

    energy_a = a_bits @ linear[:p]
    energy_b = b_bits @ linear[p:]
    cross = np.zeros((p, q)) if p else None
    for (i, j), value in model.quadratic.items():
        if j < p:
            energy_a += value * a_bits[:, i] * a_bits[:, j]
        elif i >= p:
            energy_b += value * b_bits[:, i - p] * b_bits[:, j - p]
        else:
            cross[i, j - p] += value

    best_energy = np.inf
    best_a = best_b = 0
    chunk = max(1, (1 << 23) // b_bits.shape[0])
    for start in range(0, a_bits.shape[0], chunk):
        stop = min(start + chunk, a_bits.shape[0])
        block = energy_a[start:stop, None] + energy_b[None, :]
        if cross is not None:
            block = block + (a_bits[start:stop] @ cross) @ b_bits.T
        rows = block.min(axis=1)
        winner = int(rows.argmin())
        if rows[winner] < best_energy:
            best_energy = float(rows[winner])
            best_a = start + winner
            best_b = int(block[winner].argmin())

    assignment = np.concatenate([_index_bits(best_a, p), _index_bits(best_b, q)])
    return assignment, model.energy(assignment)


def _lex_bit_matrix(width: int) -> np.ndarray:
    """All bit rows of the given width; row index order = lexicographic order."""
    if width == 0:
        return np.zeros((1, 0))
    indices = np.arange(1 << width)
    shifts = np.arange(width - 1, -1, -1)
    return ((indices[:, None] >> shifts[None, :]) & 1).astype(np.float64)


def _index_bits(index: int, width: int) -> np.ndarray:
    return np.array([(index >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.int8)


@dataclass(frozen=True)
class DensityTable:
    """Equal-width energy histogram normalized to unit area."""

    centers: tuple[float, ...]
    densities: tuple[float, ...]
    width: float

    def area(self) -> float:
        return sum(self.densities) * self.width


def histogram(result: AnnealResult | Sequence[float], bins: int) -> DensityTable:
    """Density of final energies over equal-width bins spanning [min, max].

    A single distinct energy collapses to one unit-width bin of density 1.
    """
    if bins < 1:
        raise SolverError("bins must be at least 1")
    energies = result.energies() if isinstance(result, AnnealResult) else list(result)
    if not energies:
        raise SolverError("no energies to bin")
    low, high = min(energies), max(energies)
    if low == high:
        return DensityTable(centers=(low,), densities=(1.0,), width=1.0)
    densities, edges = np.histogram(energies, bins=bins, range=(low, high), density=True)
    centers = (edges[:-1] + edges[1:]) / 2.0
    return DensityTable(
        centers=tuple(float(c) for c in centers),
        densities=tuple(float(d) for d in densities),
        width=float(edges[1] - edges[0]),
    )


class Solver(Protocol):
    """Minimizer seam; alternative backends implement the same call."""

    def minimize(self, model: QuboModel) -> AnnealResult: ...


@dataclass(frozen=True)
class SimulatedAnnealingSolver:
    schedule: Schedule

    def minimize(self, model: QuboModel) -> AnnealResult:
        return simulated_anneal(model, self.schedule)


@dataclass(frozen=True)
class ExactSolver:
    """Brute-force seam adapter; reports its single answer as a one-run result."""

    max_vars: int = BRUTE_FORCE_MAX_VARS

    def minimize(self, model: QuboModel) -> AnnealResult:
        started = time.perf_counter()
        assignment, energy = brute_force(model, max_vars=self.max_vars)
        wall = time.perf_counter() - started
        record = RunRecord(
            run_index=0, assignment=tuple(int(b) for b in assignment), energy=energy, wall_time=wall
        )
        return AnnealResult(
            records=(record,), best_index=0, t_hot=0.0, t_cold=0.0, sweeps=0, seed=0
        )


def get_solver(name: str, schedule: Schedule, max_vars: int = BRUTE_FORCE_MAX_VARS) -> Solver:
    if name == "sa":
        return SimulatedAnnealingSolver(schedule)
    if name == "exact":
        return ExactSolver(max_vars=max_vars)
    raise SolverError(f"unknown solver '{name}' (expected 'sa' or 'exact')")
