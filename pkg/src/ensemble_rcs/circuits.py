"""Random L-cycle circuits, exact dephasing, and Porter-Thomas diagnostics."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterator, Sequence

import numpy as np
from scipy import stats

from .core import (
    MAX_DENSITY_DIM,
    CapacityError,
    EnsembleDims,
    StateVector,
    apply_global_squeeze,
    apply_hadamard_layer,
    apply_rotation,
    config_table,
    make_initial_state,
    measurement_probabilities,
    sz_values,
    x_half,
    y_half,
    z_quarter,
)


class GateChoice(IntEnum):
    XHALF = 0
    YHALF = 1
    ZQUARTER = 2

    @property
    def letter(self) -> str:
        return "XYZ"[self]

    @classmethod
    def from_letter(cls, c: str) -> "GateChoice":
        try:
            return cls("XYZ".index(c.upper()))
        except ValueError:
            raise ValueError(f"gate letter must be one of X, Y, Z, got {c!r}") from None


def default_xi(dims: EnsembleDims) -> float:
    """Squeezing strength pi / sqrt(M N)."""
    return math.pi / math.sqrt(dims.M * dims.N)


def choice_rotation(N: int, choice: int):
    return (x_half, y_half, z_quarter)[int(choice)](N)


@dataclass
class CircuitSpec:
    dims: EnsembleDims
    L: int
    xi: float
    choices: np.ndarray = field(repr=False)
    seed: int | None = None

    def __post_init__(self):
        self.choices = np.asarray(self.choices, dtype=np.int8).reshape(self.L, self.dims.M)
        if self.choices.size and (self.choices.min() < 0 or self.choices.max() > 2):
            raise ValueError("gate choices must be 0 (X), 1 (Y) or 2 (Z)")

    @classmethod
    def from_choices(cls, dims: EnsembleDims, choices, xi: float | None = None) -> "CircuitSpec":
        """Circuit with an explicit L x M choice table (letters or GateChoice values)."""
        rows = []
        for row in choices:
            if isinstance(row, str):
                row = [GateChoice.from_letter(c) for c in row]
            elif np.isscalar(row):
                row = [row]
            row = [GateChoice.from_letter(c) if isinstance(c, str) else int(c) for c in row]
            if len(row) == 1 and dims.M > 1:
                row = row * dims.M
            rows.append(row)
        table = np.array(rows, dtype=np.int8).reshape(len(rows), dims.M)
        return cls(dims, len(rows), default_xi(dims) if xi is None else xi, table, None)

    def prefix(self, L: int) -> "CircuitSpec":
        if not 0 <= L <= self.L:
            raise ValueError(f"prefix length {L} outside [0, {self.L}]")
        return CircuitSpec(self.dims, L, self.xi, self.choices[:L].copy(), self.seed)

    def letters(self) -> list[str]:
        return ["".join("XYZ"[c] for c in row) for row in self.choices]


def generate_random_circuit(dims: EnsembleDims, L: int, xi: float | None = None, seed: int = 0) -> CircuitSpec:
    """Draw the L x M table of gates uniformly from {X^1/2, Y^1/2, Z^1/4}.

    Draws are row-major, so the first L' rows for a given seed are the circuit
    that would be generated with L = L'.
    """
    if L < 0:
        raise ValueError("L must be >= 0")
    rng = np.random.default_rng(seed)
    choices = rng.integers(0, 3, size=(L, dims.M), dtype=np.int8)
    return CircuitSpec(dims, L, default_xi(dims) if xi is None else float(xi), choices, seed)


def apply_cycle(state: StateVector, row: Sequence[int], xi: float) -> StateVector:
    state = apply_global_squeeze(state, xi)
    for m, c in enumerate(row):
        state = apply_rotation(state, m, choice_rotation(state.dims.N, c))
    return state


def iter_circuit_states(spec: CircuitSpec, hadamard: bool = True) -> Iterator[StateVector]:
    """Yield the state after the Hadamard layer and after each of the L cycles."""
    state = make_initial_state(spec.dims)
    if hadamard:
        state = apply_hadamard_layer(state)
    yield state
    for row in spec.choices:
        state = apply_cycle(state, row, spec.xi)
        yield state


def run_circuit(spec: CircuitSpec, hadamard: bool = True) -> StateVector:
    """Final state of H-layer followed by L cycles of (global squeeze, then W per ensemble).

    ``hadamard=False`` skips the initial Hadamard layer.
    """
    for state in iter_circuit_states(spec, hadamard):
        pass
    return state


# ---------------------------------------------------------------------------
# Porter-Thomas diagnostics
# ---------------------------------------------------------------------------


def shannon_entropy(probs) -> float:
    """-sum p ln p in nats, with 0 ln 0 = 0."""
    p = np.asarray(probs, dtype=np.float64)
    if np.any(p < -1e-12):
        raise ValueError("negative probability")
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def pt_entropy(D: int) -> float:
    """Entropy ln D - 1 + gamma of the Porter-Thomas distribution."""
    if D < 2:
        raise ValueError("D must be >= 2")
    return math.log(D) - 1.0 + np.euler_gamma


def pt_ideal_sorted(D: int, kbar) -> np.ndarray | float:
    """Ideal sorted PT probability (ln D - ln kbar) / D at rank kbar (1-based)."""
    if D < 2:
        raise ValueError("D must be >= 2")
    kb = np.asarray(kbar, dtype=np.float64)
    if np.any(kb < 1) or np.any(kb > D):
        raise ValueError(f"rank must lie in [1, {D}]")
    out = (math.log(D) - np.log(kb)) / D
    return float(out) if out.ndim == 0 else out


def sorted_probabilities(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    return p[np.argsort(-p, kind="stable")]


def pt_distance(probs) -> float:
    """Kolmogorov-Smirnov distance between {D p_k} and the unit-rate exponential law."""
    p = np.asarray(probs, dtype=np.float64)
    return float(stats.kstest(p.size * p, "expon").statistic)


# ---------------------------------------------------------------------------
# density matrices and dephasing
# ---------------------------------------------------------------------------


@dataclass
class DensityMatrix:
    dims: EnsembleDims
    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dims.D > MAX_DENSITY_DIM:
            raise CapacityError(f"density matrix dimension {self.dims.D} exceeds cap {MAX_DENSITY_DIM}")
        self.rho = np.asarray(self.rho, dtype=np.complex128)
        if self.rho.shape != (self.dims.D, self.dims.D):
            raise ValueError("density matrix has wrong shape")

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        return cls(state.dims, np.outer(state.amp, state.amp.conj()))

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.rho)).copy()

    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho, self.rho)))


def conjugate_rotation(rho: DensityMatrix, m: int, U: np.ndarray) -> DensityMatrix:
    """rho -> U_m rho U_m^dag for a single-ensemble matrix U."""
    dims = rho.dims
    ax = dims.axis(m)
    t = rho.rho.reshape(dims.shape + dims.shape)
    t = np.moveaxis(np.tensordot(U, t, axes=(1, ax)), 0, ax)
    ax2 = dims.M + ax
    t = np.moveaxis(np.tensordot(t, U.conj().T, axes=(ax2, 0)), -1, ax2)
    return DensityMatrix(dims, t.reshape(dims.D, dims.D))


def conjugate_diagonal(rho: DensityMatrix, phases: np.ndarray) -> DensityMatrix:
    return DensityMatrix(rho.dims, phases[:, None] * rho.rho * phases.conj()[None, :])


def _dephasing_exponent(dims: EnsembleDims) -> np.ndarray:
    k = config_table(dims).astype(np.float64)
    diff = k[:, None, :] - k[None, :, :]
    return np.sum(diff**2, axis=-1)


def dephase(rho: DensityMatrix, tau: float) -> DensityMatrix:
    """Exact collective S^z dephasing: rho_kk' *= exp(-2 tau sum_m (k_m - k'_m)^2)."""
    if tau < 0:
        raise ValueError("dephasing strength must be non-negative")
    if tau == 0:
        return DensityMatrix(rho.dims, rho.rho.copy())
    return DensityMatrix(rho.dims, rho.rho * np.exp(-2.0 * tau * _dephasing_exponent(rho.dims)))


def iter_dephased_states(spec: CircuitSpec, tau: float, hadamard: bool = True) -> Iterator[DensityMatrix]:
    """Yield rho after the Hadamard layer and after each cycle (unitary part, then dephasing)."""
    if tau < 0:
        raise ValueError("dephasing strength must be non-negative")
    dims = spec.dims
    state = make_initial_state(dims)
    if hadamard:
        state = apply_hadamard_layer(state)
    rho = DensityMatrix.from_state(state)
    yield rho
    total = sum(sz_values(dims, m) for m in range(dims.M))
    squeeze = np.exp(-1j * spec.xi * total**2)
    decay = np.exp(-2.0 * tau * _dephasing_exponent(dims)) if tau > 0 else None
    for row in spec.choices:
        rho = conjugate_diagonal(rho, squeeze)
        for m, c in enumerate(row):
            rot = choice_rotation(dims.N, c)
            if rot.axis == "z":
                rho = conjugate_diagonal(rho, np.exp(-1j * rot.angle * sz_values(dims, m)))
            else:
                rho = conjugate_rotation(rho, m, rot.entries)
        if decay is not None:
            rho = DensityMatrix(dims, rho.rho * decay)
        yield rho


def run_circuit_with_dephasing(spec: CircuitSpec, tau: float, hadamard: bool = True) -> DensityMatrix:
    for rho in iter_dephased_states(spec, tau, hadamard):
        pass
    return rho


# ---------------------------------------------------------------------------
# entropy sweep
# ---------------------------------------------------------------------------


@dataclass
class EntropySweep:
    L: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    per_seed: np.ndarray  # (n_circuits, L_max + 1)
    seeds: list[int]

    def rows(self):
        return list(zip(self.L.tolist(), self.mean.tolist(), self.std.tolist()))


def _entropy_curve(dims, xi, tau, L_max, seed) -> np.ndarray:
    spec = generate_random_circuit(dims, L_max, xi, seed)
    if tau > 0:
        return np.array([shannon_entropy(np.clip(r.diagonal(), 0, None)) for r in iter_dephased_states(spec, tau)])
    return np.array([shannon_entropy(measurement_probabilities(s)) for s in iter_circuit_states(spec)])


def entropy_sweep(
    dims: EnsembleDims,
    xi: float | None,
    tau: float,
    L_max: int,
    n_circuits: int,
    seed: int = 0,
    threads: int = 1,
) -> EntropySweep:
    """Outcome entropy versus cycle count, averaged over ``n_circuits`` random circuits.

    Circuit ``i`` uses seed ``seed + i``; every L is a prefix of the same L_max circuit.
    """
    if n_circuits < 1:
        raise ValueError("need at least one circuit")
    if tau > 0 and dims.D > MAX_DENSITY_DIM:
        raise CapacityError(f"dephased sweep needs D <= {MAX_DENSITY_DIM}, got {dims.D}")
    xi = default_xi(dims) if xi is None else xi
    seeds = [seed + i for i in range(n_circuits)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        curves = list(pool.map(lambda s: _entropy_curve(dims, xi, tau, L_max, s), seeds))
    per_seed = np.vstack(curves)
    return EntropySweep(
        L=np.arange(L_max + 1),
        mean=per_seed.mean(axis=0),
        std=per_seed.std(axis=0, ddof=1) if n_circuits > 1 else np.zeros(L_max + 1),
        per_seed=per_seed,
        seeds=seeds,
    )


__all__ = [
    "GateChoice",
    "CircuitSpec",
    "DensityMatrix",
    "EntropySweep",
    "default_xi",
    "generate_random_circuit",
    "run_circuit",
    "iter_circuit_states",
    "shannon_entropy",
    "pt_entropy",
    "pt_ideal_sorted",
    "sorted_probabilities",
    "pt_distance",
    "dephase",
    "run_circuit_with_dephasing",
    "iter_dephased_states",
    "entropy_sweep",
]
