"""Feynman path-integral evaluation of circuit amplitudes.

A circuit is flattened into single gates.  Diagonal gates (global squeeze,
z rotations) keep the Fock configuration fixed and contribute a phase; the
collective x/y rotations are two-sparse and are the only places where a path
branches into N+1 successors on the targeted ensemble.  Summing the product of
matrix elements along every path gives the amplitude exactly; summing along a
uniform random subset of paths gives the Monte Carlo estimate.

For a fixed output configuration the last two-sparse gate acting on each
ensemble must land on that ensemble's output value, so one amplitude has
(N+1)^(G - M_b) paths, M_b being the number of ensembles that branch at all.
Summed over all D outputs this is the familiar (N+1)^G.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuits import CircuitSpec, choice_rotation, run_circuit
from .core import (
    EnsembleDims,
    StateVector,
    apply_global_squeeze,
    apply_matrix,
    decode_config,
    encode_config,
    hadamard_factors,
    make_initial_state,
    sz_values,
)

MAX_PATHS = 10**7
CHUNK = 4096

DIAG_GLOBAL = "diagonal-global"
DIAG_LOCAL = "diagonal-local"
TWO_SPARSE = "two-sparse"


@dataclass(frozen=True)
class FlatGate:
    kind: str
    label: str
    target: int | None = None
    angle: float = 0.0
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def phase(self, configs: np.ndarray, N: int) -> np.ndarray:
        """Diagonal matrix element for each row of a (P, M) configuration array."""
        s = 2 * configs - N
        if self.kind == DIAG_GLOBAL:
            return np.exp(-1j * self.angle * s.sum(axis=1).astype(np.float64) ** 2)
        if self.kind == DIAG_LOCAL:
            return np.exp(-1j * self.angle * s[:, self.target].astype(np.float64))
        raise TypeError(f"{self.label} is not diagonal")


@dataclass
class FlatCircuit:
    dims: EnsembleDims
    gates: list[FlatGate]

    @property
    def T(self) -> int:
        return len(self.gates)

    @property
    def G(self) -> int:
        return sum(g.kind == TWO_SPARSE for g in self.gates)

    def forced_mask(self) -> list[bool]:
        """For every gate, whether it is the last two-sparse gate on its ensemble."""
        seen = set()
        forced = [False] * self.T
        for t in reversed(range(self.T)):
            g = self.gates[t]
            if g.kind == TWO_SPARSE and g.target not in seen:
                seen.add(g.target)
                forced[t] = True
        return forced

    def paths_per_amplitude(self) -> int:
        return (self.dims.N + 1) ** _n_free(self)

    def path_capacity(self) -> int:
        """(N+1)^G, the number of nonzero-candidate paths summed over all outputs."""
        return (self.dims.N + 1) ** self.G


def flatten_circuit(spec: CircuitSpec, hadamard: bool = True) -> FlatCircuit:
    """Gate-by-gate form: H_1..H_M (each as U^x, U^z, U^x), then per cycle Q, W_1..W_M."""
    N = spec.dims.N
    gates: list[FlatGate] = []
    if hadamard:
        ux, uz, _ = hadamard_factors(N)
        for m in range(spec.dims.M):
            gates.append(FlatGate(TWO_SPARSE, "Ux", m, ux.angle, ux.entries))
            gates.append(FlatGate(DIAG_LOCAL, "Uz", m, uz.angle))
            gates.append(FlatGate(TWO_SPARSE, "Ux", m, ux.angle, ux.entries))
    for row in spec.choices:
        gates.append(FlatGate(DIAG_GLOBAL, "Q", None, spec.xi))
        for m, c in enumerate(row):
            rot = choice_rotation(N, c)
            label = "XYZ"[int(c)]
            if rot.axis == "z":
                gates.append(FlatGate(DIAG_LOCAL, label, m, rot.angle))
            else:
                gates.append(FlatGate(TWO_SPARSE, label, m, rot.angle, rot.entries))
    return FlatCircuit(spec.dims, gates)


def apply_flat(flat: FlatCircuit, state: StateVector | None = None) -> StateVector:
    """Apply the flattened gates to a state vector (defaults to the initial state)."""
    dims = flat.dims
    state = make_initial_state(dims) if state is None else state
    for g in flat.gates:
        if g.kind == TWO_SPARSE:
            state = apply_matrix(state, g.target, g.matrix)
        elif g.kind == DIAG_GLOBAL:
            state = apply_global_squeeze(state, g.angle)
        else:
            state = StateVector(dims, state.amp * np.exp(-1j * g.angle * sz_values(dims, g.target)))
    return state


def _path_products(flat: FlatCircuit, k_f: Sequence[int], free: np.ndarray) -> np.ndarray:
    """Product of matrix elements along each path.

    ``free`` is a (P, n_free) array giving, in gate order, the occupation chosen
    at every non-forced two-sparse gate.
    """
    dims = flat.dims
    P = free.shape[0]
    k_f = np.asarray(k_f, dtype=np.int64)
    cur = np.full((P, dims.M), dims.N, dtype=np.int64)
    w = np.ones(P, dtype=np.complex128)
    j = 0
    for g, forced in zip(flat.gates, flat.forced_mask()):
        if g.kind == TWO_SPARSE:
            old = cur[:, g.target]
            if forced:
                new = np.full(P, k_f[g.target])
            else:
                new = free[:, j]
                j += 1
            w *= g.matrix[new, old]
            cur[:, g.target] = new
        else:
            w *= g.phase(cur, dims.N)
    # ensembles that never branch must already sit at their output value
    if np.any(cur != k_f[None, :]):
        w = np.where(np.all(cur == k_f[None, :], axis=1), w, 0.0)
    return w


def _n_free(flat: FlatCircuit) -> int:
    return sum(g.kind == TWO_SPARSE and not f for g, f in zip(flat.gates, flat.forced_mask()))


def _digits(ints: np.ndarray, n_digits: int, base: int) -> np.ndarray:
    out = np.empty((ints.size, n_digits), dtype=np.int64)
    rem = ints.copy()
    for d in range(n_digits):
        rem, out[:, d] = np.divmod(rem, base)
    return out


def exact_amplitude_enumeration(flat: FlatCircuit, k_f: Sequence[int], max_paths: int = MAX_PATHS) -> complex:
    """<k_f|C|psi_0> by summing the product of matrix elements over every path."""
    n_free = _n_free(flat)
    n_paths = flat.paths_per_amplitude()
    if n_paths > max_paths:
        raise ValueError(f"{n_paths} paths exceed the enumeration cap {max_paths}")
    total = 0j
    for start in range(0, n_paths, CHUNK * 16):
        ints = np.arange(start, min(n_paths, start + CHUNK * 16), dtype=np.int64)
        total += complex(_path_products(flat, k_f, _digits(ints, n_free, flat.dims.N + 1)).sum())
    return total


@dataclass
class AmplitudeEstimate:
    value: complex  # unnormalized sum of sampled path products
    paths_used: int
    exact: bool
    n_paths: int  # all paths that end at this output
    stderr: float = 0.0  # standard error of the rescaled estimate

    @property
    def rescaled(self) -> complex:
        """Unbiased amplitude estimate n_paths / paths_used * value."""
        return self.value if self.exact else self.value * self.n_paths / self.paths_used


def mc_amplitude(
    flat: FlatCircuit,
    k_f: Sequence[int],
    P: int,
    rng_seed: int,
    exhaustive_fallback: bool = True,
    kf_index: int | None = None,
) -> AmplitudeEstimate:
    """Monte Carlo path sum with uniform proposals at every free two-sparse gate.

    Random numbers for chunk ``c`` of output ``kf_index`` come from the stream
    SeedSequence(rng_seed, spawn_key=(kf_index, c)), so estimates do not depend
    on how outputs are scheduled across threads.
    """
    if P < 1:
        raise ValueError("path budget must be >= 1")
    n_free = _n_free(flat)
    n_paths = flat.paths_per_amplitude()
    if exhaustive_fallback and P >= n_paths:
        return AmplitudeEstimate(exact_amplitude_enumeration(flat, k_f, max(MAX_PATHS, n_paths)), n_paths, True, n_paths)
    if kf_index is None:
        kf_index = encode_config(k_f, flat.dims)
    total = 0j
    sq = 0.0
    for c, start in enumerate(range(0, P, CHUNK)):
        size = min(CHUNK, P - start)
        rng = np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(kf_index, c)))
        free = rng.integers(0, flat.dims.N + 1, size=(size, n_free))
        w = _path_products(flat, k_f, free)
        total += complex(w.sum())
        sq += float(np.sum(np.abs(w) ** 2))
    mean = total / P
    var = max(sq / P - abs(mean) ** 2, 0.0)
    stderr = n_paths * math.sqrt(var / P)
    return AmplitudeEstimate(total, P, False, n_paths, stderr)


def mc_wavefunction(
    flat: FlatCircuit,
    P: int,
    rng_seed: int,
    threads: int = 1,
    exhaustive_fallback: bool = True,
) -> StateVector:
    """Normalized Monte Carlo estimate of the whole output state.

    ``P`` is the total path budget; each of the D outputs receives max(1, P // D)
    paths.  The state is exact exactly when P >= (N+1)^G.
    """
    dims = flat.dims
    per_output = max(1, P // dims.D)

    def one(i):
        est = mc_amplitude(flat, decode_config(i, dims), per_output, rng_seed, exhaustive_fallback, kf_index=i)
        return est.value

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(one, range(dims.D)))
    else:
        values = [one(i) for i in range(dims.D)]
    amp = np.array(values, dtype=np.complex128)
    norm = np.linalg.norm(amp)
    if norm == 0:
        raise ValueError("every sampled path product vanished; cannot normalize")
    return StateVector(dims, amp / norm)


def fpi_fidelity(est: StateVector, exact: StateVector) -> float:
    """|<est|exact>|^2."""
    if est.dims != exact.dims:
        raise ValueError("states have different dimensions")
    return float(abs(np.vdot(est.amp, exact.amp)) ** 2)


@dataclass
class FidelityRow:
    L: int
    G: int
    paths_capacity: int
    fidelity: float


def fidelity_vs_cycles(
    dims: EnsembleDims,
    gate_sequence,
    xi: float | None,
    P: int,
    seed: int,
    threads: int = 1,
) -> list[FidelityRow]:
    """Path-integral fidelity against exact simulation for every prefix of a gate sequence.

    ``gate_sequence`` is a CircuitSpec or anything :meth:`CircuitSpec.from_choices`
    accepts, e.g. ``"XYZXZYZXYX"`` for one ensemble.
    """
    if isinstance(gate_sequence, CircuitSpec):
        spec = gate_sequence
        if xi is not None:
            spec = CircuitSpec(spec.dims, spec.L, xi, spec.choices, spec.seed)
    else:
        if isinstance(gate_sequence, str):
            gate_sequence = list(gate_sequence)
        spec = CircuitSpec.from_choices(dims, gate_sequence, xi)
    rows = []
    for L in range(spec.L + 1):
        sub = spec.prefix(L)
        flat = flatten_circuit(sub)
        est = mc_wavefunction(flat, P, seed, threads=threads)
        F = fpi_fidelity(est, run_circuit(sub))
        rows.append(FidelityRow(L, flat.G, flat.path_capacity(), F))
    return rows

