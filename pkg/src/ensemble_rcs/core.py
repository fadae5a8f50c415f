"""Fock-space representation of M ensembles of N qubits and the collective gates.

Each ensemble lives in its (N+1)-dimensional permutation-symmetric subspace,
spanned by Fock states |k>, k = 0..N, with S^z |k> = (2k - N) |k>.  The joint
state of M ensembles is a flat complex vector of length D = (N+1)**M whose
index is the mixed-radix encoding of the occupation vector (k_0, ..., k_{M-1})
with ensemble 0 varying fastest.

Ensemble indices are 0-based throughout the Python API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

MAX_STATE_DIM = 2**27
MAX_DENSITY_DIM = 2**13

AXES = ("x", "y", "z")


class CapacityError(ValueError):
    """Raised when a requested Hilbert space exceeds the configured memory cap."""


@dataclass(frozen=True)
class EnsembleDims:
    N: int
    M: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M!r}")
        if self.D > MAX_STATE_DIM:
            raise CapacityError(
                f"dimension (N+1)^M = {self.D} exceeds state-vector cap {MAX_STATE_DIM}"
            )

    @property
    def D(self) -> int:
        return (self.N + 1) ** self.M

    @property
    def shape(self) -> tuple[int, ...]:
        """Tensor shape of the amplitude array in C order (ensemble 0 is the last axis)."""
        return (self.N + 1,) * self.M

    def axis(self, m: int) -> int:
        """Tensor axis holding ensemble ``m``."""
        self.check_ensemble(m)
        return self.M - 1 - m

    def check_ensemble(self, m: int) -> None:
        if not (0 <= m < self.M):
            raise IndexError(f"ensemble index {m} out of range for M={self.M}")


def encode_config(k: Sequence[int], dims: EnsembleDims) -> int:
    """Flat index of the occupation vector ``k`` (ensemble 0 fastest-varying)."""
    if len(k) != dims.M:
        raise ValueError(f"configuration has length {len(k)}, expected M={dims.M}")
    index = 0
    for m in reversed(range(dims.M)):
        km = int(k[m])
        if not 0 <= km <= dims.N:
            raise ValueError(f"k[{m}] = {km} outside [0, {dims.N}]")
        index = index * (dims.N + 1) + km
    return index


def decode_config(index: int, dims: EnsembleDims) -> tuple[int, ...]:
    if not 0 <= index < dims.D:
        raise ValueError(f"index {index} outside [0, {dims.D})")
    k = []
    for _ in range(dims.M):
        index, km = divmod(index, dims.N + 1)
        k.append(km)
    return tuple(k)


def config_table(dims: EnsembleDims) -> np.ndarray:
    """All occupation vectors as a (D, M) integer array, row i decoding flat index i."""
    idx = np.arange(dims.D)
    radix = (dims.N + 1) ** np.arange(dims.M)
    return (idx[:, None] // radix[None, :]) % (dims.N + 1)


@lru_cache(maxsize=64)
def _sz_values(N: int, M: int, m: int) -> np.ndarray:
    """Eigenvalue 2k_m - N of S^z_m for every flat index."""
    D = (N + 1) ** M
    k = (np.arange(D) // (N + 1) ** m) % (N + 1)
    out = (2 * k - N).astype(np.float64)
    out.setflags(write=False)
    return out


def sz_values(dims: EnsembleDims, m: int) -> np.ndarray:
    dims.check_ensemble(m)
    return _sz_values(dims.N, dims.M, m)


@dataclass
class StateVector:
    dims: EnsembleDims
    amp: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.amp = np.asarray(self.amp, dtype=np.complex128)
        if self.amp.shape != (self.dims.D,):
            raise ValueError(f"amplitude array has shape {self.amp.shape}, expected ({self.dims.D},)")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))

    def copy(self) -> "StateVector":
        return StateVector(self.dims, self.amp.copy())

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>."""
        if other.dims != self.dims:
            raise ValueError("states have different dimensions")
        return complex(np.vdot(self.amp, other.amp))


def make_initial_state(dims: EnsembleDims) -> StateVector:
    """Spin coherent state |k=N>^M, i.e. every qubit in |0>."""
    amp = np.zeros(dims.D, dtype=np.complex128)
    amp[-1] = 1.0
    return StateVector(dims, amp)


def basis_state(dims: EnsembleDims, k: Sequence[int]) -> StateVector:
    amp = np.zeros(dims.D, dtype=np.complex128)
    amp[encode_config(k, dims)] = 1.0
    return StateVector(dims, amp)


# ---------------------------------------------------------------------------
# single-ensemble spin operators and rotations
# ---------------------------------------------------------------------------


def _ladder(N: int) -> np.ndarray:
    # <k+1| a^dag b |k> for k = 0..N-1
    k = np.arange(N, dtype=np.float64)
    return np.sqrt((N - k) * (k + 1))


def spin_operator_matrix(N: int, axis: str) -> np.ndarray:
    """Collective spin operator S^axis = sum of Pauli matrices, in the Fock basis.

    S^x = a^dag b + b^dag a, S^y = -i a^dag b + i b^dag a, S^z = a^dag a - b^dag b.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if axis == "z":
        return np.diag(2.0 * np.arange(N + 1) - N).astype(np.complex128)
    off = _ladder(N)
    if axis == "x":
        S = np.diag(off, -1) + np.diag(off, 1)
        return S.astype(np.complex128)
    if axis == "y":
        return np.diag(-1j * off, -1) + np.diag(1j * off, 1)
    raise ValueError(f"unknown axis {axis!r}")


@lru_cache(maxsize=32)
def _sx_eigensystem(N: int) -> tuple[np.ndarray, np.ndarray]:
    w, v = eigh_tridiagonal(np.zeros(N + 1), _ladder(N))
    return w, v


def _y_from_x_phases(N: int) -> np.ndarray:
    # S^y = P S^x P^dag with P = diag((-i)^k)
    return (-1j) ** np.arange(N + 1)


@dataclass(frozen=True)
class RotationMatrix:
    N: int
    axis: str
    angle: float
    entries: np.ndarray = field(repr=False, compare=False)


@lru_cache(maxsize=256)
def _rotation(N: int, axis: str, angle: float) -> RotationMatrix:
    if axis == "z":
        U = np.diag(np.exp(-1j * angle * (2.0 * np.arange(N + 1) - N)))
    elif axis in ("x", "y"):
        w, v = _sx_eigensystem(N)
        U = (v * np.exp(-1j * angle * w)) @ v.T
        if axis == "y":
            p = _y_from_x_phases(N)
            U = p[:, None] * U * p.conj()[None, :]
    else:
        raise ValueError(f"unknown axis {axis!r}")
    U = np.ascontiguousarray(U, dtype=np.complex128)
    U.setflags(write=False)
    return RotationMatrix(N, axis, angle, U)


def rotation_matrix(N: int, axis: str, angle: float) -> RotationMatrix:
    """exp(-i S^axis angle) for one ensemble of N qubits (cached).

    Built from the eigendecomposition of the tridiagonal S^x; S^y is reached by the
    diagonal phase map P = diag((-i)^k) and S^z is diagonal already.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if (N + 1) ** 2 > MAX_STATE_DIM:
        raise CapacityError(f"rotation matrix for N={N} exceeds memory cap")
    return _rotation(int(N), axis, float(angle))


def y_quarter_turn_closed_form(N: int) -> np.ndarray:
    """<k| exp(-i S^y pi/4) |k'> from the explicit factorial sum.

    Every factorial is handled as lgamma with the alternating sign tracked
    separately, so nothing overflows, but the alternating sum still cancels:
    agreement with :func:`rotation_matrix` is about 1e-11 at N = 30 and only
    1e-3 by N = 80.  Independent of the eigendecomposition; kept as a check.
    """
    lf = [math.lgamma(n + 1) for n in range(N + 1)]
    out = np.zeros((N + 1, N + 1))
    for k in range(N + 1):
        for kp in range(N + 1):
            prefactor = 0.5 * (lf[kp] + lf[N - kp] + lf[k] + lf[N - k]) - 0.5 * N * math.log(2)
            terms = []
            for n in range(max(0, k - kp), min(k, N - kp) + 1):
                log_den = lf[k - n] + lf[N - kp - n] + lf[n] + lf[kp - k + n]
                sign = -1.0 if n % 2 else 1.0
                terms.append(sign * math.exp(prefactor - log_den))
            out[k, kp] = math.fsum(terms)
    return out


# the three fixed gates of the random circuit and the Hadamard building blocks
X_HALF_ANGLE = math.pi / 4
Y_HALF_ANGLE = math.pi / 4
Z_QUARTER_ANGLE = math.pi / 8
HADAMARD_ANGLE = math.pi / 4


def x_half(N: int) -> RotationMatrix:
    return rotation_matrix(N, "x", X_HALF_ANGLE)


def y_half(N: int) -> RotationMatrix:
    return rotation_matrix(N, "y", Y_HALF_ANGLE)


def z_quarter(N: int) -> RotationMatrix:
    return rotation_matrix(N, "z", Z_QUARTER_ANGLE)


def hadamard_factors(N: int) -> tuple[RotationMatrix, RotationMatrix, RotationMatrix]:
    """(U^x, U^z, U^x) in application order; their product is H^{(x)N} up to phase.

    The qubit-level Hadamard needs pi/2 rotations of each spin-1/2, which is
    exp(-i S^alpha pi/4) with S = sum of Pauli matrices.
    """
    ux = rotation_matrix(N, "x", HADAMARD_ANGLE)
    uz = rotation_matrix(N, "z", HADAMARD_ANGLE)
    return ux, uz, ux


# ---------------------------------------------------------------------------
# gate application
# ---------------------------------------------------------------------------


def apply_matrix(state: StateVector, m: int, U: np.ndarray) -> StateVector:
    """Contract an (N+1)x(N+1) matrix with the amplitude tensor along ensemble ``m``."""
    dims = state.dims
    ax = dims.axis(m)
    t = state.amp.reshape(dims.shape)
    t = np.moveaxis(np.tensordot(U, t, axes=(1, ax)), 0, ax)
    return StateVector(dims, t.reshape(-1))


def apply_rotation(state: StateVector, m: int, rot: RotationMatrix) -> StateVector:
    if rot.N != state.dims.N:
        raise ValueError(f"rotation built for N={rot.N}, state has N={state.dims.N}")
    state.dims.check_ensemble(m)
    if rot.axis == "z":
        phases = np.exp(-1j * rot.angle * sz_values(state.dims, m))
        return StateVector(state.dims, state.amp * phases)
    return apply_matrix(state, m, rot.entries)


def apply_x_half(state: StateVector, m: int) -> StateVector:
    return apply_rotation(state, m, x_half(state.dims.N))


def apply_y_half(state: StateVector, m: int) -> StateVector:
    return apply_rotation(state, m, y_half(state.dims.N))


def apply_z_quarter(state: StateVector, m: int) -> StateVector:
    return apply_rotation(state, m, z_quarter(state.dims.N))


def apply_hadamard(state: StateVector, m: int) -> StateVector:
    for rot in hadamard_factors(state.dims.N):
        state = apply_rotation(state, m, rot)
    return state


def apply_hadamard_layer(state: StateVector) -> StateVector:
    for m in range(state.dims.M):
        state = apply_hadamard(state, m)
    return state


def _diagonal(state: StateVector, exponent: np.ndarray) -> StateVector:
    return StateVector(state.dims, state.amp * np.exp(-1j * exponent))


def apply_spin_product_phase(state: StateVector, indices: Sequence[int], angle: float) -> StateVector:
    """exp(-i angle prod_j S^z_{indices[j]}); repeated indices are allowed."""
    prod = np.ones(state.dims.D)
    for m in indices:
        prod = prod * sz_values(state.dims, m)
    return _diagonal(state, angle * prod)


def apply_global_squeeze(state: StateVector, xi: float) -> StateVector:
    """exp(-i (sum_m S^z_m)^2 xi)."""
    total = sum(sz_values(state.dims, m) for m in range(state.dims.M))
    return _diagonal(state, xi * total**2)


def apply_local_squeeze(state: StateVector, m: int, xi: float) -> StateVector:
    return _diagonal(state, xi * sz_values(state.dims, m) ** 2)


def _check_distinct(dims: EnsembleDims, indices: Sequence[int]) -> None:
    for m in indices:
        dims.check_ensemble(m)
    if len(set(indices)) != len(indices):
        raise ValueError(f"ensemble indices must be distinct, got {tuple(indices)}")


def apply_pairwise_squeeze(state: StateVector, n: int, m: int, xi: float) -> StateVector:
    """exp(-i (S^z_n + S^z_m)^2 xi)."""
    _check_distinct(state.dims, (n, m))
    s = sz_values(state.dims, n) + sz_values(state.dims, m)
    return _diagonal(state, xi * s**2)


def apply_two_ensemble_T(state: StateVector, n: int, m: int, xi: float) -> StateVector:
    """exp(-i S^z_n S^z_m xi)."""
    _check_distinct(state.dims, (n, m))
    return apply_spin_product_phase(state, (n, m), xi)


def apply_three_ensemble_R(state: StateVector, l: int, m: int, n: int, chi: float) -> StateVector:
    """exp(-i S^z_l S^z_m S^z_n chi)."""
    _check_distinct(state.dims, (l, m, n))
    return apply_spin_product_phase(state, (l, m, n), chi)


# ---------------------------------------------------------------------------
# primitive gate records, used for synthesized sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gate:
    """One primitive operation.

    ``kind`` is one of ``rx``, ``ry``, ``rz`` (collective rotation by ``param``),
    ``q`` (local squeeze), ``q_pair``, ``q_global``, ``t`` or ``r``.
    """

    kind: str
    targets: tuple[int, ...]
    param: float


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    kind, tg, p = gate.kind, gate.targets, gate.param
    if kind in ("rx", "ry", "rz"):
        return apply_rotation(state, tg[0], rotation_matrix(state.dims.N, kind[1], p))
    if kind == "q":
        return apply_local_squeeze(state, tg[0], p)
    if kind == "q_pair":
        return apply_pairwise_squeeze(state, tg[0], tg[1], p)
    if kind == "q_global":
        return apply_global_squeeze(state, p)
    if kind == "t":
        return apply_two_ensemble_T(state, tg[0], tg[1], p)
    if kind == "r":
        return apply_three_ensemble_R(state, tg[0], tg[1], tg[2], p)
    raise ValueError(f"unknown gate kind {kind!r}")


def apply_gates(state: StateVector, gates: Sequence[Gate]) -> StateVector:
    """Apply ``gates`` in list order (first element acts first)."""
    for g in gates:
        state = apply_gate(state, g)
    return state


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------


def measurement_probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amp) ** 2


def sample_outcomes(probs: np.ndarray, shot_count: int, rng_seed: int, dims: EnsembleDims) -> np.ndarray:
    """Draw ``shot_count`` Fock configurations by inverse-CDF sampling.

    Returns a (shot_count, M) integer array.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (dims.D,):
        raise ValueError(f"probability vector has shape {probs.shape}, expected ({dims.D},)")
    if np.any(probs < -1e-12) or abs(probs.sum() - 1.0) > 1e-6:
        raise ValueError("probabilities must be non-negative and sum to 1 within 1e-6")
    rng = np.random.default_rng(rng_seed)
    cdf = np.cumsum(np.clip(probs, 0.0, None))
    cdf /= cdf[-1]
    u = rng.random(shot_count)
    flat = np.minimum(np.searchsorted(cdf, u, side="right"), dims.D - 1)
    radix = (dims.N + 1) ** np.arange(dims.M)
    return (flat[:, None] // radix[None, :]) % (dims.N + 1)
