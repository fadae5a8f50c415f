"""Worst-case IQP-style circuit, its gap-function oracle, and gate synthesis.

The circuit H -> R(chi) -> T(xi) -> U^z(theta) -> H maps a binary degree-3
polynomial f(k) onto the probability of the all-|0> outcome,

    p = |sum_sigma (-1)^f(k(sigma))|^2 / 4^(NM),

where k_m counts the up spins of ensemble m.  Grouping microscopic spin
configurations by k turns the 2^(NM) sum into an (N+1)^M sum weighted by
prod_m C(N, k_m).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import (
    EnsembleDims,
    Gate,
    StateVector,
    apply_gates,
    apply_hadamard_layer,
    apply_rotation,
    apply_spin_product_phase,
    basis_state,
    config_table,
    make_initial_state,
    measurement_probabilities,
    rotation_matrix,
)

GAP_CAP = 2**24
NAIVE_CAP = 24  # max N*M for the 2^(NM) enumeration


@dataclass
class PolynomialSpec:
    """Binary coefficients of f(k) = sum a k k k + sum b k k + sum c k over ordered tuples."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.int64)
        self.beta = np.asarray(self.beta, dtype=np.int64)
        self.gamma = np.asarray(self.gamma, dtype=np.int64)
        M = self.gamma.shape[0]
        if self.alpha.shape != (M, M, M) or self.beta.shape != (M, M) or self.gamma.shape != (M,):
            raise ValueError("coefficient shapes must be (M,M,M), (M,M), (M,)")
        for name in ("alpha", "beta", "gamma"):
            arr = getattr(self, name)
            if np.any((arr != 0) & (arr != 1)):
                raise ValueError(f"{name} coefficients must be 0 or 1")

    @property
    def M(self) -> int:
        return self.gamma.shape[0]

    @classmethod
    def zeros(cls, M: int) -> "PolynomialSpec":
        return cls(np.zeros((M, M, M)), np.zeros((M, M)), np.zeros(M))

    @classmethod
    def random(cls, M: int, rng: np.random.Generator, density: float = 0.5) -> "PolynomialSpec":
        return cls(
            rng.random((M, M, M)) < density,
            rng.random((M, M)) < density,
            rng.random(M) < density,
        )

    def to_text(self) -> str:
        """One line per nonzero coefficient, 1-based indices."""
        lines = [f"alpha {a + 1} {b + 1} {c + 1}" for a, b, c in zip(*np.nonzero(self.alpha))]
        lines += [f"beta {a + 1} {b + 1}" for a, b in zip(*np.nonzero(self.beta))]
        lines += [f"gamma {a + 1}" for (a,) in zip(*np.nonzero(self.gamma))]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, M: int) -> "PolynomialSpec":
        spec = cls.zeros(M)
        arity = {"alpha": 3, "beta": 2, "gamma": 1}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            name, *idx = line.split()
            if name not in arity:
                raise ValueError(f"line {lineno}: unknown coefficient {name!r}")
            if len(idx) != arity[name]:
                raise ValueError(f"line {lineno}: {name} takes {arity[name]} indices, got {len(idx)}")
            try:
                ints = [int(i) - 1 for i in idx]
            except ValueError:
                raise ValueError(f"line {lineno}: non-integer index in {raw.strip()!r}") from None
            if any(not 0 <= i < M for i in ints):
                raise ValueError(f"line {lineno}: index out of range 1..{M} in {raw.strip()!r}")
            getattr(spec, name)[tuple(ints)] = 1
        return spec

    @classmethod
    def load(cls, path: str | Path, M: int) -> "PolynomialSpec":
        return cls.from_text(Path(path).read_text(), M)


@dataclass
class WorstCaseParams:
    chi: np.ndarray  # (M, M, M)
    xi: np.ndarray  # (M, M)
    theta: np.ndarray  # (M,)


def eval_f(k, spec: PolynomialSpec):
    """f(k) over full ordered index tuples.  ``k`` may be (M,) or (P, M)."""
    k = np.asarray(k, dtype=np.int64)
    single = k.ndim == 1
    k2 = k[None, :] if single else k
    a, b, g = spec.alpha, spec.beta, spec.gamma
    cubic = np.einsum("abc,pa,pb,pc->p", a, k2, k2, k2)
    quad = np.einsum("ab,pa,pb->p", b, k2, k2)
    lin = k2 @ g
    f = cubic + quad + lin
    return int(f[0]) if single else f


def parity_reduced_f(k, spec: PolynomialSpec):
    """f(k mod 2) mod 2, which equals f(k) mod 2 for integer coefficients."""
    k = np.asarray(k, dtype=np.int64) % 2
    return eval_f(k, spec) % 2


def _signs(spec: PolynomialSpec, configs: np.ndarray) -> np.ndarray:
    return 1 - 2 * parity_reduced_f(configs, spec)


def gap_sum(spec: PolynomialSpec, N: int) -> int:
    """sum_k prod_m C(N, k_m) (-1)^f(k), in exact integer arithmetic."""
    M = spec.M
    if (N + 1) ** M > GAP_CAP:
        raise ValueError(f"(N+1)^M = {(N + 1) ** M} exceeds the gap-sum cap {GAP_CAP}")
    dims = EnsembleDims(N, M)
    configs = config_table(dims)
    binom = np.array([math.comb(N, k) for k in range(N + 1)], dtype=object)
    weights = np.ones(dims.D, dtype=object)
    for m in range(M):
        weights = weights * binom[configs[:, m]]
    return int(np.sum(weights * _signs(spec, configs).astype(object)))


def naive_gap_sum(spec: PolynomialSpec, N: int) -> int:
    """sum over all 2^(NM) spin configurations of (-1)^f(k(sigma))."""
    M = spec.M
    if N * M > NAIVE_CAP:
        raise ValueError(f"N*M = {N * M} exceeds the naive enumeration cap {NAIVE_CAP}")
    total = 0
    bits = np.arange(2**N, dtype=np.int64)
    up = np.array([bin(int(b)).count("1") for b in bits])  # k for each single-ensemble pattern
    # iterate over patterns of all ensembles but the first, vectorize the first
    for rest in itertools.product(range(2**N), repeat=M - 1):
        k = np.empty((2**N, M), dtype=np.int64)
        k[:, 0] = up
        for m, pattern in enumerate(rest, start=1):
            k[:, m] = up[pattern]
        total += int(np.sum(1 - 2 * (eval_f(k, spec) % 2)))
    return total


def gap_probability_bruteforce(spec: PolynomialSpec, dims: EnsembleDims) -> float:
    """|gap sum|^2 / 4^(NM)."""
    if dims.M != spec.M:
        raise ValueError("polynomial and ensemble counts differ")
    s = gap_sum(spec, dims.N)
    return float(Fraction(s * s, 4 ** (dims.N * dims.M)))


def params_from_poly(spec: PolynomialSpec, N: int) -> WorstCaseParams:
    """Gate angles that make the worst-case circuit's phase equal pi f(k) up to a constant."""
    a = spec.alpha.astype(np.float64)
    b = spec.beta.astype(np.float64)
    g = spec.gamma.astype(np.float64)
    chi = math.pi * a / 8
    # sum_m (a[p,q,m] + a[p,m,q] + a[m,q,p])
    xi = N * math.pi / 8 * (
        np.einsum("pqm->pq", a) + np.einsum("pmq->pq", a) + np.einsum("mqp->pq", a)
    ) + math.pi * b / 4
    theta = (
        N**2 * math.pi / 8 * (np.einsum("pmn->p", a) + np.einsum("mpn->p", a) + np.einsum("mnp->p", a))
        + N * math.pi / 4 * (b.sum(axis=1) + b.sum(axis=0))
        + g * math.pi / 2
    )
    return WorstCaseParams(chi, xi, theta)


def worst_case_state(spec: PolynomialSpec, dims: EnsembleDims) -> StateVector:
    if dims.M != spec.M:
        raise ValueError("polynomial and ensemble counts differ")
    params = params_from_poly(spec, dims.N)
    state = apply_hadamard_layer(make_initial_state(dims))
    for idx in zip(*np.nonzero(params.chi)):
        state = apply_spin_product_phase(state, idx, params.chi[idx])
    for idx in zip(*np.nonzero(params.xi)):
        state = apply_spin_product_phase(state, idx, params.xi[idx])
    for m, th in enumerate(params.theta):
        if th:
            state = apply_rotation(state, m, rotation_matrix(dims.N, "z", th))
    return apply_hadamard_layer(state)


def build_and_simulate_worst_case(spec: PolynomialSpec, dims: EnsembleDims) -> float:
    """Probability of the all-|0> outcome k = (N, ..., N) after the worst-case circuit.

    Repeated-index terms (e.g. a coefficient on k_1 k_1 k_2) become the
    corresponding diagonal spin-product phases.
    """
    return float(measurement_probabilities(worst_case_state(spec, dims))[-1])


# ---------------------------------------------------------------------------
# gate synthesis
# ---------------------------------------------------------------------------


def synthesize_T(n: int, m: int, xi: float) -> list[Gate]:
    """T_nm(xi) = Q_nm(xi/2) Q_n(-xi/2) Q_m(-xi/2); all three commute."""
    if n == m:
        raise ValueError("T needs two distinct ensembles")
    if xi == 0:
        return []
    return [Gate("q", (m,), -xi / 2), Gate("q", (n,), -xi / 2), Gate("q_pair", (n, m), xi / 2)]


def _conjugated_zz(rot_axis: str, rot_angle: float, n: int, other: int, s: float) -> list[Gate]:
    """exp(i s S^a_n S^z_other) with S^a_n = V S^z_n V^dag, V = exp(-i S^rot_axis rot_angle)."""
    # V exp(-i (-s) S^z_n S^z_o) V^dag, applied right to left
    return (
        [Gate("r" + rot_axis, (n,), -rot_angle)]
        + synthesize_T(n, other, -s)
        + [Gate("r" + rot_axis, (n,), rot_angle)]
    )


def _exp_i_A(n: int, m: int, s: float) -> list[Gate]:
    # A = S^x_n S^z_m;  exp(-i S^y pi/4) S^z exp(i S^y pi/4) = S^x
    return _conjugated_zz("y", math.pi / 4, n, m, s)


def _exp_i_B(n: int, l: int, s: float) -> list[Gate]:
    # B = S^y_n S^z_l;  exp(i S^x pi/4) S^z exp(-i S^x pi/4) = S^y
    return _conjugated_zz("x", -math.pi / 4, n, l, s)


def synthesize_R_commutator(l: int, m: int, n: int, chi: float, steps: int) -> list[Gate]:
    """Approximate R_lmn(chi) = exp(-i chi S^z_l S^z_m S^z_n) by a group commutator.

    With A = S^x_n S^z_m and B = S^y_n S^z_l, [A, B] = 2i S^z_n S^z_m S^z_l, and
    (e^{-iBs} e^{-iAs} e^{iBs} e^{iAs})^steps -> e^{[A,B] t}, s = sqrt(t/steps).
    The sign of chi is absorbed into B so that t = |chi|/2 >= 0.
    Ensemble ``n`` is the one rotated; the returned list is in application order.

    Higher orders follow the same pattern and are not implemented: rotating
    ensemble n of a synthesized degree-d product turns S^z_n into S^x_n or
    S^y_n, and the commutator of two such products is a degree-(d+1) product.
    """
    if len({l, m, n}) != 3:
        raise ValueError("R needs three distinct ensembles")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if chi == 0:
        return []
    t = abs(chi) / 2
    s = math.sqrt(t / steps)
    c = -math.copysign(1.0, chi)  # B' = c B so that t [A, B'] = -i chi SSS
    step = (
        _exp_i_A(n, m, s)
        + _exp_i_B(n, l, c * s)
        + _exp_i_A(n, m, -s)
        + _exp_i_B(n, l, -c * s)
    )
    return step * steps


def sequence_error(gates: Sequence[Gate], target, dims: EnsembleDims) -> float:
    """max over Fock basis inputs of || gates(|k>) - target(|k>) ||_2.

    ``target`` is a callable StateVector -> StateVector.
    """
    worst = 0.0
    for k in config_table(dims):
        psi = basis_state(dims, k)
        d = np.linalg.norm(apply_gates(psi, gates).amp - target(psi).amp)
        worst = max(worst, float(d))
    return worst
