"""Length operator on the doubled Fock space and derived length functionals.

The square length lives on the tensor product of two copies of the
truncated oscillator space:

    L2 = 2 * (H (x) I + I (x) H - a (x) a* - a* (x) a)

Pair states evaluate it to the quantum square length; its operator square
root evaluates to the quantum length.  Because the ladder matrix is real
in the number basis, L2 is a real symmetric matrix and all spectral work
stays in float64.

A subtracted "modified" square length can be computed state-by-state, but
no single operator reproduces it; `counterexample_L2prime` quantifies the
obstruction on superpositions of well-separated levels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .fock import (
    FockContext,
    QState,
    _require_same_ctx,
    annihilation,
    eigenstate,
    hamiltonian,
    superposition_state,
)

__all__ = [
    "CounterexampleResult",
    "LengthOperator",
    "build_length",
    "counterexample_L2prime",
    "d_L",
    "d_L2",
    "modified_length",
]

_MAX_TENSOR_SOURCE_DIM = 96

# One length operator per context; the eigendecomposition at trunc_dim = 64
# costs ~10 s, so results are shared process-wide.  Contexts are frozen
# dataclasses and hash by value.
_CACHE: dict[FockContext, "LengthOperator"] = {}


@dataclass(frozen=True)
class LengthOperator:
    """Square length matrix on the pair space with lazy spectral data.

    ``L2`` is eager; the eigendecomposition behind ``spectrum`` and the
    square root ``L`` runs once on first access and is cached.
    """

    ctx: FockContext
    L2: np.ndarray

    @cached_property
    def _eig(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh(self.L2)
        w.setflags(write=False)
        return w, v

    @property
    def spectrum(self) -> np.ndarray:
        """Ascending eigenvalues of the square length."""
        return self._eig[0]

    @cached_property
    def L(self) -> np.ndarray:
        """Operator square root, with tiny negative eigenvalues clamped.

        The assembled matrix is an exact compression of a nonnegative
        operator, so genuine negatives cannot occur; clamping only guards
        against eigensolver roundoff.
        """
        w, v = self._eig
        if w[0] < -self.ctx.tol:
            raise ArithmeticError(
                f"square length has eigenvalue {w[0]:.3e} below -tol; "
                "the assembly is corrupted"
            )
        root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
        root.setflags(write=False)
        return root


def build_length(ctx: FockContext, max_dim: int = _MAX_TENSOR_SOURCE_DIM) -> LengthOperator:
    """Assemble (or fetch) the square length operator for a context.

    The tensor matrix has trunc_dim**2 rows; ``max_dim`` caps the source
    dimension so an accidental huge context cannot exhaust memory.
    """
    cached = _CACHE.get(ctx)
    if cached is not None:
        return cached
    n = ctx.trunc_dim
    if n > max_dim:
        raise ValueError(
            f"trunc_dim={n} exceeds the tensor budget (max {max_dim}); "
            "the pair-space eigenproblem would need too much memory"
        )
    a = annihilation(ctx).mat.real
    h = hamiltonian(ctx).mat.real
    eye = np.eye(n)
    l2 = 2.0 * (np.kron(h, eye) + np.kron(eye, h) - np.kron(a, a.T) - np.kron(a.T, a))
    l2.setflags(write=False)
    op = LengthOperator(ctx=ctx, L2=l2)
    _CACHE[ctx] = op
    return op


def _pair_trace(s1: QState, s2: QState, tensor: np.ndarray) -> float:
    """trace((rho1 (x) rho2) T) with T given as an n^2 x n^2 real matrix."""
    n = s1.ctx.trunc_dim
    t4 = tensor.reshape(n, n, n, n)
    val = np.einsum("ij,kl,jlik->", s1.rho, s2.rho, t4)
    return float(val.real)


def d_L2(s1: QState, s2: QState) -> float:
    """Quantum square length trace((rho1 (x) rho2) L2).

    Evaluated through the moment identity

        d_L2 = 2*(E1 + E2 - 2*Re(<a>_1 conj(<a>_2))),

    which is the same tensor trace with the product structure carried out
    exactly; it needs no pair-space matrix and is O(N^2) per state with
    the moments cached on the states.
    """
    _require_same_ctx(s1.ctx, s2.ctx)
    cross = (s1.mean_ladder * np.conj(s2.mean_ladder)).real
    return 2.0 * (s1.mean_energy + s2.mean_energy - 2.0 * cross)


def d_L(s1: QState, s2: QState) -> float:
    """Quantum length trace((rho1 (x) rho2) L); at most sqrt(d_L2)."""
    _require_same_ctx(s1.ctx, s2.ctx)
    op = build_length(s1.ctx)
    return _pair_trace(s1, s2, op.L)


def _lambda_inverse_sq(s1: QState, s2: QState) -> float:
    return math.sqrt(d_L2(s1, s1) * d_L2(s2, s2))


def modified_length(s1: QState, s2: QState) -> float:
    """Square root of the square length with its diagonal floor removed.

    Subtracting sqrt(d_L2(s1,s1)*d_L2(s2,s2)) makes the diagonal vanish;
    the absolute value guards roundoff when the subtraction is balanced.
    """
    _require_same_ctx(s1.ctx, s2.ctx)
    return math.sqrt(abs(d_L2(s1, s2) - _lambda_inverse_sq(s1, s2)))


class CounterexampleResult(NamedTuple):
    lhs: float
    rhs: float
    residual: float


def _modified_sq_tensor(op: LengthOperator, s1: QState, s2: QState) -> float:
    """Modified square length evaluated through literal pair-space traces."""
    diag = math.sqrt(_pair_trace(s1, s1, op.L2) * _pair_trace(s2, s2, op.L2))
    return abs(_pair_trace(s1, s2, op.L2) - diag)


def counterexample_L2prime(
    ctx: FockContext, i: int, j: int, k: int, l: int
) -> CounterexampleResult:
    """Obstruction to realizing the modified square length by an operator.

    If some pair-space operator reproduced the modified square length on
    all states, linearity of the trace in rho1 would force

        3*d'(w_ijk, w_l)^2 = 2*sum_pairs d'(w_pq, w_l)^2
                             - sum_singles d'(w_p, w_l)^2

    for equal-weight superpositions w_ijk, w_pq of levels i, j, k with
    pairwise separation >= 2 (separation kills the ladder cross moments,
    making every closed form below exact).  Returns (lhs, rhs, lhs - rhs);
    a residual away from zero certifies that no such operator exists.

    Each closed form is cross-checked against the literal tensor-space
    trace before returning.
    """
    idx = (i, j, k, l)
    if any(int(x) != x or x < 0 for x in idx):
        raise ValueError(f"indices must be nonnegative integers, got {idx}")
    i, j, k, l = (int(x) for x in idx)
    for a_, b_ in ((i, j), (i, k), (i, l), (j, k), (j, l), (k, l)):
        if abs(a_ - b_) < 2:
            raise ValueError(
                f"indices must be pairwise separated by at least 2, got {idx} "
                f"(offending pair {a_}, {b_})"
            )
    if max(idx) >= ctx.interior_dim:
        raise ValueError(
            f"indices must stay below the guarded edge {ctx.interior_dim}, got {idx}"
        )

    def energy(m: int) -> float:
        return ctx.theta * (m + 0.5)

    e_l = energy(l)
    triple_mean = (energy(i) + energy(j) + energy(k)) / 3.0

    def pair_sq(p: int, q: int) -> float:
        return (math.sqrt(energy(p) + energy(q)) - math.sqrt(2.0 * e_l)) ** 2

    def single_sq(p: int) -> float:
        return (math.sqrt(2.0 * energy(p)) - math.sqrt(2.0 * e_l)) ** 2

    triple_sq = (math.sqrt(2.0 * triple_mean) - math.sqrt(2.0 * e_l)) ** 2
    lhs = 3.0 * triple_sq
    rhs = 2.0 * (pair_sq(i, j) + pair_sq(i, k) + pair_sq(j, k)) - (
        single_sq(i) + single_sq(j) + single_sq(k)
    )

    # Dual route: rebuild every modified square through pair-space traces.
    op = build_length(ctx)
    target = eigenstate(ctx, l)
    checks = [
        (triple_sq, superposition_state(ctx, [i, j, k], [1.0, 1.0, 1.0])),
        (pair_sq(i, j), superposition_state(ctx, [i, j], [1.0, 1.0])),
        (pair_sq(i, k), superposition_state(ctx, [i, k], [1.0, 1.0])),
        (pair_sq(j, k), superposition_state(ctx, [j, k], [1.0, 1.0])),
        (single_sq(i), eigenstate(ctx, i)),
        (single_sq(j), eigenstate(ctx, j)),
        (single_sq(k), eigenstate(ctx, k)),
    ]
    for want, state in checks:
        got = _modified_sq_tensor(op, state, target)
        if abs(got - want) > 1e-6:
            raise ArithmeticError(
                f"closed form {want:.9g} disagrees with the tensor trace "
                f"{got:.9g} for state {state.tag!r}"
            )
    return CounterexampleResult(lhs=lhs, rhs=rhs, residual=lhs - rhs)
