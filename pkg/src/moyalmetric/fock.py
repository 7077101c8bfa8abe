"""Truncated Fock-space model of the Moyal quantum plane.

The plane has two coordinate operators q1, q2 with [q1, q2] = i*theta.
Everything is represented on the first ``trunc_dim`` harmonic-oscillator
number levels; the ladder operator is normalized so that
a|n> = lambda_p*sqrt(n)|n-1> with lambda_p = sqrt(theta), which gives
[a, a*] = theta on the interior block.

Truncation corrupts the top rows/columns of commutators, so every context
carries an ``edge_guard``: the number of top levels excluded from interior
accuracy statements.  States are required to keep their weight on the
guarded levels below ``leakage_bound``; the ``leakage`` functional makes
that error auditable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "ContextMismatchError",
    "FockContext",
    "LeakageError",
    "Operator",
    "QState",
    "annihilation",
    "coherent_state",
    "creation",
    "displace",
    "displacement_operator",
    "eigenstate",
    "evaluate",
    "hamiltonian",
    "identity",
    "leakage",
    "make_context",
    "mixed_state",
    "quadratures",
    "superposition_state",
    "uncertainty_product",
    "vacuum_projector",
]


class LeakageError(ValueError):
    """A state carries too much weight on the guarded top levels."""


class ContextMismatchError(ValueError):
    """Operands built over different contexts were combined."""


@dataclass(frozen=True)
class FockContext:
    """Ambient configuration: truncation, deformation scale and tolerances.

    theta = lambda_p**2 carries squared-length units; with theta = 1 all
    lengths are expressed in lambda_p units.
    """

    trunc_dim: int
    theta: float = 1.0
    tol: float = 1e-10
    edge_guard: int | None = None
    leakage_bound: float = 1e-10

    def __post_init__(self) -> None:
        if self.edge_guard is None:
            object.__setattr__(self, "edge_guard", max(2, self.trunc_dim // 8))
        if int(self.trunc_dim) != self.trunc_dim or self.trunc_dim < 8:
            raise ValueError(f"trunc_dim must be an integer >= 8, got {self.trunc_dim}")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.edge_guard < 2 or self.edge_guard >= self.trunc_dim / 2:
            raise ValueError(
                f"edge_guard must satisfy 2 <= g < trunc_dim/2, got {self.edge_guard}"
            )
        if not self.leakage_bound > 0:
            raise ValueError(f"leakage_bound must be positive, got {self.leakage_bound}")

    @property
    def lambda_p(self) -> float:
        return math.sqrt(self.theta)

    @property
    def interior_dim(self) -> int:
        """Number of levels below the guarded edge."""
        return self.trunc_dim - self.edge_guard


def make_context(trunc_dim: int, theta: float, tol: float = 1e-10) -> FockContext:
    """Validated context; edge_guard defaults to max(2, trunc_dim // 8)."""
    return FockContext(trunc_dim=trunc_dim, theta=theta, tol=tol)


def _read_only(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Operator:
    """Complex matrix in the number basis, with its context attached.

    When ``hermitian`` is set the constructor asserts self-adjointness
    within ctx.tol (relative to the matrix scale).
    """

    ctx: FockContext
    mat: np.ndarray
    hermitian: bool = False

    def __post_init__(self) -> None:
        n = self.ctx.trunc_dim
        mat = _read_only(self.mat)
        if mat.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got shape {mat.shape}")
        if not np.all(np.isfinite(mat.view(float))):
            raise ValueError("operator entries must be finite")
        object.__setattr__(self, "mat", mat)
        if self.hermitian:
            scale = max(1.0, float(np.abs(mat).max()))
            defect = float(np.abs(mat - mat.conj().T).max())
            if defect > self.ctx.tol * scale:
                raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")

    def adjoint(self) -> "Operator":
        return Operator(self.ctx, self.mat.conj().T, hermitian=self.hermitian)

    def __matmul__(self, other: "Operator") -> "Operator":
        _require_same_ctx(self.ctx, other.ctx)
        return Operator(self.ctx, self.mat @ other.mat)

    def __add__(self, other: "Operator") -> "Operator":
        _require_same_ctx(self.ctx, other.ctx)
        return Operator(self.ctx, self.mat + other.mat)

    def __sub__(self, other: "Operator") -> "Operator":
        _require_same_ctx(self.ctx, other.ctx)
        return Operator(self.ctx, self.mat - other.mat)

    def __rmul__(self, scalar: complex) -> "Operator":
        return Operator(self.ctx, complex(scalar) * self.mat)


def _require_same_ctx(a: FockContext, b: FockContext) -> None:
    if a != b:
        raise ContextMismatchError(f"context mismatch: {a} vs {b}")


def annihilation(ctx: FockContext) -> Operator:
    """Ladder operator a with a|n> = lambda_p*sqrt(n)|n-1>."""
    n = ctx.trunc_dim
    sub = ctx.lambda_p * np.sqrt(np.arange(1, n))
    return Operator(ctx, np.diag(sub, k=1))


def creation(ctx: FockContext) -> Operator:
    return annihilation(ctx).adjoint()


def identity(ctx: FockContext) -> Operator:
    return Operator(ctx, np.eye(ctx.trunc_dim), hermitian=True)


def vacuum_projector(ctx: FockContext) -> Operator:
    mat = np.zeros((ctx.trunc_dim, ctx.trunc_dim))
    mat[0, 0] = 1.0
    return Operator(ctx, mat, hermitian=True)


def quadratures(ctx: FockContext) -> tuple[Operator, Operator]:
    """Coordinate operators q1 = (a + a*)/sqrt(2), q2 = (a - a*)/(i sqrt(2)).

    On the interior block [q1, q2] = i*theta.
    """
    a = annihilation(ctx).mat
    ad = a.conj().T
    q1 = (a + ad) / math.sqrt(2)
    q2 = (a - ad) / (1j * math.sqrt(2))
    return (Operator(ctx, q1, hermitian=True), Operator(ctx, q2, hermitian=True))


def hamiltonian(ctx: FockContext) -> Operator:
    """Oscillator energy (q1^2 + q2^2)/2, assembled as a*a + (theta/2) I.

    The assembled form keeps the diagonal exactly theta*(m + 1/2) for every
    level m < trunc_dim; squaring the quadratures instead would corrupt the
    top entry.
    """
    a = annihilation(ctx).mat
    mat = a.conj().T @ a + (ctx.theta / 2) * np.eye(ctx.trunc_dim)
    return Operator(ctx, mat, hermitian=True)


def displacement_operator(ctx: FockContext, kappa: complex) -> Operator:
    """Unitary U(kappa) = exp((kappa a* - conj(kappa) a) / (sqrt(2) theta)).

    The scale is calibrated so that the parameter is the Euclidean
    translation amplitude: conjugating by U(kappa) shifts <q1> by Re kappa
    and <q2> by Im kappa, and the ground state displaced by
    sqrt(2)*lambda_p*kappa is the coherent state of label kappa.
    """
    kappa = complex(kappa)
    n = ctx.trunc_dim
    if kappa == 0:
        return Operator(ctx, np.eye(n))
    a = annihilation(ctx).mat
    gen = (kappa * a.conj().T - np.conj(kappa) * a) / (math.sqrt(2) * ctx.theta)
    # gen is anti-Hermitian; exponentiate through the Hermitian matrix i*gen
    # so U comes out exactly unitary (up to roundoff).
    w, v = np.linalg.eigh(1j * gen)
    u = (v * np.exp(-1j * w)) @ v.conj().T
    return Operator(ctx, u)


class QState:
    """Density matrix with positivity/trace invariants and a construction tag.

    Tags are nested tuples mirroring the constructors:
    ("eigen", m) | ("coherent", kappa) | ("translated", base_tag, kappa) |
    ("super", indices, coeffs) | ("mix", weights, tags).
    """

    __slots__ = ("ctx", "rho", "tag", "vector", "__dict__")

    def __init__(
        self,
        ctx: FockContext,
        rho: np.ndarray,
        tag: tuple,
        vector: np.ndarray | None = None,
    ) -> None:
        n = ctx.trunc_dim
        rho = _read_only(rho)
        if rho.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} density matrix, got {rho.shape}")
        scale = max(1.0, float(np.abs(rho).max()))
        if float(np.abs(rho - rho.conj().T).max()) > ctx.tol * scale:
            raise ValueError("density matrix is not Hermitian within tol")
        if abs(np.trace(rho).real - 1.0) > ctx.tol or abs(np.trace(rho).imag) > ctx.tol:
            raise ValueError(f"density matrix trace {np.trace(rho)} != 1 within tol")
        eigs = np.linalg.eigvalsh(rho)
        if eigs[0] < -ctx.tol:
            raise ValueError(f"density matrix has negative eigenvalue {eigs[0]:.3e}")
        if vector is not None:
            vector = _read_only(vector)
            purity_defect = float(np.abs(rho @ rho - rho).max())
            if purity_defect > 10 * ctx.tol:
                raise ValueError(f"pure-state tag but rho^2 != rho ({purity_defect:.3e})")
        self.ctx = ctx
        self.rho = rho
        self.tag = tag
        self.vector = vector
        leak = self.leakage()
        if leak > ctx.leakage_bound:
            raise LeakageError(
                f"state weight {leak:.3e} on the top {ctx.edge_guard} levels "
                f"exceeds the leakage bound {ctx.leakage_bound:.1e}"
            )

    def leakage(self) -> float:
        """Weight on the guarded top edge_guard levels."""
        m = self.ctx.interior_dim
        if self.vector is not None:
            return float(np.sum(np.abs(self.vector[m:]) ** 2))
        return float(np.trace(self.rho[m:, m:]).real)

    @cached_property
    def family(self) -> tuple[int, complex] | None:
        """(m, mu) when the state is eigenstate m translated by mu, else None.

        Coherent states are the translated ground state, translation
        sqrt(2)*lambda_p*kappa.  Used for closed-form dispatch.
        """
        return _family_of(self.tag, self.ctx)

    @cached_property
    def mean_ladder(self) -> complex:
        """Tr(rho a), cached because square-length sweeps evaluate it per pair."""
        a = annihilation(self.ctx).mat
        if self.vector is not None:
            return complex(self.vector.conj() @ (a @ self.vector))
        return complex(np.trace(self.rho @ a))

    @cached_property
    def mean_energy(self) -> float:
        h = hamiltonian(self.ctx).mat
        if self.vector is not None:
            val = complex(self.vector.conj() @ (h @ self.vector))
        else:
            val = complex(np.trace(self.rho @ h))
        return float(val.real)

    def __repr__(self) -> str:
        return f"QState(tag={self.tag!r}, N={self.ctx.trunc_dim})"


def _family_of(tag: tuple, ctx: FockContext) -> tuple[int, complex] | None:
    kind = tag[0]
    if kind == "eigen":
        return (tag[1], 0j)
    if kind == "coherent":
        return (0, math.sqrt(2) * ctx.lambda_p * complex(tag[1]))
    if kind == "translated":
        base = _family_of(tag[1], ctx)
        if base is None:
            return None
        m, mu = base
        return (m, mu + complex(tag[2]))
    if kind == "super" and len(tag[1]) == 1:
        return (tag[1][0], 0j)
    if kind == "mix" and len(tag[2]) == 1:
        return _family_of(tag[2][0], ctx)
    return None


def _pure_state(ctx: FockContext, vector: np.ndarray, tag: tuple) -> QState:
    vector = np.asarray(vector, dtype=complex)
    rho = np.outer(vector, vector.conj())
    return QState(ctx, rho, tag, vector=vector)


def eigenstate(ctx: FockContext, m: int) -> QState:
    """Number state |m><m|; m must stay below the guarded edge."""
    if int(m) != m or not 0 <= m < ctx.interior_dim:
        raise ValueError(
            f"eigenstate index must satisfy 0 <= m < {ctx.interior_dim}, got {m}"
        )
    v = np.zeros(ctx.trunc_dim, dtype=complex)
    v[int(m)] = 1.0
    return _pure_state(ctx, v, ("eigen", int(m)))


def coherent_state(ctx: FockContext, kappa: complex) -> QState:
    """Coherent state with amplitudes exp(-|k|^2/2) k^n / sqrt(n!).

    Satisfies a|kappa> = lambda_p*kappa|kappa> up to leakage.  Rejects
    labels whose Poisson tail beyond the interior block exceeds the
    leakage bound.
    """
    kappa = complex(kappa)
    n = ctx.trunc_dim
    # Poisson weights |c_n|^2, built iteratively for numerical stability.
    mean = abs(kappa) ** 2
    weights = np.empty(n)
    weights[0] = math.exp(-mean)
    for k in range(1, n):
        weights[k] = weights[k - 1] * mean / k
    tail = 1.0 - float(np.sum(weights[: ctx.interior_dim]))
    if tail > ctx.leakage_bound:
        raise LeakageError(
            f"coherent label |kappa|={abs(kappa):.3f} leaks {tail:.3e} past the "
            f"interior block at trunc_dim={n}"
        )
    amps = np.sqrt(weights).astype(complex)
    if kappa != 0:
        phases = np.ones(n, dtype=complex)
        unit = kappa / abs(kappa)
        for k in range(1, n):
            phases[k] = phases[k - 1] * unit
        amps = amps * phases
    amps = amps / math.sqrt(float(np.sum(np.abs(amps) ** 2)))
    return _pure_state(ctx, amps, ("coherent", kappa))


def displace(state: QState, kappa: complex) -> QState:
    """Translate a state by kappa (length units): rho -> U rho U*.

    The translated ground state with kappa = sqrt(2)*lambda_p*k reproduces
    coherent_state(k) in trace distance up to leakage.
    """
    kappa = complex(kappa)
    if kappa == 0:
        u = None
    else:
        u = displacement_operator(state.ctx, kappa).mat
    tag = ("translated", state.tag, kappa)
    if state.vector is not None:
        v = state.vector if u is None else u @ state.vector
        return _pure_state(state.ctx, v, tag)
    rho = state.rho if u is None else u @ state.rho @ u.conj().T
    return QState(state.ctx, rho, tag)


def superposition_state(ctx: FockContext, indices: list[int], coeffs: list[complex]) -> QState:
    """Normalized superposition sum_i c_i |index_i>, distinct safe indices."""
    idx = [int(i) for i in indices]
    if len(idx) != len(set(idx)):
        raise ValueError(f"superposition indices must be distinct, got {idx}")
    if len(idx) != len(coeffs) or not idx:
        raise ValueError("need one coefficient per index")
    if any(not 0 <= i < ctx.interior_dim for i in idx):
        raise ValueError(f"indices must lie in [0, {ctx.interior_dim}), got {idx}")
    v = np.zeros(ctx.trunc_dim, dtype=complex)
    for i, c in zip(idx, coeffs):
        v[i] = complex(c)
    norm = float(np.linalg.norm(v))
    if norm <= ctx.tol:
        raise ValueError("superposition coefficients are all zero")
    v = v / norm
    tag = ("super", tuple(idx), tuple(complex(c) for c in coeffs))
    return _pure_state(ctx, v, tag)


def mixed_state(states: list[QState], weights: list[float]) -> QState:
    """Convex mixture of states over a common context."""
    if not states or len(states) != len(weights):
        raise ValueError("need one weight per state")
    ctx = states[0].ctx
    for s in states[1:]:
        _require_same_ctx(ctx, s.ctx)
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or w.sum() <= 0:
        raise ValueError(f"weights must be nonnegative with positive sum, got {weights}")
    w = w / w.sum()
    rho = np.zeros((ctx.trunc_dim, ctx.trunc_dim), dtype=complex)
    for wi, s in zip(w, states):
        rho += wi * s.rho
    tag = ("mix", tuple(float(x) for x in w), tuple(s.tag for s in states))
    return QState(ctx, rho, tag)


def evaluate(state: QState, op: Operator) -> complex:
    """State evaluation Tr(rho * mat); real within tol for Hermitian op."""
    _require_same_ctx(state.ctx, op.ctx)
    if state.vector is not None:
        return complex(state.vector.conj() @ (op.mat @ state.vector))
    return complex(np.trace(state.rho @ op.mat))


def leakage(state: QState) -> float:
    return state.leakage()


def uncertainty_product(state: QState) -> float:
    """dq1 * dq2 with dq = sqrt(<q^2> - <q>^2); floor theta/2 for clean states."""
    q1, q2 = quadratures(state.ctx)
    out = 1.0
    for q in (q1, q2):
        mean = evaluate(state, q).real
        mean_sq = evaluate(state, Operator(state.ctx, q.mat @ q.mat)).real
        var = max(mean_sq - mean * mean, 0.0)
        out *= math.sqrt(var)
    return out
