"""Oracle tests for the tensor-space length operator.

Expected numbers are recomputed here from first principles (level energies
E_m = theta*(m + 1/2) and the closed forms they imply), never read back
from the implementation.
"""
import math

import numpy as np
import pytest

from moyalmetric import (
    LeakageError,
    displace,
    eigenstate,
    make_context,
    mixed_state,
    superposition_state,
)
from moyalmetric.lengthop import (
    build_length,
    counterexample_L2prime,
    d_L,
    d_L2,
    modified_length,
)


def level_energy(m, theta=1.0):
    return theta * (m + 0.5)


class TestBuildLength:
    def test_minimal_square_length(self, ctx32):
        op = build_length(ctx32)
        # The pair ground state is an exact eigenvector with value 2*theta,
        # and compression of a nonnegative operator cannot dip below it.
        assert op.spectrum[0] == pytest.approx(2.0, abs=1e-9)

    def test_vacuum_pair_matrix_element(self, ctx32):
        op = build_length(ctx32)
        assert op.L2[0, 0] == pytest.approx(2.0, abs=1e-12)

    def test_scale_covariance(self):
        ctx = make_context(32, 4.0, 1e-10)
        op = build_length(ctx)
        assert op.spectrum[0] == pytest.approx(8.0, abs=4e-6)

    def test_spectrum_sorted_and_nonnegative(self, ctx16):
        op = build_length(ctx16)
        assert np.all(np.diff(op.spectrum) >= -1e-12)
        assert op.spectrum[0] > -ctx16.tol

    def test_square_root_squares_back(self, ctx16):
        op = build_length(ctx16)
        scale = float(np.abs(op.L2).max())
        defect = float(np.abs(op.L @ op.L - op.L2).max())
        assert defect < 100 * ctx16.tol * scale

    def test_caching_returns_same_object(self, ctx16):
        assert build_length(ctx16) is build_length(ctx16)

    def test_dimension_guard(self):
        ctx = make_context(128, 1.0, 1e-10)
        with pytest.raises(ValueError):
            build_length(ctx)

    def test_min_eigenvalue_stable_in_n(self, ctx16, ctx32):
        lo = build_length(ctx16).spectrum[0]
        hi = build_length(ctx32).spectrum[0]
        assert lo == pytest.approx(hi, abs=1e-9)


class TestSquareLength:
    def test_vacuum_pair(self, ctx32):
        w0 = eigenstate(ctx32, 0)
        assert d_L2(w0, w0) == pytest.approx(2.0, abs=1e-12)

    def test_eigenstate_displaced_pair(self, ctx32):
        # 2E_1 + 2E_2 + |kappa|^2 = 3 + 5 + 4
        s1 = eigenstate(ctx32, 1)
        s2 = displace(eigenstate(ctx32, 2), 2.0)
        assert d_L2(s1, s2) == pytest.approx(12.0, abs=1e-9)

    def test_closed_form_grid(self, ctx32):
        for m in range(4):
            for n in range(4):
                for kap in (0.0, 0.5 + 0.5j, -1.0 + 0.25j):
                    s1 = eigenstate(ctx32, m)
                    s2 = displace(eigenstate(ctx32, n), kap)
                    want = 2 * level_energy(m) + 2 * level_energy(n) + abs(kap) ** 2
                    assert d_L2(s1, s2) == pytest.approx(want, abs=1e-9)

    def test_translation_invariance(self, ctx32):
        delta = 0.75 - 0.5j
        vals = []
        for mu in (0.0, 0.5j, -1.0 + 0.25j):
            s1 = displace(eigenstate(ctx32, 1), mu)
            s2 = displace(eigenstate(ctx32, 3), mu + delta)
            vals.append(d_L2(s1, s2))
        assert max(vals) - min(vals) < 1e-8

    def test_symmetry(self, ctx32):
        s1 = displace(eigenstate(ctx32, 2), 0.3 + 0.1j)
        s2 = superposition_state(ctx32, [0, 3], [1.0, 1.0j])
        assert d_L2(s1, s2) == pytest.approx(d_L2(s2, s1), abs=1e-13)

    def test_matches_tensor_trace(self, ctx16):
        # The moment factorization must agree with the literal tensor-space
        # trace against L2, including on mixed and superposed states.
        op = build_length(ctx16)
        l4 = op.L2.reshape(ctx16.trunc_dim, ctx16.trunc_dim, ctx16.trunc_dim, ctx16.trunc_dim)
        pairs = [
            (eigenstate(ctx16, 0), eigenstate(ctx16, 3)),
            (displace(eigenstate(ctx16, 1), 0.4 - 0.2j), eigenstate(ctx16, 2)),
            (
                superposition_state(ctx16, [0, 2], [1.0, -1.0]),
                mixed_state([eigenstate(ctx16, 0), eigenstate(ctx16, 4)], [0.25, 0.75]),
            ),
        ]
        for s1, s2 in pairs:
            literal = np.einsum("ij,kl,jlik->", s1.rho, s2.rho, l4)
            assert abs(literal.imag) < 1e-10
            assert d_L2(s1, s2) == pytest.approx(float(literal.real), abs=1e-10)

    def test_context_mismatch(self, ctx16, ctx32):
        from moyalmetric import ContextMismatchError

        with pytest.raises(ContextMismatchError):
            d_L2(eigenstate(ctx16, 0), eigenstate(ctx32, 0))


class TestLength:
    def test_vacuum_diagonal(self, ctx32):
        w0 = eigenstate(ctx32, 0)
        assert d_L(w0, w0) == pytest.approx(math.sqrt(2.0), abs=1e-6)

    def test_strictly_below_root_square_length(self, ctx32):
        w1 = eigenstate(ctx32, 1)
        val = d_L(w1, w1)
        assert val < math.sqrt(6.0) - 1e-6

    def test_displaced_vacuum_strictness(self, ctx32):
        w0 = eigenstate(ctx32, 0)
        moved = displace(w0, 1.0)
        assert d_L(w0, moved) < math.sqrt(2.0 + 1.0) - 1e-6

    def test_dominated_by_root_square_length(self, ctx32):
        states = [eigenstate(ctx32, m) for m in range(5)]
        states.append(displace(eigenstate(ctx32, 0), 0.8 + 0.3j))
        states.append(superposition_state(ctx32, [0, 2], [1.0, 1.0]))
        for s1 in states:
            for s2 in states:
                assert d_L(s1, s2) <= math.sqrt(d_L2(s1, s2)) + 1e-10

    def test_equality_only_at_vacuum_pair(self, ctx32):
        for m in range(4):
            for n in range(4):
                gap = math.sqrt(d_L2(eigenstate(ctx32, m), eigenstate(ctx32, n))) - d_L(
                    eigenstate(ctx32, m), eigenstate(ctx32, n)
                )
                if m == n == 0:
                    assert abs(gap) < 1e-6
                else:
                    assert gap > 1e-6

    def test_diagonal_floor(self, ctx32):
        floor = math.sqrt(2.0) * ctx32.lambda_p - 1e-6
        samples = [
            eigenstate(ctx32, 3),
            displace(eigenstate(ctx32, 0), -0.7 + 0.2j),
            superposition_state(ctx32, [1, 4], [1.0, -2.0]),
            mixed_state([eigenstate(ctx32, 0), eigenstate(ctx32, 2)], [0.5, 0.5]),
        ]
        for s in samples:
            assert d_L(s, s) >= floor

    def test_symmetry(self, ctx32):
        s1 = eigenstate(ctx32, 1)
        s2 = displace(eigenstate(ctx32, 0), 0.5)
        assert d_L(s1, s2) == pytest.approx(d_L(s2, s1), abs=1e-12)


class TestModifiedLength:
    def test_vanishes_on_diagonal(self, ctx32):
        for m in range(4):
            s = eigenstate(ctx32, m)
            assert modified_length(s, s) == pytest.approx(0.0, abs=1e-7)

    def test_eigenstate_pairs(self, ctx32):
        # sqrt(2E_n) - sqrt(2E_m) for n > m
        cases = {
            (0, 1): math.sqrt(3.0) - 1.0,
            (1, 2): math.sqrt(5.0) - math.sqrt(3.0),
            (0, 6): math.sqrt(13.0) - 1.0,
        }
        for (m, n), want in cases.items():
            got = modified_length(eigenstate(ctx32, m), eigenstate(ctx32, n))
            assert got == pytest.approx(want, abs=1e-9)

    def test_displaced_vacuum_recovers_euclidean_shift(self, ctx32):
        w0 = eigenstate(ctx32, 0)
        moved = displace(w0, 2.0)
        assert modified_length(w0, moved) == pytest.approx(2.0, abs=1e-9)

    def test_mixed_phase_shift(self, ctx32):
        w0 = eigenstate(ctx32, 0)
        kap = 1.2 - 0.9j
        moved = displace(w0, kap)
        assert modified_length(w0, moved) == pytest.approx(abs(kap), abs=1e-9)


class TestCounterexample:
    @staticmethod
    def closed_forms(i, j, k, l, theta=1.0):
        e = [level_energy(m, theta) for m in (i, j, k)]
        el = level_energy(l, theta)
        triple = (math.sqrt(2.0 / 3.0 * sum(e)) - math.sqrt(2 * el)) ** 2
        pair = {
            frozenset(p): (math.sqrt(level_energy(p[0], theta) + level_energy(p[1], theta))
                           - math.sqrt(2 * el)) ** 2
            for p in ((i, j), (i, k), (j, k))
        }
        single = {m: (math.sqrt(2 * level_energy(m, theta)) - math.sqrt(2 * el)) ** 2
                  for m in (i, j, k)}
        lhs = 3 * triple
        rhs = 2 * sum(pair.values()) - sum(single.values())
        return lhs, rhs

    def test_reference_quadruple(self, ctx32):
        res = counterexample_L2prime(ctx32, 0, 2, 4, 6)
        lhs, rhs = self.closed_forms(0, 2, 4, 6)
        assert res.lhs == pytest.approx(lhs, abs=1e-12)
        assert res.rhs == pytest.approx(rhs, abs=1e-12)
        assert res.residual == pytest.approx(lhs - rhs, abs=1e-12)
        assert res.residual == pytest.approx(2.0441188533653058, abs=1e-10)

    def test_residual_bounded_away_from_zero(self, ctx32):
        res = counterexample_L2prime(ctx32, 0, 2, 4, 6)
        assert res.residual > 1.0

    def test_adjacent_indices_rejected(self, ctx32):
        with pytest.raises(ValueError):
            counterexample_L2prime(ctx32, 0, 1, 4, 6)
        with pytest.raises(ValueError):
            counterexample_L2prime(ctx32, 0, 2, 4, 5)

    def test_other_quadruple_consistency(self, ctx32):
        res = counterexample_L2prime(ctx32, 1, 3, 5, 7)
        lhs, rhs = self.closed_forms(1, 3, 5, 7)
        assert res.lhs == pytest.approx(lhs, abs=1e-12)
        assert res.rhs == pytest.approx(rhs, abs=1e-12)

    def test_numerical_route_agreement(self, ctx32):
        # The operation cross-checks every closed-form square against the
        # tensor-trace evaluation internally; a clean return certifies
        # agreement within its 1e-6 gate.
        res = counterexample_L2prime(ctx32, 0, 2, 4, 6)
        assert math.isfinite(res.residual)
