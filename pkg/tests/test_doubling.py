"""Oracle tests for the two-sheet triple and the Pythagoras machinery.

The internal entry is always fixed from the reference family, so the
closed forms here are elementary: inter-sheet distance 1/|Lambda|, and
hypotenuse values sqrt(d^2 + 1/|Lambda|^2).
"""
import math

import numpy as np
import pytest

from moyalmetric import (
    DiracCalculus,
    SolverConfig,
    coherent_state,
    d_L2,
    displace,
    eigenstate,
    mixed_state,
    superposition_state,
)
from moyalmetric.doubling import (
    DoubledDirac,
    SheetState,
    SweepTable,
    doubled_distance,
    identification_sweep,
    make_doubled,
    pythagoras_check,
    reference_lambda,
)
from moyalmetric.doubling import _doubled_adjoint, _doubled_commutator

LIGHT = SolverConfig(iterations=120, restarts=2)


@pytest.fixture(scope="module")
def calc32(ctx32):
    return DiracCalculus(ctx32)


@pytest.fixture(scope="module")
def dd32(calc32):
    return make_doubled(calc32, reference_lambda(calc32, 0))


class TestConstruction:
    def test_reference_entry_ground(self, calc32, ctx32):
        lam = reference_lambda(calc32, 0)
        assert lam == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert 1 / lam**2 == pytest.approx(d_L2(eigenstate(ctx32, 0), eigenstate(ctx32, 0)), abs=1e-9)

    def test_reference_entry_excited(self, calc32):
        lam = reference_lambda(calc32, 1)
        assert 1 / lam**2 == pytest.approx(6.0, abs=1e-12)

    def test_zero_entry_rejected(self, calc32):
        with pytest.raises(ValueError):
            make_doubled(calc32, 0.0)

    def test_sheet_validation(self, ctx32):
        with pytest.raises(ValueError):
            SheetState(eigenstate(ctx32, 0), 3)

    def test_internal_distance(self, dd32):
        assert dd32.internal_distance == pytest.approx(math.sqrt(2.0), abs=1e-12)


class TestDoubledCommutator:
    def test_adjoint_identity(self, dd32, ctx32):
        # <W, C(X1, X2)> must equal <adj(W)_1, X1> + <adj(W)_2, X2> for the
        # subgradient chain rule to be trustworthy.
        rng = np.random.default_rng(7)
        n = ctx32.trunc_dim
        mc = ctx32.interior_dim
        x1 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        x2 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        w = rng.standard_normal((4 * mc, 4 * mc)) + 1j * rng.standard_normal((4 * mc, 4 * mc))
        lhs = complex(np.trace(w.conj().T @ _doubled_commutator(dd32, x1, x2))).real
        g1, g2 = _doubled_adjoint(dd32, w, hermitize=False)
        rhs = complex(np.trace(g1.conj().T @ x1) + np.trace(g2.conj().T @ x2)).real
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_constant_pair_seminorm(self, dd32, ctx32):
        n = ctx32.trunc_dim
        beta = 0.37
        c = _doubled_commutator(dd32, np.zeros((n, n)), beta * np.eye(n))
        want = abs(dd32.Lambda) * beta
        assert np.linalg.norm(c, 2) == pytest.approx(want, abs=1e-12)

    def test_equal_pair_matches_single_seminorm(self, dd32, calc32):
        from moyalmetric import lipschitz_seminorm, optimal_element_translation

        el = optimal_element_translation(calc32, 0.4)
        c = _doubled_commutator(dd32, el.mat, el.mat)
        assert np.linalg.norm(c, 2) == pytest.approx(
            lipschitz_seminorm(calc32, el), abs=1e-10
        )

    def test_pythagoras_construction_is_unit(self, dd32, calc32, ctx32):
        # Mixing a unit element with sheet-dependent constants keeps the
        # doubled seminorm at one for every mixing angle: the cross terms
        # cancel because the grading anticommutes with the sheet blocks.
        from moyalmetric import optimal_element_translation

        el = optimal_element_translation(calc32, 0.0).mat
        n = ctx32.trunc_dim
        d_i = dd32.internal_distance
        for angle in (0.2, 0.7, 1.1):
            c, s = math.cos(angle), math.sin(angle)
            a1 = c * el
            a2 = c * el - s * d_i * np.eye(n)
            cm = _doubled_commutator(dd32, a1, a2)
            assert np.linalg.norm(cm, 2) == pytest.approx(1.0, abs=1e-10)


class TestDoubledDistance:
    def test_inter_sheet_ground(self, dd32, ctx32):
        s = eigenstate(ctx32, 0)
        rep = doubled_distance(dd32, SheetState(s, 1), SheetState(s, 2), LIGHT)
        assert rep.value == pytest.approx(math.sqrt(2.0), abs=1e-9)

    def test_inter_sheet_constancy(self, dd32, ctx32):
        for s in (eigenstate(ctx32, 0), eigenstate(ctx32, 1), coherent_state(ctx32, 1.0)):
            rep = doubled_distance(dd32, SheetState(s, 1), SheetState(s, 2), LIGHT)
            assert rep.value == pytest.approx(dd32.internal_distance, abs=1e-6)

    def test_hypotenuse(self, dd32, ctx32):
        s1 = eigenstate(ctx32, 0)
        s2 = displace(s1, 2.0)
        rep = doubled_distance(dd32, SheetState(s1, 1), SheetState(s2, 2), LIGHT)
        assert rep.value == pytest.approx(math.sqrt(6.0), abs=1e-8)

    def test_same_sheet_projection(self, dd32, ctx32):
        rep = doubled_distance(
            dd32, SheetState(eigenstate(ctx32, 0), 1), SheetState(eigenstate(ctx32, 1), 1), LIGHT
        )
        assert rep.value == pytest.approx(1 / math.sqrt(2), abs=1e-9)

    def test_sheet_order_irrelevant(self, dd32, ctx32):
        s1 = eigenstate(ctx32, 0)
        s2 = displace(s1, 1.0 + 0.5j)
        one = doubled_distance(dd32, SheetState(s1, 1), SheetState(s2, 2), LIGHT)
        two = doubled_distance(dd32, SheetState(s2, 1), SheetState(s1, 2), LIGHT)
        assert one.value == pytest.approx(two.value, abs=1e-9)

    def test_cross_family_solver_route(self, dd32, ctx32):
        rep = doubled_distance(
            dd32,
            SheetState(eigenstate(ctx32, 0), 1),
            SheetState(eigenstate(ctx32, 2), 2),
            LIGHT,
        )
        lo = 1 / dd32.Lambda**2
        assert rep.method == "convex-solver"
        # lower bound at least the internal rung and the single-sheet rung
        assert rep.value**2 >= abs(lo) - 1e-9
        assert rep.feasibility <= 1 + 1e-8


class TestPythagoras:
    def test_same_family_equality(self, dd32, ctx32):
        s1 = eigenstate(ctx32, 0)
        s2 = displace(s1, 1.0)
        res = pythagoras_check(dd32, s1, s2, LIGHT)
        assert res.rhs_equal == pytest.approx(3.0, abs=1e-9)
        assert res.lhs == pytest.approx(res.rhs_equal, abs=1e-6)

    def test_degenerate_pair(self, dd32, ctx32):
        s = eigenstate(ctx32, 0)
        res = pythagoras_check(dd32, s, s, LIGHT)
        assert res.lhs == pytest.approx(2.0, abs=1e-9)
        assert res.rhs_equal == pytest.approx(2.0, abs=1e-9)

    def test_bracket_bounds_consistent(self, dd32, ctx32):
        res = pythagoras_check(dd32, eigenstate(ctx32, 0), eigenstate(ctx32, 2), LIGHT)
        assert res.rhs_lo == pytest.approx(res.rhs_equal, abs=0)
        assert res.rhs_hi == pytest.approx(2 * res.rhs_equal, abs=0)
        assert res.rhs_lo - 1e-9 <= res.lhs <= res.rhs_hi + 1e-9

    def test_random_pairs_stay_in_bracket(self, dd32, ctx32):
        rng = np.random.default_rng(11)
        pool = [
            eigenstate(ctx32, 0),
            eigenstate(ctx32, 1),
            eigenstate(ctx32, 3),
            mixed_state([eigenstate(ctx32, 0), eigenstate(ctx32, 2)], [0.5, 0.5]),
            superposition_state(ctx32, [0, 2], [1.0, 1.0]),
            displace(eigenstate(ctx32, 0), 0.8),
            displace(eigenstate(ctx32, 1), -0.4 + 0.3j),
        ]
        for _ in range(12):
            i, j = rng.integers(0, len(pool), size=2)
            res = pythagoras_check(dd32, pool[i], pool[j], LIGHT)
            assert res.rhs_lo - 1e-9 <= res.lhs <= res.rhs_hi + 1e-9


class TestIdentificationSweep:
    def test_same_family_rows_vanish(self, dd32):
        table = identification_sweep(dd32, 0, [0.0, 1.0, 2.0, 3.0])
        rows = [r for r in table.rows if r[0].startswith("same-family")]
        assert len(rows) == 4
        col = table.columns.index("rel_gap")
        for row in rows:
            assert abs(row[col]) < 1e-6

    def test_cross_family_frozen_gap(self, dd32):
        table = identification_sweep(dd32, 0, [0.0])
        col = table.columns.index("rel_gap")
        row = next(r for r in table.rows if r[0].startswith("cross-family-level n=1 "))
        assert row[col] == pytest.approx(0.034074173710931713, abs=1e-9)

    def test_translation_sweep_tail(self, dd32):
        table = identification_sweep(dd32, 0, [0.0, 1.0, 2.0, 5.0, 10.0])
        col = table.columns.index("rel_gap")
        kappa_rows = [r for r in table.rows if r[0].startswith("cross-family-shift")]
        want = 1 - 10.0 / math.sqrt(100.0 + (math.sqrt(3) - 1) ** 2)
        assert kappa_rows[-1][col] == pytest.approx(want, abs=1e-9)
        assert kappa_rows[-1][col] < 0.01

    def test_level_rows_shrink(self, dd32):
        table = identification_sweep(dd32, 0, [0.0])
        col = table.columns.index("rel_gap")
        vals = [r[col] for r in table.rows if r[0].startswith("cross-family-level")]
        assert len(vals) >= 20
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 0.01

    def test_empty_grid_rejected(self, dd32):
        with pytest.raises(ValueError):
            identification_sweep(dd32, 0, [])

    def test_mismatched_reference_rejected(self, calc32):
        wrong = make_doubled(calc32, 1.0)
        with pytest.raises(ValueError):
            identification_sweep(wrong, 0, [0.0, 1.0])

    def test_columns_match_report_schema(self, dd32):
        table = identification_sweep(dd32, 0, [0.0, 1.0])
        assert table.columns == (
            "label",
            "d_D",
            "d_L",
            "d_L2",
            "d_L_mod",
            "rel_gap",
            "feasibility",
        )
