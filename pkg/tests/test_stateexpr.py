"""Grammar, round-trip and construction of textual state expressions."""

import numpy as np
import pytest

from moyalmetric.fock import LeakageError, coherent_state, eigenstate, make_context
from moyalmetric.stateexpr import (
    StateExprError,
    build_state,
    format_state_expr,
    parse_state_expr,
)


class TestParse:
    @pytest.mark.parametrize(
        "text, tag",
        [
            ("eigen:0", ("eigen", 0)),
            ("eigen:13", ("eigen", 13)),
            ("EIGEN:3", ("eigen", 3)),
            (" eigen:1 ", ("eigen", 1)),
            ("coherent:1+0i", ("coherent", 1 + 0j)),
            ("coherent:2", ("coherent", 2 + 0j)),
            ("coherent:-0.5i", ("coherent", -0.5j)),
            ("coherent:1e-3+0.5i", ("coherent", 1e-3 + 0.5j)),
            ("coherent:0.25-1.5j", ("coherent", 0.25 - 1.5j)),
            ("translated:eigen:2:2+0i", ("translated", ("eigen", 2), 2 + 0j)),
            (
                "translated:translated:eigen:0:1+0i:0-1i",
                ("translated", ("translated", ("eigen", 0), 1 + 0j), -1j),
            ),
            (
                "super:0,2:1+0i,1+0i",
                ("super", (0, 2), (1 + 0j, 1 + 0j)),
            ),
            (
                "translated:super:0,1:1+0i,-1+0i:0.5+0i",
                ("translated", ("super", (0, 1), (1 + 0j, -1 + 0j)), 0.5 + 0j),
            ),
            (
                "mix:0.5*eigen:0;0.5*coherent:1+0i",
                ("mix", (0.5, 0.5), (("eigen", 0), ("coherent", 1 + 0j))),
            ),
            (
                "mix:1*translated:eigen:1:1+1i",
                ("mix", (1.0,), (("translated", ("eigen", 1), 1 + 1j),)),
            ),
        ],
    )
    def test_accepts(self, text, tag):
        assert parse_state_expr(text) == tag

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "   ",
            "eigen",
            "eigen:",
            "eigen:x",
            "eigen:-1",
            "eigen:1.5",
            "eigen:0:junk",
            "coherent:",
            "coherent:one",
            "translated:eigen:0",
            "translated:mix:1*eigen:0:1+0i",
            "super:0,1:1+0i",
            "super:0,0:1+0i,1+0i:extra",
            "mix:",
            "mix:eigen:0",
            "mix:0*eigen:0",
            "mix:-1*eigen:0",
            "mix:0.5*mix:1*eigen:0",
            "squeezed:0.3",
        ],
    )
    def test_rejects(self, text):
        with pytest.raises(StateExprError):
            parse_state_expr(text)

    def test_rejection_names_the_constructor_list(self):
        with pytest.raises(StateExprError, match="eigen, coherent, translated"):
            parse_state_expr("blah:1")


class TestRoundTrip:
    @pytest.mark.parametrize(
        "tag",
        [
            ("eigen", 7),
            ("coherent", 0.1 + 0.2j),
            ("coherent", -1.0 / 3.0 + 0j),
            ("translated", ("eigen", 2), 2.0 - 0.125j),
            ("translated", ("translated", ("eigen", 0), 1 + 0j), -0.75j),
            ("super", (0, 3, 5), (1 + 0j, -0.5j, 0.25 + 0.125j)),
            ("mix", (0.25, 0.75), (("eigen", 1), ("coherent", 1.5 + 0j))),
        ],
    )
    def test_parse_inverts_format(self, tag):
        assert parse_state_expr(format_state_expr(tag)) == tag

    def test_formatting_is_canonical_text(self):
        assert format_state_expr(("eigen", 4)) == "eigen:4"
        assert format_state_expr(("coherent", 2 + 0j)) == "coherent:2.0+0.0i"
        assert (
            format_state_expr(("translated", ("eigen", 0), -1.5j))
            == "translated:eigen:0:0.0-1.5i"
        )

    def test_negative_zero_normalized(self):
        text = format_state_expr(("coherent", complex(-0.0, -0.0)))
        assert text == "coherent:0.0+0.0i"


@pytest.fixture(scope="module")
def ctx():
    return make_context(16, 1.0)


class TestBuild:
    def test_eigen_matches_constructor(self, ctx):
        built = build_state(ctx, "eigen:2")
        np.testing.assert_allclose(built.rho, eigenstate(ctx, 2).rho)
        assert built.tag == ("eigen", 2)

    def test_coherent_matches_constructor(self, ctx):
        built = build_state(ctx, "coherent:1+0i")
        np.testing.assert_allclose(built.rho, coherent_state(ctx, 1.0).rho)

    def test_translated_tag_matches_parse(self, ctx):
        tag = parse_state_expr("translated:eigen:1:0.5+0.5i")
        assert build_state(ctx, tag).tag == tag

    def test_superposition_normalizes(self, ctx):
        built = build_state(ctx, "super:0,2:3+0i,4+0i")
        assert built.vector is not None
        np.testing.assert_allclose(abs(built.vector[0]), 0.6, atol=1e-12)
        np.testing.assert_allclose(abs(built.vector[2]), 0.8, atol=1e-12)

    def test_mix_normalizes_weights_on_the_state_only(self, ctx):
        tag = parse_state_expr("mix:1*eigen:0;3*eigen:2")
        assert tag[1] == (1.0, 3.0)
        built = build_state(ctx, tag)
        assert built.tag[1] == (0.25, 0.75)
        np.testing.assert_allclose(np.trace(built.rho).real, 1.0, atol=1e-12)

    def test_leakage_surfaces_as_leakage_error(self, ctx):
        with pytest.raises(LeakageError):
            build_state(ctx, "translated:eigen:0:9+0i")

    def test_out_of_range_index_is_a_data_error(self, ctx):
        with pytest.raises(ValueError) as err:
            build_state(ctx, "eigen:99")
        assert not isinstance(err.value, StateExprError)

    def test_grammar_error_passes_through(self, ctx):
        with pytest.raises(StateExprError):
            build_state(ctx, "eigen:")
