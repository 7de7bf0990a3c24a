"""
Unit tests for the diagonal_actions module.

Tests follow the Given/When/Then pattern for clarity.
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scripts.lib.cartesian import FactorAutomorphism
from scripts.lib.diagonal_actions import (
    TYPE_COMPOUND,
    TYPE_SIMPLE,
    DiagonalAction,
    EmbeddingWitness,
    PermAction,
    ProductActionWreath,
    SimpleTypeError,
    WreathElement,
    build_diagonal_action,
    build_wreath_product_action,
    check_base_group_containment,
    check_structural_quasiprimitivity,
    divisibility_obstruction,
    embed_compound,
    normalising_permutations,
    search_invariant_cartesian_decompositions,
    stabilizer_action_group,
    verify_witness,
)
from scripts.lib.groups import Automorphism, CapExceededError, GroupComputationError
from scripts.lib.strips import DirectPower, FullStrip, NotSimpleBaseError, NotSubdirectError, StripProduct


def diagonal_strips(T, k, *supports):
    """Identity-twisted strips on the given supports of T^k."""
    ambient = DirectPower(T, k)
    identity = Automorphism.identity(T)
    return StripProduct(ambient, tuple(FullStrip(ambient, s, (identity,) * (len(s) - 1)) for s in supports))


@pytest.fixture(scope="module")
def a5_squared(a5):
    return build_diagonal_action(a5, diagonal_strips(a5, 2, (1, 2)))


@pytest.fixture(scope="module")
def a5_cubed(a5):
    return build_diagonal_action(a5, diagonal_strips(a5, 3, (1, 2, 3)))


@pytest.fixture(scope="module")
def a5_fourth_compound(a5):
    return build_diagonal_action(a5, diagonal_strips(a5, 4, (1, 2), (3, 4)))


@pytest.fixture(scope="module")
def compound_witness(a5_fourth_compound):
    return embed_compound(a5_fourth_compound)


class TestPermAction:
    """Tests for PermAction."""

    def test_orbit_and_transitivity(self):
        """
        Given a 3-cycle and a fixed point on four points
        When computing orbits
        Then the cycle and the fixed point should be separate orbits
        """
        # Given
        action = PermAction(4, {"c": np.array([1, 2, 0, 3])})

        # When
        orbit = action.orbit(0)

        # Then
        assert orbit.tolist() == [0, 1, 2]
        assert action.orbit(3).tolist() == [3]
        assert not action.is_transitive()

    def test_detects_non_permutation(self):
        """
        Given a table sending two points to 0
        When checking the tables
        Then its name should be reported
        """
        # Given
        action = PermAction(3, {"ok": np.array([1, 2, 0]), "bad": np.array([0, 0, 1])})

        # When / Then
        assert action.non_permutation() == "bad"


class TestBuildDiagonalAction:
    """Tests for build_diagonal_action."""

    def test_diagonal_of_a5_squared(self, a5, a5_squared):
        """
        Given the diagonal of A5^2
        When building the coset action
        Then it should have 60 points, simple type and the coordinate swap on top
        """
        # Given
        D = a5_squared

        # When
        x = (7, 7)

        # Then
        assert D.degree == 60
        assert D.diagonal_type == TYPE_SIMPLE
        assert [a.perm for a in D.top] == [(2, 1)]
        assert D.point_of(x) == 0
        assert D.point_of((0, 9)) == 9
        assert D.point_of((a5.inv(3), 0)) == 3

    def test_representatives_are_canonical(self, a5_fourth_compound):
        """
        Given the compound action of A5^4
        When mapping every representative back to its point
        Then each point should be recovered and have identity at strip heads
        """
        # Given
        D = a5_fourth_compound

        # When
        points = [D.point_of(row) for row in D.representatives.tolist()]

        # Then
        assert points == list(range(D.degree))
        assert (D.representatives[:, 0] == 0).all()
        assert (D.representatives[:, 2] == 0).all()

    def test_action_agrees_with_coset_multiplication(self, a5, a5_fourth_compound):
        """
        Given the compound action of A5^4 and an element x
        When acting on points
        Then the image of p should be the coset of rep(p)·x
        """
        # Given
        D = a5_fourth_compound
        M = D.ambient
        x = (3, 17, 42, 5)
        points = np.arange(0, D.degree, 97)

        # When
        images = D.act(points, x)

        # Then
        expected = [D.point_of(M.mul(D.representative(int(p)), x)) for p in points]
        assert images.tolist() == expected

    @pytest.mark.parametrize(
        "supports,degree,kind",
        [(((1, 2, 3),), 3600, TYPE_SIMPLE), (((1, 2), (3, 4)), 3600, TYPE_COMPOUND)],
    )
    def test_degrees(self, a5, supports, degree, kind):
        """
        Given A5^3 with one strip or A5^4 with two strips
        When building the action
        Then both should have 3600 points and the right type
        """
        # Given
        k = sum(len(s) for s in supports)

        # When
        D = build_diagonal_action(a5, diagonal_strips(a5, k, *supports))

        # Then
        assert D.degree == degree
        assert D.diagonal_type == kind

    def test_rejects_abelian_base(self, c3):
        """
        Given the diagonal of C3^2
        When building the action
        Then a NotSimpleBaseError should be raised
        """
        # When / Then
        with pytest.raises(NotSimpleBaseError, match="C3 is not a non-abelian simple group"):
            build_diagonal_action(c3, diagonal_strips(c3, 2, (1, 2)))

    def test_rejects_uncovered_coordinate(self, a5):
        """
        Given a strip on {1, 2} of A5^3
        When building the action
        Then a NotSubdirectError should name coordinate 3
        """
        # When / Then
        with pytest.raises(NotSubdirectError, match="coordinate 3"):
            build_diagonal_action(a5, diagonal_strips(a5, 3, (1, 2)))

    def test_rejects_full_coordinates(self, a5):
        """
        Given a strip product with a full coordinate
        When building the action
        Then a ValueError should be raised
        """
        # Given
        sp = diagonal_strips(a5, 3, (1, 2))
        sp = StripProduct(sp.ambient, sp.strips, (3,))

        # When / Then
        with pytest.raises(ValueError, match="coordinates \\[3\\] are full"):
            build_diagonal_action(a5, sp)

    def test_rejects_non_normalising_top(self, a5):
        """
        Given strips {1,2},{3,4} and the transposition of coordinates 2 and 3
        When building the action with that top
        Then a ValueError should be raised
        """
        # Given
        sp = diagonal_strips(a5, 4, (1, 2), (3, 4))
        bad = FactorAutomorphism.permutation(sp.ambient, (1, 3, 2, 4))

        # When / Then
        with pytest.raises(ValueError, match="does not normalise"):
            build_diagonal_action(a5, sp, top=[bad])

    def test_rejects_too_many_points(self, a5):
        """
        Given a point cap of 100
        When building a 3600-point action
        Then a CapExceededError should be raised
        """
        # When / Then
        with pytest.raises(CapExceededError, match="3600 points exceed the point cap 100"):
            build_diagonal_action(a5, diagonal_strips(a5, 4, (1, 2), (3, 4)), point_cap=100)

    def test_rejects_strips_over_another_group(self, a5, s5):
        """
        Given strips over A5
        When building the action for S5
        Then a ValueError should be raised
        """
        # When / Then
        with pytest.raises(ValueError, match="lives over A5, not S5"):
            build_diagonal_action(s5, diagonal_strips(a5, 2, (1, 2)))

    def test_normalising_permutations_of_single_strip(self, a5):
        """
        Given the diagonal of A5^3
        When listing normalising permutation generators
        Then the greedy lexicographic choice should be (1,3,2) and (2,1,3)
        """
        # Given / When
        gens = normalising_permutations(diagonal_strips(a5, 3, (1, 2, 3)))

        # Then
        assert [g.perm for g in gens] == [(1, 3, 2), (2, 1, 3)]


class TestQuasiprimitivity:
    """Tests for check_structural_quasiprimitivity."""

    def test_default_top_passes(self, a5_fourth_compound):
        """
        Given the compound action with its default top
        When running the structural checks
        Then all should pass
        """
        # Given / When
        report = check_structural_quasiprimitivity(a5_fourth_compound)

        # Then
        assert report.holds
        assert report.orbit_size == 3600
        assert report.factor_orbit == [1, 2, 3, 4]

    def test_trivial_top_fails_factor_transitivity(self, a5):
        """
        Given the compound action with no top automorphisms
        When running the structural checks
        Then factor transitivity should fail while M stays transitive
        """
        # Given
        D = build_diagonal_action(a5, diagonal_strips(a5, 4, (1, 2), (3, 4)), top=[])

        # When
        report = check_structural_quasiprimitivity(D)

        # Then
        assert not report.holds
        assert report.m_transitive
        assert not report.factor_transitive
        assert report.to_dict()["factor_orbit"] == [1]


class TestProductActionWreath:
    """Tests for the product-action wreath product."""

    def test_swap_transposes_coordinates(self):
        """
        Given Sym(2) wr S_2 on four points
        When acting with the top swap
        Then (a, b) should go to (b, a)
        """
        # Given
        W = build_wreath_product_action(2, 2)

        # When
        table = W.table(W.top_element((2, 1)))

        # Then
        assert W.degree == 4
        assert table.tolist() == [0, 2, 1, 3]
        assert W.table(W.identity).tolist() == [0, 1, 2, 3]

    def test_a5_sized_wreath(self):
        """
        Given |Γ| = 60 and ℓ = 2
        When building the wreath product
        Then it should act on 3600 points transitively
        """
        # Given / When
        W = build_wreath_product_action(60, 2)

        # Then
        assert W.degree == 3600
        assert W.action().is_transitive()

    def test_multiply_matches_composite_action(self):
        """
        Given generators of Sym(3) wr S_3
        When multiplying pairs
        Then the product should act as the first, then the second
        """
        # Given
        W = build_wreath_product_action(3, 3)
        gens = list(W.generators)

        # When / Then
        for g in gens:
            for h in gens:
                assert W.table(W.multiply(g, h)).tolist() == W.table(h)[W.table(g)].tolist()
            assert W.multiply(g, W.inverse(g)) == W.identity

    def test_act_point_matches_table(self):
        """
        Given an element with base and top parts
        When acting on one point directly and through the table
        Then the results should agree
        """
        # Given
        W = build_wreath_product_action(3, 3)
        g = W.multiply(W.base_element(2, (1, 2, 0)), W.top_element((3, 1, 2)))
        gammas = (2, 0, 1)

        # When
        direct = W.act_point(gammas, g)

        # Then
        assert W.encode(np.array([direct]))[0] == W.table(g)[W.encode(np.array([gammas]))[0]]

    def test_projections(self):
        """
        Given a base element and a top element
        When projecting
        Then the base projection should only be defined without a top part
        """
        # Given
        W = build_wreath_product_action(3, 2)
        base = W.base_element(1, (2, 0, 1))
        top = W.top_element((2, 1))

        # When / Then
        assert W.base_projection(base, 1) == (2, 0, 1)
        assert W.top_projection(top) == (2, 1)
        with pytest.raises(ValueError, match="base group only"):
            W.base_projection(top, 1)

    @pytest.mark.parametrize(
        "gamma,ell,error,message",
        [
            (1, 2, ValueError, "at least 2"),
            (3, 1, ValueError, "at least 2"),
            (60, 4, CapExceededError, "exceed the point cap"),
        ],
    )
    def test_rejects_invalid_parameters(self, gamma, ell, error, message):
        """
        Given too small a Γ or ℓ, or too many points
        When building the wreath product
        Then the matching error should be raised
        """
        # When / Then
        with pytest.raises(error, match=message):
            build_wreath_product_action(gamma, ell)

    def test_rejects_non_permutation_base(self):
        """
        Given a base component that is not a permutation
        When checking the element
        Then a ValueError should be raised
        """
        # Given
        W = build_wreath_product_action(3, 2)

        # When / Then
        with pytest.raises(ValueError, match="not a permutation of 3 points"):
            W.check(WreathElement(((0, 0, 1), (0, 1, 2)), (1, 2)))


class TestEmbedCompound:
    """Tests for embed_compound and verify_witness."""

    def test_compound_action_embeds_exhaustively(self, compound_witness):
        """
        Given the compound action of A5^4 on 3600 points
        When embedding it into a product action
        Then Δ should have 60 points, r should be 2 and every pair should check
        """
        # Given
        witness = compound_witness

        # When
        check = witness.check

        # Then
        assert witness.delta_size == 60
        assert witness.r == 2
        assert witness.blocks == ((1, 2), (3, 4))
        assert sorted(witness.bijection.tolist()) == list(range(3600))
        assert check.mode == "exhaustive"
        assert check.holds
        assert witness.verified

    def test_generator_images_respect_strips(self, a5_fourth_compound, compound_witness):
        """
        Given the compound witness
        When reading generator images
        Then M generators should have trivial top and the block swap should swap components
        """
        # Given
        D = a5_fourth_compound

        # When
        tops = {name: compound_witness.images[name].top for name in D.top_generators}

        # Then
        assert all(compound_witness.images[name].top_is_identity for name in D.m_generators)
        assert [D.top_generators[name].perm for name in sorted(tops)] == [(1, 2, 4, 3), (2, 1, 3, 4), (3, 4, 1, 2)]
        assert tops == {"top[0]": (1, 2), "top[1]": (1, 2), "top[2]": (2, 1)}

    def test_reloaded_witness_verifies(self, a5_fourth_compound, compound_witness):
        """
        Given a witness serialised and loaded back
        When verifying it again
        Then equivariance should still hold
        """
        # Given
        loaded = EmbeddingWitness.from_dict(compound_witness.to_dict())

        # When
        check = verify_witness(a5_fourth_compound, loaded)

        # Then
        assert check.holds
        assert check.pairs_checked == compound_witness.check.pairs_checked

    def test_tampered_bijection_fails(self, a5_fourth_compound, compound_witness):
        """
        Given a witness with two bijection entries swapped
        When verifying it
        Then failures should be reported with a first failing point
        """
        # Given
        bijection = compound_witness.bijection.copy()
        bijection[[1, 2]] = bijection[[2, 1]]
        tampered = EmbeddingWitness(60, 2, compound_witness.blocks, bijection, compound_witness.images)

        # When
        check = verify_witness(a5_fourth_compound, tampered)

        # Then
        assert not check.holds
        assert check.failures > 0
        assert check.first_failure is not None

    def test_rejects_witness_for_other_degree(self, a5_squared, compound_witness):
        """
        Given a 3600-point witness and a 60-point action
        When verifying
        Then a ValueError should be raised
        """
        # When / Then
        with pytest.raises(ValueError, match="Witness maps 3600 points, the action has 60"):
            verify_witness(a5_squared, compound_witness)

    def test_rejects_witness_missing_an_image(self, a5_fourth_compound, compound_witness):
        """
        Given a witness without the image of one generator
        When verifying
        Then a ValueError should name a missing generator
        """
        # Given
        images = {name: g for name, g in compound_witness.images.items() if name != "top[0]"}
        partial = EmbeddingWitness(60, 2, compound_witness.blocks, compound_witness.bijection, images)

        # When / Then
        with pytest.raises(ValueError, match="no image for generator top\\[0\\]"):
            verify_witness(a5_fourth_compound, partial)

    def test_simple_type_is_refused(self, a5_cubed):
        """
        Given the simple action of A5^3
        When embedding
        Then a SimpleTypeError should be raised
        """
        # When / Then
        with pytest.raises(SimpleTypeError, match="simple type"):
            embed_compound(a5_cubed)

    def test_unequal_supports_are_refused(self, a5):
        """
        Given strips {1,2} and {3,4,5}
        When embedding
        Then a GroupComputationError should be raised
        """
        # Given
        sp = diagonal_strips(a5, 5, (1, 2), (3, 4, 5))
        D = DiagonalAction(sp.ambient, sp, [])

        # When / Then
        with pytest.raises(GroupComputationError, match="differ in size"):
            embed_compound(D)

    @pytest.mark.slow
    def test_three_strips_embed_by_sampling(self, a5):
        """
        Given three strips of A5^6 on 216000 points
        When embedding with a fixed seed
        Then the check should be sampled, reproducible and hold with r = 3
        """
        # Given
        D = build_diagonal_action(a5, diagonal_strips(a5, 6, (1, 2), (3, 4), (5, 6)))

        # When
        witness = embed_compound(D, samples=2000, seed=3)

        # Then
        assert witness.r == 3
        assert witness.check.mode == "sampled"
        assert witness.check.seed == 3
        assert witness.check.pairs_checked == 2000
        assert witness.check.holds
        assert witness.check.to_dict()["prng"] == "xoshiro256**"


class TestDecompositionSearch:
    """Tests for search_invariant_cartesian_decompositions."""

    def test_simple_type_has_no_decomposition(self, a5_cubed):
        """
        Given the simple action of A5^3
        When searching for invariant cartesian decompositions
        Then three candidates in four families should yield nothing
        """
        # Given / When
        report = search_invariant_cartesian_decompositions(a5_cubed)

        # Then
        assert report.candidates == 3
        assert report.families_checked == 4
        assert report.found == 0

    def test_a5_squared_has_no_candidates(self, a5_squared):
        """
        Given the simple action of A5^2
        When searching
        Then no candidate factors should exist
        """
        # Given / When
        report = search_invariant_cartesian_decompositions(a5_squared)

        # Then
        assert report.candidates == 0
        assert report.found == 0

    def test_compound_type_has_one_decomposition(self, a5_fourth_compound):
        """
        Given the compound action of A5^4
        When searching
        Then the block decomposition should be found
        """
        # Given
        messages = []

        # When
        report = search_invariant_cartesian_decompositions(a5_fourth_compound, progress=messages.append)

        # Then
        assert report.candidates == 2
        assert report.found == 1
        assert report.factor_transitive
        assert messages == ["A5^4: 2 candidate factors, 1 families"]

    def test_stabilizer_action_group_generators(self, a5, a5_fourth_compound):
        """
        Given the compound action with three top generators
        When building G0
        Then it should add one conjugation per strip and generator of A5
        """
        # Given / When
        G0 = stabilizer_action_group(a5_fourth_compound)

        # Then
        assert len(G0.generators) == 3 + 2 * len(a5.generators)
        assert G0.is_transitive


class TestBaseGroupContainment:
    """Tests for divisibility_obstruction and check_base_group_containment."""

    def test_divisibility_for_two_points_cubed(self):
        """
        Given |Γ| = 2 and ℓ = 3
        When comparing 2-parts
        Then 2^3 should not divide 3!
        """
        # Given / When
        rows = divisibility_obstruction(2, 3)

        # Then
        assert [(r.prime, r.omega_valuation, r.factorial_valuation) for r in rows] == [(2, 3, 1)]
        assert not rows[0].divides_factorial

    def test_divisibility_for_sixty_squared(self):
        """
        Given |Γ| = 60 and ℓ = 2
        When comparing p-parts
        Then every prime of 60 should appear and none should divide 2!
        """
        # Given / When
        rows = divisibility_obstruction(60, 2)

        # Then
        assert [r.prime for r in rows] == [2, 3, 5]
        assert [r.omega_valuation for r in rows] == [4, 2, 2]
        assert not any(r.divides_factorial for r in rows)

    def test_divisibility_rejects_trivial_gamma(self):
        """
        Given |Γ| = 1
        When computing the table
        Then a ValueError should be raised
        """
        # When / Then
        with pytest.raises(ValueError, match="Need"):
            divisibility_obstruction(1, 2)

    def test_images_of_m_lie_in_base_group(self, a5_fourth_compound, compound_witness):
        """
        Given the images of the generators of M under the compound witness
        When checking containment in the base group
        Then M should be transitive with trivial top, as claimed
        """
        # Given
        W = compound_witness.wreath()
        images = {name: compound_witness.images[name] for name in a5_fourth_compound.m_generators}

        # When
        report = check_base_group_containment(W, images)

        # Then
        assert report.transitive
        assert report.top_trivial
        assert report.claimed
        assert report.consistent

    def test_intransitive_group_is_not_claimed(self):
        """
        Given only the coordinate swap in Sym(2) wr S_2
        When checking containment
        Then the group should be intransitive and the argument not claimed
        """
        # Given
        W = build_wreath_product_action(2, 2)

        # When
        report = check_base_group_containment(W, {"swap": W.top_element((2, 1))})

        # Then
        assert not report.transitive
        assert not report.claimed
        assert not report.top_trivial
        assert report.nontrivial_top == ["swap"]
        assert report.consistent


wreath_elements = st.builds(
    WreathElement,
    st.tuples(*[st.permutations(range(3)).map(tuple)] * 3),
    st.permutations((1, 2, 3)).map(tuple),
)


class TestWreathProperties:
    """Group laws of Sym(3) wr S_3 on random elements."""

    W = ProductActionWreath(3, 3)

    @given(g=wreath_elements, h=wreath_elements, x=wreath_elements)
    def test_multiply_is_associative(self, g, h, x):
        W = self.W
        assert W.multiply(W.multiply(g, h), x) == W.multiply(g, W.multiply(h, x))

    @given(g=wreath_elements, h=wreath_elements)
    def test_product_acts_as_composite(self, g, h):
        W = self.W
        assert W.table(W.multiply(g, h)).tolist() == W.table(h)[W.table(g)].tolist()

    @given(g=wreath_elements)
    def test_inverse_undoes_element(self, g):
        W = self.W
        assert W.multiply(W.inverse(g), g) == W.identity
