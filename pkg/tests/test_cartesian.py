"""
Unit tests for the cartesian module.

Tests follow the Given/When/Then pattern for clarity.
"""

import pytest

from scripts.lib.cartesian import (
    STATUS_PRECONDITION_FAILED,
    STATUS_VACUOUS,
    STATUS_VERIFIED,
    AbelianBaseError,
    CartesianFactorisation,
    FactorAutomorphism,
    FactorTransitiveAutGroup,
    ImproperFactorError,
    candidate_factors,
    enumerate_cartesian_over,
    involved_strips,
    is_invariant,
    mainstripfact_verify,
    verify_cartesian,
)
from scripts.lib.groups import Automorphism, CapExceededError, has_uniform_automorphism
from scripts.lib.strips import (
    DirectPower,
    FullStrip,
    NotSimpleBaseError,
    NotSubdirectError,
    StripProduct,
    SubgroupHandle,
)


def strip_product(ambient, supports, full=()):
    """Strip product with identity twists."""
    identity = Automorphism.identity(ambient.base)
    strips = tuple(FullStrip(ambient, s, (identity,) * (len(s) - 1)) for s in supports)
    return StripProduct(ambient, strips, tuple(full))


def block_swap_group(ambient):
    """G0 generated by swapping the blocks {1,2} and {3,4} and swapping inside each block."""
    return FactorTransitiveAutGroup(ambient, [
        FactorAutomorphism.permutation(ambient, (3, 4, 1, 2)),
        FactorAutomorphism.permutation(ambient, (2, 1, 4, 3)),
    ])


@pytest.fixture(scope="module")
def heisenberg_orthogonal_pair(he3):
    """
    Orthogonal strips {(t, t)} and {(t, α(t))} of He3^2 with α uniform, and a
    G0 element swapping them: (x1, x2) -> (x2, α(x1)).
    """
    M = DirectPower(he3, 2)
    alpha = has_uniform_automorphism(he3)
    identity = Automorphism.identity(he3)
    K1 = StripProduct(M, (FullStrip(M, (1, 2), (identity,)),))
    K2 = StripProduct(M, (FullStrip(M, (1, 2), (alpha,)),))
    swap = FactorAutomorphism(M, (2, 1), (alpha, identity))
    return M, K1, K2, FactorTransitiveAutGroup(M, [swap])


class TestFactorAutomorphism:
    """Tests for FactorAutomorphism."""

    def test_apply_moves_coordinates_and_maps_values(self, a5, a5_automorphisms):
        """
        Given π = (2, 3, 1) with a map φ on coordinate 1
        When applying it
        Then y_{π(c)} should equal maps[c](x_c)
        """
        # Given
        M = DirectPower(a5, 3)
        phi = a5_automorphisms[7]
        identity = Automorphism.identity(a5)
        g = FactorAutomorphism(M, (2, 3, 1), (phi, identity, identity))

        # When
        y = g.apply((4, 5, 6))

        # Then
        assert y == (6, phi(4), 5)

    def test_then_and_inverse(self, a5, a5_automorphisms):
        """
        Given two factor automorphisms
        When composing and inverting
        Then the composite should apply left first and the inverse should undo
        """
        # Given
        M = DirectPower(a5, 3)
        identity = Automorphism.identity(a5)
        a = FactorAutomorphism(M, (2, 3, 1), (a5_automorphisms[3], identity, a5_automorphisms[5]))
        b = FactorAutomorphism(M, (1, 3, 2), (identity, a5_automorphisms[9], identity))
        x = (11, 22, 33)

        # When
        composite = a.then(b)

        # Then
        assert composite.apply(x) == b.apply(a.apply(x))
        assert a.then(a.inverse()) == FactorAutomorphism.identity(M)

    def test_image_of_strip_matches_pointwise_image(self, a5, a5_automorphisms):
        """
        Given a twisted strip and a factor automorphism
        When taking the image intensionally
        Then it should contain the pointwise image of every element
        """
        # Given
        M = DirectPower(a5, 3)
        strip = FullStrip(M, (1, 3), (a5_automorphisms[12],))
        identity = Automorphism.identity(a5)
        g = FactorAutomorphism(M, (3, 1, 2), (a5_automorphisms[4], identity, identity))

        # When
        image = g.image_strip(strip)

        # Then
        assert image.support == (2, 3)
        assert all(image.contains(g.apply(x)) for x in strip.elements())

    def test_rejects_non_permutation(self, a5):
        """
        Given (1, 1, 2)
        When building a permutation automorphism
        Then a ValueError should be raised
        """
        # When / Then
        with pytest.raises(ValueError, match="is not a permutation of 1..3"):
            FactorAutomorphism.permutation(DirectPower(a5, 3), (1, 1, 2))

    def test_round_trips_through_dict(self, a5, a5_automorphisms):
        """
        Given a factor automorphism with coordinate maps
        When serialising and loading it
        Then it should be unchanged
        """
        # Given
        M = DirectPower(a5, 2)
        g = FactorAutomorphism(M, (2, 1), (a5_automorphisms[1], a5_automorphisms[2]))

        # When
        restored = FactorAutomorphism.from_dict(M, g.to_dict())

        # Then
        assert restored == g


class TestFactorTransitiveAutGroup:
    """Tests for FactorTransitiveAutGroup."""

    def test_mapping_sends_source_to_target(self, a5):
        """
        Given the block-swapping group on A5^4
        When asking for elements between coordinate pairs
        Then each should move the source to the target
        """
        # Given
        G0 = block_swap_group(DirectPower(a5, 4))

        # When
        pairs = [(s, t) for s in range(1, 5) for t in range(1, 5)]

        # Then
        assert G0.is_transitive
        assert all(G0.mapping(s, t).perm[s - 1] == t for s, t in pairs)

    def test_rejects_intransitive_group(self, a5):
        """
        Given only the swap (2, 1, 3)
        When building a transitive group
        Then a ValueError should report the orbit of 1
        """
        # Given
        M = DirectPower(a5, 3)

        # When / Then
        with pytest.raises(ValueError, match="orbit of 1 is \\[1, 2\\]"):
            FactorTransitiveAutGroup(M, [FactorAutomorphism.permutation(M, (2, 1, 3))])


class TestVerifyCartesian:
    """Tests for verify_cartesian and involved_strips."""

    def test_block_strips_form_cartesian_factorisation(self, a5):
        """
        Given K1 = strip{1,2} x T^{3,4} and K2 = T^{1,2} x strip{3,4}
        When checking the cartesian condition
        Then it should hold with M0 the product of both strips
        """
        # Given
        M = DirectPower(a5, 4)
        K1 = strip_product(M, [(1, 2)], full=(3, 4))
        K2 = strip_product(M, [(3, 4)], full=(1, 2))

        # When
        verdict = verify_cartesian(M, [K1, K2])

        # Then
        assert verdict.holds
        assert verdict.m0_order == 3600
        assert verdict.failing_index is None

    def test_boundary_pair_is_cartesian_but_not_invariant(self, a5):
        """
        Given K_{12|3} and K_{13|2} in A5^3
        When checking the cartesian condition and invariance under a 3-cycle
        Then the pair should factorise but the 3-cycle should move it
        """
        # Given
        M = DirectPower(a5, 3)
        cf = CartesianFactorisation(M, [strip_product(M, [(1, 2)], full=(3,)),
                                        strip_product(M, [(1, 3)], full=(2,))])
        G0 = FactorTransitiveAutGroup(M, [FactorAutomorphism.permutation(M, (2, 3, 1))])

        # When
        verdict = verify_cartesian(M, cf)

        # Then
        assert verdict.holds
        assert verdict.m0_order == 60
        assert not is_invariant(cf, G0)

    def test_all_three_strip_factors_are_not_cartesian(self, a5):
        """
        Given K_{12|3}, K_{13|2} and K_{23|1} in A5^3
        When checking the cartesian condition
        Then it should fail at factor 1 with an uncovered tuple
        """
        # Given
        M = DirectPower(a5, 3)
        Ks = [strip_product(M, [(1, 2)], full=(3,)),
              strip_product(M, [(1, 3)], full=(2,)),
              strip_product(M, [(2, 3)], full=(1,))]

        # When
        verdict = verify_cartesian(M, Ks)

        # Then
        assert not verdict.holds
        assert verdict.failing_index == 1
        assert verdict.witness is not None

    def test_rejects_whole_group_as_factor(self, a5):
        """
        Given a family containing all of A5^2
        When checking the cartesian condition
        Then an ImproperFactorError should name the factor
        """
        # Given
        M = DirectPower(a5, 2)
        whole = strip_product(M, [], full=(1, 2))
        diagonal = strip_product(M, [(1, 2)])

        # When / Then
        with pytest.raises(ImproperFactorError, match="Factor 2 is all of A5\\^2"):
            verify_cartesian(M, [diagonal, whole])

    def test_rejects_single_factor(self, a5):
        """
        Given one factor
        When building a cartesian factorisation
        Then a ValueError should be raised
        """
        # Given
        M = DirectPower(a5, 2)

        # When / Then
        with pytest.raises(ValueError, match="at least two factors"):
            CartesianFactorisation(M, [strip_product(M, [(1, 2)])])

    def test_involved_strips_of_generated_subgroup(self, a5):
        """
        Given strip{1,2} x T given by generators
        When reading involved strips
        Then the strip on {1, 2} should be recovered
        """
        # Given
        M = DirectPower(a5, 3)
        K = strip_product(M, [(1, 2)], full=(3,))
        handle = SubgroupHandle(M, K.generators())

        # When
        found = involved_strips(handle)

        # Then
        assert found == list(K.strips)


class TestMainstripfactVerify:
    """Tests for mainstripfact_verify."""

    def test_disjoint_involved_strips_are_vacuous(self, a5):
        """
        Given the block-strip factorisation of A5^4 and the block-swapping G0
        When running the meeting-strips check
        Then the result should be vacuous
        """
        # Given
        M = DirectPower(a5, 4)
        cf = CartesianFactorisation(M, [strip_product(M, [(1, 2)], full=(3, 4)),
                                        strip_product(M, [(3, 4)], full=(1, 2))])

        # When
        report = mainstripfact_verify(cf, block_swap_group(M))

        # Then
        assert report.status == STATUS_VACUOUS
        assert [e["support"] for e in report.involved] == [[1, 2], [3, 4]]

    def test_meeting_strips_over_heisenberg_group(self, heisenberg_orthogonal_pair):
        """
        Given orthogonal strips of He3^2 swapped by G0
        When running the meeting-strips check
        Then the composite should be uniform and M0 not subdirect
        """
        # Given
        M, K1, K2, G0 = heisenberg_orthogonal_pair
        cf = CartesianFactorisation(M, [K1, K2])

        # When
        report = mainstripfact_verify(cf, G0)

        # Then
        assert is_invariant(cf, G0)
        assert report.status == STATUS_VERIFIED
        assert report.fat_intersection
        assert report.composite_uniform is True
        assert report.m0_subdirect is False
        assert all(report.checks.values())

    def test_precondition_fails_for_non_cartesian_family(self, heisenberg_orthogonal_pair):
        """
        Given the same strip twice
        When running the meeting-strips check
        Then the precondition should fail
        """
        # Given
        M, K1, _, G0 = heisenberg_orthogonal_pair
        cf = CartesianFactorisation(M, [K1, K1])

        # When
        report = mainstripfact_verify(cf, G0)

        # Then
        assert report.status == STATUS_PRECONDITION_FAILED
        assert "condition fails at factor 1" in report.reason

    def test_precondition_fails_for_intransitive_g0(self, heisenberg_orthogonal_pair):
        """
        Given a G0 without generators
        When running the meeting-strips check
        Then the precondition should fail on transitivity
        """
        # Given
        M, K1, K2, _ = heisenberg_orthogonal_pair
        G0 = FactorTransitiveAutGroup(M, [], check_transitive=False)

        # When
        report = mainstripfact_verify(CartesianFactorisation(M, [K1, K2]), G0)

        # Then
        assert report.status == STATUS_PRECONDITION_FAILED
        assert "not transitive" in report.reason

    def test_rejects_abelian_base(self, c3):
        """
        Given a family in C3^2
        When running the meeting-strips check
        Then an AbelianBaseError should be raised
        """
        # Given
        M = DirectPower(c3, 2)
        cf = CartesianFactorisation(M, [strip_product(M, [], full=(1,)), strip_product(M, [], full=(2,))])
        G0 = FactorTransitiveAutGroup(M, [FactorAutomorphism.permutation(M, (2, 1))])

        # When / Then
        with pytest.raises(AbelianBaseError, match="C3 is abelian"):
            mainstripfact_verify(cf, G0)


class TestEnumerateCartesianOver:
    """Tests for candidate_factors and enumerate_cartesian_over."""

    def test_candidates_refine_the_intersection(self, a5):
        """
        Given M0 = strip{1,2,3} in A5^3
        When listing candidate factors
        Then the three strip-plus-coordinate products should appear
        """
        # Given
        M = DirectPower(a5, 3)
        m0 = strip_product(M, [(1, 2, 3)])

        # When
        candidates = list(candidate_factors(m0))

        # Then
        assert sorted((K.supports, K.full) for K in candidates) == [
            ([(1, 2)], (3,)),
            ([(1, 3)], (2,)),
            ([(2, 3)], (1,)),
        ]

    def test_single_strip_has_no_invariant_factorisation(self, a5):
        """
        Given M0 = strip{1,2,3} and a cyclic G0
        When enumerating cartesian factorisations over M0
        Then none should be found
        """
        # Given
        M = DirectPower(a5, 3)
        G0 = FactorTransitiveAutGroup(M, [FactorAutomorphism.permutation(M, (2, 3, 1))])

        # When
        found = enumerate_cartesian_over(M, strip_product(M, [(1, 2, 3)]), G0)

        # Then
        assert found == []

    def test_two_blocks_give_one_factorisation(self, a5):
        """
        Given M0 = strip{1,2} x strip{3,4} and the block-swapping G0
        When enumerating cartesian factorisations over M0
        Then exactly the block-strip factorisation should be found
        """
        # Given
        M = DirectPower(a5, 4)
        m0 = strip_product(M, [(1, 2), (3, 4)])

        # When
        found = enumerate_cartesian_over(M, m0, block_swap_group(M))

        # Then
        assert len(found) == 1
        assert sorted(K.supports for K in found[0].factors) == [[(1, 2)], [(3, 4)]]
        assert found[0].m0.order == m0.order

    def test_rejects_non_simple_base(self, heisenberg_orthogonal_pair):
        """
        Given He3, which is not simple
        When enumerating
        Then a NotSimpleBaseError should be raised
        """
        # Given
        M, K1, _, G0 = heisenberg_orthogonal_pair

        # When / Then
        with pytest.raises(NotSimpleBaseError):
            enumerate_cartesian_over(M, K1, G0)

    def test_rejects_non_subdirect_intersection(self, a5):
        """
        Given M0 trivial on coordinate 3
        When enumerating
        Then a NotSubdirectError should name coordinate 3
        """
        # Given
        M = DirectPower(a5, 3)
        G0 = FactorTransitiveAutGroup(M, [FactorAutomorphism.permutation(M, (2, 3, 1))])

        # When / Then
        with pytest.raises(NotSubdirectError, match="coordinate 3"):
            enumerate_cartesian_over(M, strip_product(M, [(1, 2)]), G0)

    def test_raises_error_above_family_budget(self, a5):
        """
        Given a family budget of one
        When enumerating over strip{1,2,3}
        Then a CapExceededError should report four families
        """
        # Given
        M = DirectPower(a5, 3)
        G0 = FactorTransitiveAutGroup(M, [FactorAutomorphism.permutation(M, (2, 3, 1))])

        # When / Then
        with pytest.raises(CapExceededError, match="4 candidate families exceed the budget 1"):
            enumerate_cartesian_over(M, strip_product(M, [(1, 2, 3)]), G0, family_budget=1)
