"""
Abstract cartesian factorisations of a direct power and their involved strips.

A family {K_1, ..., K_l} of proper subgroups of M = T^k is a cartesian
factorisation when M = K_i · (∩_{j≠i} K_j) for every i. Automorphisms of M
are stored as a permutation of the coordinates together with one automorphism
of T per coordinate, and act on strips and strip products intensionally.

When two involved strips meet, the module walks the configuration with
elements of a factor-transitive automorphism group, extracts a chordless
cycle of strips, and checks that the composite of the twists along it is a
uniform automorphism of T while the common intersection is not subdirect.
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

from .chains import Element
from .factorisation import (
    DEFAULT_WITNESS_SEARCH_CAP,
    FactorisationVerdict,
    doublestrip_factors,
    doublestrips_composite,
    product_covers,
)
from .groups import (
    Automorphism,
    CapExceededError,
    GroupComputationError,
    compose_all,
    fixed_points,
    is_nonabelian_simple,
    is_uniform,
)
from .strips import (
    DiagonalBlock,
    DiagonalSubgroup,
    DirectPower,
    FullStrip,
    NotSimpleBaseError,
    NotSubdirectError,
    StripProduct,
    Subgroup,
    SubgroupHandle,
    as_diagonal,
    first_non_surjective_coordinate,
    intersect,
    is_subdirect,
    iter_set_partitions,
    project,
    project_diagonal,
    require_same_ambient,
    same_subgroup,
    scott_decompose,
    subgroup_generators,
)


DEFAULT_FAMILY_BUDGET = 100_000


class ImproperFactorError(GroupComputationError):
    """Raised when a cartesian factor is the whole group."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class AbelianBaseError(GroupComputationError):
    """
    Raised for an abelian factor group.

    Over C_p the direct power is a vector space and a cartesian factorisation
    is essentially a direct sum decomposition.
    """

    pass


@dataclass(frozen=True, eq=False)
class FactorAutomorphism:
    """
    Automorphism of T^k permuting coordinates.

    ``perm[c-1]`` is the image π(c) of coordinate c and the image tuple y
    satisfies y_{π(c)} = maps[c-1](x_c).
    """

    ambient: DirectPower
    perm: Tuple[int, ...]
    maps: Tuple[Automorphism, ...]

    def __post_init__(self) -> None:
        perm = tuple(int(p) for p in self.perm)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "maps", tuple(self.maps))
        k = self.ambient.k
        if sorted(perm) != list(range(1, k + 1)):
            raise ValueError(f"{list(perm)} is not a permutation of 1..{k}")
        if len(self.maps) != k:
            raise ValueError(f"Factor automorphism needs {k} coordinate maps, got {len(self.maps)}")
        for phi in self.maps:
            if phi.group is not self.ambient.base:
                raise ValueError("Coordinate maps must be automorphisms of the base group")

    @classmethod
    def identity(cls, ambient: DirectPower) -> "FactorAutomorphism":
        phi = Automorphism.identity(ambient.base)
        return cls(ambient, tuple(ambient.coordinates), (phi,) * ambient.k)

    @classmethod
    def permutation(cls, ambient: DirectPower, perm: Sequence[int]) -> "FactorAutomorphism":
        """Pure coordinate permutation."""
        phi = Automorphism.identity(ambient.base)
        return cls(ambient, tuple(perm), (phi,) * ambient.k)

    @property
    def key(self) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, ...], ...]]:
        return self.perm, tuple(phi.images for phi in self.maps)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FactorAutomorphism):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"FactorAutomorphism(perm={list(self.perm)})"

    def apply(self, x: Sequence[int]) -> Element:
        y = [0] * self.ambient.k
        for c, (target, phi) in enumerate(zip(self.perm, self.maps)):
            y[target - 1] = phi(x[c])
        return tuple(y)

    def then(self, other: "FactorAutomorphism") -> "FactorAutomorphism":
        """Apply self, then other."""
        perm = tuple(other.perm[p - 1] for p in self.perm)
        maps = tuple(phi.then(other.maps[p - 1]) for p, phi in zip(self.perm, self.maps))
        return FactorAutomorphism(self.ambient, perm, maps)

    def inverse(self) -> "FactorAutomorphism":
        perm = [0] * self.ambient.k
        maps: List[Optional[Automorphism]] = [None] * self.ambient.k
        for c, (target, phi) in enumerate(zip(self.perm, self.maps), start=1):
            perm[target - 1] = c
            maps[target - 1] = phi.inverse()
        return FactorAutomorphism(self.ambient, tuple(perm), tuple(maps))  # type: ignore[arg-type]

    def image_strip(self, strip: FullStrip) -> FullStrip:
        maps = {self.perm[c - 1]: psi.then(self.maps[c - 1]) for c, psi in strip.coordinate_maps().items()}
        return FullStrip.from_coordinate_maps(self.ambient, maps)

    def image_diagonal(self, diag: DiagonalSubgroup) -> DiagonalSubgroup:
        blocks = []
        for b in diag.blocks:
            moved = sorted((self.perm[c - 1], psi.then(self.maps[c - 1])) for c, psi in zip(b.coordinates, b.maps))
            root = moved[0][1]
            back = root.inverse()
            blocks.append(DiagonalBlock(
                tuple(c for c, _ in moved),
                tuple(back.then(psi) for _, psi in moved),
                tuple(sorted(root(r) for r in b.allowed)),
            ))
        return DiagonalSubgroup(self.ambient, tuple(blocks))

    def image(self, sub: Subgroup) -> Subgroup:
        """Image of a subgroup, kept in the same representation."""
        if isinstance(sub, StripProduct):
            return StripProduct(self.ambient, tuple(self.image_strip(s) for s in sub.strips),
                                tuple(self.perm[c - 1] for c in sub.full))
        if isinstance(sub, DiagonalSubgroup):
            return self.image_diagonal(sub)
        return SubgroupHandle(self.ambient, [self.apply(g) for g in sub.generators])

    def to_dict(self) -> Dict[str, Any]:
        return {"perm": list(self.perm), "maps": [phi.to_list() for phi in self.maps]}

    @classmethod
    def from_dict(cls, ambient: DirectPower, data: Dict[str, Any]) -> "FactorAutomorphism":
        if "maps" in data:
            maps = tuple(Automorphism.checked(ambient.base, m) for m in data["maps"])
        else:
            maps = (Automorphism.identity(ambient.base),) * ambient.k
        return cls(ambient, tuple(data["perm"]), maps)


class FactorTransitiveAutGroup:
    """
    Subgroup G0 of Aut(T^k) given by generators.

    Args:
        ambient: The direct power
        generators: Generating factor automorphisms
        check_transitive: Raise if the induced action on coordinates is not transitive

    Raises:
        ValueError: If check_transitive is set and the action is intransitive
    """

    def __init__(self, ambient: DirectPower, generators: Sequence[FactorAutomorphism],
                 check_transitive: bool = True):
        for g in generators:
            require_same_ambient(ambient, g.ambient)
        self.ambient = ambient
        self.generators: Tuple[FactorAutomorphism, ...] = tuple(generators)
        if check_transitive and not self.is_transitive:
            raise ValueError(f"Factor action is not transitive: orbit of 1 is {self.factor_orbit(1)}")

    def __repr__(self) -> str:
        return f"FactorTransitiveAutGroup({self.ambient.label}, {len(self.generators)} generators)"

    @property
    def induced_permutations(self) -> List[Tuple[int, ...]]:
        return [g.perm for g in self.generators]

    def factor_orbit(self, coordinate: int) -> List[int]:
        return sorted(self._transversal_from(coordinate))

    @property
    def is_transitive(self) -> bool:
        return len(self.factor_orbit(1)) == self.ambient.k

    def _transversal_from(self, coordinate: int) -> Dict[int, FactorAutomorphism]:
        reach = {coordinate: FactorAutomorphism.identity(self.ambient)}
        queue = [coordinate]
        for c in queue:
            for g in self.generators:
                target = g.perm[c - 1]
                if target not in reach:
                    reach[target] = reach[c].then(g)
                    queue.append(target)
        return reach

    @cached_property
    def transversal(self) -> Dict[int, FactorAutomorphism]:
        """Coordinate c -> an element of G0 sending coordinate 1 to c."""
        return self._transversal_from(1)

    def mapping(self, source: int, target: int) -> FactorAutomorphism:
        """
        An element of G0 sending coordinate ``source`` to ``target``.

        Raises:
            ValueError: If target is outside the orbit of source
        """
        reach = self.transversal
        if source not in reach or target not in reach:
            reach = self._transversal_from(source)
            if target not in reach:
                raise ValueError(f"No element of G0 sends coordinate {source} to {target}")
            return reach[target]
        return reach[source].inverse().then(reach[target])

    def to_dict(self) -> Dict[str, Any]:
        return {"generators": [g.to_dict() for g in self.generators]}

    @classmethod
    def from_dict(cls, ambient: DirectPower, data: Dict[str, Any],
                  check_transitive: bool = True) -> "FactorTransitiveAutGroup":
        gens = [FactorAutomorphism.from_dict(ambient, g) for g in data.get("generators", [])]
        return cls(ambient, gens, check_transitive=check_transitive)


def _intersection(subs: Sequence[Subgroup]) -> Subgroup:
    if not any(isinstance(s, SubgroupHandle) for s in subs):
        return intersect(*subs)  # type: ignore[arg-type]
    smallest = min(subs, key=lambda s: s.order)
    elements = smallest.closure() if isinstance(smallest, SubgroupHandle) else list(smallest.elements())
    common = [x for x in elements if all(s.contains(x) for s in subs)]
    return SubgroupHandle(smallest.ambient, common)


class CartesianFactorisation:
    """
    Family of proper subgroups of M with its common intersection M0.

    Args:
        ambient: The direct power M
        factors: At least two subgroups

    Raises:
        ValueError: If fewer than two factors are given
        AmbientMismatchError: If a factor lives elsewhere
    """

    def __init__(self, ambient: DirectPower, factors: Sequence[Subgroup]):
        if len(factors) < 2:
            raise ValueError("A cartesian factorisation needs at least two factors")
        for K in factors:
            require_same_ambient(ambient, K.ambient)
        self.ambient = ambient
        self.factors: Tuple[Subgroup, ...] = tuple(factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __repr__(self) -> str:
        return f"CartesianFactorisation({self.ambient.label}, {list(self.factors)})"

    @cached_property
    def m0(self) -> Subgroup:
        return _intersection(self.factors)

    def complement(self, index: int) -> Subgroup:
        """∩_{j≠index} K_j."""
        others = [K for j, K in enumerate(self.factors) if j != index]
        return others[0] if len(others) == 1 else _intersection(others)

    def index_of(self, sub: Subgroup) -> Optional[int]:
        for i, K in enumerate(self.factors):
            if same_subgroup(sub, K):
                return i
        return None

    def to_dict(self) -> Dict[str, Any]:
        out = []
        for K in self.factors:
            sp = _strip_form(K)
            out.append(sp.to_dict() if sp is not None else {"generators": [list(g) for g in subgroup_generators(K)]})
        return {"factors": out}


def _strip_form(K: Subgroup) -> Optional[StripProduct]:
    if isinstance(K, StripProduct):
        return K
    if isinstance(K, DiagonalSubgroup):
        return K.as_strip_product()
    return None


@dataclass
class CartesianVerdict:
    """Per-index results of the cartesian product condition."""

    holds: bool
    verdicts: List[FactorisationVerdict]
    m0_order: int
    failing_index: Optional[int] = None  # 1-based
    witness: Optional[Element] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "m0_order": self.m0_order,
            "failing_index": self.failing_index,
            "witness": None if self.witness is None else list(self.witness),
        }


def verify_cartesian(M: DirectPower, Ks: Union[Sequence[Subgroup], "CartesianFactorisation"],
                     witness_cap: int = DEFAULT_WITNESS_SEARCH_CAP) -> CartesianVerdict:
    """
    Check M = K_i · (∩_{j≠i} K_j) for every i by the order formula.

    Raises:
        ValueError: If fewer than two factors are given
        ImproperFactorError: If some K_i is all of M
    """
    cf = Ks if isinstance(Ks, CartesianFactorisation) else CartesianFactorisation(M, Ks)
    for i, K in enumerate(cf.factors, start=1):
        if K.order == M.order:
            raise ImproperFactorError(f"Factor {i} is all of {M.label}", i)
    verdicts = []
    failing = None
    witness = None
    for i, K in enumerate(cf.factors):
        verdict = product_covers(K, cf.complement(i), witness_cap=0)
        verdicts.append(verdict)
        if not verdict.holds and failing is None:
            failing = i + 1
            if witness_cap > 0:
                verdict.witness = product_covers(K, cf.complement(i), witness_cap=witness_cap).witness
            witness = verdict.witness
    return CartesianVerdict(failing is None, verdicts, cf.m0.order, failing, witness)


def involved_strips(K: Subgroup) -> List[FullStrip]:
    """
    Non-trivial full strips X with K = X × (projection of K off Supp X).

    Strip products and diagonal subgroups read them off their blocks. For a
    SubgroupHandle the candidates are the classes of coordinates linked by a
    projection of order |T|, each tested against the direct-product condition.
    """
    T = K.ambient.base
    if isinstance(K, StripProduct):
        return list(K.strips)
    if isinstance(K, DiagonalSubgroup):
        return [FullStrip(K.ambient, b.coordinates, b.maps[1:]) for b in K.blocks
                if len(b.coordinates) >= 2 and len(b.allowed) == T.order]

    full_coords = [c for c in K.ambient.coordinates if len(K.projection_values(c)) == T.order]
    parent = {c: c for c in full_coords}

    def find(c: int) -> int:
        while parent[c] != c:
            c = parent[c]
        return c

    for i, j in itertools.combinations(full_coords, 2):
        if project(K, [i, j]).order == T.order:
            parent[find(j)] = find(i)
    classes: Dict[int, List[int]] = {}
    for c in full_coords:
        classes.setdefault(find(c), []).append(c)
    found = []
    for support in sorted(classes.values()):
        if len(support) < 2:
            continue
        on_support = project(K, support)
        if on_support.order != T.order:
            continue
        rest = [c for c in K.ambient.coordinates if c not in support]
        rest_order = project(K, rest).order if rest else 1
        if K.order != T.order * rest_order:
            continue
        local = scott_decompose(on_support, check_simple=False)
        if len(local.strips) != 1:
            continue
        maps = {support[i - 1]: local.strips[0].coordinate_map(i) for i in local.strips[0].support}
        found.append(FullStrip.from_coordinate_maps(K.ambient, maps))
    return found


def is_invariant(cf: CartesianFactorisation, G0: FactorTransitiveAutGroup) -> bool:
    """
    True iff every generator of G0 permutes the factors.

    Invariance under a generating set implies invariance under the whole group.
    """
    return invariance_failure(cf, G0) is None


def invariance_failure(cf: CartesianFactorisation, G0: FactorTransitiveAutGroup) -> Optional[Tuple[int, int]]:
    """(generator index, factor index), 1-based, of the first image outside the family."""
    require_same_ambient(cf.ambient, G0.ambient)
    for gi, g in enumerate(G0.generators, start=1):
        for ki, K in enumerate(cf.factors, start=1):
            if cf.index_of(g.image(K)) is None:
                return gi, ki
    return None


# ---------------------------------------------------------------------------
# Meeting involved strips


STATUS_VERIFIED = "verified"
STATUS_VACUOUS = "vacuous"
STATUS_PRECONDITION_FAILED = "precondition_failed"
STATUS_CONTRADICTION = "contradiction"


@dataclass
class MainstripfactReport:
    """Outcome of running the meeting-strips argument on a concrete family."""

    status: str
    reason: str
    involved: List[Dict[str, Any]] = field(default_factory=list)
    pair: Optional[List[List[int]]] = None
    fat_intersection: bool = False
    cycle: List[List[int]] = field(default_factory=list)
    coordinates: List[int] = field(default_factory=list)
    alphas: List[Automorphism] = field(default_factory=list)
    betas: List[Automorphism] = field(default_factory=list)
    composite: Optional[Automorphism] = None
    composite_uniform: Optional[bool] = None
    m0_subdirect: Optional[bool] = None
    checks: Dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "reason": self.reason,
            "involved": self.involved,
            "pair": self.pair,
            "fat_intersection": self.fat_intersection,
            "cycle": self.cycle,
            "coordinates": self.coordinates,
            "alphas": [a.to_list() for a in self.alphas],
            "betas": [b.to_list() for b in self.betas],
            "composite": None if self.composite is None else self.composite.to_list(),
            "composite_uniform": self.composite_uniform,
            "m0_subdirect": self.m0_subdirect,
            "checks": dict(sorted(self.checks.items())),
        }


def _involved_table(cf: CartesianFactorisation) -> List[Tuple[FullStrip, int]]:
    table = []
    for i, K in enumerate(cf.factors):
        table.extend((X, i) for X in involved_strips(K))
    return table


def _factor_of(strip: FullStrip, table: Sequence[Tuple[FullStrip, int]]) -> int:
    for X, i in table:
        if X == strip:
            return i
    raise GroupComputationError(f"{strip!r} is not involved in the family")


def _walk_to_cycle(table: Sequence[Tuple[FullStrip, int]], first: FullStrip, second: FullStrip,
                   G0: FactorTransitiveAutGroup) -> List[FullStrip]:
    """
    Extend first, second, ... until a strip meets one at least two steps back, then cut the cycle.

    Each step moves the shared coordinate of the last two strips into the
    last strip's private part with an element of G0; the image of one of the
    last two strips is a new involved strip through that coordinate.
    """
    seq = [first, second]
    for _ in range(len(table) + 2):
        prev, last = seq[-2], seq[-1]
        shared = (set(prev.support) & set(last.support)).pop()
        target = min(set(last.support) - set(prev.support))
        g = G0.mapping(shared, target)
        options = [g.image_strip(prev), g.image_strip(last)]
        nxt = next(X for X in options if X != last)
        _factor_of(nxt, table)
        seq.append(nxt)
        earlier = [j for j in range(len(seq) - 2) if set(nxt.support) & set(seq[j].support)]
        if earlier:
            return seq[max(earlier):]
    raise GroupComputationError("Strip walk did not close; the family is not G0-invariant")


def mainstripfact_verify(cf: CartesianFactorisation, G0: FactorTransitiveAutGroup,
                         witness_cap: int = DEFAULT_WITNESS_SEARCH_CAP) -> MainstripfactReport:
    """
    Run the meeting-strips argument on a concrete G0-invariant cartesian factorisation.

    When two involved strips meet, T must admit a uniform automorphism and M0
    cannot be subdirect. Both conclusions are recomputed from the data: a fat
    intersection yields the automorphism from two strips directly; otherwise a
    chordless cycle of involved strips is built with G0 and its composite twist
    is tested.

    Returns:
        Report with status verified, vacuous, precondition_failed or
        contradiction (the last never occurs for valid input)

    Raises:
        AbelianBaseError: If T is abelian
    """
    M = cf.ambient
    T = M.base
    if T.is_abelian:
        raise AbelianBaseError(
            f"{T.name} is abelian; cartesian factorisations of {M.label} are direct sum decompositions"
        )
    verdict = verify_cartesian(M, cf, witness_cap=0)
    if not verdict.holds:
        return MainstripfactReport(STATUS_PRECONDITION_FAILED,
                                   f"not a cartesian factorisation: condition fails at factor {verdict.failing_index}")
    if not G0.is_transitive:
        return MainstripfactReport(STATUS_PRECONDITION_FAILED,
                                   f"G0 is not transitive on coordinates (orbit of 1: {G0.factor_orbit(1)})")
    failure = invariance_failure(cf, G0)
    if failure is not None:
        return MainstripfactReport(STATUS_PRECONDITION_FAILED,
                                   f"not G0-invariant: generator {failure[0]} moves factor {failure[1]} "
                                   "outside the family")

    table = _involved_table(cf)
    involved = [{"factor": i + 1, "support": list(X.support)} for X, i in table]
    meeting = [(a, b) for (a, _), (b, _) in itertools.combinations(table, 2) if set(a.support) & set(b.support)]
    if not meeting:
        return MainstripfactReport(STATUS_VACUOUS, "involved strips are pairwise disjoint; nothing to verify",
                                   involved=involved)

    m0_subdirect = is_subdirect(cf.m0)
    fat = [(a, b) for a, b in meeting if len(set(a.support) & set(b.support)) >= 2]
    if fat:
        a, b = fat[0]
        i1, i2 = sorted(set(a.support) & set(b.support))[:2]
        first, second = a.link(i1, i2), b.link(i1, i2)
        composite = first.then(second.inverse())
        ambient2 = DirectPower(T, 2)
        Y1 = StripProduct(ambient2, (FullStrip(ambient2, (1, 2), (first,)),))
        Y2 = StripProduct(ambient2, (FullStrip(ambient2, (1, 2), (second,)),))
        checks = {
            "two_strip_factorisation": product_covers(Y1, Y2, witness_cap=0).holds,
            "composite_uniform": is_uniform(composite).uniform,
            "m0_not_subdirect": not m0_subdirect,
        }
        status = STATUS_VERIFIED if all(checks.values()) else STATUS_CONTRADICTION
        return MainstripfactReport(
            status, f"strips meet in coordinates {sorted(set(a.support) & set(b.support))}",
            involved=involved, pair=[list(a.support), list(b.support)], fat_intersection=True,
            coordinates=[i1, i2], alphas=[first], betas=[second.inverse()], composite=composite,
            composite_uniform=checks["composite_uniform"], m0_subdirect=m0_subdirect, checks=checks,
        )

    a, b = meeting[0]
    cycle = _walk_to_cycle(table, a, b, G0)
    length = len(cycle)
    home = _factor_of(cycle[0], table)
    picked = [i for i, X in enumerate(cycle) if _factor_of(X, table) == home]

    def meet(i: int, j: int) -> int:
        return (set(cycle[i % length].support) & set(cycle[j % length].support)).pop()

    coords: List[int] = []
    alphas: List[Automorphism] = []
    betas: List[Automorphism] = []
    for n, i in enumerate(picked):
        enter, leave = meet(i - 1, i), meet(i, i + 1)
        coords += [enter, leave]
        alphas.append(cycle[i].link(enter, leave))
        stop = picked[n + 1] if n + 1 < len(picked) else length
        links = [cycle[m].link(meet(m - 1, m), meet(m, m + 1)) for m in range(i + 1, stop)]
        betas.append(compose_all(links, T))
    composite = doublestrips_composite(alphas, betas)

    K1 = as_diagonal_any(cf.factors[home])
    rest = as_diagonal_any(cf.complement(home))
    Yshape, Zshape = doublestrip_factors(alphas, betas)
    checks = {}
    if K1 is not None and rest is not None:
        k1_projection = project_diagonal(K1, coords)
        rest_projection = project_diagonal(rest, coords)
        checks["home_factor_projects_to_strips"] = same_subgroup(k1_projection, Yshape)
        checks["complement_projects_into_strips"] = all(Zshape.contains(g) for g in rest_projection.generators())
    checks["strip_products_factorise"] = product_covers(Yshape, Zshape, witness_cap=0).holds
    checks["composite_uniform"] = is_uniform(composite).uniform
    checks["m0_not_subdirect"] = not m0_subdirect
    fixed = fixed_points(composite)
    checks["m0_values_fixed_by_composite"] = _m0_values_at(cf.m0, coords[0]) <= fixed
    status = STATUS_VERIFIED if all(checks.values()) else STATUS_CONTRADICTION
    return MainstripfactReport(
        status, f"chordless cycle of {length} involved strips, {len(picked)} from factor {home + 1}",
        involved=involved, pair=[list(a.support), list(b.support)], cycle=[list(X.support) for X in cycle],
        coordinates=coords, alphas=alphas, betas=betas, composite=composite,
        composite_uniform=checks["composite_uniform"], m0_subdirect=m0_subdirect, checks=checks,
    )


def as_diagonal_any(K: Subgroup) -> Optional[DiagonalSubgroup]:
    if isinstance(K, SubgroupHandle):
        return None
    return as_diagonal(K)


def _m0_values_at(m0: Subgroup, coordinate: int) -> FrozenSet[int]:
    if isinstance(m0, SubgroupHandle):
        return m0.projection_values(coordinate)
    diag = as_diagonal(m0)
    block = diag.block_at(coordinate)
    if block is None:
        return frozenset({0})
    f = block.value_map(coordinate)
    return frozenset(f(r) for r in block.allowed)


# ---------------------------------------------------------------------------
# Enumeration over a fixed intersection


def candidate_factors(m0: StripProduct) -> Iterator[StripProduct]:
    """
    Strip products strictly between m0 and M.

    A strip product contains m0 exactly when each of its blocks lies inside a
    block of m0 with the twists m0 prescribes there, so candidates are the
    refinements of m0's block partition.
    """
    ambient = m0.ambient
    blocks: List[Tuple[Optional[FullStrip], Tuple[int, ...]]] = [(s, s.support) for s in m0.strips]
    blocks += [(None, (c,)) for c in m0.full]
    blocks.sort(key=lambda b: b[1][0])
    options = []
    for strip, support in blocks:
        options.append([(strip, [tuple(part) for part in partition]) for partition in iter_set_partitions(support)])
    for choice in itertools.product(*options):
        strips = []
        full = []
        for strip, parts in choice:
            for part in parts:
                if len(part) == 1:
                    full.append(part[0])
                else:
                    strips.append(strip.restricted(part))  # type: ignore[union-attr]
        K = StripProduct(ambient, tuple(strips), tuple(full))
        if K.order == ambient.order or K == m0:
            continue
        yield K


def enumerate_cartesian_over(M: DirectPower, M0: Subgroup, G0: FactorTransitiveAutGroup,
                             family_budget: int = DEFAULT_FAMILY_BUDGET) -> List[CartesianFactorisation]:
    """
    All G0-invariant cartesian factorisations of M with common intersection M0.

    M0 is subdirect, so every factor containing it is subdirect and, T being
    non-abelian simple, a strip product containing M0. Families of 2..k
    candidates are filtered by the intersection, the product condition and
    invariance under the generators of G0, in that order.

    Raises:
        NotSimpleBaseError: If T is abelian or not simple
        NotSubdirectError: If M0 is not subdirect
        CapExceededError: If more than family_budget families would be tried
    """
    require_same_ambient(M, M0.ambient)
    T = M.base
    if not is_nonabelian_simple(T):
        raise NotSimpleBaseError(f"{T.name} is not a non-abelian simple group")
    bad = first_non_surjective_coordinate(M0)
    if bad is not None:
        raise NotSubdirectError(f"M0 does not project onto coordinate {bad}", bad)
    m0 = M0 if isinstance(M0, StripProduct) else (
        as_diagonal(M0).as_strip_product() if isinstance(M0, DiagonalSubgroup) else scott_decompose(M0)
    )
    assert m0 is not None
    candidates = list(candidate_factors(m0))
    families = sum(math.comb(len(candidates), size) for size in range(2, M.k + 1))
    if families > family_budget:
        raise CapExceededError(f"{families} candidate families exceed the budget {family_budget}")
    found = []
    for size in range(2, M.k + 1):
        for family in itertools.combinations(candidates, size):
            if intersect(*family).order != m0.order:
                continue
            cf = CartesianFactorisation(M, family)
            if not verify_cartesian(M, cf, witness_cap=0).holds:
                continue
            if is_invariant(cf, G0):
                found.append(cf)
    return found
