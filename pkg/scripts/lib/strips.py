"""
Direct powers, strips, strip products and subdirect subgroups.

A direct power M = T^k has elements that are k-tuples of ids of T. Coordinates
are numbered 1..k in every public interface (supports, projections, JSON);
tuple positions are 0-based.

Strips and strip products are stored intensionally: a support plus twist
automorphisms relative to the first support coordinate. Element sets are
only built when a closure is explicitly requested. Intersections of strip
products are kept as DiagonalSubgroup values, where each block of coordinates
shares one parameter restricted to a subgroup of T.
"""

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .chains import Element, StabilizerChain
from .groups import (
    Automorphism,
    CapExceededError,
    FiniteGroup,
    GroupComputationError,
    greedy_subgroup_generators,
    is_nonabelian_simple,
    subgroup_closure,
)
from .sampling import Xoshiro256


DEFAULT_CLOSURE_CAP = 10_000_000


class AmbientMismatchError(GroupComputationError):
    """Raised when two subgroups live in different direct powers."""

    pass


class NotSubdirectError(GroupComputationError):
    """Raised when a subgroup fails to project onto some coordinate."""

    def __init__(self, message: str, coordinate: Optional[int] = None):
        super().__init__(message)
        self.coordinate = coordinate


class NotSimpleBaseError(GroupComputationError):
    """Raised when the factor group is abelian or not simple."""

    pass


class StripMismatchError(GroupComputationError):
    """Raised when a subdirect subgroup is not the strip product recovered from it."""

    def __init__(self, message: str, witness: Optional[Element] = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class DirectPower:
    """M = T_1 x ... x T_k with componentwise multiplication."""

    base: FiniteGroup
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"Direct power needs k >= 1, got {self.k}")

    @property
    def order(self) -> int:
        return self.base.order**self.k

    @property
    def identity(self) -> Element:
        return (0,) * self.k

    @property
    def coordinates(self) -> range:
        return range(1, self.k + 1)

    def mul(self, x: Sequence[int], y: Sequence[int]) -> Element:
        mul = self.base.mul
        return tuple(mul(a, b) for a, b in zip(x, y))

    def inv(self, x: Sequence[int]) -> Element:
        inverses = self.base.inverses
        return tuple(int(inverses[a]) for a in x)

    def unit(self, coordinate: int, t: int) -> Element:
        """Tuple with ``t`` at ``coordinate`` and the identity elsewhere."""
        x = [0] * self.k
        x[coordinate - 1] = t
        return tuple(x)

    def check_element(self, x: Sequence[int]) -> Element:
        x = tuple(int(v) for v in x)
        if len(x) != self.k or any(v < 0 or v >= self.base.order for v in x):
            raise ValueError(f"{list(x)} is not an element of {self.base.name}^{self.k}")
        return x

    def check_coordinates(self, coords: Sequence[int]) -> Tuple[int, ...]:
        coords = tuple(sorted(set(int(c) for c in coords)))
        if not coords:
            raise ValueError("Coordinate set must be non-empty")
        if coords[0] < 1 or coords[-1] > self.k:
            raise ValueError(f"Coordinates {list(coords)} out of range 1..{self.k}")
        return coords

    @property
    def label(self) -> str:
        return f"{self.base.name}^{self.k}"


def require_same_ambient(a: DirectPower, b: DirectPower) -> None:
    if a.base is not b.base or a.k != b.k:
        raise AmbientMismatchError(f"Ambient mismatch: {a.label} vs {b.label}")


@dataclass(frozen=True, eq=False)
class FullStrip:
    """
    Full strip {g : g_{i_j} = α_j(g_{i_1}), g_i = 1 off the support}.

    ``twists[j-1]`` is α_{j+1}, the map from the value at ``support[0]`` to the
    value at ``support[j]``.
    """

    ambient: DirectPower
    support: Tuple[int, ...]
    twists: Tuple[Automorphism, ...] = ()

    def __post_init__(self) -> None:
        support = tuple(int(i) for i in self.support)
        twists = tuple(self.twists)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "twists", twists)
        if not support or list(support) != sorted(set(support)):
            raise ValueError(f"Strip support must be strictly increasing, got {list(support)}")
        if support[0] < 1 or support[-1] > self.ambient.k:
            raise ValueError(f"Strip support {list(support)} out of range 1..{self.ambient.k}")
        if len(twists) != len(support) - 1:
            raise ValueError(f"Strip on {len(support)} coordinates needs {len(support) - 1} twists")
        for alpha in twists:
            if alpha.group is not self.ambient.base:
                raise ValueError("Strip twists must be automorphisms of the base group")

    @classmethod
    def from_coordinate_maps(cls, ambient: DirectPower, maps: Dict[int, Automorphism]) -> "FullStrip":
        """
        Strip realised as {(ψ_c(t))_c : t ∈ T}, normalised to canonical form.

        Args:
            ambient: The direct power
            maps: Coordinate -> automorphism giving that coordinate's value
        """
        support = sorted(maps)
        first = maps[support[0]].inverse()
        return cls(ambient, tuple(support), tuple(first.then(maps[c]) for c in support[1:]))

    @property
    def key(self) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, ...], ...]]:
        return self.support, tuple(a.images for a in self.twists)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FullStrip):
            return NotImplemented
        return self.ambient.base is other.ambient.base and self.ambient.k == other.ambient.k and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"FullStrip(support={list(self.support)})"

    @property
    def is_nontrivial(self) -> bool:
        return len(self.support) >= 2

    @property
    def order(self) -> int:
        return self.ambient.base.order

    def coordinate_map(self, coordinate: int) -> Automorphism:
        """Automorphism sending the first support value to the value at ``coordinate``."""
        position = self.support.index(coordinate)
        if position == 0:
            return Automorphism.identity(self.ambient.base)
        return self.twists[position - 1]

    def coordinate_maps(self) -> Dict[int, Automorphism]:
        return {c: self.coordinate_map(c) for c in self.support}

    def link(self, source: int, target: int) -> Automorphism:
        """Automorphism sending the value at ``source`` to the value at ``target``."""
        return self.coordinate_map(source).inverse().then(self.coordinate_map(target))

    def element(self, t: int) -> Element:
        x = [0] * self.ambient.k
        x[self.support[0] - 1] = t
        for c, alpha in zip(self.support[1:], self.twists):
            x[c - 1] = alpha(t)
        return tuple(x)

    def contains(self, x: Sequence[int]) -> bool:
        on_support = set(self.support)
        if any(x[i - 1] != 0 for i in self.ambient.coordinates if i not in on_support):
            return False
        t = x[self.support[0] - 1]
        return all(x[c - 1] == alpha(t) for c, alpha in zip(self.support[1:], self.twists))

    def elements(self) -> Iterator[Element]:
        for t in range(self.ambient.base.order):
            yield self.element(t)

    def restricted(self, coordinates: Sequence[int]) -> "FullStrip":
        """Sub-strip on a subset of the support, renormalised."""
        coordinates = sorted(coordinates)
        return FullStrip.from_coordinate_maps(self.ambient, {c: self.coordinate_map(c) for c in coordinates})

    def to_dict(self) -> Dict[str, Any]:
        return {"support": list(self.support), "twists": [a.to_list() for a in self.twists]}

    @classmethod
    def from_dict(cls, ambient: DirectPower, data: Dict[str, Any]) -> "FullStrip":
        twists = tuple(Automorphism.checked(ambient.base, images) for images in data.get("twists", []))
        return cls(ambient, tuple(data["support"]), twists)


@dataclass(frozen=True, eq=False)
class StripProduct:
    """
    Direct product of full strips with pairwise disjoint supports, plus full coordinates.

    Canonical form: strips sorted by least support coordinate, full coordinates
    ascending. Single-coordinate strips are stored as full coordinates.
    """

    ambient: DirectPower
    strips: Tuple[FullStrip, ...] = ()
    full: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        strips = [s for s in self.strips if s.is_nontrivial]
        full = set(int(i) for i in self.full) | {s.support[0] for s in self.strips if not s.is_nontrivial}
        for s in strips:
            require_same_ambient(self.ambient, s.ambient)
        strips.sort(key=lambda s: s.support[0])
        object.__setattr__(self, "strips", tuple(strips))
        object.__setattr__(self, "full", tuple(sorted(full)))
        used: Set[int] = set()
        for s in strips:
            overlap = used & set(s.support)
            if overlap:
                raise ValueError(f"Strip supports overlap on coordinates {sorted(overlap)}")
            used |= set(s.support)
        if used & full:
            raise ValueError(f"Full coordinates {sorted(used & full)} overlap strip supports")
        if full and (min(full) < 1 or max(full) > self.ambient.k):
            raise ValueError(f"Full coordinates {sorted(full)} out of range 1..{self.ambient.k}")

    @property
    def key(self) -> Tuple[Any, ...]:
        return tuple(s.key for s in self.strips), self.full

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StripProduct):
            return NotImplemented
        return self.ambient.base is other.ambient.base and self.ambient.k == other.ambient.k and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        supports = ",".join("".join(str(c) for c in s.support) for s in self.strips)
        return f"StripProduct(strips=[{supports}], full={list(self.full)})"

    @property
    def order(self) -> int:
        return strip_product_order(self)

    @property
    def covered(self) -> FrozenSet[int]:
        covered: Set[int] = set(self.full)
        for s in self.strips:
            covered |= set(s.support)
        return frozenset(covered)

    @property
    def supports(self) -> List[Tuple[int, ...]]:
        return [s.support for s in self.strips]

    def strip_at(self, coordinate: int) -> Optional[FullStrip]:
        for s in self.strips:
            if coordinate in s.support:
                return s
        return None

    def contains(self, x: Sequence[int]) -> bool:
        covered = self.covered
        if any(x[i - 1] != 0 for i in self.ambient.coordinates if i not in covered):
            return False
        for s in self.strips:
            t = x[s.support[0] - 1]
            if any(x[c - 1] != alpha(t) for c, alpha in zip(s.support[1:], s.twists)):
                return False
        return True

    def element(self, params: Sequence[int]) -> Element:
        """Element with one T-value per strip (in order) followed by one per full coordinate."""
        if len(params) != len(self.strips) + len(self.full):
            raise ValueError("One parameter per strip and per full coordinate is required")
        x = [0] * self.ambient.k
        for s, t in zip(self.strips, params):
            x[s.support[0] - 1] = t
            for c, alpha in zip(s.support[1:], s.twists):
                x[c - 1] = alpha(t)
        for c, t in zip(self.full, params[len(self.strips):]):
            x[c - 1] = t
        return tuple(x)

    def elements(self) -> Iterator[Element]:
        n = self.ambient.base.order
        for params in itertools.product(range(n), repeat=len(self.strips) + len(self.full)):
            yield self.element(params)

    def generators(self) -> List[Element]:
        gens = []
        for s in self.strips:
            gens.extend(s.element(t) for t in self.ambient.base.generators)
        for c in self.full:
            gens.extend(self.ambient.unit(c, t) for t in self.ambient.base.generators)
        return gens

    def to_handle(self) -> "SubgroupHandle":
        return SubgroupHandle(self.ambient, self.generators())

    def to_diagonal(self) -> "DiagonalSubgroup":
        T = self.ambient.base
        everything = tuple(range(T.order))
        blocks = [DiagonalBlock(s.support, tuple(s.coordinate_map(c) for c in s.support), everything)
                  for s in self.strips]
        blocks += [DiagonalBlock((c,), (Automorphism.identity(T),), everything) for c in self.full]
        return DiagonalSubgroup(self.ambient, tuple(blocks))

    def to_dict(self) -> Dict[str, Any]:
        return {"strips": [s.to_dict() for s in self.strips], "full": list(self.full)}

    @classmethod
    def from_dict(cls, ambient: DirectPower, data: Dict[str, Any]) -> "StripProduct":
        return cls(ambient, tuple(FullStrip.from_dict(ambient, s) for s in data.get("strips", [])),
                   tuple(data.get("full", [])))


def strip_product_order(sp: StripProduct) -> int:
    """|T|^(strips + full coordinates), exact."""
    return sp.ambient.base.order ** (len(sp.strips) + len(sp.full))


@dataclass(frozen=True)
class DiagonalBlock:
    """
    Coordinates sharing one parameter r restricted to ``allowed``.

    The value at ``coordinates[j]`` is ``maps[j](r)``; ``maps[0]`` is the identity.
    """

    coordinates: Tuple[int, ...]
    maps: Tuple[Automorphism, ...]
    allowed: Tuple[int, ...]

    def value_map(self, coordinate: int) -> Automorphism:
        return self.maps[self.coordinates.index(coordinate)]


@dataclass(frozen=True, eq=False)
class DiagonalSubgroup:
    """
    Product of diagonal blocks; coordinates outside every block are trivial.

    Intersections of strip products have this shape: each block's parameter
    ranges over a subgroup of T (an intersection of fixed-point subgroups).
    """

    ambient: DirectPower
    blocks: Tuple[DiagonalBlock, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(sorted(self.blocks, key=lambda b: b.coordinates[0])))

    @property
    def order(self) -> int:
        result = 1
        for b in self.blocks:
            result *= len(b.allowed)
        return result

    @cached_property
    def _allowed_sets(self) -> List[FrozenSet[int]]:
        return [frozenset(b.allowed) for b in self.blocks]

    @property
    def covered(self) -> FrozenSet[int]:
        return frozenset(c for b in self.blocks for c in b.coordinates)

    def block_at(self, coordinate: int) -> Optional[DiagonalBlock]:
        for b in self.blocks:
            if coordinate in b.coordinates:
                return b
        return None

    def contains(self, x: Sequence[int]) -> bool:
        covered = self.covered
        if any(x[i - 1] != 0 for i in self.ambient.coordinates if i not in covered):
            return False
        for b, allowed in zip(self.blocks, self._allowed_sets):
            r = x[b.coordinates[0] - 1]
            if r not in allowed:
                return False
            if any(x[c - 1] != f(r) for c, f in zip(b.coordinates[1:], b.maps[1:])):
                return False
        return True

    def elements(self) -> Iterator[Element]:
        for params in itertools.product(*(b.allowed for b in self.blocks)):
            x = [0] * self.ambient.k
            for b, r in zip(self.blocks, params):
                for c, f in zip(b.coordinates, b.maps):
                    x[c - 1] = f(r)
            yield tuple(x)

    def generators(self) -> List[Element]:
        T = self.ambient.base
        gens = []
        for b in self.blocks:
            for r in greedy_subgroup_generators(T, frozenset(b.allowed)):
                x = [0] * self.ambient.k
                for c, f in zip(b.coordinates, b.maps):
                    x[c - 1] = f(r)
                gens.append(tuple(x))
        return gens

    def to_handle(self) -> "SubgroupHandle":
        return SubgroupHandle(self.ambient, self.generators())

    @property
    def is_strip_product(self) -> bool:
        return all(len(b.allowed) == self.ambient.base.order for b in self.blocks)

    def as_strip_product(self) -> Optional[StripProduct]:
        """The same subgroup as a StripProduct, or None if some block is not full."""
        if not self.is_strip_product:
            return None
        strips = []
        full = []
        for b in self.blocks:
            if len(b.coordinates) == 1:
                full.append(b.coordinates[0])
            else:
                strips.append(FullStrip(self.ambient, b.coordinates, b.maps[1:]))
        return StripProduct(self.ambient, tuple(strips), tuple(full))

    def projection_order(self, coordinate: int) -> int:
        block = self.block_at(coordinate)
        return 1 if block is None else len(block.allowed)


def as_diagonal(sub: Union[StripProduct, DiagonalSubgroup]) -> DiagonalSubgroup:
    return sub.to_diagonal() if isinstance(sub, StripProduct) else sub


def intersect(*subgroups: Union[StripProduct, DiagonalSubgroup]) -> DiagonalSubgroup:
    """
    Intersection of strip products by unifying their coordinate equations.

    Every block contributes equations x_c = f(x_root); coordinates left out by
    some input are forced to the identity. Equations are chained from the
    least coordinate of each connected component; equations closing a cycle
    and block restrictions cut the root's range down to a subgroup of T.

    Raises:
        AmbientMismatchError: If the inputs live in different direct powers
        ValueError: If no subgroup is given
    """
    if not subgroups:
        raise ValueError("intersect needs at least one subgroup")
    ambient = subgroups[0].ambient
    for s in subgroups[1:]:
        require_same_ambient(ambient, s.ambient)
    T = ambient.base
    n = T.order
    ids = np.arange(n)

    edges: List[Tuple[int, int, np.ndarray]] = []
    restrictions: List[Tuple[int, np.ndarray]] = []
    forced: Set[int] = set()
    adjacency: Dict[int, List[Tuple[int, np.ndarray]]] = {c: [] for c in ambient.coordinates}
    for sub in subgroups:
        diag = as_diagonal(sub)
        for b in diag.blocks:
            root = b.coordinates[0]
            for c, f in zip(b.coordinates[1:], b.maps[1:]):
                forward = f.array
                edges.append((root, c, forward))
                adjacency[root].append((c, forward))
                adjacency[c].append((root, np.argsort(forward)))
            if len(b.allowed) < n:
                mask = np.zeros(n, dtype=bool)
                mask[list(b.allowed)] = True
                restrictions.append((root, mask))
        forced |= set(ambient.coordinates) - diag.covered

    value_maps: Dict[int, np.ndarray] = {}
    component_of: Dict[int, int] = {}
    for start in ambient.coordinates:
        if start in value_maps:
            continue
        value_maps[start] = ids
        component_of[start] = start
        queue = [start]
        for c in queue:
            for nbr, forward in adjacency[c]:
                if nbr not in value_maps:
                    value_maps[nbr] = forward[value_maps[c]]
                    component_of[nbr] = start
                    queue.append(nbr)

    masks: Dict[int, np.ndarray] = {root: np.ones(n, dtype=bool) for root in set(component_of.values())}
    for a, b, forward in edges:
        masks[component_of[a]] &= forward[value_maps[a]] == value_maps[b]
    for c, allowed in restrictions:
        masks[component_of[c]] &= allowed[value_maps[c]]
    for c in forced:
        masks[component_of[c]] &= ids == 0

    blocks = []
    for root in sorted(masks):
        allowed = tuple(int(v) for v in np.flatnonzero(masks[root]))
        if len(allowed) <= 1:
            continue
        coords = tuple(sorted(c for c, r in component_of.items() if r == root))
        maps = tuple(Automorphism(T, value_maps[c].tolist()) for c in coords)
        blocks.append(DiagonalBlock(coords, maps, allowed))
    return DiagonalSubgroup(ambient, tuple(blocks))


class SubgroupHandle:
    """
    Subgroup of a direct power given by generating tuples.

    Exact order and membership come from a coordinate stabilizer chain; the
    element set is only enumerated on request, breadth first, up to
    ``closure_cap`` tuples.
    """

    def __init__(self, ambient: DirectPower, generators: Sequence[Sequence[int]],
                 closure_cap: int = DEFAULT_CLOSURE_CAP):
        self.ambient = ambient
        self.generators: Tuple[Element, ...] = tuple(ambient.check_element(g) for g in generators)
        self.closure_cap = closure_cap
        self._closure: Optional[FrozenSet[Element]] = None

    def __repr__(self) -> str:
        return f"SubgroupHandle({self.ambient.label}, {len(self.generators)} generators)"

    @cached_property
    def chain(self) -> StabilizerChain:
        return StabilizerChain(self.ambient.base, self.ambient.k, self.generators)

    @property
    def order(self) -> int:
        return self.chain.order

    def contains(self, x: Sequence[int]) -> bool:
        return self.chain.contains(x)

    def closure(self) -> FrozenSet[Element]:
        """
        All elements, by breadth-first multiplication by generators.

        Raises:
            CapExceededError: If the subgroup has more than closure_cap elements
        """
        if self._closure is not None:
            return self._closure
        if self.order > self.closure_cap:
            raise CapExceededError(
                f"Closure of {self.order} tuples exceeds the cap of {self.closure_cap}"
            )
        identity = self.ambient.identity
        seen = {identity}
        frontier = [identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in self.generators:
                    y = self.ambient.mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        self._closure = frozenset(seen)
        return self._closure

    def elements(self) -> List[Element]:
        return sorted(self.closure())

    def projection_values(self, coordinate: int) -> FrozenSet[int]:
        return subgroup_closure(self.ambient.base, [g[coordinate - 1] for g in self.generators])


Subgroup = Union[StripProduct, DiagonalSubgroup, SubgroupHandle]


def subgroup_generators(sub: Subgroup) -> List[Element]:
    if isinstance(sub, SubgroupHandle):
        return list(sub.generators)
    return sub.generators()


def same_subgroup(a: Subgroup, b: Subgroup) -> bool:
    """Equality as subgroups: same ambient, same order, and one generates inside the other."""
    if a.ambient.base is not b.ambient.base or a.ambient.k != b.ambient.k:
        return False
    if isinstance(a, StripProduct) and isinstance(b, StripProduct):
        return a == b
    return a.order == b.order and all(b.contains(g) for g in subgroup_generators(a))


def project_diagonal(diag: DiagonalSubgroup, coords: Sequence[int]) -> DiagonalSubgroup:
    """
    Projection onto ``coords`` taken in the given order; coords[i] becomes coordinate i + 1.
    """
    T = diag.ambient.base
    target = DirectPower(T, len(coords))
    position = {c: i + 1 for i, c in enumerate(coords)}
    blocks = []
    for b in diag.blocks:
        kept = sorted((c for c in b.coordinates if c in position), key=position.__getitem__)
        if not kept:
            continue
        first = b.value_map(kept[0])
        back = first.inverse()
        maps = tuple(back.then(b.value_map(c)) for c in kept)
        allowed = tuple(sorted(first(r) for r in b.allowed))
        blocks.append(DiagonalBlock(tuple(position[c] for c in kept), maps, allowed))
    return DiagonalSubgroup(target, tuple(blocks))


def project(sub: Subgroup, coordinates: Sequence[int]) -> SubgroupHandle:
    """
    Image of ``sub`` under the projection onto ``coordinates``.

    Args:
        sub: Subgroup of T^k
        coordinates: Non-empty subset of 1..k

    Returns:
        SubgroupHandle inside T^|coordinates|

    Raises:
        ValueError: If the coordinate set is empty or out of range
    """
    coords = sub.ambient.check_coordinates(coordinates)
    if isinstance(sub, SubgroupHandle):
        target = DirectPower(sub.ambient.base, len(coords))
        return SubgroupHandle(target, [tuple(g[c - 1] for c in coords) for g in sub.generators])
    return project_diagonal(as_diagonal(sub), coords).to_handle()


def is_subdirect(sub: Subgroup) -> bool:
    """True iff every single-coordinate projection is all of T."""
    return first_non_surjective_coordinate(sub) is None


def first_non_surjective_coordinate(sub: Subgroup) -> Optional[int]:
    n = sub.ambient.base.order
    for c in sub.ambient.coordinates:
        if isinstance(sub, StripProduct):
            size = n if c in sub.covered else 1
        elif isinstance(sub, DiagonalSubgroup):
            size = sub.projection_order(c)
        else:
            size = len(sub.projection_values(c))
        if size != n:
            return c
    return None


def scott_decompose(sub: SubgroupHandle, check_simple: bool = True) -> StripProduct:
    """
    Recover the strip product structure of a subdirect subgroup of T^k.

    Coordinates i and j share a strip iff the projection onto {i, j} has
    order |T|; the twist between them is read off that projection. The
    recovered strip product is then checked against ``sub``: every generator
    must lie in it and the orders must agree.

    Args:
        sub: Subdirect subgroup given by generators
        check_simple: Verify that T is non-abelian simple first

    Returns:
        StripProduct equal to ``sub``

    Raises:
        NotSimpleBaseError: If T is abelian or not simple
        NotSubdirectError: If some coordinate projection is proper
        StripMismatchError: If ``sub`` differs from the recovered strip product
    """
    ambient = sub.ambient
    T = ambient.base
    if check_simple and not is_nonabelian_simple(T):
        raise NotSimpleBaseError(f"{T.name} is not a non-abelian simple group")
    bad = first_non_surjective_coordinate(sub)
    if bad is not None:
        raise NotSubdirectError(f"Projection onto coordinate {bad} is not all of {T.name}", bad)

    k = ambient.k
    links: Dict[Tuple[int, int], List[int]] = {}
    for i, j in itertools.combinations(range(1, k + 1), 2):
        pair = StabilizerChain(T, 2, [(g[i - 1], g[j - 1]) for g in sub.generators])
        if pair.order == T.order:
            images = [0] * T.order
            for t, u in pair.transversal(0).items():
                images[t] = u[1]
            links[(i, j)] = images

    parent = list(range(k + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in links:
        parent[find(j)] = find(i)
    blocks: Dict[int, List[int]] = {}
    for c in range(1, k + 1):
        blocks.setdefault(find(c), []).append(c)

    strips = []
    full = []
    for coords in sorted(blocks.values()):
        if len(coords) == 1:
            full.append(coords[0])
            continue
        first = coords[0]
        twists = []
        for c in coords[1:]:
            if (first, c) not in links:
                raise StripMismatchError(
                    f"Coordinates {first} and {c} are linked only through other coordinates"
                )
            try:
                twists.append(Automorphism.checked(T, links[(first, c)]))
            except GroupComputationError as e:
                raise StripMismatchError(f"Projection onto {{{first}, {c}}} is not a twisted diagonal: {e}")
        strips.append(FullStrip(ambient, tuple(coords), tuple(twists)))
    result = StripProduct(ambient, tuple(strips), tuple(full))

    for g in sub.generators:
        if not result.contains(g):
            raise StripMismatchError(f"Generator {list(g)} is not in the recovered {result!r}", g)
    if sub.order != result.order:
        raise StripMismatchError(f"|sub| = {sub.order} but the recovered strip product has order {result.order}")
    return result


def iter_set_partitions(items: Sequence[int]) -> Iterator[List[List[int]]]:
    """
    All set partitions of ``items``, each block in input order.

    Examples:
        list(iter_set_partitions([1, 2])) -> [[[1], [2]], [[1, 2]]]
    """
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in iter_set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def random_strip_product(
    ambient: DirectPower,
    automorphisms: Sequence[Automorphism],
    rng: Xoshiro256,
    singletons: str = "full",
    min_strips: int = 0,
) -> StripProduct:
    """
    Random strip product with uniformly drawn block labels and twists.

    Args:
        ambient: The direct power
        automorphisms: Pool of twists
        rng: Seeded generator
        singletons: "full" to include single coordinates as full factors,
            "uncovered" to leave them trivial
        min_strips: Redraw until at least this many non-trivial strips appear

    Raises:
        ValueError: If min_strips cannot be met in this ambient
    """
    if min_strips * 2 > ambient.k:
        raise ValueError(f"Cannot place {min_strips} disjoint non-trivial strips in {ambient.k} coordinates")
    while True:
        labels = [rng.randbelow(ambient.k) for _ in ambient.coordinates]
        groups: Dict[int, List[int]] = {}
        for c, label in zip(ambient.coordinates, labels):
            groups.setdefault(label, []).append(c)
        strips = []
        full = []
        for coords in groups.values():
            if len(coords) == 1:
                if singletons == "full":
                    full.append(coords[0])
                continue
            twists = tuple(rng.choice(automorphisms) for _ in coords[1:])
            strips.append(FullStrip(ambient, tuple(coords), twists))
        if len(strips) >= min_strips:
            return StripProduct(ambient, tuple(strips), tuple(full))
