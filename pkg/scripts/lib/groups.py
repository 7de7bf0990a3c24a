"""
Finite group arithmetic, morphisms and automorphism enumeration.

Groups use dense element ids 0..order-1 with 0 as the identity. Groups of
order up to TABLE_THRESHOLD keep a full Cayley table (numpy); larger
permutation and product groups multiply through an oracle. Every search in
this module visits candidates in increasing id order, so results are
reproducible run to run.
"""

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import isprime
from sympy.combinatorics import Permutation, PermutationGroup
from sympy.combinatorics.named_groups import AlternatingGroup, DihedralGroup, SymmetricGroup


# Configuration defaults
DEFAULT_ELEMENT_CAP = 10_000
TABLE_THRESHOLD = 1024
EXHAUSTIVE_ASSOCIATIVITY_LIMIT = 512
ASSOCIATIVITY_SPOT_CHECKS = 20_000

GROUP_KINDS = ["cyclic", "dihedral", "symmetric", "alternating", "heisenberg", "product", "table", "perm"]


class GroupComputationError(Exception):
    """Base error for group computations; carries the CLI exit code."""

    exit_code = 2

    def __init__(self, message: str, exit_code: Optional[int] = None):
        super().__init__(message)
        self.message = message
        if exit_code is not None:
            self.exit_code = exit_code


class GroupSpecError(GroupComputationError):
    """Raised for malformed group specifications."""

    pass


class NonAssociativeTableError(GroupComputationError):
    """Raised when a multiplication table fails associativity."""

    def __init__(self, message: str, triple: Tuple[int, int, int]):
        super().__init__(message)
        self.triple = triple


class NotAGroupError(GroupComputationError):
    """Raised when a table has no identity, lacks inverses, or is not closed."""

    pass


class MorphismError(GroupComputationError):
    """Raised when a map fails to be a homomorphism or a bijection."""

    pass


class CapExceededError(GroupComputationError):
    """Raised when a configured cap or budget would be exceeded."""

    exit_code = 3


class OrderCapExceededError(CapExceededError):
    """Raised when a group order is above the element cap."""

    def __init__(self, message: str, order: Optional[int] = None, cap: Optional[int] = None):
        super().__init__(message)
        self.order = order
        self.cap = cap


class NotUniformError(GroupComputationError):
    """Raised when a preimage under the uniform map does not exist."""

    pass


class HypothesisNotCertifiedError(GroupComputationError):
    """Raised when a theorem hypothesis fails for the given input."""

    pass


@dataclass(frozen=True)
class GroupSpec:
    """
    Declarative description of a group, loadable from JSON or the short grammar.

    Short grammar is ``kind:param[,param]`` with ``*`` for direct products,
    e.g. ``alternating:5*cyclic:2``.
    """

    kind: str
    n: Optional[int] = None
    degree: Optional[int] = None  # perm kind only
    generators: Tuple[Tuple[int, ...], ...] = ()  # perm kind only, 0-based images
    factors: Tuple["GroupSpec", ...] = ()  # product kind only
    mul: Tuple[Tuple[int, ...], ...] = ()  # table kind only

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GroupSpec":
        """
        Build a spec from its JSON-compatible dictionary form.

        Raises:
            GroupSpecError: If the kind is unknown or a required field is missing
        """
        if not isinstance(data, dict) or "kind" not in data:
            raise GroupSpecError(f"Group spec must be an object with a 'kind': {data!r}")
        kind = str(data["kind"]).lower()
        if kind not in GROUP_KINDS:
            raise GroupSpecError(f"Unsupported group kind: {kind}. Supported: {', '.join(GROUP_KINDS)}")
        try:
            if kind == "product":
                factors = tuple(cls.from_dict(f) for f in data["factors"])
                if not factors:
                    raise GroupSpecError("Product spec needs at least one factor")
                return cls(kind=kind, factors=factors)
            if kind == "table":
                return cls(kind=kind, mul=tuple(tuple(int(v) for v in row) for row in data["mul"]))
            if kind == "perm":
                return cls(
                    kind=kind,
                    degree=int(data["degree"]),
                    generators=tuple(tuple(int(v) for v in g) for g in data["generators"]),
                )
            return cls(kind=kind, n=int(data["n"]))
        except (KeyError, TypeError, ValueError) as e:
            raise GroupSpecError(f"Invalid {kind} spec {data!r}: {e}")

    def to_dict(self) -> Dict[str, Any]:
        """Return the JSON-compatible form of this spec."""
        if self.kind == "product":
            return {"kind": "product", "factors": [f.to_dict() for f in self.factors]}
        if self.kind == "table":
            return {"kind": "table", "mul": [list(row) for row in self.mul]}
        if self.kind == "perm":
            return {"kind": "perm", "degree": self.degree, "generators": [list(g) for g in self.generators]}
        return {"kind": self.kind, "n": self.n}

    @property
    def label(self) -> str:
        """Short human-readable name, e.g. ``A5`` or ``C3xC3``."""
        prefixes = {"cyclic": "C", "dihedral": "D", "symmetric": "S", "alternating": "A", "heisenberg": "He"}
        if self.kind in prefixes:
            return f"{prefixes[self.kind]}{self.n}"
        if self.kind == "product":
            return "x".join(f.label for f in self.factors)
        if self.kind == "table":
            return f"Table{len(self.mul)}"
        return f"Perm{self.degree}"


def parse_group_spec(text: str) -> GroupSpec:
    """
    Parse a group spec from the short grammar, inline JSON or ``@file.json``.

    Args:
        text: Spec text such as ``cyclic:9``, ``alternating:5*cyclic:2``,
            ``{"kind": "cyclic", "n": 3}`` or ``@groups/s3.json``

    Returns:
        Parsed GroupSpec

    Raises:
        GroupSpecError: If the text cannot be parsed

    Examples:
        parse_group_spec("cyclic:3") -> GroupSpec(kind="cyclic", n=3)
    """
    text = text.strip()
    if text.startswith("@"):
        try:
            return GroupSpec.from_dict(json.loads(Path(text[1:]).read_text(encoding="utf-8")))
        except OSError as e:
            raise GroupSpecError(f"Cannot read group spec file {text[1:]}: {e}")
        except json.JSONDecodeError as e:
            raise GroupSpecError(f"Group spec file {text[1:]} is not valid JSON: {e}")
    if text.startswith("{"):
        try:
            return GroupSpec.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise GroupSpecError(f"Group spec is not valid JSON: {e}")

    parts = [p.strip() for p in text.split("*")]
    if len(parts) > 1:
        return GroupSpec(kind="product", factors=tuple(parse_group_spec(p) for p in parts))

    kind, _, params = text.partition(":")
    kind = kind.lower()
    if kind not in GROUP_KINDS:
        raise GroupSpecError(f"Unsupported group kind: {kind}. Supported: {', '.join(GROUP_KINDS)}")
    if kind in ("table", "perm", "product"):
        raise GroupSpecError(f"Kind '{kind}' needs the JSON form of the group spec")
    values = [v for v in params.split(",") if v.strip()]
    if len(values) != 1:
        raise GroupSpecError(f"Kind '{kind}' takes exactly one parameter, got {params!r}")
    try:
        n = int(values[0])
    except ValueError:
        raise GroupSpecError(f"Parameter of '{kind}' must be an integer, got {values[0]!r}")
    if n < 1:
        raise GroupSpecError(f"Parameter of '{kind}' must be positive, got {n}")
    return GroupSpec(kind=kind, n=n)


class FiniteGroup:
    """
    A finite group on dense ids with identity 0.

    Multiplication goes through the Cayley table when one is stored and through
    the oracle otherwise. ``labels`` holds a concrete representation of each
    element (a permutation, a component tuple, ...) for reporting.
    """

    identity = 0

    def __init__(
        self,
        name: str,
        table: Optional[np.ndarray] = None,
        *,
        order: Optional[int] = None,
        oracle: Optional[Callable[[int, int], int]] = None,
        generators: Sequence[int] = (),
        labels: Optional[Sequence[Any]] = None,
    ):
        if table is None and (oracle is None or order is None):
            raise ValueError("FiniteGroup needs a table or an (order, oracle) pair")
        self.name = name
        self._table = None if table is None else np.ascontiguousarray(table, dtype=np.int64)
        self.order = int(self._table.shape[0]) if self._table is not None else int(order)  # type: ignore[arg-type]
        self._rows: Optional[List[List[int]]] = None if self._table is None else self._table.tolist()
        self._oracle = oracle
        self.labels = list(labels) if labels is not None else None
        self.generators: Tuple[int, ...] = tuple(g for g in generators if g != 0)
        if not self.generators and self.order > 1:
            self.generators = greedy_generators(self)

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name!r}, order={self.order})"

    @property
    def table(self) -> Optional[np.ndarray]:
        return self._table

    @property
    def has_table(self) -> bool:
        return self._table is not None

    def mul(self, a: int, b: int) -> int:
        if self._rows is not None:
            return self._rows[a][b]
        return self._oracle(a, b)  # type: ignore[misc]

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def mul_arrays(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise product of two id arrays of the same shape."""
        if self._table is not None:
            return self._table[a, b]
        flat = [self._oracle(int(x), int(y)) for x, y in zip(np.ravel(a), np.ravel(b))]  # type: ignore[misc]
        return np.asarray(flat, dtype=np.int64).reshape(np.shape(a))

    def power(self, a: int, exponent: int) -> int:
        result = 0
        for _ in range(exponent):
            result = self.mul(result, a)
        return result

    def elements(self) -> range:
        return range(self.order)

    @cached_property
    def inverses(self) -> np.ndarray:
        if self._table is not None:
            return np.argmax(self._table == 0, axis=1).astype(np.int64)
        result = np.zeros(self.order, dtype=np.int64)
        for g in range(self.order):
            # g^(n-1) is the inverse, n = element order
            prev, cur = 0, g
            while cur != 0:
                prev, cur = cur, self.mul(cur, g)
            result[g] = prev if g != 0 else 0
        return result

    @cached_property
    def element_orders(self) -> np.ndarray:
        orders = np.zeros(self.order, dtype=np.int64)
        orders[0] = 1
        if self._table is not None:
            ids = np.arange(self.order)
            current = ids.copy()
            exponent = 1
            while (orders == 0).any():
                current = self._table[current, ids]
                exponent += 1
                orders[(current == 0) & (orders == 0)] = exponent
            return orders
        for g in range(1, self.order):
            orders[g] = element_order(self, g)
        return orders

    @cached_property
    def is_abelian(self) -> bool:
        return all(self.mul(a, b) == self.mul(b, a) for a in self.generators for b in self.generators)

    def describe(self, g: int) -> Any:
        """Concrete representation of element ``g`` (its label, or the id)."""
        if self.labels is None:
            return g
        return self.labels[g]


def element_order(G: FiniteGroup, g: int) -> int:
    """Order of ``g`` by repeated multiplication."""
    n, cur = 1, g
    while cur != 0:
        cur = G.mul(cur, g)
        n += 1
    return n


def subgroup_closure(G: FiniteGroup, gens: Iterable[int]) -> FrozenSet[int]:
    """
    Elements of the subgroup generated by ``gens``.

    Args:
        G: Ambient group
        gens: Generating ids

    Returns:
        Frozen set of element ids
    """
    gens = [g for g in gens if g != 0]
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.mul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def greedy_generators(G: FiniteGroup) -> Tuple[int, ...]:
    """Small generating set: elements of large order first, ties by id."""
    orders = [element_order(G, g) for g in range(G.order)]
    candidates = sorted(range(1, G.order), key=lambda g: (-orders[g], g))
    gens: List[int] = []
    closure: FrozenSet[int] = frozenset({0})
    for g in candidates:
        if g in closure:
            continue
        gens.append(g)
        closure = subgroup_closure(G, gens)
        if len(closure) == G.order:
            break
    return tuple(gens)


def conjugate(G: FiniteGroup, x: int, g: int) -> int:
    """``g⁻¹ x g``."""
    return G.mul(G.mul(G.inv(g), x), g)


def conjugacy_classes(G: FiniteGroup) -> List[Tuple[int, ...]]:
    """Conjugacy classes as sorted id tuples, ordered by least element."""
    seen = set()
    classes = []
    for x in range(G.order):
        if x in seen:
            continue
        orbit = {x}
        frontier = [x]
        while frontier:
            nxt = []
            for y in frontier:
                for g in G.generators:
                    z = conjugate(G, y, g)
                    if z not in orbit:
                        orbit.add(z)
                        nxt.append(z)
            frontier = nxt
        seen |= orbit
        classes.append(tuple(sorted(orbit)))
    return classes


def normal_closure(G: FiniteGroup, seeds: Iterable[int], within: Optional[Sequence[int]] = None) -> FrozenSet[int]:
    """
    Smallest subgroup containing ``seeds`` and normalised by ``within``.

    Args:
        G: Ambient group
        seeds: Elements to close over
        within: Generators of the normalising subgroup (defaults to G's)

    Returns:
        Frozen set of element ids
    """
    within = G.generators if within is None else within
    pool = set(s for s in seeds if s != 0)
    frontier = list(pool)
    while frontier:
        nxt = []
        for x in frontier:
            for h in within:
                y = conjugate(G, x, h)
                if y != 0 and y not in pool:
                    pool.add(y)
                    nxt.append(y)
        frontier = nxt
    return subgroup_closure(G, sorted(pool))


def derived_subgroup(G: FiniteGroup, gens: Sequence[int]) -> FrozenSet[int]:
    """Commutator subgroup of ⟨gens⟩: normal closure of generator commutators."""
    comms = set()
    for a in gens:
        for b in gens:
            c = G.mul(G.mul(G.inv(a), G.inv(b)), G.mul(a, b))
            if c != 0:
                comms.add(c)
    return normal_closure(G, sorted(comms), within=gens)


def is_solvable(G: FiniteGroup) -> bool:
    """
    True iff the derived series reaches the trivial subgroup.

    The series is computed from generators; it stops as soon as a term
    equals its predecessor (a perfect subgroup) or becomes trivial.
    """
    current = frozenset(range(G.order))
    gens: Sequence[int] = G.generators
    for _ in range(G.order + 1):
        if len(current) == 1:
            return True
        derived = derived_subgroup(G, gens)
        if len(derived) == len(current):
            return False
        current = derived
        gens = greedy_subgroup_generators(G, derived)
    return len(current) == 1


def greedy_subgroup_generators(G: FiniteGroup, subgroup: FrozenSet[int]) -> Tuple[int, ...]:
    """Small generating set of a subgroup given by its elements."""
    gens: List[int] = []
    closure: FrozenSet[int] = frozenset({0})
    for g in sorted(subgroup):
        if g in closure:
            continue
        gens.append(g)
        closure = subgroup_closure(G, gens)
        if len(closure) == len(subgroup):
            break
    return tuple(gens)


def is_simple(G: FiniteGroup) -> bool:
    """True iff G is non-trivial and every non-identity class has normal closure G."""
    if G.order == 1:
        return False
    for cls in conjugacy_classes(G):
        if cls[0] == 0:
            continue
        if len(normal_closure(G, [cls[0]])) != G.order:
            return False
    return True


def is_nonabelian_simple(G: FiniteGroup) -> bool:
    return not G.is_abelian and is_simple(G)


@dataclass(frozen=True, eq=False)
class Morphism:
    """
    A homomorphism between finite groups, stored as an image array.

    ``images[g]`` is the image of element ``g``.
    """

    source: FiniteGroup
    target: FiniteGroup
    images: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.images) != self.source.order:
            raise MorphismError(
                f"Map has {len(self.images)} images, source {self.source.name} has order {self.source.order}"
            )

    def __call__(self, g: int) -> int:
        return self.images[g]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Morphism):
            return NotImplemented
        return self.source is other.source and self.target is other.target and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.images, dtype=np.int64)

    def failing_pair(self) -> Optional[Tuple[int, int]]:
        """First (g, h) with map(gh) != map(g)map(h), or None."""
        src, tgt = self.source, self.target
        if src.has_table and tgt.has_table:
            lhs = self.array[src.table]
            rhs = tgt.table[self.array[:, None], self.array[None, :]]
            bad = np.argwhere(lhs != rhs)
            if len(bad):
                return int(bad[0][0]), int(bad[0][1])
            return None
        for g in range(src.order):
            for h in range(src.order):
                if self.images[src.mul(g, h)] != tgt.mul(self.images[g], self.images[h]):
                    return g, h
        return None

    def is_homomorphism(self) -> bool:
        return self.failing_pair() is None


class Automorphism(Morphism):
    """A bijective endomorphism. ``a.then(b)`` applies ``a`` first, then ``b``."""

    def __init__(self, group: FiniteGroup, images: Sequence[int]):
        super().__init__(group, group, tuple(int(v) for v in images))

    @property
    def group(self) -> FiniteGroup:
        return self.source

    @classmethod
    def identity(cls, group: FiniteGroup) -> "Automorphism":
        return cls(group, range(group.order))

    @classmethod
    def checked(cls, group: FiniteGroup, images: Sequence[int]) -> "Automorphism":
        """
        Build an automorphism after verifying bijectivity and the homomorphism law.

        Raises:
            MorphismError: If the map is not an automorphism
        """
        alpha = cls(group, images)
        if sorted(alpha.images) != list(range(group.order)):
            raise MorphismError(f"Map on {group.name} is not a bijection")
        pair = alpha.failing_pair()
        if pair is not None:
            raise MorphismError(f"Map on {group.name} is not a homomorphism at {pair}")
        return alpha

    def then(self, other: "Automorphism") -> "Automorphism":
        return Automorphism(self.group, [other.images[v] for v in self.images])

    def inverse(self) -> "Automorphism":
        inv = [0] * len(self.images)
        for g, v in enumerate(self.images):
            inv[v] = g
        return Automorphism(self.group, inv)

    @property
    def is_identity(self) -> bool:
        return all(v == g for g, v in enumerate(self.images))

    def to_list(self) -> List[int]:
        return list(self.images)

    def __repr__(self) -> str:
        return f"Automorphism({self.group.name}, {list(self.images)[:8]}{'...' if len(self.images) > 8 else ''})"


def compose_all(alphas: Iterable[Automorphism], group: FiniteGroup) -> Automorphism:
    """``a1.then(a2).then(...)``; identity for an empty sequence."""
    result = Automorphism.identity(group)
    for a in alphas:
        result = result.then(a)
    return result


def inner_automorphism(G: FiniteGroup, g: int) -> Automorphism:
    """Conjugation ``x ↦ g⁻¹ x g``."""
    return Automorphism(G, [conjugate(G, x, g) for x in range(G.order)])


def inversion_automorphism(G: FiniteGroup) -> Automorphism:
    """
    Inversion ``x ↦ x⁻¹``.

    Raises:
        MorphismError: If G is not abelian
    """
    if not G.is_abelian:
        raise MorphismError(f"Inversion is an automorphism only of abelian groups; {G.name} is not abelian")
    return Automorphism(G, G.inverses.tolist())


def _extend_generator_images(
    G: FiniteGroup, gens: Sequence[int], images: Sequence[int]
) -> Optional[Dict[int, int]]:
    """
    Extend gens[:len(images)] ↦ images along words; None on conflict.

    The walk checks map(x·g) = map(x)·h for every reached x, which makes the
    result a homomorphism on the subgroup generated by the prefix, and keeps
    the map injective.
    """
    mapping = {0: 0}
    used = {0}
    queue = [0]
    pairs = list(zip(gens, images))
    for x in queue:
        y = mapping[x]
        for g, h in pairs:
            xs = G.mul(x, g)
            ys = G.mul(y, h)
            known = mapping.get(xs)
            if known is None:
                if ys in used:
                    return None
                mapping[xs] = ys
                used.add(ys)
                queue.append(xs)
            elif known != ys:
                return None
    return mapping


def enumerate_automorphisms(G: FiniteGroup, cap: int = DEFAULT_ELEMENT_CAP) -> List[Automorphism]:
    """
    All automorphisms of G, ordered lexicographically by generator images.

    Backtracks over images of G's generators, restricted to elements of the
    same order, and keeps an assignment only if it extends to an injective
    homomorphism on the generated subgroup.

    Args:
        G: Group to analyse
        cap: Largest order accepted

    Returns:
        List of automorphisms, identity first

    Raises:
        OrderCapExceededError: If |G| exceeds cap
    """
    if G.order > cap:
        raise OrderCapExceededError(f"|{G.name}| = {G.order} exceeds the element cap {cap}", G.order, cap)
    gens = list(G.generators)
    if not gens:
        return [Automorphism.identity(G)]
    orders = G.element_orders
    candidates = [[h for h in range(G.order) if orders[h] == orders[g]] for g in gens]
    found: List[Automorphism] = []

    def search(images: List[int]) -> None:
        depth = len(images)
        if depth == len(gens):
            mapping = _extend_generator_images(G, gens, images)
            assert mapping is not None and len(mapping) == G.order
            found.append(Automorphism(G, [mapping[g] for g in range(G.order)]))
            return
        for h in candidates[depth]:
            trial = images + [h]
            if _extend_generator_images(G, gens[: depth + 1], trial) is not None:
                search(trial)

    search([])
    return found


@dataclass(frozen=True)
class UniformityVerdict:
    """Outcome of is_uniform with witnesses for the non-uniform case."""

    uniform: bool
    image_size: int
    uncovered: Optional[int] = None  # least id outside {g⁻¹·α(g)}
    fixed_point: Optional[int] = None  # non-identity fixed point hg⁻¹ from a collision

    def __bool__(self) -> bool:
        return self.uniform


def uniform_map_values(alpha: Automorphism) -> np.ndarray:
    """Array whose entry g is ``g⁻¹·α(g)``."""
    G = alpha.group
    return G.mul_arrays(G.inverses, alpha.array)


def is_uniform(alpha: Automorphism) -> UniformityVerdict:
    """
    Decide whether ``g ↦ g⁻¹·α(g)`` is surjective.

    On failure the verdict names the least uncovered element and a
    non-identity fixed point ``h·g⁻¹`` built from the first collision
    ``g⁻¹α(g) = h⁻¹α(h)``.
    """
    G = alpha.group
    values = uniform_map_values(alpha)
    distinct = np.unique(values)
    if len(distinct) == G.order:
        return UniformityVerdict(uniform=True, image_size=G.order)
    uncovered = int(np.setdiff1d(np.arange(G.order), distinct)[0])
    first_seen: Dict[int, int] = {}
    fixed = None
    for h, v in enumerate(values.tolist()):
        if v in first_seen:
            g = first_seen[v]
            fixed = G.mul(h, G.inv(g))
            break
        first_seen[v] = h
    assert fixed is not None and fixed != 0 and alpha(fixed) == fixed
    return UniformityVerdict(uniform=False, image_size=len(distinct), uncovered=uncovered, fixed_point=fixed)


def fixed_points(alpha: Automorphism) -> FrozenSet[int]:
    """``{g : α(g) = g}``."""
    return frozenset(int(g) for g in np.flatnonzero(alpha.array == np.arange(alpha.group.order)))


def has_uniform_automorphism(G: FiniteGroup, cap: int = DEFAULT_ELEMENT_CAP) -> Optional[Automorphism]:
    """First uniform automorphism in enumeration order, or None."""
    for alpha in enumerate_automorphisms(G, cap=cap):
        if is_uniform(alpha).uniform:
            return alpha
    return None


@dataclass(frozen=True)
class NoUniformCertificate:
    """Evidence that a group has no uniform automorphism."""

    group_name: str
    automorphisms_checked: int
    solvable: bool


def certify_no_uniform_automorphism(G: FiniteGroup, cap: int = DEFAULT_ELEMENT_CAP) -> NoUniformCertificate:
    """
    Check every automorphism of G for uniformity.

    Raises:
        HypothesisNotCertifiedError: If a uniform automorphism exists
    """
    auts = enumerate_automorphisms(G, cap=cap)
    for alpha in auts:
        if is_uniform(alpha).uniform:
            raise HypothesisNotCertifiedError(
                f"{G.name} admits a uniform automorphism {alpha.to_list()}"
            )
    return NoUniformCertificate(group_name=G.name, automorphisms_checked=len(auts), solvable=is_solvable(G))


# ---------------------------------------------------------------------------
# Group construction


def _check_cap(name: str, order: int, cap: int) -> None:
    if order > cap:
        raise OrderCapExceededError(f"|{name}| = {order} exceeds the element cap {cap}", order, cap)


def cyclic_group(n: int, cap: int = DEFAULT_ELEMENT_CAP) -> FiniteGroup:
    _check_cap(f"C{n}", n, cap)
    name = f"C{n}"
    gens = (1,) if n > 1 else ()
    if n <= TABLE_THRESHOLD:
        return FiniteGroup(name, np.add.outer(np.arange(n), np.arange(n)) % n, generators=gens)
    return FiniteGroup(name, order=n, oracle=lambda a, b: (a + b) % n, generators=gens)


def heisenberg_group(p: int, cap: int = DEFAULT_ELEMENT_CAP) -> FiniteGroup:
    """
    Upper unitriangular 3x3 matrices over F_p, as triples (x, y, z).

    Product: (x, y, z)(x', y', z') = (x+x', y+y', z+z'+x·y'); id = x·p² + y·p + z.
    """
    if p < 3 or not isprime(p):
        raise GroupSpecError(f"heisenberg needs an odd prime, got {p}")
    name = f"He{p}"
    _check_cap(name, p**3, cap)
    coords = np.array([(x, y, z) for x in range(p) for y in range(p) for z in range(p)])
    x, y, z = coords[:, 0], coords[:, 1], coords[:, 2]
    nx = (x[:, None] + x[None, :]) % p
    ny = (y[:, None] + y[None, :]) % p
    nz = (z[:, None] + z[None, :] + x[:, None] * y[None, :]) % p
    table = nx * p * p + ny * p + nz
    return FiniteGroup(name, table, generators=(p * p, p), labels=[tuple(c) for c in coords.tolist()])


def permutation_group(
    name: str, degree: int, generator_images: Sequence[Sequence[int]], cap: int = DEFAULT_ELEMENT_CAP
) -> FiniteGroup:
    """
    Group generated by permutations of ``range(degree)``.

    Elements are sorted lexicographically by image tuple, which puts the
    identity first. The product ``a·b`` applies ``a`` first, then ``b``.

    Raises:
        GroupSpecError: If a generator is not a permutation of range(degree)
        OrderCapExceededError: If the generated group exceeds cap
    """
    perms = []
    for g in generator_images:
        if sorted(g) != list(range(degree)):
            raise GroupSpecError(f"Generator {list(g)} is not a permutation of 0..{degree - 1}")
        perms.append(Permutation(list(g), size=degree))
    if not perms:
        perms = [Permutation(list(range(degree)), size=degree)]
    group = PermutationGroup(perms)
    return _from_sympy(name, group, degree, [tuple(g) for g in generator_images], cap)


def _from_sympy(
    name: str, group: PermutationGroup, degree: int, gen_tuples: Sequence[Tuple[int, ...]], cap: int
) -> FiniteGroup:
    order = int(group.order())
    _check_cap(name, order, cap)
    elements = sorted(tuple(int(v) for v in p.array_form) + tuple(range(len(p.array_form), degree))
                      for p in group.generate())
    index = {e: i for i, e in enumerate(elements)}
    gens = tuple(index[g] for g in gen_tuples if g in index)

    if order <= TABLE_THRESHOLD:
        perms = np.array(elements, dtype=np.int64).reshape(order, degree)
        table = np.empty((order, order), dtype=np.int64)
        if degree <= 15:
            radix = degree ** np.arange(degree - 1, -1, -1, dtype=np.int64)
            keys = perms @ radix
            for a in range(order):
                table[a] = np.searchsorted(keys, perms[:, perms[a]] @ radix)
        else:
            for a in range(order):
                table[a] = [index[tuple(row)] for row in perms[:, perms[a]].tolist()]
        return FiniteGroup(name, table, generators=gens, labels=elements)

    def oracle(a: int, b: int) -> int:
        pa, pb = elements[a], elements[b]
        return index[tuple(pb[i] for i in pa)]

    return FiniteGroup(name, order=order, oracle=oracle, generators=gens, labels=elements)


def _named_permutation_group(kind: str, n: int, cap: int) -> FiniteGroup:
    builders = {"symmetric": SymmetricGroup, "alternating": AlternatingGroup, "dihedral": DihedralGroup}
    prefix = {"symmetric": "S", "alternating": "A", "dihedral": "D"}[kind]
    name = f"{prefix}{n}"
    if kind == "symmetric":
        _check_cap(name, _factorial(n), cap)
    elif kind == "alternating":
        _check_cap(name, max(1, _factorial(n) // 2), cap)
    else:
        _check_cap(name, 2 * n, cap)
    group = builders[kind](n)
    degree = max(group.degree, 1)
    gen_tuples = [tuple(int(v) for v in g.array_form) + tuple(range(len(g.array_form), degree))
                  for g in group.generators]
    return _from_sympy(name, group, degree, gen_tuples, cap)


def _factorial(n: int) -> int:
    result = 1
    for i in range(2, n + 1):
        result *= i
    return result


def table_group(mul: Sequence[Sequence[int]], name: str = "", seed: int = 0) -> FiniteGroup:
    """
    Validate an explicit multiplication table and relabel its identity to 0.

    Raises:
        GroupSpecError: If the table is not square or has out-of-range entries
        NotAGroupError: If there is no two-sided identity or a row/column is not a permutation
        NonAssociativeTableError: If an associativity check fails
    """
    table = np.asarray(mul, dtype=np.int64)
    n = table.shape[0] if table.ndim == 2 else 0
    if table.ndim != 2 or table.shape != (n, n) or n == 0:
        raise GroupSpecError("Multiplication table must be a non-empty square matrix")
    if table.min() < 0 or table.max() >= n:
        raise GroupSpecError(f"Table entries must lie in 0..{n - 1}")
    ids = np.arange(n)
    identities = [e for e in range(n) if (table[e] == ids).all() and (table[:, e] == ids).all()]
    if not identities:
        raise NotAGroupError("Table has no two-sided identity")
    e = identities[0]
    if e != 0:
        swap = ids.copy()
        swap[0], swap[e] = e, 0
        table = swap[table[np.ix_(swap, swap)]]
    sorted_ids = np.sort(table, axis=1)
    if not (sorted_ids == ids).all() or not (np.sort(table, axis=0) == ids[:, None]).all():
        raise NotAGroupError("Table is not a Latin square (some element lacks an inverse)")
    _check_associative(table, seed)
    return FiniteGroup(name or f"Table{n}", table)


def _check_associative(table: np.ndarray, seed: int) -> None:
    n = table.shape[0]
    if n <= EXHAUSTIVE_ASSOCIATIVITY_LIMIT:
        for a in range(n):
            lhs = table[table[a]]  # (a·b)·c over all b, c
            rhs = table[a][table]  # a·(b·c)
            bad = np.argwhere(lhs != rhs)
            if len(bad):
                b, c = (int(v) for v in bad[0])
                raise NonAssociativeTableError(f"Table is not associative at ({a}, {b}, {c})", (a, b, c))
        return
    rng = np.random.default_rng(seed)
    triples = rng.integers(0, n, size=(ASSOCIATIVITY_SPOT_CHECKS, 3))
    a, b, c = triples[:, 0], triples[:, 1], triples[:, 2]
    bad = np.flatnonzero(table[table[a, b], c] != table[a, table[b, c]])
    if len(bad):
        i = int(bad[0])
        triple = (int(a[i]), int(b[i]), int(c[i]))
        raise NonAssociativeTableError(f"Table is not associative at {triple}", triple)


def direct_product(factors: Sequence[FiniteGroup], cap: int = DEFAULT_ELEMENT_CAP) -> FiniteGroup:
    """
    Direct product with mixed-radix ids, first factor most significant.

    Element ``(g1, ..., gm)`` has id ``((g1·n2 + g2)·n3 + ...)``; the identity is 0.
    """
    name = "x".join(f.name for f in factors)
    order = 1
    for f in factors:
        order *= f.order
    _check_cap(name, order, cap)
    sizes = [f.order for f in factors]
    gens = []
    stride = order
    for f in factors:
        stride //= f.order
        gens.extend(g * stride for g in f.generators)

    def components(x: int) -> List[int]:
        parts = []
        for size in reversed(sizes):
            x, r = divmod(x, size)
            parts.append(r)
        return parts[::-1]

    labels = [tuple(components(x)) for x in range(order)]

    if order <= TABLE_THRESHOLD and all(f.has_table for f in factors):
        table = factors[0].table
        for f in factors[1:]:
            na, nb = table.shape[0], f.order  # type: ignore[union-attr]
            table = (table[:, None, :, None] * nb + f.table[None, :, None, :]).reshape(na * nb, na * nb)  # type: ignore
        return FiniteGroup(name, table, generators=gens, labels=labels)

    def oracle(a: int, b: int) -> int:
        result = 0
        for f, x, y in zip(factors, components(a), components(b)):
            result = result * f.order + f.mul(x, y)
        return result

    return FiniteGroup(name, order=order, oracle=oracle, generators=gens, labels=labels)


def make_group(spec: GroupSpec, cap: int = DEFAULT_ELEMENT_CAP) -> FiniteGroup:
    """
    Build and validate the group described by ``spec``.

    Args:
        spec: Group specification
        cap: Largest accepted order (default DEFAULT_ELEMENT_CAP)

    Returns:
        FiniteGroup with identity 0

    Raises:
        GroupSpecError: For malformed specs
        NonAssociativeTableError / NotAGroupError: For invalid tables
        OrderCapExceededError: When the order exceeds cap
    """
    kind = spec.kind
    if kind == "cyclic":
        return cyclic_group(int(spec.n), cap)  # type: ignore[arg-type]
    if kind in ("symmetric", "alternating", "dihedral"):
        return _named_permutation_group(kind, int(spec.n), cap)  # type: ignore[arg-type]
    if kind == "heisenberg":
        return heisenberg_group(int(spec.n), cap)  # type: ignore[arg-type]
    if kind == "table":
        group = table_group(spec.mul)
        _check_cap(group.name, group.order, cap)
        return group
    if kind == "perm":
        if spec.degree is None or spec.degree < 1:
            raise GroupSpecError("perm spec needs a positive degree")
        return permutation_group(spec.label, spec.degree, spec.generators, cap)
    if kind == "product":
        return direct_product([make_group(f, cap) for f in spec.factors], cap)
    raise GroupSpecError(f"Unsupported group kind: {kind}")
