"""
Diagonal-type permutation actions and product-action wreath products.

A diagonal action is the right coset action of M = T^k on the cosets of a
subdirect strip product M_ω, extended by coordinate automorphisms of M that
normalise M_ω. Points are dense ids: the canonical representative of a coset
has the identity at the least coordinate of every strip (this is the
lexicographically least tuple of the coset) and the id is the mixed-radix
number formed by the remaining coordinates in ascending order.

A compound action (two or more strips) is identified with a product action
on Δ^r, where Δ is the coset space of one strip inside its own coordinates.
A simple action (one strip) has no such identification; the search over
invariant cartesian factorisations reports this at desk scale.
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
import sympy

from .cartesian import (
    DEFAULT_FAMILY_BUDGET,
    FactorAutomorphism,
    FactorTransitiveAutGroup,
    candidate_factors,
    enumerate_cartesian_over,
)
from .chains import Element
from .factorisation import Progress
from .groups import (
    CapExceededError,
    FiniteGroup,
    GroupComputationError,
    inner_automorphism,
    is_nonabelian_simple,
)
from .sampling import DEFAULT_SEED, PRNG_ALGORITHM, Xoshiro256
from .strips import (
    DirectPower,
    FullStrip,
    NotSimpleBaseError,
    NotSubdirectError,
    StripProduct,
    is_subdirect,
)


DEFAULT_POINT_CAP = 1_000_000
DEFAULT_EQUIVARIANCE_SAMPLES = 10_000
EXHAUSTIVE_EQUIVARIANCE_DEGREE = 10_000

TYPE_SIMPLE = "simple"
TYPE_COMPOUND = "compound"


class SimpleTypeError(GroupComputationError):
    """Raised when a product-action embedding is requested for a simple diagonal action."""

    pass


class ActionAxiomError(GroupComputationError):
    """Raised when a constructed action table breaks the action axioms."""

    def __init__(self, message: str, generator: Optional[str] = None):
        super().__init__(message)
        self.generator = generator


# ---------------------------------------------------------------------------
# Generic permutation actions


@dataclass
class PermAction:
    """
    A group acting on {0, ..., degree-1} through generator tables.

    ``tables[name][p]`` is the image of point p under the generator ``name``.
    """

    degree: int
    tables: Dict[str, np.ndarray] = field(default_factory=dict)
    base_point: int = 0

    def image(self, name: str, point: int) -> int:
        return int(self.tables[name][point])

    def orbit(self, point: Optional[int] = None, names: Optional[Sequence[str]] = None) -> np.ndarray:
        """Sorted orbit of ``point`` under the named generators (all by default)."""
        start = self.base_point if point is None else point
        tables = [self.tables[n] for n in (names if names is not None else self.tables)]
        seen = np.zeros(self.degree, dtype=bool)
        seen[start] = True
        frontier = np.array([start], dtype=np.int64)
        while frontier.size:
            reached = np.concatenate([t[frontier] for t in tables]) if tables else frontier[:0]
            reached = np.unique(reached)
            frontier = reached[~seen[reached]]
            seen[frontier] = True
        return np.flatnonzero(seen)

    def is_transitive(self, names: Optional[Sequence[str]] = None) -> bool:
        return len(self.orbit(names=names)) == self.degree

    def non_permutation(self) -> Optional[str]:
        """Name of the first table that is not a bijection, or None."""
        for name, table in self.tables.items():
            if table.shape != (self.degree,) or len(np.unique(table)) != self.degree:
                return name
        return None


def _mixed_radix_weights(radix: int, digits: int) -> np.ndarray:
    return np.array([radix ** (digits - 1 - i) for i in range(digits)], dtype=np.int64)


def _decode_digits(ids: np.ndarray, radix: int, digits: int) -> np.ndarray:
    out = np.zeros((len(ids), digits), dtype=np.int64)
    rest = np.asarray(ids, dtype=np.int64).copy()
    for i in range(digits - 1, -1, -1):
        out[:, i] = rest % radix
        rest //= radix
    return out


class _CosetCoder:
    """Canonical coset ids for a product of strips acting on the right."""

    def __init__(self, base: FiniteGroup, strips: Sequence[FullStrip]):
        self.base = base
        self.strips = tuple(strips)
        self.free = tuple(sorted(c for s in self.strips for c in s.support[1:]))
        self.weights = _mixed_radix_weights(base.order, len(self.free))
        self.size = base.order ** len(self.free)

    def canonicalize(self, rows: np.ndarray) -> np.ndarray:
        """Replace every row by the representative of its coset; ``rows`` is (N, k)."""
        rows = rows.copy()
        inverses = self.base.inverses
        for s in self.strips:
            t = inverses[rows[:, s.support[0] - 1]]
            rows[:, s.support[0] - 1] = 0
            for c, alpha in zip(s.support[1:], s.twists):
                rows[:, c - 1] = self.base.mul_arrays(alpha.array[t], rows[:, c - 1])
        return rows

    def encode(self, rows: np.ndarray) -> np.ndarray:
        if not self.free:
            return np.zeros(len(rows), dtype=np.int64)
        return rows[:, [c - 1 for c in self.free]] @ self.weights

    def decode(self, ids: np.ndarray, k: int) -> np.ndarray:
        rows = np.zeros((len(ids), k), dtype=np.int64)
        digits = _decode_digits(ids, self.base.order, len(self.free))
        for i, c in enumerate(self.free):
            rows[:, c - 1] = digits[:, i]
        return rows


def _apply_automorphism_rows(a: FactorAutomorphism, rows: np.ndarray) -> np.ndarray:
    out = np.empty_like(rows)
    for c, (target, phi) in enumerate(zip(a.perm, a.maps)):
        out[:, target - 1] = phi.array[rows[:, c]]
    return out


def _multiply_rows(base: FiniteGroup, rows: np.ndarray, x: Sequence[int]) -> np.ndarray:
    out = rows.copy()
    for c, t in enumerate(x):
        if t != 0:
            out[:, c] = base.mul_arrays(rows[:, c], np.full(len(rows), t, dtype=np.int64))
    return out


# ---------------------------------------------------------------------------
# Diagonal actions


def _permutation_closure(gens: Sequence[Tuple[int, ...]], k: int) -> Set[Tuple[int, ...]]:
    identity = tuple(range(1, k + 1))
    seen = {identity}
    queue = [identity]
    for p in queue:
        for g in gens:
            q = tuple(g[c - 1] for c in p)
            if q not in seen:
                seen.add(q)
                queue.append(q)
    return seen


def normalising_permutations(stabilizer: StripProduct) -> List[FactorAutomorphism]:
    """
    Generators for the coordinate permutations that normalise a strip product.

    The stabiliser is enumerated over all k! permutations; generators are
    chosen greedily in lexicographic order.
    """
    M = stabilizer.ambient
    keep: List[Tuple[int, ...]] = []
    closure = _permutation_closure([], M.k)
    for perm in itertools.permutations(range(1, M.k + 1)):
        if perm in closure:
            continue
        a = FactorAutomorphism.permutation(M, perm)
        if a.image(stabilizer) == stabilizer:
            keep.append(perm)
            closure = _permutation_closure(keep, M.k)
    return [FactorAutomorphism.permutation(M, p) for p in keep]


class DiagonalAction:
    """
    M = T^k with its normalising top automorphisms acting on the cosets of M_ω.

    Build instances with :func:`build_diagonal_action`, which verifies the
    action; the constructor only lays out the coset space.
    """

    def __init__(self, ambient: DirectPower, stabilizer: StripProduct, top: Sequence[FactorAutomorphism]):
        self.ambient = ambient
        self.stabilizer = stabilizer
        self.top: Tuple[FactorAutomorphism, ...] = tuple(top)
        self._coder = _CosetCoder(ambient.base, stabilizer.strips)

    def __repr__(self) -> str:
        return f"DiagonalAction({self.ambient.label}, {self.stabilizer}, degree={self.degree})"

    @property
    def degree(self) -> int:
        return self._coder.size

    @property
    def strip_count(self) -> int:
        return len(self.stabilizer.strips)

    @property
    def diagonal_type(self) -> str:
        return TYPE_SIMPLE if self.strip_count == 1 else TYPE_COMPOUND

    @property
    def is_simple_type(self) -> bool:
        return self.strip_count == 1

    @property
    def is_compound_type(self) -> bool:
        return self.strip_count >= 2

    @cached_property
    def m_generators(self) -> Dict[str, Element]:
        T = self.ambient.base
        return {f"unit({c},{t})": self.ambient.unit(c, t) for c in self.ambient.coordinates for t in T.generators}

    @cached_property
    def top_generators(self) -> Dict[str, FactorAutomorphism]:
        return {f"top[{i}]": a for i, a in enumerate(self.top)}

    @cached_property
    def representatives(self) -> np.ndarray:
        """Canonical representative of every point, shape (degree, k)."""
        return self._coder.decode(np.arange(self.degree, dtype=np.int64), self.ambient.k)

    def point_of(self, x: Sequence[int]) -> int:
        """Id of the coset M_ω x."""
        rows = np.asarray([self.ambient.check_element(x)], dtype=np.int64)
        return int(self._coder.encode(self._coder.canonicalize(rows))[0])

    def representative(self, point: int) -> Element:
        return tuple(int(v) for v in self._coder.decode(np.array([point]), self.ambient.k)[0])

    def act(self, points: np.ndarray, x: Sequence[int]) -> np.ndarray:
        """Images of ``points`` under right multiplication by x ∈ M."""
        rows = self._coder.decode(np.asarray(points, dtype=np.int64), self.ambient.k)
        return self._coder.encode(self._coder.canonicalize(_multiply_rows(self.ambient.base, rows, x)))

    def act_automorphism(self, points: np.ndarray, a: FactorAutomorphism) -> np.ndarray:
        """Images of ``points`` under a top automorphism: M_ω x ↦ M_ω a(x)."""
        rows = self._coder.decode(np.asarray(points, dtype=np.int64), self.ambient.k)
        return self._coder.encode(self._coder.canonicalize(_apply_automorphism_rows(a, rows)))

    def act_generator(self, points: np.ndarray, name: str) -> np.ndarray:
        if name in self.m_generators:
            return self.act(points, self.m_generators[name])
        return self.act_automorphism(points, self.top_generators[name])

    def table_for(self, x: Sequence[int]) -> np.ndarray:
        return self.act(np.arange(self.degree, dtype=np.int64), x)

    def table_for_automorphism(self, a: FactorAutomorphism) -> np.ndarray:
        return self.act_automorphism(np.arange(self.degree, dtype=np.int64), a)

    @cached_property
    def action(self) -> PermAction:
        tables = {name: self.table_for(x) for name, x in self.m_generators.items()}
        tables.update({name: self.table_for_automorphism(a) for name, a in self.top_generators.items()})
        return PermAction(self.degree, tables)

    @cached_property
    def top_group(self) -> FactorTransitiveAutGroup:
        return FactorTransitiveAutGroup(self.ambient, self.top, check_transitive=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "base": self.ambient.base.name,
            "k": self.ambient.k,
            "type": self.diagonal_type,
            "degree": self.degree,
            "stabilizer": self.stabilizer.to_dict(),
            "top": [a.to_dict() for a in self.top],
        }


def _check_action_axioms(D: DiagonalAction) -> None:
    action = D.action
    bad = action.non_permutation()
    if bad is not None:
        raise ActionAxiomError(f"Generator {bad} does not act as a permutation", bad)
    if not np.array_equal(D.table_for(D.ambient.identity), np.arange(D.degree)):
        raise ActionAxiomError("The identity of M moves a point")
    for (gname, g), (hname, h) in itertools.product(D.m_generators.items(), repeat=2):
        if not np.array_equal(D.table_for(D.ambient.mul(g, h)), action.tables[hname][action.tables[gname]]):
            raise ActionAxiomError(f"Action of {gname}·{hname} is not the composite action", gname)
    for (aname, a), (bname, b) in itertools.product(D.top_generators.items(), repeat=2):
        if not np.array_equal(D.table_for_automorphism(a.then(b)), action.tables[bname][action.tables[aname]]):
            raise ActionAxiomError(f"Action of {aname}·{bname} is not the composite action", aname)


def build_diagonal_action(
    T: FiniteGroup,
    strips: StripProduct,
    top: Optional[Sequence[FactorAutomorphism]] = None,
    point_cap: int = DEFAULT_POINT_CAP,
) -> DiagonalAction:
    """
    Coset action of T^k on the cosets of a subdirect strip product.

    Args:
        T: Non-abelian simple factor group
        strips: M_ω, pairwise disjoint non-trivial full strips covering 1..k
        top: Coordinate automorphisms normalising M_ω; by default every
            normalising coordinate permutation
        point_cap: Largest number of points to build

    Returns:
        The verified action: axioms on generators, transitivity of M and a
        base point stabiliser equal to M_ω

    Raises:
        NotSimpleBaseError: If T is abelian or not simple
        NotSubdirectError: If the strips leave a coordinate uncovered or full
        CapExceededError: If |M|/|M_ω| exceeds point_cap
        ValueError: If a top automorphism does not normalise M_ω

    Examples:
        >>> D = build_diagonal_action(A5, diagonal_of_a5_squared)
        >>> D.degree
        60
    """
    M = strips.ambient
    if M.base is not T:
        raise ValueError(f"Strip product lives over {M.base.name}, not {T.name}")
    if not is_nonabelian_simple(T):
        raise NotSimpleBaseError(f"{T.name} is not a non-abelian simple group")
    if strips.full:
        raise ValueError(f"M_ω must be a product of non-trivial strips; coordinates {list(strips.full)} are full")
    missing = [c for c in M.coordinates if c not in strips.covered]
    if missing:
        raise NotSubdirectError(f"M_ω does not project onto coordinate {missing[0]}", missing[0])
    degree = T.order ** (M.k - len(strips.strips))
    if degree > point_cap:
        raise CapExceededError(f"{degree} points exceed the point cap {point_cap}")
    if top is None:
        top = normalising_permutations(strips)
    for a in top:
        if a.image(strips) != strips:
            raise ValueError(f"{a} does not normalise M_ω")
    D = DiagonalAction(M, strips, top)
    _check_action_axioms(D)
    if not D.action.is_transitive(list(D.m_generators)):
        raise ActionAxiomError("M is not transitive on the coset space")
    for x in strips.generators():
        if D.point_of(x) != 0:
            raise ActionAxiomError(f"Stabiliser element {list(x)} moves the base point")
    return D


@dataclass
class QuasiprimitivityReport:
    """Structural checks standing in for quasiprimitivity; normal subgroups are not enumerated."""

    m_transitive: bool
    factor_transitive: bool
    stabilizer_subdirect: bool
    orbit_size: int
    degree: int
    factor_orbit: List[int]
    method: str = "structural"

    @property
    def holds(self) -> bool:
        return self.m_transitive and self.factor_transitive and self.stabilizer_subdirect

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "m_transitive": self.m_transitive,
            "factor_transitive": self.factor_transitive,
            "stabilizer_subdirect": self.stabilizer_subdirect,
            "orbit_size": self.orbit_size,
            "degree": self.degree,
            "factor_orbit": self.factor_orbit,
            "method": self.method,
        }


def check_structural_quasiprimitivity(D: DiagonalAction) -> QuasiprimitivityReport:
    """M transitive on points, the top part transitive on the factors, M_ω subdirect."""
    orbit = D.action.orbit(names=list(D.m_generators))
    return QuasiprimitivityReport(
        m_transitive=len(orbit) == D.degree,
        factor_transitive=D.top_group.is_transitive,
        stabilizer_subdirect=is_subdirect(D.stabilizer),
        orbit_size=len(orbit),
        degree=D.degree,
        factor_orbit=D.top_group.factor_orbit(1),
    )


# ---------------------------------------------------------------------------
# Wreath products in product action


@dataclass(frozen=True)
class WreathElement:
    """
    (g_1, ..., g_ℓ; σ) in Sym Γ ≀ S_ℓ.

    ``base[i-1]`` is g_i as an image list on Γ; ``top[i-1]`` is σ(i).
    """

    base: Tuple[Tuple[int, ...], ...]
    top: Tuple[int, ...]

    @property
    def ell(self) -> int:
        return len(self.top)

    @property
    def top_is_identity(self) -> bool:
        return all(s == i for i, s in enumerate(self.top, start=1))

    def to_dict(self) -> Dict[str, Any]:
        return {"base": [list(g) for g in self.base], "top": list(self.top)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WreathElement":
        return cls(tuple(tuple(int(v) for v in g) for g in data["base"]), tuple(int(s) for s in data["top"]))


class ProductActionWreath:
    """
    Sym Γ ≀ S_ℓ acting on Γ^ℓ.

    Coordinate i of the image of (γ_1, ..., γ_ℓ) under (g_1, ..., g_ℓ; σ) is
    γ_j·g_j with j = σ⁻¹(i). Points are mixed-radix ids with coordinate 1 as
    the most significant digit.
    """

    def __init__(self, gamma_size: int, ell: int, generators: Sequence[WreathElement] = (),
                 point_cap: int = DEFAULT_POINT_CAP):
        if gamma_size < 2:
            raise ValueError(f"|Γ| must be at least 2, got {gamma_size}")
        if ell < 2:
            raise ValueError(f"ℓ must be at least 2, got {ell}")
        if gamma_size**ell > point_cap:
            raise CapExceededError(f"{gamma_size}^{ell} points exceed the point cap {point_cap}")
        self.gamma_size = gamma_size
        self.ell = ell
        self.weights = _mixed_radix_weights(gamma_size, ell)
        self.generators: Tuple[WreathElement, ...] = tuple(self.check(g) for g in generators)

    def __repr__(self) -> str:
        return f"ProductActionWreath(|Γ|={self.gamma_size}, ℓ={self.ell})"

    @property
    def degree(self) -> int:
        return self.gamma_size**self.ell

    def check(self, g: WreathElement) -> WreathElement:
        n = self.gamma_size
        if len(g.base) != self.ell or sorted(g.top) != list(range(1, self.ell + 1)):
            raise ValueError(f"Element does not belong to Sym({n}) wr S_{self.ell}")
        for perm in g.base:
            if sorted(perm) != list(range(n)):
                raise ValueError(f"Base component is not a permutation of {n} points")
        return g

    @property
    def identity(self) -> WreathElement:
        one = tuple(range(self.gamma_size))
        return WreathElement((one,) * self.ell, tuple(range(1, self.ell + 1)))

    def base_element(self, coordinate: int, perm: Sequence[int]) -> WreathElement:
        """Element with ``perm`` at ``coordinate``, identity elsewhere, trivial top."""
        e = self.identity
        base = list(e.base)
        base[coordinate - 1] = tuple(perm)
        return self.check(WreathElement(tuple(base), e.top))

    def top_element(self, sigma: Sequence[int]) -> WreathElement:
        return self.check(WreathElement(self.identity.base, tuple(sigma)))

    def encode(self, digits: np.ndarray) -> np.ndarray:
        return np.asarray(digits, dtype=np.int64) @ self.weights

    def decode(self, ids: np.ndarray) -> np.ndarray:
        return _decode_digits(np.asarray(ids, dtype=np.int64), self.gamma_size, self.ell)

    def act_point(self, gammas: Sequence[int], g: WreathElement) -> Tuple[int, ...]:
        out = [0] * self.ell
        for j, target in enumerate(g.top):
            out[target - 1] = g.base[j][gammas[j]]
        return tuple(out)

    def act(self, points: np.ndarray, g: WreathElement) -> np.ndarray:
        digits = self.decode(points)
        out = np.empty_like(digits)
        for j, target in enumerate(g.top):
            out[:, target - 1] = np.asarray(g.base[j], dtype=np.int64)[digits[:, j]]
        return self.encode(out)

    def table(self, g: WreathElement) -> np.ndarray:
        return self.act(np.arange(self.degree, dtype=np.int64), g)

    def multiply(self, g: WreathElement, h: WreathElement) -> WreathElement:
        """The element acting as g, then h."""
        base = tuple(tuple(h.base[g.top[i] - 1][v] for v in g.base[i]) for i in range(self.ell))
        top = tuple(h.top[s - 1] for s in g.top)
        return WreathElement(base, top)

    def inverse(self, g: WreathElement) -> WreathElement:
        base: List[Tuple[int, ...]] = [()] * self.ell
        top = [0] * self.ell
        for i, s in enumerate(g.top, start=1):
            inv = [0] * self.gamma_size
            for x, y in enumerate(g.base[i - 1]):
                inv[y] = x
            base[s - 1] = tuple(inv)
            top[s - 1] = i
        return WreathElement(tuple(base), tuple(top))

    def top_projection(self, g: WreathElement) -> Tuple[int, ...]:
        """π: the permutation of the coordinates."""
        return g.top

    def base_projection(self, g: WreathElement, coordinate: int) -> Tuple[int, ...]:
        """π_i, defined on the base group."""
        if not g.top_is_identity:
            raise ValueError("Coordinate projections are defined on the base group only")
        return g.base[coordinate - 1]

    def action(self, generators: Optional[Sequence[WreathElement]] = None) -> PermAction:
        gens = self.generators if generators is None else generators
        return PermAction(self.degree, {f"w[{i}]": self.table(g) for i, g in enumerate(gens)})


def build_wreath_product_action(
    gamma_size: int,
    ell: int,
    base_generators: Optional[Sequence[Sequence[int]]] = None,
    top_generators: Optional[Sequence[Sequence[int]]] = None,
    point_cap: int = DEFAULT_POINT_CAP,
) -> ProductActionWreath:
    """
    Sym Γ ≀ S_ℓ, or a subgroup of it, in product action.

    Every base generator is placed in each coordinate in turn; top
    generators permute the coordinates. The defaults generate the full
    wreath product with a transposition and a long cycle on each side.

    Raises:
        ValueError: If |Γ| < 2 or ℓ < 2
        CapExceededError: If |Γ|^ℓ exceeds point_cap
    """
    if base_generators is None:
        base_generators = [[1, 0] + list(range(2, gamma_size)), list(range(1, gamma_size)) + [0]]
    if top_generators is None:
        top_generators = [[2, 1] + list(range(3, ell + 1)), list(range(2, ell + 1)) + [1]]
    W = ProductActionWreath(gamma_size, ell, point_cap=point_cap)
    gens = [W.base_element(i, perm) for perm in base_generators for i in range(1, ell + 1)]
    gens += [W.top_element(sigma) for sigma in top_generators]
    W.generators = tuple(gens)
    return W


# ---------------------------------------------------------------------------
# Compound embedding


@dataclass
class EquivarianceCheck:
    """Outcome of checking witness(p·g) = witness(p)·image(g)."""

    mode: str
    pairs_checked: int
    failures: int
    first_failure: Optional[Tuple[int, str]] = None  # (point, generator name)
    seed: Optional[int] = None

    @property
    def holds(self) -> bool:
        return self.failures == 0 and self.pairs_checked > 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "mode": self.mode,
            "pairs_checked": self.pairs_checked,
            "failures": self.failures,
            "first_failure": None if self.first_failure is None else list(self.first_failure),
            "seed": self.seed,
            "prng": PRNG_ALGORITHM if self.mode == "sampled" else None,
        }


@dataclass
class EmbeddingWitness:
    """An identification Ω = Δ^r under which the action lies in Sym Δ ≀ S_r."""

    delta_size: int
    r: int
    blocks: Tuple[Tuple[int, ...], ...]  # coordinates of M_1, ..., M_r
    bijection: np.ndarray  # point of Ω -> point of Δ^r
    images: Dict[str, WreathElement]
    check: Optional[EquivarianceCheck] = None

    @property
    def verified(self) -> bool:
        return self.check is not None and self.check.holds

    def wreath(self, point_cap: int = DEFAULT_POINT_CAP) -> ProductActionWreath:
        return ProductActionWreath(self.delta_size, self.r, point_cap=max(point_cap, self.delta_size**self.r))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta_size": self.delta_size,
            "r": self.r,
            "blocks": [list(b) for b in self.blocks],
            "bijection": self.bijection.tolist(),
            "generator_images": {name: g.to_dict() for name, g in sorted(self.images.items())},
            "equivariance": None if self.check is None else self.check.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EmbeddingWitness":
        return cls(
            delta_size=int(data["delta_size"]),
            r=int(data["r"]),
            blocks=tuple(tuple(int(c) for c in b) for b in data["blocks"]),
            bijection=np.asarray(data["bijection"], dtype=np.int64),
            images={name: WreathElement.from_dict(g) for name, g in data["generator_images"].items()},
        )


class _BlockCoder:
    """Coset ids of one strip inside the coordinates of its own support."""

    def __init__(self, ambient: DirectPower, strip: FullStrip):
        self.ambient = ambient
        self.strip = strip
        self.coder = _CosetCoder(ambient.base, [strip])

    def rows(self, deltas: np.ndarray) -> np.ndarray:
        return self.coder.decode(np.asarray(deltas, dtype=np.int64), self.ambient.k)

    def ids(self, rows: np.ndarray) -> np.ndarray:
        return self.coder.encode(self.coder.canonicalize(rows))


def _witness_images(D: DiagonalAction, coders: Sequence[_BlockCoder]) -> Dict[str, WreathElement]:
    T = D.ambient.base
    size = coders[0].coder.size
    deltas = np.arange(size, dtype=np.int64)
    identity = tuple(range(size))
    r = len(coders)
    images: Dict[str, WreathElement] = {}
    for name, x in D.m_generators.items():
        base = []
        for coder in coders:
            local = [t if c in coder.strip.support else 0 for c, t in enumerate(x, start=1)]
            if any(local):
                base.append(tuple(int(v) for v in coder.ids(_multiply_rows(T, coder.rows(deltas), local))))
            else:
                base.append(identity)
        images[name] = WreathElement(tuple(base), tuple(range(1, r + 1)))
    supports = [set(coder.strip.support) for coder in coders]
    for name, a in D.top_generators.items():
        top = []
        base = []
        for coder in coders:
            moved = {a.perm[c - 1] for c in coder.strip.support}
            target = supports.index(moved)
            rows = _apply_automorphism_rows(a, coder.rows(deltas))
            base.append(tuple(int(v) for v in coders[target].ids(rows)))
            top.append(target + 1)
        images[name] = WreathElement(tuple(base), tuple(top))
    return images


def _bijection(D: DiagonalAction, coders: Sequence[_BlockCoder], points: np.ndarray) -> np.ndarray:
    rows = D.representatives[points]
    digits = np.stack([coder.coder.encode(rows) for coder in coders], axis=1)
    return digits @ _mixed_radix_weights(coders[0].coder.size, len(coders))


def verify_witness(
    D: DiagonalAction,
    witness: EmbeddingWitness,
    samples: int = DEFAULT_EQUIVARIANCE_SAMPLES,
    seed: int = DEFAULT_SEED,
    exhaustive: Optional[bool] = None,
) -> EquivarianceCheck:
    """
    Check equivariance of a witness on every generator.

    All (point, generator) pairs are checked when the degree is at most
    EXHAUSTIVE_EQUIVARIANCE_DEGREE (or ``exhaustive`` is set); otherwise
    ``samples`` pairs are drawn with the seeded generator.
    """
    if len(witness.bijection) != D.degree:
        raise ValueError(f"Witness maps {len(witness.bijection)} points, the action has {D.degree}")
    names = sorted(set(D.m_generators) | set(D.top_generators))
    missing = [n for n in names if n not in witness.images]
    if missing:
        raise ValueError(f"Witness has no image for generator {missing[0]}")
    W = witness.wreath()
    if exhaustive is None:
        exhaustive = D.degree <= EXHAUSTIVE_EQUIVARIANCE_DEGREE
    if exhaustive:
        plan = {name: np.arange(D.degree, dtype=np.int64) for name in names}
        mode = "exhaustive"
    else:
        rng = Xoshiro256(seed).split("equivariance")
        chosen: Dict[str, List[int]] = {name: [] for name in names}
        for _ in range(samples):
            chosen[names[rng.randbelow(len(names))]].append(rng.randbelow(D.degree))
        plan = {name: np.asarray(pts, dtype=np.int64) for name, pts in chosen.items() if pts}
        mode = "sampled"
    checked = 0
    failures = 0
    first: Optional[Tuple[int, str]] = None
    for name in names:
        points = plan.get(name)
        if points is None:
            continue
        lhs = witness.bijection[D.act_generator(points, name)]
        rhs = W.act(witness.bijection[points], witness.images[name])
        bad = np.flatnonzero(lhs != rhs)
        checked += len(points)
        failures += len(bad)
        if len(bad) and first is None:
            first = (int(points[bad[0]]), name)
    return EquivarianceCheck(mode, checked, failures, first, None if exhaustive else seed)


def embed_compound(
    D: DiagonalAction,
    samples: int = DEFAULT_EQUIVARIANCE_SAMPLES,
    seed: int = DEFAULT_SEED,
    exhaustive: Optional[bool] = None,
    progress: Progress = None,
) -> EmbeddingWitness:
    """
    Identify a compound diagonal action with a product action on Δ^r.

    M is grouped by strip supports into M_1, ..., M_r so that M_ω is the
    product of the M_j ∩ M_ω; Δ is the coset space of one strip inside its
    own coordinates. Each generator of M moves one component; each top
    automorphism permutes the components as it permutes the strips.

    Raises:
        SimpleTypeError: If M_ω is a single strip
        GroupComputationError: If the strips have supports of different sizes
    """
    if D.is_simple_type:
        raise SimpleTypeError(f"{D.ambient.label} acting on the cosets of a single strip is of simple type "
                              "and is not contained in a product-action wreath product")
    strips = D.stabilizer.strips
    if len({len(s.support) for s in strips}) != 1:
        raise GroupComputationError("Strip supports differ in size; the components are not isomorphic")
    coders = [_BlockCoder(D.ambient, s) for s in strips]
    if progress:
        progress(f"{D.ambient.label}: Δ of size {coders[0].coder.size}, r = {len(coders)}")
    witness = EmbeddingWitness(
        delta_size=coders[0].coder.size,
        r=len(coders),
        blocks=tuple(s.support for s in strips),
        bijection=_bijection(D, coders, np.arange(D.degree, dtype=np.int64)),
        images=_witness_images(D, coders),
    )
    witness.check = verify_witness(D, witness, samples=samples, seed=seed, exhaustive=exhaustive)
    if progress:
        progress(f"equivariance: {witness.check.pairs_checked} pairs, {witness.check.failures} failures "
                 f"({witness.check.mode})")
    return witness


# ---------------------------------------------------------------------------
# Invariant cartesian decompositions and the base group


@dataclass
class DecompositionSearchReport:
    """Cartesian factorisations over M_ω invariant under the point stabiliser's action on M."""

    diagonal_type: str
    degree: int
    strip_count: int
    g0_generators: int
    factor_transitive: bool
    candidates: int
    families_checked: int
    decompositions: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def found(self) -> int:
        return len(self.decompositions)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "diagonal_type": self.diagonal_type,
            "degree": self.degree,
            "strip_count": self.strip_count,
            "g0_generators": self.g0_generators,
            "factor_transitive": self.factor_transitive,
            "candidates": self.candidates,
            "families_checked": self.families_checked,
            "found": self.found,
            "decompositions": self.decompositions,
        }


def stabilizer_action_group(D: DiagonalAction) -> FactorTransitiveAutGroup:
    """
    G0: the top automorphisms together with conjugation by generators of M_ω.

    Both fix the base point, so a product-action structure preserved by the
    group yields a cartesian factorisation of M invariant under G0.
    """
    T = D.ambient.base
    gens = list(D.top)
    for s in D.stabilizer.strips:
        for t in T.generators:
            x = s.element(t)
            gens.append(FactorAutomorphism(D.ambient, tuple(D.ambient.coordinates),
                                           tuple(inner_automorphism(T, v) for v in x)))
    return FactorTransitiveAutGroup(D.ambient, gens, check_transitive=False)


def search_invariant_cartesian_decompositions(
    D: DiagonalAction,
    family_budget: int = DEFAULT_FAMILY_BUDGET,
    progress: Progress = None,
) -> DecompositionSearchReport:
    """
    Decide whether the action preserves a product-action structure.

    Such a structure with point stabiliser M_ω corresponds to a cartesian
    factorisation {K_1, ..., K_ℓ} of M with ∩K_i = M_ω that is invariant under
    G0; this enumerates them all. Empty for simple type.

    Raises:
        CapExceededError: If more than family_budget families would be tried
    """
    M = D.ambient
    G0 = stabilizer_action_group(D)
    candidates = sum(1 for _ in candidate_factors(D.stabilizer))
    families = sum(math.comb(candidates, size) for size in range(2, M.k + 1))
    if progress:
        progress(f"{M.label}: {candidates} candidate factors, {families} families")
    found = enumerate_cartesian_over(M, D.stabilizer, G0, family_budget=family_budget)
    return DecompositionSearchReport(
        diagonal_type=D.diagonal_type,
        degree=D.degree,
        strip_count=D.strip_count,
        g0_generators=len(G0.generators),
        factor_transitive=G0.is_transitive,
        candidates=candidates,
        families_checked=families,
        decompositions=[cf.to_dict() for cf in found],
    )


@dataclass
class DivisibilityRow:
    """p-parts of |Ω| = |Γ|^ℓ and of ℓ! for one prime p dividing |Γ|."""

    prime: int
    omega_valuation: int
    factorial_valuation: int

    @property
    def divides_factorial(self) -> bool:
        return self.omega_valuation <= self.factorial_valuation

    def to_dict(self) -> Dict[str, Any]:
        return {
            "prime": self.prime,
            "omega_valuation": self.omega_valuation,
            "factorial_valuation": self.factorial_valuation,
            "divides_factorial": self.divides_factorial,
        }


def divisibility_obstruction(gamma_size: int, ell: int) -> List[DivisibilityRow]:
    """
    For each prime p | |Γ|, compare v_p(|Γ|^ℓ) with v_p(ℓ!).

    v_p(ℓ!) < ℓ always, so p^ℓ never divides ℓ!.

    Examples:
        >>> [row.divides_factorial for row in divisibility_obstruction(2, 3)]
        [False]
    """
    if gamma_size < 2 or ell < 1:
        raise ValueError(f"Need |Γ| >= 2 and ℓ >= 1, got {gamma_size}, {ell}")
    factorial = math.factorial(ell)
    rows = []
    for p, e in sorted(sympy.factorint(gamma_size).items()):
        rows.append(DivisibilityRow(int(p), e * ell, int(sympy.multiplicity(p, factorial))))
    return rows


@dataclass
class ContainmentReport:
    """Whether a subgroup of Sym Γ ≀ S_ℓ lies in the base group."""

    transitive: bool
    orbit_size: int
    degree: int
    top_trivial: bool
    obstruction: List[DivisibilityRow]
    nontrivial_top: List[str] = field(default_factory=list)  # generators with π ≠ 1

    @property
    def claimed(self) -> bool:
        """The divisibility argument applies: M is transitive and p^ℓ ∤ ℓ!."""
        return self.transitive and all(not row.divides_factorial for row in self.obstruction)

    @property
    def consistent(self) -> bool:
        return not self.claimed or self.top_trivial

    def to_dict(self) -> Dict[str, Any]:
        return {
            "claimed": self.claimed,
            "consistent": self.consistent,
            "transitive": self.transitive,
            "orbit_size": self.orbit_size,
            "degree": self.degree,
            "top_trivial": self.top_trivial,
            "nontrivial_top": self.nontrivial_top,
            "obstruction": [row.to_dict() for row in self.obstruction],
        }


def check_base_group_containment(W: ProductActionWreath, generators: Dict[str, WreathElement]) -> ContainmentReport:
    """
    Check that a transitive subgroup M of W projects trivially to S_ℓ.

    The argument is recorded (transitivity and the divisibility table) next
    to the direct evaluation of π on every generator. For an intransitive
    group the argument is not claimed.
    """
    action = PermAction(W.degree, {name: W.table(g) for name, g in generators.items()})
    orbit = action.orbit(0)
    nontrivial = sorted(name for name, g in generators.items() if not g.top_is_identity)
    return ContainmentReport(
        transitive=len(orbit) == W.degree,
        orbit_size=len(orbit),
        degree=W.degree,
        top_trivial=not nontrivial,
        obstruction=divisibility_obstruction(W.gamma_size, W.ell),
        nontrivial_top=nontrivial,
    )
