"""
Products of strip products: XY = T^k checks, solvers and searches.

The order formula |XY| = |X||Y| / |X ∩ Y| decides coverage exactly; the
intersection of two strip products is computed by unifying their coordinate
equations (see ``strips.intersect``). Uncovered tuples are found by a bounded
deterministic search.

The module also holds the constructive solvers for products of two
interleaved strip families, the strip graph used to explain why a pair of
strip products does not factorise T^k, and the exhaustive or sampled search
over candidate pairs.
"""

import itertools
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .chains import Element
from .groups import (
    Automorphism,
    CapExceededError,
    FiniteGroup,
    GroupComputationError,
    HypothesisNotCertifiedError,
    NoUniformCertificate,
    NotUniformError,
    certify_no_uniform_automorphism,
    compose_all,
    enumerate_automorphisms,
    is_solvable,
    is_uniform,
    uniform_map_values,
)
from .sampling import DEFAULT_SEED, PRNG_ALGORITHM, Xoshiro256
from .strips import (
    DirectPower,
    FullStrip,
    StripProduct,
    Subgroup,
    SubgroupHandle,
    intersect,
    iter_set_partitions,
    random_strip_product,
    require_same_ambient,
)


DEFAULT_PAIR_BUDGET = 100_000
DEFAULT_WITNESS_SEARCH_CAP = 100_000
DEFAULT_SAMPLES = 10_000

Progress = Optional[Callable[[str], None]]


@dataclass
class FactorisationVerdict:
    """Outcome of an XY = T^k check with exact orders."""

    holds: bool
    lhs_order: int
    rhs_order: int
    intersection_order: int
    ambient_order: int
    witness: Optional[Element] = None  # tuple outside XY, when one was found

    @property
    def product_order(self) -> int:
        return self.lhs_order * self.rhs_order // self.intersection_order

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "lhs_order": self.lhs_order,
            "rhs_order": self.rhs_order,
            "intersection_order": self.intersection_order,
            "product_order": self.product_order,
            "ambient_order": self.ambient_order,
            "witness": None if self.witness is None else list(self.witness),
        }


def _factor_elements(sub: Subgroup) -> Iterator[Element]:
    if isinstance(sub, SubgroupHandle):
        return iter(sub.closure())
    return sub.elements()


def in_product(z: Sequence[int], X: Subgroup, Y: Subgroup,
               cap: int = DEFAULT_WITNESS_SEARCH_CAP) -> Optional[bool]:
    """
    Decide z ∈ XY by running through the smaller factor.

    Returns:
        True or False, or None when the smaller factor has more than ``cap`` elements
    """
    ambient = X.ambient
    z = tuple(z)
    if X.order <= Y.order:
        if X.order > cap:
            return None
        return any(Y.contains(ambient.mul(ambient.inv(a), z)) for a in _factor_elements(X))
    if Y.order > cap:
        return None
    return any(X.contains(ambient.mul(z, ambient.inv(b))) for b in _factor_elements(Y))


def find_uncovered(X: Subgroup, Y: Subgroup, cap: int = DEFAULT_WITNESS_SEARCH_CAP) -> Optional[Element]:
    """
    First tuple outside XY, trying tuples with 1, 2, ... non-identity coordinates.

    At most ``cap`` candidates are tried; None if none of them is uncovered or
    the factors are too large to test membership.
    """
    ambient = X.ambient
    n = ambient.base.order
    tried = 0
    for weight in range(1, ambient.k + 1):
        for coords in itertools.combinations(range(ambient.k), weight):
            for values in itertools.product(range(1, n), repeat=weight):
                if tried >= cap:
                    return None
                tried += 1
                z = [0] * ambient.k
                for c, v in zip(coords, values):
                    z[c] = v
                member = in_product(z, X, Y, cap)
                if member is None:
                    return None
                if not member:
                    return tuple(z)
    return None


def _intersection_order(X: Subgroup, Y: Subgroup) -> int:
    if not isinstance(X, SubgroupHandle) and not isinstance(Y, SubgroupHandle):
        return intersect(X, Y).order
    small, other = (X, Y) if X.order <= Y.order else (Y, X)
    return sum(1 for a in _factor_elements(small) if other.contains(a))


def product_covers(X: Subgroup, Y: Subgroup, witness_cap: int = DEFAULT_WITNESS_SEARCH_CAP) -> FactorisationVerdict:
    """
    Decide XY = T^k by the order formula.

    Strip products are intersected symbolically; as soon as one factor is a
    SubgroupHandle the intersection is counted over the smaller closure.

    Args:
        X: Left factor
        Y: Right factor
        witness_cap: Candidate budget for the uncovered-tuple search; 0 disables it

    Returns:
        FactorisationVerdict with exact orders

    Raises:
        AmbientMismatchError: If X and Y live in different direct powers
    """
    require_same_ambient(X.ambient, Y.ambient)
    lhs, rhs = X.order, Y.order
    inter = _intersection_order(X, Y)
    total = X.ambient.order
    holds = lhs * rhs == inter * total
    witness = None
    if not holds and witness_cap > 0:
        witness = find_uncovered(X, Y, witness_cap)
    return FactorisationVerdict(holds, lhs, rhs, inter, total, witness)


def two_strips(alpha: Automorphism, beta: Automorphism) -> Tuple[StripProduct, StripProduct]:
    """The strips {(t, α(t))} and {(t, β(t))} of T × T."""
    ambient = DirectPower(alpha.group, 2)
    return (StripProduct(ambient, (FullStrip(ambient, (1, 2), (alpha,)),)),
            StripProduct(ambient, (FullStrip(ambient, (1, 2), (beta,)),)))


@dataclass
class OrthstripReport:
    """Result of checking the two-strip criterion over all automorphism pairs."""

    group: str
    automorphisms: int
    pairs_checked: int
    factorising_pairs: int
    uniform_pairs: int
    counterexamples: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return not self.counterexamples

    def to_dict(self) -> Dict[str, Any]:
        return {
            "group": self.group,
            "automorphisms": self.automorphisms,
            "pairs_checked": self.pairs_checked,
            "factorising_pairs": self.factorising_pairs,
            "uniform_pairs": self.uniform_pairs,
            "consistent": self.consistent,
            "counterexamples": self.counterexamples,
        }


def orthstrip_check(T: FiniteGroup, pair_budget: int = DEFAULT_PAIR_BUDGET,
                    automorphisms: Optional[Sequence[Automorphism]] = None,
                    progress: Progress = None) -> OrthstripReport:
    """
    Check, for every pair (α, β), that the two strips factorise T × T iff α·β⁻¹ is uniform.

    Raises:
        CapExceededError: If |Aut(T)|² exceeds the pair budget
    """
    auts = list(automorphisms) if automorphisms is not None else enumerate_automorphisms(T)
    pairs = len(auts) ** 2
    if pairs > pair_budget:
        raise CapExceededError(f"{pairs} automorphism pairs exceed the pair budget {pair_budget}")
    if progress:
        progress(f"{T.name}: {len(auts)} automorphisms, {pairs} pairs")
    report = OrthstripReport(T.name, len(auts), 0, 0, 0)
    for i, alpha in enumerate(auts):
        for j, beta in enumerate(auts):
            X, Y = two_strips(alpha, beta)
            holds = product_covers(X, Y, witness_cap=0).holds
            uniform = is_uniform(alpha.then(beta.inverse())).uniform
            report.pairs_checked += 1
            report.factorising_pairs += holds
            report.uniform_pairs += uniform
            if holds != uniform:
                report.counterexamples.append({"alpha": i, "beta": j, "covers": holds, "uniform": uniform})
    return report


def uniform_preimage(alpha: Automorphism, y: int) -> int:
    """
    Least s with s⁻¹·α(s) = y.

    Raises:
        NotUniformError: If no such s exists
    """
    values = uniform_map_values(alpha)
    hits = np.flatnonzero(values == y)
    if not len(hits):
        raise NotUniformError(f"{y} is not of the form s⁻¹·α(s) for the given automorphism")
    return int(hits[0])


def orthstrip_factor(alpha: Automorphism, beta: Automorphism, x: Sequence[int]) -> Tuple[Element, Element]:
    """
    Write x ∈ T × T as (t, α(t))·(s, β(s)).

    Raises:
        NotUniformError: If α·β⁻¹ is not uniform and x is out of reach
    """
    result = doublestrips_solve([alpha], [beta.inverse()], x)
    if isinstance(result, FactorisationVerdict):
        raise NotUniformError(f"{list(x)} is not covered: the twists are not orthogonal")
    return result


def doublestrip_factors(alphas: Sequence[Automorphism],
                        betas: Sequence[Automorphism]) -> Tuple[StripProduct, StripProduct]:
    """
    The interleaved strip products in T^{2d}.

    X has strips on (2i-1, 2i) with twist α_i. Y has strips on (2i, 2i+1)
    with twist β_i for i < d and the closing strip on {1, 2d} whose value at
    coordinate 1 is β_d of its value at coordinate 2d.
    """
    d = len(alphas)
    if d < 1 or len(betas) != d:
        raise ValueError("doublestrips needs d >= 1 alphas and the same number of betas")
    T = alphas[0].group
    ambient = DirectPower(T, 2 * d)
    x_strips = tuple(FullStrip(ambient, (2 * i - 1, 2 * i), (alphas[i - 1],)) for i in range(1, d + 1))
    y_strips = [FullStrip(ambient, (2 * i, 2 * i + 1), (betas[i - 1],)) for i in range(1, d)]
    y_strips.append(FullStrip(ambient, (1, 2 * d), (betas[-1].inverse(),)))
    return StripProduct(ambient, x_strips), StripProduct(ambient, tuple(y_strips))


def doublestrips_composite(alphas: Sequence[Automorphism], betas: Sequence[Automorphism]) -> Automorphism:
    """α₁ then β₁ then α₂ ... then β_d."""
    return compose_all(itertools.chain.from_iterable(zip(alphas, betas)), alphas[0].group)


def doublestrips_seed_target(alphas: Sequence[Automorphism], betas: Sequence[Automorphism], x: Sequence[int]) -> int:
    """
    Right-hand side that s₀⁻¹·α(s₀) has to match for the solver to reach x.

    It is the product over i = d down to 1 of
    (β_i then α_{i+1} ... then β_d)(x_{2i}⁻¹) · (α_i then β_i ... then β_d)(x_{2i-1}).
    """
    T = alphas[0].group
    d = len(alphas)
    chain = list(itertools.chain.from_iterable(zip(alphas, betas)))
    target = T.identity
    for i in range(d, 0, -1):
        from_beta = compose_all(chain[2 * i - 1:], T)
        from_alpha = compose_all(chain[2 * i - 2:], T)
        target = T.mul(target, from_beta(T.inv(x[2 * i - 1])))
        target = T.mul(target, from_alpha(x[2 * i - 2]))
    return target


def doublestrips_solve(
    alphas: Sequence[Automorphism],
    betas: Sequence[Automorphism],
    x: Sequence[int],
) -> Union[Tuple[Element, Element], FactorisationVerdict]:
    """
    Solve t·s = x with t, s in the interleaved strip products.

    With α the composite, s₀ is the least solution of
    s₀⁻¹·α(s₀) = doublestrips_seed_target(x). Then s_d = β_d⁻¹(s₀),
    t_d = α_d⁻¹(s_d·x_{2d}⁻¹), and for i = d-1 down to 1
    s_i = β_i⁻¹(t_{i+1}·x_{2i+1}) and t_i = α_i⁻¹(s_i·x_{2i}⁻¹).
    X takes t_i⁻¹ at coordinate 2i-1; Y takes s_i at coordinate 2i and s₀ at
    coordinate 1.

    Returns:
        (t, s) with t ∈ X, s ∈ Y and t·s = x, or a FactorisationVerdict with
        holds = False when the composite is not uniform

    Raises:
        ValueError: If x does not have 2d coordinates
        GroupComputationError: If the computed pair fails the product check
    """
    X, Y = doublestrip_factors(alphas, betas)
    ambient = X.ambient
    x = ambient.check_element(x)
    T = ambient.base
    d = len(alphas)
    composite = doublestrips_composite(alphas, betas)
    if not is_uniform(composite).uniform:
        return product_covers(X, Y)

    def at(i: int) -> int:
        return x[i - 1]

    s0 = uniform_preimage(composite, doublestrips_seed_target(alphas, betas, x))
    s_params = [0] * (d + 1)
    t_params = [0] * (d + 2)
    s_params[d] = betas[d - 1].inverse()(s0)
    t_params[d] = alphas[d - 1].inverse()(T.mul(s_params[d], T.inv(at(2 * d))))
    for i in range(d - 1, 0, -1):
        s_params[i] = betas[i - 1].inverse()(T.mul(t_params[i + 1], at(2 * i + 1)))
        t_params[i] = alphas[i - 1].inverse()(T.mul(s_params[i], T.inv(at(2 * i))))

    t = [0] * (2 * d)
    s = [0] * (2 * d)
    s[0] = s0
    for i in range(1, d + 1):
        t[2 * i - 2] = T.inv(t_params[i])
        t[2 * i - 1] = alphas[i - 1](t[2 * i - 2])
        s[2 * i - 1] = s_params[i]
        if i < d:
            s[2 * i] = betas[i - 1](s_params[i])
    t_elem, s_elem = tuple(t), tuple(s)
    if not (X.contains(t_elem) and Y.contains(s_elem) and ambient.mul(t_elem, s_elem) == x):
        raise GroupComputationError(f"Double-strip solution failed the product check for {list(x)}")
    return t_elem, s_elem


@dataclass
class DoubleStripsReport:
    """Batch run of the double-strip solver over random targets."""

    group: str
    d: int
    composite_uniform: bool
    targets: int
    solved: int
    verdict: Optional[FactorisationVerdict] = None
    solutions: List[Dict[str, List[int]]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "group": self.group,
            "d": self.d,
            "composite_uniform": self.composite_uniform,
            "targets": self.targets,
            "solved": self.solved,
            "verdict": None if self.verdict is None else self.verdict.to_dict(),
            "solutions": self.solutions,
        }


def doublestrips_batch(alphas: Sequence[Automorphism], betas: Sequence[Automorphism],
                       targets: int = 20, seed: int = DEFAULT_SEED, keep: int = 5) -> DoubleStripsReport:
    """Solve ``targets`` random x ∈ T^{2d}; keeps the first ``keep`` solutions."""
    T = alphas[0].group
    d = len(alphas)
    uniform = is_uniform(doublestrips_composite(alphas, betas)).uniform
    report = DoubleStripsReport(T.name, d, uniform, targets, 0)
    rng = Xoshiro256(seed).split("doublestrips")
    for _ in range(targets):
        x = tuple(rng.randbelow(T.order) for _ in range(2 * d))
        result = doublestrips_solve(alphas, betas, x)
        if isinstance(result, FactorisationVerdict):
            report.verdict = result
            break
        report.solved += 1
        if len(report.solutions) < keep:
            report.solutions.append({"x": list(x), "t": list(result[0]), "s": list(result[1])})
    return report


# ---------------------------------------------------------------------------
# Strip graphs


@dataclass(frozen=True)
class StripEdge:
    """X-strip and Y-strip whose supports meet."""

    x_index: int
    y_index: int
    shared: Tuple[int, ...]

    @property
    def fat(self) -> bool:
        return len(self.shared) >= 2

    @property
    def label(self) -> Optional[int]:
        """The shared coordinate when the supports meet in exactly one point."""
        return self.shared[0] if len(self.shared) == 1 else None


Vertex = Tuple[str, int]  # ("X", i) or ("Y", j), 0-based


def vertex_name(v: Vertex) -> str:
    return f"{v[0]}{v[1] + 1}"


@dataclass
class StripGraph:
    """
    Bipartite intersection graph of the strips of X and of Y.

    Two strips are adjacent iff their supports meet. Strips on one side have
    disjoint supports, so every edge joins the two sides.
    """

    x_strips: Tuple[FullStrip, ...]
    y_strips: Tuple[FullStrip, ...]
    edges: List[StripEdge]

    @property
    def vertices(self) -> List[Vertex]:
        return [("X", i) for i in range(len(self.x_strips))] + [("Y", j) for j in range(len(self.y_strips))]

    def strip(self, v: Vertex) -> FullStrip:
        return self.x_strips[v[1]] if v[0] == "X" else self.y_strips[v[1]]

    def neighbours(self, v: Vertex) -> List[Vertex]:
        if v[0] == "X":
            return [("Y", e.y_index) for e in self.edges if e.x_index == v[1]]
        return [("X", e.x_index) for e in self.edges if e.y_index == v[1]]

    def degree(self, v: Vertex) -> int:
        return len(self.neighbours(v))

    def edge(self, u: Vertex, v: Vertex) -> StripEdge:
        x, y = (u, v) if u[0] == "X" else (v, u)
        for e in self.edges:
            if e.x_index == x[1] and e.y_index == y[1]:
                return e
        raise KeyError(f"No edge between {vertex_name(u)} and {vertex_name(v)}")

    def isolated_vertices(self) -> List[Vertex]:
        return [v for v in self.vertices if self.degree(v) == 0]

    def fat_edges(self) -> List[StripEdge]:
        return [e for e in self.edges if e.fat]

    def leaves(self) -> List[Vertex]:
        return [v for v in self.vertices if self.degree(v) == 1]

    def shortest_cycle(self) -> Optional[List[Vertex]]:
        """
        A shortest cycle, rotated to start at an X-vertex, or None for a forest.

        Breadth-first search from every vertex; the least closing length over
        all roots is the girth, and at that length the two tree paths are
        vertex-disjoint.
        """
        best: Optional[List[Vertex]] = None
        for root in self.vertices:
            parent: Dict[Vertex, Optional[Vertex]] = {root: None}
            dist = {root: 0}
            queue = [root]
            for u in queue:
                for v in self.neighbours(u):
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        parent[v] = u
                        queue.append(v)
                    elif v != parent[u] and dist[v] >= dist[u]:
                        length = dist[u] + dist[v] + 1
                        if best is None or length < len(best):
                            best = self._close_cycle(parent, u, v)
        if best is None:
            return None
        start = next(i for i, v in enumerate(best) if v[0] == "X")
        return best[start:] + best[:start]

    @staticmethod
    def _close_cycle(parent: Dict[Vertex, Optional[Vertex]], u: Vertex, v: Vertex) -> List[Vertex]:
        def path(w: Vertex) -> List[Vertex]:
            out = []
            node: Optional[Vertex] = w
            while node is not None:
                out.append(node)
                node = parent[node]
            return out

        up = path(u)
        down = path(v)
        # up ends at the root, down ends at the root
        return list(reversed(up)) + down[:-1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x_supports": [list(s.support) for s in self.x_strips],
            "y_supports": [list(s.support) for s in self.y_strips],
            "edges": [{"x": e.x_index + 1, "y": e.y_index + 1, "shared": list(e.shared)} for e in self.edges],
        }


def build_strip_graph(X: StripProduct, Y: StripProduct) -> StripGraph:
    """
    Intersection graph of the strips of X and Y.

    Raises:
        ValueError: If X or Y has full coordinates
        AmbientMismatchError: If X and Y live in different direct powers
    """
    require_same_ambient(X.ambient, Y.ambient)
    if X.full or Y.full:
        raise ValueError("Strip graphs are defined for products of non-trivial strips only")
    edges = []
    for i, xs in enumerate(X.strips):
        for j, ys in enumerate(Y.strips):
            shared = tuple(sorted(set(xs.support) & set(ys.support)))
            if shared:
                edges.append(StripEdge(i, j, shared))
    return StripGraph(X.strips, Y.strips, edges)


# ---------------------------------------------------------------------------
# Diagnosis


DIAGNOSIS_CLASSES = (
    "isolated_vertex",
    "fat_edge",
    "cycle",
    "no_leaf_on_y_side",
    "no_leaf_on_x_side",
    "both_sides_uncovered",
    "y_side_uncovered",
    "x_side_uncovered",
    "path",
)


@dataclass
class Diagnosis:
    """Why X·Y misses T^k, read off the strip graph."""

    claim: str
    detail: str
    vertices: List[str] = field(default_factory=list)
    coordinates: List[int] = field(default_factory=list)
    composite: Optional[Automorphism] = None
    composite_uniform: Optional[bool] = None
    witness: Optional[Element] = None
    witness_verified: Optional[bool] = None
    augmented: List[str] = field(default_factory=list)

    @property
    def key(self) -> str:
        """Count key: augmentation steps followed by the terminal class."""
        return "->".join(self.augmented + [self.claim])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "claim": self.claim,
            "key": self.key,
            "detail": self.detail,
            "vertices": self.vertices,
            "coordinates": self.coordinates,
            "composite": None if self.composite is None else self.composite.to_list(),
            "composite_uniform": self.composite_uniform,
            "witness": None if self.witness is None else list(self.witness),
            "witness_verified": self.witness_verified,
        }


def _lift(ambient: DirectPower, coords: Sequence[int], values: Sequence[int]) -> Element:
    z = [0] * ambient.k
    for c, v in zip(coords, values):
        z[c - 1] = v
    return tuple(z)


def _restrict(T: FiniteGroup, sp_strips: Sequence[FullStrip], coords: Sequence[int]) -> StripProduct:
    """Projection of a product of strips onto ``coords``, relabelled 1..len(coords)."""
    target = DirectPower(T, len(coords))
    position = {c: i + 1 for i, c in enumerate(coords)}
    strips = []
    full = []
    for s in sp_strips:
        kept = [c for c in s.support if c in position]
        if len(kept) == 1:
            full.append(position[kept[0]])
        elif kept:
            maps = {position[c]: s.coordinate_map(c) for c in kept}
            strips.append(FullStrip.from_coordinate_maps(target, maps))
    return StripProduct(target, tuple(strips), tuple(full))


def _projected_witness(X: StripProduct, Y: StripProduct, coords: Sequence[int], cap: int) -> Optional[Element]:
    coords = sorted(coords)
    Xp = _restrict(X.ambient.base, X.strips, coords)
    Yp = _restrict(Y.ambient.base, Y.strips, coords)
    found = find_uncovered(Xp, Yp, cap)
    return None if found is None else _lift(X.ambient, coords, found)


def _augment(sp: StripProduct, uncovered: Sequence[int]) -> StripProduct:
    ambient = sp.ambient
    identity = Automorphism.identity(ambient.base)
    extra = FullStrip(ambient, tuple(sorted(uncovered)), (identity,) * (len(uncovered) - 1))
    return StripProduct(ambient, sp.strips + (extra,))


def diagnose_nonfactorisation(
    X: StripProduct,
    Y: StripProduct,
    certificate: Optional[NoUniformCertificate] = None,
    with_witness: bool = True,
    witness_cap: int = DEFAULT_WITNESS_SEARCH_CAP,
) -> Diagnosis:
    """
    Locate the structural reason X·Y ≠ T^k.

    The checks run in a fixed order and the first failing one is reported:
    an isolated strip, two strips meeting in two or more coordinates, a cycle
    (whose composite twist must be non-uniform), a side without leaves, too
    many coordinates left uncovered by one side, and finally the path case
    with its explicit uncovered tuple (x, 1, ..., 1). When a side is padded
    with an extra strip the padded pair is diagnosed instead; anything it
    misses is also missed by the original pair.

    Args:
        X: Product of non-trivial strips
        Y: Product of non-trivial strips in the same ambient
        certificate: Proof that T has no uniform automorphism; computed when omitted
        with_witness: Also search for an uncovered tuple
        witness_cap: Budget for that search

    Raises:
        HypothesisNotCertifiedError: If T admits a uniform automorphism
    """
    if certificate is None:
        certificate = certify_no_uniform_automorphism(X.ambient.base)
    return _diagnose(X, Y, with_witness, witness_cap, [])


def _diagnose(X: StripProduct, Y: StripProduct, with_witness: bool, cap: int, augmented: List[str]) -> Diagnosis:
    ambient = X.ambient
    T = ambient.base
    graph = build_strip_graph(X, Y)

    isolated = graph.isolated_vertices()
    if isolated:
        v = isolated[0]
        strip = graph.strip(v)
        witness = ambient.unit(strip.support[0], T.generators[0]) if with_witness else None
        return _finish(Diagnosis(
            "isolated_vertex",
            f"{vertex_name(v)} meets no strip of the other side; the projection onto its support is one strip",
            [vertex_name(v)], list(strip.support), witness=witness, augmented=augmented,
        ), X, Y, cap)

    fat = graph.fat_edges()
    if fat:
        e = fat[0]
        i1, i2 = e.shared[:2]
        a = X.strips[e.x_index].link(i1, i2)
        b = Y.strips[e.y_index].link(i1, i2)
        composite = a.then(b.inverse())
        witness = _projected_witness(X, Y, [i1, i2], cap) if with_witness else None
        return _finish(Diagnosis(
            "fat_edge",
            f"X{e.x_index + 1} and Y{e.y_index + 1} share coordinates {list(e.shared)}",
            [f"X{e.x_index + 1}", f"Y{e.y_index + 1}"], list(e.shared),
            composite=composite, composite_uniform=is_uniform(composite).uniform,
            witness=witness, augmented=augmented,
        ), X, Y, cap)

    cycle = graph.shortest_cycle()
    if cycle is not None:
        d = len(cycle) // 2
        xs = [graph.strip(cycle[2 * i]) for i in range(d)]
        ys = [graph.strip(cycle[2 * i + 1]) for i in range(d)]
        coords = []
        for i in range(d):
            coords.append(graph.edge(cycle[2 * i - 1], cycle[2 * i]).shared[0])
            coords.append(graph.edge(cycle[2 * i], cycle[2 * i + 1]).shared[0])
        alphas = [xs[i].link(coords[2 * i], coords[2 * i + 1]) for i in range(d)]
        betas = [ys[i].link(coords[2 * i + 1], coords[(2 * i + 2) % (2 * d)]) for i in range(d)]
        composite = doublestrips_composite(alphas, betas)
        witness = _projected_witness(X, Y, coords, cap) if with_witness else None
        return _finish(Diagnosis(
            "cycle",
            f"shortest cycle of length {2 * d} through coordinates {coords}",
            [vertex_name(v) for v in cycle], coords,
            composite=composite, composite_uniform=is_uniform(composite).uniform,
            witness=witness, augmented=augmented,
        ), X, Y, cap)

    x_leaves = [v for v in graph.leaves() if v[0] == "X"]
    y_leaves = [v for v in graph.leaves() if v[0] == "Y"]
    missed_by_x = sorted(set(ambient.coordinates) - X.covered)
    missed_by_y = sorted(set(ambient.coordinates) - Y.covered)

    if not y_leaves and len(missed_by_y) >= 2:
        return _diagnose(X, _augment(Y, missed_by_y), with_witness, cap, augmented + ["no_leaf_on_y_side"])
    if not x_leaves and len(missed_by_x) >= 2:
        return _diagnose(_augment(X, missed_by_x), Y, with_witness, cap, augmented + ["no_leaf_on_x_side"])
    if len(missed_by_x) >= 2 and len(missed_by_y) >= 2:
        return _diagnose(_augment(X, missed_by_x), _augment(Y, missed_by_y), with_witness, cap,
                         augmented + ["both_sides_uncovered"])
    if len(missed_by_y) >= 2:
        return _diagnose(X, _augment(Y, missed_by_y), with_witness, cap, augmented + ["y_side_uncovered"])
    if len(missed_by_x) >= 2:
        return _diagnose(_augment(X, missed_by_x), Y, with_witness, cap, augmented + ["x_side_uncovered"])

    # a forest with one leaf on each side is a path
    j0 = missed_by_y[0]
    leaf = next(v for v in x_leaves if j0 in graph.strip(v).support)
    walk = [leaf]
    while True:
        ahead = [v for v in graph.neighbours(walk[-1]) if v not in walk]
        if not ahead:
            break
        walk.append(ahead[0])
    witness = ambient.unit(j0, T.generators[0]) if with_witness else None
    return _finish(Diagnosis(
        "path",
        f"the strip graph is a path from {vertex_name(leaf)}; coordinate {j0} is missed by Y",
        [vertex_name(v) for v in walk], [j0], witness=witness, augmented=augmented,
    ), X, Y, cap)


def _finish(diagnosis: Diagnosis, X: StripProduct, Y: StripProduct, cap: int) -> Diagnosis:
    if diagnosis.witness is not None:
        member = in_product(diagnosis.witness, X, Y, cap)
        diagnosis.witness_verified = None if member is None else not member
    return diagnosis


# ---------------------------------------------------------------------------
# Candidate search


def iter_strip_families(k: int) -> List[Tuple[Tuple[int, ...], ...]]:
    """Non-empty families of disjoint supports of size >= 2 in 1..k, sorted."""
    families: Set[Tuple[Tuple[int, ...], ...]] = set()
    for partition in iter_set_partitions(range(1, k + 1)):
        family = tuple(sorted(tuple(b) for b in partition if len(b) >= 2))
        if family:
            families.add(family)
    return sorted(families, key=lambda f: (len(f), f))


def iter_candidates(ambient: DirectPower, automorphisms: Sequence[Automorphism],
                    families: Optional[Sequence[Tuple[Tuple[int, ...], ...]]] = None) -> Iterator[StripProduct]:
    """Every canonical product of non-trivial strips, family by family."""
    families = iter_strip_families(ambient.k) if families is None else families
    for family in families:
        slots = sum(len(block) - 1 for block in family)
        for twists in itertools.product(automorphisms, repeat=slots):
            strips = []
            position = 0
            for block in family:
                strips.append(FullStrip(ambient, block, tuple(twists[position:position + len(block) - 1])))
                position += len(block) - 1
            yield StripProduct(ambient, tuple(strips))


def count_candidates(k: int, automorphism_count: int) -> int:
    return sum(automorphism_count ** sum(len(b) - 1 for b in family) for family in iter_strip_families(k))


def orbit_representatives(ambient: DirectPower) -> List[StripProduct]:
    """
    One product of identity-twisted strips per multiset of support sizes.

    Automorphisms of T^k (coordinatewise automorphisms and coordinate
    permutations) reach every candidate from one of these.
    """
    identity = Automorphism.identity(ambient.base)
    shapes: Set[Tuple[int, ...]] = set()
    for family in iter_strip_families(ambient.k):
        shapes.add(tuple(sorted((len(b) for b in family), reverse=True)))
    reps = []
    for shape in sorted(shapes, key=lambda s: (len(s), s)):
        strips = []
        start = 1
        for size in shape:
            support = tuple(range(start, start + size))
            strips.append(FullStrip(ambient, support, (identity,) * (size - 1)))
            start += size
        reps.append(StripProduct(ambient, tuple(strips)))
    return reps


@dataclass
class SearchTally:
    """
    Mergeable counters for a candidate search.

    ``first_witness`` keeps the factorising pair with the least candidate index.
    """

    candidates_checked: int = 0
    factorisations_found: int = 0
    diagnoses: Dict[str, int] = field(default_factory=dict)
    first_witness: Optional[Tuple[int, Dict[str, Any]]] = None

    def record(self, index: int, holds: bool, diagnosis_key: Optional[str],
               payload: Callable[[], Dict[str, Any]]) -> None:
        self.candidates_checked += 1
        if holds:
            self.factorisations_found += 1
            if self.first_witness is None or index < self.first_witness[0]:
                self.first_witness = (index, payload())
        if diagnosis_key is not None:
            self.diagnoses[diagnosis_key] = self.diagnoses.get(diagnosis_key, 0) + 1

    def merge(self, other: "SearchTally") -> "SearchTally":
        diagnoses = dict(self.diagnoses)
        for key, count in other.diagnoses.items():
            diagnoses[key] = diagnoses.get(key, 0) + count
        candidates = [w for w in (self.first_witness, other.first_witness) if w is not None]
        return SearchTally(
            self.candidates_checked + other.candidates_checked,
            self.factorisations_found + other.factorisations_found,
            diagnoses,
            min(candidates, key=lambda w: w[0]) if candidates else None,
        )


@dataclass
class NostripfactReport:
    """Outcome of a search over pairs of strip products."""

    claimed_theorem: str
    group: str
    k: int
    mode: str
    reduction: str
    hypothesis_certified: bool
    automorphisms: int
    seed: Optional[int]
    prng: Optional[str]
    tally: SearchTally
    elapsed_ms: int = 0

    @property
    def candidates_checked(self) -> int:
        return self.tally.candidates_checked

    @property
    def factorisations_found(self) -> int:
        return self.tally.factorisations_found

    def to_dict(self) -> Dict[str, Any]:
        return {
            "claimed_theorem": self.claimed_theorem,
            "group": self.group,
            "k": self.k,
            "mode": self.mode,
            "reduction": self.reduction,
            "hypothesis_certified": self.hypothesis_certified,
            "automorphisms": self.automorphisms,
            "candidates_checked": self.tally.candidates_checked,
            "factorisations_found": self.tally.factorisations_found,
            "diagnoses": dict(sorted(self.tally.diagnoses.items())),
            "first_witness": None if self.tally.first_witness is None else self.tally.first_witness[1],
            "elapsed_ms": self.elapsed_ms,
            "seed": self.seed,
            "prng": self.prng,
        }


NOSTRIPFACT_CLAIM = "no two products of non-trivial strips factorise T^k when T has no uniform automorphism"


def nostripfact_search(
    T: FiniteGroup,
    k: int,
    mode: str = "exhaustive",
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    require_hypothesis: bool = True,
    diagnose: bool = True,
    progress: Progress = None,
) -> NostripfactReport:
    """
    Check candidate pairs (X, Y) of products of non-trivial strips in T^k.

    Exhaustive mode runs over all canonical pairs when their number is within
    the budget, otherwise over one X per symmetry orbit against every Y.
    Sampled mode draws ``samples`` pairs from a seeded generator.

    Args:
        T: Factor group
        k: Number of coordinates, at least 2
        mode: "exhaustive" or "sampled"
        samples: Pairs drawn in sampled mode
        seed: Seed for sampled mode
        pair_budget: Largest number of pairs checked in exhaustive mode
        require_hypothesis: Refuse groups with a uniform automorphism
        diagnose: Classify every non-factorising pair
        progress: Optional callback for progress lines

    Raises:
        ValueError: If k < 2 or the mode is unknown
        HypothesisNotCertifiedError: If T admits a uniform automorphism and
            require_hypothesis is set
        CapExceededError: If even the reduced exhaustive search exceeds the budget
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"Unknown mode {mode!r}; use 'exhaustive' or 'sampled'")
    started = time.monotonic()
    auts = enumerate_automorphisms(T)
    certificate: Optional[NoUniformCertificate] = None
    uniform = next((a for a in auts if is_uniform(a).uniform), None)
    if uniform is None:
        certificate = NoUniformCertificate(T.name, len(auts), is_solvable(T))
    elif require_hypothesis:
        raise HypothesisNotCertifiedError(f"{T.name} admits a uniform automorphism {uniform.to_list()}")
    ambient = DirectPower(T, k)
    tally = SearchTally()

    def check(index: int, X: StripProduct, Y: StripProduct) -> None:
        verdict = product_covers(X, Y, witness_cap=0)
        key = None
        if not verdict.holds and certificate is not None and diagnose:
            key = diagnose_nonfactorisation(X, Y, certificate, with_witness=False).key
        tally.record(index, verdict.holds, key, lambda: {
            "candidate_index": index, "x": X.to_dict(), "y": Y.to_dict(), "verdict": verdict.to_dict(),
        })

    if mode == "exhaustive":
        total = count_candidates(k, len(auts))
        if total * total <= pair_budget:
            reduction = "none"
            xs: List[StripProduct] = list(iter_candidates(ambient, auts))
        else:
            xs = orbit_representatives(ambient)
            reduction = "orbit_representatives"
            if len(xs) * total > pair_budget:
                raise CapExceededError(
                    f"{len(xs) * total} pairs exceed the pair budget {pair_budget}; use --mode sampled"
                )
        if progress:
            progress(f"{T.name}^{k}: {len(xs)} x {total} pairs (reduction: {reduction})")
        index = 0
        for X in xs:
            for Y in iter_candidates(ambient, auts):
                check(index, X, Y)
                index += 1
        seed_used: Optional[int] = None
    else:
        reduction = "none"
        rng = Xoshiro256(seed).split("nostripfact")
        if progress:
            progress(f"{T.name}^{k}: sampling {samples} pairs with seed {seed}")
        for index in range(samples):
            X = random_strip_product(ambient, auts, rng, singletons="uncovered", min_strips=1)
            Y = random_strip_product(ambient, auts, rng, singletons="uncovered", min_strips=1)
            check(index, X, Y)
        seed_used = seed

    return NostripfactReport(
        claimed_theorem=NOSTRIPFACT_CLAIM,
        group=T.name,
        k=k,
        mode=mode,
        reduction=reduction,
        hypothesis_certified=certificate is not None,
        automorphisms=len(auts),
        seed=seed_used,
        prng=PRNG_ALGORITHM if seed_used is not None else None,
        tally=tally,
        elapsed_ms=int((time.monotonic() - started) * 1000),
    )


# ---------------------------------------------------------------------------
# Two strips of length three against three strips of length two


def g6_factors(alpha2: Automorphism, alpha3: Automorphism) -> Tuple[StripProduct, StripProduct]:
    """
    X = {(t,t,t,s,s,s)} and Y = {(t1,t2,t3,t1,α2(t2),α3(t3))} in G^6.
    """
    G = alpha2.group
    ambient = DirectPower(G, 6)
    identity = Automorphism.identity(G)
    X = StripProduct(ambient, (FullStrip(ambient, (1, 2, 3), (identity, identity)),
                               FullStrip(ambient, (4, 5, 6), (identity, identity))))
    Y = StripProduct(ambient, (FullStrip(ambient, (1, 4), (identity,)),
                               FullStrip(ambient, (2, 5), (alpha2,)),
                               FullStrip(ambient, (3, 6), (alpha3,))))
    return X, Y


def joint_image_size(alpha2: Automorphism, alpha3: Automorphism) -> int:
    """|{(t⁻¹α2(t), t⁻¹α3(t)) : t ∈ G}|."""
    n = alpha2.group.order
    a = uniform_map_values(alpha2)
    b = uniform_map_values(alpha3)
    return int(len(np.unique(a * n + b)))


def g6_factor(alpha2: Automorphism, alpha3: Automorphism, x: Sequence[int]) -> Optional[Tuple[Element, Element]]:
    """
    Write x ∈ G^6 as an X-element times a Y-element by the explicit construction.

    Finds the least t with t·α2(t⁻¹) = x1·x4⁻¹·x5·α2(x2⁻¹) and
    t·α3(t⁻¹) = x1·x4⁻¹·x6·α3(x3⁻¹), then sets t1 = t⁻¹x1 and u = x4·t1⁻¹.

    Returns:
        (X-element, Y-element), or None when no such t exists
    """
    G = alpha2.group
    x = DirectPower(G, 6).check_element(x)
    mul, inv = G.mul, G.inv
    x1, x2, x3, x4, x5, x6 = x
    head = mul(x1, inv(x4))
    target2 = mul(mul(head, x5), alpha2(inv(x2)))
    target3 = mul(mul(head, x6), alpha3(inv(x3)))
    ids = np.arange(G.order)
    inverses = G.inverses
    lhs2 = G.mul_arrays(ids, alpha2.array[inverses])
    lhs3 = G.mul_arrays(ids, alpha3.array[inverses])
    hits = np.flatnonzero((lhs2 == target2) & (lhs3 == target3))
    if not len(hits):
        return None
    t = int(hits[0])
    t1 = mul(inv(t), x1)
    u = mul(x4, inv(t1))
    v2 = mul(inv(t), x2)
    v3 = mul(inv(t), x3)
    left = (t, t, t, u, u, u)
    right = (t1, v2, v3, t1, alpha2(v2), alpha3(v3))
    if tuple(mul(a, b) for a, b in zip(left, right)) != x:
        raise GroupComputationError(f"Six-coordinate construction failed the product check for {list(x)}")
    return left, right


@dataclass
class G6Report:
    """Joint-uniformity measurements for one finite group."""

    group: str
    order: int
    nonexistence_certified: bool
    reason: str
    automorphisms: int
    pairs_checked: int
    max_joint_image: int
    best_pair: Optional[Tuple[int, int]]
    deficiency: Optional[int]
    product_order: Optional[int]
    targets_sampled: int = 0
    constructive_hits: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "group": self.group,
            "order": self.order,
            "nonexistence_certified": self.nonexistence_certified,
            "reason": self.reason,
            "automorphisms": self.automorphisms,
            "pairs_checked": self.pairs_checked,
            "max_joint_image": self.max_joint_image,
            "best_pair": None if self.best_pair is None else list(self.best_pair),
            "deficiency": self.deficiency,
            "product_order": self.product_order,
            "targets_sampled": self.targets_sampled,
            "constructive_hits": self.constructive_hits,
        }


def g6_joint_uniform_search(G: FiniteGroup, pair_budget: int = DEFAULT_PAIR_BUDGET,
                            targets: int = 1000, seed: int = DEFAULT_SEED) -> G6Report:
    """
    Measure how close a pair of automorphisms comes to a surjective joint map.

    Surjectivity of t ↦ (t⁻¹α2(t), t⁻¹α3(t)) onto G × G is impossible for a
    finite non-trivial G by counting. Within the pair budget every pair is
    measured; for the pair with the largest joint image the six-coordinate
    strip products are built and their deficiency |G^6| - |XY| computed.

    Raises:
        ValueError: If G is trivial
    """
    if G.order <= 1:
        raise ValueError("The joint map is only meaningful for a non-trivial group")
    auts = enumerate_automorphisms(G)
    reason = f"|G x G| = {G.order ** 2} > {G.order} = |G|"
    report = G6Report(G.name, G.order, True, reason, len(auts), 0, 0, None, None, None)
    if len(auts) ** 2 > pair_budget:
        return report
    for i, a2 in enumerate(auts):
        for j, a3 in enumerate(auts):
            size = joint_image_size(a2, a3)
            report.pairs_checked += 1
            if size > report.max_joint_image:
                report.max_joint_image = size
                report.best_pair = (i, j)
    assert report.best_pair is not None
    alpha2, alpha3 = auts[report.best_pair[0]], auts[report.best_pair[1]]
    X, Y = g6_factors(alpha2, alpha3)
    verdict = product_covers(X, Y, witness_cap=0)
    report.product_order = verdict.product_order
    report.deficiency = verdict.ambient_order - verdict.product_order
    rng = Xoshiro256(seed).split("g6")
    report.targets_sampled = targets
    for _ in range(targets):
        x = tuple(rng.randbelow(G.order) for _ in range(6))
        if g6_factor(alpha2, alpha3, x) is not None:
            report.constructive_hits += 1
    return report
