"""
Stabilizer chains for subgroups of a direct power T^k.

Coordinates act as base points. Level i holds the elements that are trivial
on every coordinate before i; its orbit is the set of values these elements
take at coordinate i, which is a subgroup of T. The subgroup order is the
product of the orbit sizes, and membership is decided by sifting.

The construction is the deterministic Schreier-Sims procedure: levels are
processed from the last coordinate upwards, every Schreier generator is sifted
through the deeper levels, and a generator that does not sift completely is
added as a new strong generator.
"""

from typing import Dict, List, Sequence, Set, Tuple

from .groups import FiniteGroup


Element = Tuple[int, ...]


class StabilizerChain:
    """
    Base-and-strong-generating-set data for a subgroup of T^k.

    Args:
        base: The factor group T
        k: Number of coordinates
        generators: Generating k-tuples of T-ids
    """

    def __init__(self, base: FiniteGroup, k: int, generators: Sequence[Element]):
        self.base = base
        self.k = k
        self.identity: Element = (0,) * k
        gens: List[Element] = []
        for g in generators:
            g = tuple(int(v) for v in g)
            if len(g) != k:
                raise ValueError(f"Generator {g} does not have {k} coordinates")
            if g != self.identity and g not in gens:
                gens.append(g)
        self.generators: Tuple[Element, ...] = tuple(gens)
        self._level_gens: List[List[Element]] = [
            [g for g in gens if all(v == 0 for v in g[:level])] for level in range(k)
        ]
        # level -> value at that coordinate -> (transversal element, its inverse)
        self._orbits: List[Dict[int, Tuple[Element, Element]]] = [self._build_orbit(i) for i in range(k)]
        self._build()

    def _mul(self, x: Element, y: Element) -> Element:
        mul = self.base.mul
        return tuple(mul(a, b) for a, b in zip(x, y))

    def _inv(self, x: Element) -> Element:
        inverses = self.base.inverses
        return tuple(int(inverses[a]) for a in x)

    def _build_orbit(self, level: int) -> Dict[int, Tuple[Element, Element]]:
        orbit = {0: (self.identity, self.identity)}
        queue = [0]
        for t in queue:
            u = orbit[t][0]
            for s in self._level_gens[level]:
                v = self.base.mul(t, s[level])
                if v not in orbit:
                    w = self._mul(u, s)
                    orbit[v] = (w, self._inv(w))
                    queue.append(v)
        return orbit

    def sift(self, g: Element, start: int = 0) -> Tuple[Element, int]:
        """
        Strip ``g`` through levels ``start..k-1``.

        Returns:
            (residue, level) where level == k means g sifted completely
        """
        for level in range(start, self.k):
            v = g[level]
            if v == 0:
                continue
            entry = self._orbits[level].get(v)
            if entry is None:
                return g, level
            g = self._mul(g, entry[1])
        return g, self.k

    def _build(self) -> None:
        done: List[Set[Tuple[int, int]]] = [set() for _ in range(self.k)]
        i = self.k - 1
        while i >= 0:
            added_at = None
            for t, (u, _) in list(self._orbits[i].items()):
                for s_index, s in enumerate(self._level_gens[i]):
                    if (t, s_index) in done[i]:
                        continue
                    v = self.base.mul(t, s[i])
                    g = self._mul(self._mul(u, s), self._orbits[i][v][1])
                    h, j = self.sift(g, i + 1)
                    if j < self.k:
                        for level in range(i + 1, j + 1):
                            self._level_gens[level].append(h)
                            self._orbits[level] = self._build_orbit(level)
                            done[level] = set()
                        added_at = j
                        break
                    done[i].add((t, s_index))
                if added_at is not None:
                    break
            if added_at is None:
                i -= 1
            else:
                i = added_at

    @property
    def order(self) -> int:
        result = 1
        for orbit in self._orbits:
            result *= len(orbit)
        return result

    def contains(self, x: Sequence[int]) -> bool:
        return self.sift(tuple(int(v) for v in x))[1] == self.k

    def orbit(self, level: int) -> Tuple[int, ...]:
        """Values taken at coordinate ``level`` by elements trivial before it."""
        return tuple(sorted(self._orbits[level]))

    def transversal(self, level: int) -> Dict[int, Element]:
        """Value at coordinate ``level`` -> an element of that level realising it."""
        return {v: entry[0] for v, entry in self._orbits[level].items()}

    def strong_generators(self) -> List[Element]:
        seen: List[Element] = []
        for level_gens in self._level_gens:
            for g in level_gens:
                if g not in seen:
                    seen.append(g)
        return seen
