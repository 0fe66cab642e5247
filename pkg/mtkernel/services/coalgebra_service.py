"""
Coalgebra service: morphisms, paths, bisimulation and minimization.

Bisimilarity is decided by partition refinement. Minimized coalgebras are
numbered 0..n-1 in breadth-first order from the root, following positions in
declared order, so two handles denote the same tree iff they are equal.
"""

import logging
from collections import deque
from typing import Hashable, Iterable, Mapping, Optional, Sequence

from mtkernel.exceptions import CoalgebraError, MorphismError, PathError
from mtkernel.models.schemas import (
    Coalgebra,
    Path,
    PathSequence,
    PfElement,
    SignatureMorphism,
    TreeHandle,
)
from mtkernel.services.signature_service import signature_service

logger = logging.getLogger(__name__)


class CoalgebraService:
    """Service for finite P_f-coalgebras."""

    # ============== Morphisms ==============

    def check_coalgebra_morphism(
        self, source: Coalgebra, target: Coalgebra, h: Mapping[Hashable, Hashable]
    ) -> bool:
        """True iff δ∘h = P_f(h)∘γ."""
        if source.signature != target.signature:
            raise CoalgebraError("coalgebras are over different signatures")
        self._check_function(source, target, h)
        for state in source.states:
            image = signature_service.apply_on_function(source.signature, h, source.step[state])
            if target.step[h[state]] != image:
                return False
        return True

    def _check_function(self, source: Coalgebra, target: Coalgebra, h: Mapping) -> None:
        for state in source.states:
            if state not in h:
                raise MorphismError(f"function undefined on state {state!r}")
            if h[state] not in target.step:
                raise MorphismError(f"{state!r} is sent to {h[state]!r}, not a target state")

    def enumerate_morphisms(self, source: Coalgebra, target: Coalgebra) -> list[dict]:
        """
        Every coalgebra morphism source -> target.

        Choosing the image of one state forces the images of its successors,
        so the search only branches on states not yet reached.
        """
        if source.signature != target.signature:
            raise CoalgebraError("coalgebras are over different signatures")

        def extend(partial: dict, state: Hashable, image: Hashable) -> Optional[dict]:
            extended = dict(partial)
            pending = [(state, image)]
            while pending:
                x, y = pending.pop()
                if x in extended:
                    if extended[x] != y:
                        return None
                    continue
                if source.shape_of(x) != target.shape_of(y):
                    return None
                extended[x] = y
                children = target.step[y].assignment
                for b, child in source.step[x].assignment.items():
                    pending.append((child, children[b]))
            return extended

        found = []

        def search(partial: dict) -> None:
            free = next((x for x in source.states if x not in partial), None)
            if free is None:
                found.append({x: partial[x] for x in source.states})
                return
            for candidate in target.states:
                extended = extend(partial, free, candidate)
                if extended is not None:
                    search(extended)

        search({})
        logger.debug("found %d coalgebra morphisms", len(found))
        return found

    # ============== Paths ==============

    def check_path(self, c: Coalgebra, path: Path) -> Path:
        """Raise PathError unless x_{i+1} = γ(x_i)(b_i) along the path."""
        states, positions = path.states, path.positions
        for state in states:
            if state not in c.step:
                raise PathError(f"unknown state {state!r} on path")
        for i, position in enumerate(positions):
            assignment = c.step[states[i]].assignment
            if position not in assignment:
                raise PathError(f"{position!r} is not a position of state {states[i]!r}")
            if assignment[position] != states[i + 1]:
                raise PathError(f"step {i} of the path does not follow the coalgebra")
        return path

    def enumerate_paths(self, c: Coalgebra, start: Hashable, max_nodes: int) -> list[Path]:
        """All paths from start with at most max_nodes states, shortest first."""
        if start not in c.step:
            raise CoalgebraError(f"unknown state {start!r}")
        if max_nodes < 1:
            raise PathError("a path has at least one state")
        layer = [(start,)]
        paths = [Path(entries=entries) for entries in layer]
        for _ in range(max_nodes - 1):
            next_layer = []
            for entries in layer:
                element = c.step[entries[-1]]
                for position in c.signature.positions[element.shape]:
                    next_layer.append(entries + (position, element.assignment[position]))
            paths.extend(Path(entries=entries) for entries in next_layer)
            layer = next_layer
        return paths

    def path_image(self, h: Mapping[Hashable, Hashable], path: Path) -> Path:
        """h*(σ): apply h to the states of a path, keep the positions."""
        entries = tuple(
            h[entry] if i % 2 == 0 else entry for i, entry in enumerate(path.entries)
        )
        return Path(entries=entries)

    def path_sequence(self, c: Coalgebra, path: Path) -> PathSequence:
        """The shape/position projection <a0, b0, ..., an> of a path."""
        self.check_path(c, path)
        entries = tuple(
            c.shape_of(entry) if i % 2 == 0 else entry for i, entry in enumerate(path.entries)
        )
        return PathSequence(entries=entries)

    def lift_path(
        self,
        source: Coalgebra,
        target: Coalgebra,
        h: Mapping[Hashable, Hashable],
        path: Path,
        start: Hashable,
    ) -> Path:
        """The unique path σ from start with h*(σ) = path."""
        if not self.check_coalgebra_morphism(source, target, h):
            raise MorphismError("function is not a coalgebra morphism")
        self.check_path(target, path)
        if start not in source.step or h[start] != path.entries[0]:
            raise PathError(f"{start!r} does not lie over the first state of the path")
        entries = [start]
        state = start
        for position, expected in zip(path.positions, path.states[1:]):
            state = source.step[state].assignment[position]
            if h[state] != expected:
                raise PathError("path does not lift along the morphism")
            entries.extend((position, state))
        return Path(entries=tuple(entries))

    # ============== Bisimulation ==============

    def refine(self, c: Coalgebra, states: Optional[Sequence[Hashable]] = None) -> dict:
        """
        Coarsest bisimulation on a subcoalgebra, as a block number per state.

        The initial partition groups states by root shape; each round splits
        blocks by the blocks of the successors until nothing changes.
        """
        states = tuple(c.states if states is None else states)
        shape_ids: dict = {}
        block = {x: shape_ids.setdefault(c.shape_of(x), len(shape_ids)) for x in states}
        count = len(shape_ids)
        rounds = 0
        while True:
            rounds += 1
            keys: dict = {}
            refined = {}
            for x in states:
                key = (block[x], tuple(block[y] for y in c.successors(x)))
                refined[x] = keys.setdefault(key, len(keys))
            if len(keys) == count:
                logger.debug("refinement stable after %d rounds: %d blocks", rounds, count)
                return block
            block, count = refined, len(keys)

    def disjoint_union(self, left: Coalgebra, right: Coalgebra) -> Coalgebra:
        """The coproduct coalgebra on states (0, x) and (1, y)."""
        if left.signature != right.signature:
            raise CoalgebraError("coalgebras are over different signatures")
        states = []
        step = {}
        for tag, c in ((0, left), (1, right)):
            for x in c.states:
                element = c.step[x]
                states.append((tag, x))
                step[(tag, x)] = PfElement(
                    shape=element.shape,
                    assignment={b: (tag, y) for b, y in element.assignment.items()},
                )
        return Coalgebra(signature=left.signature, states=tuple(states), step=step)

    def bisimilar(
        self, left: Coalgebra, x: Hashable, right: Coalgebra, y: Hashable
    ) -> bool:
        """True iff x and y denote the same tree."""
        for c, state in ((left, x), (right, y)):
            if state not in c.step:
                raise CoalgebraError(f"unknown state {state!r}")
        union = self.disjoint_union(left, right)
        block = self.refine(union)
        return block[(0, x)] == block[(1, y)]

    # ============== Minimization ==============

    def reachable(self, c: Coalgebra, roots: Iterable[Hashable]) -> list:
        """States reachable from roots, in breadth-first order."""
        seen = []
        visited = set()
        queue = deque()
        for root in roots:
            if root not in c.step:
                raise CoalgebraError(f"unknown state {root!r}")
            if root not in visited:
                visited.add(root)
                queue.append(root)
        while queue:
            x = queue.popleft()
            seen.append(x)
            for y in c.successors(x):
                if y not in visited:
                    visited.add(y)
                    queue.append(y)
        return seen

    def canonical_quotient(self, c: Coalgebra, roots: Sequence[Hashable]) -> tuple[Coalgebra, dict]:
        """
        Quotient the part of c reachable from roots by bisimilarity, with
        blocks numbered in breadth-first order from the roots.

        Returns:
            The quotient coalgebra and the map from reachable states to it.
        """
        states = self.reachable(c, roots)
        block = self.refine(c, states)
        number: dict = {}
        representative = {}
        queue = deque()
        for root in roots:
            if block[root] not in number:
                number[block[root]] = len(number)
                representative[block[root]] = root
                queue.append(block[root])
        while queue:
            current = queue.popleft()
            for y in c.successors(representative[current]):
                if block[y] not in number:
                    number[block[y]] = len(number)
                    representative[block[y]] = y
                    queue.append(block[y])
        step = {}
        for b, index in number.items():
            element = c.step[representative[b]]
            step[index] = PfElement(
                shape=element.shape,
                assignment={
                    position: number[block[element.assignment[position]]]
                    for position in c.signature.positions[element.shape]
                },
            )
        quotient = Coalgebra(
            signature=c.signature,
            states=tuple(range(len(number))),
            step={i: step[i] for i in range(len(number))},
        )
        return quotient, {x: number[block[x]] for x in states}

    def minimize(self, c: Coalgebra, state: Hashable) -> TreeHandle:
        """The canonical rational-tree handle of a state."""
        universe, _ = self.canonical_quotient(c, [state])
        return TreeHandle(universe=universe, state=0)

    def minimize_with_map(self, c: Coalgebra, state: Hashable) -> tuple[TreeHandle, dict]:
        """minimize, together with the induced morphism from the reachable part."""
        universe, mapping = self.canonical_quotient(c, [state])
        return TreeHandle(universe=universe, state=0), mapping

    def quotient(self, c: Coalgebra) -> tuple[Coalgebra, dict]:
        """Minimize the whole coalgebra; returns the quotient and the induced morphism."""
        return self.canonical_quotient(c, c.states)

    def is_minimal(self, c: Coalgebra) -> bool:
        block = self.refine(c)
        return len(set(block.values())) == len(c.states)

    def relabel(self, morphism: SignatureMorphism, c: Coalgebra) -> Coalgebra:
        """α_! on coalgebras: transform every step along a signature morphism."""
        if morphism.source != c.signature:
            raise CoalgebraError("coalgebra is not over the source of the morphism")
        return Coalgebra(
            signature=morphism.target,
            states=c.states,
            step={
                x: signature_service.transform_element(morphism, c.step[x]) for x in c.states
            },
        )

    def relabel_tree(self, morphism: SignatureMorphism, h: TreeHandle) -> TreeHandle:
        """The image of a rational tree under α_!."""
        return self.minimize(self.relabel(morphism, h.universe), h.state)


# Singleton instance
coalgebra_service = CoalgebraService()
