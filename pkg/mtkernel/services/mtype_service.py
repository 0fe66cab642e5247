"""
M-type service: truncations and approximation sequences, the pointed
signature pipeline, the Lambek witness and the path-set representation.
"""

import logging
from typing import Callable, Hashable, Optional, Sequence

from mtkernel.exceptions import PathError, SignatureError, TreeError
from mtkernel.models.schemas import (
    Coalgebra,
    FiniteTree,
    PathSequence,
    PfElement,
    Signature,
    TreeHandle,
)
from mtkernel.services.coalgebra_service import coalgebra_service
from mtkernel.services.signature_service import signature_service

logger = logging.getLogger(__name__)

Oracle = Callable[[PathSequence], bool]


class MTypeService:
    """Service for elements of M-types and their finite approximations."""

    # ============== Truncation ==============

    def unfold(self, c: Coalgebra, state: Hashable, n: int) -> FiniteTree:
        """p̂_n: unfold a state n levels, cutting below."""
        if n < 0:
            raise TreeError("depth must be non-negative")
        if state not in c.step:
            raise TreeError(f"unknown state {state!r}")
        memo: dict = {}

        def build(x: Hashable, k: int) -> FiniteTree:
            if k == 0:
                return FiniteTree.cut()
            if (x, k) not in memo:
                element = c.step[x]
                memo[(x, k)] = FiniteTree.node(
                    element.shape,
                    {
                        b: build(element.assignment[b], k - 1)
                        for b in c.signature.positions[element.shape]
                    },
                )
            return memo[(x, k)]

        return build(state, n)

    def truncate(self, h: TreeHandle, n: int) -> FiniteTree:
        """tr_n of a rational tree."""
        return self.unfold(h.universe, h.state, n)

    def truncate_tree(self, tree: FiniteTree, n: int) -> FiniteTree:
        """Cut a finite tree at depth n."""
        if n < 0:
            raise TreeError("depth must be non-negative")
        if n == 0 or tree.is_cut:
            return FiniteTree.cut()
        return FiniteTree.node(
            tree.shape,
            {b: self.truncate_tree(child, n - 1) for b, child in tree.children.items()},
        )

    def check_tree(self, sig: Signature, tree: FiniteTree) -> FiniteTree:
        """Raise TreeError unless every node's children match its shape."""
        if tree.is_cut:
            return tree
        if not sig.has_shape(tree.shape):
            raise TreeError(f"unknown shape {tree.shape!r}")
        if set(tree.children) != set(sig.positions[tree.shape]):
            raise TreeError(f"children of a {tree.shape!r} node do not match its positions")
        for child in tree.children.values():
            self.check_tree(sig, child)
        return tree

    def check_approximation_sequence(self, seq: Sequence[FiniteTree]) -> bool:
        """True iff seq[n] = tr_n(seq[m]) for all 1 <= n < m <= k (1-based)."""
        for m in range(2, len(seq) + 1):
            for n in range(1, m):
                if self.truncate_tree(seq[m - 1], n) != seq[n - 1]:
                    return False
        return True

    def approximations(self, h: TreeHandle, k: int) -> list[FiniteTree]:
        """The approximation sequence tr_1(h), ..., tr_k(h)."""
        return [self.truncate(h, n) for n in range(1, k + 1)]

    # ============== Pointed signatures ==============

    def lift_to_pointed(self, c: Coalgebra) -> Coalgebra:
        """Read a coalgebra over f as one over f_⊥."""
        return coalgebra_service.relabel(signature_service.pointing_morphism(c.signature), c)

    def strip_point(self, pointed: Coalgebra, state: Hashable) -> Optional[TreeHandle]:
        """The tree of state over the unpointed signature, or None if ⊥ occurs in it."""
        sig = pointed.signature
        if sig.point is None:
            raise SignatureError("coalgebra is not over a pointed signature")
        reachable = coalgebra_service.reachable(pointed, [state])
        if any(pointed.shape_of(x) == sig.point for x in reachable):
            return None
        coalgebra = Coalgebra(
            signature=signature_service.unpoint_signature(sig),
            states=tuple(reachable),
            step={x: pointed.step[x] for x in reachable},
        )
        return coalgebra_service.minimize(coalgebra, state)

    def sup_map(self, universe: Coalgebra) -> dict[PfElement, Hashable]:
        """The inverse of the step map on its image."""
        sup = {}
        for x in universe.states:
            element = universe.step[x]
            if element in sup:
                raise TreeError(f"states {sup[element]!r} and {x!r} have the same step")
            sup[element] = x
        return sup

    # ============== Path sets ==============

    def check_sequence(self, sig: Signature, seq: PathSequence) -> PathSequence:
        """Raise PathError unless b_i is a position of a_i along seq."""
        shapes, positions = seq.shapes, seq.positions
        for shape in shapes:
            if not sig.has_shape(shape):
                raise PathError(f"unknown shape {shape!r} in sequence")
        for i, position in enumerate(positions):
            if position not in sig.positions[shapes[i]]:
                raise PathError(f"{position!r} is not a position of {shapes[i]!r}")
        return seq

    def pathset_member(self, h: TreeHandle, seq: PathSequence) -> bool:
        """Membership of seq in the path-set of h."""
        self.check_sequence(h.signature, seq)
        state = h.state
        shapes, positions = seq.shapes, seq.positions
        for i, shape in enumerate(shapes):
            if h.universe.shape_of(state) != shape:
                return False
            if i < len(positions):
                state = h.universe.step[state].assignment[positions[i]]
        return True

    def pathset_oracle(self, h: TreeHandle) -> Oracle:
        return lambda seq: self.pathset_member(h, seq)

    def pathset_sup(self, shape: Hashable, children: dict[Hashable, Oracle]) -> Oracle:
        """
        m(a, t): <a0> is a member iff a0 = a, and <a0, b0> * σ is a member
        iff a0 = a and σ is a member of t(b0).
        """

        def member(seq: PathSequence) -> bool:
            if seq.entries[0] != shape:
                return False
            if len(seq.entries) == 1:
                return True
            return children[seq.entries[1]](PathSequence(entries=seq.entries[2:]))

        return member

    def enumerate_sequences(self, sig: Signature, max_len: int) -> list[PathSequence]:
        """All path sequences with at most max_len shapes, shortest first."""
        if max_len < 1:
            return []
        layer = [(a,) for a in sig.shapes]
        found = list(layer)
        for _ in range(max_len - 1):
            layer = [
                entries + (b, a)
                for entries in layer
                for b in sig.positions[entries[-1]]
                for a in sig.shapes
            ]
            found.extend(layer)
        return [PathSequence(entries=entries) for entries in found]

    def oracle_coherent(self, sig: Signature, member: Oracle, max_len: int) -> bool:
        """
        Check on sequences of at most max_len shapes that exactly one <a> is
        a member and every member extends along each position of its last
        shape by exactly one shape.
        """
        roots = [a for a in sig.shapes if member(PathSequence(entries=(a,)))]
        if len(roots) != 1:
            logger.debug("oracle has %d root shapes", len(roots))
            return False
        for seq in self.enumerate_sequences(sig, max_len - 1):
            if not member(seq):
                continue
            for b in sig.positions[seq.entries[-1]]:
                extensions = [
                    a for a in sig.shapes
                    if member(PathSequence(entries=seq.entries + (b, a)))
                ]
                if len(extensions) != 1:
                    logger.debug("%r has %d extensions along %r", seq.entries, len(extensions), b)
                    return False
        return True

    def pathset_coherent(self, h: TreeHandle, max_len: int) -> bool:
        """The coherence clauses for the path-set of a rational tree."""
        return self.oracle_coherent(h.signature, self.pathset_oracle(h), max_len)


# Singleton instance
mtype_service = MTypeService()
