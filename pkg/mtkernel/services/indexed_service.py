"""
Indexed service: signatures over an index set, fibre-coherent trees, the χ
map and reindexing.
"""

import logging
from typing import Hashable, Mapping, Sequence

from mtkernel.exceptions import IndexedError
from mtkernel.models.schemas import (
    Coalgebra,
    IndexedSignature,
    PfElement,
    Signature,
    SignatureMorphism,
    TreeHandle,
)
from mtkernel.services.coalgebra_service import coalgebra_service
from mtkernel.services.signature_service import signature_service

logger = logging.getLogger(__name__)


class IndexedService:
    """Service for M-types in a slice over a finite index set."""

    def indexed_apply(
        self,
        isig: IndexedSignature,
        carrier: Sequence[Hashable],
        xi: Mapping[Hashable, Hashable],
    ) -> list[PfElement]:
        """The elements (a, t) of P_f(carrier) with ξ(t(b)) = α(a) for every position b."""
        for x in carrier:
            if x not in xi:
                raise IndexedError(f"fibre function undefined on {x!r}")
        return [
            element
            for element in signature_service.apply_functor(isig.base, carrier)
            if all(xi[x] == isig.fibre_of[element.shape] for x in element.assignment.values())
        ]

    def _check_over_base(self, isig: IndexedSignature, h: TreeHandle) -> None:
        if h.signature != isig.base:
            raise IndexedError("tree is not over the base signature")

    def fibre_coherent(self, isig: IndexedSignature, h: TreeHandle) -> bool:
        """True iff every node of h lies in the fibre of its root."""
        self._check_over_base(isig, h)
        fibre = isig.fibre_of[h.root]
        return all(
            isig.fibre_of[h.universe.shape_of(x)] == fibre
            for x in coalgebra_service.reachable(h.universe, [h.state])
        )

    # ============== Product signature ==============

    def tagged_signature(self, isig: IndexedSignature) -> Signature:
        """f × I: shapes (a, i), positions those of a."""
        shapes = tuple((a, i) for a in isig.base.shapes for i in isig.index)
        return Signature(shapes=shapes, positions={(a, i): isig.base.positions[a] for a, i in shapes})

    def tagging_morphism(self, isig: IndexedSignature, tag: Mapping[Hashable, Hashable]) -> SignatureMorphism:
        """The square a ↦ (a, tag(a)) from the base into f × I."""
        return signature_service.shape_morphism(
            isig.base,
            self.tagged_signature(isig),
            {a: (a, tag[a]) for a in isig.base.shapes},
        )

    def chi(self, isig: IndexedSignature, h: TreeHandle, i: Hashable) -> TreeHandle:
        """χ(h, i): tag every node of h with the constant index i."""
        self._check_over_base(isig, h)
        if i not in isig.index:
            raise IndexedError(f"unknown index {i!r}")
        morphism = self.tagging_morphism(isig, {a: i for a in isig.base.shapes})
        return coalgebra_service.relabel_tree(morphism, h)

    def project(self, isig: IndexedSignature, h: TreeHandle) -> TreeHandle:
        """First projection of a tree over f × I back to the base."""
        tagged = self.tagged_signature(isig)
        if h.signature != tagged:
            raise IndexedError("tree is not over the tagged signature")
        morphism = signature_service.shape_morphism(tagged, isig.base, {s: s[0] for s in tagged.shapes})
        return coalgebra_service.relabel_tree(morphism, h)

    def equaliser_characterization(self, isig: IndexedSignature, h: TreeHandle) -> bool:
        """⟨id, α⟩_!(h) = χ(h, α(root)): the tree as a point of the equaliser."""
        self._check_over_base(isig, h)
        own_fibres = coalgebra_service.relabel_tree(self.tagging_morphism(isig, isig.fibre_of), h)
        root_fibre = self.chi(isig, h, isig.fibre_of[h.root])
        return own_fibres == root_fibre

    # ============== Reindexing ==============

    def reindex(
        self,
        isig: IndexedSignature,
        domain: Sequence[Hashable],
        x: Mapping[Hashable, Hashable],
    ) -> tuple[IndexedSignature, SignatureMorphism]:
        """
        Pull an indexed signature back along x: J -> I.

        Returns:
            The signature x*f, with shapes (j, a) for x(j) = α(a), and the
            projection square (j, a) ↦ a covering x.
        """
        for j in domain:
            if j not in x:
                raise IndexedError(f"index map undefined on {j!r}")
            if x[j] not in isig.index:
                raise IndexedError(f"{j!r} is sent to unknown index {x[j]!r}")
        shapes = tuple(
            (j, a) for j in domain for a in isig.base.shapes if isig.fibre_of[a] == x[j]
        )
        base = Signature(shapes=shapes, positions={(j, a): isig.base.positions[a] for j, a in shapes})
        pulled = IndexedSignature(
            base=base,
            index=tuple(domain),
            fibre_of={(j, a): j for j, a in shapes},
        )
        projection = signature_service.shape_morphism(base, isig.base, {s: s[1] for s in shapes})
        logger.debug("reindexed %d shapes to %d", len(isig.base.shapes), len(shapes))
        return pulled, projection

    def reindex_tree(
        self,
        isig: IndexedSignature,
        domain: Sequence[Hashable],
        x: Mapping[Hashable, Hashable],
        j: Hashable,
        h: TreeHandle,
    ) -> TreeHandle:
        """A fibre-coherent tree with root fibre x(j), as a tree of M^J over x*f at j."""
        pulled, _ = self.reindex(isig, domain, x)
        if j not in pulled.index:
            raise IndexedError(f"unknown index {j!r}")
        if not self.fibre_coherent(isig, h):
            raise IndexedError("tree is not fibre-coherent")
        if isig.fibre_of[h.root] != x[j]:
            raise IndexedError(f"tree lies over {isig.fibre_of[h.root]!r}, not over x({j!r})")
        states = coalgebra_service.reachable(h.universe, [h.state])
        coalgebra = Coalgebra(
            signature=pulled.base,
            states=tuple(states),
            step={
                s: PfElement(shape=(j, h.universe.step[s].shape), assignment=h.universe.step[s].assignment)
                for s in states
            },
        )
        return coalgebra_service.minimize(coalgebra, h.state)


# Singleton instance
indexed_service = IndexedService()
