"""
Signature service: polynomial signatures and the functor P_f on finite sets.
"""

import itertools
import logging
from typing import Hashable, Iterable, Mapping, Sequence

from mtkernel.exceptions import MorphismError, SignatureError
from mtkernel.models.schemas import PfElement, Signature, SignatureMorphism

logger = logging.getLogger(__name__)

POINT = "⊥"


class SignatureService:
    """Service for signatures, their morphisms and the action of P_f."""

    def validate_signature(self, sig: Signature) -> Signature:
        """Re-run every Signature invariant and return the signature."""
        sig.check()
        return sig

    def signature_from_map(
        self,
        domain: Sequence[Hashable],
        mapping: Mapping[Hashable, Hashable],
        codomain: Sequence[Hashable],
    ) -> Signature:
        """
        Present a map f: B -> A as a container.

        Args:
            domain: the set B, in order
            mapping: f itself
            codomain: the set A, in order

        Returns:
            The signature whose positions over a are f⁻¹(a) in domain order.
        """
        targets = set(codomain)
        for b in domain:
            if b not in mapping:
                raise SignatureError(f"map undefined on {b!r}")
            if mapping[b] not in targets:
                raise SignatureError(f"{b!r} maps to {mapping[b]!r}, outside the codomain")
        return Signature(
            shapes=tuple(codomain),
            positions={a: tuple(b for b in domain if mapping[b] == a) for a in codomain},
        )

    def apply_functor(self, sig: Signature, carrier: Iterable[Hashable]) -> list[PfElement]:
        """All elements (a, t) of P_f(carrier), shapes first, then assignments in product order."""
        carrier = tuple(carrier)
        elements = []
        for shape in sig.shapes:
            positions = sig.positions[shape]
            for values in itertools.product(carrier, repeat=len(positions)):
                elements.append(PfElement(shape=shape, assignment=dict(zip(positions, values))))
        return elements

    def apply_on_function(
        self, sig: Signature, phi: Mapping[Hashable, Hashable], element: PfElement
    ) -> PfElement:
        """P_f(φ)(a, t) = (a, φ∘t)."""
        if not sig.has_shape(element.shape):
            raise SignatureError(f"unknown shape {element.shape!r}")
        assignment = {}
        for position in sig.positions[element.shape]:
            value = element.assignment[position]
            if value not in phi:
                raise MorphismError(f"function undefined on {value!r}")
            assignment[position] = phi[value]
        return PfElement(shape=element.shape, assignment=assignment)

    # ============== Pointing ==============

    def fresh_point(self, sig: Signature) -> str:
        """A shape identifier ⊥, ⊥1, ⊥2, ... not used by sig."""
        candidate, counter = POINT, 0
        while sig.has_shape(candidate):
            counter += 1
            candidate = f"{POINT}{counter}"
        return candidate

    def point_signature(self, sig: Signature) -> Signature:
        """Freely add a nullary shape and make it the point."""
        point = self.fresh_point(sig)
        positions = dict(sig.positions)
        positions[point] = ()
        return Signature(shapes=sig.shapes + (point,), positions=positions, point=point)

    def pointing_morphism(self, sig: Signature) -> SignatureMorphism:
        """The inclusion square of sig into point_signature(sig)."""
        pointed = self.point_signature(sig)
        return SignatureMorphism(
            source=sig,
            target=pointed,
            shape_map={a: a for a in sig.shapes},
            position_bijections={a: {b: b for b in sig.positions[a]} for a in sig.shapes},
        )

    def unpoint_signature(self, sig: Signature) -> Signature:
        """Remove the point of a pointed signature."""
        if sig.point is None:
            raise SignatureError("signature is not pointed")
        shapes = tuple(a for a in sig.shapes if a != sig.point)
        return Signature(shapes=shapes, positions={a: sig.positions[a] for a in shapes})

    # ============== Morphisms ==============

    def transform_element(self, morphism: SignatureMorphism, element: PfElement) -> PfElement:
        """α̃(a', t) = (α(a'), t∘β_a'⁻¹)."""
        if not morphism.source.has_shape(element.shape):
            raise SignatureError(f"shape {element.shape!r} is not in the source signature")
        image = morphism.shape_map[element.shape]
        bijection = morphism.position_bijections[element.shape]
        moved = {bijection[b]: value for b, value in element.assignment.items()}
        return PfElement(
            shape=image,
            assignment={b: moved[b] for b in morphism.target.positions[image]},
        )

    def identity_morphism(self, sig: Signature) -> SignatureMorphism:
        return SignatureMorphism(
            source=sig,
            target=sig,
            shape_map={a: a for a in sig.shapes},
            position_bijections={a: {b: b for b in sig.positions[a]} for a in sig.shapes},
        )

    def compose_morphisms(
        self, second: SignatureMorphism, first: SignatureMorphism
    ) -> SignatureMorphism:
        """Paste two pullback squares: second∘first."""
        if first.target != second.source:
            raise SignatureError("morphisms are not composable")
        shape_map = {}
        bijections = {}
        for shape in first.source.shapes:
            middle = first.shape_map[shape]
            shape_map[shape] = second.shape_map[middle]
            bijections[shape] = {
                b: second.position_bijections[middle][first.position_bijections[shape][b]]
                for b in first.source.positions[shape]
            }
        return SignatureMorphism(
            source=first.source,
            target=second.target,
            shape_map=shape_map,
            position_bijections=bijections,
        )

    def shape_morphism(
        self, source: Signature, target: Signature, shape_map: Mapping[Hashable, Hashable]
    ) -> SignatureMorphism:
        """
        A morphism whose position bijections are identities on labels.
        Used for relabellings such as a ↦ (a, i) that keep positions.
        """
        return SignatureMorphism(
            source=source,
            target=target,
            shape_map=dict(shape_map),
            position_bijections={a: {b: b for b in source.positions[a]} for a in source.shapes},
        )


# Singleton instance
signature_service = SignatureService()
