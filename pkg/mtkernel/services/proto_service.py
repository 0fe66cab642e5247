"""
Proto-coalgebra service: branching and coherent elements, the coreflection
Coh, the adjunction transposes and fixed points from prefixed points.
"""

import itertools
import logging
from typing import Hashable, Mapping, Optional, Sequence

from mtkernel.exceptions import MorphismError, ProtoCoalgebraError
from mtkernel.models.schemas import (
    Coalgebra,
    CohResult,
    FixedPoint,
    PfElement,
    ProtoCoalgebra,
    Signature,
)
from mtkernel.services.coalgebra_service import coalgebra_service
from mtkernel.services.signature_service import signature_service

logger = logging.getLogger(__name__)


class ProtoService:
    """Service for proto-coalgebras X -γ-> Y <-m- P_f(X)."""

    def branching(self, p: ProtoCoalgebra, x: Hashable) -> Optional[PfElement]:
        """The unique (a, t) with m(a, t) = γ(x), if x is branching."""
        if x not in p.gamma:
            raise ProtoCoalgebraError(f"{x!r} is not in the carrier")
        return p.m_inverse().get(p.gamma[x])

    def chain(self, p: ProtoCoalgebra, n: int) -> tuple:
        """X_n, where X_0 = X and X_{k+1} keeps the branching elements with children in X_k."""
        inverse = p.m_inverse()
        current = tuple(p.carrier)
        for _ in range(n):
            members = set(current)
            kept = []
            for x in current:
                element = inverse.get(p.gamma[x])
                if element is not None and set(element.assignment.values()) <= members:
                    kept.append(x)
            if len(kept) == len(current):
                break
            current = tuple(kept)
        return current

    def coh(self, p: ProtoCoalgebra) -> CohResult:
        """The coherent part of p as a coalgebra, with its inclusion into X."""
        coherent = self.chain(p, len(p.carrier))
        inverse = p.m_inverse()
        coalgebra = Coalgebra(
            signature=p.signature,
            states=coherent,
            step={x: inverse[p.gamma[x]] for x in coherent},
        )
        logger.debug("coh: %d of %d elements coherent", len(coherent), len(p.carrier))
        return CohResult(
            coherent=coherent,
            coalgebra=coalgebra,
            inclusion={x: x for x in coherent},
        )

    def path_coherent(self, p: ProtoCoalgebra, x: Hashable, depth: Optional[int] = None) -> bool:
        """
        True iff every path from x, following branching elements, ends in a
        branching element. Paths longer than |X| steps add nothing.
        """
        if x not in p.gamma:
            raise ProtoCoalgebraError(f"{x!r} is not in the carrier")
        depth = len(p.carrier) if depth is None else depth
        inverse = p.m_inverse()
        frontier = {x}
        visited = set()
        for _ in range(depth + 1):
            next_frontier = set()
            for y in frontier:
                element = inverse.get(p.gamma[y])
                if element is None:
                    return False
                next_frontier.update(element.assignment.values())
            visited |= frontier
            frontier = next_frontier - visited
            if not frontier:
                break
        return True

    def embed(self, c: Coalgebra) -> ProtoCoalgebra:
        """I(γ) = (γ, id): a coalgebra as a proto-coalgebra with Y = P_f(X)."""
        elements = signature_service.apply_functor(c.signature, c.states)
        return ProtoCoalgebra(
            signature=c.signature,
            carrier=c.states,
            ambient=tuple(elements),
            gamma=dict(c.step),
            m={e: e for e in elements},
        )

    # ============== Proto-morphisms ==============

    def check_proto_morphism(
        self,
        source: ProtoCoalgebra,
        target: ProtoCoalgebra,
        alpha: Mapping[Hashable, Hashable],
        beta: Mapping[Hashable, Hashable],
    ) -> bool:
        """True iff β∘γ = γ'∘α and β∘m = m'∘P_f(α)."""
        if source.signature != target.signature:
            raise ProtoCoalgebraError("proto-coalgebras are over different signatures")
        for name, function, domain, codomain in (
            ("alpha", alpha, source.carrier, set(target.carrier)),
            ("beta", beta, source.ambient, set(target.ambient)),
        ):
            for x in domain:
                if x not in function:
                    raise MorphismError(f"{name} undefined on {x!r}")
                if function[x] not in codomain:
                    raise MorphismError(f"{name} sends {x!r} outside its codomain")
        for x in source.carrier:
            if beta[source.gamma[x]] != target.gamma[alpha[x]]:
                return False
        for element, y in source.m.items():
            moved = signature_service.apply_on_function(source.signature, alpha, element)
            if beta[y] != target.m[moved]:
                return False
        return True

    def enumerate_proto_morphisms(self, z: Coalgebra, p: ProtoCoalgebra) -> list[tuple[dict, dict]]:
        """
        Every proto-morphism I(z) -> p. Since every element of the ambient
        set of I(z) is in the image of its m, β is determined by α.
        """
        source = self.embed(z)
        found = []
        for images in itertools.product(p.carrier, repeat=len(z.states)):
            alpha = dict(zip(z.states, images))
            beta = {
                e: p.m[signature_service.apply_on_function(z.signature, alpha, e)]
                for e in source.ambient
            }
            if self.check_proto_morphism(source, p, alpha, beta):
                found.append((alpha, beta))
        return found

    def transpose_to_proto(
        self, z: Coalgebra, p: ProtoCoalgebra, phi: Mapping[Hashable, Hashable]
    ) -> tuple[dict, dict]:
        """A coalgebra morphism z -> Coh(p) as the proto-morphism (i∘φ, m∘P_f(i∘φ))."""
        result = self.coh(p)
        if not coalgebra_service.check_coalgebra_morphism(z, result.coalgebra, phi):
            raise MorphismError("function is not a coalgebra morphism into Coh")
        alpha = {x: result.inclusion[phi[x]] for x in z.states}
        source = self.embed(z)
        beta = {
            e: p.m[signature_service.apply_on_function(z.signature, alpha, e)]
            for e in source.ambient
        }
        if not self.check_proto_morphism(source, p, alpha, beta):
            raise MorphismError("transpose fails a proto-morphism square")
        return alpha, beta

    def transpose_to_coalgebra(
        self,
        z: Coalgebra,
        p: ProtoCoalgebra,
        alpha: Mapping[Hashable, Hashable],
        beta: Mapping[Hashable, Hashable],
    ) -> dict:
        """A proto-morphism I(z) -> p corestricted to a coalgebra morphism z -> Coh(p)."""
        if not self.check_proto_morphism(self.embed(z), p, alpha, beta):
            raise MorphismError("maps fail a proto-morphism square")
        result = self.coh(p)
        coherent = set(result.coherent)
        phi = {}
        for x in z.states:
            if alpha[x] not in coherent:
                raise MorphismError(f"{x!r} is sent to the incoherent element {alpha[x]!r}")
            phi[x] = alpha[x]
        if not coalgebra_service.check_coalgebra_morphism(z, result.coalgebra, phi):
            raise MorphismError("corestriction is not a coalgebra morphism")
        return phi

    # ============== Fixed points ==============

    def prefixed_to_fixed(
        self,
        signature: Signature,
        carrier: Sequence[Hashable],
        alpha: Mapping[PfElement, Hashable],
    ) -> FixedPoint:
        """
        From an injective algebra α: P_f(X) -> X, the coherent part of
        (X -id-> X <-α- P_f(X)), whose step is invertible.
        """
        p = ProtoCoalgebra(
            signature=signature,
            carrier=tuple(carrier),
            ambient=tuple(carrier),
            gamma={x: x for x in carrier},
            m=dict(alpha),
        )
        result = self.coh(p)
        steps = [result.coalgebra.step[x] for x in result.coherent]
        expected = set(signature_service.apply_functor(signature, result.coherent))
        if len(set(steps)) != len(steps) or set(steps) != expected:
            raise ProtoCoalgebraError("coherent part is not a fixed point")
        return FixedPoint(
            coh=result,
            sup={result.coalgebra.step[x]: x for x in result.coherent},
        )


# Singleton instance
proto_service = ProtoService()
