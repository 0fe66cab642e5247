"""
Presheaf service: fibre presheaves, the polynomial functor on presheaves,
the underlying signature f' and natural trees.

Positions of the underlying signature are pairs (β, b) with β: D -> C and
b ∈ B(D); β determines D, so no object tag is needed.
"""

import itertools
import logging
import math
from typing import Hashable, Mapping, Optional

from mtkernel.config import settings
from mtkernel.exceptions import EnumerationLimitExceeded, PresheafError
from mtkernel.models.presheaf import Presheaf, PresheafMorphism
from mtkernel.models.schemas import Coalgebra, PfElement, Signature, TreeHandle
from mtkernel.services.coalgebra_service import coalgebra_service

logger = logging.getLogger(__name__)


class PresheafService:
    """Service for M-types in a category of finite presheaves."""

    def fibre_presheaf(self, f: PresheafMorphism, obj: Hashable, a: Hashable) -> Presheaf:
        """𝔹_a(D) = {(β: D -> C, b ∈ B(D)) | a·β = f(b)}, with (β, b)·δ = (β∘δ, b·δ)."""
        A, B = f.target, f.source
        cat = A.category
        if a not in A.sections.get(obj, ()):
            raise PresheafError(f"{a!r} is not a section at {obj!r}")
        sections = {
            d: tuple(
                (beta, b)
                for beta in cat.hom(d, obj)
                for b in B.sections[d]
                if A.act(a, beta) == f.apply(d, b)
            )
            for d in cat.objects
        }
        restrict = {
            delta: {
                (beta, b): (cat.compose(beta, delta), B.act(b, delta))
                for beta, b in sections[cat.cod(delta)]
            }
            for delta in cat.arrows
        }
        return Presheaf.build(cat, sections, restrict)

    def fibre_positions(self, f: PresheafMorphism, obj: Hashable, a: Hashable) -> tuple:
        """|𝔹_a|: the positions of the shape (a, obj) of f'."""
        fibre = self.fibre_presheaf(f, obj, a)
        return tuple(p for d in fibre.category.objects for p in fibre.sections[d])

    def enumerate_natural(
        self, source: Presheaf, target: Presheaf, guard: Optional[int] = None
    ) -> list[dict]:
        """
        Every natural transformation source -> target, as components per
        object, by filtering all families of functions.
        """
        guard = settings.ENUMERATION_GUARD if guard is None else guard
        cat = source.category
        candidates = math.prod(
            len(target.sections[c]) ** len(source.sections[c]) for c in cat.objects
        )
        if candidates > guard:
            raise EnumerationLimitExceeded(candidates, guard)
        per_object = []
        for c in cat.objects:
            domain = source.sections[c]
            per_object.append(
                [dict(zip(domain, values)) for values in itertools.product(target.sections[c], repeat=len(domain))]
            )
        natural = []
        for choice in itertools.product(*per_object):
            components = dict(zip(cat.objects, choice))
            if all(
                components[cat.dom(arrow)][source.act(x, arrow)]
                == target.act(components[cat.cod(arrow)][x], arrow)
                for arrow in cat.arrows
                for x in source.sections[cat.cod(arrow)]
            ):
                natural.append(components)
        logger.debug("%d of %d candidate families are natural", len(natural), candidates)
        return natural

    def presheaf_apply_Pf(self, f: PresheafMorphism, X: Presheaf, guard: Optional[int] = None) -> Presheaf:
        """
        P_f(X)(C) = {(a, t) | a ∈ A(C), t: 𝔹_a -> X natural}, with
        (a, t)·α = (a·α, α*(t)) and α*(t)(β, b) = t(α∘β, b).
        """
        A = f.target
        cat = A.category
        if X.category != cat:
            raise PresheafError("presheaf lives on a different category")
        sections = {}
        for c in cat.objects:
            elements = []
            for a in A.sections[c]:
                fibre = self.fibre_presheaf(f, c, a)
                for components in self.enumerate_natural(fibre, X, guard):
                    assignment = {
                        p: components[d][p] for d in cat.objects for p in fibre.sections[d]
                    }
                    elements.append(PfElement(shape=a, assignment=assignment))
            sections[c] = tuple(elements)
        positions = self.underlying_map(f).positions
        restrict = {}
        for alpha in cat.arrows:
            dom = cat.dom(alpha)
            mapping = {}
            for element in sections[cat.cod(alpha)]:
                moved = A.act(element.shape, alpha)
                mapping[element] = PfElement(
                    shape=moved,
                    assignment={
                        (beta, b): element.assignment[(cat.compose(alpha, beta), b)]
                        for beta, b in positions[(moved, dom)]
                    },
                )
            restrict[alpha] = mapping
        return Presheaf.build(cat, sections, restrict)

    def underlying_map(self, f: PresheafMorphism) -> Signature:
        """f': shapes (a, C) for a ∈ A(C), positions |𝔹_a|."""
        A = f.target
        shapes = tuple((a, c) for c in A.category.objects for a in A.sections[c])
        return Signature(
            shapes=shapes,
            positions={(a, c): self.fibre_positions(f, c, a) for a, c in shapes},
        )

    # ============== Natural trees ==============

    def natural_tree(self, f: PresheafMorphism, h: TreeHandle) -> bool:
        """
        True iff every node's assignment is natural: the child at (β, b)
        lives over dom β, and for every δ the child at (β∘δ, b·δ) is the
        δ-restriction of the child at (β, b).
        """
        if h.signature != self.underlying_map(f):
            raise PresheafError("tree is not over the underlying signature")
        h = coalgebra_service.minimize(h.universe, h.state)
        universe = h.universe
        cat = f.target.category
        for state in universe.states:
            element = universe.step[state]
            for (beta, b), child in element.assignment.items():
                if universe.shape_of(child)[1] != cat.dom(beta):
                    logger.debug("child at %r does not live over %r", (beta, b), cat.dom(beta))
                    return False
                for delta in cat.arrows_into(cat.dom(beta)):
                    restricted = self._restricted_step(f, universe, child, delta)
                    moved = element.assignment[(cat.compose(beta, delta), f.source.act(b, delta))]
                    if universe.step[moved] != restricted:
                        logger.debug("naturality fails at %r along %r", (beta, b), delta)
                        return False
        return True

    def _restricted_step(
        self, f: PresheafMorphism, universe: Coalgebra, state: Hashable, alpha: Hashable
    ) -> PfElement:
        """The step of state·α: root (a·α, C') and children t(α∘β', b)."""
        cat = f.target.category
        element = universe.step[state]
        a, _ = element.shape
        moved = f.target.act(a, alpha)
        dom = cat.dom(alpha)
        return PfElement(
            shape=(moved, dom),
            assignment={
                (beta, b): element.assignment[(cat.compose(alpha, beta), b)]
                for beta, b in universe.signature.positions[(moved, dom)]
            },
        )

    def restrict_tree(self, f: PresheafMorphism, h: TreeHandle, alpha: Hashable) -> TreeHandle:
        """The presheaf action T·α on natural trees."""
        if not self.natural_tree(f, h):
            raise PresheafError("tree is not natural")
        cat = f.target.category
        _, root_object = h.root
        if alpha not in cat.arrows or cat.cod(alpha) != root_object:
            raise PresheafError(f"{alpha!r} does not end at {root_object!r}")
        h = coalgebra_service.minimize(h.universe, h.state)
        fresh = ("restrict", alpha)
        step = dict(h.universe.step)
        step[fresh] = self._restricted_step(f, h.universe, h.state, alpha)
        coalgebra = Coalgebra(
            signature=h.signature,
            states=h.universe.states + (fresh,),
            step=step,
        )
        return coalgebra_service.minimize(coalgebra, fresh)

    def unfold_presheaf_coalgebra(
        self,
        f: PresheafMorphism,
        X: Presheaf,
        gamma: Mapping[Hashable, Mapping[Hashable, PfElement]],
    ) -> Coalgebra:
        """
        The f'-coalgebra |γ| on states (x, C) of a natural γ: X -> P_f(X).
        Its states unfold to natural trees.
        """
        structure = PresheafMorphism(
            source=X,
            target=self.presheaf_apply_Pf(f, X),
            components={c: dict(gamma[c]) for c in X.category.objects},
        )
        cat = X.category
        states = tuple((x, c) for c in cat.objects for x in X.sections[c])
        step = {}
        for x, c in states:
            element = structure.apply(c, x)
            step[(x, c)] = PfElement(
                shape=(element.shape, c),
                assignment={
                    (beta, b): (y, cat.dom(beta)) for (beta, b), y in element.assignment.items()
                },
            )
        return Coalgebra(signature=self.underlying_map(f), states=states, step=step)


# Singleton instance
presheaf_service = PresheafService()
