"""
Sheaf service: the sheaf condition, compatible families of natural trees
(the plus-construction M⁺) and glueing.
"""

import itertools
import logging
from collections import deque
from typing import Hashable, Sequence

from mtkernel.exceptions import FamilyError, PresheafError
from mtkernel.models.presheaf import CompatibleFamily, Presheaf, PresheafMorphism, Site
from mtkernel.models.schemas import Coalgebra, PfElement, TreeHandle
from mtkernel.services.coalgebra_service import coalgebra_service
from mtkernel.services.presheaf_service import presheaf_service

logger = logging.getLogger(__name__)


class SheafService:
    """Service for sites, sheaves and compatible families of trees."""

    # ============== Sheaf condition ==============

    def _check_cover(self, site: Site, target: Hashable, cover: Sequence[Hashable]) -> None:
        cat = site.category
        for leg in cover:
            if leg not in cat.arrows or cat.cod(leg) != target:
                raise FamilyError(f"leg {leg!r} does not end at {target!r}")

    def matching_sections(self, X: Presheaf, cover: Sequence[Hashable]) -> list[tuple]:
        """All families (x_i ∈ X(C_i)) that agree on the chosen pullbacks."""
        cat = X.category
        pools = [X.sections[cat.dom(leg)] for leg in cover]
        squares = {
            (i, j): cat.pullback(cover[i], cover[j])
            for i in range(len(cover))
            for j in range(len(cover))
        }
        return [
            family
            for family in itertools.product(*pools)
            if all(
                X.act(family[i], p) == X.act(family[j], q)
                for (i, j), (_, p, q) in squares.items()
            )
        ]

    def amalgamations(
        self,
        X: Presheaf,
        site: Site,
        target: Hashable,
        cover: Sequence[Hashable],
        family: Sequence[Hashable],
    ) -> list:
        """The sections x ∈ X(target) with x·c_i = x_i for every leg."""
        self._check_cover(site, target, cover)
        return [
            x for x in X.sections[target]
            if all(X.act(x, leg) == section for leg, section in zip(cover, family))
        ]

    def sheaf_check(self, X: Presheaf, site: Site) -> bool:
        """True iff every matching family over every covering family has exactly one amalgamation."""
        if X.category != site.category:
            raise PresheafError("presheaf and site live on different categories")
        for obj in site.category.objects:
            for cover in site.covering_families(obj):
                for family in self.matching_sections(X, cover):
                    found = self.amalgamations(X, site, obj, cover, family)
                    if len(found) != 1:
                        logger.debug(
                            "family %r over %r has %d amalgamations", family, list(cover), len(found)
                        )
                        return False
        return True

    # ============== Compatible families ==============

    def eta(self, f: PresheafMorphism, h: TreeHandle) -> CompatibleFamily:
        """η(T) = [{id_C}, T]."""
        _, obj = h.root
        return CompatibleFamily(
            target=obj,
            cover=(f.target.category.identity(obj),),
            trees=(h,),
        )

    def is_matching(self, f: PresheafMorphism, fam: CompatibleFamily) -> bool:
        """True iff T_i and T_j restrict to the same tree on every chosen pullback."""
        cat = f.target.category
        for i, j in itertools.product(range(len(fam.cover)), repeat=2):
            _, p, q = cat.pullback(fam.cover[i], fam.cover[j])
            left = presheaf_service.restrict_tree(f, fam.trees[i], p)
            right = presheaf_service.restrict_tree(f, fam.trees[j], q)
            if left != right:
                logger.debug("legs %r and %r disagree on their pullback", fam.cover[i], fam.cover[j])
                return False
        return True

    def check_family(self, f: PresheafMorphism, site: Site, fam: CompatibleFamily) -> CompatibleFamily:
        """Raise FamilyError unless fam is a matching family of natural trees over a cover."""
        cat = site.category
        self._check_cover(site, fam.target, fam.cover)
        if not site.is_covering(fam.target, fam.cover):
            raise FamilyError(f"{list(fam.cover)} does not cover {fam.target!r}")
        for leg, tree in zip(fam.cover, fam.trees):
            if not presheaf_service.natural_tree(f, tree):
                raise FamilyError(f"tree on leg {leg!r} is not natural")
            if tree.root[1] != cat.dom(leg):
                raise FamilyError(f"tree on leg {leg!r} does not live over {cat.dom(leg)!r}")
        if not self.is_matching(f, fam):
            raise FamilyError("family is not matching")
        return fam

    def matching_families(
        self,
        f: PresheafMorphism,
        site: Site,
        trees: Sequence[TreeHandle],
        target: Hashable,
        cover: Sequence[Hashable],
    ) -> list[CompatibleFamily]:
        """Every matching family over cover whose trees come from the pool."""
        cat = site.category
        self._check_cover(site, target, cover)
        pools = [[t for t in trees if t.root[1] == cat.dom(leg)] for leg in cover]
        families = []
        for chosen in itertools.product(*pools):
            fam = CompatibleFamily(target=target, cover=tuple(cover), trees=tuple(chosen))
            if self.is_matching(f, fam):
                families.append(fam)
        return families

    def plus_restrict(
        self, f: PresheafMorphism, site: Site, fam: CompatibleFamily, beta: Hashable
    ) -> CompatibleFamily:
        """[{c_i}, T_i]·β = [{d_i}, T_i·β_i] along the chosen pullbacks of the c_i and β."""
        cat = site.category
        if beta not in cat.arrows or cat.cod(beta) != fam.target:
            raise FamilyError(f"{beta!r} does not end at {fam.target!r}")
        pulled = site.pull_back(fam.cover, beta)
        return CompatibleFamily(
            target=cat.dom(beta),
            cover=tuple(d for d, _ in pulled),
            trees=tuple(
                presheaf_service.restrict_tree(f, tree, beta_i)
                for tree, (_, beta_i) in zip(fam.trees, pulled)
            ),
        )

    def _refinement_candidates(self, site: Site, first: CompatibleFamily, second: CompatibleFamily) -> list:
        cat = site.category
        meet = []
        for c in first.cover:
            for d in second.cover:
                _, p, _ = cat.pullback(c, d)
                meet.append(cat.compose(c, p))
        candidates = [tuple(cover) for cover in site.covers[first.target]]
        candidates.append(tuple(meet))
        for cover in site.covers[first.target]:
            refined = []
            for k in cover:
                for r in meet:
                    _, p, _ = cat.pullback(k, r)
                    refined.append(cat.compose(k, p))
            candidates.append(tuple(refined))
        return candidates

    def family_equivalent(
        self, f: PresheafMorphism, site: Site, first: CompatibleFamily, second: CompatibleFamily
    ) -> bool:
        """True iff some common refinement of both covers makes the restricted trees agree."""
        if first.target != second.target:
            raise FamilyError("families live over different objects")
        cat = site.category
        for candidate in self._refinement_candidates(site, first, second):
            if not site.is_covering(first.target, candidate):
                continue
            if all(self._agree_on(f, cat, k, first, second) for k in candidate):
                return True
        return False

    def _agree_on(self, f: PresheafMorphism, cat, k: Hashable, first: CompatibleFamily, second: CompatibleFamily) -> bool:
        left = {
            presheaf_service.restrict_tree(f, tree, sigma)
            for c, tree in zip(first.cover, first.trees)
            for sigma in cat.factorizations(k, c)
        }
        right = {
            presheaf_service.restrict_tree(f, tree, tau)
            for c, tree in zip(second.cover, second.trees)
            for tau in cat.factorizations(k, c)
        }
        return bool(left & right)

    # ============== Glueing ==============

    def glue(self, f: PresheafMorphism, site: Site, fam: CompatibleFamily) -> TreeHandle:
        """
        The unique natural tree T over the target with T·c_i = T_i.

        States of the glueing coalgebra are families (D, ((d_i, s_i), ...))
        of states s_i of the merged leg universes. The root of a family is
        the amalgamation of the roots of its trees, and its child at (β, b)
        is the family over dom β of the children t_i(β_i, b·d'_i) along the
        pullbacks of the legs with β.
        """
        A, B = f.target, f.source
        for name, presheaf in (("A", A), ("B", B)):
            if not self.sheaf_check(presheaf, site):
                raise FamilyError(f"presheaf {name} is not a sheaf for the site")
        self.check_family(f, site, fam)
        cat = site.category
        signature = presheaf_service.underlying_map(f)

        states, step = [], {}
        for i, tree in enumerate(fam.trees):
            for x in tree.universe.states:
                element = tree.universe.step[x]
                states.append((i, x))
                step[(i, x)] = PfElement(
                    shape=element.shape,
                    assignment={b: (i, y) for b, y in element.assignment.items()},
                )
        merged = Coalgebra(signature=signature, states=tuple(states), step=step)
        quotient, to_quotient = coalgebra_service.quotient(merged)

        root = (fam.target, tuple(
            (leg, to_quotient[(i, tree.state)]) for i, (leg, tree) in enumerate(zip(fam.cover, fam.trees))
        ))
        family_step = {}
        queue = deque([root])
        seen = {root}
        while queue:
            current = queue.popleft()
            obj, legs = current
            roots = [quotient.shape_of(s)[0] for _, s in legs]
            found = [x for x in A.sections[obj] if all(A.act(x, d) == r for (d, _), r in zip(legs, roots))]
            if len(found) != 1:
                raise FamilyError(f"roots of a family over {obj!r} have {len(found)} amalgamations")
            shape = (found[0], obj)
            assignment = {}
            for beta, b in signature.positions[shape]:
                children = []
                for d, s in legs:
                    _, beta_i, d_prime = cat.pullback(d, beta)
                    child = quotient.step[s].assignment[(beta_i, B.act(b, d_prime))]
                    children.append((d_prime, child))
                successor = (cat.dom(beta), tuple(children))
                assignment[(beta, b)] = successor
                if successor not in seen:
                    seen.add(successor)
                    queue.append(successor)
            family_step[current] = PfElement(shape=shape, assignment=assignment)
        logger.debug("glueing explored %d family states", len(family_step))
        coalgebra = Coalgebra(signature=signature, states=tuple(family_step), step=family_step)
        glued = coalgebra_service.minimize(coalgebra, root)
        if not presheaf_service.natural_tree(f, glued):
            raise FamilyError("glued tree is not natural")
        return glued


# Singleton instance
sheaf_service = SheafService()
