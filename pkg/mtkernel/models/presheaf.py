"""
Pydantic schemas for finite categories, presheaves and sites.

Use the `build` constructors: they add identity arrows, identity composites,
canonical pullbacks of cospans with an identity leg and the mirror image of
every declared pullback, then validate the result.
"""

import itertools
from typing import Hashable, Iterable, Optional

from pydantic import BaseModel, ConfigDict, model_validator

from mtkernel.exceptions import CategoryError, FamilyError, PresheafError, SiteError
from mtkernel.models.schemas import TreeHandle

Arrow = Hashable
PullbackSquare = tuple[Hashable, Hashable, Hashable]


# ============== Category Schemas ==============

class FiniteCategory(BaseModel):
    """A finite category with a chosen pullback for every cospan."""
    model_config = ConfigDict(frozen=True)

    objects: tuple[Hashable, ...]
    arrows: dict[Hashable, tuple[Hashable, Hashable]]
    identities: dict[Hashable, Hashable]
    composition: dict[tuple[Hashable, Hashable], Hashable]
    pullbacks: dict[tuple[Hashable, Hashable], tuple[Hashable, Hashable, Hashable]]

    @classmethod
    def build(
        cls,
        objects: Iterable[Hashable],
        arrows: Optional[dict] = None,
        composition: Optional[dict] = None,
        pullbacks: Optional[dict] = None,
    ) -> "FiniteCategory":
        """
        Complete a presentation and validate it.

        Args:
            objects: the objects, in order
            arrows: name -> (dom, cod) for the non-identity arrows
            composition: (g, f) -> g∘f for composable non-identity pairs
            pullbacks: (f, g) -> (P, p, q) with f∘p = g∘q
        """
        objects = tuple(objects)
        identities = {c: f"id_{c}" for c in objects}
        all_arrows = {identities[c]: (c, c) for c in objects}
        for name, (dom, cod) in (arrows or {}).items():
            if name in all_arrows:
                raise CategoryError(f"arrow name {name!r} is reserved for an identity")
            all_arrows[name] = (dom, cod)
        table = dict(composition or {})
        for name, (dom, cod) in all_arrows.items():
            if cod in identities and dom in identities:
                table.setdefault((identities[cod], name), name)
                table.setdefault((name, identities[dom]), name)
        chosen = {}
        for (f, g), square in (pullbacks or {}).items():
            chosen[(f, g)] = tuple(square)
        for (f, g), (apex, p, q) in list(chosen.items()):
            chosen.setdefault((g, f), (apex, q, p))
        for f, (dom_f, cod_f) in all_arrows.items():
            if dom_f not in identities or cod_f not in identities:
                continue
            identity = identities[cod_f]
            chosen.setdefault((f, identity), (dom_f, identities[dom_f], f))
            chosen.setdefault((identity, f), (dom_f, f, identities[dom_f]))
        return cls(
            objects=objects,
            arrows=all_arrows,
            identities=identities,
            composition=table,
            pullbacks=chosen,
        )

    @model_validator(mode="after")
    def _check_laws(self) -> "FiniteCategory":
        objects = set(self.objects)
        if len(objects) != len(self.objects):
            raise CategoryError("duplicate object")
        for name, (dom, cod) in self.arrows.items():
            if dom not in objects or cod not in objects:
                raise CategoryError(f"arrow {name!r} has an unknown endpoint")
        for c in self.objects:
            identity = self.identities.get(c)
            if identity is None or self.arrows.get(identity) != (c, c):
                raise CategoryError(f"object {c!r} has no identity arrow")
        for g, f in itertools.product(self.arrows, repeat=2):
            if self.cod(f) != self.dom(g):
                if (g, f) in self.composition:
                    raise CategoryError(f"composite of non-composable {g!r} and {f!r}")
                continue
            composite = self.composition.get((g, f))
            if composite is None:
                raise CategoryError(f"composite {g!r}∘{f!r} is not given")
            if self.arrows.get(composite) != (self.dom(f), self.cod(g)):
                raise CategoryError(f"composite {g!r}∘{f!r} = {composite!r} has the wrong type")
        for f in self.arrows:
            if self.compose(self.identity(self.cod(f)), f) != f or self.compose(f, self.identity(self.dom(f))) != f:
                raise CategoryError(f"identity law fails at {f!r}")
        for h, g, f in itertools.product(self.arrows, repeat=3):
            if self.cod(f) == self.dom(g) and self.cod(g) == self.dom(h):
                if self.compose(self.compose(h, g), f) != self.compose(h, self.compose(g, f)):
                    raise CategoryError(f"associativity fails at {h!r}, {g!r}, {f!r}")
        for f, g in itertools.product(self.arrows, repeat=2):
            if self.cod(f) == self.cod(g):
                self._check_pullback(f, g)
        return self

    def _check_pullback(self, f: Arrow, g: Arrow) -> None:
        square = self.pullbacks.get((f, g))
        if square is None:
            raise CategoryError(f"no pullback chosen for the cospan {f!r}, {g!r}")
        apex, p, q = square
        if self.arrows.get(p) != (apex, self.dom(f)) or self.arrows.get(q) != (apex, self.dom(g)):
            raise CategoryError(f"pullback of {f!r}, {g!r} has ill-typed projections")
        if self.compose(f, p) != self.compose(g, q):
            raise CategoryError(f"pullback square of {f!r}, {g!r} does not commute")
        for w in self.objects:
            for u in self.hom(w, self.dom(f)):
                for v in self.hom(w, self.dom(g)):
                    if self.compose(f, u) != self.compose(g, v):
                        continue
                    mediating = [
                        k for k in self.hom(w, apex)
                        if self.compose(p, k) == u and self.compose(q, k) == v
                    ]
                    if len(mediating) != 1:
                        raise CategoryError(
                            f"pullback of {f!r}, {g!r} is not universal for the cone ({u!r}, {v!r})"
                        )

    def dom(self, arrow: Arrow) -> Hashable:
        return self.arrows[arrow][0]

    def cod(self, arrow: Arrow) -> Hashable:
        return self.arrows[arrow][1]

    def identity(self, obj: Hashable) -> Arrow:
        return self.identities[obj]

    def is_identity(self, arrow: Arrow) -> bool:
        return self.identities.get(self.dom(arrow)) == arrow

    def compose(self, g: Arrow, f: Arrow) -> Arrow:
        """g∘f."""
        try:
            return self.composition[(g, f)]
        except KeyError:
            raise CategoryError(f"{g!r} and {f!r} are not composable") from None

    def hom(self, source: Hashable, target: Hashable) -> tuple[Arrow, ...]:
        return tuple(a for a, ends in self.arrows.items() if ends == (source, target))

    def arrows_into(self, target: Hashable) -> tuple[Arrow, ...]:
        return tuple(a for a, (_, cod) in self.arrows.items() if cod == target)

    def pullback(self, f: Arrow, g: Arrow) -> PullbackSquare:
        """The chosen (P, p, q) with f∘p = g∘q."""
        try:
            return self.pullbacks[(f, g)]
        except KeyError:
            raise CategoryError(f"{f!r} and {g!r} do not form a cospan") from None

    def factorizations(self, k: Arrow, c: Arrow) -> tuple[Arrow, ...]:
        """All σ with c∘σ = k."""
        if self.cod(k) != self.cod(c):
            return ()
        return tuple(s for s in self.hom(self.dom(k), self.dom(c)) if self.compose(c, s) == k)

    def __hash__(self) -> int:
        return hash((self.objects, tuple(self.arrows)))


# ============== Presheaf Schemas ==============

class Presheaf(BaseModel):
    """A finite presheaf: sections per object, restriction x ↦ x·β per arrow."""
    model_config = ConfigDict(frozen=True)

    category: FiniteCategory
    sections: dict[Hashable, tuple[Hashable, ...]]
    restrict: dict[Hashable, dict[Hashable, Hashable]]

    @classmethod
    def build(cls, category: FiniteCategory, sections: dict, restrict: Optional[dict] = None) -> "Presheaf":
        """Add identity restrictions and validate."""
        stray = set(sections) - set(category.objects)
        if stray:
            raise PresheafError(f"sections given for unknown object {next(iter(stray))!r}")
        table = {arrow: dict(mapping) for arrow, mapping in (restrict or {}).items()}
        for obj in category.objects:
            table.setdefault(category.identity(obj), {x: x for x in sections.get(obj, ())})
        for arrow, (_, cod) in category.arrows.items():
            if not sections.get(cod):
                table.setdefault(arrow, {})
        return cls(
            category=category,
            sections={obj: tuple(sections.get(obj, ())) for obj in category.objects},
            restrict=table,
        )

    @model_validator(mode="after")
    def _check_functoriality(self) -> "Presheaf":
        cat = self.category
        if set(self.sections) != set(cat.objects):
            raise PresheafError("sections must be given for exactly the objects")
        for obj, items in self.sections.items():
            if len(set(items)) != len(items):
                raise PresheafError(f"duplicate section at {obj!r}")
        for arrow in cat.arrows:
            mapping = self.restrict.get(arrow)
            if mapping is None:
                raise PresheafError(f"no restriction along {arrow!r}")
            source = self.sections[cat.cod(arrow)]
            target = set(self.sections[cat.dom(arrow)])
            if set(mapping) != set(source):
                raise PresheafError(f"restriction along {arrow!r} is not total")
            for x, y in mapping.items():
                if y not in target:
                    raise PresheafError(f"{x!r}·{arrow!r} = {y!r} is not a section")
        if set(self.restrict) != set(cat.arrows):
            raise PresheafError("restriction given along an unknown arrow")
        for obj in cat.objects:
            identity = self.restrict[cat.identity(obj)]
            if any(identity[x] != x for x in self.sections[obj]):
                raise PresheafError(f"restriction along the identity of {obj!r} is not the identity")
        for g, f in cat.composition:
            composite = self.restrict[cat.compose(g, f)]
            for x in self.sections[cat.cod(g)]:
                if composite[x] != self.restrict[f][self.restrict[g][x]]:
                    raise PresheafError(f"restriction along {g!r}∘{f!r} is not functorial")
        return self

    def act(self, x: Hashable, arrow: Arrow) -> Hashable:
        """x·β."""
        return self.restrict[arrow][x]

    def __hash__(self) -> int:
        return hash((self.category, tuple(len(v) for v in self.sections.values())))


class PresheafMorphism(BaseModel):
    """A natural transformation between presheaves on one category."""
    model_config = ConfigDict(frozen=True)

    source: Presheaf
    target: Presheaf
    components: dict[Hashable, dict[Hashable, Hashable]]

    @model_validator(mode="after")
    def _check_naturality(self) -> "PresheafMorphism":
        cat = self.source.category
        if self.target.category != cat:
            raise PresheafError("presheaves live on different categories")
        for obj in cat.objects:
            component = self.components.get(obj)
            if component is None or set(component) != set(self.source.sections[obj]):
                raise PresheafError(f"component at {obj!r} is not total")
            targets = set(self.target.sections[obj])
            if any(y not in targets for y in component.values()):
                raise PresheafError(f"component at {obj!r} leaves the target")
        for arrow in cat.arrows:
            dom, cod = cat.arrows[arrow]
            for x in self.source.sections[cod]:
                if self.components[dom][self.source.act(x, arrow)] != self.target.act(self.components[cod][x], arrow):
                    raise PresheafError(f"naturality fails along {arrow!r} at {x!r}")
        return self

    def apply(self, obj: Hashable, x: Hashable) -> Hashable:
        return self.components[obj][x]

    def __hash__(self) -> int:
        return hash((self.source, self.target))


# ============== Site Schemas ==============

class Site(BaseModel):
    """
    Covering families on a finite category. A family of arrows into C is
    covering when every leg of some declared cover of C factors through one
    of its members.
    """
    model_config = ConfigDict(frozen=True)

    category: FiniteCategory
    covers: dict[Hashable, tuple[tuple[Hashable, ...], ...]]

    @classmethod
    def build(cls, category: FiniteCategory, covers: Optional[dict] = None) -> "Site":
        """Add the identity cover of every object and validate."""
        table = {}
        for obj in category.objects:
            declared = [tuple(cover) for cover in (covers or {}).get(obj, ())]
            identity = (category.identity(obj),)
            if identity not in declared:
                declared.insert(0, identity)
            table[obj] = tuple(declared)
        stray = set(covers or {}) - set(category.objects)
        if stray:
            raise SiteError(f"cover given for unknown object {next(iter(stray))!r}")
        return cls(category=category, covers=table)

    @model_validator(mode="after")
    def _check_axioms(self) -> "Site":
        cat = self.category
        for obj in cat.objects:
            covers = self.covers.get(obj)
            if covers is None or (cat.identity(obj),) not in covers:
                raise SiteError(f"identity does not cover {obj!r}")
            for cover in covers:
                for leg in cover:
                    if leg not in cat.arrows or cat.cod(leg) != obj:
                        raise SiteError(f"leg {leg!r} of a cover of {obj!r} does not end at {obj!r}")
        for obj in cat.objects:
            for cover in self.covers[obj]:
                for beta in cat.arrows_into(obj):
                    pulled = tuple(leg for leg, _ in self.pull_back(cover, beta))
                    if not self.is_covering(cat.dom(beta), pulled):
                        raise SiteError(f"cover {list(cover)} of {obj!r} is not stable along {beta!r}")
                choices = [self.covers[cat.dom(leg)] for leg in cover]
                for chosen in itertools.product(*choices):
                    composite = tuple(
                        cat.compose(leg, k) for leg, refinement in zip(cover, chosen) for k in refinement
                    )
                    if not self.is_covering(obj, composite):
                        raise SiteError(f"cover {list(cover)} of {obj!r} is not transitive")
        return self

    def is_covering(self, obj: Hashable, family: Iterable[Arrow]) -> bool:
        family = tuple(family)
        cat = self.category
        return any(
            all(any(cat.factorizations(k, c) for c in family) for k in cover)
            for cover in self.covers[obj]
        )

    def covering_families(self, obj: Hashable) -> list[tuple[Arrow, ...]]:
        """Every set of arrows into obj that covers it, declared covers included."""
        arrows = self.category.arrows_into(obj)
        return [
            family
            for size in range(len(arrows) + 1)
            for family in itertools.combinations(arrows, size)
            if self.is_covering(obj, family)
        ]

    def pull_back(self, cover: Iterable[Arrow], beta: Arrow) -> list[tuple[Arrow, Arrow]]:
        """
        For each leg c_i, the chosen pullback of c_i along β as the pair
        (d_i, β_i): d_i into dom β and β_i into dom c_i.
        """
        pulled = []
        for leg in cover:
            _, to_leg, to_domain = self.category.pullback(leg, beta)
            pulled.append((to_domain, to_leg))
        return pulled

    def __hash__(self) -> int:
        return hash((self.category, tuple(len(v) for v in self.covers.values())))


class CompatibleFamily(BaseModel):
    """A family [{c_i}, T_i] of trees over the legs of a cover of `target`."""
    model_config = ConfigDict(frozen=True)

    target: Hashable
    cover: tuple[Hashable, ...]
    trees: tuple[TreeHandle, ...]

    @model_validator(mode="after")
    def _check_legs(self) -> "CompatibleFamily":
        if len(self.cover) != len(self.trees):
            raise FamilyError("one tree is needed per leg of the cover")
        return self

    def __hash__(self) -> int:
        return hash((self.target, self.cover, self.trees))
