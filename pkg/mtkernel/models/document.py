"""
Parsed DSL documents.
"""

from typing import Hashable

from pydantic import BaseModel, ConfigDict

from mtkernel.models.presheaf import (
    CompatibleFamily,
    FiniteCategory,
    Presheaf,
    PresheafMorphism,
    Site,
)
from mtkernel.models.schemas import (
    Coalgebra,
    IndexedSignature,
    PfElement,
    ProtoCoalgebra,
    Signature,
)


# ============== Declaration Schemas ==============

class IndexMap(BaseModel):
    """A function x: J -> I for reindexing an indexed signature."""
    model_config = ConfigDict(frozen=True)

    indexed: str
    domain: tuple[Hashable, ...]
    mapping: dict[Hashable, Hashable]


class PresheafCoalgebra(BaseModel):
    """
    A natural γ: X -> P_f(X) on a finite presheaf, with the underlying
    f'-coalgebra on states (x, C).
    """
    model_config = ConfigDict(frozen=True)

    morphism: str
    carrier: str
    gamma: dict[Hashable, dict[Hashable, PfElement]]
    coalgebra: Coalgebra


class FamilyDeclaration(BaseModel):
    """A compatible family whose legs are states of a presheaf coalgebra."""
    model_config = ConfigDict(frozen=True)

    site: str
    morphism: str
    target: Hashable
    legs: tuple[tuple[Hashable, str, Hashable], ...]
    family: CompatibleFamily


# ============== Document Schema ==============

class Document(BaseModel):
    """Every declaration of a document, by kind, in declaration order."""
    model_config = ConfigDict(frozen=True)

    signatures: dict[str, Signature] = {}
    coalgebras: dict[str, Coalgebra] = {}
    protos: dict[str, ProtoCoalgebra] = {}
    indexed: dict[str, IndexedSignature] = {}
    maps: dict[str, IndexMap] = {}
    categories: dict[str, FiniteCategory] = {}
    presheaves: dict[str, Presheaf] = {}
    morphisms: dict[str, PresheafMorphism] = {}
    sites: dict[str, Site] = {}
    pcoalgebras: dict[str, PresheafCoalgebra] = {}
    families: dict[str, FamilyDeclaration] = {}

    def summary(self) -> str:
        counts = [
            (kind, len(getattr(self, kind)))
            for kind in type(self).model_fields
        ]
        return ", ".join(f"{count} {kind}" for kind, count in counts if count)
