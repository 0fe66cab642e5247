"""
Pydantic schemas for signatures, coalgebras, trees and proto-coalgebras.

Identifiers (shapes, positions, states) are arbitrary hashable values. The
DSL produces strings; derived constructions such as product signatures
produce tuples.
"""

from typing import Hashable, Optional

from pydantic import BaseModel, ConfigDict, model_validator

from mtkernel.exceptions import (
    CoalgebraError,
    IndexedError,
    PathError,
    ProtoCoalgebraError,
    SignatureError,
    TreeError,
)


def _first_duplicate(items) -> Optional[Hashable]:
    seen = set()
    for item in items:
        if item in seen:
            return item
        seen.add(item)
    return None


# ============== Signature Schemas ==============

class Signature(BaseModel):
    """
    A polynomial signature, i.e. a map f: B -> A presented as a container.

    `shapes` is A in declared order, `positions[a]` is the fibre B_a, and
    `point` optionally designates a nullary shape as the constant ⊥.
    """
    model_config = ConfigDict(frozen=True)

    shapes: tuple[Hashable, ...]
    positions: dict[Hashable, tuple[Hashable, ...]]
    point: Optional[Hashable] = None

    @model_validator(mode="after")
    def _check_invariants(self) -> "Signature":
        self.check()
        return self

    def check(self) -> None:
        """Raise SignatureError unless every Signature invariant holds."""
        duplicate = _first_duplicate(self.shapes)
        if duplicate is not None:
            raise SignatureError(f"duplicate shape {duplicate!r}")
        declared = set(self.shapes)
        stray = [a for a in self.positions if a not in declared]
        if stray:
            raise SignatureError(f"positions given for undeclared shape {stray[0]!r}")
        for shape in self.shapes:
            if shape not in self.positions:
                raise SignatureError(f"shape {shape!r} has no position list")
            duplicate = _first_duplicate(self.positions[shape])
            if duplicate is not None:
                raise SignatureError(f"duplicate position {duplicate!r} in shape {shape!r}")
        if self.point is not None:
            if self.point not in declared:
                raise SignatureError(f"point {self.point!r} is not a shape")
            if self.positions[self.point]:
                raise SignatureError(f"point {self.point!r} has a nonempty fibre")

    def has_shape(self, shape: Hashable) -> bool:
        return shape in self.positions

    def positions_of(self, shape: Hashable) -> tuple[Hashable, ...]:
        try:
            return self.positions[shape]
        except KeyError:
            raise SignatureError(f"unknown shape {shape!r}") from None

    def arity(self, shape: Hashable) -> int:
        return len(self.positions_of(shape))

    def __hash__(self) -> int:
        return hash((self.shapes, self.point))


class PfElement(BaseModel):
    """An element (a, t) of P_f(X): a shape and an assignment B_a -> X."""
    model_config = ConfigDict(frozen=True)

    shape: Hashable
    assignment: dict[Hashable, Hashable] = {}

    def child(self, position: Hashable) -> Hashable:
        return self.assignment[position]

    def __hash__(self) -> int:
        return hash((self.shape, frozenset(self.assignment.items())))


class SignatureMorphism(BaseModel):
    """
    A pullback square between signatures, stored fibrewise: a shape map
    A' -> A and, for every source shape, a bijection of its positions onto
    the positions of its image.
    """
    model_config = ConfigDict(frozen=True)

    source: Signature
    target: Signature
    shape_map: dict[Hashable, Hashable]
    position_bijections: dict[Hashable, dict[Hashable, Hashable]]

    @model_validator(mode="after")
    def _check_squares(self) -> "SignatureMorphism":
        for shape in self.source.shapes:
            if shape not in self.shape_map:
                raise SignatureError(f"shape map undefined on {shape!r}")
            image = self.shape_map[shape]
            if not self.target.has_shape(image):
                raise SignatureError(f"shape {shape!r} maps to unknown shape {image!r}")
            bijection = self.position_bijections.get(shape)
            if bijection is None:
                raise SignatureError(f"no position bijection for shape {shape!r}")
            if set(bijection) != set(self.source.positions[shape]):
                raise SignatureError(f"position bijection for {shape!r} is not total")
            targets = list(bijection.values())
            if len(set(targets)) != len(targets) or set(targets) != set(self.target.positions[image]):
                raise SignatureError(
                    f"positions of {shape!r} are not in bijection with positions of {image!r}"
                )
        return self

    def __hash__(self) -> int:
        return hash((self.source, self.target, frozenset(self.shape_map.items())))


# ============== Coalgebra Schemas ==============

class Coalgebra(BaseModel):
    """A finite P_f-coalgebra γ: X -> P_f(X)."""
    model_config = ConfigDict(frozen=True)

    signature: Signature
    states: tuple[Hashable, ...]
    step: dict[Hashable, PfElement]

    @model_validator(mode="after")
    def _check_step(self) -> "Coalgebra":
        duplicate = _first_duplicate(self.states)
        if duplicate is not None:
            raise CoalgebraError(f"duplicate state {duplicate!r}")
        known = set(self.states)
        for state in self.states:
            if state not in self.step:
                raise CoalgebraError(f"step undefined on state {state!r}")
        if len(self.step) != len(known):
            stray = next(x for x in self.step if x not in known)
            raise CoalgebraError(f"step defined on undeclared state {stray!r}")
        for state, element in self.step.items():
            if not self.signature.has_shape(element.shape):
                raise CoalgebraError(f"state {state!r} has unknown shape {element.shape!r}")
            expected = self.signature.positions[element.shape]
            if set(element.assignment) != set(expected):
                raise CoalgebraError(
                    f"state {state!r}: positions {sorted(map(str, element.assignment))} "
                    f"do not match shape {element.shape!r}"
                )
            for value in element.assignment.values():
                if value not in known:
                    raise CoalgebraError(f"state {state!r} points to unknown state {value!r}")
        return self

    def shape_of(self, state: Hashable) -> Hashable:
        return self.step[state].shape

    def successors(self, state: Hashable) -> tuple[Hashable, ...]:
        """Children of a state in declared position order."""
        element = self.step[state]
        return tuple(element.assignment[b] for b in self.signature.positions[element.shape])

    def __hash__(self) -> int:
        return hash((self.signature, self.states))


class TreeHandle(BaseModel):
    """A rational tree: a state of a minimized coalgebra."""
    model_config = ConfigDict(frozen=True)

    universe: Coalgebra
    state: Hashable

    @model_validator(mode="after")
    def _check_state(self) -> "TreeHandle":
        if self.state not in self.universe.step:
            raise TreeError(f"state {self.state!r} is not in the universe")
        return self

    @model_validator(mode="after")
    def _check_canonical(self) -> "TreeHandle":
        # Handle equality is tree equality only on the canonical quotient.
        from mtkernel.services.coalgebra_service import coalgebra_service

        canonical, _ = coalgebra_service.canonical_quotient(self.universe, [self.state])
        if self.state != 0 or canonical != self.universe:
            raise TreeError("universe is not the minimized coalgebra of its state")
        return self

    @property
    def signature(self) -> Signature:
        return self.universe.signature

    @property
    def root(self) -> Hashable:
        return self.universe.shape_of(self.state)

    def __hash__(self) -> int:
        return hash((self.universe, self.state))


class Path(BaseModel):
    """An alternating sequence <x0, b0, x1, ..., xn> of states and positions."""
    model_config = ConfigDict(frozen=True)

    entries: tuple[Hashable, ...]

    @model_validator(mode="after")
    def _check_length(self) -> "Path":
        if len(self.entries) % 2 == 0:
            raise PathError("a path has odd length")
        return self

    @property
    def states(self) -> tuple[Hashable, ...]:
        return self.entries[0::2]

    @property
    def positions(self) -> tuple[Hashable, ...]:
        return self.entries[1::2]

    def __len__(self) -> int:
        return len(self.entries) // 2


# ============== Tree Schemas ==============

class FiniteTree(BaseModel):
    """
    A depth-bounded tree: either the cut marker ⊥ (no shape) or a node with
    a shape and one child per position.
    """
    model_config = ConfigDict(frozen=True)

    shape: Optional[Hashable] = None
    children: dict[Hashable, "FiniteTree"] = {}

    @model_validator(mode="after")
    def _check_cut(self) -> "FiniteTree":
        if self.shape is None and self.children:
            raise TreeError("the cut marker has no children")
        return self

    @classmethod
    def cut(cls) -> "FiniteTree":
        return cls()

    @classmethod
    def node(cls, shape: Hashable, children: Optional[dict] = None) -> "FiniteTree":
        return cls(shape=shape, children=children or {})

    @property
    def is_cut(self) -> bool:
        return self.shape is None

    def depth(self) -> int:
        if self.is_cut:
            return 0
        return 1 + max((child.depth() for child in self.children.values()), default=0)

    def __hash__(self) -> int:
        return hash((self.shape, frozenset(self.children.items())))


FiniteTree.model_rebuild()


class PathSequence(BaseModel):
    """An alternating sequence <a0, b0, a1, ..., an> of shapes and positions."""
    model_config = ConfigDict(frozen=True)

    entries: tuple[Hashable, ...]

    @model_validator(mode="after")
    def _check_length(self) -> "PathSequence":
        if len(self.entries) % 2 == 0:
            raise PathError("a path sequence has odd length")
        return self

    @property
    def shapes(self) -> tuple[Hashable, ...]:
        return self.entries[0::2]

    @property
    def positions(self) -> tuple[Hashable, ...]:
        return self.entries[1::2]

    def __len__(self) -> int:
        return len(self.entries) // 2 + 1


# ============== Proto-coalgebra Schemas ==============

class ProtoCoalgebra(BaseModel):
    """A pair X -γ-> Y <-m- P_f(X) with m injective."""
    model_config = ConfigDict(frozen=True)

    signature: Signature
    carrier: tuple[Hashable, ...]
    ambient: tuple[Hashable, ...]
    gamma: dict[Hashable, Hashable]
    m: dict[PfElement, Hashable]

    @model_validator(mode="after")
    def _check_maps(self) -> "ProtoCoalgebra":
        for name, items in (("carrier", self.carrier), ("ambient", self.ambient)):
            duplicate = _first_duplicate(items)
            if duplicate is not None:
                raise ProtoCoalgebraError(f"duplicate {name} element {duplicate!r}")
        carrier, ambient = set(self.carrier), set(self.ambient)
        if set(self.gamma) != carrier:
            raise ProtoCoalgebraError("gamma must be total on the carrier")
        for x, y in self.gamma.items():
            if y not in ambient:
                raise ProtoCoalgebraError(f"gamma({x!r}) = {y!r} is outside the ambient set")
        for element, y in self.m.items():
            if not self.signature.has_shape(element.shape):
                raise ProtoCoalgebraError(f"m is defined on unknown shape {element.shape!r}")
            if set(element.assignment) != set(self.signature.positions[element.shape]):
                raise ProtoCoalgebraError(f"m is defined on a malformed element of shape {element.shape!r}")
            if not set(element.assignment.values()) <= carrier:
                raise ProtoCoalgebraError("m is defined on an element outside P_f(carrier)")
            if y not in ambient:
                raise ProtoCoalgebraError(f"m sends an element to {y!r}, outside the ambient set")
        expected = sum(len(carrier) ** len(self.signature.positions[a]) for a in self.signature.shapes)
        if len(self.m) != expected:
            raise ProtoCoalgebraError(
                f"m must be total on P_f(carrier): {len(self.m)} of {expected} elements given"
            )
        if len(set(self.m.values())) != len(self.m):
            raise ProtoCoalgebraError("m is not injective")
        return self

    def m_inverse(self) -> dict[Hashable, PfElement]:
        return {y: element for element, y in self.m.items()}

    def __hash__(self) -> int:
        return hash((self.signature, self.carrier, self.ambient))


class CohResult(BaseModel):
    """The coreflection Coh(γ): coherent elements with their coalgebra."""
    model_config = ConfigDict(frozen=True)

    coherent: tuple[Hashable, ...]
    coalgebra: Coalgebra
    inclusion: dict[Hashable, Hashable]


class FixedPoint(BaseModel):
    """A coalgebra whose step is invertible, with the inverse sup."""
    model_config = ConfigDict(frozen=True)

    coh: CohResult
    sup: dict[PfElement, Hashable]


# ============== Indexed Schemas ==============

class IndexedSignature(BaseModel):
    """A signature living over an index set I through α: A -> I."""
    model_config = ConfigDict(frozen=True)

    base: Signature
    index: tuple[Hashable, ...]
    fibre_of: dict[Hashable, Hashable]

    @model_validator(mode="after")
    def _check_fibres(self) -> "IndexedSignature":
        duplicate = _first_duplicate(self.index)
        if duplicate is not None:
            raise IndexedError(f"duplicate index {duplicate!r}")
        index = set(self.index)
        for shape in self.base.shapes:
            if shape not in self.fibre_of:
                raise IndexedError(f"no fibre given for shape {shape!r}")
            if self.fibre_of[shape] not in index:
                raise IndexedError(f"shape {shape!r} lies over unknown index {self.fibre_of[shape]!r}")
        if len(self.fibre_of) != len(self.base.shapes):
            raise IndexedError("fibre given for an undeclared shape")
        return self

    def __hash__(self) -> int:
        return hash((self.base, self.index))
