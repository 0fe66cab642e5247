"""Shared fixtures: the running example signatures, coalgebras and documents."""

import pytest
from hypothesis import settings as hypothesis_settings

from mtkernel.config import settings
from mtkernel.models.document import Document
from mtkernel.models.presheaf import FiniteCategory, Presheaf, PresheafMorphism, Site
from mtkernel.models.schemas import Coalgebra, PfElement, ProtoCoalgebra, Signature
from mtkernel.services.dsl_service import dsl_service

hypothesis_settings.register_profile("mtkernel", deadline=None, print_blob=True)
hypothesis_settings.load_profile("mtkernel")


def element(shape, **assignment) -> PfElement:
    return PfElement(shape=shape, assignment=assignment)


@pytest.fixture
def sig1() -> Signature:
    return Signature(shapes=("leaf", "node"), positions={"leaf": (), "node": ("L", "R")})


@pytest.fixture
def sig2() -> Signature:
    return Signature(shapes=("out0", "out1"), positions={"out0": ("tl",), "out1": ("tl",)})


@pytest.fixture
def c1(sig1) -> Coalgebra:
    return Coalgebra(signature=sig1, states=("s",), step={"s": element("node", L="s", R="s")})


@pytest.fixture
def c2(sig1) -> Coalgebra:
    return Coalgebra(
        signature=sig1,
        states=("u", "v"),
        step={"u": element("node", L="v", R="u"), "v": element("node", L="u", R="v")},
    )


@pytest.fixture
def spine(sig1) -> Coalgebra:
    """t = node(leaf, t)."""
    return Coalgebra(
        signature=sig1,
        states=("t", "l"),
        step={"t": element("node", L="l", R="t"), "l": element("leaf")},
    )


@pytest.fixture
def chain(sig1) -> Coalgebra:
    """A 3-state chain ending in a leaf, no two states bisimilar."""
    return Coalgebra(
        signature=sig1,
        states=("a", "b", "c"),
        step={
            "a": element("node", L="b", R="c"),
            "b": element("node", L="c", R="c"),
            "c": element("leaf"),
        },
    )


@pytest.fixture
def streams(sig2) -> Coalgebra:
    return Coalgebra(
        signature=sig2,
        states=("zeros", "ones"),
        step={"zeros": element("out0", tl="zeros"), "ones": element("out1", tl="ones")},
    )


@pytest.fixture
def unary() -> Signature:
    return Signature(shapes=("a",), positions={"a": ("p",)})


@pytest.fixture
def dangling(unary) -> ProtoCoalgebra:
    """X = {x, d}, Y = {x, d, star}; d is not branching."""
    return ProtoCoalgebra(
        signature=unary,
        carrier=("x", "d"),
        ambient=("x", "d", "star"),
        gamma={"x": "x", "d": "d"},
        m={element("a", p="x"): "x", element("a", p="d"): "star"},
    )


@pytest.fixture
def point_category() -> FiniteCategory:
    return FiniteCategory.build(["*"])


@pytest.fixture
def point_site(point_category) -> Site:
    return Site.build(point_category)


@pytest.fixture
def interval() -> FiniteCategory:
    """D -u-> C."""
    return FiniteCategory.build(
        ["C", "D"],
        {"u": ("D", "C")},
        pullbacks={("u", "u"): ("D", "id_D", "id_D")},
    )


def constant_presheaf(cat: FiniteCategory, items) -> Presheaf:
    items = tuple(items)
    return Presheaf.build(
        cat,
        {c: items for c in cat.objects},
        {arrow: {x: x for x in items} for arrow in cat.arrows},
    )


def constant_morphism(source: Presheaf, target: Presheaf, mapping) -> PresheafMorphism:
    return PresheafMorphism(
        source=source,
        target=target,
        components={c: dict(mapping) for c in source.category.objects},
    )


def load(name: str) -> Document:
    return dsl_service.parse((settings.DATA_DIR / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def trees_doc() -> Document:
    return load("trees.mt")


@pytest.fixture(scope="session")
def protos_doc() -> Document:
    return load("protos.mt")


@pytest.fixture(scope="session")
def sheaves_doc() -> Document:
    return load("sheaves.mt")
