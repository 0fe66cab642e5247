import pytest

from mtkernel.exceptions import FamilyError, SiteError
from mtkernel.models.presheaf import CompatibleFamily, FiniteCategory, Presheaf, PresheafMorphism, Site
from mtkernel.models.schemas import Coalgebra, PfElement
from mtkernel.services.coalgebra_service import coalgebra_service
from mtkernel.services.presheaf_service import presheaf_service
from mtkernel.services.sheaf_service import sheaf_service
from tests.conftest import constant_morphism, constant_presheaf


@pytest.fixture
def square(sheaves_doc) -> FiniteCategory:
    return sheaves_doc.categories["SQ"]


@pytest.fixture
def overlap(sheaves_doc) -> Site:
    return sheaves_doc.sites["OVERLAP"]


@pytest.fixture
def disjoint(sheaves_doc) -> Site:
    return sheaves_doc.sites["DISJOINT"]


@pytest.fixture
def spine_f(sheaves_doc) -> PresheafMorphism:
    return sheaves_doc.morphisms["f"]


@pytest.fixture
def spine_coalgebra(sheaves_doc) -> Coalgebra:
    return sheaves_doc.pcoalgebras["SPINE"].coalgebra


def tree(coalgebra: Coalgebra, x: str, obj: str):
    return coalgebra_service.minimize(coalgebra, (x, obj))


@pytest.fixture
def pairs(square) -> PresheafMorphism:
    """
    A sheaf for the disjoint site: sections over U are pairs of sections
    over V1 and V2, W has a single section. f is its identity.
    """
    P = Presheaf.build(
        square,
        {"U": ("00", "01", "10", "11"), "V1": ("0", "1"), "V2": ("0", "1"), "W": ("*",)},
        {
            "v1": {pq: pq[0] for pq in ("00", "01", "10", "11")},
            "v2": {pq: pq[1] for pq in ("00", "01", "10", "11")},
            "w1": {"0": "*", "1": "*"},
            "w2": {"0": "*", "1": "*"},
            "w": {pq: "*" for pq in ("00", "01", "10", "11")},
        },
    )
    return PresheafMorphism(
        source=P, target=P, components={c: {x: x for x in P.sections[c]} for c in square.objects}
    )


def leg_stream(f: PresheafMorphism, obj: str, leg: str, values: tuple[str, ...]) -> Coalgebra:
    """A tree over V1 or V2 whose roots along the identity cycle through values."""
    states = [f"s{k}" for k in range(len(values))]
    step = {
        "w": PfElement(shape=("*", "W"), assignment={("id_W", "*"): "w"}),
    }
    for k, value in enumerate(values):
        step[states[k]] = PfElement(
            shape=(value, obj),
            assignment={
                (f"id_{obj}", value): states[(k + 1) % len(values)],
                (leg, "*"): "w",
            },
        )
    return Coalgebra(
        signature=presheaf_service.underlying_map(f),
        states=tuple(states) + ("w",),
        step=step,
    )


# ============== Sites and the sheaf condition ==============

def test_site_adds_identity_covers(overlap, square):
    assert overlap.covers["U"][0] == ("id_U",)
    assert overlap.is_covering("U", ("v1", "v2"))
    assert not overlap.is_covering("U", ("v1",))
    assert overlap.is_covering("U", ("id_U", "w"))


def test_non_transitive_cover_is_rejected(interval):
    # u covers C, but D is covered by nothing, so u then covers C by nothing
    with pytest.raises(SiteError, match="transitive"):
        Site.build(interval, {"C": [("u",)], "D": [()]})


def test_unknown_object_in_a_cover(interval):
    with pytest.raises(SiteError, match="unknown object"):
        Site.build(interval, {"X": []})


def test_cover_leg_must_end_at_its_object(square):
    with pytest.raises(SiteError):
        Site.build(square, {"U": [("w1",)]})


def test_covering_families(overlap, disjoint):
    covering = {frozenset(family) for family in overlap.covering_families("U")}
    assert len(covering) == 10
    assert frozenset({"v1", "v2", "w"}) in covering
    assert frozenset({"v1", "w"}) not in covering
    assert overlap.covering_families("W") == [("id_W",)]
    assert disjoint.covering_families("W") == [(), ("id_W",)]


def test_sheaf_check(sheaves_doc, overlap, disjoint, square):
    assert sheaf_service.sheaf_check(sheaves_doc.presheaves["A"], overlap)
    assert not sheaf_service.sheaf_check(sheaves_doc.presheaves["NS"], overlap)
    assert not sheaf_service.sheaf_check(sheaves_doc.presheaves["A"], disjoint)
    assert sheaf_service.sheaf_check(constant_presheaf(square, ["*"]), disjoint)


def test_sheaf_check_covers_every_covering_family(sheaves_doc, overlap, pairs, disjoint):
    NS = sheaves_doc.presheaves["NS"]
    assert sheaf_service.matching_sections(NS, ("v1", "v2", "w"))
    assert not sheaf_service.sheaf_check(NS, overlap)
    assert sheaf_service.sheaf_check(pairs.source, disjoint)
    assert sheaf_service.amalgamations(pairs.source, disjoint, "U", ("v1", "v2", "w"), ("0", "1", "*")) == ["01"]


def test_amalgamations(sheaves_doc, overlap):
    NS = sheaves_doc.presheaves["NS"]
    families = sheaf_service.matching_sections(NS, ("v1", "v2"))
    assert sorted(families) == [("p", "p"), ("q", "p")]
    assert sheaf_service.amalgamations(NS, overlap, "U", ("v1", "v2"), ("p", "p")) == ["p"]
    assert sheaf_service.amalgamations(NS, overlap, "U", ("v1", "v2"), ("q", "p")) == []


def test_sheaf_check_on_the_point(point_site, point_category):
    assert sheaf_service.sheaf_check(constant_presheaf(point_category, ["x", "y"]), point_site)


# ============== Compatible families ==============

def test_eta(spine_f, spine_coalgebra):
    T = tree(spine_coalgebra, "x", "U")
    fam = sheaf_service.eta(spine_f, T)
    assert fam.target == "U"
    assert fam.cover == ("id_U",)
    assert fam.trees == (T,)


def test_declared_family_matches(sheaves_doc, spine_f, overlap):
    fam = sheaves_doc.families["F"].family
    assert sheaf_service.is_matching(spine_f, fam)
    assert sheaf_service.check_family(spine_f, overlap, fam) is fam


def test_non_matching_family_is_rejected(spine_f, spine_coalgebra, overlap):
    fam = CompatibleFamily(
        target="U",
        cover=("v1", "v2"),
        trees=(tree(spine_coalgebra, "x", "V1"), tree(spine_coalgebra, "y", "V2")),
    )
    with pytest.raises(FamilyError, match="not matching"):
        sheaf_service.check_family(spine_f, overlap, fam)
    with pytest.raises(FamilyError):
        sheaf_service.glue(spine_f, overlap, fam)


def test_family_needs_a_cover(spine_f, spine_coalgebra, overlap):
    fam = CompatibleFamily(target="U", cover=("v1",), trees=(tree(spine_coalgebra, "x", "V1"),))
    with pytest.raises(FamilyError, match="cover"):
        sheaf_service.check_family(spine_f, overlap, fam)


def test_family_trees_must_live_over_their_legs(spine_f, spine_coalgebra, overlap):
    fam = CompatibleFamily(
        target="U",
        cover=("v1", "v2"),
        trees=(tree(spine_coalgebra, "x", "V2"), tree(spine_coalgebra, "x", "V1")),
    )
    with pytest.raises(FamilyError, match="live over"):
        sheaf_service.check_family(spine_f, overlap, fam)


def test_matching_families(spine_f, spine_coalgebra, overlap):
    pool = [tree(spine_coalgebra, x, obj) for x in ("x", "y") for obj in ("V1", "V2")]
    families = sheaf_service.matching_families(spine_f, overlap, pool, "U", ("v1", "v2"))
    assert len(families) == 2
    for fam in families:
        glued = sheaf_service.glue(spine_f, overlap, fam)
        for leg, leg_tree in zip(fam.cover, fam.trees):
            assert presheaf_service.restrict_tree(spine_f, glued, leg) == leg_tree
        candidates = [tree(spine_coalgebra, x, "U") for x in ("x", "y")]
        assert [c for c in candidates if c == glued] == [glued]


def test_plus_restrict(sheaves_doc, spine_f, overlap):
    fam = sheaves_doc.families["F"].family
    same = sheaf_service.plus_restrict(spine_f, overlap, fam, "id_U")
    assert sheaf_service.family_equivalent(spine_f, overlap, fam, same)
    on_v1 = sheaf_service.plus_restrict(spine_f, overlap, fam, "v1")
    assert on_v1.target == "V1"
    assert on_v1.cover == ("id_V1", "w1")
    sheaf_service.check_family(spine_f, overlap, on_v1)
    with pytest.raises(FamilyError):
        sheaf_service.plus_restrict(spine_f, overlap, fam, "w1")


def test_plus_restrict_preserves_equivalence(spine_f, spine_coalgebra, overlap):
    T = tree(spine_coalgebra, "x", "U")
    first = sheaf_service.eta(spine_f, T)
    second = CompatibleFamily(
        target="U",
        cover=("v1", "v2"),
        trees=tuple(presheaf_service.restrict_tree(spine_f, T, leg) for leg in ("v1", "v2")),
    )
    for beta in ("id_U", "v1", "v2", "w"):
        assert sheaf_service.family_equivalent(
            spine_f,
            overlap,
            sheaf_service.plus_restrict(spine_f, overlap, first, beta),
            sheaf_service.plus_restrict(spine_f, overlap, second, beta),
        )


def test_family_equivalence(spine_f, spine_coalgebra, overlap):
    T = tree(spine_coalgebra, "x", "U")
    eta = sheaf_service.eta(spine_f, T)
    restricted = CompatibleFamily(
        target="U",
        cover=("v1", "v2"),
        trees=tuple(presheaf_service.restrict_tree(spine_f, T, leg) for leg in ("v1", "v2")),
    )
    assert sheaf_service.family_equivalent(spine_f, overlap, eta, eta)
    assert sheaf_service.family_equivalent(spine_f, overlap, eta, restricted)
    other = sheaf_service.eta(spine_f, tree(spine_coalgebra, "y", "U"))
    assert not sheaf_service.family_equivalent(spine_f, overlap, eta, other)


# ============== Glueing ==============

def test_glue_of_eta_is_the_identity(spine_f, spine_coalgebra, overlap):
    for x in ("x", "y"):
        T = tree(spine_coalgebra, x, "U")
        assert sheaf_service.glue(spine_f, overlap, sheaf_service.eta(spine_f, T)) == T


def test_glue_the_declared_family(sheaves_doc, spine_f, spine_coalgebra, overlap):
    glued = sheaf_service.glue(spine_f, overlap, sheaves_doc.families["F"].family)
    assert glued == tree(spine_coalgebra, "x", "U")


def test_glue_needs_sheaves(sheaves_doc, spine_f, disjoint):
    fam = CompatibleFamily(target="U", cover=("id_U",), trees=(sheaves_doc.families["F"].family.trees[0],))
    with pytest.raises(FamilyError, match="not a sheaf"):
        sheaf_service.glue(spine_f, disjoint, fam)


def test_glue_over_a_disjoint_cover(pairs, disjoint):
    first = coalgebra_service.minimize(leg_stream(pairs, "V1", "w1", ("0", "1")), "s0")
    second = coalgebra_service.minimize(leg_stream(pairs, "V2", "w2", ("1",)), "s0")
    assert presheaf_service.natural_tree(pairs, first)
    fam = CompatibleFamily(target="U", cover=("v1", "v2"), trees=(first, second))
    glued = sheaf_service.glue(pairs, disjoint, fam)
    assert glued.root == ("01", "U")
    assert presheaf_service.restrict_tree(pairs, glued, "v1") == first
    assert presheaf_service.restrict_tree(pairs, glued, "v2") == second
    assert sheaf_service.glue(pairs, disjoint, sheaf_service.eta(pairs, glued)) == glued


def test_glue_degenerates_on_the_point(point_site, point_category):
    X = constant_presheaf(point_category, ["x", "y"])
    f = constant_morphism(X, X, {"x": "x", "y": "y"})
    signature = presheaf_service.underlying_map(f)
    c = Coalgebra(
        signature=signature,
        states=("p", "q"),
        step={
            "p": PfElement(shape=("x", "*"), assignment={("id_*", "x"): "q"}),
            "q": PfElement(shape=("y", "*"), assignment={("id_*", "y"): "p"}),
        },
    )
    T = coalgebra_service.minimize(c, "p")
    assert presheaf_service.natural_tree(f, T)
    assert sheaf_service.glue(f, point_site, sheaf_service.eta(f, T)) == T


def test_glue_of_eta_on_every_state(spine_f, spine_coalgebra, overlap, pairs, disjoint):
    for x in spine_coalgebra.states:
        T = coalgebra_service.minimize(spine_coalgebra, x)
        assert sheaf_service.glue(spine_f, overlap, sheaf_service.eta(spine_f, T)) == T
    streams = (
        leg_stream(pairs, "V1", "w1", ("0", "1")),
        leg_stream(pairs, "V2", "w2", ("1",)),
        leg_stream(pairs, "V1", "w1", ("1", "1", "0")),
    )
    for c in streams:
        for x in c.states:
            T = coalgebra_service.minimize(c, x)
            assert sheaf_service.glue(pairs, disjoint, sheaf_service.eta(pairs, T)) == T


# ============== Restriction ==============

@pytest.fixture
def glued_pair(pairs, disjoint):
    first = coalgebra_service.minimize(leg_stream(pairs, "V1", "w1", ("0", "1")), "s0")
    second = coalgebra_service.minimize(leg_stream(pairs, "V2", "w2", ("1",)), "s0")
    fam = CompatibleFamily(target="U", cover=("v1", "v2"), trees=(first, second))
    return sheaf_service.glue(pairs, disjoint, fam)


def test_restriction_along_composites(square, pairs, glued_pair):
    along_v1 = presheaf_service.restrict_tree(pairs, glued_pair, "v1")
    assert along_v1.root == ("0", "V1")
    twice = presheaf_service.restrict_tree(pairs, along_v1, "w1")
    assert twice.root == ("*", "W")
    assert twice == presheaf_service.restrict_tree(pairs, glued_pair, "w")


def test_restriction_is_functorial_on_the_square(square, spine_f, spine_coalgebra, pairs, glued_pair):
    cases = [(spine_f, coalgebra_service.minimize(spine_coalgebra, x)) for x in spine_coalgebra.states]
    cases.append((pairs, glued_pair))
    for f, T in cases:
        obj = T.root[1]
        for alpha in square.arrows_into(obj):
            restricted = presheaf_service.restrict_tree(f, T, alpha)
            for beta in square.arrows_into(square.dom(alpha)):
                assert presheaf_service.restrict_tree(f, restricted, beta) == presheaf_service.restrict_tree(
                    f, T, square.compose(alpha, beta)
                )
