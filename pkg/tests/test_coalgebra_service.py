import itertools

import pytest
from hypothesis import given, settings, strategies as st

from mtkernel.exceptions import CoalgebraError, MorphismError, PathError, TreeError
from mtkernel.models.schemas import Coalgebra, Path, PathSequence, Signature, TreeHandle
from mtkernel.services.coalgebra_service import coalgebra_service
from mtkernel.services.signature_service import signature_service
from tests.conftest import element
from tests.strategies import coalgebra_states, coalgebras, signatures


def test_step_must_match_arity(sig1):
    with pytest.raises(CoalgebraError, match="do not match"):
        Coalgebra(signature=sig1, states=("s",), step={"s": element("node", L="s")})


def test_step_must_stay_in_carrier(sig1):
    with pytest.raises(CoalgebraError, match="unknown state"):
        Coalgebra(signature=sig1, states=("s",), step={"s": element("node", L="s", R="t")})


# ============== Morphisms ==============

def test_identity_is_a_morphism(c2):
    assert coalgebra_service.check_coalgebra_morphism(c2, c2, {"u": "u", "v": "v"})


def test_collapse_onto_one_state(c2, c1):
    assert coalgebra_service.check_coalgebra_morphism(c2, c1, {"u": "s", "v": "s"})


def test_streams_with_different_roots(streams):
    assert not coalgebra_service.check_coalgebra_morphism(streams, streams, {"zeros": "ones", "ones": "ones"})


def test_partial_function_is_rejected(c2, c1):
    with pytest.raises(MorphismError):
        coalgebra_service.check_coalgebra_morphism(c2, c1, {"u": "s"})


def test_enumerate_morphisms(c2, c1, spine):
    assert coalgebra_service.enumerate_morphisms(c2, c1) == [{"u": "s", "v": "s"}]
    assert coalgebra_service.enumerate_morphisms(c1, c2) == []
    assert coalgebra_service.enumerate_morphisms(spine, c1) == []


def _brute_force_morphisms(source, target):
    found = []
    for images in itertools.product(target.states, repeat=len(source.states)):
        h = dict(zip(source.states, images))
        if coalgebra_service.check_coalgebra_morphism(source, target, h):
            found.append(h)
    return found


@settings(max_examples=50)
@given(st.data())
def test_enumerate_morphisms_matches_brute_force(data):
    sig = data.draw(signatures(max_shapes=2, max_arity=2))
    source = data.draw(coalgebras(sig=sig, max_states=3))
    target = data.draw(coalgebras(sig=sig, max_states=3))
    found = coalgebra_service.enumerate_morphisms(source, target)
    expected = _brute_force_morphisms(source, target)
    assert sorted(map(sorted, map(dict.items, found))) == sorted(map(sorted, map(dict.items, expected)))


@settings(max_examples=50)
@given(st.data())
def test_morphisms_preserve_bisimilarity(data):
    sig = data.draw(signatures(max_shapes=2, max_arity=2))
    source = data.draw(coalgebras(sig=sig, max_states=3))
    target = data.draw(coalgebras(sig=sig, max_states=3))
    for h in coalgebra_service.enumerate_morphisms(source, target):
        assert coalgebra_service.check_coalgebra_morphism(source, target, h)
        for x in source.states:
            assert coalgebra_service.bisimilar(source, x, target, h[x])


@settings(max_examples=100)
@given(coalgebra_states())
def test_quotient_map_preserves_bisimilarity(pair):
    c, _ = pair
    quotient, mapping = coalgebra_service.quotient(c)
    assert coalgebra_service.check_coalgebra_morphism(c, quotient, mapping)
    for x in c.states:
        assert coalgebra_service.bisimilar(c, x, quotient, mapping[x])


# ============== Paths ==============

def test_single_node_path(c1):
    assert coalgebra_service.enumerate_paths(c1, "s", 1) == [Path(entries=("s",))]


def test_paths_of_the_binary_tree(c1):
    paths = coalgebra_service.enumerate_paths(c1, "s", 3)
    assert len(paths) == 7
    assert Path(entries=("s", "L", "s", "R", "s")) in paths
    assert [len(p) for p in paths] == [0, 1, 1, 2, 2, 2, 2]


def test_leaf_has_only_the_trivial_path(sig1):
    leaf = Coalgebra(signature=sig1, states=("x",), step={"x": element("leaf")})
    assert coalgebra_service.enumerate_paths(leaf, "x", 5) == [Path(entries=("x",))]


def test_check_path(c2):
    coalgebra_service.check_path(c2, Path(entries=("u", "L", "v", "R", "v")))
    with pytest.raises(PathError):
        coalgebra_service.check_path(c2, Path(entries=("u", "L", "u")))
    with pytest.raises(PathError):
        Path(entries=("u", "L"))


def test_path_image_and_sequence(c2):
    path = Path(entries=("u", "L", "v", "L", "u"))
    assert coalgebra_service.path_image({"u": "s", "v": "s"}, path) == Path(entries=("s", "L", "s", "L", "s"))
    assert coalgebra_service.path_sequence(c2, path) == PathSequence(entries=("node", "L", "node", "L", "node"))


@pytest.mark.parametrize(
    "target_path, lifted",
    [
        (("s",), ("u",)),
        (("s", "L", "s"), ("u", "L", "v")),
        (("s", "L", "s", "L", "s"), ("u", "L", "v", "L", "u")),
    ],
)
def test_lift_path(c2, c1, target_path, lifted):
    h = {"u": "s", "v": "s"}
    result = coalgebra_service.lift_path(c2, c1, h, Path(entries=target_path), "u")
    assert result == Path(entries=lifted)
    assert coalgebra_service.path_image(h, result) == Path(entries=target_path)


def test_lift_path_needs_a_morphism(c2, c1):
    with pytest.raises(MorphismError):
        coalgebra_service.lift_path(c1, c2, {"s": "u"}, Path(entries=("u", "L", "v")), "s")
    with pytest.raises(PathError):
        coalgebra_service.lift_path(c2, c1, {"u": "s", "v": "s"}, Path(entries=("s",)), "missing")


@settings(max_examples=50)
@given(st.data())
def test_paths_lift_uniquely(data):
    sig = data.draw(signatures(max_shapes=2, max_arity=2))
    source = data.draw(coalgebras(sig=sig, max_states=3))
    target = data.draw(coalgebras(sig=sig, max_states=3))
    for h in coalgebra_service.enumerate_morphisms(source, target):
        for start in source.states:
            for path in coalgebra_service.enumerate_paths(target, h[start], 4):
                lifted = coalgebra_service.lift_path(source, target, h, path, start)
                assert coalgebra_service.path_image(h, lifted) == path
                candidates = [
                    p for p in coalgebra_service.enumerate_paths(source, start, len(path) + 1)
                    if len(p) == len(path) and coalgebra_service.path_image(h, p) == path
                ]
                assert candidates == [lifted]


# ============== Bisimulation and minimization ==============

def test_bisimilar(c1, c2, streams):
    assert coalgebra_service.bisimilar(c1, "s", c1, "s")
    assert coalgebra_service.bisimilar(c1, "s", c2, "u")
    assert not coalgebra_service.bisimilar(streams, "zeros", streams, "ones")


def test_bisimilar_needs_one_signature(c1, streams):
    with pytest.raises(CoalgebraError):
        coalgebra_service.bisimilar(c1, "s", streams, "zeros")


def test_minimize_collapses(c1, c2):
    handle = coalgebra_service.minimize(c2, "u")
    assert handle.universe.states == (0,)
    assert handle == coalgebra_service.minimize(c1, "s")


def test_minimize_keeps_a_minimal_chain(chain):
    handle = coalgebra_service.minimize(chain, "a")
    assert len(handle.universe.states) == 3
    assert coalgebra_service.is_minimal(chain)


def test_minimize_numbers_breadth_first(spine):
    handle = coalgebra_service.minimize(spine, "t")
    assert handle.universe.step[0] == element("node", L=1, R=0)
    assert handle.universe.step[1] == element("leaf")


def test_handle_needs_the_minimized_universe(c2, spine):
    with pytest.raises(TreeError, match="minimized"):
        TreeHandle(universe=c2, state="u")
    canonical = coalgebra_service.minimize(spine, "t")
    assert TreeHandle(universe=canonical.universe, state=0) == canonical
    with pytest.raises(TreeError, match="minimized"):
        TreeHandle(universe=canonical.universe, state=1)
    renumbered = Coalgebra(
        signature=spine.signature,
        states=(0, 1),
        step={0: element("leaf"), 1: element("node", L=0, R=1)},
    )
    with pytest.raises(TreeError, match="minimized"):
        TreeHandle(universe=renumbered, state=1)


def test_quotient(c2, c1):
    union = coalgebra_service.disjoint_union(c1, c2)
    quotient, mapping = coalgebra_service.quotient(union)
    assert len(quotient.states) == 1
    assert coalgebra_service.check_coalgebra_morphism(union, quotient, mapping)
    assert not coalgebra_service.is_minimal(c2)


@settings(max_examples=100)
@given(coalgebra_states())
def test_minimize_is_a_morphism_into_its_universe(pair):
    c, x = pair
    handle, mapping = coalgebra_service.minimize_with_map(c, x)
    reachable = coalgebra_service.reachable(c, [x])
    sub = Coalgebra(signature=c.signature, states=tuple(reachable), step={y: c.step[y] for y in reachable})
    assert coalgebra_service.check_coalgebra_morphism(sub, handle.universe, mapping)
    assert mapping[x] == handle.state
    assert coalgebra_service.is_minimal(handle.universe)


@settings(max_examples=100)
@given(st.data())
def test_handle_equality_is_bisimilarity(data):
    sig = data.draw(signatures(max_shapes=2, max_arity=2))
    left = data.draw(coalgebras(sig=sig, max_states=4))
    right = data.draw(coalgebras(sig=sig, max_states=4))
    x = data.draw(st.sampled_from(left.states))
    y = data.draw(st.sampled_from(right.states))
    same = coalgebra_service.minimize(left, x) == coalgebra_service.minimize(right, y)
    assert same == coalgebra_service.bisimilar(left, x, right, y)


@settings(max_examples=100)
@given(st.data())
def test_unique_morphism_into_a_universe(data):
    sig = data.draw(signatures(max_shapes=2, max_arity=2))
    source = data.draw(coalgebras(sig=sig, max_states=3))
    other = data.draw(coalgebras(sig=sig, max_states=3))
    universe, _ = coalgebra_service.quotient(coalgebra_service.disjoint_union(source, other))
    found = coalgebra_service.enumerate_morphisms(source, universe)
    assert len(found) == 1


@settings(max_examples=100)
@given(coalgebra_states())
def test_universe_step_is_injective(pair):
    c, x = pair
    universe = coalgebra_service.minimize(c, x).universe
    steps = [universe.step[y] for y in universe.states]
    assert len(set(steps)) == len(steps)
    inverse = {universe.step[y]: y for y in universe.states}
    assert all(inverse[universe.step[y]] == y for y in universe.states)


# ============== Relabelling ==============

def test_identity_relabelling(c2):
    identity = signature_service.identity_morphism(c2.signature)
    assert coalgebra_service.relabel(identity, c2) == c2


def test_collapse_relabelling(sig1):
    two_nodes = Signature(shapes=("nodeA", "nodeB"), positions={"nodeA": ("L", "R"), "nodeB": ("L", "R")})
    alternating = Coalgebra(
        signature=two_nodes,
        states=("p", "q"),
        step={"p": element("nodeA", L="q", R="q"), "q": element("nodeB", L="p", R="p")},
    )
    collapse = signature_service.shape_morphism(two_nodes, sig1, {"nodeA": "node", "nodeB": "node"})
    handle = coalgebra_service.relabel_tree(collapse, coalgebra_service.minimize(alternating, "p"))
    c1 = Coalgebra(signature=sig1, states=("s",), step={"s": element("node", L="s", R="s")})
    assert handle == coalgebra_service.minimize(c1, "s")
