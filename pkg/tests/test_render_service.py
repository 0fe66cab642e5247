import json

from mtkernel.models.schemas import FiniteTree, Path
from mtkernel.services.coalgebra_service import coalgebra_service
from mtkernel.services.mtype_service import mtype_service
from mtkernel.services.render_service import format_label, render_service

FULL_AT_TWO = (
    '{"shape":"node","children":{"L":{"shape":"node","children":{"L":{"cut":true},"R":{"cut":true}}},'
    '"R":{"shape":"node","children":{"L":{"cut":true},"R":{"cut":true}}}}}'
)


def test_json_of_a_truncation(c1):
    tree = mtype_service.truncate(coalgebra_service.minimize(c1, "s"), 2)
    assert render_service.tree_to_json(tree) == FULL_AT_TWO
    assert json.loads(render_service.render_tree(tree, "json")) == json.loads(FULL_AT_TWO)


def test_text_of_a_truncation(spine):
    tree = mtype_service.truncate(coalgebra_service.minimize(spine, "t"), 2)
    assert render_service.tree_to_text(tree) == "node(L: leaf(), R: node(L: ⊥, R: ⊥))"
    assert render_service.render_tree(FiniteTree.cut(), "text") == "⊥\n"


def test_dot_draws_the_tree(spine):
    tree = mtype_service.truncate(coalgebra_service.minimize(spine, "t"), 1)
    dot = render_service.tree_to_dot(tree, name="t")
    assert dot.startswith('digraph "t" {\n  rankdir=TB;\n')
    assert '  n0 [label="node"];' in dot
    assert '  n0 -> n1 [label="L"];' in dot
    assert dot.count('label="⊥"') == 2
    assert dot.endswith("}\n")


def test_derived_labels():
    assert format_label(("a", "C")) == "(a,C)"
    assert format_label((("id_U", "l"), "x")) == "((id_U,l),x)"
    assert format_label(3) == "3"


def test_paths_to_text(c1):
    found = coalgebra_service.enumerate_paths(c1, "s", 2)
    assert render_service.paths_to_text(found) == "s\ns,L,s\ns,R,s\n"
    assert render_service.path_to_text(Path(entries=("s",))) == "s"


def test_signature_and_indexed_text(trees_doc):
    isig = trees_doc.indexed["IS"]
    assert render_service.signature_to_text("SIG1", isig.base) == (
        "signature SIG1 {\n  shape leaf / [];\n  shape node / [L, R];\n}\n"
    )
    assert render_service.indexed_to_text("IS", "SIG1", isig) == (
        "indexed IS over SIG1 {\n  index [i0, i1];\n  fibre leaf = i1;\n  fibre node = i0;\n}\n"
    )


def test_verdict():
    assert render_service.verdict(True) == "true\n"
    assert render_service.verdict(False) == "false\n"
