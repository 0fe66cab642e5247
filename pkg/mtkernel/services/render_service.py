"""
Render service: JSON, DOT and text forms of trees, paths and verdicts.
"""

import json
from typing import Hashable, Iterable, Union

from mtkernel.config import settings
from mtkernel.models.schemas import FiniteTree, IndexedSignature, Path, PathSequence, Signature

CUT = "⊥"


def format_label(label: Hashable) -> str:
    """Identifiers as text; derived tuple identifiers as (a,b)."""
    if isinstance(label, tuple):
        return "(" + ",".join(format_label(part) for part in label) + ")"
    return str(label)


def _gvquote(s: str) -> str:
    return '"{}"'.format(s.replace('"', r'\"'))


class RenderService:
    """Service for the textual output of commands."""

    def tree_to_data(self, tree: FiniteTree) -> dict:
        if tree.is_cut:
            return {"cut": True}
        return {
            "shape": format_label(tree.shape),
            "children": {
                format_label(b): self.tree_to_data(child) for b, child in tree.children.items()
            },
        }

    def tree_to_json(self, tree: FiniteTree) -> str:
        return json.dumps(self.tree_to_data(tree), separators=(",", ":"), ensure_ascii=False)

    def tree_to_dot(self, tree: FiniteTree, name: str = "tree") -> str:
        """Nodes labelled by shape (⊥ for cuts), edges labelled by position."""
        lines = [f"digraph {_gvquote(name)} {{", f"  rankdir={settings.DOT_RANKDIR};"]
        counter = 0

        def visit(node: FiniteTree) -> str:
            nonlocal counter
            ident = f"n{counter}"
            counter += 1
            if node.is_cut:
                lines.append(f'  {ident} [label={_gvquote(CUT)}, shape="plaintext"];')
                return ident
            lines.append(f"  {ident} [label={_gvquote(format_label(node.shape))}];")
            for b, child in node.children.items():
                child_ident = visit(child)
                lines.append(f"  {ident} -> {child_ident} [label={_gvquote(format_label(b))}];")
            return ident

        visit(tree)
        lines.append("}")
        return "\n".join(lines) + "\n"

    def tree_to_text(self, tree: FiniteTree) -> str:
        """node(L: leaf(), R: ⊥) style."""
        if tree.is_cut:
            return CUT
        inner = ", ".join(
            f"{format_label(b)}: {self.tree_to_text(child)}" for b, child in tree.children.items()
        )
        return f"{format_label(tree.shape)}({inner})"

    def render_tree(self, tree: FiniteTree, fmt: str) -> str:
        if fmt == "json":
            return self.tree_to_json(tree) + "\n"
        if fmt == "dot":
            return self.tree_to_dot(tree)
        return self.tree_to_text(tree) + "\n"

    def path_to_text(self, path: Union[Path, PathSequence]) -> str:
        return ",".join(format_label(entry) for entry in path.entries)

    def paths_to_text(self, paths: Iterable[Path]) -> str:
        return "".join(self.path_to_text(p) + "\n" for p in paths)

    def signature_to_text(self, name: str, sig: Signature) -> str:
        lines = [
            f"  shape {format_label(a)} / [{', '.join(format_label(b) for b in sig.positions[a])}];"
            for a in sig.shapes
        ]
        if sig.point is not None:
            lines.append(f"  point {format_label(sig.point)};")
        return f"signature {name} {{\n" + "".join(line + "\n" for line in lines) + "}\n"

    def indexed_to_text(self, name: str, sig_name: str, isig: IndexedSignature) -> str:
        lines = [f"  index [{', '.join(format_label(i) for i in isig.index)}];"]
        lines += [
            f"  fibre {format_label(a)} = {format_label(isig.fibre_of[a])};" for a in isig.base.shapes
        ]
        return f"indexed {name} over {sig_name} {{\n" + "".join(line + "\n" for line in lines) + "}\n"

    def verdict(self, value: bool) -> str:
        return "true\n" if value else "false\n"


# Singleton instance
render_service = RenderService()
