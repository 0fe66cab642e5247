"""
Tree router for truncation, paths, bisimulation, minimization and path sets.
"""

from pathlib import Path

from mtkernel.config import settings
from mtkernel.exceptions import CommandError
from mtkernel.models.document import Document
from mtkernel.models.schemas import PathSequence
from mtkernel.routers import (
    CommandRouter,
    arg,
    coalgebra_state,
    qualified_state,
    resolve,
    signature_name,
)
from mtkernel.services.coalgebra_service import coalgebra_service
from mtkernel.services.dsl_service import dsl_service
from mtkernel.services.mtype_service import mtype_service
from mtkernel.services.render_service import render_service

router = CommandRouter(tags=["Trees"])

COALGEBRA_ARGS = (
    arg("--coalg", required=True, help="coalgebra name"),
    arg("--state", required=True, help="state name"),
)


def parse_sequence(text: str) -> PathSequence:
    """Comma-separated alternating shapes and positions."""
    entries = tuple(part.strip() for part in text.split(","))
    if len(entries) % 2 == 0 or any(not entry for entry in entries):
        raise CommandError(2, f"malformed sequence {text!r}")
    return PathSequence(entries=entries)


@router.command(
    "truncate",
    help="cut the tree of a state at a depth",
    arguments=COALGEBRA_ARGS + (
        arg("--depth", type=int, default=None, help="depth bound"),
        arg("--format", dest="fmt", choices=["json", "dot", "text"], default="json"),
    ),
)
def truncate(args, document: Document) -> tuple[str, int]:
    """Print tr_n of the tree denoted by the state."""
    coalgebra, state = coalgebra_state(document, args.coalg, args.state)
    depth = settings.DEFAULT_DEPTH if args.depth is None else args.depth
    if depth < 0:
        raise CommandError(2, "depth must be non-negative")
    tree = mtype_service.truncate(coalgebra_service.minimize(coalgebra, state), depth)
    return render_service.render_tree(tree, args.fmt), 0


@router.command(
    "paths",
    help="list the paths from a state",
    arguments=COALGEBRA_ARGS + (arg("--max-nodes", type=int, default=None),),
)
def paths(args, document: Document) -> tuple[str, int]:
    """Print every path with at most max-nodes states, one per line."""
    coalgebra, state = coalgebra_state(document, args.coalg, args.state)
    bound = settings.DEFAULT_MAX_NODES if args.max_nodes is None else args.max_nodes
    found = coalgebra_service.enumerate_paths(coalgebra, state, bound)
    return render_service.paths_to_text(found), 0


@router.command(
    "bisim",
    help="decide whether two states denote the same tree",
    arguments=(
        arg("--left", required=True, help="COALGEBRA.STATE"),
        arg("--right", required=True, help="COALGEBRA.STATE"),
    ),
)
def bisim(args, document: Document) -> tuple[str, int]:
    """Exit 0 if the states are bisimilar, 1 otherwise."""
    left, x = qualified_state(document, args.left)
    right, y = qualified_state(document, args.right)
    if left.signature != right.signature:
        raise CommandError(2, "coalgebras are over different signatures")
    verdict = coalgebra_service.bisimilar(left, x, right, y)
    return render_service.verdict(verdict), 0 if verdict else 1


@router.command("minimize", help="print the canonical universe of a state", arguments=COALGEBRA_ARGS)
def minimize(args, document: Document) -> tuple[str, int]:
    """Print the minimized coalgebra of the state; its root is state 0."""
    coalgebra, state = coalgebra_state(document, args.coalg, args.state)
    handle = coalgebra_service.minimize(coalgebra, state)
    name = f"{args.coalg}_{args.state}"
    return dsl_service.emit_coalgebra(name, signature_name(document, coalgebra.signature), handle.universe), 0


@router.command(
    "member",
    help="decide membership of a sequence in the path-set of a state",
    arguments=COALGEBRA_ARGS + (arg("--seq", required=True, help="e.g. node,L,node"),),
)
def member(args, document: Document) -> tuple[str, int]:
    """Exit 0 if the sequence is in the path-set, 1 otherwise."""
    coalgebra, state = coalgebra_state(document, args.coalg, args.state)
    verdict = mtype_service.pathset_member(
        coalgebra_service.minimize(coalgebra, state), parse_sequence(args.seq)
    )
    return render_service.verdict(verdict), 0 if verdict else 1


@router.command(
    "pathset-coherent",
    help="check the coherence clauses of a path-set",
    arguments=(
        arg("--coalg", help="coalgebra name"),
        arg("--state", help="state name"),
        arg("--signature", help="signature of a listed path-set"),
        arg("--members", type=Path, help="file listing member sequences, one per line"),
        arg("--max-len", type=int, default=None, help="window, in shapes"),
    ),
)
def pathset_coherent(args, document: Document) -> tuple[str, int]:
    """
    Check the path-set of a state, or a finite path-set listed in a file
    and read as a membership oracle, on sequences up to max-len shapes.
    """
    window = settings.DEFAULT_DEPTH if args.max_len is None else args.max_len
    if args.coalg is not None:
        if args.state is None:
            raise CommandError(2, "--coalg needs --state")
        coalgebra, state = coalgebra_state(document, args.coalg, args.state)
        verdict = mtype_service.pathset_coherent(coalgebra_service.minimize(coalgebra, state), window)
    elif args.signature is not None and args.members is not None:
        sig = resolve(document.signatures, args.signature, "signature")
        try:
            lines = args.members.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise CommandError(2, f"cannot read {args.members}: {exc.strerror}") from exc
        listed = {parse_sequence(line) for line in lines if line.strip()}
        for seq in listed:
            mtype_service.check_sequence(sig, seq)
        verdict = mtype_service.oracle_coherent(sig, lambda seq: seq in listed, window)
    else:
        raise CommandError(2, "give --coalg and --state, or --signature and --members")
    return render_service.verdict(verdict), 0 if verdict else 1
