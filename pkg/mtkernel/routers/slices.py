"""
Slice router for indexed signatures: fibre filtering and reindexing.
"""

from mtkernel.exceptions import CommandError
from mtkernel.models.document import Document
from mtkernel.routers import CommandRouter, arg, coalgebra_state, resolve, signature_name
from mtkernel.services.coalgebra_service import coalgebra_service
from mtkernel.services.indexed_service import indexed_service
from mtkernel.services.render_service import render_service

router = CommandRouter(tags=["Slices"])


@router.command(
    "slice-filter",
    help="decide whether a tree lives in a single fibre",
    arguments=(
        arg("--indexed", required=True, help="indexed signature name"),
        arg("--coalg", required=True, help="coalgebra over its base"),
        arg("--state", required=True, help="state name"),
    ),
)
def slice_filter(args, document: Document) -> tuple[str, int]:
    """Exit 0 if every node of the tree lies in the fibre of its root, 1 otherwise."""
    isig = resolve(document.indexed, args.indexed, "indexed signature")
    coalgebra, state = coalgebra_state(document, args.coalg, args.state)
    if coalgebra.signature != isig.base:
        raise CommandError(2, f"coalgebra {args.coalg} is not over the base of {args.indexed}")
    verdict = indexed_service.fibre_coherent(isig, coalgebra_service.minimize(coalgebra, state))
    return render_service.verdict(verdict), 0 if verdict else 1


@router.command(
    "reindex",
    help="pull an indexed signature back along an index map",
    arguments=(
        arg("--indexed", required=True, help="indexed signature name"),
        arg("--map", dest="index_map", required=True, help="map declared over it"),
    ),
)
def reindex(args, document: Document) -> tuple[str, int]:
    """Print the reindexed base signature and its fibre assignment."""
    isig = resolve(document.indexed, args.indexed, "indexed signature")
    index_map = resolve(document.maps, args.index_map, "map")
    if index_map.indexed != args.indexed:
        raise CommandError(2, f"map {args.index_map} is declared over {index_map.indexed}, not {args.indexed}")
    pulled, _ = indexed_service.reindex(isig, index_map.domain, index_map.mapping)
    base_name = f"{signature_name(document, isig.base)}_{args.index_map}"
    output = render_service.signature_to_text(base_name, pulled.base)
    output += render_service.indexed_to_text(f"{args.indexed}_{args.index_map}", base_name, pulled)
    return output, 0
