"""
Proto-coalgebra router.
"""

from mtkernel.models.document import Document
from mtkernel.routers import CommandRouter, arg, resolve, signature_name
from mtkernel.services.dsl_service import dsl_service
from mtkernel.services.proto_service import proto_service

router = CommandRouter(tags=["Proto-coalgebras"])


@router.command(
    "coh",
    help="print the coherent part of a proto-coalgebra",
    arguments=(arg("--proto", required=True, help="proto-coalgebra name"),),
)
def coh(args, document: Document) -> tuple[str, int]:
    """Print Coh(p) as a coalgebra over the signature of p."""
    p = resolve(document.protos, args.proto, "proto-coalgebra")
    result = proto_service.coh(p)
    name = f"{args.proto}_coh"
    return dsl_service.emit_coalgebra(name, signature_name(document, p.signature), result.coalgebra), 0
