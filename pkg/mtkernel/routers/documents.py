"""
Document router for validating and reformatting DSL files.
"""

from mtkernel.models.document import Document
from mtkernel.routers import CommandRouter
from mtkernel.services.dsl_service import dsl_service

router = CommandRouter(tags=["Documents"])


@router.command("check", help="validate every declaration of a document")
def check(args, document: Document) -> tuple[str, int]:
    """Parse and validate the document; report what it declares."""
    return f"ok: {document.summary() or 'empty document'}\n", 0


@router.command("format", help="print a document in canonical form")
def format_document(args, document: Document) -> tuple[str, int]:
    """Re-emit the document with declarations grouped by kind."""
    return dsl_service.emit_document(document), 0
