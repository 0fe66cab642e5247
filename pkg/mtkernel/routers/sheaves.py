"""
Sheaf router: the sheaf condition and glueing of compatible families.
"""

from mtkernel.config import settings
from mtkernel.exceptions import CommandError
from mtkernel.models.document import Document
from mtkernel.routers import CommandRouter, arg, resolve
from mtkernel.services.mtype_service import mtype_service
from mtkernel.services.render_service import render_service
from mtkernel.services.sheaf_service import sheaf_service

router = CommandRouter(tags=["Sheaves"])


@router.command(
    "sheaf-check",
    help="decide the sheaf condition for a presheaf on a site",
    arguments=(
        arg("--site", required=True, help="site name"),
        arg("--presheaf", required=True, help="presheaf name"),
    ),
)
def sheaf_check(args, document: Document) -> tuple[str, int]:
    """Exit 0 if every matching family has a unique amalgamation, 1 otherwise."""
    site = resolve(document.sites, args.site, "site")
    X = resolve(document.presheaves, args.presheaf, "presheaf")
    verdict = sheaf_service.sheaf_check(X, site)
    return render_service.verdict(verdict), 0 if verdict else 1


@router.command(
    "glue",
    help="glue a compatible family into one natural tree",
    arguments=(
        arg("--site", default=None, help="site name; defaults to the site the family is declared over"),
        arg("--family", required=True, help="family name"),
        arg("--depth", type=int, default=None, help="depth bound of the printed tree"),
        arg("--format", dest="fmt", choices=["json", "dot", "text"], default="json"),
    ),
)
def glue(args, document: Document) -> tuple[str, int]:
    """Print the truncation of the glued tree."""
    declaration = resolve(document.families, args.family, "family")
    if args.site is not None and args.site != declaration.site:
        raise CommandError(2, f"family {args.family} is declared over site {declaration.site}, not {args.site}")
    site = resolve(document.sites, declaration.site, "site")
    f = resolve(document.morphisms, declaration.morphism, "morphism")
    depth = settings.DEFAULT_DEPTH if args.depth is None else args.depth
    if depth < 0:
        raise CommandError(2, "depth must be non-negative")
    glued = sheaf_service.glue(f, site, declaration.family)
    return render_service.render_tree(mtype_service.truncate(glued, depth), args.fmt), 0
