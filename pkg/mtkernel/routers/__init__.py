"""
Command routers.

Each router groups related sub-commands; `main` includes every router in
one argparse parser. A command handler receives the parsed arguments and
the validated document and returns its output together with the exit code.
"""

from pathlib import Path
from typing import Callable, Hashable

from mtkernel.exceptions import CommandError
from mtkernel.models.document import Document
from mtkernel.models.schemas import Coalgebra, Signature

Handler = Callable[..., tuple[str, int]]


def arg(*flags: str, **options) -> tuple[tuple[str, ...], dict]:
    """An argparse argument specification."""
    return flags, options


class CommandRouter:
    """Collects sub-commands and registers them on an argparse parser."""

    def __init__(self, tags: list[str]):
        self.tags = tags
        self.commands: list[tuple[str, str, tuple, Handler]] = []

    def command(self, name: str, help: str, arguments: tuple = ()) -> Callable[[Handler], Handler]:
        def decorator(func: Handler) -> Handler:
            self.commands.append((name, help, arguments, func))
            return func

        return decorator

    def register(self, subparsers) -> None:
        for name, help, arguments, func in self.commands:
            parser = subparsers.add_parser(name, help=help, description=func.__doc__)
            parser.add_argument("document", type=Path, help="DSL document")
            for flags, options in arguments:
                parser.add_argument(*flags, **options)
            parser.set_defaults(handler=func)


def resolve(table: dict, name: str, label: str):
    """Look a declaration up by name, or fail with exit code 2."""
    if name not in table:
        raise CommandError(2, f"unknown {label} {name!r}")
    return table[name]


def coalgebra_state(document: Document, name: str, state: str) -> tuple[Coalgebra, Hashable]:
    coalgebra = resolve(document.coalgebras, name, "coalgebra")
    if state not in coalgebra.step:
        raise CommandError(2, f"coalgebra {name} has no state {state!r}")
    return coalgebra, state


def qualified_state(document: Document, reference: str) -> tuple[Coalgebra, Hashable]:
    """Resolve C.s to a coalgebra and one of its states."""
    name, dot, state = reference.partition(".")
    if not dot:
        raise CommandError(2, f"expected COALGEBRA.STATE, got {reference!r}")
    return coalgebra_state(document, name, state)


def signature_name(document: Document, sig: Signature) -> str:
    for name, candidate in document.signatures.items():
        if candidate == sig:
            return name
    return "signature"
