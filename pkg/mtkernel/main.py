"""
mtkernel - Main Application

Command-line driver for the M-type kernel:
- Rational trees as states of finite coalgebras
- Proto-coalgebras and their coherent parts
- Path-sets, slices and reindexing
- Natural trees on finite presheaves and glueing over sites
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from mtkernel.config import settings
from mtkernel.exceptions import CommandError, KernelError
from mtkernel.models.document import Document
from mtkernel.routers import documents, protos, sheaves, slices, trees
from mtkernel.services.dsl_service import dsl_service

logger = logging.getLogger(__name__)

ROUTERS = (documents.router, trees.router, protos.router, slices.router, sheaves.router)


class CommandParser(argparse.ArgumentParser):
    """Reports usage errors as CommandError instead of exiting."""

    def error(self, message: str):
        raise CommandError(2, message)


def build_parser(parser_class: type[argparse.ArgumentParser] = argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser = parser_class(
        prog=settings.APP_NAME,
        description="Executable M-types over finite sets and finite presheaves.",
    )
    parser.add_argument("--log-level", default=None, help="override LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for router in ROUTERS:
        router.register(subparsers)
    return parser


def load_document(path: Path) -> Document:
    """Read and validate a document; relative paths fall back to DATA_DIR."""
    if not path.exists() and not path.is_absolute() and (settings.DATA_DIR / path).exists():
        path = settings.DATA_DIR / path
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CommandError(2, f"cannot read {path}: {exc.strerror}") from exc
    document = dsl_service.parse(text)
    logger.info("loaded %s: %s", path, document.summary())
    return document


def run(command: str, document: Document, flags: Sequence[str] = ()) -> tuple[str, int]:
    """Execute one command on a parsed document; returns (output, exit code)."""
    try:
        args = build_parser(CommandParser).parse_args([command, "-", *flags])
        return args.handler(args, document)
    except CommandError as exc:
        return f"{settings.APP_NAME}: {exc.detail}\n", exc.exit_code
    except KernelError as exc:
        return f"{settings.APP_NAME}: {exc}\n", 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = args.log_level or ("DEBUG" if settings.DEBUG else settings.LOG_LEVEL)
    logging.basicConfig(
        level=level.upper(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        document = load_document(args.document)
        output, code = args.handler(args, document)
    except CommandError as exc:
        print(f"{settings.APP_NAME}: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except KernelError as exc:
        if settings.DEBUG:
            logger.exception("command %s failed", args.command)
        print(f"{settings.APP_NAME}: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(output)
    return code
