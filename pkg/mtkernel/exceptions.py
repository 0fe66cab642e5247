"""
Exceptions raised by the kernel.

KernelError is not a ValueError, so pydantic lets it escape validators
unwrapped.
"""


class KernelError(Exception):
    """Base class of every error raised by mtkernel."""


class SignatureError(KernelError):
    """A signature or a signature morphism violates its invariants."""


class CoalgebraError(KernelError):
    """A coalgebra step is not total or leaves the state set."""


class MorphismError(KernelError):
    """A function between carriers is partial or fails a commuting square."""


class PathError(KernelError):
    """A path or path sequence is malformed or cannot be lifted."""


class ProtoCoalgebraError(KernelError):
    """A proto-coalgebra is malformed (for instance m is not injective)."""


class TreeError(KernelError):
    """A tree or tree handle is malformed or used outside its signature."""


class IndexedError(KernelError):
    """An indexed signature or fibre function is malformed."""


class CategoryError(KernelError):
    """A finite category fails a category law or a pullback check."""


class PresheafError(KernelError):
    """A presheaf, presheaf morphism or natural tree fails its invariants."""


class SiteError(KernelError):
    """A site fails one of the pretopology axioms."""


class FamilyError(KernelError):
    """A compatible family is not matching or cannot be glued."""


class EnumerationLimitExceeded(KernelError):
    """A brute-force enumeration would exceed the configured guard."""

    def __init__(self, candidates: int, guard: int):
        self.candidates = candidates
        self.guard = guard
        super().__init__(
            f"enumeration of {candidates} candidates exceeds the guard of {guard} "
            f"(raise ENUMERATION_GUARD to allow it)"
        )


class ParseError(KernelError):
    """Syntax error in a DSL document."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}")


class DocumentError(KernelError):
    """A declaration refers to an unknown name or fails validation."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        prefix = f"{line}: " if line else ""
        super().__init__(f"{prefix}{message}")


class CommandError(Exception):
    """A command failed; carries the process exit code and a message for stderr."""

    def __init__(self, exit_code: int, detail: str):
        self.exit_code = exit_code
        self.detail = detail
        super().__init__(detail)
