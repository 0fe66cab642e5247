"""
DSL service: parse documents into validated models and emit them back.

Grammar, one declaration per block:

    signature NAME { shape ID / [POS, ...]; point ID; }
    coalgebra NAME over SIG { state ID = SHAPE(POS: ID, ...); }
    proto NAME over SIG { carrier [..]; ambient [..]; gamma X -> Y; m SHAPE(POS: X) -> Y; }
    indexed NAME over SIG { index [..]; fibre SHAPE = I; }
    map NAME over INDEXED { J -> I; }
    category NAME { object ID, ...; arrow ID : DOM -> COD; compose G . F = H;
                    pullback F, G = P (PF, PG); }
    presheaf NAME over CAT { sections OBJ = [..]; restrict ARROW : X -> Y, ...; }
    morphism NAME : SOURCE -> TARGET { at OBJ : X -> Y, ...; }
    site NAME over CAT { cover OBJ = [ARROW, ...]; }
    pcoalgebra NAME for MORPHISM on PRESHEAF { at OBJ : X = A { ARROW/B : Y, ... }; }
    family NAME over SITE for MORPHISM { at OBJ; leg ARROW = PCOALGEBRA.STATE; }

`#` starts a comment. Identity arrows are named id_OBJ and are implicit.
"""

import logging
import re
from typing import Callable, Hashable, NamedTuple

from pydantic import ValidationError

from mtkernel.exceptions import DocumentError, KernelError, ParseError
from mtkernel.models.document import (
    Document,
    FamilyDeclaration,
    IndexMap,
    PresheafCoalgebra,
)
from mtkernel.models.presheaf import (
    CompatibleFamily,
    FiniteCategory,
    Presheaf,
    PresheafMorphism,
    Site,
)
from mtkernel.models.schemas import (
    Coalgebra,
    IndexedSignature,
    PfElement,
    ProtoCoalgebra,
    Signature,
)
from mtkernel.services.coalgebra_service import coalgebra_service
from mtkernel.services.indexed_service import indexed_service
from mtkernel.services.presheaf_service import presheaf_service
from mtkernel.services.sheaf_service import sheaf_service

logger = logging.getLogger(__name__)

TOKEN_RE = re.compile(
    r"""
      (?P<newline>\n)
    | (?P<space>[ \t\r]+)
    | (?P<comment>\#[^\n]*)
    | (?P<arrow>->)
    | (?P<name>[\w⊥'′]+)
    | (?P<punct>[{}()\[\];:,=/.])
    """,
    re.VERBOSE,
)

INDENT = "  "


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        if kind == "newline":
            line += 1
            line_start = match.end()
        elif kind in ("arrow", "name", "punct"):
            tokens.append(Token(kind, match.group(), line, pos - line_start + 1))
        pos = match.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _describe(token: Token) -> str:
    return "end of input" if token.kind == "eof" else repr(token.text)


class _Parser:
    """Recursive-descent parser over the token list of one document."""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0
        self.tables: dict[str, dict] = {kind: {} for kind in Document.model_fields}
        self.declarations: dict[str, tuple[str, Callable]] = {
            "signature": ("signatures", self.signature),
            "coalgebra": ("coalgebras", self.coalgebra),
            "proto": ("protos", self.proto),
            "indexed": ("indexed", self.indexed),
            "map": ("maps", self.index_map),
            "category": ("categories", self.category),
            "presheaf": ("presheaves", self.presheaf),
            "morphism": ("morphisms", self.morphism),
            "site": ("sites", self.site),
            "pcoalgebra": ("pcoalgebras", self.pcoalgebra),
            "family": ("families", self.family),
        }

    # ============== Token helpers ==============

    def peek(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def at(self, text: str) -> bool:
        token = self.peek()
        return token.kind != "eof" and token.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        token = self.peek()
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {_describe(token)}", token.line, token.column)
        return self.advance()

    def name(self) -> str:
        token = self.peek()
        if token.kind != "name":
            raise ParseError(f"expected a name, found {_describe(token)}", token.line, token.column)
        return self.advance().text

    def names(self, separator: str = ",") -> list[str]:
        items = [self.name()]
        while self.accept(separator):
            items.append(self.name())
        return items

    def name_list(self) -> list[str]:
        self.expect("[")
        items = [] if self.at("]") else self.names()
        self.expect("]")
        return items

    def pairs(self, separator: str) -> list[tuple[str, str]]:
        """X sep Y, X sep Y, ... with at least one pair."""
        found = []
        while True:
            left = self.name()
            self.expect(separator)
            found.append((left, self.name()))
            if not self.accept(","):
                return found

    def keyword(self, *allowed: str) -> str:
        token = self.peek()
        word = self.name()
        if word not in allowed:
            raise ParseError(
                f"expected one of {', '.join(allowed)}, found {word!r}", token.line, token.column
            )
        return word

    def lookup(self, kind: str, label: str) -> object:
        token = self.peek()
        name = self.name()
        try:
            return self.tables[kind][name]
        except KeyError:
            raise DocumentError(f"unknown {label} {name!r}", token.line) from None

    def lookup_name(self, kind: str, label: str) -> tuple[str, object]:
        token = self.peek()
        value = self.lookup(kind, label)
        return token.text, value

    def element(self) -> PfElement:
        """SHAPE or SHAPE(POS: VALUE, ...)."""
        shape = self.name()
        assignment = {}
        if self.accept("(") and not self.accept(")"):
            for position, value in self.pairs(":"):
                if position in assignment:
                    token = self.peek()
                    raise DocumentError(f"position {position!r} assigned twice", token.line)
                assignment[position] = value
            self.expect(")")
        return PfElement(shape=shape, assignment=assignment)

    # ============== Document ==============

    def document(self) -> Document:
        while self.peek().kind != "eof":
            start = self.peek()
            word = self.keyword(*self.declarations)
            kind, handler = self.declarations[word]
            name = self.name()
            if name in self.tables[kind]:
                raise DocumentError(f"duplicate {word} {name!r}", start.line)
            try:
                value = handler()
            except (ParseError, DocumentError):
                raise
            except ValidationError as exc:
                detail = exc.errors()[0].get("msg", str(exc))
                raise DocumentError(f"{word} {name}: {detail}", start.line) from exc
            except KernelError as exc:
                raise DocumentError(f"{word} {name}: {exc}", start.line) from exc
            self.tables[kind][name] = value
            logger.debug("parsed %s %s", word, name)
        return Document(**self.tables)

    # ============== Declarations ==============

    def signature(self) -> Signature:
        self.expect("{")
        shapes, positions, point = [], {}, None
        while not self.accept("}"):
            if self.keyword("shape", "point") == "shape":
                shape = self.name()
                self.expect("/")
                shapes.append(shape)
                positions[shape] = tuple(self.name_list())
            else:
                point = self.name()
            self.expect(";")
        return Signature(shapes=tuple(shapes), positions=positions, point=point)

    def coalgebra(self) -> Coalgebra:
        self.expect("over")
        sig = self.lookup("signatures", "signature")
        self.expect("{")
        step = {}
        while not self.accept("}"):
            self.expect("state")
            token = self.peek()
            state = self.name()
            if state in step:
                raise DocumentError(f"state {state!r} declared twice", token.line)
            self.expect("=")
            step[state] = self.element()
            self.expect(";")
        return Coalgebra(signature=sig, states=tuple(step), step=step)

    def proto(self) -> ProtoCoalgebra:
        self.expect("over")
        sig = self.lookup("signatures", "signature")
        self.expect("{")
        carrier, ambient, gamma, m = [], [], {}, {}
        while not self.accept("}"):
            word = self.keyword("carrier", "ambient", "gamma", "m")
            if word == "carrier":
                carrier = self.name_list()
            elif word == "ambient":
                ambient = self.name_list()
            elif word == "gamma":
                x = self.name()
                self.expect("->")
                gamma[x] = self.name()
            else:
                element = self.element()
                self.expect("->")
                m[element] = self.name()
            self.expect(";")
        return ProtoCoalgebra(
            signature=sig, carrier=tuple(carrier), ambient=tuple(ambient), gamma=gamma, m=m
        )

    def indexed(self) -> IndexedSignature:
        self.expect("over")
        sig = self.lookup("signatures", "signature")
        self.expect("{")
        index, fibre_of = [], {}
        while not self.accept("}"):
            if self.keyword("index", "fibre") == "index":
                index = self.name_list()
            else:
                shape = self.name()
                self.expect("=")
                fibre_of[shape] = self.name()
            self.expect(";")
        return IndexedSignature(base=sig, index=tuple(index), fibre_of=fibre_of)

    def index_map(self) -> IndexMap:
        self.expect("over")
        name, isig = self.lookup_name("indexed", "indexed signature")
        self.expect("{")
        mapping = {}
        while not self.accept("}"):
            j = self.name()
            self.expect("->")
            mapping[j] = self.name()
            self.expect(";")
        indexed_service.reindex(isig, tuple(mapping), mapping)
        return IndexMap(indexed=name, domain=tuple(mapping), mapping=mapping)

    def category(self) -> FiniteCategory:
        self.expect("{")
        objects, arrows, composition, pullbacks = [], {}, {}, {}
        while not self.accept("}"):
            word = self.keyword("object", "arrow", "compose", "pullback")
            if word == "object":
                objects.extend(self.names())
            elif word == "arrow":
                arrow = self.name()
                self.expect(":")
                dom = self.name()
                self.expect("->")
                arrows[arrow] = (dom, self.name())
            elif word == "compose":
                g = self.name()
                self.expect(".")
                f = self.name()
                self.expect("=")
                composition[(g, f)] = self.name()
            else:
                f = self.name()
                self.expect(",")
                g = self.name()
                self.expect("=")
                apex = self.name()
                self.expect("(")
                p = self.name()
                self.expect(",")
                q = self.name()
                self.expect(")")
                pullbacks[(f, g)] = (apex, p, q)
            self.expect(";")
        return FiniteCategory.build(objects, arrows, composition, pullbacks)

    def presheaf(self) -> Presheaf:
        self.expect("over")
        cat = self.lookup("categories", "category")
        self.expect("{")
        sections, restrict = {}, {}
        while not self.accept("}"):
            if self.keyword("sections", "restrict") == "sections":
                obj = self.name()
                self.expect("=")
                sections[obj] = tuple(self.name_list())
            else:
                arrow = self.name()
                self.expect(":")
                restrict[arrow] = dict(self.pairs("->"))
            self.expect(";")
        return Presheaf.build(cat, sections, restrict)

    def morphism(self) -> PresheafMorphism:
        self.expect(":")
        source = self.lookup("presheaves", "presheaf")
        self.expect("->")
        target = self.lookup("presheaves", "presheaf")
        self.expect("{")
        components = {obj: {} for obj in source.category.objects}
        while not self.accept("}"):
            self.expect("at")
            obj = self.name()
            self.expect(":")
            components[obj] = dict(self.pairs("->"))
            self.expect(";")
        return PresheafMorphism(source=source, target=target, components=components)

    def site(self) -> Site:
        self.expect("over")
        cat = self.lookup("categories", "category")
        self.expect("{")
        covers: dict = {}
        while not self.accept("}"):
            self.expect("cover")
            obj = self.name()
            self.expect("=")
            covers.setdefault(obj, []).append(tuple(self.name_list()))
            self.expect(";")
        return Site.build(cat, covers)

    def pcoalgebra(self) -> PresheafCoalgebra:
        self.expect("for")
        morphism_name, f = self.lookup_name("morphisms", "morphism")
        self.expect("on")
        carrier_name, X = self.lookup_name("presheaves", "presheaf")
        self.expect("{")
        gamma = {obj: {} for obj in X.category.objects}
        while not self.accept("}"):
            self.expect("at")
            obj = self.name()
            self.expect(":")
            x = self.name()
            self.expect("=")
            shape = self.name()
            self.expect("{")
            assignment = {}
            while not self.accept("}"):
                beta = self.name()
                self.expect("/")
                b = self.name()
                self.expect(":")
                assignment[(beta, b)] = self.name()
                if not self.at("}"):
                    self.expect(",")
            gamma.setdefault(obj, {})[x] = PfElement(shape=shape, assignment=assignment)
            self.expect(";")
        coalgebra = presheaf_service.unfold_presheaf_coalgebra(f, X, gamma)
        return PresheafCoalgebra(
            morphism=morphism_name, carrier=carrier_name, gamma=gamma, coalgebra=coalgebra
        )

    def family(self) -> FamilyDeclaration:
        self.expect("over")
        site_name, site = self.lookup_name("sites", "site")
        self.expect("for")
        morphism_name, f = self.lookup_name("morphisms", "morphism")
        if f.target.category != site.category:
            raise DocumentError("morphism and site live on different categories", self.peek().line)
        self.expect("{")
        self.expect("at")
        target = self.name()
        self.expect(";")
        legs, trees = [], []
        while not self.accept("}"):
            self.expect("leg")
            leg = self.name()
            self.expect("=")
            token = self.peek()
            pc_name, pc = self.lookup_name("pcoalgebras", "presheaf coalgebra")
            if pc.morphism != morphism_name:
                raise DocumentError(f"{pc_name} is not a coalgebra for {morphism_name}", token.line)
            self.expect(".")
            state = self.name()
            self.expect(";")
            if leg not in site.category.arrows:
                raise DocumentError(f"unknown arrow {leg!r}", token.line)
            key = (state, site.category.dom(leg))
            if key not in pc.coalgebra.step:
                raise DocumentError(f"{state!r} is not a section of {pc.carrier} at the domain of {leg!r}", token.line)
            legs.append((leg, pc_name, state))
            trees.append(coalgebra_service.minimize(pc.coalgebra, key))
        fam = CompatibleFamily(target=target, cover=tuple(leg for leg, _, _ in legs), trees=tuple(trees))
        sheaf_service.check_family(f, site, fam)
        return FamilyDeclaration(
            site=site_name, morphism=morphism_name, target=target, legs=tuple(legs), family=fam
        )


# ============== Emitter ==============

def _name_of(table: dict, value: object, label: str) -> str:
    for name, candidate in table.items():
        if candidate == value:
            return name
    raise DocumentError(f"document has no {label} for a referenced value")


def _element_text(element: PfElement, order: tuple) -> str:
    inner = ", ".join(f"{b}: {element.assignment[b]}" for b in order)
    return f"{element.shape}({inner})"


def _block(header: str, lines: list[str]) -> str:
    body = "".join(f"{INDENT}{line}\n" for line in lines)
    return f"{header} {{\n{body}}}\n"


class DslService:
    """Service for reading and writing DSL documents."""

    def parse(self, text: str) -> Document:
        """Parse and validate a document."""
        return _Parser(text).document()

    def emit_signature(self, name: str, sig: Signature) -> str:
        lines = [f"shape {a} / [{', '.join(map(str, sig.positions[a]))}];" for a in sig.shapes]
        if sig.point is not None:
            lines.append(f"point {sig.point};")
        return _block(f"signature {name}", lines)

    def emit_coalgebra(self, name: str, sig_name: str, c: Coalgebra) -> str:
        lines = [
            f"state {x} = {_element_text(c.step[x], c.signature.positions[c.shape_of(x)])};"
            for x in c.states
        ]
        return _block(f"coalgebra {name} over {sig_name}", lines)

    def emit_proto(self, name: str, sig_name: str, p: ProtoCoalgebra) -> str:
        lines = [
            f"carrier [{', '.join(map(str, p.carrier))}];",
            f"ambient [{', '.join(map(str, p.ambient))}];",
        ]
        lines += [f"gamma {x} -> {p.gamma[x]};" for x in p.carrier]
        lines += [
            f"m {_element_text(e, p.signature.positions[e.shape])} -> {y};" for e, y in p.m.items()
        ]
        return _block(f"proto {name} over {sig_name}", lines)

    def emit_indexed(self, name: str, sig_name: str, isig: IndexedSignature) -> str:
        lines = [f"index [{', '.join(map(str, isig.index))}];"]
        lines += [f"fibre {a} = {isig.fibre_of[a]};" for a in isig.base.shapes]
        return _block(f"indexed {name} over {sig_name}", lines)

    def emit_category(self, name: str, cat: FiniteCategory) -> str:
        lines = [f"object {', '.join(map(str, cat.objects))};"]
        lines += [
            f"arrow {a} : {dom} -> {cod};"
            for a, (dom, cod) in cat.arrows.items()
            if not cat.is_identity(a)
        ]
        lines += [
            f"compose {g} . {f} = {h};"
            for (g, f), h in cat.composition.items()
            if not cat.is_identity(g) and not cat.is_identity(f)
        ]
        emitted = set()
        for (f, g), square in cat.pullbacks.items():
            if square == self._canonical_pullback(cat, f, g):
                continue
            apex, p, q = square
            if (g, f) in emitted and cat.pullbacks[(g, f)] == (apex, q, p):
                continue
            emitted.add((f, g))
            lines.append(f"pullback {f}, {g} = {apex} ({p}, {q});")
        return _block(f"category {name}", lines)

    def _canonical_pullback(self, cat: FiniteCategory, f: Hashable, g: Hashable):
        if cat.is_identity(g):
            return (cat.dom(f), cat.identity(cat.dom(f)), f)
        if cat.is_identity(f):
            return (cat.dom(g), g, cat.identity(cat.dom(g)))
        return None

    def emit_presheaf(self, name: str, cat_name: str, X: Presheaf) -> str:
        cat = X.category
        lines = [f"sections {c} = [{', '.join(map(str, X.sections[c]))}];" for c in cat.objects]
        for arrow, mapping in X.restrict.items():
            if mapping and not cat.is_identity(arrow):
                pairs = ", ".join(f"{x} -> {y}" for x, y in mapping.items())
                lines.append(f"restrict {arrow} : {pairs};")
        return _block(f"presheaf {name} over {cat_name}", lines)

    def emit_document(self, doc: Document) -> str:
        """The canonical text of a document, declarations grouped by kind."""
        blocks = []
        for name, sig in doc.signatures.items():
            blocks.append(self.emit_signature(name, sig))
        for name, c in doc.coalgebras.items():
            blocks.append(self.emit_coalgebra(name, _name_of(doc.signatures, c.signature, "signature"), c))
        for name, p in doc.protos.items():
            blocks.append(self.emit_proto(name, _name_of(doc.signatures, p.signature, "signature"), p))
        for name, isig in doc.indexed.items():
            blocks.append(self.emit_indexed(name, _name_of(doc.signatures, isig.base, "signature"), isig))
        for name, x in doc.maps.items():
            lines = [f"{j} -> {x.mapping[j]};" for j in x.domain]
            blocks.append(_block(f"map {name} over {x.indexed}", lines))
        for name, cat in doc.categories.items():
            blocks.append(self.emit_category(name, cat))
        for name, X in doc.presheaves.items():
            blocks.append(self.emit_presheaf(name, _name_of(doc.categories, X.category, "category"), X))
        for name, f in doc.morphisms.items():
            lines = [
                f"at {c} : {', '.join(f'{x} -> {y}' for x, y in component.items())};"
                for c, component in f.components.items()
                if component
            ]
            header = (
                f"morphism {name} : {_name_of(doc.presheaves, f.source, 'presheaf')}"
                f" -> {_name_of(doc.presheaves, f.target, 'presheaf')}"
            )
            blocks.append(_block(header, lines))
        for name, site in doc.sites.items():
            lines = [
                f"cover {c} = [{', '.join(map(str, cover))}];"
                for c, covers in site.covers.items()
                for i, cover in enumerate(covers)
                if not (i == 0 and cover == (site.category.identity(c),))
            ]
            blocks.append(_block(f"site {name} over {_name_of(doc.categories, site.category, 'category')}", lines))
        for name, pc in doc.pcoalgebras.items():
            lines = []
            for c, sections in pc.gamma.items():
                for x, element in sections.items():
                    inner = ", ".join(f"{beta}/{b} : {y}" for (beta, b), y in element.assignment.items())
                    body = f"{{ {inner} }}" if inner else "{ }"
                    lines.append(f"at {c} : {x} = {element.shape} {body};")
            blocks.append(_block(f"pcoalgebra {name} for {pc.morphism} on {pc.carrier}", lines))
        for name, fam in doc.families.items():
            lines = [f"at {fam.target};"]
            lines += [f"leg {leg} = {pc}.{state};" for leg, pc, state in fam.legs]
            blocks.append(_block(f"family {name} over {fam.site} for {fam.morphism}", lines))
        return "\n".join(blocks)


# Singleton instance
dsl_service = DslService()
