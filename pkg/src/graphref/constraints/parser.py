"""Tokenizer, recursive-descent parser, and semantic checks for the DSL."""

from dataclasses import dataclass

from ..errors import DslSemanticError, DslSyntaxError
from .nodes import (
    COMPARISON_OPS,
    EPSILON,
    AttrName,
    AttributeDecl,
    Comparison,
    Constraint,
    ConstraintSpec,
    ElementKind,
    FieldAccess,
    OpCall,
)

_PUNCT = ("==", "!=", "<=", ">=", "<", ">", "{", "}", "(", ")", "[", "]", "=", ".", ",")

_ELEMENT_WORDS = {
    "vertice": ElementKind.VERTEX,
    "vertex": ElementKind.VERTEX,
    "edge": ElementKind.EDGE,
    "face": ElementKind.FACE,
}
_ATTR_WORDS = {a.value: a for a in AttrName}
_FIELD_UNIVERSE = ("in", "out", "range", "x", "y", "z")
_FIELDS_BY_ATTR = {
    AttrName.DEGREE: ("in", "out"),
    AttrName.VALUE: ("range",),
    AttrName.NORM: ("x", "y", "z"),
    AttrName.NEIGHBOR: (),
}
_ATTR_ELEMENTS = {
    AttrName.DEGREE: (ElementKind.VERTEX,),
    AttrName.VALUE: (ElementKind.VERTEX, ElementKind.EDGE),
    AttrName.NEIGHBOR: (ElementKind.VERTEX,),
    AttrName.NORM: (ElementKind.FACE,),
}
_MOPS = {
    "area": ElementKind.FACE,
    "fan_connected": ElementKind.VERTEX,
    "connected_face": ElementKind.EDGE,
}
_BOOLEAN_MOPS = frozenset({"fan_connected"})
_DIRECTIONS = ("U", "D", "L", "R")


@dataclass(frozen=True)
class Token:
    kind: str  # "word", "number", "punct", "eof"
    text: str
    line: int
    col: int


def _lex(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        matched = None
        for punct in _PUNCT:
            if source.startswith(punct, i):
                matched = punct
                break
        if matched:
            tokens.append(Token("punct", matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        if c.isdigit():
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            tokens.append(Token("number", text, line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_" or c == "ε":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_" or source[j] == "ε"):
                j += 1
            tokens.append(Token("word", source[i:j], line, col))
            col += j - i
            i = j
            continue
        raise DslSyntaxError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _lex(source)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, expected: tuple[str, ...]):
        tok = self.current
        shown = tok.text if tok.kind != "eof" else "end of input"
        raise DslSyntaxError(f"unexpected {shown!r}", tok.line, tok.col, expected)

    def expect(self, text: str) -> Token:
        if self.current.text != text or self.current.kind == "eof":
            self.fail((text,))
        return self.advance()

    def expect_word(self, description: str) -> Token:
        if self.current.kind != "word":
            self.fail((description,))
        return self.advance()

    # Grammar: G { attributes{...} constraints{...} } with both blocks optional.
    def parse_document(self) -> ConstraintSpec:
        self.expect("G")
        self.expect("{")
        attributes: tuple[AttributeDecl, ...] = ()
        constraints: tuple[Constraint, ...] = ()
        while self.current.text != "}":
            tok = self.current
            if tok.text == "attributes":
                self.advance()
                attributes = attributes + self.parse_attribute_block()
            elif tok.text == "constraints":
                self.advance()
                constraints = constraints + self.parse_constraint_block()
            else:
                self.fail(("attributes", "constraints", "}"))
        self.expect("}")
        if self.current.kind != "eof":
            self.fail(("end of input",))
        return ConstraintSpec(attributes, constraints)

    def parse_attribute_block(self) -> tuple[AttributeDecl, ...]:
        self.expect("{")
        decls: list[AttributeDecl] = []
        while self.current.text != "}":
            decls.append(self.parse_attribute_decl())
            if self.current.text == ",":
                self.advance()
        self.expect("}")
        return tuple(decls)

    def parse_attribute_decl(self) -> AttributeDecl:
        element = self.parse_element()
        tok = self.expect_word("attribute name")
        attr = _ATTR_WORDS.get(tok.text)
        if attr is None:
            raise DslSemanticError(f"unknown attribute {tok.text!r}", tok.text, tok.line)
        if element not in _ATTR_ELEMENTS[attr]:
            raise DslSemanticError(
                f"attribute {attr.value!r} does not apply to {element.value} elements",
                tok.text,
                tok.line,
            )
        self.expect("{")
        if self.current.text == "dir":
            if attr is not AttrName.NEIGHBOR:
                raise DslSemanticError(
                    f"direction list is only valid for 'neighbor', not {attr.value!r}",
                    "dir",
                    self.current.line,
                )
            self.advance()
            self.expect("=")
            self.expect("[")
            directions: list[str] = []
            while self.current.text != "]":
                d = self.expect_word("direction")
                if d.text not in _DIRECTIONS:
                    raise DslSemanticError(f"unknown direction {d.text!r}", d.text, d.line)
                directions.append(d.text)
                if self.current.text == ",":
                    self.advance()
            self.expect("]")
            self.expect("}")
            if not directions:
                raise DslSemanticError("empty direction list", "dir", tok.line)
            return AttributeDecl(element, attr, directions=tuple(directions))
        if attr is AttrName.NEIGHBOR:
            raise DslSemanticError(
                "'neighbor' requires a dir=[...] declaration", tok.text, tok.line
            )
        fields: list[str] = []
        while self.current.text != "}":
            f = self.expect_word("field name")
            if f.text not in _FIELD_UNIVERSE:
                raise DslSemanticError(f"unknown field {f.text!r}", f.text, f.line)
            if f.text not in _FIELDS_BY_ATTR[attr]:
                raise DslSemanticError(
                    f"field {f.text!r} does not belong to attribute {attr.value!r}",
                    f.text,
                    f.line,
                )
            fields.append(f.text)
            if self.current.text == ",":
                self.advance()
        self.expect("}")
        if not fields:
            raise DslSemanticError(f"empty field list for {attr.value!r}", tok.text, tok.line)
        return AttributeDecl(element, attr, fields=tuple(fields))

    def parse_constraint_block(self) -> tuple[Constraint, ...]:
        self.expect("{")
        constraints: list[Constraint] = []
        while self.current.text != "}":
            constraints.append(self.parse_constraint())
            if self.current.text == ",":
                self.advance()
        self.expect("}")
        return tuple(constraints)

    def parse_element(self) -> ElementKind:
        tok = self.expect_word("element kind")
        kind = _ELEMENT_WORDS.get(tok.text)
        if kind is None:
            raise DslSemanticError(f"unknown element kind {tok.text!r}", tok.text, tok.line)
        return kind

    def parse_constraint(self) -> Constraint:
        self.expect("forall")
        self.expect("(")
        element = self.parse_element()
        self.expect(")")
        self.expect("{")
        comparisons = [self.parse_comparison(element)]
        while self.current.text == "or":
            self.advance()
            comparisons.append(self.parse_comparison(element))
        self.expect("}")
        return Constraint(element, tuple(comparisons))

    def parse_comparison(self, element: ElementKind) -> Comparison:
        tok = self.expect_word("attribute or operator name")
        if self.current.text == "(":
            self.advance()
            self.expect(")")
            op_element = _MOPS.get(tok.text)
            if op_element is None:
                raise DslSemanticError(f"unknown operator {tok.text!r}", tok.text, tok.line)
            if op_element is not element:
                raise DslSemanticError(
                    f"operator {tok.text!r} applies to {op_element.value} elements,"
                    f" not {element.value}",
                    tok.text,
                    tok.line,
                )
            lhs: FieldAccess | OpCall = OpCall(tok.text)
            boolean = tok.text in _BOOLEAN_MOPS
        else:
            attr = _ATTR_WORDS.get(tok.text)
            if attr is None:
                raise DslSemanticError(f"unknown attribute {tok.text!r}", tok.text, tok.line)
            self.expect(".")
            ftok = self.expect_word("field name")
            if ftok.text not in _FIELD_UNIVERSE:
                raise DslSemanticError(f"unknown field {ftok.text!r}", ftok.text, ftok.line)
            if ftok.text not in _FIELDS_BY_ATTR[attr]:
                raise DslSemanticError(
                    f"field {ftok.text!r} does not belong to attribute {attr.value!r}",
                    ftok.text,
                    ftok.line,
                )
            if element not in _ATTR_ELEMENTS[attr]:
                raise DslSemanticError(
                    f"attribute {attr.value!r} does not apply to {element.value} elements",
                    tok.text,
                    tok.line,
                )
            lhs = FieldAccess(attr, ftok.text)
            boolean = False
        cop = self.parse_cop()
        value = self.parse_value(boolean, tok)
        return Comparison(lhs, cop, value)

    def parse_cop(self) -> str:
        tok = self.current
        if tok.kind == "punct" and tok.text in COMPARISON_OPS:
            self.advance()
            return tok.text
        self.fail(COMPARISON_OPS)

    def parse_value(self, boolean: bool, lhs_tok: Token):
        tok = self.current
        if tok.kind == "number":
            if boolean:
                raise DslSemanticError(
                    f"operator {lhs_tok.text!r} is boolean; compare against true/false",
                    tok.text,
                    tok.line,
                )
            try:
                value = float(tok.text)
            except ValueError:
                raise DslSyntaxError(
                    f"malformed numeral {tok.text!r}", tok.line, tok.col
                ) from None
            self.advance()
            return value
        if tok.kind == "word" and tok.text in ("true", "false"):
            if not boolean:
                raise DslSemanticError(
                    f"{lhs_tok.text!r} is numeric; compare against a number or epsilon",
                    tok.text,
                    tok.line,
                )
            self.advance()
            return tok.text == "true"
        if tok.kind == "word" and tok.text in ("epsilon", "ε"):
            if boolean:
                raise DslSemanticError(
                    f"operator {lhs_tok.text!r} is boolean; compare against true/false",
                    tok.text,
                    tok.line,
                )
            self.advance()
            return EPSILON
        self.fail(("number", "true", "false", "epsilon"))


def _check_declaredness(spec: ConstraintSpec) -> None:
    declared: set[tuple[ElementKind, AttrName, str]] = set()
    for decl in spec.attributes:
        for f in decl.fields:
            declared.add((decl.element, decl.attr, f))
    for c in spec.constraints:
        for cmp in c.comparisons:
            if isinstance(cmp.lhs, FieldAccess):
                key = (c.element, cmp.lhs.attr, cmp.lhs.field)
                if key not in declared:
                    raise DslSemanticError(
                        f"constraint uses undeclared attribute"
                        f" {cmp.lhs.attr.value}.{cmp.lhs.field} on {c.element.value};"
                        " declare it in the attributes block",
                        cmp.lhs.attr.value,
                    )


def parse_spec(source: str) -> ConstraintSpec:
    """Parse a constraint document into its AST.

    Raises DslSyntaxError (with line, column, and the expected-token set) for
    structural problems, DslSemanticError for unknown or misused names.
    """
    spec = _Parser(source).parse_document()
    _check_declaredness(spec)
    return spec
