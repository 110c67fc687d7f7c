"""Lexer, AST, and parser for the action-code language (a JavaScript subset).

The subset covers what instruction-following models actually emit for
desk-scale app automation: let/const/var, functions and arrows, the usual
operators, member access and calls, template literals, control flow,
exceptions. Deliberately absent: classes, generators, async, destructuring,
regex literals, labels, `with`. Anything outside the subset fails loudly at
parse time, which the agent loop feeds back as a syntax error.

The same AST feeds both the interpreter and the static rule analyzer.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class JsSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.message = message
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

KEYWORDS = {
    "let", "const", "var", "function", "return", "if", "else", "while", "for",
    "break", "continue", "throw", "try", "catch", "finally", "new", "true",
    "false", "null", "undefined", "typeof", "do",
}

_PUNCT3 = ("===", "!==", "**=")
_PUNCT2 = (
    "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "?.", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "**",
)
_PUNCT1 = "+-*/%=<>!?:;,.()[]{}"


@dataclass
class Token:
    type: str  # num | str | template | ident | keyword | punct | eof
    value: object
    line: int
    col: int


class Lexer:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str) -> JsSyntaxError:
        return JsSyntaxError(message, self.line, self.col)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.src) and self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.src[i] if i < len(self.src) else ""

    def _skip_trivia(self) -> None:
        while self.pos < len(self.src):
            ch = self.src[self.pos]
            if ch in " \t\r\n":
                self._advance()
            elif ch == "/" and self._peek(1) == "/":
                while self.pos < len(self.src) and self.src[self.pos] != "\n":
                    self._advance()
            elif ch == "/" and self._peek(1) == "*":
                self._advance(2)
                while self.pos < len(self.src) and not (self._peek() == "*" and self._peek(1) == "/"):
                    self._advance()
                if self.pos >= len(self.src):
                    raise self.error("unterminated block comment")
                self._advance(2)
            else:
                return

    def _read_escape(self) -> str:
        self._advance()  # backslash
        ch = self._peek()
        if ch == "":
            raise self.error("unterminated escape sequence")
        self._advance()
        if ch == "n":
            return "\n"
        if ch == "t":
            return "\t"
        if ch == "r":
            return "\r"
        if ch == "0":
            return "\0"
        if ch == "u":
            hexdigits = ""
            if self._peek() == "{":
                self._advance()
                while self._peek() != "}":
                    if self._peek() == "":
                        raise self.error("unterminated unicode escape")
                    hexdigits += self._peek()
                    self._advance()
                self._advance()
            else:
                for _ in range(4):
                    hexdigits += self._peek()
                    self._advance()
            try:
                return chr(int(hexdigits, 16))
            except ValueError:
                raise self.error(f"bad unicode escape \\u{hexdigits}") from None
        return ch  # \\, \', \", \`, and any identity escape

    def _read_string(self, quote: str) -> str:
        out = []
        self._advance()  # opening quote
        while True:
            ch = self._peek()
            if ch == "":
                raise self.error("unterminated string literal")
            if ch == "\n":
                raise self.error("newline in string literal")
            if ch == quote:
                self._advance()
                return "".join(out)
            if ch == "\\":
                out.append(self._read_escape())
            else:
                out.append(ch)
                self._advance()

    def _read_template(self) -> list:
        """Parts: str chunks and ("expr", source, line, col) tuples."""
        parts: list = []
        buf: list[str] = []
        self._advance()  # backtick
        while True:
            ch = self._peek()
            if ch == "":
                raise self.error("unterminated template literal")
            if ch == "`":
                self._advance()
                if buf:
                    parts.append("".join(buf))
                return parts
            if ch == "\\":
                buf.append(self._read_escape())
                continue
            if ch == "$" and self._peek(1) == "{":
                if buf:
                    parts.append("".join(buf))
                    buf = []
                self._advance(2)
                expr_line, expr_col = self.line, self.col
                depth = 1
                expr_chars: list[str] = []
                while depth > 0:
                    c = self._peek()
                    if c == "":
                        raise self.error("unterminated ${...} in template literal")
                    if c == "{":
                        depth += 1
                    elif c == "}":
                        depth -= 1
                        if depth == 0:
                            self._advance()
                            break
                    expr_chars.append(c)
                    self._advance()
                parts.append(("expr", "".join(expr_chars), expr_line, expr_col))
                continue
            buf.append(ch)
            self._advance()

    def _read_number(self) -> float:
        start = self.pos
        if self._peek() == "0" and self._peek(1) in "xX":
            self._advance(2)
            while self._peek() and self._peek() in "0123456789abcdefABCDEF":
                self._advance()
            return float(int(self.src[start:self.pos], 16))
        while self._peek().isdigit():
            self._advance()
        if self._peek() == "." and self._peek(1).isdigit():
            self._advance()
            while self._peek().isdigit():
                self._advance()
        if self._peek() and self._peek() in "eE":
            save = self.pos
            self._advance()
            if self._peek() and self._peek() in "+-":
                self._advance()
            if self._peek().isdigit():
                while self._peek().isdigit():
                    self._advance()
            else:
                self.pos = save
        return float(self.src[start:self.pos])

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        while True:
            self._skip_trivia()
            line, col = self.line, self.col
            ch = self._peek()
            if ch == "":
                out.append(Token("eof", None, line, col))
                return out
            if ch.isdigit() or (ch == "." and self._peek(1).isdigit()):
                out.append(Token("num", self._read_number(), line, col))
            elif ch in "'\"":
                out.append(Token("str", self._read_string(ch), line, col))
            elif ch == "`":
                out.append(Token("template", self._read_template(), line, col))
            elif ch.isalpha() or ch in "_$":
                start = self.pos
                while True:
                    nxt = self._peek()
                    if nxt and (nxt.isalnum() or nxt in "_$"):
                        self._advance()
                    else:
                        break
                word = self.src[start:self.pos]
                out.append(Token("keyword" if word in KEYWORDS else "ident", word, line, col))
            else:
                three = self.src[self.pos:self.pos + 3]
                two = self.src[self.pos:self.pos + 2]
                if three in _PUNCT3:
                    self._advance(3)
                    out.append(Token("punct", three, line, col))
                elif two in _PUNCT2:
                    self._advance(2)
                    out.append(Token("punct", two, line, col))
                elif ch in _PUNCT1:
                    self._advance()
                    out.append(Token("punct", ch, line, col))
                else:
                    raise self.error(f"unexpected character {ch!r}")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass
class Node:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)


@dataclass
class Num(Node):
    value: float


@dataclass
class Str(Node):
    value: str


@dataclass
class Template(Node):
    parts: list  # str | Node


@dataclass
class Bool(Node):
    value: bool


@dataclass
class Null(Node):
    pass


@dataclass
class Undef(Node):
    pass


@dataclass
class Ident(Node):
    name: str


@dataclass
class ArrayLit(Node):
    elements: list


@dataclass
class ObjectLit(Node):
    props: list  # (key: str, value: Node)


@dataclass
class Member(Node):
    obj: Node
    prop: object  # str for dot access, Node when computed
    computed: bool
    optional: bool = False


@dataclass
class Call(Node):
    callee: Node
    args: list
    optional: bool = False


@dataclass
class New(Node):
    callee: Node
    args: list


@dataclass
class Unary(Node):
    op: str
    operand: Node


@dataclass
class Update(Node):
    op: str
    target: Node
    prefix: bool


@dataclass
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass
class Logical(Node):
    op: str
    left: Node
    right: Node


@dataclass
class Conditional(Node):
    test: Node
    consequent: Node
    alternate: Node


@dataclass
class Assign(Node):
    op: str
    target: Node
    value: Node


@dataclass
class Arrow(Node):
    params: list
    body: Node  # Block or expression
    expression: bool


@dataclass
class FunctionExpr(Node):
    name: str | None
    params: list
    body: "Block"


@dataclass
class Program(Node):
    body: list


@dataclass
class VarDecl(Node):
    kind: str
    declarations: list  # (name, init Node | None)


@dataclass
class ExprStmt(Node):
    expr: Node


@dataclass
class If(Node):
    test: Node
    consequent: Node
    alternate: Node | None


@dataclass
class While(Node):
    test: Node
    body: Node


@dataclass
class DoWhile(Node):
    body: Node
    test: Node


@dataclass
class For(Node):
    init: Node | None
    test: Node | None
    update: Node | None
    body: Node


@dataclass
class ForOf(Node):
    kind: str
    name: str
    iterable: Node
    body: Node


@dataclass
class Block(Node):
    body: list


@dataclass
class Return(Node):
    arg: Node | None


@dataclass
class Break(Node):
    pass


@dataclass
class Continue(Node):
    pass


@dataclass
class Throw(Node):
    arg: Node


@dataclass
class Try(Node):
    block: "Block"
    param: str | None
    handler: "Block | None"
    finalizer: "Block | None"


@dataclass
class FunctionDecl(Node):
    name: str
    params: list
    body: "Block"


@dataclass
class Empty(Node):
    pass


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "**="}


class Parser:
    def __init__(self, source: str):
        self.toks = Lexer(source).tokens()
        self.i = 0

    # --- token helpers ---

    def peek(self, offset: int = 0) -> Token:
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.i]
        if tok.type != "eof":
            self.i += 1
        return tok

    def at_punct(self, value: str) -> bool:
        t = self.peek()
        return t.type == "punct" and t.value == value

    def at_keyword(self, value: str) -> bool:
        t = self.peek()
        return t.type == "keyword" and t.value == value

    def eat_punct(self, value: str) -> bool:
        if self.at_punct(value):
            self.next()
            return True
        return False

    def expect_punct(self, value: str) -> Token:
        t = self.peek()
        if not self.at_punct(value):
            raise JsSyntaxError(f"expected {value!r} but found {self._describe(t)}", t.line, t.col)
        return self.next()

    def expect_ident(self) -> Token:
        t = self.peek()
        if t.type != "ident":
            raise JsSyntaxError(f"expected an identifier but found {self._describe(t)}", t.line, t.col)
        return self.next()

    @staticmethod
    def _describe(t: Token) -> str:
        if t.type == "eof":
            return "end of input"
        return repr(t.value)

    def _pos(self, t: Token) -> dict:
        return {"line": t.line, "col": t.col}

    # --- entry point ---

    def parse_program(self) -> Program:
        t0 = self.peek()
        body = []
        while self.peek().type != "eof":
            body.append(self.parse_statement())
        return Program(body, **self._pos(t0))

    # --- statements ---

    def parse_statement(self) -> Node:
        t = self.peek()
        if t.type == "punct":
            if t.value == "{":
                return self.parse_block()
            if t.value == ";":
                self.next()
                return Empty(**self._pos(t))
        if t.type == "keyword":
            kw = t.value
            if kw in ("let", "const", "var"):
                stmt = self.parse_var_decl()
                self.eat_punct(";")
                return stmt
            if kw == "function":
                return self.parse_function_decl()
            if kw == "if":
                return self.parse_if()
            if kw == "while":
                return self.parse_while()
            if kw == "do":
                return self.parse_do_while()
            if kw == "for":
                return self.parse_for()
            if kw == "return":
                self.next()
                arg = None
                if not (self.at_punct(";") or self.at_punct("}") or self.peek().type == "eof"):
                    arg = self.parse_expression()
                self.eat_punct(";")
                return Return(arg, **self._pos(t))
            if kw == "break":
                self.next()
                self.eat_punct(";")
                return Break(**self._pos(t))
            if kw == "continue":
                self.next()
                self.eat_punct(";")
                return Continue(**self._pos(t))
            if kw == "throw":
                self.next()
                arg = self.parse_expression()
                self.eat_punct(";")
                return Throw(arg, **self._pos(t))
            if kw == "try":
                return self.parse_try()
        expr = self.parse_expression()
        self.eat_punct(";")
        return ExprStmt(expr, **self._pos(t))

    def parse_block(self) -> Block:
        t = self.expect_punct("{")
        body = []
        while not self.at_punct("}"):
            if self.peek().type == "eof":
                raise JsSyntaxError("unterminated block", t.line, t.col)
            body.append(self.parse_statement())
        self.expect_punct("}")
        return Block(body, **self._pos(t))

    def parse_var_decl(self) -> VarDecl:
        t = self.next()  # let | const | var
        declarations = []
        while True:
            name = self.expect_ident()
            init = None
            if self.eat_punct("="):
                init = self.parse_assignment()
            declarations.append((name.value, init))
            if not self.eat_punct(","):
                break
        return VarDecl(t.value, declarations, **self._pos(t))

    def parse_function_decl(self) -> FunctionDecl:
        t = self.next()  # function
        name = self.expect_ident()
        params = self.parse_params()
        body = self.parse_block()
        return FunctionDecl(name.value, params, body, **self._pos(t))

    def parse_params(self) -> list:
        self.expect_punct("(")
        params = []
        while not self.at_punct(")"):
            params.append(self.expect_ident().value)
            if not self.eat_punct(","):
                break
        self.expect_punct(")")
        return params

    def parse_if(self) -> If:
        t = self.next()
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        consequent = self.parse_statement()
        alternate = None
        if self.at_keyword("else"):
            self.next()
            alternate = self.parse_statement()
        return If(test, consequent, alternate, **self._pos(t))

    def parse_while(self) -> While:
        t = self.next()
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        body = self.parse_statement()
        return While(test, body, **self._pos(t))

    def parse_do_while(self) -> DoWhile:
        t = self.next()
        body = self.parse_statement()
        if not self.at_keyword("while"):
            tok = self.peek()
            raise JsSyntaxError("expected 'while' after do-block", tok.line, tok.col)
        self.next()
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        self.eat_punct(";")
        return DoWhile(body, test, **self._pos(t))

    def parse_for(self) -> Node:
        t = self.next()
        self.expect_punct("(")
        # for (let x of iterable) | for (init; test; update)
        if self.peek().type == "keyword" and self.peek().value in ("let", "const", "var"):
            kind_tok = self.peek()
            if self.peek(1).type == "ident" and self.peek(2).type == "ident" and self.peek(2).value == "of":
                self.next()
                name = self.expect_ident().value
                self.next()  # of
                iterable = self.parse_expression()
                self.expect_punct(")")
                body = self.parse_statement()
                return ForOf(kind_tok.value, name, iterable, body, **self._pos(t))
            init: Node | None = self.parse_var_decl()
        elif self.at_punct(";"):
            init = None
        else:
            init = ExprStmt(self.parse_expression(), **self._pos(t))
        self.expect_punct(";")
        test = None if self.at_punct(";") else self.parse_expression()
        self.expect_punct(";")
        update = None if self.at_punct(")") else self.parse_expression()
        self.expect_punct(")")
        body = self.parse_statement()
        return For(init, test, update, body, **self._pos(t))

    def parse_try(self) -> Try:
        t = self.next()
        block = self.parse_block()
        param = None
        handler = None
        finalizer = None
        if self.at_keyword("catch"):
            self.next()
            if self.eat_punct("("):
                param = self.expect_ident().value
                self.expect_punct(")")
            handler = self.parse_block()
        if self.at_keyword("finally"):
            self.next()
            finalizer = self.parse_block()
        if handler is None and finalizer is None:
            raise JsSyntaxError("try without catch or finally", t.line, t.col)
        return Try(block, param, handler, finalizer, **self._pos(t))

    # --- expressions (precedence climbing) ---

    def parse_expression(self) -> Node:
        return self.parse_assignment()

    def parse_assignment(self) -> Node:
        arrow = self.try_parse_arrow()
        if arrow is not None:
            return arrow
        left = self.parse_conditional()
        t = self.peek()
        if t.type == "punct" and t.value in _ASSIGN_OPS:
            if not isinstance(left, (Ident, Member)):
                raise JsSyntaxError("invalid assignment target", t.line, t.col)
            self.next()
            value = self.parse_assignment()
            return Assign(t.value, left, value, **self._pos(t))
        return left

    def try_parse_arrow(self) -> Arrow | None:
        t = self.peek()
        # single-param arrow: x => ...
        if t.type == "ident" and self.peek(1).type == "punct" and self.peek(1).value == "=>":
            self.next()
            self.next()
            return self._finish_arrow([t.value], t)
        # parenthesized params: (a, b) => ...
        if t.type == "punct" and t.value == "(":
            save = self.i
            try:
                params = self.parse_params()
            except JsSyntaxError:
                self.i = save
                return None
            if self.at_punct("=>"):
                self.next()
                return self._finish_arrow(params, t)
            self.i = save
        return None

    def _finish_arrow(self, params: list, t: Token) -> Arrow:
        if self.at_punct("{"):
            body: Node = self.parse_block()
            return Arrow(params, body, expression=False, **self._pos(t))
        body = self.parse_assignment()
        return Arrow(params, body, expression=True, **self._pos(t))

    def parse_conditional(self) -> Node:
        test = self.parse_nullish()
        if self.at_punct("?"):
            t = self.next()
            consequent = self.parse_assignment()
            self.expect_punct(":")
            alternate = self.parse_assignment()
            return Conditional(test, consequent, alternate, **self._pos(t))
        return test

    def _parse_logical(self, ops: tuple[str, ...], next_level) -> Node:
        left = next_level()
        while self.peek().type == "punct" and self.peek().value in ops:
            t = self.next()
            right = next_level()
            left = Logical(t.value, left, right, **self._pos(t))
        return left

    def parse_nullish(self) -> Node:
        return self._parse_logical(("??",), self.parse_or)

    def parse_or(self) -> Node:
        return self._parse_logical(("||",), self.parse_and)

    def parse_and(self) -> Node:
        return self._parse_logical(("&&",), self.parse_equality)

    def _parse_binary(self, ops: tuple[str, ...], next_level) -> Node:
        left = next_level()
        while self.peek().type == "punct" and self.peek().value in ops:
            t = self.next()
            right = next_level()
            left = Binary(t.value, left, right, **self._pos(t))
        return left

    def parse_equality(self) -> Node:
        return self._parse_binary(("===", "!==", "==", "!="), self.parse_relational)

    def parse_relational(self) -> Node:
        return self._parse_binary(("<", "<=", ">", ">="), self.parse_additive)

    def parse_additive(self) -> Node:
        return self._parse_binary(("+", "-"), self.parse_multiplicative)

    def parse_multiplicative(self) -> Node:
        return self._parse_binary(("*", "/", "%"), self.parse_exponent)

    def parse_exponent(self) -> Node:
        left = self.parse_unary()
        if self.at_punct("**"):
            t = self.next()
            right = self.parse_exponent()  # right associative
            return Binary("**", left, right, **self._pos(t))
        return left

    def parse_unary(self) -> Node:
        t = self.peek()
        if t.type == "punct" and t.value in ("!", "-", "+"):
            self.next()
            return Unary(t.value, self.parse_unary(), **self._pos(t))
        if t.type == "keyword" and t.value == "typeof":
            self.next()
            return Unary("typeof", self.parse_unary(), **self._pos(t))
        if t.type == "punct" and t.value in ("++", "--"):
            self.next()
            target = self.parse_unary()
            if not isinstance(target, (Ident, Member)):
                raise JsSyntaxError("invalid update target", t.line, t.col)
            return Update(t.value, target, prefix=True, **self._pos(t))
        return self.parse_postfix()

    def parse_postfix(self) -> Node:
        expr = self.parse_call_member()
        t = self.peek()
        if t.type == "punct" and t.value in ("++", "--") and isinstance(expr, (Ident, Member)):
            self.next()
            return Update(t.value, expr, prefix=False, **self._pos(t))
        return expr

    def parse_call_member(self) -> Node:
        if self.at_keyword("new"):
            t = self.next()
            callee = self.parse_member_only(self.parse_primary())
            args = self.parse_args() if self.at_punct("(") else []
            expr: Node = New(callee, args, **self._pos(t))
        else:
            expr = self.parse_primary()
        while True:
            t = self.peek()
            if self.at_punct("."):
                self.next()
                prop = self.next()
                if prop.type not in ("ident", "keyword"):
                    raise JsSyntaxError("expected a property name after '.'", prop.line, prop.col)
                expr = Member(expr, prop.value, computed=False, **self._pos(t))
            elif self.at_punct("?."):
                self.next()
                if self.at_punct("("):
                    expr = Call(expr, self.parse_args(), optional=True, **self._pos(t))
                else:
                    prop = self.next()
                    if prop.type not in ("ident", "keyword"):
                        raise JsSyntaxError("expected a property name after '?.'", prop.line, prop.col)
                    expr = Member(expr, prop.value, computed=False, optional=True, **self._pos(t))
            elif self.at_punct("["):
                self.next()
                index = self.parse_expression()
                self.expect_punct("]")
                expr = Member(expr, index, computed=True, **self._pos(t))
            elif self.at_punct("("):
                expr = Call(expr, self.parse_args(), **self._pos(t))
            else:
                return expr

    def parse_member_only(self, expr: Node) -> Node:
        while self.at_punct("."):
            t = self.next()
            prop = self.next()
            if prop.type not in ("ident", "keyword"):
                raise JsSyntaxError("expected a property name after '.'", prop.line, prop.col)
            expr = Member(expr, prop.value, computed=False, **self._pos(t))
        return expr

    def parse_args(self) -> list:
        self.expect_punct("(")
        args = []
        while not self.at_punct(")"):
            args.append(self.parse_assignment())
            if not self.eat_punct(","):
                break
        self.expect_punct(")")
        return args

    def parse_primary(self) -> Node:
        t = self.peek()
        if t.type == "num":
            self.next()
            return Num(t.value, **self._pos(t))
        if t.type == "str":
            self.next()
            return Str(t.value, **self._pos(t))
        if t.type == "template":
            self.next()
            parts: list = []
            for part in t.value:
                if isinstance(part, str):
                    parts.append(part)
                else:
                    _tag, src, line, col = part
                    sub = Parser(src)
                    expr = sub.parse_expression()
                    tail = sub.peek()
                    if tail.type != "eof":
                        raise JsSyntaxError("unexpected content in template expression", line, col)
                    parts.append(expr)
            return Template(parts, **self._pos(t))
        if t.type == "ident":
            self.next()
            return Ident(t.value, **self._pos(t))
        if t.type == "keyword":
            if t.value == "true" or t.value == "false":
                self.next()
                return Bool(t.value == "true", **self._pos(t))
            if t.value == "null":
                self.next()
                return Null(**self._pos(t))
            if t.value == "undefined":
                self.next()
                return Undef(**self._pos(t))
            if t.value == "function":
                self.next()
                name = self.expect_ident().value if self.peek().type == "ident" else None
                params = self.parse_params()
                body = self.parse_block()
                return FunctionExpr(name, params, body, **self._pos(t))
            if t.value == "new":
                return self.parse_call_member()
        if self.at_punct("("):
            self.next()
            expr = self.parse_expression()
            self.expect_punct(")")
            return expr
        if self.at_punct("["):
            self.next()
            elements = []
            while not self.at_punct("]"):
                elements.append(self.parse_assignment())
                if not self.eat_punct(","):
                    break
            self.expect_punct("]")
            return ArrayLit(elements, **self._pos(t))
        if self.at_punct("{"):
            self.next()
            props = []
            while not self.at_punct("}"):
                key_tok = self.next()
                if key_tok.type in ("ident", "keyword", "str"):
                    key = str(key_tok.value)
                elif key_tok.type == "num":
                    value = key_tok.value
                    key = str(int(value)) if float(value).is_integer() else repr(value)
                else:
                    raise JsSyntaxError("expected a property key", key_tok.line, key_tok.col)
                if self.eat_punct(":"):
                    value_node = self.parse_assignment()
                elif key_tok.type == "ident":
                    value_node = Ident(key, line=key_tok.line, col=key_tok.col)
                else:
                    raise JsSyntaxError("expected ':' after property key", key_tok.line, key_tok.col)
                props.append((key, value_node))
                if not self.eat_punct(","):
                    break
            self.expect_punct("}")
            return ObjectLit(props, **self._pos(t))
        raise JsSyntaxError(f"unexpected token {self._describe(t)}", t.line, t.col)


def parse(source: str) -> Program:
    return Parser(source).parse_program()
