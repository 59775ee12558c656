# Laboratory/Expressions.py
"""
Arithmetic expression language shared by kernels, sample functions, μ densities and
path couplings.

Grammar (lowest to highest precedence):

    expr       := conjunct ( ('|' | 'or') conjunct )*
    conjunct   := comparison ( ('&' | 'and') comparison )*
    comparison := additive ( ('<' | '<=' | '>' | '>=' | '==' | '!=') additive )*
    additive   := term ( ('+' | '-') term )*
    term       := unary ( ('*' | '/') unary )*
    unary      := ('-' | '+') unary | power
    power      := atom ( ('^' | '**') unary )?
    atom       := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Comparison chains read mathematically: ``0 <= t <= 1/lambda`` means
``(0 <= t) & (t <= 1/lambda)``. ``ind(cond)`` turns a condition into 1.0/0.0.
Every node evaluates on numpy arrays, so one call covers a whole quadrature batch.
The language is total except division; no symbolic manipulation is offered.
"""

import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

NAME_ALIASES = {"λ": "lambda", "lam": "lambda"}
CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_λ][A-Za-z_0-9]*)
  | (?P<op>\*\*|<=|>=|==|!=|[-+*/^()<>,&|])
    """,
    re.VERBOSE,
)


class ExpressionSyntaxError(ValueError):
    """Parse failure; ``position`` is the 0-based character offset in the source."""

    def __init__(self, message: str, source: str, position: int):
        super().__init__(f"{message} at position {position} in '{source}'")
        self.source = source
        self.position = position


class ExpressionEvaluationError(ArithmeticError):
    """Evaluation failure (division by zero); ``point`` holds the variable bindings."""

    def __init__(self, message: str, point: Dict[str, float]):
        bindings = ", ".join(f"{k}={v!r}" for k, v in point.items())
        super().__init__(f"{message} at ({bindings})")
        self.point = point


@dataclass(frozen=True)
class Token:
    kind: str  # number | name | op | end
    text: str
    position: int


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ExpressionSyntaxError(f"Unexpected character '{source[pos]}'", source, pos)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


# --- AST ---

class Node:
    def evaluate(self, env: Mapping[str, np.ndarray]) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Number(Node):
    value: float

    def evaluate(self, env):
        return np.float64(self.value)


@dataclass(frozen=True)
class Variable(Node):
    name: str

    def evaluate(self, env):
        return np.asarray(env[self.name], dtype=float)


@dataclass(frozen=True)
class Negate(Node):
    operand: Node

    def evaluate(self, env):
        return -self.operand.evaluate(env)


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, env):
        lhs = self.left.evaluate(env)
        rhs = self.right.evaluate(env)
        if self.op == "+":
            return lhs + rhs
        if self.op == "-":
            return lhs - rhs
        if self.op == "*":
            return lhs * rhs
        if self.op == "/":
            zero = np.asarray(rhs) == 0
            if np.any(zero):
                raise ExpressionEvaluationError("Division by zero", _point_at(env, zero, lhs))
            return np.divide(lhs, rhs)
        # '^': 0^negative is a division by zero in disguise
        with np.errstate(over="ignore", invalid="ignore"):
            return np.power(np.asarray(lhs, dtype=float), rhs)


@dataclass(frozen=True)
class Compare(Node):
    operands: Tuple[Node, ...]
    ops: Tuple[str, ...]

    def evaluate(self, env):
        values = [node.evaluate(env) for node in self.operands]
        result = None
        for op, lhs, rhs in zip(self.ops, values, values[1:]):
            part = _COMPARATORS[op](lhs, rhs)
            result = part if result is None else np.logical_and(result, part)
        return result


@dataclass(frozen=True)
class Logical(Node):
    op: str  # '&' or '|'
    left: Node
    right: Node

    def evaluate(self, env):
        lhs = np.asarray(self.left.evaluate(env)) != 0
        rhs = np.asarray(self.right.evaluate(env)) != 0
        return np.logical_and(lhs, rhs) if self.op == "&" else np.logical_or(lhs, rhs)


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: Tuple[Node, ...]

    def evaluate(self, env):
        values = [arg.evaluate(env) for arg in self.args]
        if self.name == "ind":
            return np.where(np.asarray(values[0]) != 0, 1.0, 0.0)
        if self.name == "min":
            return _reduce(np.minimum, values)
        if self.name == "max":
            return _reduce(np.maximum, values)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return FUNCTIONS[self.name][1](np.asarray(values[0], dtype=float))


_COMPARATORS: Dict[str, Callable] = {
    "<": np.less,
    "<=": np.less_equal,
    ">": np.greater,
    ">=": np.greater_equal,
    "==": np.equal,
    "!=": np.not_equal,
}

# name -> (arity or None for variadic >= 1, implementation)
FUNCTIONS: Dict[str, Tuple[Optional[int], Optional[Callable]]] = {
    "exp": (1, np.exp),
    "abs": (1, np.abs),
    "sqrt": (1, np.sqrt),
    "log": (1, np.log),
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "ind": (1, None),
    "min": (None, None),
    "max": (None, None),
}


def _reduce(fn, values):
    result = values[0]
    for value in values[1:]:
        result = fn(result, value)
    return result


def _point_at(env: Mapping[str, np.ndarray], mask: np.ndarray, *others) -> Dict[str, float]:
    """Bindings of every variable at the first sample where mask holds."""
    arrays = {name: np.asarray(value, dtype=float) for name, value in env.items()}
    shape = np.broadcast_shapes(np.shape(mask), *(a.shape for a in arrays.values()), *(np.shape(o) for o in others))
    index = tuple(np.argwhere(np.broadcast_to(mask, shape))[0]) if shape else ()
    return {name: float(np.broadcast_to(a, shape)[index]) for name, a in arrays.items()}


# --- Parser ---

class _Parser:
    def __init__(self, source: str, variables: Sequence[str]):
        self.source = source
        self.variables = set(variables)
        self.tokens = tokenize(source)
        self.index = 0

    def peek(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.peek()
        if token.text != text:
            found = token.text or "end of input"
            raise ExpressionSyntaxError(f"Expected '{text}', found '{found}'", self.source, token.position)
        return self.advance()

    def accept(self, *texts: str) -> Optional[Token]:
        token = self.peek()
        if token.kind in ("op", "name") and token.text in texts:
            return self.advance()
        return None

    def parse(self) -> Node:
        if self.peek().kind == "end":
            raise ExpressionSyntaxError("Empty expression", self.source, 0)
        node = self.expr()
        token = self.peek()
        if token.kind != "end":
            raise ExpressionSyntaxError(f"Unexpected '{token.text}'", self.source, token.position)
        return node

    def expr(self) -> Node:
        node = self.conjunct()
        while self.accept("|", "or"):
            node = Logical("|", node, self.conjunct())
        return node

    def conjunct(self) -> Node:
        node = self.comparison()
        while self.accept("&", "and"):
            node = Logical("&", node, self.comparison())
        return node

    def comparison(self) -> Node:
        operands = [self.additive()]
        ops = []
        while (token := self.accept(*_COMPARATORS)) is not None:
            ops.append(token.text)
            operands.append(self.additive())
        if not ops:
            return operands[0]
        return Compare(tuple(operands), tuple(ops))

    def additive(self) -> Node:
        node = self.term()
        while (token := self.accept("+", "-")) is not None:
            node = Binary(token.text, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while (token := self.accept("*", "/")) is not None:
            node = Binary(token.text, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.accept("-"):
            return Negate(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        if self.accept("^", "**"):
            node = Binary("^", node, self.unary())
        return node

    def atom(self) -> Node:
        token = self.advance()
        if token.kind == "number":
            return Number(float(token.text))
        if token.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if token.kind == "name":
            name = NAME_ALIASES.get(token.text, token.text)
            if self.peek().text == "(":
                return self.call(name, token)
            if name in self.variables:
                return Variable(name)
            if name in CONSTANTS:
                return Number(CONSTANTS[name])
            raise ExpressionSyntaxError(f"Unknown name '{token.text}'", self.source, token.position)
        found = token.text or "end of input"
        raise ExpressionSyntaxError(f"Unexpected '{found}'", self.source, token.position)

    def call(self, name: str, token: Token) -> Node:
        if name not in FUNCTIONS:
            raise ExpressionSyntaxError(f"Unknown function '{token.text}'", self.source, token.position)
        self.expect("(")
        args = [self.expr()]
        while self.accept(","):
            args.append(self.expr())
        self.expect(")")
        arity = FUNCTIONS[name][0]
        if arity is not None and len(args) != arity:
            raise ExpressionSyntaxError(
                f"Function '{name}' takes {arity} argument(s), got {len(args)}", self.source, token.position
            )
        return Call(name, tuple(args))


@dataclass(frozen=True)
class Expression:
    """A parsed expression bound to an ordered tuple of variable names."""
    source: str
    variables: Tuple[str, ...]
    root: Node

    def evaluate(self, env: Mapping[str, object]) -> np.ndarray:
        missing = [name for name in self.variables if name not in env]
        if missing:
            raise ValueError(f"Missing value for variable(s) {missing} in '{self.source}'")
        arrays = {name: np.asarray(env[name], dtype=float) for name in self.variables}
        result = np.asarray(self.root.evaluate(arrays), dtype=float)
        shape = np.broadcast_shapes(result.shape, *(a.shape for a in arrays.values()))
        return np.broadcast_to(result, shape) if result.shape != shape else result

    def __call__(self, *args: object) -> np.ndarray:
        if len(args) != len(self.variables):
            raise TypeError(f"'{self.source}' takes {len(self.variables)} argument(s) {self.variables}, got {len(args)}")
        return self.evaluate(dict(zip(self.variables, args)))

    def scalar(self, **bindings: float) -> float:
        return float(self.evaluate(bindings))


def parse_expression(source: str, variables: Sequence[str]) -> Expression:
    """Parses source over the given variable names (aliases such as 'λ' map to 'lambda')."""
    if not isinstance(source, str):
        raise ExpressionSyntaxError("Expression must be a string", str(source), 0)
    canonical = tuple(NAME_ALIASES.get(v, v) for v in variables)
    root = _Parser(source, canonical).parse()
    return Expression(source, canonical, root)
