"""Coefficient expressions: parser, vectorized evaluator, Wirtinger derivatives.

Expressions are written over the ambient coordinates ``z1 .. zn`` and their
conjugates ``conj(zk)``, with real/complex constants, ``+ - * / ^``, ``exp``,
and a smooth radial cutoff ``bump(r0, r1, t)`` which equals 1 for t <= r0 and
0 for t >= r1 (standard exp(-1/t) gluing).  The variable ``normz`` denotes
the Euclidean norm of the full point.  The grammar is documented in the
repository README (EBNF).

Syntax trees are plain nested tuples, so expressions pickle cheaply and the
symbolic conjugate-derivative (`CoeffExpr.dbar`) returns a new tree.  Power
exponents must be constants.
"""

from __future__ import annotations

import re as _re

import numpy as np

from .errors import ExprError

__all__ = ["CoeffExpr", "parse_expr", "bump_value", "bump_dvalue"]


# ---------------------------------------------------------------------------
# smooth cutoff
# ---------------------------------------------------------------------------

def _psi(t):
    """exp(-1/t) for t > 0, else 0; vectorized and overflow-safe."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def _psi_prime(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        tp = t[pos]
        out[pos] = np.exp(-1.0 / tp) / (tp * tp)
    return out


def bump_value(r0: float, r1: float, r):
    """Smooth cutoff in the radius r: 1 for r <= r0, 0 for r >= r1."""
    if not r1 > r0:
        raise ExprError(f"bump requires r0 < r1, got ({r0}, {r1})")
    r = np.asarray(r, dtype=float)
    s = (r1 - r) / (r1 - r0)
    a = _psi(s)
    b = _psi(1.0 - s)
    out = np.empty_like(s)
    lo = s <= 0.0
    hi = s >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    out[mid] = a[mid] / (a[mid] + b[mid])
    return out if out.shape else float(out)


def bump_dvalue(r0: float, r1: float, r):
    """d/dr of bump_value(r0, r1, r)."""
    if not r1 > r0:
        raise ExprError(f"bump requires r0 < r1, got ({r0}, {r1})")
    r = np.asarray(r, dtype=float)
    width = r1 - r0
    s = (r1 - r) / width
    out = np.zeros_like(s)
    mid = (s > 0.0) & (s < 1.0)
    a = _psi(s[mid])
    b = _psi(1.0 - s[mid])
    ap = _psi_prime(s[mid])
    bp = _psi_prime(1.0 - s[mid])
    glue_prime = (ap * b + a * bp) / (a + b) ** 2
    out[mid] = -glue_prime / width
    return out if out.shape else float(out)


# ---------------------------------------------------------------------------
# AST constructors with light simplification
# ---------------------------------------------------------------------------

def _is_num(a, value=None):
    return a[0] == "num" and (value is None or a[1] == value)


def _num(c) -> tuple:
    return ("num", complex(c))


def _add(a, b):
    if _is_num(a) and _is_num(b):
        return _num(a[1] + b[1])
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    return ("add", a, b)


def _sub(a, b):
    if _is_num(a) and _is_num(b):
        return _num(a[1] - b[1])
    if _is_num(b, 0):
        return a
    if _is_num(a, 0):
        return ("neg", b)
    return ("sub", a, b)


def _neg(a):
    if _is_num(a):
        return _num(-a[1])
    if a[0] == "neg":
        return a[1]
    return ("neg", a)


def _mul(a, b):
    if _is_num(a) and _is_num(b):
        return _num(a[1] * b[1])
    if _is_num(a, 0) or _is_num(b, 0):
        return _num(0)
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    return ("mul", a, b)


def _div(a, b):
    if _is_num(b, 0):
        raise ExprError("division by constant zero")
    if _is_num(a, 0):
        return _num(0)
    if _is_num(a) and _is_num(b):
        return _num(a[1] / b[1])
    if _is_num(b, 1):
        return a
    return ("div", a, b)


def _pow(a, c):
    if c == 0:
        return _num(1)
    if c == 1:
        return a
    if _is_num(a):
        return _num(a[1] ** c)
    return ("pow", a, c)


def _conj(a):
    if _is_num(a):
        return _num(a[1].conjugate())
    if a[0] == "conj":
        return a[1]
    if a[0] == "normz":
        return a
    return ("conj", a)


# ---------------------------------------------------------------------------
# tokenizer / parser
# ---------------------------------------------------------------------------

_TOKEN = _re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)

_FUNCTIONS = {"exp", "conj", "re", "im", "abs", "sqrt", "bump"}


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise ExprError(f"unexpected character at: {text[pos:]!r}")
            break
        pos = m.end()
        if m.lastgroup:
            tokens.append((m.lastgroup, m.group(m.lastgroup)))
    tokens.append(("end", ""))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, op: str):
        kind, val = self.next()
        if kind != "op" or val != op:
            raise ExprError(f"expected {op!r} in {self.text!r}, got {val!r}")

    def parse(self):
        node = self.expr()
        kind, val = self.peek()
        if kind != "end":
            raise ExprError(f"trailing input {val!r} in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.next()
            rhs = self.term()
            node = _add(node, rhs) if op == "+" else _sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.next()
            rhs = self.unary()
            node = _mul(node, rhs) if op == "*" else _div(node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.next()
            return _neg(self.unary())
        if self.peek() == ("op", "+"):
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.next()
            exponent = self.unary()
            c = _const_value(exponent)
            return _pow(base, c)
        return base

    def atom(self):
        kind, val = self.next()
        if kind == "num":
            return _num(float(val))
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if val == "i":
                return _num(1j)
            if val == "pi":
                return _num(np.pi)
            if val == "normz":
                return ("normz",)
            m = _re.fullmatch(r"z(\d+)", val)
            if m:
                k = int(m.group(1))
                if k < 1:
                    raise ExprError(f"variable index must be >= 1: {val}")
                return ("z", k)
            if val in _FUNCTIONS:
                self.expect("(")
                args = [self.expr()]
                while self.peek() == ("op", ","):
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                return self.call(val, args)
            raise ExprError(f"unknown name {val!r} in {self.text!r}")
        raise ExprError(f"unexpected token {val!r} in {self.text!r}")

    def call(self, name: str, args: list):
        def arity(k):
            if len(args) != k:
                raise ExprError(f"{name} takes {k} argument(s), got {len(args)}")

        if name == "exp":
            arity(1)
            return ("exp", args[0])
        if name == "conj":
            arity(1)
            return _conj(args[0])
        if name == "re":
            arity(1)
            return _mul(_add(args[0], _conj(args[0])), _num(0.5))
        if name == "im":
            arity(1)
            return _div(_sub(args[0], _conj(args[0])), _num(2j))
        if name == "abs":
            arity(1)
            return _pow(_mul(args[0], _conj(args[0])), 0.5)
        if name == "sqrt":
            arity(1)
            return _pow(args[0], 0.5)
        if name == "bump":
            arity(3)
            r0 = _const_value(args[0])
            r1 = _const_value(args[1])
            if r0.imag or r1.imag:
                raise ExprError("bump radii must be real constants")
            if not r1.real > r0.real:
                raise ExprError("bump requires r0 < r1")
            return ("bump", r0.real, r1.real, args[2])
        raise ExprError(f"unknown function {name}")


def _const_value(node) -> complex:
    """Fold a constant subtree to a number (exponents, bump radii)."""
    if node[0] == "num":
        c = node[1]
        if c.imag == 0 and float(c.real).is_integer():
            return complex(int(c.real))
        return c
    raise ExprError("subexpression must be a constant")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _eval(node, z):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "z":
        k = node[1]
        if k > z.shape[-1]:
            raise ExprError(f"variable z{k} exceeds point dimension {z.shape[-1]}")
        return z[..., k - 1]
    if tag == "normz":
        return np.sqrt(np.sum(np.abs(z) ** 2, axis=-1))
    if tag == "add":
        return _eval(node[1], z) + _eval(node[2], z)
    if tag == "sub":
        return _eval(node[1], z) - _eval(node[2], z)
    if tag == "mul":
        return _eval(node[1], z) * _eval(node[2], z)
    if tag == "div":
        return _eval(node[1], z) / _eval(node[2], z)
    if tag == "neg":
        return -_eval(node[1], z)
    if tag == "pow":
        c = node[2]
        if c.imag == 0 and float(c.real).is_integer():
            return _eval(node[1], z) ** int(c.real)
        base = np.asarray(_eval(node[1], z), dtype=complex)
        return base ** c
    if tag == "exp":
        return np.exp(np.asarray(_eval(node[1], z), dtype=complex))
    if tag == "conj":
        return np.conjugate(_eval(node[1], z))
    if tag == "bump":
        arg = np.real(np.asarray(_eval(node[3], z)))
        return bump_value(node[1], node[2], arg)
    if tag == "bumpd":
        arg = np.real(np.asarray(_eval(node[3], z)))
        return bump_dvalue(node[1], node[2], arg)
    raise ExprError(f"bad node {tag!r}")


# ---------------------------------------------------------------------------
# Wirtinger derivatives
# ---------------------------------------------------------------------------

def _wirtinger(node, k: int):
    """Return (d node / d z_k, d node / d conj(z_k)) as syntax trees."""
    tag = node[0]
    if tag == "num":
        return _num(0), _num(0)
    if tag == "z":
        return (_num(1) if node[1] == k else _num(0)), _num(0)
    if tag == "normz":
        # normz = (sum z conj z)^{1/2}
        half = _div(_num(0.5), node)
        return _mul(half, _conj(("z", k))), _mul(half, ("z", k))
    if tag in ("add", "sub"):
        az, ab = _wirtinger(node[1], k)
        bz, bb = _wirtinger(node[2], k)
        op = _add if tag == "add" else _sub
        return op(az, bz), op(ab, bb)
    if tag == "neg":
        az, ab = _wirtinger(node[1], k)
        return _neg(az), _neg(ab)
    if tag == "mul":
        a, b = node[1], node[2]
        az, ab_ = _wirtinger(a, k)
        bz, bb = _wirtinger(b, k)
        return _add(_mul(az, b), _mul(a, bz)), _add(_mul(ab_, b), _mul(a, bb))
    if tag == "div":
        a, b = node[1], node[2]
        az, ab_ = _wirtinger(a, k)
        bz, bb = _wirtinger(b, k)
        b2 = _mul(b, b)
        return (_div(_sub(_mul(az, b), _mul(a, bz)), b2),
                _div(_sub(_mul(ab_, b), _mul(a, bb)), b2))
    if tag == "pow":
        a, c = node[1], node[2]
        az, ab_ = _wirtinger(a, k)
        factor = _mul(_num(c), _pow(a, c - 1))
        return _mul(factor, az), _mul(factor, ab_)
    if tag == "exp":
        az, ab_ = _wirtinger(node[1], k)
        return _mul(node, az), _mul(node, ab_)
    if tag == "conj":
        az, ab_ = _wirtinger(node[1], k)
        return _conj(ab_), _conj(az)
    if tag == "bump":
        # evaluated on re(arg); chain rule through the real part
        r0, r1, a = node[1], node[2], node[3]
        az, ab_ = _wirtinger(a, k)
        deriv = ("bumpd", r0, r1, a)
        half = _num(0.5)
        dz = _mul(deriv, _mul(half, _add(az, _conj(ab_))))
        db = _mul(deriv, _mul(half, _add(ab_, _conj(az))))
        return dz, db
    if tag == "bumpd":
        raise ExprError("second derivatives of bump are not supported")
    raise ExprError(f"bad node {tag!r}")


def _max_index(node) -> int:
    tag = node[0]
    if tag == "z":
        return node[1]
    if tag in ("num", "normz"):
        return 0
    if tag in ("bump", "bumpd"):
        return _max_index(node[3])
    if tag == "pow":
        return _max_index(node[1])
    return max((_max_index(c) for c in node[1:] if isinstance(c, tuple)), default=0)


class CoeffExpr:
    """A parsed coefficient expression, callable on points of C^n.

    Calls accept a single point of shape (n,) or a batch (..., n) and return
    a complex scalar or an array of the batch shape.
    """

    def __init__(self, ast, source: str | None = None):
        self.ast = ast
        self.source = source

    @classmethod
    def parse(cls, text: str) -> "CoeffExpr":
        return cls(_Parser(text).parse(), source=text)

    @property
    def max_index(self) -> int:
        return _max_index(self.ast)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if z.ndim == 0:
            z = z.reshape(1)
        out = _eval(self.ast, z)
        out = np.asarray(out, dtype=complex)
        batch = z.shape[:-1]
        if out.shape != batch:
            out = np.broadcast_to(out, batch)
        if batch == ():
            return complex(out)
        return np.array(out)

    def dz(self, k: int) -> "CoeffExpr":
        """Holomorphic Wirtinger derivative d/dz_k."""
        return CoeffExpr(_wirtinger(self.ast, k)[0])

    def dbar(self, k: int) -> "CoeffExpr":
        """Antiholomorphic Wirtinger derivative d/d conj(z_k)."""
        return CoeffExpr(_wirtinger(self.ast, k)[1])

    def is_zero(self) -> bool:
        return _is_num(self.ast, 0)

    def __repr__(self):
        if self.source is not None:
            return f"CoeffExpr({self.source!r})"
        return f"CoeffExpr(<tree>, vars<= {self.max_index})"


def parse_expr(text: str) -> CoeffExpr:
    return CoeffExpr.parse(text)


def combine(terms) -> CoeffExpr:
    """Linear combination sum_i c_i * f_i of CoeffExpr instances."""
    ast = _num(0)
    for c, f in terms:
        ast = _add(ast, _mul(_num(c), f.ast))
    return CoeffExpr(ast)


def const_expr(c) -> CoeffExpr:
    return CoeffExpr(_num(c))
