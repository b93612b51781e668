"""Text front end for the expression kernel.

Accepted grammar (whitespace-insensitive):

    expr   :=  term  (('+' | '-') term)*
    term   :=  factor (('*' | '/') factor)*
    factor :=  ('-' | '+') factor  |  power
    power  :=  atom ('^' factor)?          (right-associative)
    atom   :=  INT  |  ident  |  ident '(' expr {',' expr} ')'  |  '(' expr ')'

Identifiers: t, x, z are coordinates; u is the dependent variable; ep is
the group parameter (a variable, so exp(3*ep) is accepted); u_ plus
a word over {t,x,z} is a jet (order-insensitive: u_xz == u_zx).  Calls:
f/fp/fpp/F (a function of u and its derivatives/antiderivative), lam and
eps (functions of t), b(t,x,z), U/Up/Upp (a function of the reduced
coordinate), exp, ln.  Any other bare identifier becomes a parameter.
Rationals are written with '/': 1/2.  Exponents must be rational
constants, except that a parameter-only exponent on a bare t or u is
accepted as a symbolic power.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .expr import (Expression, KernelError, const, exp_of, jet, ln_of, opaque,
                   opaque_field, param, spow, var)

_TOKEN = re.compile(r'\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*)|([()+\-*/^,]))')

_CALL_DERIV = {'f': ('f', 0), 'fp': ('f', 1), 'fpp': ('f', 2), 'F': ('f', -1),
               'U': ('U', 0), 'Up': ('U', 1), 'Upp': ('U', 2)}


class ParseError(ValueError):
    pass


def _tokenize(s):
    out = []
    pos = 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            if s[pos:].strip() == '':
                break
            raise ParseError('bad character %r at position %d' % (s[pos], pos))
        pos = m.end()
        if m.group(1):
            out.append(('int', int(m.group(1))))
        elif m.group(2):
            out.append(('name', m.group(2)))
        elif m.group(3):
            out.append(('op', '^'))
        else:
            out.append(('op', m.group(4)))
    out.append(('end', None))
    return out


class _Parser:
    def __init__(self, tokens, cap):
        self.toks = tokens
        self.i = 0
        self.cap = cap

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op):
        kind, val = self.take()
        if kind != 'op' or val != op:
            raise ParseError('expected %r, got %r' % (op, val))

    def parse_expr(self):
        e = self.parse_term()
        while True:
            kind, val = self.peek()
            if kind == 'op' and val in '+-':
                self.take()
                rhs = self.parse_term()
                e = e + rhs if val == '+' else e - rhs
            else:
                return e

    def parse_term(self):
        e = self.parse_factor()
        while True:
            kind, val = self.peek()
            if kind == 'op' and val in '*/':
                self.take()
                rhs = self.parse_factor()
                try:
                    e = e * rhs if val == '*' else e / rhs
                except (KernelError, ZeroDivisionError) as err:
                    raise ParseError(str(err))
            else:
                return e

    def parse_factor(self):
        kind, val = self.peek()
        if kind == 'op' and val in '+-':
            self.take()
            f = self.parse_factor()
            return f if val == '+' else -f
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        kind, val = self.peek()
        if kind == 'op' and val == '^':
            self.take()
            exponent = self.parse_factor()
            try:
                if exponent.is_rational():
                    return base ** exponent.as_fraction()
                return spow(base, exponent)
            except KernelError as err:
                raise ParseError(str(err))
        return base

    def parse_atom(self):
        kind, val = self.take()
        if kind == 'int':
            return const(val)
        if kind == 'op' and val == '(':
            e = self.parse_expr()
            self.expect(')')
            return e
        if kind == 'name':
            nkind, nval = self.peek()
            if nkind == 'op' and nval == '(':
                self.take()
                args = [self.parse_expr()]
                while True:
                    k2, v2 = self.peek()
                    if k2 == 'op' and v2 == ',':
                        self.take()
                        args.append(self.parse_expr())
                    else:
                        break
                self.expect(')')
                return self._call(val, args)
            return self._ident(val)
        raise ParseError('unexpected token %r' % (val,))

    def _ident(self, name):
        if name in ('t', 'x', 'z', 'y', 'ep'):
            return var(name)
        if name == 'u':
            return jet(0, 0, 0)
        if name.startswith('u_'):
            word = name[2:]
            if word and all(ch in 'txz' for ch in word):
                if self.cap is not None and len(word) > self.cap:
                    raise ParseError('jet %s exceeds derivative cap %d'
                                     % (name, self.cap))
                return jet(word.count('t'), word.count('x'), word.count('z'))
        return param(name)

    def _call(self, name, args):
        if name == 'exp':
            if len(args) != 1:
                raise ParseError('exp takes one argument')
            try:
                return exp_of(args[0])
            except KernelError as err:
                raise ParseError(str(err))
        if name == 'ln':
            if len(args) != 1:
                raise ParseError('ln takes one argument')
            try:
                return ln_of(args[0])
            except KernelError:
                raise ParseError('ln argument must be a bare symbol')
        if name == 'b':
            if args != [var('t'), var('x'), var('z')]:
                raise ParseError('b takes arguments (t, x, z)')
            return opaque_field('b')
        if name in ('lam', 'eps'):
            if len(args) != 1 or args[0] != var('t'):
                raise ParseError('%s takes the single argument t' % name)
            return opaque(name, 0)
        if name in _CALL_DERIV:
            oname, k = _CALL_DERIV[name]
            if len(args) != 1:
                raise ParseError('%s takes one argument' % name)
            try:
                return opaque(oname, k, arg=args[0])
            except KernelError as err:
                raise ParseError(str(err))
        raise ParseError('unknown function %r' % name)


def parse(text, cap=4):
    """Parse a string into an Expression.  Jets above `cap` derivatives
    are rejected; pass cap=None to lift the limit."""
    p = _Parser(_tokenize(text), cap)
    e = p.parse_expr()
    kind, _ = p.peek()
    if kind != 'end':
        raise ParseError('trailing input at token %d' % p.i)
    return e
