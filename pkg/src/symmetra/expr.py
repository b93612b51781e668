"""Exact symbolic kernel: Laurent expressions over typed atoms.

Everything downstream (prolongation, determining equations, adjoint
tables, reductions) runs on a single expression type.  An Expression is a
finite Fraction-linear combination of monomials; a monomial maps atoms to
rational exponents, and negative or fractional exponents are permitted.
The atom kinds:

  ('v', name)            coordinate variables (t, x, z, later y, zeta, ...)
  ('p', name)            scalar parameters, kept exact and unevaluated
  ('j', (nt, nx, nz))    jet coordinates: derivatives of the dependent
                         variable u; (0, 0, 0) is u itself
  ('o', name, dcnt, arg) opaque function symbols with a derivative counter;
                         dcnt is (k,) for one-argument functions (k = -1 is
                         an antiderivative) and (kt, kx, kz) for fields
                         over (t, x, z); arg is None for the registered
                         canonical argument, or an Expression
  ('ln', base)           natural log of a bare atom (usually u)
  ('sp', base, e)        base ** e for a non-rational, parameter-only
                         exponent Expression; the rational part of an
                         exponent always lives in the plain monomial slot
  ('e', base, c)         exp(c * base), c a parameter-only Expression

Expressions are immutable and hashable, so they can sit inside atoms
(opaque arguments, symbolic exponents) without a separate scalar type.

Derivatives come in two flavours.  `partial` differentiates with respect
to one coordinate of jet space (a var, jet, or param) and chains through
the explicit functional dependencies of opaque/ln/sp/e atoms.
`total_derivative` is D_t, D_x, or D_z on jet space, which additionally
shifts every jet one step in the given direction; a jet-order cap makes
runaway differentiation fail loudly rather than explode silently.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cmp_to_key

import numpy as np

_F = Fraction

_RANK = {'v': 0, 'p': 1, 'j': 2, 'o': 3, 'ln': 4, 'sp': 5, 'e': 6}

# canonical arguments of the registered one-argument opaque symbols
_OPAQUE_ARG = {
    'f': ('j', (0, 0, 0)),
    'lam': ('v', 't'),
    'eps': ('v', 't'),
    'U': ('v', 'y'),
}


class KernelError(Exception):
    pass


class JetCapError(KernelError):
    """A total derivative pushed a jet past the allowed order."""


def _atom_str(a):
    k = a[0]
    if k == 'v':
        return 'v:' + a[1]
    if k == 'p':
        return 'p:' + a[1]
    if k == 'j':
        return 'j:%d.%d.%d' % a[1]
    if k == 'o':
        arg = a[3]
        s = '~' if arg is None else arg.keystr()
        return 'o:%s:%s:%s' % (a[1], ','.join(map(str, a[2])), s)
    if k == 'ln':
        return 'ln:' + _atom_str(a[1])
    if k == 'sp':
        return 'sp:%s:%s' % (_atom_str(a[1]), a[2].keystr())
    if k == 'e':
        return 'e:%s:%s' % (_atom_str(a[1]), a[2].keystr())
    raise KernelError('unknown atom kind %r' % (k,))


def _akey(a):
    return (_RANK[a[0]], _atom_str(a))


def _normalize_mono(items):
    """items: iterable of (atom, Fraction exponent).  Returns a canonical
    monomial tuple: same-base sp/e atoms merged, rational exponent parts
    folded onto the bare base, zero exponents dropped, atoms sorted."""
    plain = {}
    sp_acc = {}
    e_acc = {}
    for a, k in items:
        if k == 0:
            continue
        if a[0] == 'sp':
            sp_acc[a[1]] = sp_acc.get(a[1], ZERO) + a[2] * k
        elif a[0] == 'e':
            e_acc[a[1]] = e_acc.get(a[1], ZERO) + a[2] * k
        else:
            plain[a] = plain.get(a, _F(0)) + k
    for b, ex in sp_acc.items():
        c0 = ex.rational_part()
        rest = ex - c0
        if c0:
            plain[b] = plain.get(b, _F(0)) + c0
        if not rest.is_zero():
            a = ('sp', b, rest)
            plain[a] = plain.get(a, _F(0)) + 1
    for b, c in e_acc.items():
        if not c.is_zero():
            a = ('e', b, c)
            plain[a] = plain.get(a, _F(0)) + 1
    out = [(a, k) for a, k in plain.items() if k != 0]
    out.sort(key=lambda ak: _akey(ak[0]))
    return tuple(out)


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    return _normalize_mono(list(m1) + list(m2))


def _mono_pow(m, k):
    return _normalize_mono([(a, e * k) for a, e in m])


def _mono_cmp(m1, m2):
    """Graded, then atom-lexicographic order.  Multiplicative on the
    monomial group, which is what exact division needs."""
    diff = {}
    for a, k in m1:
        diff[a] = diff.get(a, _F(0)) + k
    for a, k in m2:
        diff[a] = diff.get(a, _F(0)) - k
    diff = {a: k for a, k in diff.items() if k != 0}
    if not diff:
        return 0
    g = sum(diff.values())
    if g != 0:
        return 1 if g > 0 else -1
    a = min(diff, key=_akey)
    return 1 if diff[a] > 0 else -1


def _as_frac(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return _F(c)
    raise KernelError('expected an exact rational, got %r' % (c,))


class Expression:
    __slots__ = ('_d', '_hash', '_keystr')

    def __init__(self, d=None):
        dd = {}
        if d:
            for m, c in d.items():
                c = _as_frac(c)
                if c:
                    dd[m] = c
        self._d = dd
        self._hash = None
        self._keystr = None

    # -- basics ------------------------------------------------------

    def is_zero(self):
        return not self._d

    def __bool__(self):
        return bool(self._d)

    def terms(self):
        """Canonically ordered (monomial, coefficient) pairs, leading first."""
        ms = sorted(self._d, key=cmp_to_key(_mono_cmp), reverse=True)
        return [(m, self._d[m]) for m in ms]

    def leading(self):
        if not self._d:
            raise KernelError('zero expression has no leading term')
        m = max(self._d, key=cmp_to_key(_mono_cmp))
        return m, self._d[m]

    def n_terms(self):
        return len(self._d)

    def rational_part(self):
        return self._d.get((), _F(0))

    def is_rational(self):
        return not self._d or (len(self._d) == 1 and () in self._d)

    def as_fraction(self):
        if not self.is_rational():
            raise KernelError('not a rational constant: %s' % self)
        return self._d.get((), _F(0))

    def is_param_only(self):
        return all(a[0] == 'p' for m in self._d for a, _ in m)

    def single_atom_key(self):
        """The atom key when self is exactly one bare atom; else raises."""
        if len(self._d) == 1:
            (m, c), = self._d.items()
            if c == 1 and len(m) == 1 and m[0][1] == 1:
                return m[0][0]
        raise KernelError('expected a bare atom, got %s' % self)

    def free_atoms(self, recursive=False):
        out = set()
        stack = [self]
        while stack:
            e = stack.pop()
            for m in e._d:
                for a, _ in m:
                    out.add(a)
                    if recursive:
                        if a[0] == 'o' and a[3] is not None:
                            stack.append(a[3])
                        elif a[0] in ('sp', 'e'):
                            stack.append(a[2])
        return out

    def max_jet_order(self):
        best = -1
        for m in self._d:
            for a, _ in m:
                if a[0] == 'j':
                    best = max(best, sum(a[1]))
        return best

    # -- hashing / equality -------------------------------------------

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._d.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = const(other)
        if not isinstance(other, Expression):
            return NotImplemented
        return self._d == other._d

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def keystr(self):
        if self._keystr is None:
            parts = []
            for m, c in self.terms():
                parts.append('%s@%s' % (c, ','.join(
                    '%s^%s' % (_atom_str(a), k) for a, k in m)))
            self._keystr = '|'.join(parts)
        return self._keystr

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = const(other)
        if not isinstance(other, Expression):
            return NotImplemented
        d = dict(self._d)
        for m, c in other._d.items():
            s = d.get(m, _F(0)) + c
            if s:
                d[m] = s
            elif m in d:
                del d[m]
        out = Expression()
        out._d = d
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Expression()
        out._d = {m: -c for m, c in self._d.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = const(other)
        if not isinstance(other, Expression):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_frac(other)
            if not c:
                return ZERO
            out = Expression()
            out._d = {m: cc * c for m, cc in self._d.items()}
            return out
        if not isinstance(other, Expression):
            return NotImplemented
        d = {}
        for m1, c1 in self._d.items():
            for m2, c2 in other._d.items():
                m = _mono_mul(m1, m2)
                s = d.get(m, _F(0)) + c1 * c2
                if s:
                    d[m] = s
                elif m in d:
                    del d[m]
        out = Expression()
        out._d = d
        return out

    __rmul__ = __mul__

    def __pow__(self, n):
        if isinstance(n, Expression):
            n = n.as_fraction()
        n = _as_frac(n) if not isinstance(n, Fraction) else n
        if n == 0:
            return ONE
        if n.denominator == 1 and n > 0:
            k = n.numerator
            acc, base = ONE, self
            while k:
                if k & 1:
                    acc = acc * base
                base = base * base
                k >>= 1
            return acc
        # negative or fractional powers need a single monomial
        if len(self._d) != 1:
            raise KernelError('cannot raise a sum to power %s' % n)
        (m, c), = self._d.items()
        if n.denominator != 1 and c != 1:
            raise KernelError('fractional power of coefficient %s' % c)
        cc = c ** n if n.denominator == 1 else _F(1)
        out = Expression()
        out._d = {_mono_pow(m, n): cc}
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_frac(other)
            if not c:
                raise ZeroDivisionError
            return self * (_F(1) / c)
        if isinstance(other, Expression):
            if other.is_rational():
                return self / other.as_fraction()
            return self * other ** _F(-1)
        return NotImplemented

    def __rtruediv__(self, other):
        return _as_expr(other) / self

    # -- calculus ------------------------------------------------------

    def partial(self, key):
        """Partial derivative with respect to the jet-space coordinate
        `key` (a var, jet, or param atom key), chaining through the
        explicit dependencies of function-like atoms."""
        d = {}
        for m, c in self._d.items():
            for i, (a, k) in enumerate(m):
                da = _atom_partial(a, key)
                if da is None or da.is_zero():
                    continue
                rest = list(m)
                if k == 1:
                    del rest[i]
                else:
                    rest[i] = (a, k - 1)
                piece = Expression({_normalize_mono(rest): c * k}) * da
                for mm, cc in piece._d.items():
                    s = d.get(mm, _F(0)) + cc
                    if s:
                        d[mm] = s
                    elif mm in d:
                        del d[mm]
        out = Expression()
        out._d = d
        return out

    def total_derivative(self, coord, cap=None):
        """Total derivative D_coord on jet space.  coord is a var name;
        jets shift for 't', 'x', 'z'.  Raises JetCapError past `cap`."""
        d = {}
        for m, c in self._d.items():
            for i, (a, k) in enumerate(m):
                da = _atom_total(a, coord, cap)
                if da is None or da.is_zero():
                    continue
                rest = list(m)
                if k == 1:
                    del rest[i]
                else:
                    rest[i] = (a, k - 1)
                piece = Expression({_normalize_mono(rest): c * k}) * da
                for mm, cc in piece._d.items():
                    s = d.get(mm, _F(0)) + cc
                    if s:
                        d[mm] = s
                    elif mm in d:
                        del d[mm]
        out = Expression()
        out._d = d
        return out

    # -- substitution ---------------------------------------------------

    def transform(self, fn):
        """Rebuild the expression, mapping atoms through `fn`.  fn(atom)
        returns a replacement Expression or None to keep the atom.  Nested
        expressions (opaque args, sp/e slots) are transformed first."""
        out = ZERO
        for m, c in self._d.items():
            term = const(c)
            for a, k in m:
                av = _atom_apply(a, fn)
                term = term * av ** k
            out = out + term
        return out

    def substitute_var(self, name, value):
        value = _as_expr(value)
        key = ('v', name)
        return self.transform(lambda a: value if a == key else None)

    def substitute_param(self, name, value):
        value = _as_expr(value)
        key = ('p', name)
        return self.transform(lambda a: value if a == key else None)

    def substitute_params(self, mapping):
        out = self
        for name, value in mapping.items():
            out = out.substitute_param(name, value)
        return out

    def substitute_opaque(self, name, builder):
        """Replace every occurrence of the one-argument opaque `name`.
        builder(k, arg) -> Expression for the k-th derivative evaluated at
        the Expression `arg` (k may be negative for antiderivatives)."""
        def fn(a):
            if a[0] == 'o' and a[1] == name and len(a[2]) == 1:
                arg = a[3]
                if arg is None:
                    arg = Expression({((_OPAQUE_ARG[name], _F(1)),): _F(1)})
                return builder(a[2][0], arg)
            return None
        return self.transform(fn)

    def substitute(self, atom, value, with_consequences=False, cap=None):
        """Replace an atom by an Expression.  For a jet atom with
        with_consequences=True, every jet u_K with K >= J componentwise is
        replaced by the (K-J)-th total derivative of `value`, re-applying
        the substitution after each D_t so mixed orders resolve.  Supported
        consequence patterns: J = (0,0,0) with a jet-free value, and
        J = (k,0,0); `value` must contain no jet >= J."""
        value = _as_expr(value)
        if atom[0] in ('v', 'p'):
            return self.transform(lambda a: value if a == atom else None)
        if atom[0] == 'j':
            if not with_consequences:
                return self.transform(lambda a: value if a == atom else None)
            return _subst_jet_consequences(self, atom[1], value, cap)
        raise KernelError('cannot substitute atom %r' % (atom,))

    # -- splitting / numerics -------------------------------------------

    def split_by_nonparam(self):
        """Group terms by their non-parameter monomial part.  Returns a
        dict: nonparam monomial tuple -> parameter-only Expression."""
        out = {}
        for m, c in self._d.items():
            pm, om = [], []
            for a, k in m:
                (pm if a[0] == 'p' else om).append((a, k))
            key = tuple(om)
            cur = out.get(key, ZERO)
            out[key] = cur + Expression({tuple(pm): c})
        return out

    def primitive(self):
        """(content, primitive): content * primitive == self, primitive has
        coprime integer coefficients and a positive leading one."""
        if not self._d:
            return _F(0), ZERO
        from math import gcd
        num = 0
        den = 1
        for c in self._d.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        content = _F(num, den)
        lead = self.leading()[1]
        if lead < 0:
            content = -content
        prim = self * (_F(1) / content)
        return content, prim

    def evaluate(self, env):
        """Numeric evaluation.  env maps var/param names to scalars or
        numpy arrays, ('j', J) (or 'u' for the base jet) to arrays, and
        ('o', name) to callables fn(deriv_tuple, *arg_values)."""
        out = 0.0
        for m, c in self._d.items():
            v = float(c)
            for a, k in m:
                base = _atom_eval(a, env)
                kw = float(k)
                v = v * (base ** kw if kw != 1.0 else base)
            out = out + v
        return out

    # -- display ---------------------------------------------------------

    def __str__(self):
        if not self._d:
            return '0'
        parts = []
        for m, c in self.terms():
            s = _term_str(m, c)
            if not parts:
                parts.append(s)
            elif s.startswith('-'):
                parts.append('- ' + s[1:])
            else:
                parts.append('+ ' + s)
        return ' '.join(parts)

    def __repr__(self):
        return 'Expression(%s)' % self


def _term_str(m, c):
    apieces = []
    for a, k in m:
        s = _atom_display(a)
        if k != 1:
            ks = str(k)
            if '/' in ks or k < 0:
                ks = '(%s)' % ks
            s += '^' + ks
        apieces.append(s)
    body = '*'.join(apieces)
    if not body:
        return str(c) if c.denominator == 1 else '(%s)' % c
    if c == 1:
        return body
    if c == -1:
        return '-' + body
    cs = str(c) if c.denominator == 1 else '(%s)' % c
    return cs + '*' + body


def _atom_display(a):
    k = a[0]
    if k in ('v', 'p'):
        return a[1]
    if k == 'j':
        nt, nx, nz = a[1]
        if nt == nx == nz == 0:
            return 'u'
        return 'u_' + 't' * nt + 'x' * nx + 'z' * nz
    if k == 'ln':
        return 'ln(%s)' % _atom_display(a[1])
    if k == 'o':
        name, deriv, arg = a[1], a[2], a[3]
        if len(deriv) == 3:
            sub = 't' * deriv[0] + 'x' * deriv[1] + 'z' * deriv[2]
            return '%s%s(t,x,z)' % (name, '_' + sub if sub else '')
        kk = deriv[0]
        if 0 <= kk <= 3:
            nm = name + "'" * kk
        else:
            nm = '%s^(%d)' % (name, kk)
        if arg is None:
            args = _atom_display(_OPAQUE_ARG.get(name, ('v', '?')))
        else:
            args = str(arg)
        return '%s(%s)' % (nm, args)
    if k == 'sp':
        return '%s^(%s)' % (_atom_display(a[1]), a[2])
    if k == 'e':
        return 'exp(%s)' % str(a[2] * Expression({((a[1], _F(1)),): _F(1)}))
    raise KernelError('unknown atom kind %r' % (k,))


# -- atom derivative tables ------------------------------------------------

_E_T = {'t': (1, 0, 0), 'x': (0, 1, 0), 'z': (0, 0, 1)}


def _bump_jet(J, coord, cap):
    e = _E_T[coord]
    K = (J[0] + e[0], J[1] + e[1], J[2] + e[2])
    if cap is not None and sum(K) > cap:
        raise JetCapError('jet order %d exceeds cap %d' % (sum(K), cap))
    return K


def _atom_expr(a):
    return Expression({((a, _F(1)),): _F(1)})


def _atom_partial(a, key):
    k = a[0]
    if a == key:
        return ONE
    if k in ('v', 'p', 'j'):
        return None
    if k == 'ln':
        db = _atom_partial(a[1], key)
        if db is None or db.is_zero():
            return None
        return _atom_expr(a[1]) ** _F(-1) * db
    if k == 'o':
        name, deriv, arg = a[1], a[2], a[3]
        if len(deriv) == 3:
            if key[0] == 'v' and key[1] in _E_T:
                e = _E_T[key[1]]
                nd = (deriv[0] + e[0], deriv[1] + e[1], deriv[2] + e[2])
                return _atom_expr(('o', name, nd, arg))
            return None
        bumped = _atom_expr(('o', name, (deriv[0] + 1,), arg))
        if arg is None:
            return bumped if key == _OPAQUE_ARG[name] else None
        da = arg.partial(key)
        return None if da.is_zero() else bumped * da
    if k == 'sp':
        db = _atom_partial(a[1], key)
        if db is None or db.is_zero():
            return None
        return a[2] * _atom_expr(a) * _atom_expr(a[1]) ** _F(-1) * db
    if k == 'e':
        db = _atom_partial(a[1], key)
        if db is None or db.is_zero():
            return None
        return a[2] * _atom_expr(a) * db
    raise KernelError('unknown atom kind %r' % (k,))


def _atom_total(a, coord, cap):
    k = a[0]
    if k == 'v':
        return ONE if a[1] == coord else None
    if k == 'p':
        return None
    if k == 'j':
        if coord in _E_T:
            return _atom_expr(('j', _bump_jet(a[1], coord, cap)))
        return None
    if k == 'ln':
        db = _atom_total(a[1], coord, cap)
        if db is None or db.is_zero():
            return None
        return _atom_expr(a[1]) ** _F(-1) * db
    if k == 'o':
        name, deriv, arg = a[1], a[2], a[3]
        if len(deriv) == 3:
            if coord in _E_T:
                e = _E_T[coord]
                nd = (deriv[0] + e[0], deriv[1] + e[1], deriv[2] + e[2])
                return _atom_expr(('o', name, nd, arg))
            return None
        bumped = _atom_expr(('o', name, (deriv[0] + 1,), arg))
        if arg is None:
            da = _atom_total(_OPAQUE_ARG[name], coord, cap)
        else:
            da = arg.total_derivative(coord, cap)
            da = None if da.is_zero() else da
        return None if da is None else bumped * da
    if k == 'sp':
        db = _atom_total(a[1], coord, cap)
        if db is None or db.is_zero():
            return None
        return a[2] * _atom_expr(a) * _atom_expr(a[1]) ** _F(-1) * db
    if k == 'e':
        db = _atom_total(a[1], coord, cap)
        if db is None or db.is_zero():
            return None
        return a[2] * _atom_expr(a) * db
    raise KernelError('unknown atom kind %r' % (k,))


def _atom_apply(a, fn):
    """Transform helper: rebuild nested slots, then offer the atom to fn."""
    k = a[0]
    if k == 'o' and a[3] is not None:
        a2 = ('o', a[1], a[2], a[3].transform(fn))
        direct = fn(a2)
        return direct if direct is not None else _atom_expr(a2)
    if k == 'ln':
        direct = fn(a)
        if direct is not None:
            return direct
        bv = _atom_apply(a[1], fn)
        return ln_of(bv)
    if k == 'sp':
        ne = a[2].transform(fn)
        direct = fn(('sp', a[1], ne))
        if direct is not None:
            return direct
        return spow(_atom_apply(a[1], fn), ne)
    if k == 'e':
        nc = a[2].transform(fn)
        direct = fn(('e', a[1], nc))
        if direct is not None:
            return direct
        bv = _atom_apply(a[1], fn)
        if nc.is_param_only():
            try:
                bkey = bv.single_atom_key()
            except KernelError:
                bkey = None
            if bkey is not None:
                return exp_atom(bkey, nc)
        return exp_of(nc * bv)
    direct = fn(a)
    if direct is not None:
        return direct
    return _atom_expr(a)


def _subst_jet_consequences(expr, J, value, cap):
    if any(_covers(K, J) for K in _jets_of(value)):
        raise KernelError('substitution value contains a jet above %r' % (J,))
    if J[1] or J[2]:
        raise KernelError('consequence substitution supports J = (k,0,0) '
                          'or (0,0,0), got %r' % (J,))
    memo = {J: value}

    def rep(K):
        got = memo.get(K)
        if got is not None:
            return got
        for idx, cname in ((1, 'x'), (2, 'z'), (0, 't')):
            if K[idx] > J[idx]:
                Km = list(K)
                Km[idx] -= 1
                base = rep(tuple(Km))
                d = base.total_derivative(cname, cap)
                d = sweep(d)
                memo[K] = d
                return d
        raise KernelError('unreachable jet %r' % (K,))

    def sweep(e):
        def fn(a):
            if a[0] == 'j' and _covers(a[1], J):
                return rep(a[1])
            return None
        return e.transform(fn)

    return sweep(expr)


def _covers(K, J):
    return K[0] >= J[0] and K[1] >= J[1] and K[2] >= J[2]


def _jets_of(e):
    return [a[1] for m in e._d for a, _ in m if a[0] == 'j']


# -- numeric atom evaluation -------------------------------------------------

def _atom_eval(a, env):
    k = a[0]
    if k in ('v', 'p'):
        try:
            return env[a[1]]
        except KeyError:
            raise KernelError('no numeric binding for %r' % (a[1],))
    if k == 'j':
        if a in env:
            return env[a]
        if ('j', a[1]) in env:
            return env[('j', a[1])]
        if a[1] == (0, 0, 0) and 'u' in env:
            return env['u']
        raise KernelError('no numeric binding for jet %r' % (a[1],))
    if k == 'ln':
        return np.log(_atom_eval(a[1], env))
    if k == 'o':
        name, deriv, arg = a[1], a[2], a[3]
        fn = env.get(('o', name)) or env.get(name)
        if fn is None:
            raise KernelError('no callable bound for opaque %r' % (name,))
        if len(deriv) == 3:
            return fn(deriv, env['t'], env['x'], env['z'])
        if arg is None:
            argv = _atom_eval(_OPAQUE_ARG[name], env)
        else:
            argv = arg.evaluate(env)
        return fn(deriv, argv)
    if k == 'sp':
        return _atom_eval(a[1], env) ** a[2].evaluate(env)
    if k == 'e':
        return np.exp(a[2].evaluate(env) * _atom_eval(a[1], env))
    raise KernelError('unknown atom kind %r' % (k,))


# -- constructors -------------------------------------------------------------

def const(c):
    c = _as_frac(c)
    return Expression({(): c}) if c else ZERO


def _as_expr(v):
    if isinstance(v, Expression):
        return v
    return const(v)


def var(name):
    return _atom_expr(('v', name))


def param(name):
    return _atom_expr(('p', name))


def jet(nt, nx, nz):
    for n in (nt, nx, nz):
        if n < 0:
            raise KernelError('negative jet index')
    return _atom_expr(('j', (nt, nx, nz)))


def u_jet(word=''):
    """Jet from a derivative word over {t, x, z}: u_jet('xxz') = u_xxz."""
    nt = word.count('t')
    nx = word.count('x')
    nz = word.count('z')
    if nt + nx + nz != len(word):
        raise KernelError('bad jet word %r' % word)
    return jet(nt, nx, nz)


def opaque(name, deriv=0, arg=None):
    if arg is not None:
        arg = _as_expr(arg)
        canon = _OPAQUE_ARG.get(name)
        if canon is not None and arg == _atom_expr(canon):
            arg = None
    elif name not in _OPAQUE_ARG:
        raise KernelError('opaque %r has no canonical argument; pass arg='
                          % (name,))
    return _atom_expr(('o', name, (deriv,), arg))


def opaque_field(name, dt=0, dx=0, dz=0):
    """Opaque scalar field over (t, x, z), e.g. the free component of an
    infinite symmetry family."""
    return _atom_expr(('o', name, (dt, dx, dz), None))


def ln_u():
    return _atom_expr(('ln', ('j', (0, 0, 0))))


def ln_of(base):
    base = _as_expr(base)
    return _atom_expr(('ln', base.single_atom_key()))


def spow(base, exponent):
    """base ** exponent with a parameter-only exponent Expression.  The
    rational part of the exponent folds onto a plain power of the base."""
    base = _as_expr(base)
    exponent = _as_expr(exponent)
    if exponent.is_rational():
        return base ** exponent.as_fraction()
    if not exponent.is_param_only():
        raise KernelError('symbolic exponent must be parameter-only')
    bkey = base.single_atom_key()
    if bkey[0] not in ('v', 'j', 'o'):
        raise KernelError('symbolic power base must be a var, jet, or '
                          'opaque symbol')
    c0 = exponent.rational_part()
    rest = exponent - c0
    out = _atom_expr(('sp', bkey, rest))
    if c0:
        out = out * base ** c0
    return out


def exp_atom(base_key, coeff):
    """exp(coeff * base) for an explicit base atom key.  Needed when the
    base itself is a parameter (e.g. a group parameter), where exp_of
    could not split base from coefficient."""
    coeff = _as_expr(coeff)
    if coeff.is_zero():
        return ONE
    if not coeff.is_param_only():
        raise KernelError('exponential coefficient must be parameter-only')
    return _atom_expr(('e', base_key, coeff))


def exp_of(arg):
    """exp(arg) for arg a parameter-linear combination of bare atoms with
    no constant term: each monomial must be (params) * atom^1."""
    arg = _as_expr(arg)
    if arg.is_zero():
        return ONE
    acc = {}
    for m, c in arg._d.items():
        bases = [(a, k) for a, k in m if a[0] != 'p']
        if len(bases) != 1 or bases[0][1] != 1:
            raise KernelError('exp argument must be linear in non-parameter '
                              'atoms: %s' % arg)
        params = tuple((a, k) for a, k in m if a[0] == 'p')
        b = bases[0][0]
        acc[b] = acc.get(b, ZERO) + Expression({params: c})
    out = ONE
    for b, cexp in acc.items():
        if not cexp.is_zero():
            out = out * _atom_expr(('e', b, cexp))
    return out


ZERO = Expression()
ONE = Expression({(): _F(1)})


# -- exact division -----------------------------------------------------------

def exact_div(num, den, max_steps=50000):
    """Multivariate exact division: q with num == q * den, else None.
    Laurent monomials always divide pairwise, so inexactness is detected
    through the order bound instead: every term of an exact quotient lies
    between trail(num)/trail(den) and lead(num)/lead(den), and quotient
    terms are produced in strictly decreasing order."""
    num = _as_expr(num)
    den = _as_expr(den)
    if den.is_zero():
        raise ZeroDivisionError('exact_div by zero')
    if num.is_zero():
        return ZERO
    dm, dc = den.leading()
    ntrail = min(num._d, key=cmp_to_key(_mono_cmp))
    dtrail = min(den._d, key=cmp_to_key(_mono_cmp))
    bound = _mono_mul(ntrail, _mono_pow(dtrail, _F(-1)))
    q = ZERO
    r = num
    steps = 0
    while not r.is_zero():
        steps += 1
        if steps > max_steps:
            return None
        rm, rc = r.leading()
        tmono = _mono_mul(rm, _mono_pow(dm, _F(-1)))
        if _mono_cmp(tmono, bound) < 0:
            return None
        tq = Expression({tmono: rc / dc})
        q = q + tq
        r = r - tq * den
    return q
