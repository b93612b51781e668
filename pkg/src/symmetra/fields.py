"""Vector fields on the base space (t, x, z, u) and the PDE families.

A VectorField is the first-order operator

    xi_t * d_t + xi_x * d_x + xi_z * d_z + eta * d_u

whose coefficients are Expressions in (t, x, z, u); the opaque field
b(t, x, z) is allowed so infinite families have a home.  PDEProblem
bundles one evolution equation

    u_t + f(u) u_z + lam(t) u_zzz + eps(t) u_xxz = 0

where the three coefficient slots are filled per family: the reference
equation has f(u) = u and constant unit dispersion; the f-family keeps
the dispersion fixed and varies f; the time-varying family fixes f(u) = u
and varies lam, eps.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import (Expression, KernelError, ONE, ZERO, _as_expr, exp_of,
                   jet, ln_of, opaque, param, spow, var)

_U = jet(0, 0, 0)
_T = var('t')
_COMP_KEYS = (('v', 't'), ('v', 'x'), ('v', 'z'), ('j', (0, 0, 0)))


def _check_coefficient(e):
    e = _as_expr(e)
    if e.max_jet_order() > 0:
        raise KernelError('point-field coefficients may depend on u but '
                          'not on derivatives of u: %s' % e)
    return e


class VectorField:
    """Generator of a one-parameter point transformation group."""

    __slots__ = ('xi_t', 'xi_x', 'xi_z', 'eta', 'name')

    def __init__(self, xi_t=0, xi_x=0, xi_z=0, eta=0, name=None):
        self.xi_t = _check_coefficient(xi_t)
        self.xi_x = _check_coefficient(xi_x)
        self.xi_z = _check_coefficient(xi_z)
        self.eta = _check_coefficient(eta)
        self.name = name

    def components(self):
        return (self.xi_t, self.xi_x, self.xi_z, self.eta)

    def apply(self, e):
        """Directional derivative of a function of (t, x, z, u)."""
        out = ZERO
        for c, key in zip(self.components(), _COMP_KEYS):
            if not c.is_zero():
                out = out + c * e.partial(key)
        return out

    def commutator(self, other):
        comps = [self.apply(oc) - other.apply(sc)
                 for sc, oc in zip(self.components(), other.components())]
        return VectorField(*comps)

    def is_zero(self):
        return all(c.is_zero() for c in self.components())

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.components() == other.components()

    def __hash__(self):
        return hash(self.components())

    def __add__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return VectorField(*[a + b for a, b in
                             zip(self.components(), other.components())])

    def __sub__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return VectorField(*[a - b for a, b in
                             zip(self.components(), other.components())])

    def __neg__(self):
        return VectorField(*[-c for c in self.components()])

    def scaled(self, c):
        c = _as_expr(c)
        return VectorField(*[c * comp for comp in self.components()])

    def __mul__(self, c):
        if isinstance(c, (int, Fraction, Expression)):
            return self.scaled(c)
        return NotImplemented

    __rmul__ = __mul__

    def substitute_params(self, mapping):
        out = VectorField(*[c.substitute_params(mapping)
                            for c in self.components()], name=self.name)
        return out

    def named(self, name):
        v = VectorField(*self.components(), name=name)
        return v

    def __str__(self):
        parts = []
        for c, sym in zip(self.components(), ('d_t', 'd_x', 'd_z', 'd_u')):
            if c.is_zero():
                continue
            if c == ONE:
                cs = ''
            elif c.n_terms() > 1:
                cs = '(%s)*' % c
            else:
                cs = '%s*' % c
            parts.append(cs + sym)
        if not parts:
            return '0'
        body = parts[0]
        for p in parts[1:]:
            body += ' - ' + p[1:] if p.startswith('-') else ' + ' + p
        return body if self.name is None else '%s = %s' % (self.name, body)

    def __repr__(self):
        return 'VectorField(%s)' % self


# -- advection nonlinearity candidates ---------------------------------------

class FCandidate:
    """One shape of the advection coefficient f(u), with exact rewrite
    rules for f and its u-derivatives.  Parameters default to symbols and
    may be pinned to rationals."""

    KINDS = ('arbitrary', 'const', 'linear', 'power', 'quadratic',
             'exp', 'log')

    def __init__(self, kind, mu=None, kappa=None, u0=None):
        if kind not in self.KINDS:
            raise ValueError('unknown f-candidate kind %r' % kind)
        self.kind = kind
        self.mu = _as_expr(param('mu') if mu is None else mu)
        self.kappa = _as_expr(param('kappa') if kappa is None else kappa)
        self.u0 = _as_expr(param('u0') if u0 is None else u0)

    # constructors spelling out which parameters matter
    @classmethod
    def arbitrary(cls):
        return cls('arbitrary')

    @classmethod
    def const(cls, u0=None):
        return cls('const', u0=u0)

    @classmethod
    def linear(cls):
        return cls('linear')

    @classmethod
    def power(cls, mu=None, u0=None):
        return cls('power', mu=mu, u0=u0)

    @classmethod
    def quadratic(cls, kappa=None, u0=None):
        return cls('quadratic', kappa=kappa, u0=u0)

    @classmethod
    def exponential(cls, mu=None, u0=None):
        return cls('exp', mu=mu, u0=u0)

    @classmethod
    def logarithmic(cls, u0=None):
        return cls('log', u0=u0)

    def f_deriv(self, k, arg=None):
        """Exact expression for the k-th u-derivative of f at `arg`
        (default u); k = -1 is the antiderivative, used by first
        integrals.  Raises when the antiderivative has no exact Laurent
        form (symbolic power exponent)."""
        if arg is None:
            arg = _U
        if k < -1:
            raise KernelError('derivative order %d not supported' % k)
        kind = self.kind
        if kind == 'arbitrary':
            return opaque('f', k, arg=arg)
        if kind == 'const':
            if k == -1:
                return self.u0 * arg
            return self.u0 if k == 0 else ZERO
        if kind == 'linear':
            if k == -1:
                return arg ** 2 / 2
            return (arg, ONE, ZERO)[k] if k <= 2 else ZERO
        if kind == 'quadratic':
            f = arg + self.kappa * arg ** 2 + self.u0
            table = (f, ONE + 2 * self.kappa * arg, 2 * self.kappa)
            if k == -1:
                return (arg ** 2 / 2 + self.kappa * arg ** 3 / 3
                        + self.u0 * arg)
            return table[k] if k <= 2 else ZERO
        if kind == 'power':
            if k == -1:
                if self.mu.is_rational():
                    m = self.mu.as_fraction()
                    if m == -1:
                        return ln_of(arg) + self.u0 * arg
                    return arg ** (m + 1) / (m + 1) + self.u0 * arg
                raise KernelError('antiderivative of a symbolic power '
                                  'needs a rational exponent')
            core = spow(arg, self.mu)
            fall = ONE
            for i in range(k):
                fall = fall * (self.mu - i)
            out = fall * core * arg ** (-k) if k else core
            if k == 0:
                out = out + self.u0
            return out
        if kind == 'exp':
            core = exp_of(self.mu * arg)
            if k == -1:
                if self.mu.is_rational() and self.mu.as_fraction() == 0:
                    raise KernelError('zero exponent')
                return core / self.mu + self.u0 * arg
            out = self.mu ** k * core
            if k == 0:
                out = out + self.u0
            return out
        if kind == 'log':
            if k == -1:
                return arg * ln_of(arg) - arg + self.u0 * arg
            if k == 0:
                return ln_of(arg) + self.u0
            sign = ONE if k % 2 else -ONE
            fact = 1
            for i in range(1, k):
                fact *= i
            return sign * fact * arg ** (-k)
        raise KernelError('unreachable')

    def numeric(self, params=None):
        """Callable (k, u_value) -> float/array, for the numeric layers."""
        env = dict(params or {})

        def call(deriv, uval):
            k = deriv[0] if isinstance(deriv, tuple) else deriv
            e = self.f_deriv(k)
            local = dict(env)
            local['u'] = uval
            return e.evaluate(local)
        return call

    def describe(self):
        return {
            'arbitrary': 'f(u) unrestricted',
            'const': 'f(u) = u0',
            'linear': 'f(u) = u',
            'power': 'f(u) = u^mu + u0',
            'quadratic': 'f(u) = u + kappa*u^2 + u0',
            'exp': 'f(u) = exp(mu*u) + u0',
            'log': 'f(u) = ln(u) + u0',
        }[self.kind]

    def __repr__(self):
        return 'FCandidate(%r)' % self.kind


# -- time profiles of the dispersion coefficients ------------------------------

class DispersionProfile:
    """Shapes of (lam(t), eps(t)) for the variable-dispersion family."""

    KINDS = ('arbitrary', 'power', 'exponential')

    def __init__(self, kind, p=None, q=None):
        if kind not in self.KINDS:
            raise ValueError('unknown dispersion profile %r' % kind)
        self.kind = kind
        self.p = _as_expr(param('p') if p is None else p)
        self.q = _as_expr(param('q') if q is None else q)

    @classmethod
    def arbitrary(cls):
        return cls('arbitrary')

    @classmethod
    def power(cls, p=None, q=None):
        return cls('power', p=p, q=q)

    @classmethod
    def exponential(cls, p=None, q=None):
        return cls('exponential', p=p, q=q)

    def _profile(self, which, exponent, k):
        if self.kind == 'arbitrary':
            return opaque(which, k)
        if self.kind == 'power':
            base = spow(_T, exponent)
        else:
            base = exp_of(exponent * _T)
        for _ in range(k):
            base = base.total_derivative('t')
        return base

    def lam(self, k=0):
        return self._profile('lam', self.p, k)

    def eps(self, k=0):
        return self._profile('eps', self.q, k)

    def describe(self):
        return {
            'arbitrary': 'lam(t), eps(t) unrestricted',
            'power': 'lam(t) = t^p, eps(t) = t^q',
            'exponential': 'lam(t) = exp(p*t), eps(t) = exp(q*t)',
        }[self.kind]

    def __repr__(self):
        return 'DispersionProfile(%r)' % self.kind


# -- the PDE families ----------------------------------------------------------

class PDEProblem:
    """One member of the studied equation class, with exact coefficient
    access for the prolongation machinery."""

    def __init__(self, kind, fcand=None, profile=None):
        if kind not in ('qzk', 'generalized', 'timevarying'):
            raise ValueError('unknown problem kind %r' % kind)
        self.kind = kind
        if kind == 'generalized':
            self.fcand = fcand if fcand is not None else FCandidate.arbitrary()
        else:
            self.fcand = FCandidate.linear()
            if fcand is not None:
                raise ValueError('%s fixes f(u) = u' % kind)
        if kind == 'timevarying':
            self.profile = (profile if profile is not None
                            else DispersionProfile.arbitrary())
        else:
            self.profile = None
            if profile is not None:
                raise ValueError('%s fixes unit dispersion' % kind)
        self.order = 3

    @classmethod
    def qzk(cls):
        return cls('qzk')

    @classmethod
    def generalized(cls, fcand=None):
        return cls('generalized', fcand=fcand)

    @classmethod
    def timevarying(cls, profile=None):
        return cls('timevarying', profile=profile)

    def f(self, k=0, arg=None):
        return self.fcand.f_deriv(k, arg=arg)

    def lam(self, k=0):
        if self.profile is not None:
            return self.profile.lam(k)
        return ONE if k == 0 else ZERO

    def eps(self, k=0):
        if self.profile is not None:
            return self.profile.eps(k)
        return ONE if k == 0 else ZERO

    def rhs(self):
        """G with u_t = G on solutions."""
        return -(self.f(0) * jet(0, 0, 1) + self.lam(0) * jet(0, 0, 3)
                 + self.eps(0) * jet(0, 2, 1))

    def lhs(self):
        return jet(1, 0, 0) - self.rhs()

    def describe(self):
        if self.kind == 'qzk':
            return 'u_t + u*u_z + u_zzz + u_xxz = 0'
        if self.kind == 'generalized':
            return ('u_t + f(u)*u_z + u_zzz + u_xxz = 0 with '
                    + self.fcand.describe())
        return ('u_t + u*u_z + lam(t)*u_zzz + eps(t)*u_xxz = 0 with '
                + self.profile.describe())

    def __repr__(self):
        return 'PDEProblem(%r)' % self.kind
