"""Verified generator sets, exact solutions, and optimal-system lists.

This module is data with a guarantee: every vector field returned here
has been checked to annihilate its equation (the test suite recomputes
the symmetry defect), and every catalog solution has symbolic residual
zero.  Where a built-in reference display disagrees with the verified
form (a missing scaling weight, a dropped factor), the verified form
lives here and the discrepancy is recorded in tables.py as a dispute
cell, so nothing in the working code depends on a typo.

Coefficient conventions: parameters default to symbols (mu, kappa, u0,
p, q) and may be pinned to rationals; the const-advection scaling field
keeps its u0 dependence instead of normalizing u0 = 1, since the checks
cover the general case.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import _as_expr, jet, param, var
from .fields import DispersionProfile, FCandidate, PDEProblem, VectorField
from .liealg import Representative

_T, _X, _Z = var('t'), var('x'), var('z')
_U = jet(0, 0, 0)


def _named(name, xi_t, xi_x, xi_z, eta):
    return VectorField(xi_t, xi_x, xi_z, eta, name=name)


def translations():
    """The three translation fields shared by every family."""
    return [_named('X1', 1, 0, 0, 0),
            _named('X2', 0, 1, 0, 0),
            _named('X3', 0, 0, 1, 0)]


def qzk_generators():
    """Five-dimensional algebra of the reference equation.

    The scaling field carries eta = -2u; the u-component is forced by
    the symmetry condition (and independently by the similarity ansatz
    u = z/t + U(zeta) t^(-2/3), which only the weighted field leaves
    invariant)."""
    gens = translations()
    gens.append(_named('X4', 0, 0, _T, 1))
    gens.append(_named('X5', 3 * _T, _X, _Z, -2 * _U))
    return gens


def arbitrary_generators():
    return translations()


def const_generators(u0=None):
    """f = u0: the equation is linear, so u-scaling splits off and the
    space-time scaling needs a Galilean shift z -> z + 2 u0 t."""
    u0 = _as_expr(param('u0') if u0 is None else u0)
    gens = translations()
    gens.append(_named('X4A', 0, 0, 0, _U))
    gens.append(_named('X5A', 3 * _T, _X, _Z + 2 * u0 * _T, 0))
    return gens


def power_generators(mu=None, u0=None):
    """f = u^mu + u0.  Weight count: t ~ 3, z ~ 1 force u ~ -2/mu."""
    mu = _as_expr(param('mu') if mu is None else mu)
    u0 = _as_expr(param('u0') if u0 is None else u0)
    gens = translations()
    gens.append(_named('X4B', 3 * _T, _X, _Z + 2 * u0 * _T,
                       -2 * _U / mu))
    return gens


def quadratic_generators(kappa=None, u0=None):
    """f = u + kappa u^2 + u0: the mu = 2 power case after completing
    the square at u = -1/(2 kappa), rescaled by 2 kappa to clear
    denominators."""
    kappa = _as_expr(param('kappa') if kappa is None else kappa)
    u0 = _as_expr(param('u0') if u0 is None else u0)
    gens = translations()
    gens.append(_named('X4C', 6 * kappa * _T, 2 * kappa * _X,
                       2 * kappa * _Z + (4 * kappa * u0 - 1) * _T,
                       -(1 + 2 * kappa * _U)))
    return gens


def exp_generators(mu=None, u0=None):
    """f = exp(mu u) + u0: scaling shifts u by a constant, -2/mu."""
    mu = _as_expr(param('mu') if mu is None else mu)
    u0 = _as_expr(param('u0') if u0 is None else u0)
    gens = translations()
    gens.append(_named('X4D', 3 * _T, _X, _Z + 2 * u0 * _T,
                       -2 / mu))
    return gens


def log_generators(u0=None):
    """f = ln u + u0: a Galilean boost joint with u-scaling; the boost
    speed eats the additive ln shift."""
    del u0
    gens = translations()
    gens.append(_named('X4E', 0, 0, _T, _U))
    return gens


def tv_generators(kind, p=None, q=None):
    """Variable-dispersion generators.  For arbitrary lam(t), eps(t)
    only x/z translations and the boost survive; the power/exponential
    profiles each admit one extra scaling-type field whose weights are
    fixed by balancing t^p u_zzz and t^q u_xxz against u u_z."""
    p = _as_expr(param('p') if p is None else p)
    q = _as_expr(param('q') if q is None else q)
    gens = [_named('X2', 0, 1, 0, 0), _named('X3', 0, 0, 1, 0),
            _named('X4', 0, 0, _T, 1)]
    if kind == 'arbitrary':
        return gens
    if kind == 'power':
        gens.append(_named('XT1', _T, -(p - 3 * q - 2) / 6 * _X,
                           (p + 1) / 3 * _Z, (p - 2) / 3 * _U))
        return gens
    if kind == 'exponential':
        gens.append(_named('XT2', 1, -(p - 3 * q) / 6 * _X,
                           p / 3 * _Z, p / 3 * _U))
        return gens
    raise ValueError('unknown dispersion profile kind %r' % kind)


def generators_for(problem):
    """Catalog generators matching a PDEProblem's family and parameters."""
    if problem.kind == 'qzk':
        return qzk_generators()
    if problem.kind == 'timevarying':
        prof = problem.profile
        return tv_generators(prof.kind, p=prof.p, q=prof.q)
    fc = problem.fcand
    table = {
        'arbitrary': lambda: arbitrary_generators(),
        'const': lambda: const_generators(u0=fc.u0),
        'linear': lambda: qzk_generators(),
        'power': lambda: power_generators(mu=fc.mu, u0=fc.u0),
        'quadratic': lambda: quadratic_generators(kappa=fc.kappa, u0=fc.u0),
        'exp': lambda: exp_generators(mu=fc.mu, u0=fc.u0),
        'log': lambda: log_generators(u0=fc.u0),
    }
    return table[fc.kind]()


# -- exact solutions -----------------------------------------------------------

class CatalogSolution:
    """One exact solution with its family tag and parameter slots."""

    __slots__ = ('name', 'expression', 'family', 'parameters', 'note')

    def __init__(self, name, expression, family, parameters=(), note=''):
        self.name = name
        self.expression = expression
        self.family = family
        self.parameters = tuple(parameters)
        self.note = note

    def instance(self, **values):
        e = self.expression
        subs = {k: Fraction(v) if not isinstance(v, Fraction) else v
                for k, v in values.items()}
        return e.substitute_params(subs)

    def __repr__(self):
        return 'CatalogSolution(%s: u = %s)' % (self.name, self.expression)


def solution_catalog():
    """Exact solutions of the reference equation.

    The scaling reduction gives U = c*zeta, i.e. u = (z + c x)/t for
    every c; the c = 1 instance is listed separately because the
    dedicated displays quote it.  Constants solve the equation because
    every term differentiates away."""
    c = param('c')
    c0 = param('c0')
    return [
        CatalogSolution('scaling-similarity', (_Z + _X) / _T, 'qzk',
                        note='scaling reduction, unit-slope instance'),
        CatalogSolution('scaling-family', (_Z + c * _X) / _T, 'qzk',
                        parameters=('c',),
                        note='full solution family of the scaling '
                             'reduction; slope c is free'),
        CatalogSolution('constant', _as_expr(0) + c0, 'qzk',
                        parameters=('c0',),
                        note='all derivatives vanish'),
    ]


# -- one-dimensional optimal-system lists --------------------------------------

def _rep(label, coeffs):
    return Representative(label, coeffs)


_A, _B = param('alpha'), param('beta')


def qzk_optimal_list():
    """Fourteen families for the five-dimensional algebra.  The
    separation audit flags the redundancies this list carries (see the
    coverage report); the list is kept verbatim as reference data."""
    return [
        _rep('{X1}', (1, 0, 0, 0, 0)),
        _rep('{X2}', (0, 1, 0, 0, 0)),
        _rep('{X3}', (0, 0, 1, 0, 0)),
        _rep('{X4}', (0, 0, 0, 1, 0)),
        _rep('{X5}', (0, 0, 0, 0, 1)),
        _rep('{X1+a*X2}', (1, _A, 0, 0, 0)),
        _rep('{X1+a*X3}', (1, 0, _A, 0, 0)),
        _rep('{X1+a*X4}', (1, 0, 0, _A, 0)),
        _rep('{X2+a*X3}', (0, 1, _A, 0, 0)),
        _rep('{X2+a*X4}', (0, 1, 0, _A, 0)),
        _rep('{X3+a*X4}', (0, 0, 1, _A, 0)),
        _rep('{X1+a*X2+b*X4}', (1, _A, 0, _B, 0)),
        _rep('{X2+a*X3+b*X4}', (0, 1, _A, _B, 0)),
        _rep('{X1+a*X2+b*X3}', (1, _A, _B, 0, 0)),
    ]


def const_optimal_list():
    """The const-advection list: the fourteen families above plus one
    four-slot family.  Indices refer to (X1, X2, X3, X4A, X5A)."""
    g = param('gamma')
    out = qzk_optimal_list()
    out.append(_rep('{X1+a*X2+b*X3+g*X4}', (1, _A, _B, g, 0)))
    return out


def power_optimal_list():
    """Nine families over (X1, X2, X3, X4B); shared by the quadratic
    and exponential cases, whose algebras differ only by basis scale."""
    return [
        _rep('{X1}', (1, 0, 0, 0)),
        _rep('{X2}', (0, 1, 0, 0)),
        _rep('{X3}', (0, 0, 1, 0)),
        _rep('{X4}', (0, 0, 0, 1)),
        _rep('{X1+a*X2}', (1, _A, 0, 0)),
        _rep('{X1+a*X3}', (1, 0, _A, 0)),
        _rep('{X1+b*X4}', (1, 0, 0, _B)),
        _rep('{X2+a*X3}', (0, 1, _A, 0)),
        _rep('{X1+a*X2+b*X3}', (1, _A, _B, 0)),
    ]


def log_optimal_list():
    """The four-dimensional subalgebra case: the reference list is the
    fourteen-family one with every family containing the fifth basis
    element removed, leaving thirteen over (X1, X2, X3, X4E)."""
    return [
        _rep('{X1}', (1, 0, 0, 0)),
        _rep('{X2}', (0, 1, 0, 0)),
        _rep('{X3}', (0, 0, 1, 0)),
        _rep('{X4}', (0, 0, 0, 1)),
        _rep('{X1+a*X2}', (1, _A, 0, 0)),
        _rep('{X1+a*X3}', (1, 0, _A, 0)),
        _rep('{X1+a*X4}', (1, 0, 0, _A)),
        _rep('{X2+a*X3}', (0, 1, _A, 0)),
        _rep('{X2+a*X4}', (0, 1, 0, _A)),
        _rep('{X3+a*X4}', (0, 0, 1, _A)),
        _rep('{X1+a*X2+b*X4}', (1, _A, 0, _B)),
        _rep('{X2+a*X3+b*X4}', (0, 1, _A, _B)),
        _rep('{X1+a*X2+b*X3}', (1, _A, _B, 0)),
    ]


def optimal_reps(kind):
    table = {
        'qzk': qzk_optimal_list,
        'linear': qzk_optimal_list,
        'const': const_optimal_list,
        'power': power_optimal_list,
        'quadratic': power_optimal_list,
        'exp': power_optimal_list,
        'log': log_optimal_list,
    }
    if kind not in table:
        raise ValueError('no optimal-system list for family %r' % kind)
    return table[kind]()


def problem_for(kind, **kw):
    """Family selector shared by the command line and the tests."""
    if kind in ('qzk', 'reference'):
        return PDEProblem.qzk()
    if kind in ('arbitrary', 'const', 'linear', 'power', 'quadratic',
                'exp', 'log'):
        ctor = {
            'arbitrary': FCandidate.arbitrary,
            'const': FCandidate.const,
            'linear': FCandidate.linear,
            'power': FCandidate.power,
            'quadratic': FCandidate.quadratic,
            'exp': FCandidate.exponential,
            'log': FCandidate.logarithmic,
        }[kind]
        accepted = {k: v for k, v in kw.items()
                    if k in ('mu', 'kappa', 'u0') and v is not None}
        if kind in ('arbitrary', 'linear'):
            accepted = {}
        if kind in ('const', 'log'):
            accepted.pop('mu', None)
            accepted.pop('kappa', None)
        if kind in ('power', 'exp'):
            accepted.pop('kappa', None)
        if kind == 'quadratic':
            accepted.pop('mu', None)
        return PDEProblem.generalized(ctor(**accepted))
    if kind in ('tv-arbitrary', 'tv-power', 'tv-exponential'):
        shape = kind[3:]
        ctor = {
            'arbitrary': DispersionProfile.arbitrary,
            'power': DispersionProfile.power,
            'exponential': DispersionProfile.exponential,
        }[shape]
        accepted = {k: v for k, v in kw.items()
                    if k in ('p', 'q') and v is not None}
        if shape == 'arbitrary':
            accepted = {}
        return PDEProblem.timevarying(ctor(**accepted))
    raise ValueError('unknown family %r' % kind)


FAMILY_KINDS = ('qzk', 'arbitrary', 'const', 'linear', 'power', 'quadratic',
                'exp', 'log', 'tv-arbitrary', 'tv-power', 'tv-exponential')
