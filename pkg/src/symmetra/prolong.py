"""Prolongation of point fields and the on-shell symmetry condition.

`prolong_coefficient` runs the standard recursion

    eta^{J,i} = D_i eta^J - sum_k u_{J+e_k} * D_i xi^k

off shell.  `symmetry_defect` applies the prolonged field to the
equation and then removes u_t and all of its differential consequences
through the solved form u_t = G, so the residual lives on the solution
manifold: it vanishes identically exactly when the field generates point
symmetries.

`determining_equations` expands the defect of a general ansatz field.
The defect is linear in the ansatz coefficients, so each unit basis
field contributes one defect column; every distinct monomial in the
non-parameter variables (coordinates, u, jets, opaque coefficient
symbols) must then cancel on its own, which yields one homogeneous
linear relation per monomial over the ansatz unknowns with exact
parameter-polynomial entries.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import Expression, KernelError, ZERO, jet, var
from .fields import PDEProblem, VectorField

_F = Fraction

_COORD_OF = {0: 't', 1: 'x', 2: 'z'}
_E = {'t': (1, 0, 0), 'x': (0, 1, 0), 'z': (0, 0, 1)}


def prolong_coefficient(v, word, cap=None):
    """Prolonged coefficient eta^J for the derivative word J (a string
    over 'txz', e.g. 'xxz').  Off-shell: u_t jets appear untouched."""
    if not word or any(ch not in 'txz' for ch in word):
        raise KernelError('derivative word must be nonempty over t/x/z, '
                          'got %r' % (word,))
    if cap is not None and len(word) + 1 > cap:
        raise KernelError('prolongation to %r needs jets past cap %d'
                          % (word, cap))
    xis = v.components()[:3]
    e = v.eta
    J = (0, 0, 0)
    for ch in word:
        step = e.total_derivative(ch, cap)
        for k, xi in enumerate(xis):
            if xi.is_zero():
                continue
            ek = _E[_COORD_OF[k]]
            uJk = jet(J[0] + ek[0], J[1] + ek[1], J[2] + ek[2])
            step = step - uJk * xi.total_derivative(ch, cap)
        e = step
        ee = _E[ch]
        J = (J[0] + ee[0], J[1] + ee[1], J[2] + ee[2])
    return e


def apply_prolonged(v, e, cap=None):
    """The prolonged field of v applied to an Expression in jets."""
    out = ZERO
    for c, coord in zip(v.components()[:3], ('t', 'x', 'z')):
        if not c.is_zero():
            out = out + c * e.partial(('v', coord))
    pu = e.partial(('j', (0, 0, 0)))
    if not pu.is_zero():
        out = out + v.eta * pu
    jets = sorted({a[1] for a in e.free_atoms() if a[0] == 'j'
                   and sum(a[1]) >= 1})
    for J in jets:
        pj = e.partial(('j', J))
        if pj.is_zero():
            continue
        word = 't' * J[0] + 'x' * J[1] + 'z' * J[2]
        out = out + prolong_coefficient(v, word, cap) * pj
    return out


def symmetry_defect(v, p, cap=None):
    """Canonical residual of the invariance condition of v against the
    problem's equation, restricted to the solution manifold.  Zero iff v
    is a Lie point symmetry."""
    if not isinstance(p, PDEProblem):
        raise TypeError('expected a PDEProblem')
    raw = apply_prolonged(v, p.lhs(), cap=None)
    return raw.substitute(('j', (1, 0, 0)), p.rhs(),
                          with_consequences=True, cap=cap)


# -- ansatz bookkeeping --------------------------------------------------------

_COMP_NAMES = ('xi_t', 'xi_x', 'xi_z', 'eta')


class AnsatzSpec:
    """Finite linear parameterization of the four field components.

    profile 'polynomial': every component is a polynomial in (t, x, z, u)
    of total degree <= degree.  Profiles 'power' and 'exponential' fit
    the variable-dispersion family: xi_t is affine in t and the other
    components are polynomials of degree <= 2, since the extra generator
    of either profile has that shape and a full symbolic-exponent ansatz
    is out of scope.
    """

    PROFILES = ('polynomial', 'power', 'exponential')

    def __init__(self, degree=3, profile='polynomial'):
        if profile not in self.PROFILES:
            raise ValueError('unknown ansatz profile %r' % profile)
        if degree < 1:
            raise ValueError('ansatz degree must be at least 1')
        self.degree = int(degree)
        self.profile = profile

    @classmethod
    def from_dict(cls, d):
        return cls(degree=d.get('degree', 3),
                   profile=d.get('profile', 'polynomial'))

    def to_dict(self):
        return {'degree': self.degree, 'profile': self.profile}

    def columns(self):
        """Ordered (label, component index, monomial exponent tuple)."""
        out = []
        if self.profile == 'polynomial':
            monos = _poly_monomials(self.degree)
            per_comp = [monos, monos, monos, monos]
        else:
            affine_t = [(0, 0, 0, 0), (1, 0, 0, 0)]
            deg2 = _poly_monomials(2)
            per_comp = [affine_t, deg2, deg2, deg2]
        for ci, monos in enumerate(per_comp):
            for mono in monos:
                label = '%s[%s]' % (_COMP_NAMES[ci], _mono_label(mono))
                out.append((label, ci, mono))
        return out

    def basis_fields(self):
        """Ordered (label, unit VectorField) pairs spanning the ansatz."""
        out = []
        for label, ci, mono in self.columns():
            comps = [ZERO, ZERO, ZERO, ZERO]
            comps[ci] = _mono_expr(mono)
            out.append((label, VectorField(*comps)))
        return out


def _poly_monomials(degree):
    out = []
    for total in range(degree + 1):
        for a in range(total + 1):
            for b in range(total - a + 1):
                for c in range(total - a - b + 1):
                    d = total - a - b - c
                    out.append((a, b, c, d))
    return out


def _mono_expr(mono):
    a, b, c, d = mono
    e = Expression({(): _F(1)})
    if a:
        e = e * var('t') ** a
    if b:
        e = e * var('x') ** b
    if c:
        e = e * var('z') ** c
    if d:
        e = e * jet(0, 0, 0) ** d
    return e


def _mono_label(mono):
    names = ('t', 'x', 'z', 'u')
    parts = []
    for n, k in zip(names, mono):
        if k == 1:
            parts.append(n)
        elif k > 1:
            parts.append('%s^%d' % (n, k))
    return '*'.join(parts) if parts else '1'


class Relation:
    """One split monomial's cancellation condition: sum over unknowns of
    row[unknown] * unknown = 0, with parameter-only coefficients."""

    __slots__ = ('key', 'label', 'row')

    def __init__(self, key, row):
        self.key = key
        self.label = _split_label(key)
        self.row = row

    def monomial(self):
        return Expression({self.key: _F(1)})

    def __repr__(self):
        return 'Relation(%s)' % self.label


class DetSystem:
    """Determining system: one homogeneous relation per split monomial.

    unknowns: ordered ansatz coefficient labels.  relations are exact and
    unreduced, so the defect columns can be rebuilt from them; defects
    keeps the columns themselves for that soundness check.
    """

    def __init__(self, family, unknowns, relations, defects):
        self.family = family
        self.unknowns = unknowns
        self.relations = relations
        self.defects = defects

    def n_relations(self):
        return len(self.relations)

    def reassemble(self, label):
        """Sum of (relation coefficient * split monomial) for one ansatz
        column; equals defects[label] iff the splitting lost nothing."""
        out = ZERO
        for rel in self.relations:
            c = rel.row.get(label)
            if c is not None and not c.is_zero():
                out = out + c * rel.monomial()
        return out


def determining_equations(p, ansatz=None):
    if ansatz is None:
        ansatz = AnsatzSpec()
    if ansatz.profile != 'polynomial':
        if p.kind != 'timevarying':
            raise KernelError('profile %r only applies to the variable-'
                              'dispersion family' % ansatz.profile)
        if p.profile.kind not in ('arbitrary', ansatz.profile):
            raise KernelError('ansatz profile %r does not match the '
                              'equation profile %r'
                              % (ansatz.profile, p.profile.kind))
    basis = ansatz.basis_fields()
    unknowns = [label for label, _ in basis]
    defects = {}
    rows = {}
    for label, field in basis:
        d = symmetry_defect(field, p)
        defects[label] = d
        for key, coef in d.split_by_nonparam().items():
            row = rows.setdefault(key, {})
            row[label] = row.get(label, ZERO) + coef
    relations = []
    for key in sorted(rows, key=_split_key_sort):
        row = {k: v for k, v in rows[key].items() if not v.is_zero()}
        if row:
            relations.append(Relation(key, row))
    return DetSystem(p.kind, unknowns, relations, defects)


def _split_key_sort(key):
    return tuple((_atom_sort_str(a), k) for a, k in key)


def _atom_sort_str(a):
    from .expr import _atom_str
    return _atom_str(a)


def _split_label(key):
    if not key:
        return '1'
    return str(Expression({key: _F(1)}))
