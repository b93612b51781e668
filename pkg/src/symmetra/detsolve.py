"""Solve determining systems exactly and assemble symmetry bases.

The null space of a determining system is computed over the rationals
(or the rational functions of the family parameters, handled without
division through case-split reporting).  Basis vectors turn back into
vector fields; each one is re-verified against the symmetry defect.  The
constant-advection family additionally carries an infinite-dimensional
piece, eta = b(t, x, z) with b solving the equation itself: that piece is
detected by an exact identity on an opaque b and split off from the
finite part rather than enumerated.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import Expression, KernelError, ZERO, opaque_field
from .fields import PDEProblem, VectorField
from .linsolve import in_span, null_space, rref, verify_null_vector
from .prolong import AnsatzSpec, determining_equations, symmetry_defect

_F = Fraction


class InfiniteFamily:
    """Function-indexed symmetry slice: shape * d_u with the displayed
    function constrained by a linear PDE."""

    __slots__ = ('shape', 'condition')

    def __init__(self, shape, condition):
        self.shape = shape
        self.condition = condition

    def describe(self):
        return '%s d_u with %s = 0' % (self.shape, self.condition)

    def __repr__(self):
        return 'InfiniteFamily(%s)' % self.describe()


class SymmetryBasis:
    def __init__(self, problem, ansatz, generators, infinite_family,
                 case_splits, system=None):
        self.problem = problem
        self.ansatz = ansatz
        self.generators = generators
        self.infinite_family = infinite_family
        self.case_splits = case_splits
        self.system = system

    @property
    def dimension(self):
        return len(self.generators)

    def dimension_label(self):
        if self.infinite_family is not None:
            return '%d & infinite' % self.dimension
        return str(self.dimension)

    def as_report(self):
        rep = {
            'family': self.problem.describe(),
            'dimension': self.dimension,
            'generators': [str(g) for g in self.generators],
            'infinite_family': self.infinite_family is not None,
            'case_splits': [cs.note for cs in self.case_splits],
        }
        if self.infinite_family is not None:
            rep['infinite_family_condition'] = \
                str(self.infinite_family.condition)
            rep['infinite_family_shape'] = self.infinite_family.shape
        return rep


def _field_from_vector(vec, columns):
    comps = [ZERO, ZERO, ZERO, ZERO]
    from .prolong import _mono_expr
    for entry, (label, ci, mono) in zip(vec, columns):
        if not entry.is_zero():
            comps[ci] = comps[ci] + entry * _mono_expr(mono)
    return VectorField(*comps)


def field_to_vector(vf, columns):
    """Coordinates of a polynomial vector field in the ansatz basis.
    Raises KernelError when a component monomial is outside the ansatz."""
    index = {(ci, mono): i for i, (label, ci, mono) in enumerate(columns)}
    vec = [ZERO] * len(columns)
    for ci, comp in enumerate(vf.components()):
        for key, coef in comp.split_by_nonparam().items():
            mono = [0, 0, 0, 0]
            for a, k in key:
                if k != int(k) or k < 0:
                    raise KernelError('non-polynomial component: %s' % comp)
                if a == ('v', 't'):
                    mono[0] = int(k)
                elif a == ('v', 'x'):
                    mono[1] = int(k)
                elif a == ('v', 'z'):
                    mono[2] = int(k)
                elif a == ('j', (0, 0, 0)):
                    mono[3] = int(k)
                else:
                    raise KernelError('component atom %r outside the '
                                      'ansatz space' % (a,))
            slot = index.get((ci, tuple(mono)))
            if slot is None:
                raise KernelError('monomial %r of component %d outside '
                                  'the ansatz' % (tuple(mono), ci))
            vec[slot] = vec[slot] + coef
    return tuple(vec)


def find_symmetries(p, ansatz=None):
    """Exact symmetry basis of the problem within the ansatz."""
    if ansatz is None:
        ansatz = AnsatzSpec()
        if p.kind == 'timevarying' and p.profile.kind in ('power',
                                                          'exponential'):
            ansatz = AnsatzSpec(degree=2, profile=p.profile.kind)
    system = determining_equations(p, ansatz)
    columns = ansatz.columns()
    n = len(columns)
    col_of = {label: i for i, (label, _, _) in enumerate(columns)}
    rows = [{col_of[k]: e for k, e in rel.row.items()}
            for rel in system.relations]
    basis, ech = null_space(rows, n)
    for vec in basis:
        if not verify_null_vector(rows, vec):
            raise KernelError('null-space vector fails its own system')

    infinite = None
    vectors = basis
    if p.kind == 'generalized' and p.fcand.kind == 'const':
        infinite, vectors = _split_linear_slice(p, basis, columns)

    generators = []
    for vec in vectors:
        vf = _field_from_vector(vec, columns)
        d = symmetry_defect(vf, p)
        if not d.is_zero():
            raise KernelError('computed generator has nonzero defect: %s'
                              % vf)
        generators.append(vf)
    return SymmetryBasis(p, ansatz, generators, infinite,
                         ech.case_splits, system=system)


def _split_linear_slice(p, basis, columns):
    """Separate null vectors supported purely on u-free eta monomials
    (the b(t,x,z) slice of the linear case) from the finite part."""
    b_cols = [i for i, (label, ci, mono) in enumerate(columns)
              if ci == 3 and mono[3] == 0]
    b_set = set(b_cols)
    geo_cols = [i for i in range(len(columns)) if i not in b_set]
    rows = [{i: e for i, e in enumerate(vec) if not e.is_zero()}
            for vec in basis]
    reduced, pivot_cols, _ = rref(rows, len(columns),
                                  col_priority=geo_cols)
    finite = []
    pure_b = []
    for row, pc in zip(reduced, pivot_cols):
        vec = tuple(row.get(i, ZERO) for i in range(len(columns)))
        if pc in b_set and all(i in b_set for i in row):
            pure_b.append(vec)
        else:
            finite.append(vec)
    cond = symmetry_defect(VectorField(0, 0, 0, opaque_field('b')), p)
    marker = InfiniteFamily('b(t,x,z)', cond)
    return marker, finite


def verify_table(p, expected, ansatz=None, names=None):
    """Compare the computed basis with cataloged generators.

    expected: list of VectorFields (exact components, parameters allowed).
    Returns a dict report: per-generator containment, dimension match,
    and any surplus directions of the computed span."""
    sb = find_symmetries(p, ansatz)
    columns = sb.ansatz.columns()
    n = len(columns)
    comp_vecs = [field_to_vector(g, columns) for g in sb.generators]
    exp_vecs = []
    contained = []
    for i, g in enumerate(expected):
        name = names[i] if names else 'expected[%d]' % i
        try:
            v = field_to_vector(g, columns)
        except KernelError as err:
            contained.append({'name': name, 'contained': False,
                              'note': str(err)})
            continue
        exp_vecs.append(v)
        ok, _, _ = in_span(comp_vecs, v, n)
        contained.append({'name': name, 'contained': bool(ok)})
    surplus = []
    for g, v in zip(sb.generators, comp_vecs):
        ok, _, _ = in_span(exp_vecs, v, n)
        if not ok:
            surplus.append(str(g))
    return {
        'family': p.describe(),
        'computed_dimension': sb.dimension,
        'expected_count': len(expected),
        'contained': contained,
        'all_contained': all(c['contained'] for c in contained),
        'surplus': surplus,
        'infinite_family': sb.infinite_family is not None,
        'case_splits': [cs.note for cs in sb.case_splits],
    }
