"""Embedded reference tables and the cell-level conformance checker.

The JSON files under data/ hold the built-in reference displays: bracket
tables, adjoint tables, generator listings, the advection classification
summary, and the one-dimensional optimal-system lists.  Every cell is
addressed by (table id, row, column), stores its coefficients as strings
in the expression grammar, and may carry a ``dispute`` annotation.  A
disputed cell records what the reference display prints even though the
recomputation refutes it; the checker reports such cells as
``expected-dispute`` instead of failing, and everything undisputed must
match exactly.

The computed side is rebuilt from first principles on every check:
structure constants from the cataloged fields, adjoint matrices by exact
exponentiation, generator spans by re-solving the determining equations,
and algebra names from basis-independent invariants.  Reference data
never feeds the computation; it is only ever diffed against it.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction

from .catalog import generators_for, optimal_reps, problem_for
from .detsolve import find_symmetries
from .expr import Expression, KernelError, _as_expr
from .fields import VectorField
from .liealg import identify_algebra, structure_constants
from .linsolve import in_span, span_equal
from .parser import parse

_DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')

#: family aliases: the reference tables for the base equation are filed
#: under the linear-advection family it coincides with.
_ALIAS = {'qzk': 'linear'}


def _canon_family(family):
    return _ALIAS.get(family, family)


class RefCell:
    """One reference cell: parsed value plus annotations."""

    __slots__ = ('value', 'raw', 'dispute', 'note')

    def __init__(self, value, raw, dispute=None, note=None):
        self.value = value
        self.raw = raw
        self.dispute = dispute
        self.note = note


class ReferenceTable:
    """One embedded reference display, cells addressed by (row, col)."""

    __slots__ = ('id', 'title', 'family', 'celltype', 'basis', 'rows',
                 'cols', 'pins', 'notes', 'display_cols', 'cells')

    def __init__(self, payload):
        self.id = payload['id']
        self.title = payload['title']
        self.family = payload['family']
        self.celltype = payload['celltype']
        self.basis = tuple(payload['basis'])
        self.rows = tuple(payload['rows'])
        self.cols = tuple(payload['cols'])
        self.pins = {k: Fraction(v) for k, v in payload['pins'].items()}
        self.notes = tuple(payload.get('notes', ()))
        self.display_cols = tuple(payload.get('display_cols', ()))
        self.cells = {}
        for key, cell in payload['cells'].items():
            row, col = key.split('|', 1)
            raw = dict(cell['v'])
            if self.celltype == 'text':
                value = raw['text']
            else:
                value = {name: parse(s) for name, s in raw.items()}
            self.cells[(row, col)] = RefCell(value, raw,
                                             cell.get('dispute'),
                                             cell.get('note'))

    def cell(self, row, col):
        return self.cells[(row, col)]


_CACHE = {}


def reference_ids():
    """Sorted ids of every embedded reference table."""
    return sorted(name[:-5] for name in os.listdir(_DATA_DIR)
                  if name.endswith('.json'))


def load_reference(table_id):
    """Parsed reference table; raises KeyError for unknown ids."""
    if table_id not in _CACHE:
        path = os.path.join(_DATA_DIR, table_id + '.json')
        if not os.path.exists(path):
            raise KeyError('no reference table %r; available: %s'
                           % (table_id, ', '.join(reference_ids())))
        with open(path) as fh:
            _CACHE[table_id] = ReferenceTable(json.load(fh))
    return _CACHE[table_id]


def reference_for(kind, family):
    """Reference table id for a display kind and family, or None."""
    tid = '%s-%s' % (kind, _canon_family(family))
    path = os.path.join(_DATA_DIR, tid + '.json')
    return tid if os.path.exists(path) else None


# -- computed displays ----------------------------------------------------

def family_algebra(family, params=None):
    """Exact structure constants over the cataloged basis."""
    p = problem_for(family, **(params or {}))
    return structure_constants(generators_for(p))


def computed_commutators(family, params=None):
    """cells[(row, col)] = {basis name: exact coefficient} of the
    bracket of the row field with the column field."""
    alg = family_algebra(family, params)
    names = alg.names
    cells = {}
    for j, rn in enumerate(names):
        for k, cn in enumerate(names):
            cells[(rn, cn)] = {names[i]: c
                               for i, c in enumerate(alg.C[j][k])
                               if not c.is_zero()}
    return names, cells


def computed_adjoint(family, params=None):
    """cells[(row, col)] = coefficients of Ad(exp(ep*row)) applied to
    the column field, exact in the group parameter ep."""
    alg = family_algebra(family, params)
    names = alg.names
    cells = {}
    for i, rn in enumerate(names):
        A = alg.adjoint(i)
        for j, cn in enumerate(names):
            cells[(rn, cn)] = {names[r]: A[r][j]
                               for r in range(alg.dim)
                               if not A[r][j].is_zero()}
    return names, cells


def computed_generators(family, params=None):
    """Cataloged fields keyed by name (the verified forms)."""
    p = problem_for(family, **(params or {}))
    return {g.name: g for g in generators_for(p)}


def computed_optimal(family):
    return [r.label for r in optimal_reps(_canon_family(family))]


def computed_classification(families=('arbitrary', 'linear', 'const',
                                      'power', 'quadratic', 'exp', 'log'),
                            ansatz=None):
    """Classification rows recomputed from the determining equations.

    Each row carries the solved dimension label, the invariant-based
    algebra name over the cataloged basis, and the generator names."""
    rows = {}
    for family in families:
        p = problem_for(family)
        sb = find_symmetries(p, ansatz)
        gens = generators_for(p)
        alg = structure_constants(gens)
        names = [g.name for g in gens]
        if sb.infinite_family is not None:
            names.append('Xb')
        rows[family] = {
            'advection': p.fcand.describe(),
            'algebra': identify_algebra(alg),
            'dimension': sb.dimension_label(),
            'generators': ','.join(names),
            'solved_dimension': sb.dimension,
            'infinite': sb.infinite_family is not None,
        }
    return rows


# -- rendering helpers -----------------------------------------------------

def format_combination(coeffs, order):
    """Human form of a basis-coefficient dict: '3*X1 + 2*u0*X3'."""
    parts = []
    for name in order:
        c = coeffs.get(name)
        if c is None or c.is_zero():
            continue
        if c == _ONE:
            term = name
        elif c == -_ONE:
            term = '-' + name
        else:
            cs = str(c)
            if ' ' in cs or cs.startswith('-'):
                cs = '(%s)' % cs
            term = '%s*%s' % (cs, name)
        if not parts:
            parts.append(term)
        elif term.startswith('-'):
            parts.append('- ' + term[1:])
        else:
            parts.append('+ ' + term)
    return ' '.join(parts) if parts else '0'


_ONE = _as_expr(1)


def _pin(e, pins):
    return e.substitute_params(pins) if pins else e


# -- the checker ------------------------------------------------------------

class CellReport:
    """Outcome of one reference cell comparison."""

    __slots__ = ('table', 'row', 'col', 'status', 'reference', 'computed',
                 'note')

    def __init__(self, table, row, col, status, reference, computed,
                 note=None):
        self.table = table
        self.row = row
        self.col = col
        self.status = status
        self.reference = reference
        self.computed = computed
        self.note = note

    def as_report(self):
        rep = {'table': self.table, 'row': self.row, 'col': self.col,
               'status': self.status, 'reference': self.reference,
               'computed': self.computed}
        if self.note:
            rep['note'] = self.note
        return rep


class CheckReport:
    """All cell comparisons for one table.

    ok is True when no undisputed cell disagrees; expected-dispute cells
    are reported but never fail the check."""

    __slots__ = ('table', 'cells', 'notes', 'extra')

    def __init__(self, table, cells, notes=(), extra=None):
        self.table = table
        self.cells = list(cells)
        self.notes = tuple(notes)
        self.extra = extra or {}

    @property
    def ok(self):
        return all(c.status != 'disagree' for c in self.cells)

    def counts(self):
        out = {'agree': 0, 'disagree': 0, 'expected-dispute': 0, 'info': 0}
        for c in self.cells:
            out[c.status] += 1
        return out

    def as_report(self):
        rep = {'table': self.table, 'ok': self.ok,
               'counts': self.counts(),
               'cells': [c.as_report() for c in self.cells]}
        if self.notes:
            rep['notes'] = list(self.notes)
        if self.extra:
            rep.update(self.extra)
        return rep


def _coeff_status(ref_cell, comp):
    """agree / disagree / expected-dispute for coefficient dicts."""
    names = set(ref_cell.value) | set(comp)
    same = all(((ref_cell.value.get(n) or _ZERO)
                - (comp.get(n) or _ZERO)).is_zero() for n in names)
    if same:
        return 'agree'
    return 'expected-dispute' if ref_cell.dispute else 'disagree'


_ZERO = _as_expr(0)


def _check_matrix(ref, builder, params=None):
    names, comp = builder(ref.family, params)
    order = list(ref.basis)
    reports = []
    for row in ref.rows:
        for col in ref.cols:
            rc = ref.cell(row, col)
            cc = {n: _pin(e, ref.pins)
                  for n, e in comp.get((row, col), {}).items()}
            cc = {n: e for n, e in cc.items() if not e.is_zero()}
            status = _coeff_status(rc, cc)
            reports.append(CellReport(
                ref.id, row, col, status,
                format_combination(rc.value, order),
                format_combination(cc, order),
                note=rc.dispute or rc.note))
    return CheckReport(ref.id, reports, notes=ref.notes,
                       extra={'family': ref.family})


def _check_generators(ref, ansatz=None):
    pins = {k: v for k, v in ref.pins.items()}
    p = problem_for(ref.family, **pins)
    sb = find_symmetries(p, ansatz)
    columns = sb.ansatz.columns()
    n = len(columns)
    from .detsolve import field_to_vector
    comp_vecs = [field_to_vector(g, columns) for g in sb.generators]
    catalog = computed_generators(ref.family, pins)

    reports = []
    comp_order = ('xi_t', 'xi_x', 'xi_z', 'eta')
    for row in ref.rows:
        cells = {c: ref.cell(row, c) for c in ref.cols}
        disputed = {c for c, rc in cells.items() if rc.dispute}
        if row == 'Xb':
            status = 'agree' if sb.infinite_family is not None \
                else 'disagree'
            for c in ref.cols:
                reports.append(CellReport(
                    ref.id, row, c, status, cells[c].raw.get('expr', '0'),
                    sb.infinite_family.shape
                    if sb.infinite_family is not None else 'absent',
                    note=cells[c].note))
            continue
        field = VectorField(*[cells[c].value['expr'] for c in comp_order])
        try:
            vec = field_to_vector(field, columns)
            contained, _, _ = in_span(comp_vecs, vec, n)
        except KernelError:
            contained = False
        cat = catalog.get(row)
        for c, comp_name in zip(ref.cols, comp_order):
            rc = cells[c]
            comp_e = getattr(cat, comp_name) if cat is not None else None
            comp_s = str(comp_e) if comp_e is not None else 'absent'
            if disputed:
                if c in disputed:
                    status = 'disagree' if contained else 'expected-dispute'
                else:
                    status = 'agree'
            else:
                status = 'agree' if contained else 'disagree'
            reports.append(CellReport(ref.id, row, c, status,
                                      rc.raw.get('expr', '0'), comp_s,
                                      note=rc.dispute or rc.note))
    extra = {
        'family': ref.family,
        'solved_dimension': sb.dimension,
        'dimension_label': sb.dimension_label(),
        'catalog_matches_solved': _catalog_matches(sb, catalog, columns),
    }
    return CheckReport(ref.id, reports, notes=ref.notes, extra=extra)


def _catalog_matches(sb, catalog, columns):
    """True when the cataloged fields and the solved basis span the same
    space (equal dimension plus mutual containment)."""
    from .detsolve import field_to_vector
    n = len(columns)
    comp_vecs = [field_to_vector(g, columns) for g in sb.generators]
    try:
        cat_vecs = [field_to_vector(g, columns) for g in catalog.values()]
    except KernelError:
        return False
    if len(cat_vecs) != len(comp_vecs):
        return False
    return span_equal(comp_vecs, cat_vecs, n)


def _check_classification(ref, ansatz=None):
    comp = computed_classification(ref.rows, ansatz)
    reports = []
    for row in ref.rows:
        for col in ref.cols:
            rc = ref.cell(row, col)
            cv = str(comp[row][col])
            if col in ref.display_cols:
                status = 'info'
            elif cv == rc.value:
                status = 'agree'
            elif rc.dispute:
                status = 'expected-dispute'
            else:
                status = 'disagree'
            reports.append(CellReport(ref.id, row, col, status, rc.value,
                                      cv, note=rc.dispute or rc.note))
    return CheckReport(ref.id, reports, notes=ref.notes)


def _check_optimal(ref):
    labels = computed_optimal(ref.family)
    reports = []
    for i, row in enumerate(ref.rows):
        rc = ref.cell(row, 'subalgebra')
        cv = labels[i] if i < len(labels) else 'absent'
        status = 'agree' if cv == rc.value else (
            'expected-dispute' if rc.dispute else 'disagree')
        reports.append(CellReport(ref.id, row, 'subalgebra', status,
                                  rc.value, cv, note=rc.dispute or rc.note))
    extra = {'family': ref.family, 'reference_count': len(ref.rows),
             'computed_count': len(labels)}
    return CheckReport(ref.id, reports, notes=ref.notes, extra=extra)


def check_table(table_id, ansatz=None, params=None):
    """Diff one reference table against its recomputation.

    Returns a CheckReport; CheckReport.ok is False only when an
    undisputed cell disagrees."""
    ref = load_reference(table_id)
    if table_id.startswith('commutators-'):
        return _check_matrix(ref, computed_commutators, params)
    if table_id.startswith('adjoint-'):
        return _check_matrix(ref, computed_adjoint, params)
    if table_id.startswith('generators-'):
        return _check_generators(ref, ansatz)
    if table_id == 'classify-f':
        return _check_classification(ref, ansatz)
    if table_id.startswith('optimal-'):
        return _check_optimal(ref)
    raise KeyError('no checker for table %r' % table_id)


def check_all(ansatz=None):
    """CheckReports for every embedded table, keyed by id."""
    return {tid: check_table(tid, ansatz) for tid in reference_ids()}
