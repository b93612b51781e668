"""Exact linear algebra over parameter polynomials.

The determining systems have entries that are rational numbers or small
polynomials in symbolic parameters (mu, kappa, u0, p, q).  Elimination is
fraction-free: a pivot never divides a row; rows combine by
cross-multiplication and are then stripped to primitive form (rational
content and any common monomial factor removed).  A pivot entry that
depends on parameters is legal but recorded as a case split, since the
reduction is only valid where it does not vanish; rational pivots are
preferred whenever a column offers one.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import Expression, ZERO, ONE, exact_div, _normalize_mono

_F = Fraction


class CaseSplit:
    """A parameter assumption made during elimination."""

    __slots__ = ('pivot', 'note')

    def __init__(self, pivot, note):
        self.pivot = pivot
        self.note = note

    def __repr__(self):
        return 'CaseSplit(%s)' % self.note


def _mono_gcd_of_expr(e):
    """Largest monomial dividing every term (exponent-wise minimum)."""
    best = None
    for m, _ in e._d.items():
        md = dict(m)
        if best is None:
            best = md
        else:
            nxt = {}
            for a, k in best.items():
                nxt[a] = min(k, md.get(a, _F(0)))
            for a, k in md.items():
                if a not in best:
                    nxt[a] = min(k, _F(0))
            best = {a: k for a, k in nxt.items() if k != 0}
    return best or {}


def _normalize_row(row):
    """Strip rational content and common monomial factors; fix sign."""
    if not row:
        return row
    common = None
    for e in row.values():
        g = _mono_gcd_of_expr(e)
        if common is None:
            common = g
        else:
            nxt = {}
            for a, k in common.items():
                nxt[a] = min(k, g.get(a, _F(0)))
            for a, k in g.items():
                if a not in common:
                    nxt[a] = min(k, _F(0))
            common = {a: k for a, k in nxt.items() if k != 0}
        if not common:
            common = {}
    inv = Expression({_normalize_mono([(a, -k) for a, k in common.items()]):
                      _F(1)}) if common else None
    out = {}
    for c in sorted(row):
        e = row[c]
        if inv is not None:
            e = e * inv
        out[c] = e
    # collective rational content, sign keyed to the lowest column
    num, den = 0, 1
    from math import gcd
    for e in out.values():
        for cf in e._d.values():
            num = gcd(num, cf.numerator)
            den = den * cf.denominator // gcd(den, cf.denominator)
    content = _F(num, den)
    lead_col = min(out)
    if out[lead_col].leading()[1] < 0:
        content = -content
    if content != 1:
        inv_c = _F(1) / content
        out = {c: e * inv_c for c, e in out.items()}
    return out


def _row_combine(target, pivot_row, col):
    """Fraction-free elimination of `col` from target using pivot_row."""
    pe = pivot_row[col]
    te = target[col]
    out = {}
    for c, e in target.items():
        out[c] = pe * e
    for c, e in pivot_row.items():
        v = out.get(c, ZERO) - te * e
        if v.is_zero():
            out.pop(c, None)
        else:
            out[c] = v
    return out


def _vanish_note(e):
    """Human-readable description of where a parameter pivot vanishes."""
    params = sorted({a[1] for m in e._d for a, _ in m if a[0] == 'p'})
    if len(params) == 1:
        name = params[0]
        key = ('p', name)
        # linear in the parameter: c1*name + c0 with rational c1, c0
        c1 = e.partial(key)
        if c1.is_rational() and not c1.is_zero():
            c0 = e.substitute_param(name, 0)
            if c0.is_rational():
                root = -c0.as_fraction() / c1.as_fraction()
                return 'vanishes when %s = %s' % (name, root)
        if len(e._d) == 1:
            # a pure power c*name^k vanishes exactly at name = 0
            return 'vanishes when %s = 0' % name
    return 'vanishes on the zero set of %s' % e


class Echelon:
    __slots__ = ('pivots', 'case_splits', 'ncols')

    def __init__(self, pivots, case_splits, ncols):
        self.pivots = pivots          # list of (col, row dict), col ascending
        self.case_splits = case_splits
        self.ncols = ncols

    @property
    def rank(self):
        return len(self.pivots)

    def pivot_cols(self):
        return [c for c, _ in self.pivots]


def eliminate(rows, ncols):
    """Row echelon form of sparse rows (dicts col -> Expression), with
    deterministic column order 0..ncols-1 and rational-pivot preference.
    Duplicate rows are dropped after normalization."""
    active = []
    seen = set()
    for r in rows:
        r = {c: e for c, e in r.items() if not e.is_zero()}
        if not r:
            continue
        r = _normalize_row(r)
        sig = tuple(sorted((c, e.keystr()) for c, e in r.items()))
        if sig not in seen:
            seen.add(sig)
            active.append(r)
    pivots = []
    case_splits = []
    for col in range(ncols):
        cands = [(i, r) for i, r in enumerate(active) if col in r]
        if not cands:
            continue
        def rank_key(ir):
            e = ir[1][col]
            return (0 if e.is_rational() else 1, e.n_terms(), len(ir[1]), ir[0])
        i, prow = min(cands, key=rank_key)
        pe = prow[col]
        if not pe.is_rational():
            case_splits.append(CaseSplit(
                pe, 'pivot %s in column %d %s' % (pe, col, _vanish_note(pe))))
        del active[i]
        nxt = []
        for r in active:
            if col in r:
                r = _row_combine(r, prow, col)
                if not r:
                    continue
                r = _normalize_row(r)
            nxt.append(r)
        active = nxt
        pivots.append((col, prow))
    return Echelon(pivots, case_splits, ncols)


def null_space(rows, ncols):
    """Basis of the exact solution space of the homogeneous system.
    Returns (basis, echelon): basis vectors are tuples of Expressions,
    denominator-free (each vector is scaled through by the pivots it met)
    and content-normalized, one per free column, ordered by free column."""
    ech = eliminate(rows, ncols)
    pivot_cols = set(ech.pivot_cols())
    free_cols = [c for c in range(ncols) if c not in pivot_cols]
    basis = []
    for fc in free_cols:
        vec = {fc: ONE}
        for col, prow in reversed(ech.pivots):
            s = ZERO
            for c, e in prow.items():
                if c == col:
                    continue
                vc = vec.get(c)
                if vc is not None:
                    s = s + e * vc
            if s.is_zero():
                vec[col] = ZERO
                continue
            p = prow[col]
            q = exact_div(s, p)
            if q is not None:
                vec[col] = -q
            else:
                vec = {c: p * e for c, e in vec.items()}
                vec[col] = -s
        row = _normalize_row({c: e for c, e in vec.items()
                              if not e.is_zero()})
        basis.append(tuple(row.get(c, ZERO) for c in range(ncols)))
    return basis, ech


def residual_against(ech, vector):
    """Reduce a dense vector against an echelon form without division.
    The result is identically zero iff the vector lies in the row span
    (generically, under the echelon's case splits)."""
    r = {c: e for c, e in enumerate(vector) if not e.is_zero()}
    for col, prow in ech.pivots:
        if col in r:
            r = _row_combine(r, prow, col)
    if r:
        r = _normalize_row(r)
    return tuple(r.get(c, ZERO) for c in range(ech.ncols))


def in_span(vectors, target, ncols):
    """Is `target` in the exact span of `vectors`?  Works over the
    parameter field: cross-multiplication only, case splits reported."""
    rows = [{c: e for c, e in enumerate(v) if not e.is_zero()}
            for v in vectors]
    ech = eliminate(rows, ncols)
    res = residual_against(ech, target)
    ok = all(e.is_zero() for e in res)
    return ok, res, ech.case_splits


def span_equal(vs, ws, ncols):
    """Mutual containment of two exact spans."""
    fwd = all(in_span(ws, v, ncols)[0] for v in vs)
    bwd = all(in_span(vs, w, ncols)[0] for w in ws)
    return fwd and bwd


def rref(rows, ncols, col_priority=None):
    """Fully reduced form with an optional column elimination order.
    col_priority lists columns first in line for pivoting; remaining
    columns follow in index order.  Returns (reduced sparse rows in
    pivot order, pivot columns, case splits), all in original indices."""
    if col_priority is None:
        perm = list(range(ncols))
    else:
        rest = [c for c in range(ncols) if c not in set(col_priority)]
        perm = list(col_priority) + rest
    inv = {c: i for i, c in enumerate(perm)}
    prows = [{inv[c]: e for c, e in r.items()} for r in rows]
    ech = eliminate(prows, ncols)
    pivots = list(ech.pivots)
    # back-reduce earlier pivot rows against later ones
    for i in range(len(pivots) - 1, -1, -1):
        col_i, row_i = pivots[i]
        for j in range(i):
            col_j, row_j = pivots[j]
            if col_i in row_j:
                row_j = _normalize_row(_row_combine(row_j, row_i, col_i))
                pivots[j] = (col_j, row_j)
    out_rows = [{perm[c]: e for c, e in row.items()} for _, row in pivots]
    out_cols = [perm[c] for c, _ in pivots]
    return out_rows, out_cols, ech.case_splits


def verify_null_vector(rows, vec):
    """Exact check rows . vec == 0 for every row."""
    for r in rows:
        s = ZERO
        for c, e in r.items():
            v = vec[c]
            if not v.is_zero():
                s = s + e * v
        if not s.is_zero():
            return False
    return True
