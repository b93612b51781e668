"""Output rendering for tables and reports: text, json, latex, csv.

JSON output is canonical (sorted keys, fixed separators, trailing
newline) so identical inputs serialize to identical bytes.  Text tables
align on content width and color only when the stream is a terminal and
SYMMETRA_NO_COLOR is unset.  The latex renderer walks expression terms
directly rather than re-escaping display strings, so exact coefficients
like 1/(4*kappa) come out as proper fractions.
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
import sys
from fractions import Fraction

from .expr import Expression, _as_expr, _OPAQUE_ARG


def canonical_json(obj):
    """Deterministic byte-stable serialization of a report object."""
    return json.dumps(obj, sort_keys=True, separators=(',', ':')) + '\n'


# -- color -------------------------------------------------------------------

_STATUS_CODES = {'agree': '32', 'disagree': '31;1',
                 'expected-dispute': '33', 'info': '36'}


def color_enabled(stream=None):
    if os.environ.get('SYMMETRA_NO_COLOR'):
        return False
    stream = stream if stream is not None else sys.stdout
    return bool(getattr(stream, 'isatty', lambda: False)())


def paint(text, code, enabled):
    if not enabled or not code:
        return text
    return '\x1b[%sm%s\x1b[0m' % (code, text)


# -- latex -------------------------------------------------------------------

_GREEK = {'mu': r'\mu', 'kappa': r'\kappa', 'lam': r'\lambda',
          'eps': r'\epsilon', 'ep': r'\varepsilon', 'beta': r'\beta',
          'gamma': r'\gamma', 'alpha': r'\alpha', 'delta': r'\delta',
          'lam0': r'\lambda_0', 'eps0': r'\epsilon_0'}

_NAME_RE = re.compile(r'^([A-Za-z]+)([0-9]+)$')


def latex_symbol(name):
    """Parameter or variable name in latex form."""
    if name in _GREEK:
        return _GREEK[name]
    m = _NAME_RE.match(name)
    if m:
        return '%s_{%s}' % (latex_symbol(m.group(1)), m.group(2))
    if len(name) == 1:
        return name
    return r'\mathit{%s}' % name


def latex_fraction(c, tight=True):
    if c.denominator == 1:
        return str(c.numerator)
    frac = r'\tfrac' if tight else r'\frac'
    sign = '-' if c < 0 else ''
    return '%s%s{%d}{%d}' % (sign, frac, abs(c.numerator), c.denominator)


def _latex_atom(a):
    k = a[0]
    if k in ('v', 'p'):
        return latex_symbol(a[1])
    if k == 'j':
        nt, nx, nz = a[1]
        if nt == nx == nz == 0:
            return 'u'
        return 'u_{%s}' % ('t' * nt + 'x' * nx + 'z' * nz)
    if k == 'ln':
        return r'\ln\!\left(%s\right)' % _latex_atom(a[1])
    if k == 'o':
        name, deriv, arg = a[1], a[2], a[3]
        if len(deriv) == 3:
            sub = 't' * deriv[0] + 'x' * deriv[1] + 'z' * deriv[2]
            nm = name + ('_{%s}' % sub if sub else '')
            return '%s(t,x,z)' % nm
        order = deriv[0]
        nm = _GREEK.get(name, name)
        nm += "'" * order if order <= 3 else '^{(%d)}' % order
        if arg is not None:
            args = latex_expression(arg)
        else:
            args = _latex_atom(_OPAQUE_ARG.get(name, ('v', '?')))
        return '%s(%s)' % (nm, args)
    if k == 'sp':
        return '%s^{%s}' % (_latex_atom(a[1]), latex_expression(a[2]))
    if k == 'e':
        inner = a[2] * Expression({(((a[1]), Fraction(1)),): Fraction(1)})
        return r'e^{%s}' % latex_expression(inner)
    return '?'


def _latex_term(m, c):
    pieces = []
    for a, k in m:
        s = _latex_atom(a)
        if k != 1:
            ks = latex_fraction(Fraction(k)) if k.denominator == 1 \
                else '%d/%d' % (k.numerator, k.denominator)
            s += '^{%s}' % ks
        pieces.append(s)
    body = r'\,'.join(pieces)
    if not body:
        return latex_fraction(c)
    if c == 1:
        return body
    if c == -1:
        return '-' + body
    return latex_fraction(c) + r'\,' + body


def latex_expression(e):
    """Exact latex for a kernel expression."""
    e = _as_expr(e)
    terms = list(e.terms())
    if not terms:
        return '0'
    parts = []
    for m, c in terms:
        s = _latex_term(m, c)
        if not parts:
            parts.append(s)
        elif s.startswith('-'):
            parts.append('- ' + s[1:])
        else:
            parts.append('+ ' + s)
    return ' '.join(parts)


_BASIS_RE = re.compile(r'^X([0-9]+)([A-E])?$')


def latex_basis_name(name):
    m = _BASIS_RE.match(name)
    if m:
        sup = '^{%s}' % m.group(2) if m.group(2) else ''
        return 'X_{%s}%s' % (m.group(1), sup)
    if name.startswith('XT'):
        return 'X_{T}^{%s}' % name[2:]
    if name == 'Xb':
        return 'X_{b}'
    return latex_symbol(name)


def latex_combination(coeffs, order):
    """Latex for a basis-coefficient dict in the given basis order."""
    parts = []
    for name in order:
        c = coeffs.get(name)
        if c is None or (isinstance(c, Expression) and c.is_zero()):
            continue
        bn = latex_basis_name(name)
        c = _as_expr(c)
        terms = list(c.terms())
        if len(terms) == 1 and terms[0][0] == () and terms[0][1] == 1:
            term = bn
        elif len(terms) == 1 and terms[0][0] == () and terms[0][1] == -1:
            term = '-' + bn
        else:
            cs = latex_expression(c)
            if ' ' in cs:
                cs = r'\left(%s\right)' % cs
            term = cs + r'\,' + bn
        if not parts:
            parts.append(term)
        elif term.startswith('-'):
            parts.append('- ' + term[1:])
        else:
            parts.append('+ ' + term)
    return ' '.join(parts) if parts else '0'


_TEX_SPECIALS = {'&': r'\&', '%': r'\%', '#': r'\#', '_': r'\_',
                 '{': r'\{', '}': r'\}', '~': r'\textasciitilde{}',
                 '^': r'\textasciicircum{}', '\\': r'\textbackslash{}'}


def latex_escape(s):
    return ''.join(_TEX_SPECIALS.get(ch, ch) for ch in s)


# -- views -------------------------------------------------------------------

class TableView:
    """Format-independent table: plain rows plus optional latex rows
    and a meta dict merged into the json report."""

    __slots__ = ('title', 'headers', 'rows', 'latex_rows', 'notes',
                 'meta', 'status_col')

    def __init__(self, title, headers, rows, latex_rows=None, notes=(),
                 meta=None, status_col=None):
        self.title = title
        self.headers = list(headers)
        self.rows = [list(r) for r in rows]
        self.latex_rows = ([list(r) for r in latex_rows]
                           if latex_rows is not None else None)
        self.notes = list(notes)
        self.meta = dict(meta or {})
        self.status_col = status_col

    def as_report(self):
        rep = {'title': self.title, 'headers': self.headers,
               'rows': self.rows}
        if self.notes:
            rep['notes'] = self.notes
        rep.update(self.meta)
        return rep


def _text_table(view, color):
    headers = view.headers
    rows = view.rows
    widths = [len(h) for h in headers]
    for r in rows:
        for i, cell in enumerate(r):
            widths[i] = max(widths[i], len(str(cell)))
    out = []
    if view.title:
        out.append(view.title)
    out.append('  '.join(h.ljust(w) for h, w in zip(headers, widths))
               .rstrip())
    out.append('  '.join('-' * w for w in widths))
    for r in rows:
        cells = []
        for i, cell in enumerate(r):
            s = str(cell).ljust(widths[i])
            if color and i == view.status_col:
                s = paint(s, _STATUS_CODES.get(str(cell).strip(), ''),
                          True)
            cells.append(s)
        out.append('  '.join(cells).rstrip())
    for note in view.notes:
        out.append('note: %s' % note)
    return '\n'.join(out) + '\n'


def _csv_table(view):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(view.headers)
    for r in view.rows:
        w.writerow([str(c) for c in r])
    return buf.getvalue()


def _latex_table(view):
    rows = view.latex_rows if view.latex_rows is not None else [
        [latex_escape(str(c)) for c in r] for r in view.rows]
    ncols = len(view.headers)
    out = []
    if view.title:
        out.append('%% %s' % view.title)
    out.append(r'\begin{tabular}{%s}' % ('l' * ncols))
    out.append(r'\hline')
    out.append(' & '.join(r'\textbf{%s}' % latex_escape(h)
                          for h in view.headers) + r' \\')
    out.append(r'\hline')
    for r in rows:
        out.append(' & '.join('$%s$' % c if c and not c.startswith('\\text')
                              else c for c in r) + r' \\')
    out.append(r'\hline')
    out.append(r'\end{tabular}')
    for note in view.notes:
        out.append('%% note: %s' % note)
    return '\n'.join(out) + '\n'


def render(view, fmt, stream=None, color=None):
    """Write one view to the stream in the requested format."""
    stream = stream if stream is not None else sys.stdout
    if color is None:
        color = color_enabled(stream)
    if fmt == 'json':
        stream.write(canonical_json(view.as_report()))
    elif fmt == 'csv':
        stream.write(_csv_table(view))
    elif fmt == 'latex':
        stream.write(_latex_table(view))
    else:
        stream.write(_text_table(view, color))


def check_view(report):
    """TableView for a conformance CheckReport."""
    headers = ['row', 'col', 'status', 'reference', 'computed']
    rows = []
    for c in report.cells:
        rows.append([c.row, c.col, c.status, c.reference, c.computed])
    counts = report.counts()
    summary = ('%s: %s (agree %d, expected-dispute %d, disagree %d)'
               % (report.table, 'ok' if report.ok else 'MISMATCH',
                  counts['agree'], counts['expected-dispute'],
                  counts['disagree']))
    notes = [summary]
    notes.extend(report.notes)
    for c in report.cells:
        if c.status == 'expected-dispute' and c.note:
            notes.append('%s|%s: %s' % (c.row, c.col, c.note))
    return TableView('conformance check: ' + report.table, headers, rows,
                     notes=notes, meta={'check': report.as_report()},
                     status_col=2)
