"""Command-line front end over the symmetry toolkit.

Subcommands cover the full pipeline: solving for point symmetries,
bracket and adjoint tables, optimal-system audits, similarity
reductions, the travelling-wave phase portrait, numeric verification
sweeps, and the advection-shape classification summary.  Table-emitting
subcommands take --check, which diffs the recomputation against the
embedded reference tables cell by cell; cells the references are known
to get wrong are marked expected-dispute and never fail the diff.

Exit status: 0 on success, 1 on a verification mismatch, 2 on a usage
error.  Output is plain text by default; --format selects json (byte
stable for a fixed config and seed), latex, or csv.  SYMMETRA_NO_COLOR
disables ANSI color.
"""

from __future__ import annotations

import argparse
import re
import sys
from fractions import Fraction

from .catalog import (FAMILY_KINDS, generators_for, optimal_reps,
                      problem_for)
from .detsolve import find_symmetries, verify_table
from .emit import (TableView, check_view, latex_basis_name,
                   latex_combination, latex_expression, render)
from .expr import KernelError
from .fields import FCandidate
from .liealg import identify_algebra, optimal_system_check
from .phase import PhaseSystem, integrate, stationary_points, summarize
from .prolong import AnsatzSpec
from .reduce import ReductionError, first_integral, reduce_by_pair
from .tables import (check_table, computed_classification,
                     computed_adjoint, computed_commutators,
                     family_algebra, format_combination, reference_for)

OK, MISMATCH, USAGE = 0, 1, 2

_GENERALIZED = ('arbitrary', 'const', 'linear', 'power', 'quadratic',
                'exp', 'log')


class UsageError(Exception):
    pass


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError('not an exact number: %r' % text)


class RunConfig:
    """Validated option bundle shared by the subcommands."""

    __slots__ = ('cmd', 'family', 'fmt', 'out', 'seed', 'tol', 'degree',
                 'check', 'params', 'args')

    def __init__(self, args):
        self.cmd = args.cmd
        self.args = args
        self.family = getattr(args, 'family', None)
        self.fmt = getattr(args, 'format', 'text')
        self.out = getattr(args, 'out', None)
        self.seed = getattr(args, 'seed', 20260815)
        self.tol = getattr(args, 'tol', 1e-6)
        self.degree = getattr(args, 'degree', None)
        self.check = getattr(args, 'check', False)
        if self.tol is not None and self.tol <= 0:
            raise UsageError('tolerance must be positive')
        if self.degree is not None and self.degree < 1:
            raise UsageError('ansatz degree must be at least 1')
        self.params = {}
        for name in ('mu', 'kappa', 'u0', 'p', 'q'):
            val = getattr(args, name, None)
            if val is not None:
                self.params[name] = _fraction(val)
        fam = self.family
        if fam in ('power', 'exp') and self.params.get('mu') == 0:
            raise UsageError('mu must be nonzero for the %s family' % fam)
        if fam == 'quadratic' and self.params.get('kappa') == 0:
            raise UsageError('kappa must be nonzero for the quadratic '
                             'family')

    def problem(self):
        try:
            return problem_for(self.family, **self.params)
        except ValueError as exc:
            raise UsageError(str(exc))

    def ansatz(self, p):
        if self.degree is None:
            return None
        profile = 'polynomial'
        if p.kind == 'timevarying' and p.profile.kind in ('power',
                                                          'exponential'):
            profile = p.profile.kind
        return AnsatzSpec(degree=self.degree, profile=profile)

    def emit(self, view):
        if self.out:
            try:
                fh = open(self.out, 'w')
            except OSError as exc:
                raise UsageError('cannot write %s: %s' % (self.out, exc))
            with fh:
                render(view, self.fmt, stream=fh, color=False)
        else:
            render(view, self.fmt, stream=sys.stdout)


# -- shared view builders -----------------------------------------------------

def _matrix_view(title, names, cells, meta=None, notes=()):
    headers = ['*'] + list(names)
    rows, latex_rows = [], []
    for rn in names:
        rows.append([rn] + [format_combination(cells[(rn, cn)], names)
                            for cn in names])
        latex_rows.append(
            [latex_basis_name(rn)]
            + [latex_combination(cells[(rn, cn)], names) for cn in names])
    return TableView(title, headers, rows, latex_rows=latex_rows,
                     meta=meta, notes=notes)


def _run_check(cfg, kind):
    if kind == 'classify-f':
        tid = 'classify-f'
    else:
        tid = reference_for(kind, cfg.family)
    if tid is None:
        raise UsageError('no embedded reference table for %s of family '
                         '%r' % (kind, cfg.family))
    p = cfg.problem() if cfg.family else None
    ansatz = cfg.ansatz(p) if p is not None else None
    report = check_table(tid, ansatz=ansatz)
    cfg.emit(check_view(report))
    return OK if report.ok else MISMATCH


# -- subcommands ---------------------------------------------------------------

def cmd_symmetries(cfg):
    if cfg.check:
        return _run_check(cfg, 'generators')
    p = cfg.problem()
    gens = generators_for(p)
    report = verify_table(p, gens, ansatz=cfg.ansatz(p),
                          names=[g.name for g in gens])
    rows, latex_rows = [], []
    for g in gens:
        comps = [g.xi_t, g.xi_x, g.xi_z, g.eta]
        rows.append([g.name] + [str(c) for c in comps])
        latex_rows.append([latex_basis_name(g.name)]
                          + [latex_expression(c) for c in comps])
    notes = ['family: %s' % p.describe(),
             'solved dimension: %d%s' % (
                 report['computed_dimension'],
                 ' (plus a function-indexed slice)'
                 if report['infinite_family'] else ''),
             'catalog span agreement: %s'
             % ('yes' if report['all_contained'] and not report['surplus']
                else 'NO')]
    view = TableView('symmetry generators (%s)' % cfg.family,
                     ['name', 'xi_t', 'xi_x', 'xi_z', 'eta'],
                     rows, latex_rows=latex_rows, notes=notes,
                     meta={'verification': report})
    cfg.emit(view)
    ok = report['all_contained'] and not report['surplus']
    return OK if ok else MISMATCH


def cmd_commutators(cfg):
    if cfg.check:
        return _run_check(cfg, 'commutators')
    names, cells = computed_commutators(cfg.family, cfg.params or None)
    view = _matrix_view('Lie brackets (%s)' % cfg.family, names, cells,
                        meta={'family': cfg.family})
    cfg.emit(view)
    return OK


def cmd_adjoint(cfg):
    if cfg.check:
        return _run_check(cfg, 'adjoint')
    names, cells = computed_adjoint(cfg.family, cfg.params or None)
    view = _matrix_view('adjoint action (%s)' % cfg.family, names, cells,
                        meta={'family': cfg.family},
                        notes=['cell (i, j): Ad(exp(ep*Xi)) applied '
                               'to Xj, exact in ep'])
    cfg.emit(view)
    return OK


_SWEEP_DEFAULTS = {'u0': Fraction(1), 'mu': Fraction(2),
                   'kappa': Fraction(1)}


def _sweep_params(alg, pinned):
    """Exact values for every free parameter of the structure tensor."""
    needed = set()
    for row in alg.C:
        for cell in row:
            for e in cell:
                needed.update(a[1] for a in e.free_atoms()
                              if a[0] == 'p')
    if not needed:
        return None
    params = {}
    for name in sorted(needed):
        if name in pinned:
            params[name] = pinned[name]
        elif name in _SWEEP_DEFAULTS:
            params[name] = _SWEEP_DEFAULTS[name]
        else:
            raise UsageError('pin parameter %r (e.g. --%s 1) for the '
                             'numeric sweep' % (name, name))
    return params


def cmd_optimal(cfg):
    if cfg.check:
        return _run_check(cfg, 'optimal')
    try:
        reps = optimal_reps(cfg.family)
    except ValueError as exc:
        raise UsageError(str(exc))
    alg = family_algebra(cfg.family)
    samples = cfg.args.samples
    if samples is None:
        samples = 500 if cfg.family in ('qzk', 'linear') else 100
    sweep = None
    if samples > 0:
        sweep = optimal_system_check(
            alg, reps, n_samples=samples, seed=cfg.seed, tol=cfg.tol,
            params=_sweep_params(alg, cfg.params),
            separation_trials=cfg.args.separation_trials)
    rows = [[str(i + 1), r.label] for i, r in enumerate(reps)]
    notes = ['%d representative families' % len(reps)]
    meta = {'family': cfg.family, 'labels': [r.label for r in reps]}
    if sweep is not None:
        notes.append('coverage: %.4f over %d samples (seed %d)'
                     % (sweep['coverage'], sweep['n_samples'], cfg.seed))
        if sweep['separation_flags']:
            notes.append('overlap witnesses: %d'
                         % len(sweep['separation_flags']))
        meta['sweep'] = sweep
    view = TableView('one-dimensional optimal system (%s)' % cfg.family,
                     ['#', 'subalgebra'], rows, notes=notes, meta=meta)
    cfg.emit(view)
    if sweep is not None and sweep['coverage'] < cfg.args.min_coverage:
        return MISMATCH
    return OK


_NAME_TAIL = re.compile(r'(X(?:[0-9]+[A-E]?|T[0-9]+|b))\s*$')


def _split_terms(s):
    terms, cur, depth = [], '', 0
    for ch in s:
        if ch == '(':
            depth += 1
        elif ch == ')':
            depth -= 1
        if ch in '+-' and depth == 0 and cur.strip() \
                and cur.rstrip()[-1] not in '*/^(+-':
            terms.append(cur)
            cur = ch
        else:
            cur += ch
    if cur.strip():
        terms.append(cur)
    return terms


def _parse_combo(text, fields):
    """A field from 'X4' or 'X1+2*X2' style syntax over catalog names."""
    from .parser import parse, ParseError
    total = None
    for term in _split_terms(text):
        term = term.strip()
        m = _NAME_TAIL.search(term)
        if m is None:
            raise UsageError('no generator name in %r' % term)
        name = m.group(1)
        if name not in fields:
            raise UsageError('unknown generator %r; have %s'
                             % (name, ', '.join(sorted(fields))))
        head = term[:m.start()].strip().rstrip('*').strip()
        if head in ('', '+'):
            coeff_s = '1'
        elif head == '-':
            coeff_s = '-1'
        else:
            coeff_s = head
        try:
            coeff = parse(coeff_s)
        except ParseError as exc:
            raise UsageError('bad coefficient %r: %s' % (coeff_s, exc))
        piece = fields[name].scaled(coeff)
        total = piece if total is None else total + piece
    if total is None:
        raise UsageError('empty generator combination %r' % text)
    return total


def cmd_reduce(cfg):
    p = cfg.problem()
    fields = {g.name: g for g in generators_for(p)}
    pair = cfg.args.pair.split(',')
    if len(pair) != 2:
        raise UsageError("--pair wants 'A,B' with two combinations")
    v1 = _parse_combo(pair[0], fields)
    v2 = _parse_combo(pair[1], fields)
    try:
        ode = reduce_by_pair(p, v1, v2)
        for _ in range(cfg.args.quadratures):
            ode = first_integral(ode)
    except (ReductionError, KernelError) as exc:
        print('symmetra: reduction failed: %s' % exc, file=sys.stderr)
        return MISMATCH
    rep = ode.as_report()
    rows = [[k, str(rep[k])] for k in ('equation', 'order', 'variable',
                                       'ansatz', 'multiplier',
                                       'provenance')]
    rows.append(['invariants', '; '.join(rep['invariants'])])
    if rep['constants']:
        rows.append(['constants', ', '.join(rep['constants'])])
    view = TableView('similarity reduction (%s)' % cfg.family,
                     ['item', 'value'], rows, meta={'reduction': rep})
    cfg.emit(view)
    return OK


def cmd_phase(cfg):
    a = cfg.args
    f = None
    params = {}
    if a.f != 'linear':
        ctor = {'const': FCandidate.const, 'power': FCandidate.power,
                'quadratic': FCandidate.quadratic,
                'exp': FCandidate.exponential,
                'log': FCandidate.logarithmic}[a.f]
        kw = {}
        if a.mu is not None and a.f in ('power', 'exp'):
            kw['mu'] = _fraction(a.mu)
            if kw['mu'] == 0:
                raise UsageError('mu must be nonzero for %s advection'
                                 % a.f)
        if a.kappa is not None and a.f == 'quadratic':
            kw['kappa'] = _fraction(a.kappa)
        kw['u0'] = Fraction(0)
        f = ctor(**kw)
    try:
        s = PhaseSystem(a.beta, a.gamma, u1=a.u1, u0=a.u0, f=f,
                        params=params)
    except ValueError as exc:
        raise UsageError(str(exc))

    if a.orbit is not None:
        try:
            u_s, v_s = a.orbit.split(',')
            ic = (float(u_s), float(v_s))
        except ValueError:
            raise UsageError("--orbit wants 'U,V'")
        tr = integrate(s, ic, a.h, a.steps)
        rows = [['%.12g' % y, '%.12g' % u, '%.12g' % v, '%.12g' % e]
                for y, u, v, e in zip(tr.y, tr.u, tr.v, tr.energy)]
        view = TableView('phase orbit from (%g, %g)' % ic,
                         ['y', 'u', 'v', 'energy'], rows,
                         meta={'orbit': tr.as_report(),
                               'system': s.describe()},
                         notes=['h = %g, %d steps%s'
                                % (a.h, a.steps,
                                   ', diverged' if tr.diverged else '')])
        cfg.emit(view)
        return OK

    report = summarize(s, window=a.window)
    rows = []
    for pt in report['points']:
        evs = ', '.join('%g%+gi' % (ev['re'], ev['im'])
                        for ev in pt['eigenvalues'])
        rows.append(['%.12g' % pt['u'], pt['class'],
                     '%.12g' % pt['curvature'], evs])
    notes = ['advection: %s' % report['f'],
             '%d stationary points in |U| <= %g'
             % (len(report['points']), a.window)]
    for per in report['periods']:
        notes.append('linearised period at U=%.6g: %.9g'
                     % (per['u'], per['period']))
    view = TableView('phase portrait survey (beta=%g, gamma=%g, u1=%g)'
                     % (s.beta, s.gamma, s.u1),
                     ['U', 'class', 'curvature', 'eigenvalues'],
                     rows, notes=notes, meta={'survey': report})
    cfg.emit(view)
    return OK


def cmd_verify(cfg):
    from .numverify import full_verification
    eps_vals = None
    if cfg.args.eps:
        eps_vals = tuple(_fraction(e) for e in cfg.args.eps)
    kw = {} if eps_vals is None else {'eps_vals': eps_vals}
    report = full_verification(**kw)
    rows = []
    for r in report['residuals']:
        rows.append(['residual', r['solution'], '-',
                     '%.3e' % r['residual'], 'ok' if r['ok'] else 'FAIL'])
    for fl in report['flows']:
        rows.append(['flow eps=%g' % fl['eps'], fl['solution'],
                     fl['generator'], '%.3e' % fl['residual'],
                     'ok' if fl['ok'] else 'FAIL'])
    view = TableView('numeric verification sweep',
                     ['check', 'solution', 'generator', 'residual',
                      'status'],
                     rows, meta={'verification': report},
                     notes=['overall: %s'
                            % ('ok' if report['ok'] else 'FAIL')])
    cfg.emit(view)
    return OK if report['ok'] else MISMATCH


def cmd_classify_f(cfg):
    if cfg.check:
        return _run_check(cfg, 'classify-f')
    rows_map = computed_classification()
    rows = []
    for fam, row in rows_map.items():
        rows.append([fam, row['advection'], row['dimension'],
                     row['algebra'], row['generators']])
    view = TableView('advection-shape classification',
                     ['family', 'advection', 'dimension', 'algebra',
                      'generators'],
                     rows,
                     meta={'classification': rows_map},
                     notes=['algebra names come from basis-free '
                            'invariants; unrecognized types carry their '
                            'invariant fingerprint'])
    cfg.emit(view)
    return OK


# -- parser --------------------------------------------------------------------

def _build_parser():
    top = argparse.ArgumentParser(
        prog='symmetra',
        description='Lie point symmetry toolkit for third-order '
                    'dispersive advection equations.')
    sub = top.add_subparsers(dest='cmd')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=('text', 'json', 'latex',
                                             'csv'), default='text')
    common.add_argument('--out', metavar='PATH',
                        help='write output to a file instead of stdout')
    common.add_argument('--seed', type=int, default=20260815)
    common.add_argument('--tol', type=float, default=1e-6)

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument('--family', choices=FAMILY_KINDS, default='qzk')
    fam.add_argument('--mu', help='advection exponent or rate (exact, '
                                  'e.g. 2 or 1/3)')
    fam.add_argument('--kappa', help='quadratic advection weight (exact)')
    fam.add_argument('--u0', help='advection offset (exact)')
    fam.add_argument('--p', help='time-power or rate of the third-order '
                                 'dispersion (exact)')
    fam.add_argument('--q', help='time-power or rate of the mixed '
                                 'dispersion (exact)')

    deg = argparse.ArgumentParser(add_help=False)
    deg.add_argument('--degree', type=int, default=None,
                     help='polynomial ansatz degree (default 3; the '
                          'time-varying profiles use their own shape)')

    chk = argparse.ArgumentParser(add_help=False)
    chk.add_argument('--check', action='store_true',
                     help='diff the recomputation against the embedded '
                          'reference table, cell by cell')

    ps = sub.add_parser('symmetries', parents=[common, fam, deg, chk],
                        help='solve the determining equations and verify '
                             'the cataloged generator span')
    ps.set_defaults(handler=cmd_symmetries)

    pc = sub.add_parser('commutators', parents=[common, fam, chk],
                        help='bracket table over the cataloged basis')
    pc.set_defaults(handler=cmd_commutators)

    pa = sub.add_parser('adjoint', parents=[common, fam, chk],
                        help='exact adjoint-action table')
    pa.set_defaults(handler=cmd_adjoint)

    po = sub.add_parser('optimal', parents=[common, fam, chk],
                        help='one-dimensional optimal system with a '
                             'seeded coverage audit')
    po.add_argument('--samples', type=int, default=None,
                    help='random elements to test (default 500 for the '
                         'base family, 100 otherwise; 0 skips)')
    po.add_argument('--min-coverage', type=float, default=0.99)
    po.add_argument('--separation-trials', type=int, default=8,
                    help='optimization restarts per representative pair '
                         'in the overlap audit (0 skips it)')
    po.set_defaults(handler=cmd_optimal)

    pr = sub.add_parser('reduce', parents=[common, fam],
                        help='similarity reduction by a two-dimensional '
                             'subalgebra')
    pr.add_argument('--pair', required=True, metavar='A,B',
                    help="two generators or combinations, e.g. "
                         "'X4,X5' or 'X1+2*X2,X3'")
    pr.add_argument('--quadratures', type=int, default=0,
                    help='how many first integrals to take afterwards')
    pr.set_defaults(handler=cmd_reduce)

    pp = sub.add_parser('phase', parents=[common],
                        help='travelling-wave phase portrait: rest '
                             'points, classes, orbits')
    pp.add_argument('--beta', type=float, required=True)
    pp.add_argument('--gamma', type=float, required=True)
    pp.add_argument('--u1', type=float, default=0.0,
                    help='first integration constant')
    pp.add_argument('--u0', type=float, default=0.0,
                    help='second integration constant (report only)')
    pp.add_argument('--f', choices=('linear', 'const', 'power',
                                    'quadratic', 'exp', 'log'),
                    default='linear', help='advection shape')
    pp.add_argument('--mu', help='advection exponent or rate (exact)')
    pp.add_argument('--kappa', help='quadratic advection weight (exact)')
    pp.add_argument('--window', type=float, default=1000.0,
                    help='search window for rest points')
    pp.add_argument('--orbit', metavar='U,V',
                    help='emit one integrated orbit from this start')
    pp.add_argument('--h', type=float, default=1e-3,
                    help='RK4 step for --orbit')
    pp.add_argument('--steps', type=int, default=10000,
                    help='RK4 step count for --orbit')
    pp.set_defaults(handler=cmd_phase)

    pv = sub.add_parser('verify', parents=[common],
                        help='numeric residual and flow-transport sweep '
                             'over the cataloged solutions')
    pv.add_argument('--eps', action='append', metavar='T',
                    help='flow time (exact; repeatable)')
    pv.set_defaults(handler=cmd_verify)

    pf = sub.add_parser('classify-f', parents=[common, deg, chk],
                        help='classification summary across advection '
                             'shapes')
    pf.set_defaults(handler=cmd_classify_f)
    return top


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.cmd is None:
        parser.print_usage(sys.stderr)
        return USAGE
    try:
        cfg = RunConfig(args)
        return args.handler(cfg)
    except UsageError as exc:
        print('symmetra: error: %s' % exc, file=sys.stderr)
        return USAGE
    except BrokenPipeError:
        return OK


if __name__ == '__main__':
    sys.exit(main())
