"""Phase-plane analysis of the reduced travelling-wave flow.

The travelling-wave reduction of the advection--dispersion family ends in
a second-order profile equation

    (b^2 + g^2) U'' = g b^2 U - b^2 F(U) + C1,        F' = f,

with f the advection coefficient of the source PDE, F its antiderivative,
and C1 the constant picked up by the first integration.  This module
studies the companion first-order system in the form

    U' = V,        V' = g b^2 U - b^2 F(U) + C1,

i.e. with the inertia constant b^2 + g^2 folded into a rescaled
independent variable (and V scaled along with it).  The fold leaves the
orbit geometry alone: stationary points, their classes, energy level sets
and the portrait are identical in both conventions; eigenvalues and
periods differ by the factor sqrt(b^2 + g^2).  `PhaseSystem.wave_rhs`
hands back the unfolded right-hand side for callers who want the profile
parametrised by the original wave variable.

Everything here is floating point.  The exact travelling-wave reduction
itself lives in `reduce`; this module takes over where closed forms stop.
"""

import csv
import itertools
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .expr import KernelError
from .fields import FCandidate

__all__ = [
    'CLASSES', 'PhaseSystem', 'StationaryPoint', 'Trajectory',
    'classify', 'closed_form_stationary', 'detect_periodic', 'integrate',
    'parameter_sweep', 'stationary_points', 'summarize',
]

# Labels a linear fixed-point classifier can emit.  The Jacobian of this
# family is [[0, 1], [c, 0]]: trace zero, so spirals, sources and sinks
# cannot occur.  The labels stay in the schema so reports have a stable
# vocabulary.
CLASSES = ('centre', 'saddle', 'source', 'sink', 'degenerate')

_DEGENERATE_TOL = 1e-10     # |c| at or below this counts as degenerate
_ROOT_TOL = 1e-12           # bracket width target for bisection
_DIVERGENCE_BOUND = 1e8     # |U| + |V| beyond this truncates a trajectory


def _nan_guard(fn):
    """Turn domain and overflow errors into NaN so grid scans can mask."""
    def call(u):
        try:
            v = fn(u)
        except (ValueError, OverflowError, ZeroDivisionError):
            return math.nan
        return v
    return call


def _pin(e, env, what):
    try:
        v = float(e.evaluate(env or {}))
    except KernelError:
        raise ValueError('%s needs a numeric value; pass it via params'
                         % what)
    if not math.isfinite(v):
        raise ValueError('%s is not finite' % what)
    return v


def _advection_kernels(fc, params):
    """Scalar callables (f, F, G) for one advection family, with G' = F
    and F' = f, all exact antiderivatives.  Symbolic parameters must be
    pinned through `params`."""
    kind = fc.kind
    if kind == 'arbitrary':
        raise ValueError('phase analysis needs a concrete advection '
                         'family, not an unrestricted f(u)')
    u0 = _pin(fc.u0, params, "offset 'u0'") if kind != 'linear' else 0.0
    if kind == 'const':
        return (lambda u: u0,
                lambda u: u0 * u,
                lambda u: u0 * u * u / 2.0)
    if kind == 'linear':
        return (lambda u: u,
                lambda u: u * u / 2.0,
                lambda u: u * u * u / 6.0)
    if kind == 'quadratic':
        kap = _pin(fc.kappa, params, "coefficient 'kappa'")
        return (lambda u: u + kap * u * u + u0,
                lambda u: u * u / 2.0 + kap * u ** 3 / 3.0 + u0 * u,
                lambda u: u ** 3 / 6.0 + kap * u ** 4 / 12.0
                + u0 * u * u / 2.0)
    if kind == 'power':
        mu = _pin(fc.mu, params, "exponent 'mu'")
        f = _nan_guard(lambda u: math.pow(u, mu) + u0)
        if abs(mu + 1.0) < 1e-14:
            F = _nan_guard(lambda u: math.log(u) + u0 * u)
            G = _nan_guard(
                lambda u: u * math.log(u) - u + u0 * u * u / 2.0)
        elif abs(mu + 2.0) < 1e-14:
            F = _nan_guard(lambda u: -1.0 / u + u0 * u)
            G = _nan_guard(lambda u: -math.log(u) + u0 * u * u / 2.0)
        else:
            F = _nan_guard(
                lambda u: math.pow(u, mu + 1.0) / (mu + 1.0) + u0 * u)
            G = _nan_guard(
                lambda u: math.pow(u, mu + 2.0) / ((mu + 1.0) * (mu + 2.0))
                + u0 * u * u / 2.0)
        return f, F, G
    if kind == 'exp':
        mu = _pin(fc.mu, params, "exponent 'mu'")
        if mu == 0.0:
            raise ValueError("exponential advection needs 'mu' != 0")
        return (_nan_guard(lambda u: math.exp(mu * u) + u0),
                _nan_guard(lambda u: math.exp(mu * u) / mu + u0 * u),
                _nan_guard(lambda u: math.exp(mu * u) / (mu * mu)
                           + u0 * u * u / 2.0))
    if kind == 'log':
        return (_nan_guard(lambda u: math.log(u) + u0),
                _nan_guard(lambda u: u * math.log(u) - u + u0 * u),
                _nan_guard(lambda u: u * u * math.log(u) / 2.0
                           - 3.0 * u * u / 4.0 + u0 * u * u / 2.0))
    raise ValueError('unknown advection kind %r' % kind)


class PhaseSystem:
    """One travelling-wave flow: wave speeds, integration constants and
    the advection family, with fast scalar kernels attached.

    `u1` is the constant of the first integration (it shifts the
    stationary points); `u0` is the constant of the second one.  The flow
    itself never sees `u0` -- it only names the energy level of the
    quadrature -- but it is kept so reports can carry it."""

    __slots__ = ('beta', 'gamma', 'u1', 'u0', 'fcand', 'params',
                 'advection', 'F', '_G')

    def __init__(self, beta, gamma, u1=0.0, u0=0.0, f=None, params=None):
        self.beta = float(beta)
        self.gamma = float(gamma)
        if self.beta ** 2 + self.gamma ** 2 <= 0.0:
            raise ValueError('beta and gamma cannot both vanish')
        self.u1 = float(u1)
        self.u0 = float(u0)
        self.fcand = FCandidate.linear() if f is None else f
        self.params = dict(params or {})
        self.advection, self.F, self._G = _advection_kernels(
            self.fcand, self.params)

    @property
    def inertia(self):
        return self.beta ** 2 + self.gamma ** 2

    def rhs(self, u, v):
        b2 = self.beta * self.beta
        return v, self.gamma * b2 * u - b2 * self.F(u) + self.u1

    def wave_rhs(self, u, v):
        """Right-hand side in the unfolded convention, where V' carries
        the 1/(b^2+g^2) factor of the profile equation."""
        du, dv = self.rhs(u, v)
        return du, dv / self.inertia

    def curvature(self, ustar):
        """The single free Jacobian entry c at (ustar, 0): the linearised
        system is U' = V, V' = c U."""
        b2 = self.beta * self.beta
        return b2 * (self.gamma - self.advection(ustar))

    def energy(self, u, v):
        """Conserved along `rhs` orbits: V^2/2 - (g b^2/2) U^2
        + b^2 G(U) - C1 U with G' = F."""
        b2 = self.beta * self.beta
        return (v * v / 2.0 - self.gamma * b2 * u * u / 2.0
                + b2 * self._G(u) - self.u1 * u)

    def describe(self):
        return {
            'beta': self.beta, 'gamma': self.gamma,
            'u1': self.u1, 'u0': self.u0,
            'f': self.fcand.describe(),
        }

    def __repr__(self):
        return ('PhaseSystem(beta=%g, gamma=%g, u1=%g, f=%r)'
                % (self.beta, self.gamma, self.u1, self.fcand.kind))


class StationaryPoint:
    """A rest point (U*, 0) with its linearisation attached."""

    __slots__ = ('u', 'v', 'curvature', 'eigenvalues', 'kind')

    def __init__(self, system, ustar, residual_tol=None):
        _, dv = system.rhs(ustar, 0.0)
        c = system.curvature(ustar)
        # residual gate at unit scale, widened in step with the local
        # slope so steep parameter regimes are not rejected spuriously
        tol = residual_tol
        if tol is None:
            tol = _ROOT_TOL * max(1.0, abs(c), abs(system.u1))
        if not abs(dv) < tol:
            raise ValueError('point U=%r is not stationary '
                             '(residual %.3e)' % (ustar, dv))
        self.u = float(ustar)
        self.v = 0.0
        self.curvature = c
        if abs(c) <= _DEGENERATE_TOL:
            self.kind = 'degenerate'
            self.eigenvalues = (complex(0.0), complex(0.0))
        elif c > 0:
            r = math.sqrt(c)
            self.kind = 'saddle'
            self.eigenvalues = (complex(r), complex(-r))
        else:
            w = math.sqrt(-c)
            self.kind = 'centre'
            self.eigenvalues = (complex(0.0, w), complex(0.0, -w))

    def as_report(self):
        return {
            'u': self.u,
            'class': self.kind,
            'curvature': self.curvature,
            'eigenvalues': [{'re': ev.real, 'im': ev.imag}
                            for ev in self.eigenvalues],
        }

    def __repr__(self):
        return ('StationaryPoint(u=%.12g, %s)' % (self.u, self.kind))


def closed_form_stationary(s, window=1000.0):
    """Rest points of the unit-advection flow in closed form: the rest
    condition is quadratic in U with roots g +/- sqrt(g^2 + 2 C1 / b^2).
    Only the linear family has this; anything else returns None.  Roots
    are filtered to |U| <= window; a negative discriminant means none."""
    if s.fcand.kind != 'linear':
        return None
    disc = s.gamma * s.gamma + 2.0 * s.u1 / (s.beta * s.beta)
    if disc < 0.0:
        return []
    r = math.sqrt(disc)
    roots = [s.gamma - r, s.gamma + r] if r > 0.0 else [s.gamma]
    return [u for u in roots if abs(u) <= window]


def _bisect(g, lo, hi, flo):
    while hi - lo > _ROOT_TOL:
        mid = 0.5 * (lo + hi)
        fm = g(mid)
        if fm == 0.0 or math.isnan(fm):
            return mid
        if (flo < 0.0) != (fm < 0.0):
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _newton_polish(g, dg, x, steps=60):
    for _ in range(steps):
        fx = g(x)
        if fx == 0.0 or math.isnan(fx):
            break
        d = dg(x)
        if d == 0.0 or math.isnan(d):
            break
        step = fx / d
        x_new = x - step
        if x_new == x:
            break
        x = x_new
    return x


def stationary_points(s, window=1000.0, n_grid=20001, method='auto'):
    """All rest points with |U| <= window, sorted by U.

    The workhorse is a sign-change scan on a uniform grid followed by
    bisection to 1e-12 and a Newton polish; grid minima of |V'| catch
    tangential roots that never change sign.  For the linear family the
    closed-form pair is computed as well and the two routes are checked
    against each other (`method='bisect'` suppresses the closed form,
    which the agreement tests rely on)."""
    if method not in ('auto', 'bisect'):
        raise ValueError("method must be 'auto' or 'bisect'")

    def g(u):
        return s.rhs(u, 0.0)[1]

    def dg(u):
        c = s.curvature(u)
        return c if math.isfinite(c) else math.nan

    us = np.linspace(-window, window, n_grid)
    vals = np.array([g(u) for u in us])
    finite = np.isfinite(vals)
    if bool(finite.any()) and float(np.abs(vals[finite]).max()) == 0.0:
        raise ValueError('the rest condition vanishes identically; '
                         'every point is stationary')

    roots = []

    def push(x):
        if not math.isfinite(x) or abs(x) > window:
            return
        for r in roots:
            # a tangential root is flat to roundoff over ~1e-8, so
            # anything closer than 1e-6 is the same point
            if abs(r - x) < 1e-6 * max(1.0, abs(r)):
                return
        roots.append(x)

    for i in range(n_grid - 1):
        if not (finite[i] and finite[i + 1]):
            continue
        a, b = float(vals[i]), float(vals[i + 1])
        if a == 0.0:
            push(float(us[i]))
            continue
        if (a < 0.0) != (b < 0.0):
            x = _bisect(g, float(us[i]), float(us[i + 1]), a)
            push(_newton_polish(g, dg, x))
    if n_grid > 1 and finite[-1] and float(vals[-1]) == 0.0:
        push(float(us[-1]))

    # tangential roots: |g| dips to ~0 without a sign change.  A genuine
    # tangency sits at most half a grid cell from its minimum, where the
    # dip is bounded by the second difference; minima above that bound
    # cannot be roots and are skipped.
    absv = np.abs(vals)
    for i in range(1, n_grid - 1):
        if not (finite[i - 1] and finite[i] and finite[i + 1]):
            continue
        if not (absv[i] <= absv[i - 1] and absv[i] <= absv[i + 1]):
            continue
        bend = abs(float(vals[i - 1] - 2.0 * vals[i] + vals[i + 1]))
        if absv[i] <= max(1e-9, bend):
            x = _newton_polish(g, dg, float(us[i]), steps=200)
            if abs(g(x)) < _ROOT_TOL * max(1.0, abs(dg(x)), abs(s.u1)):
                push(x)

    closed = closed_form_stationary(s, window) if method == 'auto' else None
    if closed is not None:
        for u in closed:
            matched = any(abs(u - r) < 1e-6 * max(1.0, abs(u))
                          for r in roots)
            if not matched and abs(g(u)) < _ROOT_TOL * max(
                    1.0, abs(dg(u)), abs(s.u1)):
                # tangentially touched root the scan cannot bracket
                matched = True
            if not matched:
                raise RuntimeError(
                    'closed-form rest point %r not reproduced by the '
                    'scanning root-finder' % u)
        # prefer the closed-form values where the two routes agree
        merged = list(closed)
        for r in roots:
            if all(abs(r - u) >= 1e-6 * max(1.0, abs(u)) for u in merged):
                merged.append(r)
        roots = merged

    roots.sort()
    return [StationaryPoint(s, u) for u in roots]


def classify(s, pt):
    """Class label at a rest point (a StationaryPoint or a bare U value):
    eigenvalues of [[0, 1], [c, 0]] are +/- sqrt(c), so c < 0 is a
    centre, c > 0 a saddle, and |c| <= 1e-10 degenerate.  The trace is
    identically zero, which rules source and sink labels out."""
    u = getattr(pt, 'u', pt)
    return StationaryPoint(s, float(u)).kind


class Trajectory:
    """A fixed-step orbit sample with its energy trace."""

    __slots__ = ('y', 'u', 'v', 'energy', 'h', 'diverged')

    def __init__(self, y, u, v, energy, h, diverged):
        self.y = np.asarray(y, dtype=float)
        self.u = np.asarray(u, dtype=float)
        self.v = np.asarray(v, dtype=float)
        self.energy = np.asarray(energy, dtype=float)
        self.h = h
        self.diverged = diverged

    def __len__(self):
        return len(self.y)

    @property
    def energy_drift(self):
        """Worst absolute deviation of H from its initial value."""
        if len(self.energy) == 0:
            return 0.0
        return float(np.abs(self.energy - self.energy[0]).max())

    @property
    def energy_drift_rel(self):
        scale = max(abs(float(self.energy[0])), 1e-30) \
            if len(self.energy) else 1.0
        return self.energy_drift / scale

    def endpoint(self):
        return float(self.u[-1]), float(self.v[-1])

    def write_csv(self, target):
        """Write (y, U, V, H) rows; `target` is a path or a text file."""
        own = isinstance(target, str)
        fh = open(target, 'w', newline='') if own else target
        try:
            w = csv.writer(fh)
            w.writerow(('y', 'U', 'V', 'H'))
            for k in range(len(self.y)):
                w.writerow(('%.17g' % self.y[k], '%.17g' % self.u[k],
                            '%.17g' % self.v[k], '%.17g' % self.energy[k]))
        finally:
            if own:
                fh.close()

    def as_report(self):
        return {
            'steps': len(self.y) - 1,
            'h': self.h,
            'diverged': self.diverged,
            'energy_drift': self.energy_drift,
            'energy_drift_rel': self.energy_drift_rel,
            'endpoint': {'u': float(self.u[-1]), 'v': float(self.v[-1])}
            if len(self.y) else None,
        }


def integrate(s, ic, h, n):
    """Classical fixed-step RK4 from `ic = (U, V)` for `n` steps.

    The step is fixed on purpose: drift figures must be reproducible
    run to run.  When |U| + |V| passes 1e8, or the state stops being
    finite, the trajectory is truncated and flagged.  The flow is
    reversible through V -> -V (H is even in V), so a backward leg is
    `integrate(s, (u, -v), h, n)` read in reverse."""
    h = float(h)
    if not h > 0.0:
        raise ValueError('step must be positive')
    n = int(n)
    if n < 0:
        raise ValueError('step count must be nonnegative')
    u, v = float(ic[0]), float(ic[1])
    ys, us, vs, hs = [0.0], [u], [v], [s.energy(u, v)]
    rhs = s.rhs
    diverged = False
    for k in range(n):
        du1, dv1 = rhs(u, v)
        du2, dv2 = rhs(u + 0.5 * h * du1, v + 0.5 * h * dv1)
        du3, dv3 = rhs(u + 0.5 * h * du2, v + 0.5 * h * dv2)
        du4, dv4 = rhs(u + h * du3, v + h * dv3)
        u = u + h * (du1 + 2.0 * du2 + 2.0 * du3 + du4) / 6.0
        v = v + h * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4) / 6.0
        if not (math.isfinite(u) and math.isfinite(v)) \
                or abs(u) + abs(v) > _DIVERGENCE_BOUND:
            diverged = True
            break
        ys.append((k + 1) * h)
        us.append(u)
        vs.append(v)
        hs.append(s.energy(u, v))
    return Trajectory(ys, us, vs, hs, h, diverged)


def _linearised_period(pt):
    if pt.kind != 'centre':
        return None
    return 2.0 * math.pi / math.sqrt(-pt.curvature)


def detect_periodic(s, ic, hints=None):
    """Period of the orbit through `ic`, or None.

    The detector watches the section V = 0 for upward crossings and
    takes the spacing of two consecutive ones, each located by linear
    interpolation between steps.  Three shortcuts come first: an `ic`
    sitting on a centre reports the linearised period 2 pi / sqrt(|c|);
    one sitting on any other rest point has no orbit to measure; and an
    `ic` sharing its energy level with a saddle can only creep into that
    saddle, so it is reported aperiodic without integrating.  `hints`
    may carry 'h' (step, default 1e-3) and 'budget' (max steps, default
    300000); exhausting the budget or diverging yields None."""
    hints = dict(hints or {})
    h = float(hints.get('h', 1e-3))
    if not h > 0.0:
        raise ValueError('step must be positive')
    budget = int(hints.get('budget', 300000))
    u, v = float(ic[0]), float(ic[1])

    try:
        points = stationary_points(s)
    except ValueError:
        points = []
    for pt in points:
        if abs(u - pt.u) < 1e-9 and abs(v) < 1e-9:
            return _linearised_period(pt)
    e0 = s.energy(u, v)
    for pt in points:
        if pt.kind != 'saddle':
            continue
        es = s.energy(pt.u, 0.0)
        if abs(e0 - es) <= 1e-9 * max(1.0, abs(es)):
            return None

    rhs = s.rhs
    crossings = []
    y = 0.0
    for _ in range(budget):
        du1, dv1 = rhs(u, v)
        du2, dv2 = rhs(u + 0.5 * h * du1, v + 0.5 * h * dv1)
        du3, dv3 = rhs(u + 0.5 * h * du2, v + 0.5 * h * dv2)
        du4, dv4 = rhs(u + h * du3, v + h * dv3)
        un = u + h * (du1 + 2.0 * du2 + 2.0 * du3 + du4) / 6.0
        vn = v + h * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4) / 6.0
        yn = y + h
        if not (math.isfinite(un) and math.isfinite(vn)) \
                or abs(un) + abs(vn) > _DIVERGENCE_BOUND:
            return None
        if v < 0.0 <= vn:
            frac = v / (v - vn)
            yc = y + h * frac
            uc = u + (un - u) * frac
            crossings.append((yc, uc))
            if len(crossings) >= 2:
                (y1, u1), (y2, u2) = crossings[-2], crossings[-1]
                if abs(u2 - u1) <= 1e-6 * max(1.0, abs(u1)):
                    return y2 - y1
        u, v, y = un, vn, yn
    return None


def summarize(s, window=1000.0):
    """JSON-ready survey: rest points with classes and eigenvalues, plus
    the linearised period at every centre."""
    try:
        points = stationary_points(s, window=window)
    except ValueError:
        points = []
    report = s.describe()
    report['points'] = [pt.as_report() for pt in points]
    report['periods'] = [
        {'u': pt.u, 'period': _linearised_period(pt)}
        for pt in points if pt.kind == 'centre'
    ]
    return report


def parameter_sweep(betas, gammas, u1s, f=None, params=None, u0=0.0,
                    window=1000.0, max_workers=None):
    """Survey every (beta, gamma, u1) combination in parallel.

    Each combination is independent and deterministic, so the sweep maps
    them over a thread pool and returns the reports in product order
    (betas outermost).  Combinations that fail to build (for instance a
    degenerate rest condition) are reported with an 'error' entry rather
    than aborting the sweep."""
    combos = list(itertools.product(betas, gammas, u1s))

    def one(combo):
        b, g, c1 = combo
        try:
            sys_ = PhaseSystem(b, g, u1=c1, u0=u0, f=f, params=params)
            return summarize(sys_, window=window)
        except (ValueError, RuntimeError) as exc:
            return {'beta': float(b), 'gamma': float(g), 'u1': float(c1),
                    'error': str(exc)}

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, combos))
