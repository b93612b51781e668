"""Grid checks that closed forms really solve their equations and that
symmetry flows carry solutions to solutions.

Nothing here approximates a derivative.  A candidate solution arrives
either as an Expression in (t, x, z), in which case every derivative in
the equation is formed symbolically before any number enters, or as a
travelling profile backed by a spline, whose derivative callables are
exact for the interpolant.  The grid only supplies evaluation points and
a max reduction, so a residual reflects the identity being tested rather
than discretisation error.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import catalog
from .expr import KernelError, opaque
from .flows import PointFlow
from .phase import PhaseSystem, integrate

__all__ = [
    'Grid', 'TravellingProfile', 'catalog_residuals', 'corrupt_component',
    'default_grid', 'flow_check', 'full_verification', 'residual',
    'travelling_profile_from_orbit',
]

_UJET = ('j', (0, 0, 0))

RESIDUAL_TOL = 1e-10
FLOW_TOL = 1e-9


class Grid:
    """Cartesian (t, x, z) sample block with an optional exclusion
    predicate for singular loci.  At least five samples per axis, and
    the exclusion must leave something to evaluate on."""

    __slots__ = ('t', 'x', 'z')

    def __init__(self, t_range=(1.0, 2.0), x_range=(-1.0, 1.0),
                 z_range=(-1.0, 1.0), counts=(17, 17, 17), exclude=None):
        counts = tuple(int(c) for c in counts)
        if len(counts) != 3 or any(c < 5 for c in counts):
            raise ValueError('need at least 5 samples per axis')
        axes = [np.linspace(float(lo), float(hi), c)
                for (lo, hi), c in zip((t_range, x_range, z_range), counts)]
        tt, xx, zz = np.meshgrid(*axes, indexing='ij')
        t, x, z = tt.ravel(), xx.ravel(), zz.ravel()
        if exclude is not None:
            keep = np.array([not exclude(ti, xi, zi)
                             for ti, xi, zi in zip(t, x, z)])
            t, x, z = t[keep], x[keep], z[keep]
        if t.size == 0:
            raise ValueError('exclusion predicate removed every point')
        self.t, self.x, self.z = t, x, z

    def __len__(self):
        return int(self.t.size)

    def __repr__(self):
        return 'Grid(%d points)' % len(self)


def default_grid():
    """t in [1, 2] keeps scaling solutions away from their t = 0 locus;
    x and z cover [-1, 1]; 17 samples per axis."""
    return Grid()


def flow_grid():
    """Grid for transported-solution checks.  Flow times up to |1| drag
    the time axis by as much, so the t range starts at 2.5: a shifted
    pole at t = eps stays outside for every tested eps."""
    return Grid(t_range=(2.5, 3.5))


class TravellingProfile:
    """u(t, x, z) = S(b z - g t + g x) for a one-dimensional profile S.

    S must expose exact derivatives through `.derivative(k)` (scipy
    spline objects do).  Chain rule turns every (t, x, z) derivative into
    a power of the direction coefficients times a pure S derivative, so
    the grid sees exact interpolant calculus only."""

    __slots__ = ('beta', 'gamma', 'profile', '_dcache')

    def __init__(self, beta, gamma, profile):
        self.beta = float(beta)
        self.gamma = float(gamma)
        self.profile = profile
        self._dcache = {0: profile}

    def wave_coordinate(self, t, x, z):
        return self.beta * z - self.gamma * t + self.gamma * x

    def _deriv(self, k):
        if k not in self._dcache:
            self._dcache[k] = self.profile.derivative(k)
        return self._dcache[k]

    def jet_values(self, J, t, x, z):
        nt, nx, nz = J
        y = self.wave_coordinate(t, x, z)
        factor = ((-self.gamma) ** nt) * (self.gamma ** nx) \
            * (self.beta ** nz)
        return factor * self._deriv(nt + nx + nz)(y)


def _finite_or_raise(vals, what):
    arr = np.asarray(vals, dtype=float)
    if not np.isfinite(arr).all():
        raise ValueError('%s is not finite on the grid; extend the '
                         'exclusion predicate past the singular points'
                         % what)
    return arr


def _base_env(g, params):
    env = {'t': g.t, 'x': g.x, 'z': g.z}
    for k, v in (params or {}).items():
        env[k] = float(v)
    return env


def _bind_coefficients(env, p, params):
    # concrete advection and dispersion shapes become callables; an
    # unrestricted shape has nothing to evaluate and stays unbound, so a
    # later lookup fails loudly
    fc = getattr(p, 'fcand', None)
    if fc is not None and fc.kind != 'arbitrary':
        env[('o', 'f')] = fc.numeric(params)
    prof = getattr(p, 'profile', None)
    if prof is not None and prof.kind != 'arbitrary':
        def profile_call(which):
            def call(deriv, tval):
                k = deriv[0] if isinstance(deriv, tuple) else deriv
                e = which(k)
                local = dict(params or {})
                local['t'] = tval
                return e.evaluate(local)
            return call
        env[('o', 'lam')] = profile_call(prof.lam)
        env[('o', 'eps')] = profile_call(prof.eps)
    return env


def _residual_expression(sol, p):
    """The full symbolic residual of `sol` in problem `p`: every
    derivative formed exactly, u eliminated."""
    if any(a[0] == 'j' for a in sol.free_atoms()):
        raise ValueError('a candidate solution must be a function of '
                         '(t, x, z) alone, not of u-derivatives')
    lhs = p.lhs()
    if any(a[0] == 'o' and a[1] == 'f' for a in lhs.free_atoms()):
        # the advection argument defaults to the unknown itself; spell
        # it out so the substitution reaches inside
        lhs = lhs.substitute_opaque(
            'f', lambda k, arg: opaque('f', k,
                                       arg=arg.substitute(_UJET, sol)))
    return lhs.substitute(_UJET, sol, with_consequences=True)


def residual(sol, p, g=None, params=None):
    """Max |lhs| of problem `p` over the grid with u = `sol`.

    `sol` is an Expression in (t, x, z) -- derivatives are substituted
    symbolically before evaluation -- or a TravellingProfile, whose
    exact derivative callables feed the jet slots directly.  Symbolic
    parameters (the slope of a solution family, an advection exponent)
    are pinned through `params`."""
    g = g or default_grid()
    if isinstance(sol, TravellingProfile):
        lhs = p.lhs()
        env = _base_env(g, params)
        _bind_coefficients(env, p, params)
        needed = {a for a in lhs.free_atoms() if a[0] == 'j'}
        needed.add(_UJET)
        with np.errstate(all='ignore'):
            for a in needed:
                env[a] = _finite_or_raise(
                    sol.jet_values(a[1], g.t, g.x, g.z),
                    'the profile derivative u%s' % (a[1],))
            vals = lhs.evaluate(env)
        return float(np.max(np.abs(_finite_or_raise(vals, 'the residual'))))

    full = _residual_expression(sol, p)
    if full.is_zero():
        return 0.0
    env = _base_env(g, params)
    _bind_coefficients(env, p, params)
    with np.errstate(all='ignore'):
        try:
            vals = full.evaluate(env)
        except KernelError as exc:
            raise ValueError('residual is not numerically evaluable: %s'
                             % exc)
    return float(np.max(np.abs(_finite_or_raise(vals, 'the residual'))))


def _as_eps(eps_val):
    if isinstance(eps_val, Fraction):
        return eps_val
    if isinstance(eps_val, int):
        return Fraction(eps_val)
    return Fraction(str(float(eps_val)))


def _is_autonomous(lhs):
    # no bare coordinates, and no time-profile coefficients (whose
    # implicit argument is t)
    for a in lhs.free_atoms():
        if a[0] == 'v':
            return False
        if a[0] == 'o' and a[1] in ('lam', 'eps'):
            return False
        if a[0] in ('ln', 'sp', 'e'):
            return False
    return True


def _translation_residual(v, sol, p, eps, g, params):
    """Exact fallback for pure constant translations.

    The transported function is u composed with a rigid shift, and an
    autonomous operator commutes with shifts, so its residual is the
    original residual function sampled on the shifted grid.  Returns
    None when `v` is not such a translation or the operator depends on
    a shifted coordinate explicitly."""
    comps = v.components()
    if not comps[3].is_zero():
        return None
    shifts = []
    for c in comps[:3]:
        if c.is_zero():
            shifts.append(0.0)
        elif c.is_rational():
            shifts.append(float(c.as_fraction()) * float(eps))
        else:
            return None
    if not _is_autonomous(p.lhs()):
        return None
    full = _residual_expression(sol, p)
    if full.is_zero():
        return 0.0
    env = _base_env(g, params)
    _bind_coefficients(env, p, params)
    env['t'] = g.t - shifts[0]
    env['x'] = g.x - shifts[1]
    env['z'] = g.z - shifts[2]
    with np.errstate(all='ignore'):
        vals = full.evaluate(env)
    return float(np.max(np.abs(_finite_or_raise(
        vals, 'the transported residual'))))


def flow_check(v, sol, p, eps_val, g=None, params=None):
    """Residual of `sol` pushed along the flow of `v` for time
    `eps_val`.  The flow must have a closed form (affine coefficients);
    anything else raises the flow construction error unchanged.  A true
    symmetry keeps the residual at zero scale; a corrupted field shows
    up immediately.

    A rigid shift can push a pole of `sol` around (a shifted 1/t is not
    a Laurent monomial any more), which the expression kernel cannot
    hold; for that case the residual is instead evaluated exactly on
    the inversely shifted grid, which is the same function.

    The flow time stays symbolic while the residual is being formed --
    a genuine symmetry cancels for every time at once -- and is bound
    numerically only at grid evaluation."""
    g = g or default_grid()
    eps = _as_eps(eps_val)
    flow = PointFlow.of(v)
    try:
        moved = flow.transport_solution(sol)
    except KernelError:
        r = _translation_residual(v, sol, p, eps, g, params)
        if r is None:
            raise
        return r
    prm = dict(params or {})
    prm['ep'] = float(eps)
    return residual(moved, p, g=g, params=prm)


def corrupt_component(v, index, factor=Fraction(11, 10)):
    """Scale one component of a field, for negative controls.  Scaling a
    zero component is a no-op and gets rejected."""
    comps = list(v.components())
    if comps[index].is_zero():
        raise ValueError('component %d of %s is zero; corrupting it '
                         'changes nothing' % (index, v.name or v))
    comps[index] = comps[index] * factor
    name = ('%s-corrupt' % v.name) if v.name else None
    out = type(v)(*comps)
    return out.named(name) if name else out


# sample values for the free constants of catalogued solution families
_PARAM_SAMPLES = {'c': 0.7, 'c0': 1.25}


def catalog_residuals(g=None, params=None):
    """Residual of every catalogued closed form on its own family."""
    g = g or default_grid()
    env = dict(_PARAM_SAMPLES)
    env.update(params or {})
    out = []
    for sol in catalog.solution_catalog():
        p = catalog.problem_for(sol.family)
        r = residual(sol.expression, p, g=g, params=env)
        out.append({
            'solution': sol.name,
            'family': sol.family,
            'residual': r,
            'ok': r < RESIDUAL_TOL,
        })
    return out


def full_verification(eps_vals=(Fraction(1, 10), Fraction(-1, 10), 1, -1),
                      g=None, params=None, max_workers=None):
    """The whole grid: catalogued solutions against their equations,
    then every catalogued generator against every solution for each flow
    time.  Items are independent, so the flow block runs on a thread
    pool; the report order is fixed by the catalogue, not the pool.
    Residuals use the default grid, transported solutions the shifted
    `flow_grid`, unless `g` overrides both."""
    env = dict(_PARAM_SAMPLES)
    env.update(params or {})
    residuals = catalog_residuals(g=g or default_grid(), params=env)
    fg = g or flow_grid()

    p = catalog.problem_for('qzk')
    gens = catalog.generators_for(p)
    sols = [s for s in catalog.solution_catalog() if s.family == 'qzk']
    tasks = [(v, s, e) for v in gens for s in sols for e in eps_vals]

    def one(task):
        v, s, e = task
        r = flow_check(v, s.expression, p, e, g=fg, params=env)
        return {
            'generator': v.name,
            'solution': s.name,
            'eps': float(e),
            'residual': r,
            'ok': r < FLOW_TOL,
        }

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        flows = list(pool.map(one, tasks))
    ok = all(r['ok'] for r in residuals) and all(f['ok'] for f in flows)
    return {'residuals': residuals, 'flows': flows, 'ok': ok}


def travelling_profile_from_orbit(beta, gamma, u1, ic, h, n, f=None,
                                  params=None, k=5):
    """Travelling solution sampled from the reduced flow.

    RK4 samples of a bounded orbit are splined (degree `k`; the default
    quintic keeps the third derivative accurate to O(h^3)) and wrapped
    as a TravellingProfile.  The reduced flow runs in the rescaled frame
    with the inertia constant folded away, so sample abscissae are
    stretched by sqrt(b^2 + g^2) on the way out; a backward leg through
    the V-flip conjugacy covers negative wave coordinates."""
    from scipy.interpolate import make_interp_spline

    s = PhaseSystem(beta, gamma, u1=u1, f=f, params=params)
    scale = math.sqrt(s.inertia)
    fwd = integrate(s, ic, h, n)
    bwd = integrate(s, (ic[0], -ic[1]), h, n)
    if fwd.diverged or bwd.diverged:
        raise ValueError('the sampled orbit is not bounded')
    taus = np.concatenate([-bwd.y[::-1], fwd.y[1:]])
    us = np.concatenate([bwd.u[::-1], fwd.u[1:]])
    spline = make_interp_spline(scale * taus, us, k=k)
    return TravellingProfile(beta, gamma, spline)
