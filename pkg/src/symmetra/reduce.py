"""Similarity reduction: invariants of affine generators and the ODEs
they leave behind.

The invariant builder is a recipe cascade, not an ODE solver.  Every
generator used in a reduction is affine in (t, x, z, u), so its flow
can be eliminated against a pivot coordinate in closed form:

  * a pivot whose rate is a monomial in frozen coordinates gives
    cross-section invariants by evaluating the other flows at the
    parameter value that returns the pivot to zero;
  * a pivot that scales itself gives power-ratio invariants, with
    particular corrections for drift terms and a logarithmic recipe
    for coordinates drifting at a flow-invariant rate.

Each candidate is verified by applying the generator; nothing is
returned on faith.  A two-generator reduction runs the cascade twice,
once per field (the second rewritten on the first field's invariant
chart), then substitutes the joint ansatz into the equation and splits
off the common multiplier.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import (Expression, KernelError, ONE, ZERO, _as_expr, const,
                   exp_of, ln_of, opaque, param, spow, var)
from .liealg import expand_in_basis
from .linsolve import _mono_gcd_of_expr

_F = Fraction
_UJET = ('j', (0, 0, 0))
_BASE = ('t', 'x', 'z', 'u')


class ReductionError(KernelError):
    pass


class Invariant:
    """A verified first integral of a generator's characteristic flow."""

    __slots__ = ('expression', 'role', 'anchor')

    def __init__(self, expression, role, anchor=None):
        self.expression = expression
        self.role = role
        self.anchor = anchor

    def __str__(self):
        return '%s  (%s)' % (self.expression, self.role)

    def __repr__(self):
        return 'Invariant(%s)' % self


def _vkey(name):
    return ('v', name)


def _is_affine(e, names):
    keys = {_vkey(n) for n in names}
    for m, _ in e.terms():
        deg = 0
        for a, k in m:
            if a in keys:
                if k != 1:
                    return False
                deg += 1
            elif a[0] != 'p':
                return False
        if deg > 1:
            return False
    return True


def _is_free_of(e, name):
    return _vkey(name) not in e.free_atoms(recursive=True)


def _coeff_of(e, name):
    """(k, s): e == k*name + s with neither containing name."""
    k = e.partial(_vkey(name))
    s = e - k * var(name)
    if not _is_free_of(k, name) or not _is_free_of(s, name):
        raise ReductionError('component not affine in %s: %s' % (name, e))
    return k, s


def _apply_comps(comps, names, e):
    out = ZERO
    for n, c in zip(names, comps):
        if not c.is_zero():
            out = out + c * e.partial(_vkey(n))
    return out


def _single_monomial(e):
    ts = e.terms()
    if len(ts) != 1:
        return None
    return ts[0]


def _constantish(e):
    return e.is_rational() or e.is_param_only()


def _mono_uses(mono, names):
    used = set()
    for a, _ in mono:
        if a[0] == 'v' and a[1] in names:
            used.add(a[1])
    return used


def _frozen_only(e, names, frozen):
    return all(_mono_uses(m, names) <= set(frozen) for m, _ in e.terms())


def _invert(e):
    """Exact reciprocal of a monomial (or rational) expression."""
    if e == ONE:
        return ONE
    if e.is_rational():
        c = e.as_fraction()
        if not c:
            raise ReductionError('cannot invert zero')
        return const(_F(1) / c)
    mono = _single_monomial(e)
    if mono is None:
        raise ReductionError('cannot invert %s in the Laurent kernel' % e)
    m, c = mono
    out = const(_F(1) / c)
    for a, k in m:
        out = out * Expression({((a, -k),): _F(1)})
    return out


def _atom_as_expr(a):
    return Expression({((a, _F(1)),): _F(1)})


def _mono_expr(md):
    """Monomial dict {atom: exponent} rebuilt as an Expression through
    multiplication, so the kernel's canonical atom order applies."""
    out = ONE
    for a, k in md.items():
        if k:
            out = out * Expression({((a, k),): _F(1)})
    return out


class _Recipe:
    """One constructed invariant, kept invertible: the invariant equals
    scale * anchor + rest with scale and rest free of the anchor."""

    __slots__ = ('anchor', 'expression', 'scale', 'rest')

    def __init__(self, anchor, expression, scale, rest):
        self.anchor = anchor
        self.expression = expression
        self.scale = scale
        self.rest = rest

    def solve(self, value):
        """The anchor coordinate in terms of `value` for the invariant
        (plus whatever pivot and frozen coordinates scale/rest carry)."""
        return (value - self.rest) * _invert(self.scale)


def _pivot_section(comps, names):
    """Invariant recipes for one generator over the named coordinates.

    Returns (recipes, frozen, pivot): frozen coordinates have zero
    component and are invariants as-is; each recipe eliminates the flow
    against the pivot for one remaining coordinate.  Candidate pivots
    are tried in coordinate order, translation-like ones first."""
    comps = [_as_expr(c) for c in comps]
    for n, c in zip(names, comps):
        if not _is_affine(c, names):
            raise ReductionError('component %s d_%s is not affine in (%s)'
                                 % (c, n, ', '.join(names)))
    frozen = [n for n, c in zip(names, comps) if c.is_zero()]
    moving = [(n, c) for n, c in zip(names, comps) if not c.is_zero()]
    if not moving:
        raise ReductionError('zero generator leaves every function '
                             'invariant')
    comp_of = dict(zip(names, comps))
    failures = []

    for n, c in moving:
        k_self, s = _coeff_of(c, n)
        if not k_self.is_zero():
            continue
        mono = _single_monomial(s)
        if mono is None or not (_mono_uses(mono[0], names) <= set(frozen)):
            continue
        try:
            return _section_linear(comp_of, names, n, s, frozen)
        except KernelError as exc:
            failures.append('pivot %s: %s' % (n, exc))

    for n, c in moving:
        k_self, s = _coeff_of(c, n)
        if s.is_zero() and _constantish(k_self):
            try:
                return _section_scaling(comp_of, names, n, k_self, frozen)
            except KernelError as exc:
                failures.append('pivot %s: %s' % (n, exc))

    raise ReductionError('no closed-form cross-section for components (%s)'
                         % '; '.join([str(c) for c in comps] + failures))


def _section_linear(comp_of, names, pivot, rate, frozen):
    """The pivot moves at a frozen-monomial rate; evaluate every other
    flow at the parameter -pivot/rate that returns the pivot to zero."""
    recipes = []
    eps_star = -var(pivot) * _invert(rate)
    rate_const = _constantish(rate)
    for n in names:
        if n == pivot or n in frozen:
            continue
        c = comp_of[n]
        k_self, s = _coeff_of(c, n)
        if k_self.is_zero():
            if _is_free_of(s, pivot):
                if not _frozen_only(s, names, frozen):
                    raise ReductionError('rate of %s mixes moving '
                                         'coordinates: %s' % (n, s))
                rest = s * eps_star
                recipes.append(_Recipe(n, var(n) + rest, ONE, rest))
                continue
            # drift polynomial in the pivot: integrate it along the
            # flow pivot(tau) = pivot + rate*tau, then evaluate at the
            # section parameter
            if not rate_const:
                raise ReductionError('pivot rate must be constant to '
                                     'integrate a %s-dependent drift'
                                     % pivot)
            rest = _integrated_drift(s, pivot, rate, eps_star)
            recipes.append(_Recipe(n, var(n) + rest, ONE, rest))
            continue
        if not _constantish(k_self):
            raise ReductionError('self-coupling of %s is not constant: %s'
                                 % (n, k_self))
        if not s.is_zero():
            raise ReductionError('mixed drift and self-coupling for %s'
                                 % n)
        if not rate_const:
            raise ReductionError('exponential twist needs a constant '
                                 'pivot rate, got %s' % rate)
        scale = exp_of(-k_self * _invert(rate) * var(pivot))
        recipes.append(_Recipe(n, var(n) * scale, scale, ZERO))
    return recipes, frozen, pivot


def _integrated_drift(s, pivot, rate, eps_star):
    """integral_0^epsilon s(pivot + rate*tau) dtau at epsilon = eps_star,
    for s polynomial in the pivot."""
    tau = var('_tau')
    shifted = s.substitute_var(pivot, var(pivot) + rate * tau)
    poly = _antideriv_var(shifted, '_tau')
    out = poly.substitute_var('_tau', eps_star)
    if not _is_free_of(out, '_tau'):
        raise ReductionError('drift integration left the flow parameter '
                             'behind')
    return out


def _antideriv_var(e, name):
    key = _vkey(name)
    out = ZERO
    for m, c in e.terms():
        md = dict(m)
        k = md.pop(key, _F(0))
        if k < 0 or k.denominator != 1:
            raise ReductionError('cannot integrate %s power %s' % (name, k))
        md[key] = k + 1
        out = out + const(c / (k + 1)) * _mono_expr(md)
    return out


def _section_scaling(comp_of, names, pivot, kp, frozen):
    """The pivot scales itself with weight kp; power ratios kill the
    flow parameter.  Drift in another component picks up a particular
    correction, and flow-invariant drift against zero self-weight gives
    a logarithm."""
    recipes = []
    inv_kp = _invert(kp)
    for n in names:
        if n == pivot or n in frozen:
            continue
        c = comp_of[n]
        k_self, s = _coeff_of(c, n)
        if not (k_self.is_zero() or _constantish(k_self)):
            raise ReductionError('self-coupling of %s is not constant: %s'
                                 % (n, k_self))
        if k_self.is_zero():
            if not _frozen_only(s, names, frozen):
                raise ReductionError('drift %s of %s is not flow-'
                                     'invariant' % (s, n))
            rest = -s * inv_kp * ln_of(var(pivot))
            recipes.append(_Recipe(n, var(n) + rest, ONE, rest))
            continue
        weight = k_self * inv_kp
        scale = _pivot_power(pivot, -weight)
        rest = ZERO
        for m, cf in s.terms():
            md = dict(m)
            mpow = md.pop(_vkey(pivot), _F(0))
            if not _mono_uses(m, names) - {pivot} <= set(frozen):
                raise ReductionError('drift of %s mixes moving '
                                     'coordinates' % n)
            if not weight.is_rational():
                raise ReductionError('drift against the symbolic weight '
                                     '%s has no Laurent correction'
                                     % weight)
            denom = kp * (const(mpow) - weight)
            if denom.is_zero():
                raise ReductionError('resonant drift for %s (pivot power '
                                     '%s matches its weight)' % (n, mpow))
            d = const(cf) * _mono_expr(md) * _invert(denom)
            shift = const(mpow) - weight
            rest = rest - d * _pivot_power(pivot, shift)
        recipes.append(_Recipe(n, var(n) * scale + rest, scale, rest))
    return recipes, frozen, pivot


def _pivot_power(name, expo):
    expo = _as_expr(expo)
    if expo.is_zero():
        return ONE
    if expo.is_rational():
        return Expression({((_vkey(name), expo.as_fraction()),): _F(1)})
    return spow(var(name), expo)


def _field_comps(v):
    """VectorField components with the unknown flattened to the plain
    variable u, so the recipe engine sees one uniform atom kind."""
    return [c.substitute(_UJET, var('u')) for c in v.components()]


def invariants_of(v):
    """Complete invariant set (three members) of one affine generator.

    Every returned expression is checked to be annihilated by the
    generator; roles mark the member carrying u as dependent."""
    comps = _field_comps(v)
    recipes, frozen, _ = _pivot_section(comps, _BASE)
    out = [Invariant(var(n), 'independent', anchor=n) for n in frozen]
    for r in recipes:
        role = 'independent' if _is_free_of(r.expression, 'u') \
            else 'dependent'
        out.append(Invariant(r.expression, role, anchor=r.anchor))
    order = {n: i for i, n in enumerate(_BASE)}
    out.sort(key=lambda i: order[i.anchor])
    for inv in out:
        img = _apply_comps(comps, _BASE, inv.expression)
        if not img.is_zero():
            raise ReductionError('candidate %s is not invariant: residual '
                                 '%s' % (inv.expression, img))
    if len(out) != 3:
        raise ReductionError('expected 3 functionally independent '
                             'invariants, built %d' % len(out))
    return out


# -- two-generator reduction -----------------------------------------------


class ReducedODE:
    """Ordinary differential equation left after a similarity reduction.

    equation is an exact kernel expression in the reduced variable and
    the function U of it; ansatz reconstructs u over the base
    coordinates; multiplier is the factor split off the substituted
    equation so that substituted = multiplier * equation.  Quadratures
    append their constants (and clear parameter denominators, so the
    multiplier only tracks the original reduction)."""

    __slots__ = ('equation', 'order', 'indep', 'ansatz', 'invariants',
                 'multiplier', 'provenance', 'problem', 'constants')

    def __init__(self, equation, order, indep, ansatz, invariants,
                 multiplier, provenance, problem, constants=()):
        self.equation = equation
        self.order = order
        self.indep = indep
        self.ansatz = ansatz
        self.invariants = invariants
        self.multiplier = multiplier
        self.provenance = provenance
        self.problem = problem
        self.constants = tuple(constants)

    def u_derivative(self, k):
        """Atom key of the k-th derivative of U at the reduced variable."""
        return opaque('U', k, arg=var(self.indep)).single_atom_key()

    def as_report(self):
        return {
            'equation': '%s = 0' % self.equation,
            'order': self.order,
            'variable': self.indep,
            'ansatz': 'u = %s' % self.ansatz,
            'invariants': [str(i) for i in self.invariants],
            'multiplier': str(self.multiplier),
            'provenance': self.provenance,
            'constants': list(self.constants),
        }

    def __str__(self):
        return '%s = 0   [%s, order %d]' % (self.equation, self.indep,
                                            self.order)

    def __repr__(self):
        return 'ReducedODE(%s)' % self


def _as_pair_basis(v1, v2):
    """Reorder or recombine so [w1, w2] lies in the span of w1 alone;
    then w2 descends to the invariant chart of w1."""
    com = v1.commutator(v2)
    if com.is_zero():
        return v1, v2
    try:
        c1, c2 = expand_in_basis(com, [v1, v2])
    except KernelError as exc:
        raise ReductionError('generators do not close into a two-'
                             'dimensional subalgebra: %s' % exc)
    if c2.is_zero():
        return v1, v2
    if c1.is_zero():
        return v2, v1
    # [v1, v2] = c1 v1 + c2 v2 with both nonzero: the commutator itself
    # brackets back onto its own span, so lead with it
    return v1.scaled(c1) + v2.scaled(c2), v2


def reduce_by_pair(p, v1, v2):
    """Reduce a third-order problem to an ODE by a two-dimensional
    subalgebra spanned by v1, v2.

    The reduced variable is normalized monic in z whenever it is a
    linear form (fixing the scale of the reduced equation); it is
    called y in that case and zeta otherwise."""
    w1, w2 = _as_pair_basis(v1, v2)
    recipes, frozen, pivot = _pivot_section(_field_comps(w1), _BASE)

    inames, iexprs = [], []
    repl = {}
    for n in frozen:
        iname = 'w_%s' % n
        inames.append(iname)
        iexprs.append(var(n))
        repl[_vkey(n)] = var(iname)
    for r in recipes:
        iname = 'w_%s' % r.anchor
        inames.append(iname)
        iexprs.append(r.expression)
        sol = r.solve(var(iname))
        for n in frozen:
            sol = sol.substitute_var(n, var('w_%s' % n))
        repl[_vkey(r.anchor)] = sol

    comps2 = _field_comps(w2)
    induced = []
    for iexpr in iexprs:
        img = _apply_comps(comps2, _BASE, iexpr)
        img = img.transform(lambda a: repl.get(a))
        if not _is_free_of(img, pivot):
            raise ReductionError('second generator does not descend to '
                                 'the invariant chart (%s dependence '
                                 'left in %s)' % (pivot, img))
        induced.append(img)

    sub_recipes, sub_frozen, _ = _pivot_section(induced, inames)
    joint = [var(n) for n in sub_frozen]
    joint += [r.expression for r in sub_recipes]
    if len(joint) != 2:
        raise ReductionError('joint invariant chart has rank %d, need 2'
                             % len(joint))
    back = dict(zip(inames, iexprs))
    joint = [_pullback(j, back) for j in joint]

    dep = [j for j in joint if not _is_free_of(j, 'u')]
    indep = [j for j in joint if _is_free_of(j, 'u')]
    if len(dep) != 1 or len(indep) != 1:
        raise ReductionError('joint invariants do not split into one '
                             'dependent and one independent member')
    dep, indep = dep[0], indep[0]
    indep = _normalize_monic_z(indep)
    yname = 'y' if _is_affine(indep, _BASE) else 'zeta'

    for w in (w1, w2):
        cs = _field_comps(w)
        for j in (dep, indep):
            if not _apply_comps(cs, _BASE, j).is_zero():
                raise ReductionError('joint invariant %s fails its '
                                     'verification' % j)

    kdep, rest = _u_linear_parts(dep)
    ansatz = (opaque('U', 0, arg=indep) - rest) * _invert(kdep)

    lhs = p.lhs()
    if any(a[0] == 'o' and a[1] == 'f' for a in lhs.free_atoms()):
        # the nonlinearity's argument defaults to the unknown itself;
        # spell it out so the pullback reaches it
        lhs = lhs.substitute_opaque(
            'f', lambda k, arg: opaque('f', k,
                                       arg=arg.substitute(_UJET, ansatz)))
    lhs = lhs.substitute(_UJET, ansatz, with_consequences=True)

    eliminated = _eliminate_coordinate(lhs, indep, yname)
    eliminated = _canon_u(eliminated, yname)
    equation, multiplier = _extract_content(eliminated, yname)
    prov = '{%s, %s}' % (w1.name or w1, w2.name or w2)
    return ReducedODE(equation, _u_order(equation), yname, ansatz,
                      [Invariant(indep, 'independent'),
                       Invariant(dep, 'dependent')],
                      multiplier, prov, p)


def _pullback(e, back):
    out = e
    for iname, iexpr in back.items():
        out = out.substitute_var(iname, iexpr)
    return out


def _normalize_monic_z(e):
    if not _is_affine(e, _BASE):
        return e
    k = e.partial(_vkey('z'))
    if k.is_zero() or not _constantish(k):
        return e
    return e * _invert(k)


def _u_linear_parts(e):
    k = e.partial(_vkey('u'))
    if k.is_zero() or not _is_free_of(k, 'u'):
        raise ReductionError('dependent invariant is not linear in u: %s'
                             % e)
    rest = e - k * var('u')
    if not _is_free_of(rest, 'u'):
        raise ReductionError('dependent invariant is not linear in u: %s'
                             % e)
    return k, rest


def _eliminate_coordinate(lhs, indep, yname):
    """Solve yname = indep for one base coordinate and substitute, so
    the reduced equation closes over the reduced variable."""
    yv = var(yname)
    for coord in ('z', 'x', 't'):
        k = indep.partial(_vkey(coord))
        if k.is_zero() or not _is_free_of(k, coord):
            continue
        try:
            solved = (yv - (indep - k * var(coord))) * _invert(k)
        except ReductionError:
            continue
        key = _vkey(coord)
        return lhs.transform(lambda a: solved if a == key else None)
    raise ReductionError('cannot eliminate a base coordinate against %s'
                         % indep)


def _canon_u(e, yname):
    target = var(yname)

    def fn(a):
        if a[0] == 'o' and a[1] == 'U' and a[3] is not None \
                and a[3] == target:
            return opaque('U', a[2][0], arg=target)
        return None

    return e.transform(fn)


def _extract_content(e, yname):
    """Split e into multiplier * equation: strip the monomial the terms
    share (except the reduced variable itself and function atoms), then
    normalize to coprime integer coefficients with a positive leading
    one.  Verifies the equation closed over the reduced variable."""
    if e.is_zero():
        raise ReductionError('substituted equation vanished identically')
    strip = {}
    for a, k in _mono_gcd_of_expr(e).items():
        if a[0] == 'o' or (a[0] == 'v' and a[1] == yname):
            continue
        strip[a] = k
    stripped = e * _mono_expr({a: -k for a, k in strip.items()})
    content, equation = stripped.primitive()
    multiplier = const(content) * _mono_expr(strip)
    # orient the highest derivative's coefficient positive
    k = _u_order(equation)
    if k:
        lead = equation.partial(
            opaque('U', k, arg=var(yname)).single_atom_key())
        if not lead.is_zero() and lead.leading()[1] < 0:
            equation = -equation
            multiplier = -multiplier
    for a in equation.free_atoms(recursive=True):
        if a[0] == 'v' and a[1] != yname:
            raise ReductionError('reduced equation still carries the '
                                 'coordinate %s' % a[1])
        if a[0] == 'j':
            raise ReductionError('reduced equation still carries a jet')
        if a[0] == 'o' and a[1] in ('lam', 'eps'):
            raise ReductionError('reduced equation still carries a time '
                                 'profile')
    return equation, multiplier


def _u_order(e):
    best = 0
    for a in e.free_atoms(recursive=True):
        if a[0] == 'o' and a[1] == 'U' and len(a[2]) == 1:
            best = max(best, a[2][0])
    return best


# -- quadratures ------------------------------------------------------------


def _next_constant(ode):
    for name in ('U1', 'U0'):
        if name not in ode.constants:
            return name
    raise ReductionError('no further quadrature constants available')


def _clear_param_denominators(e):
    """Smallest parameter monomial making every coefficient polynomial,
    so quadrature constants enter at the conventional scale."""
    need = {}
    for m, _ in e.terms():
        for a, k in m:
            if a[0] == 'p' and k < 0:
                need[a] = max(need.get(a, _F(0)), -k)
    if not need:
        return e
    return e * _mono_expr(need)


def _has_atom(e, a):
    return a in e.free_atoms(recursive=True)


def first_integral(ode):
    """One quadrature of a reduced equation.

    Two shapes arise from the reductions here: A*U''' + g(U)*U'
    integrates to A*U'' + G - C with G' = g, and A*U'' + h(U)
    integrates against U' to (A/2)*U'^2 + H - C with H' = h (the
    degenerate h = 0 goes straight to A*U' - C).  Parameter
    denominators are cleared first."""
    eq = _clear_param_denominators(ode.equation)
    u0 = ode.u_derivative(0)
    u1 = ode.u_derivative(1)
    cname = _next_constant(ode)
    constant = param(cname)

    if ode.order == 3:
        u2, u3 = ode.u_derivative(2), ode.u_derivative(3)
        lead = eq.partial(u3)
        if lead.is_zero() or not _constantish(lead):
            raise ReductionError('no constant coefficient on the third '
                                 'derivative in %s' % eq)
        rest = eq - lead * _atom_as_expr(u3)
        g = rest.partial(u1)
        if not (rest - g * _atom_as_expr(u1)).is_zero() \
                or _has_atom(g, u1) or _has_atom(g, u2):
            raise ReductionError('expected the shape A*U\'\'\' + g(U)*U\', '
                                 'got %s' % eq)
        out = lead * _atom_as_expr(u2) + _antideriv_u(g, u0) - constant
        order = 2
    elif ode.order == 2:
        u2 = ode.u_derivative(2)
        lead = eq.partial(u2)
        if lead.is_zero() or not _constantish(lead):
            raise ReductionError('no constant coefficient on the second '
                                 'derivative in %s' % eq)
        h = eq - lead * _atom_as_expr(u2)
        if h.is_zero():
            out = lead * _atom_as_expr(u1) - constant
            order = 1
        elif _has_atom(h, u1):
            raise ReductionError('expected the shape A*U\'\' + h(U), '
                                 'got %s' % eq)
        else:
            out = (lead / 2) * _atom_as_expr(u1) ** 2 \
                + _antideriv_u(h, u0) - constant
            order = 1
    else:
        raise ReductionError('no quadrature pattern at order %d'
                             % ode.order)

    return ReducedODE(out, order, ode.indep, ode.ansatz, ode.invariants,
                      ode.multiplier, ode.provenance + ' + quadrature',
                      ode.problem, ode.constants + (cname,))


def _antideriv_u(e, u0):
    """Antiderivative with respect to U of a polynomial in U, with one
    bare opaque factor per term allowed when its argument is U (it
    integrates to its stored antiderivative)."""
    out = ZERO
    for m, c in e.terms():
        md = dict(m)
        upow = md.pop(u0, _F(0))
        for a in md:
            if a[0] == 'v':
                raise ReductionError('non-autonomous term %s has no U '
                                     'antiderivative' % (m,))
            if a[0] == 'o' and a[1] == 'U':
                raise ReductionError('derivative of U left in %s' % (m,))
        opaques = [(a, k) for a, k in md.items() if a[0] == 'o']
        if not opaques:
            if upow.denominator != 1 or upow < 0:
                raise ReductionError('cannot integrate U power %s' % upow)
            out = out + const(c / (upow + 1)) * _mono_expr(md) \
                * _atom_as_expr(u0) ** (int(upow) + 1)
            continue
        if upow != 0 or len(opaques) != 1 or opaques[0][1] != 1:
            raise ReductionError('cannot integrate the term %s' % (m,))
        a = opaques[0][0]
        name, deriv, arg = a[1], a[2], a[3]
        if len(deriv) != 1:
            raise ReductionError('cannot integrate the field atom %s'
                                 % (a,))
        darg = ONE if arg is None else arg.partial(u0)
        if not (darg - ONE).is_zero():
            raise ReductionError('argument of %s is not U itself' % name)
        md.pop(a)
        anti = _atom_as_expr(('o', name, (deriv[0] - 1,), arg))
        out = out + const(c) * _mono_expr(md) * anti
    return out


def closed_form_solutions():
    """The exact-solution catalog, each entry carrying a verified
    symbolically-zero residual."""
    from .catalog import solution_catalog
    return solution_catalog()


def verify_solution(p, sol):
    """Exact residual of substituting u = sol into the equation."""
    lhs = p.lhs()
    if any(a[0] == 'o' and a[1] == 'f' for a in lhs.free_atoms()):
        lhs = lhs.substitute_opaque(
            'f', lambda k, arg: opaque('f', k,
                                       arg=arg.substitute(_UJET, sol)))
    return lhs.substitute(_UJET, sol, with_consequences=True)
