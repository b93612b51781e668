"""Closed-form exponentials.

Two consumers share the machinery here: the adjoint representation needs
exp of small matrices of exact expressions, and the numeric verifier needs
the finite point transformation generated by a vector field with affine
components.  Both reduce to `expm_exact`, which returns exp(M * s) for a
square matrix M over the kernel ring and a symbol s, in closed form:

  * nilpotent M: a terminating polynomial series;
  * M triangularizable by a permutation of the basis: Putzer's recursion
    over the diagonal eigenvalues, giving entries of the form
    polynomial(s) * e^(lambda * s);
  * anything else: ExactExpmError (callers fall back to floating point).

Eigenvalues may carry parameters.  The Putzer integrals divide by
differences of eigenvalues; when such a difference is not invertible in
the Laurent ring (a genuinely multi-term polynomial) the closed form is
out of reach and ExactExpmError is raised as well.
"""

from fractions import Fraction as _F

from .expr import (
    Expression, KernelError, ZERO, ONE,
    const, var, exact_div, exp_atom,
)

_EPSNAME = 'ep'   # group parameter symbol used in flow/adjoint output


class ExactExpmError(KernelError):
    """Closed-form matrix exponential unavailable for this matrix."""


def _as_matrix(M):
    n = len(M)
    out = []
    for row in M:
        if len(row) != n:
            raise KernelError('matrix must be square')
        out.append([e if isinstance(e, Expression) else const(e) for e in row])
    return out


def mat_mul(A, B):
    n = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(n)), ZERO)
             for j in range(n)] for i in range(n)]


def mat_identity(n):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def _is_zero_matrix(M):
    return all(e.is_zero() for row in M for e in row)


def _perm_upper_order(M):
    """Ordering o with M[o[a]][o[b]] == 0 for a > b, or None.

    Greedy: repeatedly pick an index whose column, restricted to the
    not-yet-chosen indices, is supported on the index itself.
    """
    n = len(M)
    remaining = set(range(n))
    order = []
    while remaining:
        for j in sorted(remaining):
            if all(M[i][j].is_zero() for i in remaining if i != j):
                order.append(j)
                remaining.discard(j)
                break
        else:
            return None
    return order


def _inv_scale(e, d):
    """e / d in the Laurent ring; None when the division is not exact."""
    if d.is_rational():
        return e * const(_F(1) / d.as_fraction())
    if len(d._d) == 1:
        ((m, c),) = d._d.items()
        inv = Expression({tuple((a, -k) for a, k in m): _F(1) / c})
        return e * inv
    return exact_div(e, d)


def _poly_antideriv(p, sname):
    """Antiderivative in the symbol with zero constant term."""
    key = ('v', sname)
    out = {}
    for m, c in p._d.items():
        md = dict(m)
        k = md.get(key, _F(0))
        md[key] = k + 1
        out[tuple(sorted(md.items()))] = c / (k + 1)
    return Expression(out)


def _poly_deriv(p, sname):
    return p.partial(('v', sname))


def _eval0(p, sname):
    return p.substitute_var(sname, 0)


def _integrate_exp(p, nu, sname):
    """Exact I(s) = integral_0^s p(tau) e^(nu tau) dtau for polynomial p.

    Returns (q, r): I(s) = q(s) * e^(nu s) + r(s).  nu == 0 gives the plain
    antiderivative in r.  Raises ExactExpmError when 1/nu does not exist in
    the ring.
    """
    if nu.is_zero():
        return ZERO, _poly_antideriv(p, sname)
    # repeated integration by parts: q = p/nu - p'/nu^2 + p''/nu^3 - ...
    q = ZERO
    term = p
    sign = 1
    while not term.is_zero():
        scaled = _inv_scale(term, nu)
        if scaled is None:
            raise ExactExpmError('eigenvalue difference %s not invertible'
                                 % nu)
        term = scaled
        q = q + (term if sign > 0 else -term)
        sign = -sign
        term = _poly_deriv(term, sname)
    return q, -_eval0(q, sname)


def _putzer(M, eigs, sname):
    """exp(M*s) via Putzer's recursion with the given eigenvalue list."""
    n = len(M)
    svar = var(sname)
    # r_j kept as {eigenvalue Expression: polynomial-in-s Expression}
    r = {eigs[0]: ONE}
    P = mat_identity(n)
    total = [[ZERO] * n for _ in range(n)]

    def add_term(rdict, Pmat):
        for lam, poly in rdict.items():
            if poly.is_zero():
                continue
            carrier = ONE if lam.is_zero() else exp_atom(('v', sname), lam)
            w = poly * carrier
            for i in range(n):
                for j in range(n):
                    if not Pmat[i][j].is_zero():
                        total[i][j] = total[i][j] + w * Pmat[i][j]

    add_term(r, P)
    for j in range(1, n):
        lam_j = eigs[j]
        r_new = {}
        for mu, poly in r.items():
            nu = mu - lam_j
            q, extra = _integrate_exp(poly, nu, sname)
            if not q.is_zero():
                r_new[mu] = r_new.get(mu, ZERO) + q
            if not extra.is_zero():
                r_new[lam_j] = r_new.get(lam_j, ZERO) + extra
        r = {k: v for k, v in r_new.items() if not v.is_zero()}
        shifted = [[M[a][b] - (eigs[j - 1] if a == b else ZERO)
                    for b in range(n)] for a in range(n)]
        P = mat_mul(P, shifted)
        if _is_zero_matrix(P):
            break
        add_term(r, P)
    del svar
    return total


def expm_exact(M, sname=_EPSNAME):
    """exp(M * s) as a matrix of Expressions in the symbol var(sname)."""
    M = _as_matrix(M)
    n = len(M)
    svar = var(sname)
    # terminating series when M is nilpotent
    powers = [mat_identity(n)]
    nilpotent = False
    acc = M
    for _ in range(n):
        powers.append(acc)
        if _is_zero_matrix(acc):
            nilpotent = True
            break
        acc = mat_mul(acc, M)
    else:
        if _is_zero_matrix(acc):
            nilpotent = True
            powers.append(acc)
    if nilpotent:
        total = [[ZERO] * n for _ in range(n)]
        fact = _F(1)
        spow_ = ONE
        for k, Pk in enumerate(powers):
            if k:
                fact = fact / k
                spow_ = spow_ * svar
            w = spow_ * const(fact)
            for i in range(n):
                for j in range(n):
                    if not Pk[i][j].is_zero():
                        total[i][j] = total[i][j] + w * Pk[i][j]
        return total
    order = _perm_upper_order(M)
    if order is None:
        raise ExactExpmError('matrix is neither nilpotent nor '
                             'permutation-triangularizable')
    eigs = [M[i][i] for i in order]
    return _putzer(M, eigs, sname)


def expm_numeric(M, s):
    """Float exp(M*s) for a matrix of Expressions with numeric entries."""
    import numpy as np
    from scipy.linalg import expm as _expm
    A = np.array([[float(e.evaluate({})) if isinstance(e, Expression) else
                   float(e) for e in row] for row in M], dtype=float)
    return _expm(A * float(s))


# -- point flows of affine generators -----------------------------------------

_COORDS = ('t', 'x', 'z', 'u')
_UKEY = ('j', (0, 0, 0))
_COORD_KEY = {'t': ('v', 't'), 'x': ('v', 'x'), 'z': ('v', 'z'), 'u': _UKEY}


def _coord_expr(c):
    key = _COORD_KEY[c]
    return Expression({((key, _F(1)),): _F(1)})


class AffineFlowError(KernelError):
    """The generator's components are not affine in the coordinates."""


def _affine_parts(e, allowed):
    """Split e into ({coord: coeff}, constant), both parameter-only,
    requiring e affine over `allowed` coordinates."""
    lin = {}
    rest = e
    for c in allowed:
        coeff = e.partial(_COORD_KEY[c])
        if not coeff.is_param_only():
            raise AffineFlowError('component %s is not affine' % e)
        if not coeff.is_zero():
            lin[c] = coeff
            rest = rest - coeff * _coord_expr(c)
    if not rest.is_param_only():
        raise AffineFlowError('component %s is not affine' % e)
    return lin, rest


def affine_matrix(v):
    """5x5 matrix A of the linear ODE d/ds (t,x,z,u,1) = A (t,x,z,u,1)
    generated by the field.  Coordinate components must not involve u."""
    rows = []
    comps = (v.xi_t, v.xi_x, v.xi_z, v.eta)
    for ci, comp in enumerate(comps):
        allowed = _COORDS if ci == 3 else _COORDS[:3]
        if ci < 3 and not comp.partial(_UKEY).is_zero():
            raise AffineFlowError('coordinate component depends on u')
        lin, cst = _affine_parts(comp, allowed)
        row = [lin.get(c, ZERO) for c in _COORDS] + [cst]
        rows.append(row)
    rows.append([ZERO] * 5)
    return rows


class PointFlow:
    """Finite transformation exp(s * v) of an affine vector field,
    kept symbolically in the group parameter."""

    __slots__ = ('field', 'sname', 'maps')

    def __init__(self, field, sname, maps):
        self.field = field
        self.sname = sname
        self.maps = maps

    @classmethod
    def of(cls, field, sname=_EPSNAME):
        A = affine_matrix(field)
        E = expm_exact(A, sname)
        maps = {}
        for i, c in enumerate(_COORDS):
            m = ZERO
            for j, w in enumerate(_COORDS):
                if not E[i][j].is_zero():
                    m = m + E[i][j] * _coord_expr(w)
            m = m + E[i][4]
            maps[c] = m
        return cls(field, sname, maps)

    def inverse(self):
        neg = -var(self.sname)
        maps = {c: m.substitute_var(self.sname, neg)
                for c, m in self.maps.items()}
        return PointFlow(self.field, self.sname, maps)

    def transport_solution(self, sol):
        """Image of the graph of u = sol(t,x,z) under the flow, as a new
        solution candidate, symbolic in the group parameter."""
        w = self.maps['u'].substitute(_UKEY, sol)
        inv = self.inverse()
        return subst_coords(w, {c: inv.maps[c] for c in ('t', 'x', 'z')})

    def apply_point(self, env, s):
        """Numeric image of a point; env maps t,x,z,u (+ params) to floats."""
        full = dict(env)
        full[self.sname] = s
        return {c: self.maps[c].evaluate(full) for c in _COORDS}

    def __str__(self):
        return ', '.join('%s -> %s' % (c, self.maps[c]) for c in _COORDS)


def subst_coords(e, mapping):
    """Simultaneous substitution of coordinate variables."""
    tmp = {c: '_swap_%s' % c for c in mapping}
    out = e
    for c in mapping:
        out = out.substitute_var(c, var(tmp[c]))
    for c, value in mapping.items():
        out = out.substitute_var(tmp[c], value)
    return out
