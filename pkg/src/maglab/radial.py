"""Exact magnitude functions for odd-dimensional balls and 3D spherical shells.

The magnitude of a scaled smooth domain is the volume term plus boundary
integrals of odd-order traces of the solution to an exterior boundary value
problem for (R^2 - Delta)^m, m = (n+1)/2.  For radial domains that problem
collapses to an m x m linear system over exponential-polynomial kernel bases,
so every value of the magnitude function, at any complex scale away from the
resonances of the trace system, is computed in closed form.

All arithmetic is generic over Python complex / mpmath, so the same code path
supports double precision and the high-precision solves needed by the
high-dimensional rational reconstructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp
import numpy as np

from .errors import ArgumentError, ReconstructionError, ResonanceError
from .expopoly import ExpoPoly, RadialOperatorSpec, decaying_basis, regular_basis_3d

#: trace-matrix condition estimate above which R is flagged as a resonance
RESONANCE_CONDITION_LIMIT = 1e12
#: accepted trace residual, relative to max(1, |data|)
TRACE_RTOL = 1e-9

EXTERIOR = "exterior"
INTERIOR = "interior"


@dataclass(frozen=True)
class RadialSolution:
    """Coefficients over a kernel basis solving a radial boundary problem."""

    coefficients: tuple
    basis: tuple
    spec: RadialOperatorSpec
    radius: float
    side: str
    condition: float

    def combination(self) -> ExpoPoly:
        out = ExpoPoly.zero(self.spec.rate)
        for c, b in zip(self.coefficients, self.basis):
            out = out + b * c
        return out


def trace_value(u: ExpoPoly, j: int, spec: RadialOperatorSpec, rho, side=EXTERIOR):
    """Boundary trace of order j at radius rho.

    Even j: evaluate (R^2 - Delta)^{j/2} u at rho.  Odd j: apply the operator
    (j-1)/2 times, differentiate, evaluate, and orient by the outward normal
    of the complement component: -d/dr on the exterior side, +d/dr on the
    interior side.
    """
    if j < 0 or j > spec.dimension:
        raise ArgumentError(f"trace order {j} outside 0..{spec.dimension}")
    g = u
    for _ in range(j // 2):
        g = g.helmholtz_apply(spec)
    if j % 2 == 0:
        return g.evaluate(rho)
    sign = -1 if side == EXTERIOR else +1
    return sign * g.differentiate().evaluate(rho)


def _solve_linear(rows, data):
    """Solve a small dense system in whatever scalar type the entries carry."""
    if any(isinstance(v, (mp.mpf, mp.mpc)) for row in rows for v in row):
        A = mp.matrix(rows)
        b = mp.matrix(data)
        x = mp.lu_solve(A, b)
        return [x[i] for i in range(len(data))]
    A = np.array(rows, dtype=complex)
    b = np.array(data, dtype=complex)
    return list(np.linalg.solve(A, b))


def _condition_estimate(rows):
    A = np.array([[complex(v) for v in row] for row in rows], dtype=complex)
    with np.errstate(all="ignore"):
        # equilibrate rows and columns first: trace rows carry power-of-R
        # scale factors that inflate the raw condition number without making
        # the solve any harder
        rs = np.abs(A).max(axis=1)
        rs[rs == 0] = 1.0
        A = A / rs[:, None]
        cs = np.abs(A).max(axis=0)
        cs[cs == 0] = 1.0
        A = A / cs[None, :]
        try:
            return float(np.linalg.cond(A))
        except np.linalg.LinAlgError:
            return float("inf")


def _solve_traces(spec, rho, data, basis, side):
    m = spec.power
    if len(data) != m:
        raise ArgumentError(f"expected {m} boundary data values, got {len(data)}")
    rows = [[trace_value(b, j, spec, rho, side) for b in basis] for j in range(m)]
    cond = _condition_estimate(rows)
    # in mpmath arithmetic the solve stays accurate well past the double limit
    limit = RESONANCE_CONDITION_LIMIT
    if isinstance(spec.rate, (mp.mpf, mp.mpc)):
        limit = max(limit, 10.0 ** (mp.mp.dps - 6))
    if not np.isfinite(cond) or cond > limit:
        raise ResonanceError(
            f"trace system singular at R={spec.rate} (cond ~ {cond:.3e})",
            scale=spec.rate,
            condition=cond,
        )
    coeffs = _solve_linear(rows, data)
    sol = RadialSolution(
        coefficients=tuple(coeffs),
        basis=tuple(basis),
        spec=spec,
        radius=float(rho),
        side=side,
        condition=cond,
    )
    # trace residual guard, judged row by row against the terms that cancel
    # to produce the residual (a global scale would flag benign rounding in
    # rows whose entries dwarf the data, e.g. high-order traces at large R)
    u = sol.combination()
    for j, g in enumerate(data):
        res = float(abs(trace_value(u, j, spec, rho, side) - g))
        ref = max(
            1.0,
            float(abs(g)),
            sum(float(abs(rows[j][i]) * abs(c)) for i, c in enumerate(coeffs)),
        )
        if res > TRACE_RTOL * ref:
            raise ResonanceError(
                f"trace residual {res:.3e} too large at R={spec.rate}",
                scale=spec.rate,
                condition=cond,
            )
    return sol


def solve_exterior(spec: RadialOperatorSpec, rho, data) -> RadialSolution:
    """Unique decaying solution outside radius rho with prescribed traces."""
    if spec.rate == 0:
        raise ArgumentError("rate must be nonzero")
    return _solve_traces(spec, rho, data, decaying_basis(spec), EXTERIOR)


def solve_interior(spec: RadialOperatorSpec, rho, data) -> RadialSolution:
    """Regular solution inside radius rho (3D only) with prescribed traces."""
    if spec.dimension != 3:
        raise ArgumentError("interior solves are implemented for dimension 3 only")
    return _solve_traces(spec, rho, data, regular_basis_3d(spec.power, spec.rate), INTERIOR)


def exterior_trace_determinant(n: int, R, *, rho=1.0, dps=None):
    """Determinant of the exterior trace system, with e^{-R rho} factored out.

    Its zeros are the resonances of the boundary value problem; the poles of
    the magnitude function are contained among them.
    """
    spec_cls = RadialOperatorSpec
    if dps is not None:
        with mp.workdps(dps):
            spec = spec_cls(n, mp.mpc(R))
            rows = _stripped_trace_rows(spec, rho)
            return complex(mp.det(mp.matrix(rows)))
    spec = spec_cls(n, complex(R))
    rows = _stripped_trace_rows(spec, rho)
    return complex(np.linalg.det(np.array(rows, dtype=complex)))


def _stripped_trace_rows(spec, rho):
    # each decaying basis element carries a global e^{-R r}; dividing it out
    # at r = rho keeps the determinant zeros while taming the scale
    m = spec.power
    basis = decaying_basis(spec)
    grow = _cexp(spec.rate * rho)
    return [
        [trace_value(b, j, spec, rho, EXTERIOR) * grow for b in basis] for j in range(m)
    ]


def _magnitude_data(m, R):
    # boundary data of the magnitude problem: R^j for even j, 0 for odd j
    return [R**j if j % 2 == 0 else 0 * R for j in range(m)]


def _boundary_term(spec, sol, rho, R):
    """Contribution of one boundary sphere of radius rho to the magnitude.

    Equals (1/(n! w_n)) * sum_{m/2 < j <= m} R^{n-2j} * area(S_rho) * D^{2j-1}h,
    using that the integrand is constant on the sphere and
    area(S_rho^{n-1}) = n w_n rho^{n-1}.
    """
    n = spec.dimension
    m = spec.power
    h = sol.combination()
    total = 0 * R
    for j in range(m // 2 + 1, m + 1):
        total = total + R ** (n - 2 * j) * trace_value(h, 2 * j - 1, spec, rho, sol.side)
    return total * (n * rho ** (n - 1) / math.factorial(n))


def ball_magnitude(n: int, R, *, dps=None):
    """Magnitude of the radius-R rescaling of the unit n-ball, n odd.

    n = 1 is the classical closed form R + 1; n >= 3 solves the exterior
    boundary problem over the decaying kernel basis.  With ``dps`` set, the
    solve runs in mpmath arithmetic at that precision (needed for reliable
    values at n >= 11, where the trace system is badly conditioned in
    doubles); the result is returned as a Python complex.
    """
    if n < 1 or n % 2 == 0:
        raise ArgumentError(f"dimension must be odd and >= 1, got {n}")
    if R == 0:
        raise ArgumentError("R must be nonzero (the limit at 0 is 1)")
    if n == 1:
        return R + 1
    if dps is not None:
        with mp.workdps(dps):
            val = _ball_magnitude_at(n, mp.mpc(R))
            return complex(val)
    return _ball_magnitude_at(n, complex(R))


def _ball_magnitude_at(n, R):
    spec = RadialOperatorSpec(n, R)
    m = spec.power
    sol = solve_exterior(spec, 1.0, _magnitude_data(m, R))
    return R**n / math.factorial(n) + _boundary_term(spec, sol, 1.0, R)


# -- cached integer-polynomial form of the unit-ball trace system ----------
#
# Writing each decaying basis element as p(r, R) e^{-R r} with an integer
# polynomial p, every trace at rho = 1 is an integer polynomial in R times
# e^{-R}.  The exponential cancels between the trace solve and the boundary
# term, so the whole magnitude sample reduces to evaluating cached integer
# polynomials and one m x m solve -- orders of magnitude faster than
# re-deriving the kernel basis per sample, which is what high-count,
# high-precision contour sampling needs.


def _ipoly_diff(p):
    # d/dr of p e^{-Rr} = (p_r - R p) e^{-Rr}; keys are (k_r, j_R) -> int
    out = {}
    for (k, j), c in p.items():
        if k != 0:
            key = (k - 1, j)
            out[key] = out.get(key, 0) + c * k
        key = (k, j + 1)
        out[key] = out.get(key, 0) - c
    return {key: c for key, c in out.items() if c != 0}


def _ipoly_trace(p, order, n):
    # order-th trace at rho = 1 on the exterior side, as ascending R-coeffs
    g = p
    for _ in range(order // 2):
        d1 = _ipoly_diff(g)
        d2 = _ipoly_diff(d1)
        out = {}
        for (k, j), c in g.items():
            out[(k, j + 2)] = out.get((k, j + 2), 0) + c
        for (k, j), c in d2.items():
            out[(k, j)] = out.get((k, j), 0) - c
        for (k, j), c in d1.items():
            out[(k - 1, j)] = out.get((k - 1, j), 0) - (n - 1) * c
        g = {key: c for key, c in out.items() if c != 0}
    sign = 1
    if order % 2 == 1:
        g = _ipoly_diff(g)
        sign = -1  # outward normal of the complement: nu = -e_r
    coeffs = {}
    for (_, j), c in g.items():
        coeffs[j] = coeffs.get(j, 0) + sign * c
    top = max(coeffs, default=0)
    return tuple(coeffs.get(j, 0) for j in range(top + 1))


@lru_cache(maxsize=None)
def _ball_trace_polys(n):
    """Integer-polynomial trace rows of the exterior unit-ball problem.

    Returns (system_rows, boundary_rows): the m x m matrix of traces
    D^i of the decaying basis (orders 0..m-1) and the odd-order rows
    D^{2j-1}, m/2 < j <= m, entering the magnitude boundary term.
    """
    m = (n + 1) // 2
    basis = []
    for j in range(m):
        p = {(j - 1, 0): 1}
        for _ in range(m - 2):
            # ladder map -(1/r) d/dr
            p = {(k - 1, jj): -c for (k, jj), c in _ipoly_diff(p).items()}
        basis.append(p)
    system = tuple(tuple(_ipoly_trace(b, i, n) for b in basis) for i in range(m))
    boundary = tuple(
        tuple(_ipoly_trace(b, 2 * j - 1, n) for b in basis)
        for j in range(m // 2 + 1, m + 1)
    )
    return system, boundary


def _horner(coeffs, R):
    acc = 0 * R
    for c in reversed(coeffs):
        acc = acc * R + c
    return acc


def _ball_magnitude_poly(n, R):
    """Magnitude sample via the cached polynomial trace rows.

    Agrees with ``_ball_magnitude_at`` identically (same system, with the
    common e^{-R} stripped from both the matrix and the evaluated traces);
    arithmetic-generic over complex / mpmath scalars.
    """
    system, boundary = _ball_trace_polys(n)
    m = (n + 1) // 2
    rows = [[_horner(p, R) for p in row] for row in system]
    data = _magnitude_data(m, R)
    if isinstance(R, (mp.mpf, mp.mpc)):
        c = mp.lu_solve(mp.matrix(rows), mp.matrix(data))
    else:
        c = np.linalg.solve(np.array(rows, dtype=complex), np.array(data, dtype=complex))
    total = 0 * R
    for row, j in zip(boundary, range(m // 2 + 1, m + 1)):
        tr = sum(_horner(p, R) * ck for p, ck in zip(row, c))
        total = total + R ** (n - 2 * j) * tr
    return R**n / math.factorial(n) + total * (n / math.factorial(n))


def shell_magnitude(a: float, b: float, R, *, dps=None):
    """Magnitude function of the 3D spherical shell {a <= |x| <= b}.

    The complement has two components: the exterior of the b-sphere (solved
    over the decaying basis) and the open a-ball (solved over the basis of
    solutions regular at the origin).  Both contribute boundary terms on top
    of the volume term.
    """
    if not (0 < a < b):
        raise ArgumentError("shell radii must satisfy 0 < a < b")
    if R == 0:
        raise ArgumentError("R must be nonzero (the limit at 0 is 1)")
    if dps is not None:
        with mp.workdps(dps):
            return complex(_shell_magnitude_at(a, b, mp.mpc(R)))
    return _shell_magnitude_at(a, b, complex(R))


def _shell_magnitude_at(a, b, R):
    spec = RadialOperatorSpec(3, R)
    data = _magnitude_data(2, R)
    outer = solve_exterior(spec, b, data)
    inner = solve_interior(spec, a, data)
    vol_term = (b**3 - a**3) * R**3 / 6.0
    return vol_term + _boundary_term(spec, outer, b, R) + _boundary_term(spec, inner, a, R)


def paper_shell_closed_form(R):
    """Literal transcription of the published closed form for the (1,2) shell.

    Kept for comparison reporting only; see ``shell_deviation_report``.  The
    quotient is evaluated in a form that avoids overflow of exp(2R) for large
    real parts.
    """
    R = complex(R)
    em2 = _cexp(-2 * R)
    den = 2 * em2 * (2 * R - _csinh(2 * R))
    if abs(den) < 1e-300:
        raise ArgumentError(f"denominator vanishes at R={R} (pole of the printed formula)")
    num = (em2 - 1) ** 2 * (R * R + 3 * R + 3) + 6 * R * (em2 - 1)
    poly = 7.0 / 3.0 * R**3 + 4 * R**2 + 4 * R + 1
    return poly - num / den


def _cexp(z):
    return mp.exp(z) if isinstance(z, (mp.mpf, mp.mpc)) else np.exp(z)


def _csinh(z):
    return mp.sinh(z) if isinstance(z, (mp.mpf, mp.mpc)) else np.sinh(z)


def shell_deviation_report(Rs, a=1.0, b=2.0):
    """Rows (R, ours, printed, |difference|) comparing the two shell formulas.

    The published closed form for the (1,2) shell disagrees with the
    boundary-value assembly beyond the shared pole family; the deviation is
    reported, never gated on.
    """
    rows = []
    for R in Rs:
        ours = shell_magnitude(a, b, R)
        printed = paper_shell_closed_form(R)
        rows.append((complex(R), ours, printed, abs(ours - printed)))
    return rows


# -- rational reconstruction ----------------------------------------------


@dataclass(frozen=True)
class RationalFunction:
    """num(R)/den(R) with ascending coefficient lists and monic denominator.

    ``zeros``/``poles`` hold the root multisets; evaluation uses the stable
    product form C * prod(R - zero) / prod(R - pole).
    """

    numerator: tuple
    denominator: tuple
    zeros: tuple
    poles: tuple
    lead: complex

    def __call__(self, R):
        num = self.lead
        for z in self.zeros:
            num = num * (R - z)
        den = 1.0
        for p in self.poles:
            den = den * (R - p)
        return num / den

    def degree(self):
        return len(self.zeros), len(self.poles)

    def to_json_dict(self):
        pair = lambda c: [float(np.real(c)), float(np.imag(c))]
        return {
            "num": [pair(c) for c in self.numerator],
            "den": [pair(c) for c in self.denominator],
        }


def _verified_polyroots(coeffs_desc, base_dps, max_attempts=4):
    """All roots of a polynomial with mpmath coefficients, verified.

    Iterative root-finders can silently stagnate on clustered roots while
    reporting convergence, so the root multiset is only accepted once
    multiplying it back out reproduces the input coefficients; otherwise the
    computation is repeated at doubled precision.
    """
    deg = len(coeffs_desc) - 1
    # drop leading coefficients that sit at the working-precision noise floor
    # (a genuinely small lead, e.g. 1/n!, must survive this)
    scale = max(abs(c) for c in coeffs_desc)
    floor = mp.mpf(10) ** (-(base_dps // 2)) * scale
    while len(coeffs_desc) > 1 and abs(coeffs_desc[0]) <= floor:
        coeffs_desc = coeffs_desc[1:]
        deg -= 1
    if deg <= 0:
        return []
    work = 3 * base_dps
    tol = mp.mpf(10) ** (-2 * base_dps)
    for _ in range(max_attempts):
        with mp.workdps(work):
            roots = mp.polyroots(
                [mp.mpf(c) for c in coeffs_desc], maxsteps=50 * deg + 500, extraprec=work
            )
            poly = [mp.mpf(1)]
            for r in roots:
                nxt = [mp.mpc(0)] * (len(poly) + 1)
                for i, c in enumerate(poly):
                    nxt[i + 1] += c
                    nxt[i] -= c * r
                poly = nxt
            lead = coeffs_desc[0]
            worst = mp.mpf(0)
            for i, c in enumerate(coeffs_desc):
                ref = max(mp.mpf(1), abs(c) / abs(lead))
                worst = max(worst, abs(poly[deg - i] - c / lead) / ref)
            if worst < tol:
                return roots
        work *= 2
    raise ReconstructionError(
        f"root verification stalled at {float(worst):.3e} for degree {deg}"
    )


def _remove_common_roots(zeros, poles, tol=1e-8):
    zeros = list(zeros)
    kept_poles = []
    for p in poles:
        hit = None
        for i, z in enumerate(zeros):
            if abs(z - p) < tol * max(1.0, abs(p)):
                hit = i
                break
        if hit is None:
            kept_poles.append(p)
        else:
            zeros.pop(hit)
    return zeros, kept_poles


def _default_reconstruction_dps(n):
    # fitted roots of the scaled denominator reach |z| ~ (|R_pole| + c)/rho,
    # so the working precision has to grow with the degree bound
    if n <= 9:
        return 40
    if n <= 13:
        return 80
    if n <= 17:
        return 140
    return 220


def rational_reconstruct(
    n: int,
    sample_count: int | None = None,
    *,
    center: float | None = None,
    contour_radius: float | None = None,
    dps: int | None = None,
    residual_tol: float = 1e-8,
):
    """Least-squares rational model of the n-ball magnitude function.

    Samples on a circle in the right half-plane, fits num/den in the scaled
    variable z = (R - center)/radius on roots of unity (a well-conditioned
    basis), enforces the conjugation symmetry by keeping the fitted
    coefficients real, and validates on held-out points.  Degree bounds:
    deg(den) <= (n-1)(n-3)/8, deg(num) = deg(den) + n.

    The normal equations are formed after row weighting (1/|M|) and column
    equilibration and solved in mpmath at twice the working precision: the
    distant denominator roots are invisible to a double-precision fit.
    """
    if n < 3 or n % 2 == 0:
        raise ArgumentError("rational reconstruction needs odd n >= 3")
    if center is None:
        # poles spread out to |R| ~ O(n); a circle of comparable size keeps
        # them near the image of the unit sampling circle, where polynomial
        # root-finding in z is well conditioned
        center = max(2.5, 2.0 * n)
    if contour_radius is None:
        contour_radius = center - 0.1
    d_den = (n - 1) * (n - 3) // 8
    d_num = d_den + n
    unknowns = d_num + 1 + d_den  # den is monic in z
    min_samples = 2 * d_den + n + 2
    T = sample_count if sample_count is not None else max(unknowns + 34, min_samples, 64)
    T += T % 2  # even count pairs each node with its conjugate
    if T < min_samples:
        raise ArgumentError(f"sample count {T} below minimum {min_samples}")
    if dps is None:
        dps = _default_reconstruction_dps(n)

    with mp.workdps(dps):
        zs = [mp.exp(2j * mp.pi * k / T) for k in range(T)]
        half = T // 2
        vals = [None] * T
        for k in range(half + 1):
            vals[k] = _ball_magnitude_poly(n, mp.mpc(center + contour_radius * zs[k]))
        for k in range(half + 1, T):
            # M(conj R) = conj M(R): the magnitude is real on the real axis
            vals[k] = mp.conj(vals[T - k])

        rows, rhs = [], []
        for t in range(T):
            w = 1 / abs(vals[t])
            rows.append(
                [zs[t] ** i * w for i in range(d_num + 1)]
                + [-vals[t] * zs[t] ** i * w for i in range(d_den)]
            )
            rhs.append(vals[t] * zs[t] ** d_den * w)
        norms = [mp.sqrt(sum(abs(rows[t][i]) ** 2 for t in range(T))) for i in range(unknowns)]
        A = mp.matrix([[rows[t][i] / norms[i] for i in range(unknowns)] for t in range(T)])
        bvec = mp.matrix(rhs)
        with mp.extradps(dps):
            gram = A.H * A
            y = mp.lu_solve(gram, A.H * bvec)
        x = [y[i] / norms[i] for i in range(unknowns)]
        # conjugate-paired samples force real coefficients in the z-basis;
        # what is left in the imaginary parts is round-off
        a = [mp.re(x[i]) for i in range(d_num + 1)]
        b = [mp.re(x[d_num + 1 + i]) for i in range(d_den)] + [mp.mpf(1)]

        worst_fit = mp.mpf(0)
        for t in range(0, T, 5):
            ratio = mp.polyval(a[::-1], zs[t]) / mp.polyval(b[::-1], zs[t])
            worst_fit = max(worst_fit, abs(ratio - vals[t]) / abs(vals[t]))
        if worst_fit > residual_tol:
            raise ReconstructionError(
                f"on-sample relative residual {float(worst_fit):.3e} exceeds "
                f"{residual_tol:.1e} for n={n}"
            )

    zero_z = _verified_polyroots(a[::-1], dps) if d_num > 0 else []
    pole_z = _verified_polyroots(b[::-1], dps) if d_den > 0 else []
    zeros = [center + contour_radius * complex(zk) for zk in zero_z]
    poles = [center + contour_radius * complex(zk) for zk in pole_z]
    zeros, poles = _remove_common_roots(zeros, poles)
    if n <= 9:
        # cheap double-precision Newton refinement against direct evaluations
        f = lambda Rk: ball_magnitude(n, Rk)
        g = lambda Rk: exterior_trace_determinant(n, Rk)
        zeros = [_newton_polish(f, z) for z in zeros]
        # magnitude poles sit among the zeros of the trace determinant, which
        # is holomorphic there; Newton on 1/M would evaluate at a resonance
        poles = [_newton_polish(g, p) for p in poles]
    zeros = _conjugate_close(zeros)
    poles = _conjugate_close(poles)
    a = [float(c) for c in a]
    b = [float(c) for c in b]

    lead = (a[-1] / contour_radius**d_num) / (b[-1] / contour_radius**d_den)
    num_coeffs = tuple(np.polynomial.polynomial.polyfromroots(zeros) * lead)
    den_coeffs = tuple(np.polynomial.polynomial.polyfromroots(poles))
    model = RationalFunction(
        numerator=num_coeffs,
        denominator=den_coeffs,
        zeros=tuple(sorted(zeros, key=lambda c: (c.imag, c.real))),
        poles=tuple(sorted(poles, key=lambda c: (c.imag, c.real))),
        lead=complex(lead),
    )

    # held-out validation on a fresh contour
    H = 8
    zh = np.exp(2j * np.pi * (np.arange(H) + 0.37) / H)
    Rh = center + 1.25 * contour_radius * zh
    worst = 0.0
    for Rk in Rh:
        exact = ball_magnitude(n, Rk, dps=dps)
        rel = abs(model(Rk) - exact) / max(1e-30, abs(exact))
        worst = max(worst, rel)
    if worst > residual_tol:
        raise ReconstructionError(
            f"held-out relative residual {worst:.3e} exceeds {residual_tol:.1e} for n={n}"
        )
    return model


def _newton_polish(f, z0, *, max_steps=25, max_drift=1e-2):
    """Newton refinement with a finite-difference derivative.

    Returns the refined root, or z0 unchanged if the iteration leaves the
    neighbourhood of the initial guess (a sign the guess was spurious).
    """
    z = complex(z0)
    scale = max(1.0, abs(z))
    try:
        for _ in range(max_steps):
            h = 1e-7 * scale
            fz = f(z)
            dfz = (f(z + h) - f(z - h)) / (2 * h)
            if dfz == 0:
                break
            step = fz / dfz
            z = z - step
            if abs(z - z0) > max_drift * scale:
                return complex(z0)
            if abs(step) < 1e-13 * scale:
                break
    except ResonanceError:
        return complex(z0)
    return z


def _conjugate_close(roots, tol=1e-9):
    """Snap a conjugation-symmetric root multiset to exact symmetry."""
    roots = list(roots)
    out = []
    used = [False] * len(roots)
    for i, z in enumerate(roots):
        if used[i]:
            continue
        used[i] = True
        if abs(z.imag) <= tol * max(1.0, abs(z)):
            out.append(complex(z.real, 0.0))
            continue
        best, bd = None, np.inf
        for j in range(i + 1, len(roots)):
            if used[j]:
                continue
            d = abs(np.conj(z) - roots[j])
            if d < bd:
                best, bd = j, d
        if best is not None and bd <= 2e-6 * max(1.0, abs(z)):
            used[best] = True
            zz = (z + np.conj(roots[best])) / 2
            out.append(complex(zz))
            out.append(complex(np.conj(zz)))
        else:
            out.append(complex(z))
    return out
