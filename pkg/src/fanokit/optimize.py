"""Strictly convex minimization: soliton direction, rescaling and twist optima.

All objectives here are smooth log-exponential integrals whose gradients are
tilted means and whose Hessians are tilted covariances, hence positive
semidefinite; a damped Newton iteration with backtracking is enough.  Each
result carries a convexity certificate (smallest Hessian eigenvalue at the
reported argmin) alongside the gradient norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._kernel import compensated_tree_sum
from .errors import (
    DenominatorVanishes,
    InputError,
    InvalidVolumeFunction,
    NegativeSupport,
    NonConvergence,
    OriginNotInterior,
)
from .expint import PLConcaveFunction, pl_exp_integral, simplex_exp_integral, simplex_weighted_exp_integral
from .functionals import LPolicy
from .geometry import AffineForm, RationalPolytope, origin_in_interior, pairing_form
from .measure import DHMeasure
from .rational import rat, rat_vector

NEWTON_TOL = 1e-10
MAX_ITER = 100
ARMIJO = 1e-4
BACKTRACK = 0.5
COND_LIMIT = 1e12
DIRAC_VARIANCE_TOL = 1e-14


@dataclass(frozen=True)
class OptResult:
    argmin: tuple | float
    value: float
    grad_norm: float
    hessian_min_eig: float
    iterations: int
    converged: bool

    def to_json(self) -> dict:
        arg = list(self.argmin) if isinstance(self.argmin, tuple) else self.argmin
        return {
            "argmin": arg,
            "value": self.value,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "certificates": {
                "hessian_min_eig": self.hessian_min_eig,
                "converged": self.converged,
                "tolerance": NEWTON_TOL,
            },
        }


@dataclass(frozen=True)
class ConvexScan:
    points: tuple
    values: tuple
    derivative_at_zero: float | None = None

    def midpoint_convex(self, tol: float = 1e-10) -> bool:
        ok = True
        for i in range(len(self.points) - 2):
            left, mid, right = self.values[i], self.values[i + 1], self.values[i + 2]
            ok = ok and mid <= 0.5 * (left + right) + tol
        return ok

    def to_json(self) -> dict:
        return {
            "points": list(self.points),
            "values": list(self.values),
            "derivative_at_zero": self.derivative_at_zero,
        }


def newton_minimize(f, grad, hess, x0, tol: float = NEWTON_TOL,
                    max_iter: int = MAX_ITER) -> OptResult:
    """Damped Newton with backtracking; gradient fallback for bad conditioning."""
    x = np.atleast_1d(np.asarray(x0, dtype=float))
    fx = f(x)
    iters = 0
    g = np.atleast_1d(grad(x))
    while iters < max_iter:
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            break
        H = np.atleast_2d(hess(x))
        try:
            if np.linalg.cond(H) > COND_LIMIT:
                step = -g
            else:
                step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            step = -g
        slope = float(g @ step)
        if slope >= 0:  # not a descent direction; fall back to steepest descent
            step = -g
            slope = -gnorm**2
        if -slope <= 1e-15 * max(1.0, abs(fx)):
            # predicted decrease is below evaluation noise: trust the model step
            x = x + step
        else:
            t = 1.0
            while t > 1e-14:
                candidate = x + t * step
                fc = f(candidate)
                if fc <= fx + ARMIJO * t * slope:
                    break
                t *= BACKTRACK
            else:
                raise NonConvergence("line search stalled")
            x = x + t * step
        fx = f(x)
        g = np.atleast_1d(grad(x))
        iters += 1
    gnorm = float(np.linalg.norm(g))
    H = np.atleast_2d(hess(x))
    min_eig = float(np.linalg.eigvalsh(0.5 * (H + H.T))[0])
    if min_eig < 0 and min_eig > -1e-12 * max(1.0, float(np.linalg.norm(H))):
        min_eig = 0.0
    converged = gnorm <= tol
    if not converged and iters >= max_iter:
        raise NonConvergence(f"gradient norm {gnorm} after {iters} iterations")
    return OptResult(tuple(float(v) for v in x), fx, gnorm, min_eig, iters, converged)


# ---------------------------------------------------------------------------
# tilted-moment helpers over a polytope


class _TiltedIntegrals:
    """int e^{-<y', xi>}, its first moments and covariance over a fixed triangulation."""

    def __init__(self, polytope: RationalPolytope, rank: int):
        self.dim = polytope.dim
        self.rank = rank
        self.cells = polytope.triangulate()

    def _forms(self, xi):
        return pairing_form([rat(v).limit_denominator(10**15) for v in xi], self.dim)

    def value(self, xi) -> float:
        ell = self._forms(xi)
        return compensated_tree_sum([simplex_exp_integral(s, ell).value for s in self.cells])

    def mean(self, xi) -> np.ndarray:
        ell = self._forms(xi)
        total = self.value(xi)
        out = np.zeros(self.rank)
        for j in range(self.rank):
            w = pairing_form([int(i == j) for i in range(self.rank)], self.dim)
            num = compensated_tree_sum(
                [simplex_weighted_exp_integral(s, ell, w, 1).value for s in self.cells]
            )
            out[j] = num / total
        return out

    def second_moment(self, xi) -> np.ndarray:
        ell = self._forms(xi)
        total = self.value(xi)
        r = self.rank
        out = np.zeros((r, r))
        for i in range(r):
            for j in range(i, r):
                # polarization: y_i y_j = ((y_i+y_j)^2 - (y_i-y_j)^2) / 4
                plus = [int(k == i) + int(k == j) for k in range(r)]
                minus = [int(k == i) - int(k == j) for k in range(r)]
                wp = pairing_form(plus, self.dim)
                wm = pairing_form(minus, self.dim)
                sp = compensated_tree_sum(
                    [simplex_weighted_exp_integral(s, ell, wp, 2).value for s in self.cells]
                )
                sm = compensated_tree_sum(
                    [simplex_weighted_exp_integral(s, ell, wm, 2).value for s in self.cells]
                )
                out[i, j] = out[j, i] = (sp - sm) / 4.0 / total
        return out

    def covariance(self, xi) -> np.ndarray:
        m = self.mean(xi)
        return self.second_moment(xi) - np.outer(m, m)


def soliton_vector(polytope: RationalPolytope, rank: int | None = None,
                   x0=None, tol: float = NEWTON_TOL) -> OptResult:
    """Unique minimizer of xi -> log int e^{-<y', xi>} dy over the first ``rank`` coords.

    The properness precondition (0 strictly inside the projected polytope) is
    checked exactly before iterating.  The reported value is the entropy
    functional at the optimum: log of the mass-normalized tilted volume.
    """
    r = rank if rank is not None else polytope.dim
    projected = polytope.project(r)
    if not projected.full_dimensional or not origin_in_interior(projected.vertices):
        raise OriginNotInterior(
            "0 must lie strictly inside the projected polytope for properness"
        )
    tilted = _TiltedIntegrals(polytope, r)
    vol = float(polytope.volume())

    def f(xi):
        return math.log(tilted.value(xi) / vol)

    def g(xi):
        return -tilted.mean(xi)

    return newton_minimize(f, g, tilted.covariance,
                           x0 if x0 is not None else np.zeros(r), tol=tol)


def rescale_opt(A, mu: DHMeasure, tol: float = NEWTON_TOL) -> OptResult:
    """Minimize f(a) = a*A + log((1/V) int e^{-a x} dmu) over a >= 0.

    Returns a_* = 0 with value 0 when the slope at zero beta = A - E is
    nonnegative; otherwise the unique interior optimum with f(a_*) < 0.
    """
    A = float(A)
    if A <= 0:
        raise InputError(f"log discrepancy must be positive, got {A}")
    support = mu.support()
    if support.lambda_min < -1e-12:
        raise NegativeSupport(f"support starts at {support.lambda_min} < 0")

    # shift the spectrum to start at 0: f is unchanged up to replacing A by
    # A - lambda_min, and the exponential moments stay representable
    lam0 = rat(support.lambda_min).limit_denominator(10**12)
    mu_w = mu.affine_transform(1, -lam0) if lam0 != 0 else mu
    A_w = A - float(lam0)

    def tilted_stats(a):
        # mean and variance of x under the tilted law e^{-a x} dmu / normalization
        q = mu_w.exp_moment(a)
        m1 = _tilted_moment(mu_w, a, 1) / q
        m2 = _tilted_moment(mu_w, a, 2) / q
        return q, m1, max(m2 - m1 * m1, 0.0)

    def f(a):
        return a * A_w + math.log(mu_w.exp_moment(a))

    _, mean1, var1 = tilted_stats(1.0)
    if var1 < DIRAC_VARIANCE_TOL:
        # Dirac spectrum: the objective is affine a*(A - T)
        T = mu.moment(1)
        if A >= T:
            # affine increasing objective: boundary minimum, projected gradient 0
            return OptResult(0.0, 0.0, 0.0, 0.0, 0, True)
        raise NonConvergence(
            "objective is affine for a Dirac spectral measure with position above A; "
            "no minimizer exists (infimum at a -> infinity)"
        )

    beta = A - mu.moment(1)
    if beta >= 0:
        # f'(0) = beta >= 0 and f is convex: the boundary a = 0 is the minimum
        return OptResult(0.0, 0.0, 0.0, 0.0, 0, True)
    if A_w <= 0:
        # the tilted mean stays above lambda_min >= A: f decreases forever
        raise NonConvergence(
            f"A = {A} does not exceed the spectrum minimum {float(lam0)}: "
            "the rescaling objective has no interior minimum"
        )

    # bracket the root of f'(a) = A_w - tilted_mean(a), increasing in a
    lo = 0.0
    hi = 1.0
    for _ in range(200):
        _, mean_hi, _ = tilted_stats(hi)
        if A_w - mean_hi > 0:
            break
        hi *= 2.0
    else:
        raise NonConvergence("rescaling objective has no interior minimum")

    a = min(max(-beta, 1e-3), 0.5 * hi)
    iters = 0
    while iters < MAX_ITER:
        _, mean_a, var_a = tilted_stats(a)
        fp = A_w - mean_a
        if abs(fp) <= tol:
            break
        if fp > 0:
            hi = a
        else:
            lo = a
        step = -fp / var_a if var_a > 0 else None
        candidate = a + step if step is not None else None
        if candidate is None or not (lo < candidate < hi):
            candidate = 0.5 * (lo + hi)
        a = candidate
        iters += 1
    else:
        raise NonConvergence(f"rescaling optimum not found in {MAX_ITER} iterations")
    _, mean_a, var_a = tilted_stats(a)
    return OptResult(a, f(a), abs(A_w - mean_a), max(var_a, 0.0), iters, True)


def _tilted_moment(mu: DHMeasure, a, k: int) -> float:
    """(1/mass) int x^k e^{-a x} dmu."""
    if mu.variant == "atomic":
        total = float(sum(float(m) for _, m, _ in mu.atoms))
        vals = [float(m) * float(pos) ** k * math.exp(-float(a) * float(pos))
                for pos, m, _ in mu.atoms]
        return compensated_tree_sum(sorted(vals)) / total
    tr = mu.transform
    n = tr.dim
    ar = rat(a).limit_denominator(10**15) if not isinstance(a, Fraction) else a
    ell = pairing_form(mu.weight_xi, n)
    vals = []
    for s, g in tr.cells:
        form = g.scaled(ar).plus(ell) if ar != 0 else ell
        if k == 0:
            vals.append(simplex_exp_integral(s, form).value)
        else:
            vals.append(simplex_weighted_exp_integral(s, form, g, k).value)
    return math.factorial(n) * compensated_tree_sum(vals) / mu.mass()


def twist_opt(F, m_list, L: LPolicy, x0=None, tol: float = NEWTON_TOL) -> OptResult:
    """Minimize xi -> L - S_tilde(twist(F, xi)) on pooled empirical atoms.

    For a single degree this is exactly L + log Q_m of the twisted filtration.
    Strict convexity gives a unique argmin; the properness test (0 interior to
    the hull of the scaled weights) runs exactly first.
    """
    from .filtration import empirical_dh  # local import to avoid a cycle

    if isinstance(m_list, int):
        m_list = [m_list]
    atoms = []
    for m in m_list:
        lv = F.level(m)
        if lv.weights is None:
            from .errors import MissingTorusWeights

            raise MissingTorusWeights(f"level {m} has no torus weights")
        for val, w in zip(lv.values, lv.weights):
            atoms.append((float(val) / m, 1.0 / len(m_list) / lv.dim,
                          tuple(float(x) / m for x in w)))
    rank = len(atoms[0][2])
    weight_points = [tuple(Fraction(x).limit_denominator(10**12) for x in w)
                     for _, _, w in atoms]
    if not origin_in_interior(weight_points):
        raise OriginNotInterior(
            "0 must lie strictly inside the hull of the scaled torus weights"
        )
    positions = np.array([p for p, _, _ in atoms])
    masses = np.array([m for _, m, _ in atoms])
    weights = np.array([w for _, _, w in atoms])

    def neg_s_tilde(xi):
        shifted = positions + weights @ np.asarray(xi)
        zmax = np.max(-shifted)
        return zmax + math.log(float(np.sum(masses * np.exp(-shifted - zmax))))

    def grad(xi):
        shifted = positions + weights @ np.asarray(xi)
        p = masses * np.exp(-(shifted - np.min(shifted)))
        p /= p.sum()
        return -(weights.T @ p)

    def hess(xi):
        shifted = positions + weights @ np.asarray(xi)
        p = masses * np.exp(-(shifted - np.min(shifted)))
        p /= p.sum()
        mean = weights.T @ p
        cov = (weights.T * p) @ weights - np.outer(mean, mean)
        return cov

    start = np.zeros(rank) if x0 is None else np.asarray(x0, dtype=float)
    inner = newton_minimize(neg_s_tilde, grad, hess, start, tol=tol)
    value = L.twisted().value + inner.value  # L - S_tilde, with -S_tilde = inner value
    return OptResult(inner.argmin, value, inner.grad_norm,
                     inner.hessian_min_eig, inner.iterations, inner.converged)


def interpolation_derivative(transform_or_filtration, xi, L_hat,
                             h: float = 1e-4, degree: int | None = None):
    """Analytic and finite-difference s-derivatives at 0 of the rescaled-twist family.

    The family interpolates the weight filtration of xi (s = 0) and the given
    data (s = 1); its value function is s*L_hat - S_tilde at the interpolated
    transform.  Returns (analytic, finite_difference).
    """
    if isinstance(transform_or_filtration, PLConcaveFunction):
        G = transform_or_filtration
        n = G.dim
        xi_r = rat_vector(xi)
        ell = pairing_form(xi_r, n)

        def h_hat(s):
            s_r = rat(s).limit_denominator(10**15)
            cells = [(simp, form.scaled(s_r).plus(ell.scaled(1 - s_r)))
                     for simp, form in G.cells]
            mixed = PLConcaveFunction(G.domain, tuple(cells))
            total = pl_exp_integral(mixed).value
            return float(s) * L_hat - (-math.log(total))

        # analytic: L_hat - (int (G - <y, xi>) e^{-<y, xi>}) / (int e^{-<y, xi>})
        denom = compensated_tree_sum(
            [simplex_exp_integral(s, ell).value for s, _ in G.cells])
        numer = compensated_tree_sum(
            [simplex_weighted_exp_integral(s, ell, f.plus(ell.scaled(-1)), 1).value
             for s, f in G.cells])
        analytic = L_hat - numer / denom
    else:
        F = transform_or_filtration
        m = degree if degree is not None else max(F.degrees())
        lv = F.level(m)
        if lv.weights is None:
            from .errors import MissingTorusWeights

            raise MissingTorusWeights(f"level {m} has no torus weights")
        lam = np.array([float(v) / m for v in lv.values])
        wts = np.array([[float(x) / m for x in w] for w in lv.weights])
        pairing = wts @ np.asarray([float(x) for x in xi])

        def h_hat(s):
            vals = s * lam + (1 - s) * pairing
            return s * L_hat - (-math.log(np.mean(np.exp(-vals))))

        p = np.exp(-pairing)
        p /= p.sum()
        analytic = L_hat - float(np.sum((lam - pairing) * p))

    fd = (-3.0 * h_hat(0.0) + 4.0 * h_hat(h) - h_hat(2 * h)) / (2 * h)
    return analytic, fd


def cone_family(A, mu_g: DHMeasure, s_grid=None, dim: int = 1) -> ConvexScan:
    """Normalized cone-volume family f(s) = A^{n+1} E[(s x + (1-s) A)^{-(n+1)}].

    f(0) = 1 and f'(0) = (n+1) * (A - E_g) / A; the scan certifies midpoint
    convexity on the sampled grid.
    """
    A = float(A)
    if A <= 0:
        raise InputError(f"cone apex parameter must be positive, got {A}")
    if s_grid is None:
        s_grid = [i * 0.05 for i in range(20)]  # {0, 0.05, ..., 0.95}
    s_grid = sorted(float(s) for s in s_grid)
    support = mu_g.support()
    n1 = dim + 1
    for s in s_grid:
        for endpoint in (support.lambda_min, support.lambda_max):
            if s * endpoint + (1 - s) * A <= 0:
                raise DenominatorVanishes(
                    f"s x + (1-s) A vanishes at s = {s}, x = {endpoint}"
                )

    def f(s):
        return A**n1 * _expectation(
            mu_g,
            lambda x: (s * x + (1 - s) * A) ** (-n1),
            lambda x: -n1 * s * (s * x + (1 - s) * A) ** (-n1 - 1),
        )

    values = tuple(f(s) for s in s_grid)
    e_g = mu_g.moment(1)
    deriv0 = n1 * (A - e_g) / A
    return ConvexScan(tuple(s_grid), values, deriv0)


def _expectation(mu: DHMeasure, phi, phi_prime=None) -> float:
    """(1/mass) int phi(x) dmu: exact sums for atoms, parts-integration otherwise."""
    if mu.variant == "atomic":
        total = float(sum(float(m) for _, m, _ in mu.atoms))
        return math.fsum(float(m) * phi(float(p)) for p, m, _ in mu.atoms) / total
    # int phi dmu = phi(lo) * mass + int_lo^hi phi'(t) mass_above(t) dt
    info = mu.support()
    lo, hi = info.lambda_min, info.lambda_max
    total = mu.mass()
    if phi_prime is None:
        eps = 1e-7 * max(1.0, abs(hi - lo))

        def phi_prime(t, _eps=eps):
            return (phi(t + _eps) - phi(t - _eps)) / (2 * _eps)

    integral = _adaptive_simpson(lambda t: phi_prime(t) * mu.mass_above(t), lo, hi, 1e-11)
    return phi(lo) + integral / total


def _adaptive_simpson(g, a, b, tol, depth: int = 24):
    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, d):
        xm = 0.5 * (x0 + x2)
        lm, rm = 0.5 * (x0 + xm), 0.5 * (xm + x2)
        flm, frm = g(lm), g(rm)
        left = simpson(x0, xm, f0, flm, f1)
        right = simpson(xm, x2, f1, frm, f2)
        if d <= 0 or abs(left + right - whole) < 15 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(x0, xm, f0, flm, f1, left, d - 1)
                + recurse(xm, x2, f1, frm, f2, right, d - 1))

    fa, fm, fb = g(a), g(0.5 * (a + b)), g(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, depth)


def vol_g_tau(V_g, volg_fn, tau, n: int, tol: float = 1e-11) -> float:
    """V_g / tau^{n+1} - (n+1) int_0^inf volg_fn(x) dx / (x + tau)^{n+2}.

    ``volg_fn`` must be non-increasing with volg_fn(0) <= V_g and compactly
    supported decrease; the tail where it vanishes is integrated in closed form.
    """
    V_g = float(V_g)
    tau = float(tau)
    if tau <= 0 or V_g <= 0:
        raise InputError("tau and V_g must be positive")
    probes = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
    vals = [float(volg_fn(x)) for x in probes]
    if vals[0] > V_g * (1 + 1e-12):
        raise InvalidVolumeFunction(f"volg_fn(0) = {vals[0]} exceeds V_g = {V_g}")
    for a, b in zip(vals, vals[1:]):
        if b > a + 1e-12 * max(1.0, abs(a)):
            raise InvalidVolumeFunction("volume profile is not non-increasing")
    # find T with volg_fn ~ 0 beyond it
    T = 1.0
    for _ in range(80):
        if float(volg_fn(T)) <= 1e-300:
            break
        T *= 2.0
    else:
        raise InvalidVolumeFunction("volume profile does not decay on [0, 2^80]")
    # profiles may drop to 0 with a jump; locate the support end by bisection
    # (monotonicity) so the discontinuity sits at an integration endpoint
    lo, hi = 0.0, T
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(volg_fn(mid)) > 1e-300:
            lo = mid
        else:
            hi = mid
    # integrate up to the inner bound: the profile is positive throughout, and
    # the skipped sliver [lo, hi] is ~2^-80 wide
    integral = _adaptive_simpson(
        lambda x: float(volg_fn(x)) / (x + tau) ** (n + 2), 0.0, lo, tol
    )
    return V_g / tau ** (n + 1) - (n + 1) * integral
