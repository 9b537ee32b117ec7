"""Masked, scaled log-determinant relaxation over the capped simplex.

For an instance C, subset size s, mask M, and scaling gamma > 0, the bound
is the maximum over P(n, s) = {x : e.x = s, 0 <= x <= e} of

    f(x) = 0.5 * ( logdet F(x) - s * log(gamma) ),
    F(x) = gamma * (C o M) Diag(x) (C o M) + Diag(e - x),

where o is the Hadamard product.  f is concave; at a binary x with
support S the value collapses to logdet C[S, S], so the relaxation is
exact on vertices (the basis of the binary scaling certificate).

The maximizer is found by conditional-gradient ascent from the uniform
start x0 = (s/n) e.  The linear subproblem over P(n, s) is a trivial
top-s selection.  Plain steps toward the best vertex zigzag badly when
the optimum sits inside a face, so by default each iteration moves along
the pairwise direction (best vertex minus worst vertex consistent with
the current iterate), with a golden-section line search on the segment.
Convergence is certified by the standard linearization gap
max_v grad(x) . (v - x), which upper-bounds the suboptimality of x.

Everything here is a pure function of its inputs; solves on shared
instances may run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .instance import Instance, Mask, _freeze

NEG_INF = float("-inf")

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the conditional-gradient solver.

    tol_fw is the absolute duality-gap target; None means
    1e-8 * max(1, |f(x0)|), fixed at the first iterate.
    """

    tol_fw: float | None = None
    max_iter: int = 5000
    tol_feas: float = 1e-10
    tol_binary: float = 1e-6
    ls_tol: float = 1e-11      # golden-section interval, relative to the step cap
    pairwise: bool = True      # pairwise (swap) directions; plain steps as fallback


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True, eq=False)
class BoundResult:
    value: float
    x_hat: np.ndarray
    duality_gap: float
    gamma: float
    mask_id: str
    iterations: int
    converged: bool


def is_feasible(x, s: int, tol_feas: float = 1e-10) -> bool:
    """Membership test for P(n, s) up to tol_feas."""
    x = np.asarray(x, dtype=float)
    if np.any(x < -tol_feas) or np.any(x > 1.0 + tol_feas):
        return False
    return abs(float(x.sum()) - s) <= tol_feas


def lmo_capped_simplex(g, s: int) -> np.ndarray:
    """Vertex of P(n, s) maximizing g . x.

    Puts ones on the s largest components of g; ties go to the lowest
    index, which keeps the solver deterministic.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if not 0 < s < n:
        raise ValueError(f"need 0 < s < n, got s={s}, n={n}")
    v = np.zeros(n)
    v[np.argsort(-g, kind="stable")[:s]] = 1.0
    return v


class _LinxProblem:
    """Evaluation machinery for one (instance, mask, gamma) triple.

    One factorization per iterate serves both the objective and the
    gradient.  When the masked matrix is diagonal, everything reduces to
    per-coordinate factors (gamma * a_ii^2 - 1) x_i + 1 and the O(n^3)
    factorizations disappear.
    """

    def __init__(self, inst: Instance, mask: Mask, gamma: float, s: int):
        if mask.n != inst.n:
            raise ValueError(f"mask order {mask.n} does not match instance order {inst.n}")
        A = inst.C.entries * mask.matrix.entries
        self.A = A
        self.n = inst.n
        self.gamma = float(gamma)
        self.shift = s * math.log(self.gamma)
        self.diagonal = not np.any(A - np.diag(np.diagonal(A)))
        self.coef = self.gamma * np.diagonal(A) ** 2 - 1.0  # diagonal path only

    # diagonal path

    def _factors(self, x):
        fac = self.coef * x + 1.0
        return fac if np.all(fac > 0.0) else None

    # general path

    def _cholesky(self, x):
        F = self.gamma * ((self.A * x) @ self.A)
        F[np.diag_indices(self.n)] += 1.0 - x
        F = 0.5 * (F + F.T)
        try:
            return sla.cholesky(F, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            return None

    def value(self, x) -> float:
        if self.diagonal:
            fac = self._factors(x)
            if fac is None:
                return NEG_INF
            return 0.5 * (float(np.sum(np.log(fac))) - self.shift)
        chol = self._cholesky(x)
        if chol is None:
            return NEG_INF
        return 0.5 * (2.0 * float(np.sum(np.log(np.diagonal(chol)))) - self.shift)

    def value_and_grad(self, x):
        if self.diagonal:
            fac = self._factors(x)
            if fac is None:
                return NEG_INF, None
            val = 0.5 * (float(np.sum(np.log(fac))) - self.shift)
            return val, 0.5 * self.coef / fac
        chol = self._cholesky(x)
        if chol is None:
            return NEG_INF, None
        ldet = 2.0 * float(np.sum(np.log(np.diagonal(chol))))
        Finv = sla.cho_solve((chol, True), np.eye(self.n), check_finite=False)
        afa = self.gamma * np.einsum("ij,ji->i", self.A, Finv @ self.A)
        grad = 0.5 * (afa - np.diagonal(Finv))
        return 0.5 * (ldet - self.shift), grad

    def _segment(self, x, d):
        F0 = self.gamma * ((self.A * x) @ self.A)
        F0[np.diag_indices(self.n)] += 1.0 - x
        F0 = 0.5 * (F0 + F0.T)
        G = self.gamma * ((self.A * d) @ self.A)
        G[np.diag_indices(self.n)] -= d
        G = 0.5 * (G + G.T)
        return F0, G

    def directional(self, x, d):
        """Objective restricted to t -> x + t d, with the x-parts prebuilt."""
        if self.diagonal:
            base = self.coef * x + 1.0
            slope = self.coef * d
            shift = self.shift

            def phi_diag(t: float) -> float:
                fac = base + t * slope
                if not np.all(fac > 0.0):
                    return NEG_INF
                return 0.5 * (float(np.sum(np.log(fac))) - shift)

            return phi_diag

        F0, G = self._segment(x, d)
        shift = self.shift

        def phi(t: float) -> float:
            try:
                chol = sla.cholesky(F0 + t * G, lower=True, check_finite=False)
            except np.linalg.LinAlgError:
                return NEG_INF
            return 0.5 * (2.0 * float(np.sum(np.log(np.diagonal(chol)))) - shift)

        return phi

    def directional_deriv(self, x, d):
        """Derivative of the restriction t -> x + t d; None outside the
        positive-definite region."""
        if self.diagonal:
            base = self.coef * x + 1.0
            slope = self.coef * d

            def dphi_diag(t: float):
                fac = base + t * slope
                if not np.all(fac > 0.0):
                    return None
                return 0.5 * float(np.sum(slope / fac))

            return dphi_diag

        F0, G = self._segment(x, d)

        def dphi(t: float):
            try:
                chol = sla.cholesky(F0 + t * G, lower=True, check_finite=False)
            except np.linalg.LinAlgError:
                return None
            return 0.5 * float(np.trace(sla.cho_solve((chol, True), G, check_finite=False)))

        return dphi


def linx_objective(inst: Instance, mask: Mask, gamma: float, x) -> float:
    """Objective value at x; -inf when F(x) is not positive definite.

    The -s log(gamma) correction uses sum(x) rounded to the nearest
    integer: s is a fixed property of the feasible set, so it must not
    drift when x is perturbed off the simplex (finite-difference probes
    rely on this).
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    x = np.asarray(x, dtype=float)
    return _LinxProblem(inst, mask, gamma, round(float(x.sum()))).value(x)


def linx_gradient(inst: Instance, mask: Mask, gamma: float, x) -> np.ndarray:
    """Analytic gradient: 0.5 * (gamma [A F^-1 A]_ii - [F^-1]_ii), A = C o M.

    Raises when F(x) is not positive definite.
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    x = np.asarray(x, dtype=float)
    _, grad = _LinxProblem(inst, mask, gamma, round(float(x.sum()))).value_and_grad(x)
    if grad is None:
        raise np.linalg.LinAlgError("F(x) is not positive definite")
    return grad


def _golden_max(phi, hi: float, tol: float):
    """Golden-section search for a maximizer of a concave phi on [0, hi].

    -inf values are fine (they lose every comparison); ties shrink the
    bracket from the right, so flat -inf tails are walked away from.
    """
    a, b = 0.0, hi
    h = hi
    if h <= tol:
        return hi, phi(hi)
    steps = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    fc = phi(c)
    fd = phi(d)
    for _ in range(steps):
        if fc >= fd:
            b, d, fd = d, c, fc
            h *= _INV_PHI
            c = a + _INV_PHI2 * h
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            fd = phi(d)
    return (c, fc) if fc >= fd else (d, fd)


def _line_search(phi, cap: float, rel_tol: float):
    """Maximize a concave phi over [0, cap], favoring the exact endpoint.

    If phi is still rising at the cap (checked against a point just
    inside), the cap is returned exactly; landing on vertices without
    rounding error is what lets binary maximizers come out binary.
    """
    f_cap = phi(cap)
    if np.isfinite(f_cap):
        inside = cap * (1.0 - 1e-7)
        if f_cap >= phi(inside):
            return cap, f_cap
    t, ft = _golden_max(phi, cap, rel_tol * cap)
    if f_cap >= ft:
        return cap, f_cap
    return t, ft


def _away_vertex(g, x, s: int, eps: float = 1e-12):
    """Worst vertex of the minimal face of P(n, s) containing x.

    Coordinates at 1 are forced in, coordinates at 0 are forced out, and
    the remaining slots are filled with the smallest gradient entries
    (ties to the lowest index).  Returns None when x is too close to a
    vertex for the construction to make sense.
    """
    ones = x >= 1.0 - eps
    zeros = x <= eps
    frac = np.flatnonzero(~ones & ~zeros)
    need = s - int(np.count_nonzero(ones))
    if need < 0 or len(frac) < need:
        return None
    v = np.zeros(x.shape[0])
    v[ones] = 1.0
    if need > 0:
        order = frac[np.argsort(g[frac], kind="stable")]
        v[order[:need]] = 1.0
    return v


def _directions(x, g, v_fw, s: int, opts: SolverOptions):
    """Candidate (direction, step cap) pairs, best first."""
    if opts.pairwise:
        v_aw = _away_vertex(g, x, s)
        if v_aw is not None:
            d = v_fw - v_aw
            dec = d < 0.0
            inc = d > 0.0
            if dec.any() and inc.any():
                cap = min(float(x[dec].min()), float((1.0 - x[inc]).min()))
                if cap > 0.0:
                    yield d, cap
    d = v_fw - x
    if np.any(d != 0.0):
        yield d, 1.0


_POLISH_CAP = 120  # derivative-bisection steps allowed after value search saturates


def _derivative_step(problem, x, d, cap: float) -> float:
    """Locate the 1-D maximizer along d by bisecting the sign of the
    directional derivative (monotone for concave objectives)."""
    dphi = problem.directional_deriv(x, d)
    at_cap = dphi(cap)
    if at_cap is not None and at_cap >= 0.0:
        return cap
    lo, hi = 0.0, cap
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        val = dphi(mid)
        if val is None or val < 0.0:
            hi = mid
        else:
            lo = mid
    return lo


def _maximize_capped_simplex(problem, n: int, s: int, opts: SolverOptions):
    """Conditional-gradient ascent core shared by the bound solvers.

    Runs value-comparison (golden-section) line searches until they stop
    producing measurable improvement, then switches to derivative
    bisection, which localizes the 1-D maximizer far below the float
    resolution of objective comparisons and lets the gap fall the rest
    of the way to the tolerance.
    """
    x = np.full(n, s / n)
    f, g = problem.value_and_grad(x)
    if not np.isfinite(f):
        raise ArithmeticError("objective is undefined at the uniform start point")
    tol = opts.tol_fw if opts.tol_fw is not None else 1e-8 * max(1.0, abs(f))
    converged = False
    gap = math.inf
    iters = 0
    polish = False
    polish_left = _POLISH_CAP
    while iters < opts.max_iter:
        iters += 1
        v_fw = lmo_capped_simplex(g, s)
        gap = float(g @ (v_fw - x))
        if gap <= tol:
            converged = True
            break
        moved = False
        if not polish:
            for d, cap in _directions(x, g, v_fw, s, opts):
                t, ft = _line_search(problem.directional(x, d), cap, opts.ls_tol)
                if t > 0.0 and np.isfinite(ft) and ft > f:
                    x = np.clip(x + t * d, 0.0, 1.0)
                    f, g = problem.value_and_grad(x)
                    moved = True
                    break
            if not moved:
                polish = True
        if polish and not moved:
            if polish_left <= 0:
                break
            polish_left -= 1
            for d, cap in _directions(x, g, v_fw, s, opts):
                if float(g @ d) <= 0.0:
                    continue
                t = _derivative_step(problem, x, d, cap)
                if t <= 0.0:
                    continue
                xn = np.clip(x + t * d, 0.0, 1.0)
                if not np.any(xn != x):
                    continue
                fn, gn = problem.value_and_grad(xn)
                # exact 1-D ascent cannot lose value beyond rounding
                if gn is not None and fn >= f - 1e-12 * max(1.0, abs(f)):
                    x, f, g = xn, fn, gn
                    moved = True
                    break
        if not moved:
            break  # no float-representable progress along any direction
    # the loop can exit on the iteration budget right after a move; make the
    # reported gap describe the iterate actually returned
    gap = float(g @ (lmo_capped_simplex(g, s) - x))
    converged = gap <= tol
    drift = s - float(x.sum())
    if drift != 0.0:
        if abs(drift) > opts.tol_feas:
            raise ArithmeticError(f"iterate left the simplex (drift {drift:.3g})")
        j = int(np.argmax(np.minimum(x, 1.0 - x)))
        if 0.0 <= x[j] + drift <= 1.0:
            x[j] += drift
    return x, f, max(gap, 0.0), iters, converged


def solve_linx(
    inst: Instance,
    s: int,
    mask: Mask | None = None,
    gamma: float = 1.0,
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> BoundResult:
    """Maximize the relaxation objective over P(n, s).

    mask=None means the all-ones mask (no masking).  On hitting the
    iteration cap the best iterate is returned with converged=False; its
    duality_gap still upper-bounds how far the value can be below the
    true bound.
    """
    if mask is None:
        mask = Mask.ones(inst.n)
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    s = int(s)
    if not 0 < s < inst.n:
        raise ValueError(f"need 0 < s < n, got s={s}, n={inst.n}")
    problem = _LinxProblem(inst, mask, gamma, s)
    x, f, gap, iters, converged = _maximize_capped_simplex(problem, inst.n, s, opts)
    return BoundResult(
        value=f,
        x_hat=_freeze(x),
        duality_gap=gap,
        gamma=float(gamma),
        mask_id=mask.label,
        iterations=iters,
        converged=converged,
    )


def certify_gamma_optimal(result: BoundResult, tol_binary: float = 1e-6) -> bool:
    """True when the converged maximizer is within tol_binary of binary.

    Because the relaxation is exact at binary points, a binary maximizer
    at some gamma pins the scaled bound to a value no scaling can beat,
    so that gamma is globally optimal.  Non-converged results never
    certify.
    """
    if not result.converged:
        return False
    x = result.x_hat
    return bool(np.all(np.minimum(x, 1.0 - x) <= tol_binary))
