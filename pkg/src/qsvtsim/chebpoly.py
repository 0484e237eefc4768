"""Bounded Chebyshev approximations to the unit step function.

Builds polynomials that stay within [0, eta/2] on [-1, -delta] and within
[1 - eta/2, 1] on [delta, 1] while remaining bounded by 1 everywhere on
[-1, 1], certifies those bounds on dense grids, and searches for the
smallest degree that meets a given (delta, eta) target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.optimize import linprog
from scipy.special import erf, erfcinv

# Certification tolerance applied to every bound violation.
GRID_TOL = 1e-9
# Uniform grid used for the global |P(x)| <= 1 check.
BOX_GRID_POINTS = 10_000
# Rounding slack accepted on the evaluation domain [-1, 1].
EVAL_DOMAIN_SLACK = 1e-12

# The discrete-minimax (linear program) fit is attempted up to this degree;
# beyond it the erf-truncation path is consistently the cheaper construction.
_LP_MAX_DEGREE = 160
# Safety margin the builder keeps between a candidate's fitted bound and the
# requested eta, so that grid certification is not decided by rounding.
_FIT_MARGIN = 1e-8


class CapacityError(RuntimeError):
    """No certified polynomial was found within the degree budget."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


def _classify_parity(coeffs):
    odd_all_zero = all(c == 0.0 for c in coeffs[1::2])
    even_all_zero = all(c == 0.0 for c in coeffs[0::2])
    if odd_all_zero:
        return "even"
    if even_all_zero:
        return "odd"
    return "none"


@dataclass(frozen=True)
class ChebPoly:
    """Polynomial in the Chebyshev basis, bounded by 1 on [-1, 1].

    coeffs holds (c_0, ..., c_d) for P(x) = sum_k c_k T_k(x).  The parity
    flag is only ever "even" or "odd" when the complementary coefficients
    are exactly zero; anything else is "none".
    """

    coeffs: tuple
    degree: int
    parity: str

    def __post_init__(self):
        if self.degree < 0 or len(self.coeffs) != self.degree + 1:
            raise ValueError("degree must match len(coeffs) - 1")
        if self.degree > 0 and self.coeffs[-1] == 0.0:
            raise ValueError("leading coefficient must be nonzero")
        if self.parity not in ("even", "odd", "none"):
            raise ValueError(f"unknown parity flag {self.parity!r}")
        if self.parity == "even" and any(c != 0.0 for c in self.coeffs[1::2]):
            raise ValueError("parity 'even' requires zero odd-index coefficients")
        if self.parity == "odd" and any(c != 0.0 for c in self.coeffs[0::2]):
            raise ValueError("parity 'odd' requires zero even-index coefficients")
        arr = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "_arr", arr)
        xs = np.linspace(-1.0, 1.0, BOX_GRID_POINTS)
        if np.max(np.abs(npcheb.chebval(xs, arr))) > 1.0 + GRID_TOL:
            raise ValueError("|P(x)| exceeds 1 beyond tolerance on [-1, 1]")

    @classmethod
    def from_coeffs(cls, coeffs):
        """Build from a coefficient sequence, trimming exact trailing zeros."""
        arr = [float(c) for c in coeffs]
        if not arr:
            raise ValueError("need at least one coefficient")
        while len(arr) > 1 and arr[-1] == 0.0:
            arr.pop()
        coeffs = tuple(arr)
        return cls(coeffs=coeffs, degree=len(coeffs) - 1,
                   parity=_classify_parity(coeffs))

    def eval(self, x):
        """Clenshaw-style evaluation of P at x (scalar or array) in [-1, 1]."""
        xs = np.asarray(x, dtype=float)
        if np.any(np.abs(xs) > 1.0 + EVAL_DOMAIN_SLACK):
            raise ValueError("evaluation point outside [-1, 1]")
        xs = np.clip(xs, -1.0, 1.0)
        out = npcheb.chebval(xs, self._arr)
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class StepSpec:
    """Target for the step approximation: window half-width and error budget."""

    delta: float
    eta: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie strictly inside (0, 1)")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class BoundReport:
    """Signed worst-case excesses over the three step-bound conditions.

    Negative numbers mean the condition held with room to spare.  The
    report passes when every excess is at most GRID_TOL.
    """

    max_low_violation: float
    max_high_violation: float
    max_abs_excess: float
    grid_size: int

    @property
    def passes(self):
        return (self.max_low_violation <= GRID_TOL
                and self.max_high_violation <= GRID_TOL
                and self.max_abs_excess <= GRID_TOL)


def _cert_grids(delta):
    left = np.linspace(-1.0, -delta, 4000)
    mid = np.linspace(-delta, delta, 2001)
    right = np.linspace(delta, 1.0, 4000)
    return left, mid, right


def verify_bounds(poly, spec):
    """Certify the step bounds for poly on dense grids over [-1, 1]."""
    left, mid, right = _cert_grids(spec.delta)
    pl = poly.eval(left)
    pm = poly.eval(mid)
    pr = poly.eval(right)
    low = float(np.max(pl) - spec.eta / 2.0)
    high = float((1.0 - spec.eta / 2.0) - np.min(pr))
    all_vals = np.concatenate([pl, pm, pr])
    excess = float(np.max(np.abs(all_vals)) - 1.0)
    return BoundReport(max_low_violation=low, max_high_violation=high,
                       max_abs_excess=excess, grid_size=left.size + mid.size + right.size)


# ---------------------------------------------------------------------------
# Builder internals.  The step is produced as P(x) = (1 + q(x)) / 2 where q
# is an odd polynomial with |q| <= 1 on [-1, 1] and q >= 1 - eta on
# [delta, 1]; oddness makes the left-plateau condition automatic.


def _edge_grid(degree):
    """Chebyshev-spaced points that resolve the fast oscillation near x = 1."""
    n = min(4 * degree + 65, 4097)
    return np.cos(np.linspace(0.0, math.pi / 2.0, n))


def _rescale_grid(delta, degree):
    pieces = [
        np.abs(np.linspace(-1.0, 1.0, BOX_GRID_POINTS)),
        np.linspace(delta, 1.0, 4000),
        np.linspace(0.0, delta, 201),
        _edge_grid(degree),
    ]
    return np.unique(np.concatenate(pieces))


def _step_from_odd(odd_coeffs, delta):
    """Map an odd sign-like polynomial q to the step (1 + q)/2, renormalised.

    The rescale guarantees |q| <= 1 on a grid at least as fine as the one
    the ChebPoly constructor checks, so construction cannot fail on the
    box bound.
    """
    d = len(odd_coeffs) - 1
    grid = _rescale_grid(delta, d)
    peak = float(np.max(np.abs(npcheb.chebval(grid, odd_coeffs))))
    scale = 1.0 if peak <= 1.0 else (1.0 - 1e-13) / peak
    step = np.zeros(d + 1)
    step[0] = 0.5
    step[1::2] = 0.5 * scale * np.asarray(odd_coeffs)[1::2]
    return ChebPoly.from_coeffs(step)


class _Search:
    """Tracks the best certified candidate and the least-bad failure."""

    def __init__(self, spec):
        self.spec = spec
        self.best = None
        self.best_report = None
        self.closest_fail = None

    @property
    def best_degree(self):
        return self.best.degree if self.best is not None else None

    def try_odd(self, odd_coeffs):
        poly = _step_from_odd(odd_coeffs, self.spec.delta)
        return self.try_poly(poly)

    def try_poly(self, poly):
        report = verify_bounds(poly, self.spec)
        if report.passes:
            if self.best is None or poly.degree < self.best.degree:
                self.best = poly
                self.best_report = report
            return True
        badness = max(report.max_low_violation, 0.0) \
            + max(report.max_high_violation, 0.0) + max(report.max_abs_excess, 0.0)
        if self.closest_fail is None or badness < self.closest_fail[0]:
            self.closest_fail = (badness, report)
        return False


def _erf_odd_coeffs(k, n_terms):
    """Chebyshev coefficients of erf(k x) up to degree n_terms."""
    coeffs = npcheb.chebinterpolate(lambda x: erf(k * x), n_terms)
    coeffs[0::2] = 0.0  # erf is odd; the even terms are rounding dust
    return coeffs


def _erf_path(search, limit):
    """Sweep the erf steepness k, taking the smallest certified truncation.

    For each k the plateau already loses erfc(k*delta), so the Chebyshev
    tail of the truncation must fit in the remaining eta budget; the tail
    sums give a sharp starting degree which a short certification walk
    then refines.
    """
    spec = search.spec
    delta, eta = spec.delta, spec.eta
    for frac in np.geomspace(0.98, 1e-6, 24):
        plateau_err = eta * frac
        budget = eta - plateau_err
        k = float(erfcinv(plateau_err)) / delta
        rough = 2.0 * k * math.sqrt(max(math.log(4.0 / budget), 1.0))
        cap = limit if search.best_degree is None else min(limit, search.best_degree - 2)
        if cap < 1 or rough > 3.0 * cap:
            continue
        n_terms = max(int(math.ceil(12.2 * k)) + 96, 192)
        coeffs = _erf_odd_coeffs(k, n_terms)
        tails = np.concatenate([np.cumsum(np.abs(coeffs)[::-1])[::-1][1:], [0.0]])
        ok = np.flatnonzero(plateau_err + 2.0 * tails <= eta * (1.0 - 1e-9))
        if ok.size == 0:
            continue
        d0 = int(ok[0])
        if d0 % 2 == 0:
            d0 += 1
        d0 = max(d0, 1)
        if d0 > cap:
            continue
        if search.try_odd(coeffs[:d0 + 1]):
            d = d0
            while d - 2 >= 1 and search.try_odd(coeffs[:d - 1]):
                d -= 2
        else:
            for d in (d0 + 2, d0 + 4):
                if d <= cap and search.try_odd(coeffs[:d + 1]):
                    break


def _lp_odd_fit(delta, eta, degree):
    """Discrete minimax fit of an odd polynomial on a Chebyshev-refined grid.

    Minimises the worst plateau shortfall t = max(1 - q) on [delta, 1]
    subject to |q| <= 1 on [0, 1]; returns coefficients when t fits under
    eta with margin, else None.
    """
    xs = np.unique(np.concatenate([
        np.linspace(0.0, 1.0, 2501),
        np.linspace(delta, 1.0, 1500),
        _edge_grid(degree),
        [delta],
    ]))
    vander = npcheb.chebvander(xs, degree)[:, 1::2]
    n_var = vander.shape[1]
    plateau = xs >= delta
    vp = vander[plateau]

    rows = []
    rhs = []
    # 1 - q(x) <= t on the plateau
    rows.append(np.hstack([-vp, -np.ones((vp.shape[0], 1))]))
    rhs.append(np.full(vp.shape[0], -1.0))
    # |q(x)| <= 1 - margin everywhere on [0, 1]
    box = 1.0 - 1e-9
    rows.append(np.hstack([vander, np.zeros((vander.shape[0], 1))]))
    rhs.append(np.full(vander.shape[0], box))
    rows.append(np.hstack([-vander, np.zeros((vander.shape[0], 1))]))
    rhs.append(np.full(vander.shape[0], box))

    cost = np.zeros(n_var + 1)
    cost[-1] = 1.0
    bounds = [(None, None)] * n_var + [(0.0, None)]
    res = linprog(cost, A_ub=np.vstack(rows), b_ub=np.concatenate(rhs),
                  bounds=bounds, method="highs")
    if not res.success or res.fun > eta - _FIT_MARGIN:
        return None
    full = np.zeros(degree + 1)
    full[1::2] = res.x[:n_var]
    return full


def _lp_path(search, limit):
    """Bisect the smallest odd degree whose minimax fit certifies."""
    spec = search.spec
    hi_limit = min(limit, _LP_MAX_DEGREE)
    if search.best_degree is not None:
        hi_limit = min(hi_limit, search.best_degree - 2)
    if hi_limit < 3:
        return

    def feasible(d):
        coeffs = _lp_odd_fit(spec.delta, spec.eta, d)
        return coeffs is not None and search.try_odd(coeffs)

    hi = hi_limit if hi_limit % 2 == 1 else hi_limit - 1
    if not feasible(hi):
        return
    lo = 1  # degree 1 is handled separately and is known infeasible here
    while hi - lo > 2:
        mid = lo + 2 * ((hi - lo) // 4)
        if mid % 2 == 0:
            mid += 1
        if feasible(mid):
            hi = mid
        else:
            lo = mid


@lru_cache(maxsize=None)
def _build_cached(delta, eta, max_degree):
    spec = StepSpec(delta, eta)
    search = _Search(spec)
    # Degree 1: the ramp (1 + x)/2 is optimal among affine candidates and
    # certifies exactly when eta >= 1 - delta.
    search.try_poly(ChebPoly.from_coeffs([0.5, 0.5]))
    if search.best is None or search.best.degree > 1:
        _erf_path(search, max_degree)
    if search.best is None:
        # The kernel path found nothing under the cap.  That happens when
        # the cap is tight relative to 1/delta, where a direct minimax fit
        # on the plateau grids still has a shot at a certificate.
        _lp_path(search, max_degree)
    if search.best is None:
        report = search.closest_fail[1] if search.closest_fail else None
        raise CapacityError(
            f"no certified step polynomial of degree <= {max_degree} "
            f"for delta={delta!r}, eta={eta!r}", report=report)
    return search.best


def build_step_approx(spec, max_degree=4096):
    """Return a certified step polynomial of the smallest degree found.

    Args:
        spec: StepSpec with the window half-width delta and budget eta.
        max_degree: degree budget; exceeded -> CapacityError carrying the
            least-violating BoundReport seen.
    """
    if max_degree < 1:
        raise ValueError("max_degree must be at least 1")
    return _build_cached(spec.delta, spec.eta, int(max_degree))


def degree_constant(poly, spec):
    """Empirical constant C in degree <= C * (1/delta) * ln(4/eta)."""
    return poly.degree * spec.delta / math.log(4.0 / spec.eta)


def min_eta_for_degree(delta, degree, tol=1e-4):
    """Smallest eta (to bisection tolerance) feasible at the given degree.

    Feasibility is monotone in eta: any polynomial certified for eta also
    certifies every larger eta, so plain bisection applies.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie strictly inside (0, 1)")

    def feasible(eta):
        try:
            build_step_approx(StepSpec(delta, eta), max_degree=degree)
        except CapacityError:
            return False
        return True

    hi = 1.0 - 1e-9
    if not feasible(hi):
        raise CapacityError(f"degree {degree} infeasible even as eta -> 1 "
                            f"at delta={delta!r}")
    lo = 1e-9
    if feasible(lo):
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# Serialization.


def to_text(poly):
    """Plain-text form: a degree line, a parity line, then one c_k per line."""
    lines = [f"degree {poly.degree}", f"parity {poly.parity}"]
    for k, c in enumerate(poly.coeffs):
        lines.append(f"c_{k} {c:.17g}")
    return "\n".join(lines) + "\n"


def from_text(text):
    """Inverse of to_text; validates the header and coefficient indices."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3:
        raise ValueError("truncated polynomial text")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "degree":
        raise ValueError("first line must be 'degree <d>'")
    degree = int(head[1])
    par = lines[1].split()
    if len(par) != 2 or par[0] != "parity":
        raise ValueError("second line must be 'parity <even|odd|none>'")
    parity = par[1]
    coeffs = []
    for k, ln in enumerate(lines[2:]):
        fields = ln.split()
        if len(fields) != 2 or fields[0] != f"c_{k}":
            raise ValueError(f"expected 'c_{k} <value>', got {ln!r}")
        coeffs.append(float(fields[1]))
    if len(coeffs) != degree + 1:
        raise ValueError("coefficient count does not match degree")
    return ChebPoly(coeffs=tuple(coeffs), degree=degree, parity=parity)


def write_curve_csv(poly, path, rows=1000):
    """Write rows of 'x,P(x)' sampled uniformly over [-1, 1]."""
    xs = np.linspace(-1.0, 1.0, rows)
    vals = poly.eval(xs)
    with open(path, "w", newline="") as fh:
        fh.write("x,P(x)\n")
        for x, v in zip(xs, vals):
            fh.write(f"{x:.17g},{v:.17g}\n")
