"""Eigenvalue estimation by thresholded step-polynomial sampling.

The alpha parameter trades circuit depth against sample count: alpha = 0
uses a sharp step polynomial (deep, few shots per decision), alpha = 1
degenerates to the affine ramp (depth 1, many shots).  A binary search
over candidate eigenvalues drives one thresholded decision per bisection
step.  Hadamard-test and iterative-phase-estimation baselines sit at the
two classical endpoints for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blockenc import HermitianOp, apply_poly, right_probability, shift_and_scale
from .chebpoly import StepSpec, build_step_approx
from .sampler import Outcome, ResourceLedger, bernoulli_trials, record_shots

EIGENSTATE_TOL = 1e-10

# Decision threshold rules for decide_ee.  "midpoint" centres the cut in
# the achievable window ((eta/2)^2, (1 - eta/2)^2); "skewed" is the cut
# (1 - eta + 2 eta^2)/2, which leaves that window once eta > (sqrt(7)-1)/3
# and is retained only for side-by-side comparison.
THRESHOLD_MIDPOINT = "midpoint"
THRESHOLD_SKEWED = "skewed"


@dataclass(frozen=True)
class AlphaSchedule:
    """Derived parameters for one choice of (alpha, eps, gamma)."""

    alpha: float
    eps: float
    gamma: float
    delta: float
    eta: float
    n_samples: int
    threshold: float
    degree: int
    poly: "ChebPoly"

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.degree != self.poly.degree:
            raise ValueError("degree does not match the attached polynomial")


def threshold_for(eta, rule=THRESHOLD_MIDPOINT):
    """Decision cut on the observed RIGHT frequency for a given eta."""
    if rule == THRESHOLD_MIDPOINT:
        return 0.5 * (1.0 - eta + 0.5 * eta * eta)
    if rule == THRESHOLD_SKEWED:
        return 0.5 * (1.0 - eta + 2.0 * eta * eta)
    raise ValueError(f"unknown threshold rule {rule!r}")


def alpha_schedule(alpha, eps, gamma, max_degree=4096,
                   threshold_rule=THRESHOLD_MIDPOINT):
    """Build the schedule: window, budget, polynomial, samples, threshold.

    delta = eps/(4 gamma), eta = 1 - (1/2) delta^alpha, and the per-decision
    sample count is ceil(20 * (4 gamma/eps)^(2 alpha) * ceil(log2(4 gamma/eps))).
    Requires eps < 4 gamma so that delta < 1.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if not 0.0 < eps < 4.0 * gamma:
        raise ValueError("eps must lie in (0, 4*gamma)")
    delta = eps / (4.0 * gamma)
    eta = 1.0 - 0.5 * delta ** alpha
    ratio = 4.0 * gamma / eps
    n_samples = math.ceil(20.0 * ratio ** (2.0 * alpha) * math.ceil(math.log2(ratio)))
    poly = build_step_approx(StepSpec(delta, eta), max_degree)
    return AlphaSchedule(alpha=alpha, eps=eps, gamma=gamma, delta=delta,
                         eta=eta, n_samples=n_samples,
                         threshold=threshold_for(eta, threshold_rule),
                         degree=poly.degree, poly=poly)


@dataclass(frozen=True)
class EEInstance:
    """Hermitian operator with a known eigenstate and its hidden eigenvalue."""

    H: HermitianOp
    gamma: float
    psi: np.ndarray
    true_mu: float

    def __post_init__(self):
        vec = np.asarray(self.psi, dtype=complex).reshape(-1)
        if vec.shape[0] != self.H.dim:
            raise ValueError("state dimension does not match operator")
        if abs(np.linalg.norm(vec) - 1.0) > EIGENSTATE_TOL:
            raise ValueError("psi is not normalised within tolerance")
        if self.gamma <= 0 or self.H.spectral_norm() > self.gamma * (1.0 + 1e-12):
            raise ValueError("gamma must bound the spectral norm")
        resid = self.H.matrix @ vec - self.true_mu * vec
        if np.linalg.norm(resid) > EIGENSTATE_TOL:
            raise ValueError("psi is not an eigenstate of H for true_mu")
        vec.setflags(write=False)
        object.__setattr__(self, "psi", vec)


def diag_instance(values, gamma=1.0):
    """Diagonal instance with psi fixed to the first basis vector."""
    vals = [float(v) for v in values]
    h = HermitianOp.from_matrix(np.diag(vals))
    psi = np.zeros(len(vals), dtype=complex)
    psi[0] = 1.0
    return EEInstance(H=h, gamma=float(gamma), psi=psi, true_mu=vals[0])


@dataclass(frozen=True)
class SearchState:
    """Bisection interval with its midpoint."""

    L: float
    R: float
    mu0: float = None

    def __post_init__(self):
        if not self.L < self.R:
            raise ValueError("interval must have L < R")
        object.__setattr__(self, "mu0", 0.5 * (self.L + self.R))


def _right_prob(inst, mu0, sched, use_statevector):
    """RIGHT-outcome probability for one decision at threshold mu0.

    The eigenstate fast path evaluates P at the mapped eigenvalue; the
    statevector path runs the full matrix transform and is kept for
    cross-validation.
    """
    if use_statevector:
        hp = shift_and_scale(inst.H, mu0, inst.gamma)
        top = apply_poly(hp, sched.poly)
        return right_probability(top, inst.psi)
    x = (inst.true_mu - mu0) / (inst.gamma + abs(mu0))
    val = sched.poly.eval(min(max(x, -1.0), 1.0))
    return min(max(val * val, 0.0), 1.0)


def decide_ee(inst, mu0, sched, rng, ledger, use_statevector=False):
    """One thresholded LEFT/RIGHT decision at candidate eigenvalue mu0.

    Takes sched.n_samples Bernoulli trials at depth sched.degree, records
    them in the ledger, and returns RIGHT when the observed frequency
    exceeds the schedule threshold.
    """
    if abs(mu0) > inst.gamma:
        raise ValueError("|mu0| must not exceed gamma")
    p = _right_prob(inst, mu0, sched, use_statevector)
    hits = bernoulli_trials(p, sched.n_samples, rng)
    record_shots(ledger, sched.degree, sched.n_samples)
    return Outcome.RIGHT if hits / sched.n_samples > sched.threshold else Outcome.LEFT


def estimate_ee(inst, eps, alpha, rng, *, max_degree=4096,
                threshold_rule=THRESHOLD_MIDPOINT, use_statevector=False,
                decider=None):
    """Binary search for the eigenvalue of inst.psi to precision ~eps.

    Each bisection step consults one thresholded decision on a child
    stream (stream offset step_index * 2**16).  Returns (mu_hat, ledger);
    the ledger satisfies total = iterations * n_samples * degree and
    max_depth = degree exactly.  The decider hook replaces decide_ee for
    oracle-driven tests.
    """
    sched = alpha_schedule(alpha, eps, inst.gamma, max_degree=max_degree,
                           threshold_rule=threshold_rule)
    ledger = ResourceLedger()
    state = SearchState(-inst.gamma, inst.gamma)
    mu_hat = state.mu0
    step = 0
    while state.R - state.L > eps:
        stream = rng.child(step << 16)
        if decider is not None:
            out = decider(inst, state.mu0, sched, stream, ledger)
        else:
            out = decide_ee(inst, state.mu0, sched, stream, ledger,
                            use_statevector=use_statevector)
        mu_hat = state.mu0
        if out is Outcome.RIGHT:
            state = SearchState(mu_hat, state.R)
        else:
            state = SearchState(state.L, mu_hat)
        step += 1
    return mu_hat, ledger


# ---------------------------------------------------------------------------
# Baselines.


def hadamard_test_baseline(p, eps, rng):
    """Depth-1 estimate of p from ceil(1/eps^2) Bernoulli shots."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("probability must lie in [0, 1]")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    n = math.ceil(1.0 / (eps * eps))
    hits = bernoulli_trials(p, n, rng)
    ledger = record_shots(ResourceLedger(), 1, n)
    return hits / n, ledger


@dataclass(frozen=True)
class IpeStep:
    """One iterative-phase-estimation round: oracle power and phase offset."""

    M: int
    theta: float

    def __post_init__(self):
        if self.M < 1 or self.M & (self.M - 1):
            raise ValueError("M must be a power of two")


def ipe_step_probability(phi, M, theta):
    """Pr[E = 1] for one round: (1 - cos(M phi + theta)) / 2."""
    return 0.5 * (1.0 - math.cos(M * phi + theta))


def ipe_baseline(phi, m, shots_per_bit, rng):
    """Estimate phi = 2 pi (0.b1 b2 ... bm) one bit at a time, LSB first.

    Round j applies the oracle M = 2**(m-j) times with the offset that
    cancels the already-measured low bits, so an exactly m-bit phase gives
    round probabilities of exactly 0 or 1 and deterministic recovery.
    Bits are taken by strict majority over shots_per_bit draws.  Ledger:
    depth 2**(m-1), total shots_per_bit * (2**m - 1).
    """
    if m < 1:
        raise ValueError("need at least one bit")
    if shots_per_bit < 1:
        raise ValueError("need at least one shot per bit")
    if not 0.0 <= phi < 2.0 * math.pi:
        raise ValueError("phi must lie in [0, 2*pi)")
    phi_turns = phi / (2.0 * math.pi)
    bits = [0] * (m + 1)  # bits[j] is b_j once measured
    ledger = ResourceLedger()
    for j in range(1, m + 1):
        power = 2 ** (m - j)
        comp_turns = -sum(bits[k] * 2.0 ** (m - j - k) for k in range(m - j + 2, m + 1))
        step = IpeStep(M=power, theta=2.0 * math.pi * comp_turns)
        frac = (power * phi_turns + comp_turns) % 1.0
        p1 = 0.5 * (1.0 - math.cos(2.0 * math.pi * frac))
        p1 = min(max(p1, 0.0), 1.0)
        ones = bernoulli_trials(p1, shots_per_bit, rng.child((j - 1) << 16))
        bits[m - j + 1] = 1 if 2 * ones > shots_per_bit else 0
        record_shots(ledger, step.M, shots_per_bit)
    phi_hat = 2.0 * math.pi * sum(bits[j] * 2.0 ** (-j) for j in range(1, m + 1))
    return phi_hat, ledger
