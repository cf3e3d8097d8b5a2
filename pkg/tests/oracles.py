"""Independent brute-force oracles for the acceptance suite.

Everything here is deliberately decoupled from the package under test: the
Markov chains are written down state by state from the gate contracts, the
transient solver is plain uniformization, the stationary solver is a dense
linear solve, and the renewal oracle integrates survival functions
numerically.  None of it touches the simulator or the compiler.
"""

import math

import numpy as np


def transient_distribution(Q, p0, T):
    """Uniformization: distribution at time T of the CTMC with generator Q.

    Poisson weights are computed in log space so long horizons do not
    underflow; the series is truncated once the accumulated weight covers
    1 - 1e-12 of the mass.
    """
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    lam = max(-Q[i, i] for i in range(n)) or 1.0
    lam *= 1.05
    P = np.eye(n) + Q / lam
    x = lam * T
    acc = np.zeros(n)
    v = np.asarray(p0, dtype=float)
    covered = 0.0
    k = 0
    while covered < 1.0 - 1e-12:
        logw = -x + k * math.log(x) - math.lgamma(k + 1) if x > 0 else (0.0 if k == 0 else -math.inf)
        w = math.exp(logw)
        acc += w * v
        covered += w
        v = v @ P
        k += 1
        if k > x + 40 * math.sqrt(x + 1) + 200:
            break
    return acc / covered


def stationary_distribution(Q):
    """Solve pi Q = 0 with sum(pi) = 1 (dense least squares)."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    A = np.vstack([Q.T, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pi


def _gen(n, rates):
    Q = np.zeros((n, n))
    for i, j, r in rates:
        Q[i, j] += r
        Q[i, i] -= r
    return Q


def single_be_unavailability(lam, mu):
    """Alternating up/down element with immediate repair."""
    return lam / (lam + mu)


def and2_unreliability(lam_a, mu_a, lam_b, mu_b, T):
    """First passage to both-down for two independent repairable elements.

    States: 0 both up, 1 only A down, 2 only B down, 3 both down
    (absorbing: the AND has failed).
    """
    Q = _gen(4, [
        (0, 1, lam_a), (0, 2, lam_b),
        (1, 0, mu_a), (1, 3, lam_b),
        (2, 0, mu_b), (2, 3, lam_a),
    ])
    p = transient_distribution(Q, [1, 0, 0, 0], T)
    return p[3]


def or2_unavailability(lam_a, mu_a, lam_b, mu_b):
    """Independence: the OR is down unless both elements are up."""
    ua = single_be_unavailability(lam_a, mu_a)
    ub = single_be_unavailability(lam_b, mu_b)
    return 1.0 - (1.0 - ua) * (1.0 - ub)


def shared_rbox_and2_unavailability(lam_a, lam_b, mu):
    """Two elements, one repair unit, lower index first.

    States: 0 both up; 1 A in repair; 2 B in repair; 3 A in repair with B
    waiting; 4 B in repair with A waiting.  The AND top holds in 3 and 4.
    A failed element enters repair immediately when the unit is free, so
    the priority policy never actually arbitrates with two elements.
    """
    Q = _gen(5, [
        (0, 1, lam_a), (0, 2, lam_b),
        (1, 0, mu), (1, 3, lam_b),
        (2, 0, mu), (2, 4, lam_a),
        (3, 2, mu),
        (4, 1, mu),
    ])
    pi = stationary_distribution(Q)
    return pi[3] + pi[4]


def pand2_unreliability(lam_a, mu_a, lam_b, mu_b, T):
    """First passage for a two-input priority AND over independent elements.

    The gate fails when B fails while A is already down, provided B's
    failure did not precede A's across a time step.  States:

    0. both up
    1. A down, B up (armed: a B failure now fails the gate)
    2. A up, B down (blocked: B failed first and time passed)
    3. both down in the wrong order (still blocked)
    4. failed (absorbing)

    From 3, repairing B first re-arms via state 1; repairing A first
    returns to the blocked single-failure state 2.
    """
    Q = _gen(5, [
        (0, 1, lam_a), (0, 2, lam_b),
        (1, 0, mu_a), (1, 4, lam_b),
        (2, 0, mu_b), (2, 3, lam_a),
        (3, 2, mu_a), (3, 1, mu_b),
    ])
    p = transient_distribution(Q, [1, 0, 0, 0, 0], T)
    return p[4]


# --- renewal oracle for non-exponential laws --------------------------------


def _survival_uniform(a, b):
    def s(t):
        if t <= a:
            return 1.0
        if t >= b:
            return 0.0
        return (b - t) / (b - a)
    return s


def _survival_erlang(k, rate):
    def s(t):
        if t <= 0:
            return 1.0
        acc = 0.0
        term = 1.0
        for i in range(k):
            if i > 0:
                term *= rate * t / i
            acc += term
        return math.exp(-rate * t) * acc
    return s


def mean_by_quadrature(survival, upper, n=400_000):
    """E[X] = integral of the survival function, composite trapezoid."""
    ts = np.linspace(0.0, upper, n)
    vals = np.array([survival(t) for t in ts])
    return float(np.trapezoid(vals, ts))


def renewal_unavailability_uniform_erlang(a, b, k, rate):
    """Limiting down-time fraction of an alternating renewal process."""
    e_up = mean_by_quadrature(_survival_uniform(a, b), b + 1.0)
    e_down = mean_by_quadrature(_survival_erlang(k, rate), 80.0 / rate)
    return e_down / (e_up + e_down)
