"""Reference computations written independently of the package.

Each helper recomputes a quantity from first principles (explicit loops,
scipy root finding, covariance algebra) so the tests compare two separate
derivations rather than a function with itself.
"""

import itertools
import math

import numpy as np
from scipy.optimize import brentq

# eight-symbol skewed weights; they sum to 0.8 and are used after normalizing
SKEWED_WEIGHTS = [0.25, 0.25, 0.15, 0.1, 0.04, 0.005, 0.003, 0.002]
SKEWED = [w / sum(SKEWED_WEIGHTS) for w in SKEWED_WEIGHTS]


def h2(d):
    if d in (0.0, 1.0):
        return 0.0
    return -d * math.log2(d) - (1 - d) * math.log2(1 - d)


def entropy_sum(p):
    return -sum(x * math.log2(x) for x in p if x > 0)


def cond_entropy_loops(table):
    """H(A | B) for a 2-D table p[a, b] by explicit summation."""
    table = np.asarray(table, dtype=float)
    h = 0.0
    for b in range(table.shape[1]):
        pb = table[:, b].sum()
        for a in range(table.shape[0]):
            v = table[a, b]
            if v > 0:
                h -= v * math.log2(v / pb)
    return h


def mutual_info_loops(table):
    table = np.asarray(table, dtype=float)
    pa, pb = table.sum(axis=1), table.sum(axis=0)
    s = 0.0
    for a in range(table.shape[0]):
        for b in range(table.shape[1]):
            v = table[a, b]
            if v > 0:
                s += v * math.log2(v / (pa[a] * pb[b]))
    return s


def water_level(p, D):
    """Root of S(lam) * lam + sum_{p_k <= lam} p_k = D by bracketing."""

    def f(lam):
        S = sum(1 for x in p if x > lam) - 1
        return S * lam + sum(x for x in p if x <= lam) - D

    return brentq(f, 1e-15, max(p) - 1e-15, xtol=1e-16, rtol=1e-15)


def breakpoint_scan(p, D):
    """Water level by checking every candidate support set (sorted prefixes)."""
    order = sorted(range(len(p)), key=lambda i: -p[i])
    for k in range(1, len(p) + 1):
        kept = order[:k]
        out = order[k:]
        lam = (D - sum(p[i] for i in out)) / (k - 1) if k > 1 else None
        if lam is None:
            continue
        if all(p[i] > lam for i in kept) and all(p[i] <= lam for i in out):
            return lam, sorted(kept)
    raise ValueError("no consistent support")


def waterfill_joint(p, D):
    """Joint p(x, x_hat) of the reverse waterfilling test channel."""
    lam = water_level(p, D)
    m = len(p)
    supp = [i for i in range(m) if p[i] > lam]
    mass = sum(p[i] - lam for i in supp)
    J = np.zeros((m, m))
    for xh in supp:
        q = (p[xh] - lam) / mass
        for x in range(m):
            J[x, xh] = q * ((1 - D) if x == xh else (lam if x in supp else p[x]))
    return lam, supp, J


def gaussian_cond_var(cov, target, given):
    """Var(target | given) for a zero-mean Gaussian vector with covariance ``cov``."""
    cov = np.asarray(cov, dtype=float)
    t = [target]
    g = list(given)
    S_tt = cov[np.ix_(t, t)]
    S_tg = cov[np.ix_(t, g)]
    S_gg = cov[np.ix_(g, g)]
    return float((S_tt - S_tg @ np.linalg.solve(S_gg, S_tg.T))[0, 0])


def gaussian_system(var_x, var_y, rho_xy, rho_xz, noise_var):
    """Covariance of (X, Y, Z, U = X + N) with Y - X - Z Markov, var(Z) = 1."""
    sx, sy = math.sqrt(var_x), math.sqrt(var_y)
    rho_xz = 0.0 if rho_xz is None else rho_xz
    C = np.zeros((4, 4))
    C[0, 0] = var_x
    C[1, 1] = var_y
    C[2, 2] = 1.0
    C[0, 1] = C[1, 0] = rho_xy * sx * sy
    C[0, 2] = C[2, 0] = rho_xz * sx
    C[1, 2] = C[2, 1] = rho_xy * rho_xz * sy
    C[0, 3] = C[3, 0] = var_x
    C[1, 3] = C[3, 1] = rho_xy * sx * sy
    C[2, 3] = C[3, 2] = rho_xz * sx
    C[3, 3] = var_x + noise_var
    return C


def plugin_equivocation_loops(px, pz_x, h_of_x, J_of, n, nz):
    """(1/n) H(h(X^n) | J, Z^n) by explicit enumeration.

    ``J_of(x, z)`` returns the bin index for source block x (tuple) and side
    block z (tuple).
    """
    total = 0.0
    for z in itertools.product(range(nz), repeat=n):
        joint = {}
        pj = {}
        for x in itertools.product(range(len(px)), repeat=n):
            w = 1.0
            for xi, zi in zip(x, z):
                w *= px[xi] * pz_x[xi][zi]
            if w == 0:
                continue
            j = J_of(x, z)
            key = (tuple(h_of_x[xi] for xi in x), j)
            joint[key] = joint.get(key, 0.0) + w
            pj[j] = pj.get(j, 0.0) + w
        for v in joint.values():
            total -= v * math.log2(v)
        for v in pj.values():
            total += v * math.log2(v)
    return total / n
