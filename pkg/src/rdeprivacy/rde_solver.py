"""Numerical solver for the rate-distortion-equivocation region without side information.

Given a joint law of private attributes X_h and public attributes X_r, a
distortion matrix rho(x_r, x_hat) and a target D, find the sanitizing channel
that either

* maximizes the equivocation H(X_h | X_hat), i.e. minimizes the leakage
  I(X_h; X_hat) (``solve_max_equivocation``), or
* minimizes the rate I(X_h X_r; X_hat) (``solve_min_rate``),

subject to E[rho] <= D. Both objectives are convex in the channel, so the
problem is handled through its Lagrangian ``f(W) + mu * E[rho]``:

1. for fixed ``mu`` the Lagrangian is minimized over the product of row
   simplices by entropic mirror descent, polished by Newton steps on the
   set of entries that carry mass; when progress stalls because mass sits
   at the entry floor, a Frank-Wolfe step or an explicit opening of an
   empty output moves it;
2. ``mu`` is searched (doubling, then secant steps in log ``mu``) until
   the distortion brackets the target;
3. the two bracketing channels are mixed so the distortion lands on D.

The duality gap of the Lagrangian at the returned channel (Frank-Wolfe on
live outputs, a separate bound for empty ones) bounds its suboptimality and
is reported as ``final_gap`` (bits).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import CapExceededError, ConvergenceError, DataError, DomainError, ValidationError
from .infotheory import (
    JointPmf,
    Pmf,
    SanitizationChannel,
    entropy,
    joint_from_matrix,
    mutual_information,
)

LN2 = math.log(2.0)
MAX_EQUIVOCATION = "max_equivocation"
MIN_RATE = "min_rate"

MAX_ITER = 100_000
INIT_MIX = 0.5
GAP_TOL = 1e-6  # bits, contract on final_gap
_INNER_TOL = 1e-10  # nats
_LOG_FLOOR = 1e-300
_WARM_MIX = 1e-4
_MAX_STEP = 1e12
_ENTRY_FLOOR = 1e-12
_DEAD_ENTRY = 1e-9
_CERT_EVERY = 8
_STALL_TOL = 1e-8  # nats
_STALL_CHECKS = 4
_MAX_KICKS = 20
_ARMIJO = 0.25

BRUTE_MAX_ALPHABET = 4
BRUTE_MAX_RESOLUTION = 21
BRUTE_MAX_CHANNELS = 1 << 22


@dataclass(frozen=True, eq=False)
class RdeProblem:
    """Joint law, distortion matrix over (public, output) symbols and a target D.

    With ``markov_restricted`` the channel sees only the public symbol
    (X_h - X_r - X_hat); otherwise it sees the (private, public) pair.
    """

    joint: JointPmf
    target_D: float
    distortion: np.ndarray | None = None
    markov_restricted: bool = True
    output_labels: tuple | None = None

    def __post_init__(self):
        nr = self.P.shape[1]
        if self.distortion is None:
            rho = 1.0 - np.eye(nr)
            out = self.output_labels or self.joint.product_labels(self.joint.public)
        else:
            rho = np.array(self.distortion, dtype=float)
            if rho.ndim != 2 or rho.shape[0] != nr:
                raise ValidationError(
                    f"distortion matrix must have {nr} rows (public symbols), got shape {rho.shape}"
                )
            out = self.output_labels or tuple(str(i) for i in range(rho.shape[1]))
        if not np.all(np.isfinite(rho)) or np.any(rho < 0):
            raise ValidationError("distortion matrix must be finite and non-negative")
        if len(out) != rho.shape[1]:
            raise ValidationError("output_labels do not match distortion columns")
        rho.setflags(write=False)
        object.__setattr__(self, "distortion", rho)
        object.__setattr__(self, "output_labels", tuple(str(s) for s in out))
        if not np.isfinite(self.target_D):
            raise DomainError(f"target distortion {self.target_D!r} is not finite", self.target_D)

    @cached_property
    def P(self) -> np.ndarray:
        return self.joint.private_public_matrix()

    @cached_property
    def _inputs(self):
        """(A[h, s], ps, r_of_s, labels) for the channel's input alphabet."""
        P = self.P
        nh, nr = P.shape
        hl = self.joint.product_labels(self.joint.private)
        rl = self.joint.product_labels(self.joint.public)
        if self.markov_restricted:
            return P, P.sum(axis=0), np.arange(nr), rl
        pairs = [(h, r) for h in range(nh) for r in range(nr)]
        A = np.zeros((nh, len(pairs)))
        for s, (h, r) in enumerate(pairs):
            A[h, s] = P[h, r]
        labels = tuple(f"{hl[h]}/{rl[r]}" for h, r in pairs)
        return A, A.sum(axis=0), np.array([r for _, r in pairs]), labels

    @property
    def input_labels(self):
        return self._inputs[3]

    @cached_property
    def rho_s(self) -> np.ndarray:
        return self.distortion[self._inputs[2]]

    @property
    def D_min(self) -> float:
        ps = self._inputs[1]
        return float(ps @ self.rho_s.min(axis=1))

    @property
    def D_max(self) -> float:
        ps = self._inputs[1]
        return float((ps @ self.rho_s).min())

    def expected_distortion(self, W) -> float:
        return float(self._inputs[1] @ (np.asarray(W) * self.rho_s).sum(axis=1))

    @classmethod
    def from_dict(cls, d):
        try:
            joint = JointPmf.from_dict(d["joint"]) if isinstance(d["joint"], dict) else JointPmf(d["joint"])
            return cls(
                joint=joint,
                target_D=float(d["target_D"]),
                distortion=d.get("distortion"),
                markov_restricted=bool(d.get("markov_restricted", True)),
                output_labels=d.get("output_labels"),
            )
        except KeyError as exc:
            raise DataError(f"problem JSON is missing key {exc}") from None

    @classmethod
    def from_json(cls, path):
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read problem {path}: {exc}") from None

    def with_target(self, D):
        return RdeProblem(self.joint, D, self.distortion, self.markov_restricted, self.output_labels)


@dataclass(frozen=True, eq=False)
class RdeSolution:
    channel: SanitizationChannel
    rate: float
    equivocation: float
    leakage: float
    achieved_D: float
    target_D: float
    objective_tag: str
    iterations: int
    final_gap: float
    multiplier: float

    def to_dict(self):
        return {
            "objective": self.objective_tag,
            "target_D": self.target_D,
            "achieved_D": self.achieved_D,
            "rate": self.rate,
            "equivocation": self.equivocation,
            "leakage": self.leakage,
            "iterations": self.iterations,
            "final_gap": self.final_gap,
            "multiplier": self.multiplier,
        }


# ---------------------------------------------------------------------------
# inner Lagrangian minimization


def _objective_and_grad(W, A, ps):
    """f = I(H; X_hat) in nats and its gradient per unit input mass."""
    J = A @ W
    ph = A.sum(axis=1)
    q = J.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.log(np.maximum(J, _LOG_FLOOR)) - np.log(np.maximum(ph[:, None] * q[None, :], _LOG_FLOOR))
    f = float((J * L).sum())
    G = (A.T @ L) / ps[:, None]
    return f, G


def _fw_gap(W, Gt, ps, mask):
    """Plain Frank-Wolfe gap from the gradient at an interior point."""
    Gm = np.where(mask, Gt, np.inf)
    return float(ps @ ((W * Gt).sum(axis=1) - Gm.min(axis=1)))


def _column_bound(post, pri, b, need=0.0, tol=1e-13, max_steps=200):
    """Lower bound on min_{d in simplex} KL(post d || pri) + <b, d>.

    This is the best change of the linearized Lagrangian obtainable by
    routing a unit of input mass ``d`` into an empty output column (``b``
    holds that column's distortion price minus each row's best live value,
    and is huge for rows barred from the column). Any virtual posterior pi
    gives the bound min_s (c_pi(s) + b_s) with c_pi(s) = sum_h p(h|s)
    log(pi_h / p_h). Posteriors come from ``d`` following a log-barrier
    Newton path: the barrier keeps the step defined where the objective
    is flat (more inputs than private symbols), and on the path the bound
    is within ``len(d) * tau`` of the primal value.

    With ``need > 0`` the search stops as soon as the answer is settled for a
    caller that only asks whether the gap is below ``need``: either the bound
    is already negligible against it or the primal value shows it cannot be.
    With ``need < 0`` it returns ``(value, d)`` for the current primal point
    instead, stopping once the value drops to ``need``.
    """
    keep = b < 1e299
    d_full = np.zeros(len(b))
    if not keep.any():
        return (np.inf, d_full) if need < 0.0 else np.inf
    P, bk = post[:, keep], b[keep]
    k = int(keep.sum())
    logpri = np.log(np.maximum(pri, _LOG_FLOOR))

    def slopes(d):
        j = P @ d
        return P.T @ (np.log(np.maximum(j / j.sum(), _LOG_FLOOR)) - logpri) + bk, j

    def barrier(d, g, tau):
        return float(d @ g) - tau * float(np.log(d).sum())

    d = np.full(k, 1.0 / k)
    g, j = slopes(d)
    val = float(d @ g)
    best = float(g.min())
    tau = max(1e-3, 10.0 * abs(val))
    ones = np.ones((k, 1))
    for _ in range(max_steps):
        if best >= 0.0 or val - best <= tol:
            break
        if need > 0.0 and (best >= -1e-3 * need or val <= -need):
            break
        if need < 0.0 and val <= need:
            break
        H = P.T @ (P / np.maximum(j, _LOG_FLOOR)[:, None]) + np.diag(tau / d**2)
        grad = g - tau / d
        K = np.block([[H, ones], [ones.T, np.zeros((1, 1))]])
        step = np.linalg.lstsq(K, np.concatenate([-grad, [0.0]]), rcond=1e-15)[0][:k]
        slope = float(grad @ step)
        if not slope < -1e-300 or -slope <= 1e-3 * tau:
            # centred for this tau (Newton decrement small): tighten the barrier
            if tau <= 1e-18:
                break
            tau *= 0.1
            continue
        neg = step < 0
        alpha = min(1.0, 0.99 * float(np.min(-d[neg] / step[neg]))) if neg.any() else 1.0
        f0 = barrier(d, g, tau)
        while alpha > 1e-14:
            dn = np.maximum(d + alpha * step, 1e-300)
            dn /= dn.sum()
            gn, jn = slopes(dn)
            if barrier(dn, gn, tau) <= f0 + _ARMIJO * alpha * slope:
                break
            alpha *= 0.5
        else:
            if tau <= 1e-18:
                break
            tau *= 0.1
            continue
        d, g, j = dn, gn, jn
        val = float(d @ g)
        best = max(best, float(g.min()))
    if need < 0.0:
        d_full[keep] = d
        return val, d_full
    return min(best, val)


def _certificate(W, A, ps, rho, mu, mask, need=0.0):
    """Duality gap of the Lagrangian and the channel it certifies.

    Output columns holding only floor-level mass are emptied first. The
    directional derivative of the leakage into an empty column is not
    linear, so those columns are bounded by :func:`_column_bound` instead of
    the gradient. ``need`` is passed on to the column bound. Returns
    ``(gap_nats, W_clean)``.
    """
    dead = (W <= _DEAD_ENTRY).all(axis=0)
    if not dead.any() or dead.all():
        _, G = _objective_and_grad(W, A, ps)
        return _fw_gap(W, G + mu * rho, ps, mask), W
    Wc = np.where(dead[None, :], 0.0, W)
    Wc = Wc / Wc.sum(axis=1, keepdims=True)
    _, G = _objective_and_grad(Wc, A, ps)
    Gt = G + mu * rho
    m = np.where(mask & ~dead[None, :], Gt, np.inf).min(axis=1)
    lin = np.where(dead[None, :], 0.0, Wc * Gt).sum(axis=1)
    gap = float(ps @ (lin - m))
    post = A / ps[None, :]  # p(h | s)
    pri = A.sum(axis=1)
    worst = 0.0
    for x in np.flatnonzero(dead):
        # rows barred from this column get a prohibitive price
        b = np.where(mask[:, x], mu * rho[:, x] - m, 1e300)
        worst = min(worst, _column_bound(post, pri, b, need))
    return gap - worst, Wc


def _fw_step(W, A, ps, rho, mu, mask, L, tol):
    """Frank-Wolfe step toward each row's cheapest live output.

    Revives a floor-level entry of a live column that mirror descent and the
    face-restricted Newton phase both leave behind. Returns the new channel
    or ``None`` when the live-column gap is already within ``tol``.
    """
    live = mask & ~(W <= _DEAD_ENTRY).all(axis=0)[None, :]
    _, G = _objective_and_grad(W, A, ps)
    Gt = G + mu * rho
    S = np.zeros_like(W)
    S[np.arange(len(ps)), np.where(live, Gt, np.inf).argmin(axis=1)] = 1.0
    step = S - W
    slope = float(ps @ (Gt * step).sum(axis=1))
    if not slope < -tol:
        return None
    t = 1.0
    while t > 1e-12:
        Wn = W + t * step
        Ln, _ = _lagrangian(Wn, A, ps, rho, mu)
        if Ln <= L + _ARMIJO * t * slope:
            return Wn
        t *= 0.5
    return None


def _open_column(W, A, ps, rho, mu, mask, L):
    """Move mass into the empty output column that the certificate prices lowest.

    Mirror descent grows an empty column only from floor-level mass, which
    is hopeless when the gain is a few 1e-6 nats. Here the column's best input
    mix ``d`` comes from :func:`_column_bound`; mass ``t * d`` is taken from
    each row's cheapest live output and a backtracking search picks ``t``.
    The column's own leakage term is linear in ``t``, so the search is well
    behaved. Returns the new channel or ``None`` when nothing improves.
    """
    dead = (W <= _DEAD_ENTRY).all(axis=0)
    if not dead.any() or dead.all():
        return None
    Wc = np.where(dead[None, :], 0.0, W)
    Wc = Wc / Wc.sum(axis=1, keepdims=True)
    _, G = _objective_and_grad(Wc, A, ps)
    Gt = np.where(mask & ~dead[None, :], G + mu * rho, np.inf)
    src = Gt.argmin(axis=1)
    m = Gt[np.arange(len(ps)), src]
    post = A / ps[None, :]
    pri = A.sum(axis=1)
    best = None
    for x in np.flatnonzero(dead):
        b = np.where(mask[:, x], mu * rho[:, x] - m, 1e300)
        val, d = _column_bound(post, pri, b, need=-1.0)
        if val < 0.0 and (best is None or val < best[0]):
            best = (val, x, d)
    if best is None:
        return None
    val, x, d = best
    rows = np.arange(len(ps))
    frac = d / ps  # row share moved per unit t
    room = Wc[rows, src]
    t = float(np.min(np.where(frac > 0, room / np.where(frac > 0, frac, 1.0), np.inf)))
    while t > 1e-14:
        Wn = Wc.copy()
        Wn[rows, src] -= t * frac
        Wn[:, x] += t * frac
        Wn = np.maximum(Wn, 0.0)
        Wn /= Wn.sum(axis=1, keepdims=True)
        Ln, _ = _lagrangian(Wn, A, ps, rho, mu)
        if Ln <= L + _ARMIJO * t * val:
            return Wn
        t *= 0.5
    return None


def _lagrangian(W, A, ps, rho, mu):
    f, G = _objective_and_grad(W, A, ps)
    return f + mu * float(ps @ (W * rho).sum(axis=1)), G


def _newton_phase(W, A, ps, rho, mu, mask, max_steps=30):
    """Newton steps restricted to the entries of ``W`` that carry mass.

    The leakage Hessian is block diagonal over output columns,
    ``H_x = A^T diag(1 / J[:, x]) A - ps ps^T / q_x``, so the face problem with
    one sum constraint per row is a small KKT system. It is singular along
    column rescalings, hence the least-squares solve. Steps keep every entry
    non-negative and must pass an Armijo test. Returns the improved channel.
    """
    L, G = _lagrangian(W, A, ps, rho, mu)
    for _ in range(max_steps):
        face = mask & (W > _DEAD_ENTRY)
        idx = np.argwhere(face)
        n = len(idx)
        ns = W.shape[0]
        J = A @ W
        q = ps @ W
        inv = np.divide(1.0, J, out=np.zeros_like(J), where=J > 0)
        grad = ps[:, None] * (G + mu * rho)
        H = np.zeros((n, n))
        cols = idx[:, 1]
        for x in np.unique(cols):
            k = np.flatnonzero(cols == x)
            s = idx[k, 0]
            Hx = (A[:, s] * inv[:, x][:, None]).T @ A[:, s] - np.outer(ps[s], ps[s]) / q[x]
            H[np.ix_(k, k)] = Hx
        E = np.zeros((ns, n))
        E[idx[:, 0], np.arange(n)] = 1.0
        K = np.block([[H, E.T], [E, np.zeros((ns, ns))]])
        rhs = np.concatenate([-grad[face], np.zeros(ns)])
        step = np.linalg.lstsq(K, rhs, rcond=1e-13)[0][:n]
        slope = float(grad[face] @ step)
        if not slope < 0.0:
            break
        neg = step < 0
        alpha = 1.0
        if neg.any():
            alpha = min(1.0, 0.999 * float(np.min(-W[face][neg] / step[neg])))
        accepted = False
        while alpha > 1e-12:
            Wn = W.copy()
            Wn[face] += alpha * step
            Wn = np.maximum(Wn, 0.0)
            Wn /= Wn.sum(axis=1, keepdims=True)
            Ln, Gn = _lagrangian(Wn, A, ps, rho, mu)
            if Ln <= L + _ARMIJO * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        done = L - Ln <= 1e-15 * max(1.0, abs(L))
        W, L, G = Wn, Ln, Gn
        if done:
            break
    return W


def _minimize_lagrangian(W, A, ps, rho, mu, mask, max_iter=MAX_ITER, tol=_INNER_TOL):
    """Entropic mirror descent with step halving on ascent. Returns (W, gap, iters)."""
    f, G = _objective_and_grad(W, A, ps)
    g = f + mu * float(ps @ (W * rho).sum(axis=1))
    eta = 1.0
    gap = np.inf
    g_check = np.inf
    stalls = kicks = 0
    for it in range(1, max_iter + 1):
        Gt = G + mu * rho
        gap = _fw_gap(W, Gt, ps, mask)
        if gap <= tol:
            return W, gap, it
        if it % _CERT_EVERY == 0:
            gap, Wc = _certificate(W, A, ps, rho, mu, mask, _STALL_TOL)
            # stop at tolerance, or when the objective no longer moves at
            # float precision and the certified gap is already small
            still = abs(g_check - g) <= 1e-15 * max(1.0, abs(g))
            stalls = stalls + 1 if still else 0
            if gap <= tol or (still and gap <= _STALL_TOL):
                return Wc, gap, it
            if stalls >= _STALL_CHECKS:
                # mass stuck at the floor: an entry or a whole output about to
                # open, where mirror descent crawls. Push it explicitly, else
                # leave the final answer to the caller's certificate.
                Wn = None
                if kicks < _MAX_KICKS:
                    Wn = _fw_step(W, A, ps, rho, mu, mask, g, tol)
                    if Wn is None:
                        Wn = _open_column(W, A, ps, rho, mu, mask, g)
                if Wn is None:
                    gap, Wc = _certificate(W, A, ps, rho, mu, mask)
                    return Wc, gap, it
                kicks += 1
                stalls = 0
                W = np.where(mask, np.maximum(Wn, _ENTRY_FLOOR), 0.0)
                W /= W.sum(axis=1, keepdims=True)
                g, G = _lagrangian(W, A, ps, rho, mu)
                Gt = G + mu * rho
            # second-order polish on the current face; mirror descent keeps
            # reviving entries in case the face is wrong
            Wn = _newton_phase(W, A, ps, rho, mu, mask)
            gn, Gn = _lagrangian(Wn, A, ps, rho, mu)
            if gn < g:
                W, G, g = Wn, Gn, gn
                gap, Wc = _certificate(W, A, ps, rho, mu, mask, tol)
                if gap <= tol:
                    return Wc, gap, it
                # re-seed entries the Newton step emptied so mirror descent can move them
                W = np.where(mask, np.maximum(W, _ENTRY_FLOOR), 0.0)
                W /= W.sum(axis=1, keepdims=True)
                g, G = _lagrangian(W, A, ps, rho, mu)
                Gt = G + mu * rho
            g_check = g
        shift = np.where(mask, Gt, np.inf).min(axis=1, keepdims=True)
        while True:
            Z = np.where(mask, W * np.exp(-eta * (Gt - shift)), 0.0)
            # a tiny floor keeps entries revivable after exp underflow
            Wn = np.where(mask, np.maximum(Z / Z.sum(axis=1, keepdims=True), _ENTRY_FLOOR), 0.0)
            Wn /= Wn.sum(axis=1, keepdims=True)
            fn, Gn = _objective_and_grad(Wn, A, ps)
            gn = fn + mu * float(ps @ (Wn * rho).sum(axis=1))
            # Armijo: keep a fixed fraction of the decrease the linear model predicts
            predicted = float(ps @ (Gt * (W - Wn)).sum(axis=1))
            if g - gn >= _ARMIJO * predicted or (predicted <= 1e-16 and gn <= g + 1e-15):
                break
            eta *= 0.5
            if eta < 1e-8:
                # no descent possible at float precision
                gap, Wc = _certificate(W, A, ps, rho, mu, mask)
                return Wc, gap, it
        W, G, g = Wn, Gn, gn
        eta = min(_MAX_STEP, eta * 2.0)
    gap, Wc = _certificate(W, A, ps, rho, mu, mask)
    return Wc, gap, max_iter


def default_init(problem: RdeProblem, alpha: float = INIT_MIX) -> np.ndarray:
    """(1 - alpha) * (one-hot at each row's cheapest output) + alpha * uniform."""
    rho = problem.rho_s
    ident = np.zeros_like(rho)
    ident[np.arange(rho.shape[0]), rho.argmin(axis=1)] = 1.0
    return (1.0 - alpha) * ident + alpha / rho.shape[1]


def _resolve_init(problem, init):
    rho = problem.rho_s
    if init is None:
        return default_init(problem)
    if isinstance(init, np.random.Generator):
        return init.dirichlet(np.ones(rho.shape[1]), size=rho.shape[0])
    W = np.array(init, dtype=float)
    if W.shape != rho.shape:
        raise ValidationError(f"init has shape {W.shape}, expected {rho.shape}")
    if np.any(W <= 0):
        raise ValidationError("init channel must be strictly positive")
    return W / W.sum(axis=1, keepdims=True)


def _finish(problem, W_live, live, objective, iterations, gap_nats, mu):
    A, ps_all = problem._inputs[0], problem._inputs[1]
    ns, nx = problem.rho_s.shape
    W = np.empty((ns, nx))
    W[live] = W_live
    q = ps_all[live] @ W_live
    W[~live] = q / q.sum()
    channel = SanitizationChannel(W, problem.input_labels, problem.output_labels)
    ps = ps_all
    rate = mutual_information(joint_from_matrix(ps[:, None] * channel.matrix), 0, 1)
    hx = joint_from_matrix(A @ channel.matrix)
    leak = mutual_information(hx, 0, 1)
    h_priv = entropy(Pmf(A.sum(axis=1)))
    return RdeSolution(
        channel=channel,
        rate=rate,
        equivocation=max(h_priv - leak, 0.0),
        leakage=leak,
        achieved_D=problem.expected_distortion(channel.matrix),
        target_D=float(problem.target_D),
        objective_tag=objective,
        iterations=int(iterations),
        final_gap=max(gap_nats, 0.0) / LN2,
        multiplier=float(mu),
    )


def _solve(problem: RdeProblem, objective: str, init=None, max_iter=MAX_ITER) -> RdeSolution:
    A_full, ps_all, _, _ = problem._inputs
    if objective == MIN_RATE:
        A_full = np.diag(ps_all)
    D = float(problem.target_D)
    dmin, dmax = problem.D_min, problem.D_max
    if D < dmin - 1e-12:
        raise DomainError(
            f"target distortion {D:.12g} below D_min = {dmin:.12g}; feasible interval [{dmin:.12g}, {dmax:.12g}]",
            value=D,
            interval=(dmin, dmax),
        )

    live = ps_all > 0
    A, ps = A_full[:, live], ps_all[live]
    rho = problem.rho_s[live]
    full_mask = np.ones_like(rho, dtype=bool)

    if D >= dmax - 1e-15:
        # one output symbol, the cheapest on average
        W = np.zeros_like(rho)
        W[:, int((ps @ rho).argmin())] = 1.0
        return _finish(problem, W, live, objective, 0, 0.0, 0.0)

    W0 = _resolve_init(problem, init)[live]

    if D <= dmin + 1e-12:
        mask = rho <= rho.min(axis=1, keepdims=True) + 1e-15
        Wi = np.where(mask, W0, 0.0)
        Wi /= Wi.sum(axis=1, keepdims=True)
        W, gap, it = _minimize_lagrangian(Wi, A, ps, rho, 0.0, mask, max_iter)
        _raise_if_bad(gap, W, problem)
        return _finish(problem, W, live, objective, it, gap, math.inf)

    def dist(W):
        return float(ps @ (W * rho).sum(axis=1))

    def leak(W):
        return _objective_and_grad(W, A, ps)[0]

    total = 0

    def run(mu, start):
        nonlocal total
        W, gap, it = _minimize_lagrangian(start, A, ps, rho, mu, full_mask, max_iter)
        total += it
        return W, dist(W), leak(W)

    def chord(lo, hi):
        # multiplier at which both bracketing channels have equal Lagrangian value
        (mu_a, _, d_a, f_a), (mu_b, _, d_b, f_b) = lo, hi
        if d_a - d_b <= 0:
            return mu_b
        return min(max((f_b - f_a) / (d_a - d_b), mu_a), mu_b)

    def mix(lo, hi):
        (_, W_a, d_a, _), (_, W_b, d_b, _) = lo, hi
        theta = 0.0 if d_a - d_b <= 0 else (D - d_b) / (d_a - d_b)
        theta = min(max(theta, 0.0), 1.0)
        return theta * W_a + (1.0 - theta) * W_b

    def certify(lo, hi):
        # at distortion exactly D, the Lagrangian gap at any mu >= 0 bounds
        # the suboptimality, so keep the best of a few multipliers
        W = mix(lo, hi)
        # the leakage is never negative, so its own value bounds the loss;
        # this settles targets inside a zero-leakage plateau
        best = (leak(W), W, lo[0])
        for mu in (chord(lo, hi), hi[0], lo[0]):
            gap, Wc = _certificate(W, A, ps, rho, mu, full_mask, done_tol)
            if gap < best[0]:
                best = (gap, Wc, mu)
        return best

    done_tol = 0.5 * GAP_TOL * LN2
    # mu = 0: the constant channel is optimal (zero objective) with distortion D_max
    W_c = np.zeros_like(rho)
    W_c[:, int((ps @ rho).argmin())] = 1.0
    lo = (0.0, W_c, dmax, 0.0)
    mu = 1.0
    hi = (mu, *run(mu, W0))
    while hi[2] > D:
        lo = hi
        mu *= 2.0
        if mu > 1e15:
            raise ConvergenceError("multiplier search diverged", best=hi[1])
        hi = (mu, *run(mu, W0))

    result = certify(lo, hi)
    for _ in range(200):
        if result[0] <= done_tol or lo[2] - hi[2] <= 1e-12 or (hi[0] - lo[0]) <= 1e-12 * hi[0]:
            break
        if lo[0] > 0:
            # secant on distortion against log(mu), kept away from the ends
            a, b = math.log(lo[0]), math.log(hi[0])
            t = (lo[2] - D) / (lo[2] - hi[2]) if lo[2] > hi[2] else 0.5
            mu = math.exp(a + min(max(t, 0.1), 0.9) * (b - a))
        else:
            # no positive lower multiplier yet: the chord slope is a better guess than halving
            mu = min(math.sqrt(max(chord(lo, hi), 1e-6 * hi[0]) * hi[0]), 0.5 * hi[0])
        W, d, f = run(mu, (1.0 - _WARM_MIX) * hi[1] + _WARM_MIX * W0)
        if d > D:
            lo = (mu, W, d, f)
        else:
            hi = (mu, W, d, f)
        result = certify(lo, hi)

    gap, W, mu = result
    _raise_if_bad(gap, W, problem)
    return _finish(problem, W, live, objective, total, gap, mu)


def _raise_if_bad(gap_nats, W, problem):
    limit = GAP_TOL * LN2
    if not gap_nats <= limit:
        raise ConvergenceError(
            f"solver stopped with duality gap {gap_nats / LN2:.3g} bits (> {limit / LN2:.3g})",
            best=W,
            gap=gap_nats / LN2,
        )


def solve_max_equivocation(problem: RdeProblem, init=None, max_iter=MAX_ITER) -> RdeSolution:
    """Channel minimizing I(X_h; X_hat) subject to E[rho] <= target_D.

    ``init`` may be ``None`` (fixed interior start), a numpy ``Generator``
    (random Dirichlet rows, for restart checks) or an explicit positive
    channel matrix.
    """
    return _solve(problem, MAX_EQUIVOCATION, init, max_iter)


def solve_min_rate(problem: RdeProblem, init=None, max_iter=MAX_ITER) -> RdeSolution:
    """Channel minimizing I(X_h X_r; X_hat) subject to E[rho] <= target_D."""
    return _solve(problem, MIN_RATE, init, max_iter)


def solve(problem: RdeProblem, objective: str = MAX_EQUIVOCATION, **kw) -> RdeSolution:
    if objective not in (MAX_EQUIVOCATION, MIN_RATE):
        raise ValueError(f"unknown objective {objective!r}")
    return _solve(problem, objective, **kw)


# ---------------------------------------------------------------------------
# exhaustive oracle


def _simplex_grid(k, steps):
    """All k-vectors of non-negative multiples of 1/steps summing to 1."""
    pts = []
    for cuts in itertools.combinations(range(steps + k - 1), k - 1):
        prev = -1
        v = []
        for c in cuts:
            v.append(c - prev - 1)
            prev = c
        v.append(steps + k - 2 - prev)
        pts.append(v)
    return np.array(pts, dtype=float) / steps


def brute_force_region(problem: RdeProblem, grid_resolution: int = 11, chunk: int = 1 << 16) -> np.ndarray:
    """(R, D, E) for every channel on a uniform grid over the row simplices.

    Each channel row takes values in multiples of ``1 / (grid_resolution - 1)``.
    Returns an array of shape (n_channels, 3). Refuses problems beyond
    alphabet size 4, resolution 21 or 2**22 channels.
    """
    A, ps, _, _ = problem._inputs
    rho = problem.rho_s
    ns, nx = rho.shape
    if ns > BRUTE_MAX_ALPHABET or nx > BRUTE_MAX_ALPHABET or not 2 <= grid_resolution <= BRUTE_MAX_RESOLUTION:
        raise CapExceededError(
            f"brute force limited to alphabets <= {BRUTE_MAX_ALPHABET} and resolution in "
            f"[2, {BRUTE_MAX_RESOLUTION}]; got {ns}x{nx}, resolution {grid_resolution}",
            requested=(ns, nx, grid_resolution),
            cap=(BRUTE_MAX_ALPHABET, BRUTE_MAX_RESOLUTION),
        )
    rows = _simplex_grid(nx, grid_resolution - 1)
    total = rows.shape[0] ** ns
    if total > BRUTE_MAX_CHANNELS:
        raise CapExceededError(
            f"{total} grid channels exceeds the cap of {BRUTE_MAX_CHANNELS}",
            requested=total,
            cap=BRUTE_MAX_CHANNELS,
        )
    h_priv = entropy(Pmf(A.sum(axis=1)))
    out = np.empty((total, 3))
    idx_iter = itertools.product(range(rows.shape[0]), repeat=ns)
    done = 0
    while done < total:
        block = np.array(list(itertools.islice(idx_iter, chunk)))
        W = rows[block]  # (b, ns, nx)
        Js = ps[None, :, None] * W
        Jh = np.einsum("hs,bsx->bhx", A, W)
        out[done : done + len(block), 0] = _batch_mi(Js)
        out[done : done + len(block), 1] = np.einsum("s,bsx,sx->b", ps, W, rho)
        out[done : done + len(block), 2] = h_priv - _batch_mi(Jh)
        done += len(block)
    return out


def _batch_mi(J):
    a = J.sum(axis=2, keepdims=True)
    b = J.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(J > 0, J * np.log2(J / (a * b)), 0.0)
    return np.maximum(t.sum(axis=(1, 2)), 0.0)
