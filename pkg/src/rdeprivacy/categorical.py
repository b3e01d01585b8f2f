"""Optimal sanitization of a discrete source under Hamming distortion.

The optimal mechanism keeps every symbol whose probability exceeds a water
level and suppresses the rest: suppressed inputs are replaced by a draw from
the (flattened) output distribution, so observing the output says nothing
about them.

The water level is found by inverting the piecewise-linear map

    D(lam) = S * lam + sum_{p_k <= lam} p_k,      S = |support| - 1,

between consecutive sorted probabilities; no iteration is involved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curves import TradeoffCurve, TradeoffPoint
from .errors import DomainError
from .infotheory import Pmf, SanitizationChannel, _plogp, entropy, reverse_channel

# D values this close above D_max are treated as D_max (float slack only)
_DMAX_SLACK = 1e-12


def _xlog(x):
    return -x * np.log2(x) if x > 0 else 0.0


def max_distortion(source: Pmf) -> float:
    """Smallest distortion at which the rate drops to zero: ``1 - max p``."""
    return float(1.0 - source.probs.max())


def _check_distortion(source, D):
    dmax = max_distortion(source)
    if not np.isfinite(D) or D < 0 or D > dmax + _DMAX_SLACK:
        raise DomainError(
            f"distortion {D!r} outside [0, {dmax:.12g}] (D_max = {dmax:.12g})",
            value=D,
            interval=(0.0, dmax),
        )
    return min(float(D), dmax), dmax


def lambda_from_distortion(source: Pmf, D: float):
    """Water level and retained-symbol set for target Hamming distortion ``D``.

    Returns ``(lam, support)`` with ``support`` a sorted tuple of symbol
    indices. Symbols with probability exactly equal to ``lam`` are
    suppressed. At ``D = D_max`` only the (first) most likely symbol is kept
    and ``lam`` is the runner-up probability.
    """
    D, dmax = _check_distortion(source, D)
    p = source.probs
    order = np.argsort(-p, kind="stable")
    q = p[order]
    m = int(np.count_nonzero(q > 0))
    if D <= 0.0:
        return 0.0, tuple(sorted(order[:m].tolist()))
    # tails[j] = mass of the symbols ranked j, j+1, ... (0-based)
    tails = np.concatenate([np.cumsum(q[::-1])[::-1], [0.0]])
    for j in range(m, 1, -1):
        tail = tails[j]
        lo = (j - 1) * (q[j] if j < q.size else 0.0) + tail
        hi = (j - 1) * q[j - 1] + tail
        if lo <= D < hi:
            lam = (D - tail) / (j - 1)
            return float(lam), tuple(sorted(order[:j].tolist()))
    # D == D_max (or a single positive-mass symbol)
    lam = float(q[1]) if q.size > 1 else 0.0
    return lam, (int(order[0]),)


@dataclass(frozen=True, eq=False)
class WaterfillSolution:
    source: Pmf
    lam: float
    support: tuple
    output_pmf: Pmf
    test_channel: SanitizationChannel
    forward_channel: SanitizationChannel
    distortion: float
    equivocation: float
    rate: float

    @property
    def S(self) -> int:
        return len(self.support) - 1

    @property
    def suppressed(self) -> tuple:
        return tuple(i for i in range(len(self.source)) if i not in self.support)

    def to_dict(self):
        labels = self.source.labels
        return {
            "lambda": self.lam,
            "support": [labels[i] for i in self.support],
            "suppressed": [labels[i] for i in self.suppressed],
            "D": self.distortion,
            "Gamma": self.equivocation,
            "R": self.rate,
            "output_pmf": self.output_pmf.to_dict(),
        }

    def write(self, json_path, forward_csv=None, test_csv=None, digits=17):
        from .infotheory import channel_to_csv

        Path(json_path).write_text(json.dumps(self.to_dict(), indent=2))
        if forward_csv is not None:
            channel_to_csv(self.forward_channel, forward_csv, digits)
        if test_csv is not None:
            channel_to_csv(self.test_channel, test_csv, digits)


def _test_channel(p, lam, support, D):
    m = p.size
    in_supp = np.zeros(m, dtype=bool)
    in_supp[list(support)] = True
    # row x_hat -> column x
    row = np.where(in_supp, lam, p)
    T = np.tile(row, (m, 1))
    np.fill_diagonal(T, 1.0 - D)
    undefined = np.flatnonzero(~in_supp)
    # rows for outputs that never occur: posterior is the prior
    T[undefined] = p
    return T, tuple(undefined)


def reverse_waterfill(source: Pmf, D: float) -> WaterfillSolution:
    """Optimal Hamming sanitizer at distortion ``D``."""
    D, _ = _check_distortion(source, D)
    lam, support = lambda_from_distortion(source, D)
    p = source.probs
    qhat = np.zeros_like(p)
    sup = list(support)
    qhat[sup] = np.clip(p[sup] - lam, 0.0, None)
    if qhat.sum() > 0:
        qhat /= qhat.sum()
    else:
        # D = D_max with a tie for the most likely symbol: all mass on the kept one
        qhat[sup[0]] = 1.0
    out = Pmf(qhat, source.labels)
    T, undefined = _test_channel(p, lam, support, D)
    test = SanitizationChannel(T, source.labels, source.labels, undefined)
    forward = reverse_channel(test, out)
    g = gamma(source, D, lam=lam, support=support)
    return WaterfillSolution(
        source=source,
        lam=lam,
        support=support,
        output_pmf=out,
        test_channel=test,
        forward_channel=forward,
        distortion=D,
        equivocation=g,
        rate=max(entropy(source) - g, 0.0),
    )


def gamma(source: Pmf, D: float, *, lam=None, support=None) -> float:
    """Maximal equivocation H(X | X_hat) at Hamming distortion ``D`` (bits)."""
    D, _ = _check_distortion(source, D)
    if lam is None or support is None:
        lam, support = lambda_from_distortion(source, D)
    p = source.probs
    out = np.ones(p.size, dtype=bool)
    out[list(support)] = False
    S = len(support) - 1
    return float(_xlog(1.0 - D) + S * _xlog(lam) + _plogp(p[out]))


def up_curve(source: Pmf, grid) -> TradeoffCurve:
    """(D, R, E) points along the utility-privacy boundary."""
    grid = [float(d) for d in np.atleast_1d(grid)]
    for d in grid:
        _check_distortion(source, d)
    H = entropy(source)
    pts = []
    for d in grid:
        e = gamma(source, d)
        pts.append(TradeoffPoint(D=min(d, max_distortion(source)), R=max(H - e, 0.0), E=e))
    return TradeoffCurve(pts, columns=("D", "R", "E"))
