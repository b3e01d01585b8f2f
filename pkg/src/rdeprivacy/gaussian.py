"""Closed-form rate/leakage curves for a jointly Gaussian public/private pair.

Model: public X ~ N(0, var_x), private Y ~ N(0, var_y), correlation rho_xy;
optional user side information Z with correlation rho_xz and Y - X - Z Markov.
Only X is encoded (Y - X - X_hat). Rates and leakages are in bits per entry.

Three cases:

* ``uninformed``: no side information; X_hat = X + N.
* ``statistically_informed``: the user holds Z, the encoder knows its law
  (Wyner-Ziv); U = X + N and the user reconstructs from (U, Z).
* ``informed``: the encoder also sees Z. For Gaussian sources this gives the
  same curve as the statistically informed case (no rate loss).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .curves import TradeoffCurve, TradeoffPoint
from .errors import DomainError, ValidationError

UNINFORMED = "uninformed"
STAT_INFORMED = "statistically_informed"
INFORMED = "informed"
CASES = (UNINFORMED, STAT_INFORMED, INFORMED)
CASE_ALIASES = {"u": UNINFORMED, "none": UNINFORMED, "si": STAT_INFORMED, "wz": STAT_INFORMED}

# smallest admissible distortion, relative to var_x (rate diverges at 0)
MIN_REL_D = 1e-12


@dataclass(frozen=True)
class GaussianModel:
    var_x: float
    var_y: float = 1.0
    rho_xy: float = 0.0
    rho_xz: float | None = None
    # squared correlations; kept exactly when the model is built from them
    rho_xy2: float | None = field(default=None, repr=False)
    rho_xz2: float | None = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("var_x", "var_y"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a positive finite number, got {v!r}")
        for name in ("rho_xy", "rho_xz"):
            v = getattr(self, name)
            if v is not None and not (-1.0 <= v <= 1.0):
                raise ValidationError(f"{name} must lie in [-1, 1], got {v!r}")
            sq = getattr(self, name + "2")
            if v is None:
                object.__setattr__(self, name + "2", None)
            elif sq is None:
                object.__setattr__(self, name + "2", v * v)
            elif abs(sq - v * v) > 1e-12:
                raise ValidationError(f"{name}2 = {sq!r} is not the square of {name} = {v!r}")

    @classmethod
    def from_squared(cls, var_x, var_y=1.0, rho_xy2=0.0, rho_xz2=None):
        """Build from squared correlations (signs do not affect any curve)."""

        def root(v):
            if v is None:
                return None
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"squared correlation must lie in [0, 1], got {v!r}")
            return math.sqrt(v)

        return cls(var_x, var_y, root(rho_xy2), root(rho_xz2), rho_xy2, rho_xz2)

    @property
    def has_side_info(self):
        return self.rho_xz is not None

    def to_json(self, path=None):
        text = json.dumps(asdict(self), indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, text_or_path):
        text = str(text_or_path)
        if not text.lstrip().startswith("{"):
            text = Path(text_or_path).read_text()
        return cls(**json.loads(text))


@dataclass(frozen=True)
class GaussianPoint:
    D: float
    R: float
    L: float
    case_tag: str
    noise_var: float


def _case(tag):
    tag = CASE_ALIASES.get(tag, tag)
    if tag not in CASES:
        raise ValueError(f"unknown case {tag!r}; expected one of {CASES}")
    return tag


def admissible_interval(model: GaussianModel, case_tag=UNINFORMED):
    """Closed interval of accepted distortions for ``case_tag``."""
    case = _case(case_tag)
    top = model.var_x
    if case != UNINFORMED:
        if not model.has_side_info:
            raise ValidationError(f"case {case!r} needs rho_xz (side information)")
        top = model.var_x * (1.0 - model.rho_xz2)
    return MIN_REL_D * model.var_x, top


def _check(model, D, case):
    lo, hi = admissible_interval(model, case)
    if not (np.isfinite(D) and lo <= D <= hi):
        raise DomainError(
            f"distortion {D!r} outside admissible interval [{lo:.12g}, {hi:.12g}] for {case}",
            value=D,
            interval=(lo, hi),
        )
    return float(D)


def leakage(model: GaussianModel, D: float) -> float:
    """I(Y; X_hat) for the minimal-rate Gaussian test channel at distortion D."""
    r2 = model.rho_xy2
    return max(0.5 * math.log2(1.0 / ((1.0 - r2) + r2 * D / model.var_x)), 0.0)


def point_uninformed(model: GaussianModel, D: float) -> GaussianPoint:
    D = _check(model, D, UNINFORMED)
    vx = model.var_x
    rate = max(0.5 * math.log2(vx / D), 0.0)
    # var(X | X + N) = D
    noise = math.inf if D >= vx else D * vx / (vx - D)
    return GaussianPoint(D, rate, leakage(model, D), UNINFORMED, noise)


def point_side_info(model: GaussianModel, D: float, informed: bool = False) -> GaussianPoint:
    case = INFORMED if informed else STAT_INFORMED
    D = _check(model, D, case)
    s = model.var_x * (1.0 - model.rho_xz2)  # var(X | Z)
    rate = max(0.5 * math.log2(s / D), 0.0)
    # var(X | X + N, Z) = D
    noise = math.inf if D >= s else D * s / (s - D)
    return GaussianPoint(D, rate, leakage(model, D), case, noise)


def point(model: GaussianModel, D: float, case_tag=UNINFORMED) -> GaussianPoint:
    case = _case(case_tag)
    if case == UNINFORMED:
        return point_uninformed(model, D)
    return point_side_info(model, D, informed=(case == INFORMED))


def curve(model: GaussianModel, case_tag, grid) -> TradeoffCurve:
    """Rate and leakage over a distortion grid; columns D, R, L, case."""
    case = _case(case_tag)
    grid = [float(d) for d in np.atleast_1d(grid)]
    bad = []
    for d in grid:
        try:
            _check(model, d, case)
        except DomainError:
            bad.append(d)
    if bad:
        lo, hi = admissible_interval(model, case)
        raise DomainError(
            f"grid values {bad} outside admissible interval [{lo:.12g}, {hi:.12g}] for {case}",
            value=bad,
            interval=(lo, hi),
        )
    pts = []
    for d in grid:
        gp = point(model, d, case)
        pts.append(TradeoffPoint(D=gp.D, R=gp.R, L=gp.L, case=case))
    return TradeoffCurve(pts, columns=("D", "R", "L", "case"))


def default_grid(model: GaussianModel, case_tag=UNINFORMED, npoints: int = 50):
    lo, hi = admissible_interval(model, case_tag)
    return np.linspace(hi / npoints, hi, npoints)
