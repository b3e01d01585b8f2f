"""Probability containers and discrete information measures (in bits)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, ValidationError

# below this a probability is an exact zero for log purposes
ZERO_TOL = 1e-15
# float ingestion slack; anything worse is rejected rather than renormalized
NORM_TOL = 1e-9
SYMBOL_SEP = "|"


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _plogp(p):
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > ZERO_TOL]
    return float(-(p * np.log2(p)).sum())


def _check_mass(arr, what):
    if arr.size == 0:
        raise ValidationError(f"{what} must have at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} has non-finite entries")
    if np.any(arr < 0):
        raise ValidationError(f"{what} has negative entries (min {arr.min():.3g})")
    total = arr.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ValidationError(f"{what} sums to {total:.12g}, not 1")
    return arr / total


@dataclass(frozen=True, eq=False)
class Pmf:
    """A probability vector with optional symbol labels."""

    probs: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).ravel()
        object.__setattr__(self, "probs", _frozen(_check_mass(probs, "pmf")))
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(probs.size)))
        else:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != probs.size:
                raise ValidationError(f"{len(labels)} labels for {probs.size} probabilities")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_weights(cls, weights, labels=None):
        """Normalize arbitrary non-negative weights into a pmf."""
        w = np.asarray(weights, dtype=float).ravel()
        if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
            raise ValidationError("weights must be finite, non-negative and not all zero")
        return cls(w / w.sum(), labels)

    def __len__(self):
        return self.probs.size

    def to_dict(self):
        return {"labels": list(self.labels), "probs": self.probs.tolist()}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["probs"], d.get("labels"))
        except KeyError as exc:
            raise DataError(f"pmf JSON is missing key {exc}") from None


def _axes_tuple(axes, ndim, what="axes"):
    if axes is None:
        return tuple(range(ndim))
    if isinstance(axes, (int, np.integer)):
        axes = (int(axes),)
    axes = tuple(int(a) for a in axes)
    for a in axes:
        if not 0 <= a < ndim:
            raise ValueError(f"{what}: axis {a} out of range for a {ndim}-attribute joint")
    if len(set(axes)) != len(axes):
        raise ValueError(f"{what}: repeated axis in {axes}")
    return axes


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint distribution over K finite attributes with a public/private split.

    ``public`` and ``private`` are axis index tuples; they may overlap but
    together must cover every axis. Both default to all axes.
    """

    table: np.ndarray
    public: tuple | None = None
    private: tuple | None = None
    names: tuple | None = None
    labels: tuple | None = None

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim == 0:
            raise ValidationError("joint table must have at least one axis")
        object.__setattr__(self, "table", _frozen(_check_mass(table, "joint table")))
        k = table.ndim
        pub = _axes_tuple(self.public, k, "public")
        priv = _axes_tuple(self.private, k, "private")
        if set(pub) | set(priv) != set(range(k)):
            raise ValidationError("public and private attribute sets must cover every axis")
        object.__setattr__(self, "public", pub)
        object.__setattr__(self, "private", priv)
        names = self.names or tuple(f"X{i}" for i in range(k))
        if len(names) != k:
            raise ValidationError(f"{len(names)} names for {k} axes")
        object.__setattr__(self, "names", tuple(str(n) for n in names))
        if self.labels is None:
            labels = tuple(tuple(str(i) for i in range(n)) for n in table.shape)
        else:
            labels = tuple(tuple(str(s) for s in ax) for ax in self.labels)
            if tuple(len(ax) for ax in labels) != table.shape:
                raise ValidationError("axis labels do not match table shape")
        object.__setattr__(self, "labels", labels)

    @property
    def ndim(self):
        return self.table.ndim

    @property
    def shape(self):
        return self.table.shape

    def marginal(self, axes) -> np.ndarray:
        """Marginal table over ``axes`` (kept in the order given)."""
        axes = _axes_tuple(axes, self.ndim)
        drop = tuple(a for a in range(self.ndim) if a not in axes)
        m = self.table.sum(axis=drop) if drop else self.table
        kept = [a for a in range(self.ndim) if a in axes]
        return np.transpose(m, [kept.index(a) for a in axes]) if axes else np.asarray(m)

    def marginal_pmf(self, axis: int) -> Pmf:
        return Pmf(self.marginal((axis,)), self.labels[axis])

    def product_labels(self, axes) -> tuple:
        """Labels of the flattened product symbol over ``axes`` (row-major)."""
        axes = _axes_tuple(axes, self.ndim)
        if not axes:
            return ("",)
        grids = [self.labels[a] for a in axes]
        out = [""]
        for g in grids:
            out = [f"{p}{SYMBOL_SEP}{s}" if p else s for p in out for s in g]
        return tuple(out)

    def flat_pmf(self, axes=None) -> Pmf:
        """Marginal over ``axes`` viewed as one scalar super-symbol."""
        axes = _axes_tuple(axes, self.ndim)
        return Pmf(self.marginal(axes).ravel(), self.product_labels(axes))

    def private_public_matrix(self) -> np.ndarray:
        """Matrix P[h, r] of the flattened private and public symbols.

        Overlapping attribute sets are handled: a cell contributes to the single
        (h, r) pair it determines.
        """
        return _pair_matrix(self.table, self.private, self.public)

    def to_dict(self):
        return {
            "names": list(self.names),
            "labels": [list(ax) for ax in self.labels],
            "table": self.table.tolist(),
            "public": list(self.public),
            "private": list(self.private),
        }

    @classmethod
    def from_dict(cls, d):
        if "table" not in d:
            raise DataError("joint pmf JSON needs a 'table' entry")
        names = d.get("names")
        table = np.asarray(d["table"], dtype=float)

        def resolve(key):
            v = d.get(key)
            if v is None:
                return None
            return tuple(names.index(a) if isinstance(a, str) else int(a) for a in v)

        try:
            return cls(table, resolve("public"), resolve("private"), names, d.get("labels"))
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise DataError(str(exc)) from None


def _pair_matrix(table, rows_axes, cols_axes):
    shape = table.shape
    idx = np.indices(shape).reshape(len(shape), -1)

    def flat(axes):
        if not axes:
            return np.zeros(idx.shape[1], dtype=np.int64), 1
        dims = tuple(shape[a] for a in axes)
        return np.ravel_multi_index(tuple(idx[a] for a in axes), dims), int(np.prod(dims))

    r, nr = flat(rows_axes)
    c, nc = flat(cols_axes)
    out = np.zeros((nr, nc))
    np.add.at(out, (r, c), table.ravel())
    return out


def joint_from_matrix(matrix, names=("A", "B"), labels=None) -> JointPmf:
    """Two-attribute joint from a matrix of probabilities."""
    return JointPmf(np.asarray(matrix, dtype=float), names=names, labels=labels)


@dataclass(frozen=True, eq=False)
class SanitizationChannel:
    """Row-stochastic matrix mapping input symbols to output symbols.

    ``undefined_rows`` lists rows whose conditional law is not determined by
    the data they were derived from (e.g. a Bayes inverse at a zero-mass
    output). Those rows are filled with the prior and flagged here.
    """

    matrix: np.ndarray
    input_labels: tuple | None = None
    output_labels: tuple | None = None
    undefined_rows: tuple = field(default=())

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
            raise ValidationError(f"channel must be a non-empty matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)) or np.any(m < 0) or np.any(m > 1 + NORM_TOL):
            raise ValidationError("channel entries must lie in [0, 1]")
        rows = m.sum(axis=1)
        bad = np.flatnonzero(np.abs(rows - 1.0) > NORM_TOL)
        if bad.size:
            raise ValidationError(f"channel row {bad[0]} sums to {rows[bad[0]]:.12g}")
        m = m / rows[:, None]
        object.__setattr__(self, "matrix", _frozen(m))
        for attr, n in (("input_labels", m.shape[0]), ("output_labels", m.shape[1])):
            lab = getattr(self, attr)
            lab = tuple(str(i) for i in range(n)) if lab is None else tuple(str(s) for s in lab)
            if len(lab) != n:
                raise ValidationError(f"{attr}: {len(lab)} labels for {n} symbols")
            object.__setattr__(self, attr, lab)
        object.__setattr__(self, "undefined_rows", tuple(int(i) for i in self.undefined_rows))

    @property
    def shape(self):
        return self.matrix.shape

    def joint(self, source: Pmf) -> np.ndarray:
        """Joint matrix p(x) p(x_hat | x)."""
        self._check_input(source)
        return source.probs[:, None] * self.matrix

    def output_pmf(self, source: Pmf) -> Pmf:
        return Pmf(source.probs @ self.matrix, self.output_labels)

    def _check_input(self, source):
        if len(source) != self.matrix.shape[0]:
            raise ValidationError(
                f"input pmf has {len(source)} symbols, channel has {self.matrix.shape[0]} rows"
            )

    @classmethod
    def identity(cls, labels):
        labels = tuple(labels)
        return cls(np.eye(len(labels)), labels, labels)

    @classmethod
    def constant(cls, n_inputs, output_pmf, input_labels=None, output_labels=None):
        q = np.asarray(output_pmf, dtype=float)
        return cls(np.tile(q, (n_inputs, 1)), input_labels, output_labels)


# ---------------------------------------------------------------------------
# information measures


def _as_pmf(p):
    return p if isinstance(p, Pmf) else Pmf(p)


def entropy(p) -> float:
    """Shannon entropy in bits; ``0 log 0 = 0``."""
    p = _as_pmf(p)
    return min(max(_plogp(p.probs), 0.0), float(np.log2(len(p))))


def _disjoint(a, b, ndim):
    a = _axes_tuple(a, ndim)
    b = _axes_tuple(b, ndim)
    if set(a) & set(b):
        raise ValueError(f"axis sets overlap: {sorted(set(a) & set(b))}")
    return a, b


def joint_entropy(joint: JointPmf, axes=None) -> float:
    return _plogp(joint.marginal(_axes_tuple(axes, joint.ndim)))


def conditional_entropy(joint: JointPmf, target_axes, given_axes) -> float:
    """H(target | given) = H(target, given) - H(given)."""
    t, g = _disjoint(target_axes, given_axes, joint.ndim)
    h = _plogp(joint.marginal(t + g)) - (_plogp(joint.marginal(g)) if g else 0.0)
    return min(max(h, 0.0), _plogp(joint.marginal(t)))


def mutual_information(joint: JointPmf, axes_a, axes_b) -> float:
    """I(a; b) = H(a) + H(b) - H(a, b), clamped at zero."""
    a, b = _disjoint(axes_a, axes_b, joint.ndim)
    mi = _plogp(joint.marginal(a)) + _plogp(joint.marginal(b)) - _plogp(joint.marginal(a + b))
    return max(mi, 0.0)


def reverse_channel(forward: SanitizationChannel, source: Pmf) -> SanitizationChannel:
    """Bayes inverse p(x | x_hat) of a forward channel under input ``source``.

    Output symbols with zero marginal have no defined posterior; their rows
    are set to the prior and listed in ``undefined_rows``.
    """
    forward._check_input(source)
    joint = source.probs[:, None] * forward.matrix
    q = joint.sum(axis=0)
    dead = q <= ZERO_TOL
    rev = np.empty_like(joint.T)
    live = ~dead
    rev[live] = joint.T[live] / q[live, None]
    rev[dead] = source.probs
    return SanitizationChannel(
        rev, forward.output_labels, forward.input_labels, tuple(np.flatnonzero(dead))
    )


# ---------------------------------------------------------------------------
# serialization


def load_distribution(path) -> Pmf | JointPmf:
    """Read a pmf (``{"labels", "probs"}``) or joint pmf (``{"table", ...}``) JSON file."""
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read distribution {path}: {exc}") from None
    if not isinstance(d, dict):
        if isinstance(d, list):
            return JointPmf(d)
        raise DataError(f"{path}: expected a JSON object")
    if "probs" in d:
        return Pmf.from_dict(d)
    return JointPmf.from_dict(d)


def channel_to_csv(channel: SanitizationChannel, path=None, digits: int = 17) -> str:
    """CSV with a header of output labels and a leading column of input labels."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["input", *channel.output_labels])
    for lab, row in zip(channel.input_labels, channel.matrix):
        w.writerow([lab, *(f"{v:.{digits}g}" for v in row)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def channel_from_csv(path_or_text) -> SanitizationChannel:
    text = str(path_or_text)
    if "\n" not in text:
        try:
            text = Path(path_or_text).read_text()
        except OSError as exc:
            raise DataError(f"cannot read channel {path_or_text}: {exc}") from None
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if len(rows) < 2:
        raise DataError("channel CSV needs a header and at least one row")
    out_labels = rows[0][1:]
    try:
        mat = [[float(v) for v in r[1:]] for r in rows[1:]]
    except ValueError as exc:
        raise DataError(f"channel CSV: {exc}") from None
    if any(len(r) != len(out_labels) for r in mat):
        raise DataError("channel CSV rows have inconsistent widths")
    return SanitizationChannel(mat, [r[0] for r in rows[1:]], out_labels)


def format_float(x: float, digits: int = 12) -> str:
    return f"{x:.{digits}g}"


def labels_or_default(labels: Iterable | None, n: int) -> tuple:
    return tuple(str(i) for i in range(n)) if labels is None else tuple(labels)


def product_label(values: Sequence[str]) -> str:
    return SYMBOL_SEP.join(values)
