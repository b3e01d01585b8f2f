"""Apply a sanitization channel to a tabular database, row by row.

Each row's public symbol is replaced by an independent draw from the
channel row it selects. Randomness is indexed by row: the uniform used for row
``i`` is the ``i``-th output of a SplitMix64 generator seeded with the user
seed, so results do not depend on chunking or on the number of workers.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .infotheory import (
    SYMBOL_SEP,
    JointPmf,
    Pmf,
    SanitizationChannel,
    _pair_matrix,
    _plogp,
    entropy,
)

log = logging.getLogger(__name__)

THREADS_ENV = "RDEPRIV_THREADS"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _splitmix_finalize(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def mix_seed(seed: int, stream: int = 0) -> np.uint64:
    """64-bit base state for (seed, stream)."""
    with np.errstate(over="ignore"):
        s = np.array([seed % 2**64], dtype=np.uint64)
        s = _splitmix_finalize(s + np.uint64(stream) * _GOLDEN)
    return s[0]


def row_uniforms(seed: int, start: int, stop: int, stream: int = 0) -> np.ndarray:
    """Uniforms in [0, 1) for rows ``start..stop-1``: SplitMix64 output ``i+1``."""
    base = mix_seed(seed, stream)
    i = np.arange(start, stop, dtype=np.uint64) + np.uint64(1)
    with np.errstate(over="ignore"):
        z = _splitmix_finalize(base + i * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 2**53)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class Database:
    """n rows of categorical symbols stored as alphabet indices."""

    attributes: tuple
    alphabets: tuple
    rows: np.ndarray

    def __post_init__(self):
        attrs = tuple(str(a) for a in self.attributes)
        alph = tuple(tuple(str(s) for s in a) for a in self.alphabets)
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim == 1:
            rows = rows[:, None]
        if len(attrs) != len(alph) or rows.ndim != 2 or rows.shape[1] != len(attrs):
            raise DataError("attributes, alphabets and row width disagree")
        if len(set(attrs)) != len(attrs):
            raise DataError("duplicate attribute names")
        if rows.shape[0] < 1:
            raise DataError("database has no rows")
        for k, a in enumerate(alph):
            col = rows[:, k]
            if col.min() < 0 or col.max() >= len(a):
                raise DataError(f"column {attrs[k]!r} indexes outside its alphabet")
        rows.setflags(write=False)
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "alphabets", alph)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def index(self, name) -> int:
        try:
            return self.attributes.index(name)
        except ValueError:
            raise DataError(f"unknown attribute {name!r}; have {list(self.attributes)}") from None

    def indices(self, names) -> tuple:
        return tuple(self.index(n) for n in names)

    @classmethod
    def from_labels(cls, columns: dict, alphabets: dict | None = None):
        """Build from ``{name: sequence of symbol labels}``."""
        names = list(columns)
        alph, rows = [], []
        for name in names:
            vals = np.asarray([str(v) for v in columns[name]])
            a = tuple(alphabets[name]) if alphabets and name in alphabets else tuple(sorted(set(vals.tolist())))
            lut = {s: i for i, s in enumerate(a)}
            try:
                rows.append(np.fromiter((lut[v] for v in vals), dtype=np.int64, count=vals.size))
            except KeyError as exc:
                raise DataError(f"column {name!r}: symbol {exc} not in alphabet") from None
            alph.append(a)
        if not rows or rows[0].size == 0:
            raise DataError("database has no rows")
        return cls(tuple(names), tuple(alph), np.column_stack(rows))

    @classmethod
    def from_csv(cls, path, alphabets: dict | None = None):
        try:
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader)
                data = [r for r in reader if r]
        except (OSError, StopIteration) as exc:
            raise DataError(f"cannot read database {path}: {exc!r}") from None
        if any(len(r) != len(header) for r in data):
            raise DataError(f"{path}: ragged rows")
        cols = {h: [r[k] for r in data] for k, h in enumerate(header)}
        return cls.from_labels(cols, alphabets)

    def labels(self, name) -> np.ndarray:
        k = self.index(name)
        return np.asarray(self.alphabets[k], dtype=object)[self.rows[:, k]]

    def to_csv(self, path=None) -> str:
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.attributes)
        cols = [np.asarray(a, dtype=object)[self.rows[:, k]] for k, a in enumerate(self.alphabets)]
        w.writerows(zip(*cols))
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _product_index(db: Database, cols: tuple):
    dims = tuple(len(db.alphabets[c]) for c in cols)
    idx = np.ravel_multi_index(tuple(db.rows[:, c] for c in cols), dims)
    return idx, dims


def _product_labels(db: Database, cols: tuple) -> list:
    out = [""]
    for c in cols:
        out = [f"{p}{SYMBOL_SEP}{s}" if p else s for p in out for s in db.alphabets[c]]
    return out


def fit_empirical_pmf(db: Database, attributes=None, public=None, private=None, alpha: float = 0.0) -> JointPmf:
    """Maximum-likelihood joint frequency table over ``attributes``.

    ``alpha > 0`` adds that pseudo-count to every cell. ``public`` and
    ``private`` name subsets of ``attributes`` (default: all of them).
    """
    attributes = list(attributes) if attributes is not None else list(db.attributes)
    if not attributes:
        raise DataError("no attributes selected")
    if alpha < 0:
        raise DataError(f"smoothing alpha must be >= 0, got {alpha}")
    cols = db.indices(attributes)
    idx, dims = _product_index(db, cols)
    counts = np.bincount(idx, minlength=int(np.prod(dims))).astype(float) + alpha
    table = (counts / counts.sum()).reshape(dims)

    def axes(names):
        if names is None:
            return None
        try:
            return tuple(attributes.index(n) for n in names)
        except ValueError as exc:
            raise DataError(f"unknown attribute: {exc}") from None

    return JointPmf(
        table,
        public=axes(public),
        private=axes(private),
        names=tuple(attributes),
        labels=tuple(db.alphabets[c] for c in cols),
    )


def _draw(channel_matrix, in_rows, u):
    """Inverse-CDF draw per row; never lands on a zero-probability column."""
    W = np.asarray(channel_matrix)
    cdf = np.cumsum(W, axis=1)
    last = W.shape[1] - 1 - np.argmax(W[:, ::-1] > 0, axis=1)
    cols = np.arange(W.shape[1])
    cdf[cols[None, :] >= last[:, None]] = 1.0
    return (u[:, None] >= cdf[in_rows]).sum(axis=1)


def _sanitize_column_block(in_idx, channel, lut, seed, stream, fallback, workers, n):
    rows = lut[in_idx]
    matrix = channel.matrix
    if fallback is not None:
        matrix = np.vstack([matrix, fallback])
        rows = np.where(rows < 0, matrix.shape[0] - 1, rows)

    def work(bounds):
        a, b = bounds
        return _draw(matrix, rows[a:b], row_uniforms(seed, a, b, stream))

    step = max(1, -(-n // max(workers, 1)))
    chunks = [(a, min(a + step, n)) for a in range(0, n, step)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return np.concatenate(parts)


def _input_lut(db, cols, channel, unseen):
    labels = _product_labels(db, cols)
    pos = {s: i for i, s in enumerate(channel.input_labels)}
    lut = np.array([pos.get(s, -1) for s in labels], dtype=np.int64)
    idx, _ = _product_index(db, cols)
    missing = np.unique(idx[lut[idx] < 0])
    if missing.size and unseen == "reject":
        shown = [labels[i] for i in missing[:5]]
        raise DataError(
            f"symbols {shown} of {[db.attributes[c] for c in cols]} have no channel row "
            "(pass unseen='suppress' to draw them from the output distribution)"
        )
    return idx, lut, missing.size > 0


def sanitize_rows(
    db: Database,
    channel,
    seed: int,
    public=None,
    drop=(),
    unseen: str = "reject",
    output_pmf=None,
    workers: int | None = None,
) -> Database:
    """Replace the public symbol of every row by a channel draw.

    ``channel`` is either one :class:`SanitizationChannel` over the product of
    the ``public`` columns (labels joined with ``"|"``) or a dict mapping each
    public column to its own channel. ``drop`` names columns to leave out of
    the output. ``unseen='suppress'`` maps symbols without a channel row to a
    draw from ``output_pmf`` (default: the output law under the empirical
    input frequencies).
    """
    if unseen not in ("reject", "suppress"):
        raise ValueError(f"unseen must be 'reject' or 'suppress', got {unseen!r}")
    workers = default_workers() if workers is None else max(1, int(workers))
    if isinstance(channel, dict):
        log.warning("per-attribute channels ignore dependence between public columns")
        plan = [((db.index(c),), ch) for c, ch in channel.items()]
    else:
        names = list(public) if public is not None else list(db.attributes)
        plan = [(db.indices(names), channel)]

    attrs = list(db.attributes)
    alphabets = [list(a) for a in db.alphabets]
    out_rows = np.array(db.rows, copy=True)
    for stream, (cols, ch) in enumerate(plan):
        idx, lut, has_missing = _input_lut(db, cols, ch, unseen)
        fallback = None
        if has_missing:
            if output_pmf is None:
                freq = np.bincount(lut[idx][lut[idx] >= 0], minlength=ch.shape[0]).astype(float)
                output_pmf = Pmf(freq / freq.sum()) if freq.sum() > 0 else None
            if output_pmf is None:
                raise DataError("no known symbols to derive an output distribution from")
            fallback = output_pmf.probs if isinstance(output_pmf, Pmf) else np.asarray(output_pmf, float)
        drawn = _sanitize_column_block(idx, ch, lut, seed, stream, fallback, workers, db.n)
        # write output symbols back into per-column indices
        parts = [lab.split(SYMBOL_SEP) if len(cols) > 1 else [lab] for lab in ch.output_labels]
        if any(len(p) != len(cols) for p in parts):
            raise DataError("channel output labels do not split into the public columns")
        for j, c in enumerate(cols):
            alph = alphabets[c]
            pos = {s: i for i, s in enumerate(alph)}
            code = []
            for p in parts:
                if p[j] not in pos:
                    pos[p[j]] = len(alph)
                    alph.append(p[j])
                code.append(pos[p[j]])
            out_rows[:, c] = np.asarray(code, dtype=np.int64)[drawn]

    keep = [k for k, a in enumerate(attrs) if a not in set(drop)]
    for d in drop:
        db.index(d)
    return Database(
        tuple(attrs[k] for k in keep),
        tuple(tuple(alphabets[k]) for k in keep),
        out_rows[:, keep],
    )


@dataclass(frozen=True)
class SanitizationReport:
    n: int
    target_D: float | None
    empirical_D: float
    analytic_equivocation: float
    plugin_equivocation: float
    private_entropy: float
    seed: int | None

    def to_dict(self):
        return asdict(self)

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text


def evaluate(
    db: Database,
    sdb: Database,
    channel: SanitizationChannel,
    joint: JointPmf | None = None,
    public=None,
    private=None,
    target_D: float | None = None,
    seed: int | None = None,
) -> SanitizationReport:
    """Empirical distortion and design/plug-in equivocation of a sanitized database.

    ``joint`` is the design law over the public and private attributes
    (default: fitted from ``db``). Distortion is Hamming on the public
    product symbol; the channel must be Markov (inputs are public symbols).
    """
    if db.n != sdb.n:
        raise DataError(f"row counts differ: {db.n} vs {sdb.n}")
    public = list(public) if public is not None else list(sdb.attributes)
    private = list(private) if private is not None else list(public)
    if joint is None:
        names = list(dict.fromkeys(public + private))
        joint = fit_empirical_pmf(db, names)

    def axes(names):
        try:
            return tuple(joint.names.index(n) for n in names)
        except ValueError as exc:
            raise DataError(f"design joint lacks attribute: {exc}") from None

    pub_ax, priv_ax = axes(public), axes(private)
    P = _pair_matrix(joint.table, priv_ax, pub_ax)
    r_labels = joint.product_labels(pub_ax)
    pos = {s: i for i, s in enumerate(channel.input_labels)}
    W = np.zeros((len(r_labels), channel.shape[1]))
    for r, lab in enumerate(r_labels):
        if lab in pos:
            W[r] = channel.matrix[pos[lab]]
        elif P[:, r].sum() > 0:
            raise DataError(f"design symbol {lab!r} has no channel row")
    J = P @ W
    q = J.sum(axis=0)
    ph = P.sum(axis=1)
    h_priv = entropy(Pmf(ph))
    analytic = max(_plogp(J) - _plogp(q), 0.0)

    # empirical distortion: any change in the public columns counts as 1
    orig_cols = db.indices(public)
    san_cols = sdb.indices(public)
    orig = np.column_stack([np.asarray(db.alphabets[c], dtype=object)[db.rows[:, c]] for c in orig_cols])
    san = np.column_stack([np.asarray(sdb.alphabets[c], dtype=object)[sdb.rows[:, c]] for c in san_cols])
    emp_D = float(np.mean(np.any(orig != san, axis=1)))

    # plug-in: empirical output frequencies with design posteriors
    out_pos = {s: i for i, s in enumerate(channel.output_labels)}
    san_labels = _product_labels(sdb, san_cols)
    sidx, _ = _product_index(sdb, san_cols)
    counts = np.bincount(sidx, minlength=len(san_labels)).astype(float)
    plug = 0.0
    for k, c in enumerate(counts):
        if c == 0:
            continue
        j = out_pos.get(san_labels[k])
        if j is None or q[j] <= 0:
            h = h_priv
        else:
            h = _plogp(J[:, j] / q[j])
        plug += c / sdb.n * h
    return SanitizationReport(
        n=db.n,
        target_D=target_D,
        empirical_D=emp_D,
        analytic_equivocation=analytic,
        plugin_equivocation=float(max(plug, 0.0)),
        private_entropy=h_priv,
        seed=seed,
    )
