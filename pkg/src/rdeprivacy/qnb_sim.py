"""Small-blocklength quantize-and-bin coding simulator.

The encoder quantizes a source block x^n to the first codeword u^n(w) of a
random codebook that is jointly typical with it, then transmits only the
index J of the bin holding w. The user recovers w from (J, z^n) by joint
typicality (falling back to maximum likelihood within the bin) and
reconstructs x_hat_i = f(u_i, z_i).

Everything here is desk-scale: codebooks and enumeration spaces are capped at
2**20 entries. The point is to watch the achievability mechanics (covering,
binning, side-information decoding, equivocation accounting) at n of 8-16,
not to approach the asymptotic region.

Codebook size and bin count are

    M = ceil(2^{n (I(X;U) + rate_margin)}),
    B = ceil(2^{n (I(X;U|Z) + bin_margin)}),

with bins formed from contiguous index blocks whose sizes differ by at most
one. With ``bin_margin == rate_margin`` each bin holds about 2^{n I(U;Z)}
codewords, which leaves the in-bin decoder with no slack at finite n; a
larger ``bin_margin`` shrinks the bins.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import CapExceededError, DataError, ValidationError
from .infotheory import JointPmf, _plogp, conditional_entropy, mutual_information
from .sanitizer import default_workers

HARD_CAP = 1 << 20
_NEG = -1e300


def _row_stochastic(m, rows, what):
    m = np.array(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != rows:
        raise ValidationError(f"{what} must have {rows} rows, got shape {m.shape}")
    if np.any(m < 0) or np.any(np.abs(m.sum(axis=1) - 1.0) > 1e-9):
        raise ValidationError(f"{what} rows must be probability vectors")
    return m / m.sum(axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class CodingConfig:
    """Source, side-information law, auxiliary channel and coding parameters.

    ``source`` covers the database attributes only; its flattened symbol is
    the encoder input x. ``side_channel[x, z] = p(z | x)`` (``None``: no side
    information). ``aux_channel`` is p(u | x), or p(u | x, z) with rows
    ordered ``x * |Z| + z`` when ``informed``. ``reconstruction[u, z]`` gives
    the public-alphabet index of x_hat (default x_hat = u).
    """

    n: int
    source: JointPmf
    aux_channel: np.ndarray
    side_channel: np.ndarray | None = None
    rate_margin: float = 0.1
    bin_margin: float | None = None
    typicality_delta: float = 0.1
    seed: int = 0
    trials: int = 1000
    informed: bool = False
    reconstruction: np.ndarray | None = None
    distortion: np.ndarray | None = None
    cap: int = HARD_CAP

    def __post_init__(self):
        if int(self.n) < 2:
            raise ValidationError(f"blocklength must be >= 2, got {self.n}")
        if self.rate_margin <= 0:
            raise ValidationError("rate_margin must be > 0")
        if self.bin_margin is None:
            object.__setattr__(self, "bin_margin", self.rate_margin)
        if self.bin_margin <= 0:
            raise ValidationError("bin_margin must be > 0")
        if not 0 <= self.typicality_delta:
            raise ValidationError("typicality_delta must be >= 0")
        if self.cap > HARD_CAP:
            raise ValidationError(f"cap cannot exceed {HARD_CAP}")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        nx = self.source.table.size
        side = np.ones((nx, 1)) if self.side_channel is None else self.side_channel
        side = _row_stochastic(side, nx, "side_channel")
        object.__setattr__(self, "side_channel", side)
        rows = nx * side.shape[1] if self.informed else nx
        object.__setattr__(self, "aux_channel", _row_stochastic(self.aux_channel, rows, "aux_channel"))
        nu, nz = self.aux_channel.shape[1], side.shape[1]
        nr = int(np.prod([self.source.shape[a] for a in self.source.public]))
        if self.reconstruction is None:
            if nu != nr:
                raise ValidationError(
                    f"default reconstruction x_hat = u needs |U| = |X_r| ({nu} != {nr}); supply one"
                )
            rec = np.tile(np.arange(nu)[:, None], (1, nz))
        else:
            rec = np.array(self.reconstruction, dtype=np.int64)
            if rec.shape != (nu, nz) or rec.min() < 0 or rec.max() >= nr:
                raise ValidationError(f"reconstruction must be a ({nu}, {nz}) table of public indices")
        object.__setattr__(self, "reconstruction", rec)
        rho = 1.0 - np.eye(nr) if self.distortion is None else np.array(self.distortion, dtype=float)
        if rho.shape != (nr, nr):
            raise ValidationError(f"distortion must be {nr}x{nr}")
        object.__setattr__(self, "distortion", rho)

    # -- alphabets and laws -------------------------------------------------

    @property
    def nx(self):
        return self.source.table.size

    @property
    def nz(self):
        return self.side_channel.shape[1]

    @property
    def nu(self):
        return self.aux_channel.shape[1]

    @property
    def has_side_info(self):
        return self.nz > 1

    @cached_property
    def px(self):
        return self.source.table.ravel()

    @cached_property
    def xzu(self) -> np.ndarray:
        """Joint table p(x, z, u)."""
        pxz = self.px[:, None] * self.side_channel
        if self.informed:
            aux = self.aux_channel.reshape(self.nx, self.nz, self.nu)
        else:
            aux = np.broadcast_to(self.aux_channel[:, None, :], (self.nx, self.nz, self.nu))
        return pxz[:, :, None] * aux

    @cached_property
    def _maps(self):
        """h(x) and r(x): private/public indices of each flattened source symbol."""
        shape = self.source.shape
        idx = np.unravel_index(np.arange(self.nx), shape)

        def flat(axes):
            if not axes:
                return np.zeros(self.nx, dtype=np.int64), 1
            dims = tuple(shape[a] for a in axes)
            return np.ravel_multi_index(tuple(idx[a] for a in axes), dims), int(np.prod(dims))

        h, nh = flat(self.source.private)
        r, nr = flat(self.source.public)
        return h, nh, r, nr

    @cached_property
    def pu(self):
        return self.xzu.sum(axis=(0, 1))

    @cached_property
    def input_u(self) -> np.ndarray:
        """Joint law of (encoder input, u) used for covering typicality."""
        if self.informed:
            return self.xzu.reshape(self.nx * self.nz, self.nu)
        return self.xzu.sum(axis=1)

    @cached_property
    def uz(self) -> np.ndarray:
        return self.xzu.sum(axis=0).T

    @cached_property
    def info(self) -> dict:
        j = JointPmf(self.xzu)
        i_code = mutual_information(j, (0, 1) if self.informed else (0,), (2,))
        i_uz = mutual_information(j, (1,), (2,))
        i_bin = max(conditional_entropy(j, (2,), (1,)) - conditional_entropy(j, (2,), (0, 1)), 0.0)
        h, nh, r, nr = self._maps
        # p(h, z, u)
        hzu = np.zeros((nh, self.nz, self.nu))
        np.add.at(hzu, h, self.xzu)
        h_given_uz = _plogp(hzu) - _plogp(hzu.sum(axis=0))
        hz_ = hzu.sum(axis=2)
        # design distortion E rho(x_r, f(u, z))
        xhat = self.reconstruction  # (u, z)
        rho_xzu = self.distortion[r][:, xhat.T]  # (x, z, u)
        return {
            "I_XU": float(i_code),
            "I_UZ": float(i_uz),
            "I_XU_given_Z": float(i_bin),
            "H_Xh": _plogp(hzu.sum(axis=(1, 2))),
            "H_Xh_given_Z": max(_plogp(hz_) - _plogp(hz_.sum(axis=0)), 0.0),
            "H_Xh_given_UZ": max(float(h_given_uz), 0.0),
            "design_D": float((self.xzu * rho_xzu).sum()),
        }

    @cached_property
    def sizes(self):
        """(M, B) after checking the cap."""
        n = int(self.n)
        code_exp = n * (self.info["I_XU"] + self.rate_margin)
        bin_exp = n * (self.info["I_XU_given_Z"] + self.bin_margin)
        log_cap = math.log2(self.cap)
        if code_exp > log_cap:
            raise CapExceededError(
                f"codebook size 2^{code_exp:.2f} exceeds cap 2^{log_cap:.0f}",
                requested=2.0**code_exp,
                cap=self.cap,
            )
        M = math.ceil(2.0**code_exp - 1e-9)
        B = min(M, math.ceil(2.0**bin_exp - 1e-9))
        return M, B

    def with_n(self, n):
        return replace(self, n=int(n))

    @classmethod
    def from_dict(cls, d, n=None):
        try:
            src = d["source"]
            source = JointPmf.from_dict(src) if isinstance(src, dict) and "table" in src else JointPmf(
                src["probs"] if isinstance(src, dict) else src
            )
            kw = {
                k: d[k]
                for k in (
                    "rate_margin",
                    "bin_margin",
                    "typicality_delta",
                    "seed",
                    "trials",
                    "informed",
                    "reconstruction",
                    "distortion",
                    "side_channel",
                )
                if k in d
            }
            nn = n if n is not None else (d["n"][0] if isinstance(d["n"], list) else d["n"])
            return cls(n=int(nn), source=source, aux_channel=d["aux_channel"], **kw)
        except KeyError as exc:
            raise DataError(f"coding config is missing key {exc}") from None


def binary_demo_config(
    n: int,
    flip: float = 0.1,
    aux_flip: float = 0.03,
    rate_margin: float = 0.1,
    bin_margin: float = 0.5,
    typicality_delta: float = 0.1,
    trials: int = 2000,
    seed: int = 1,
    informed: bool = False,
) -> CodingConfig:
    """Uniform binary X (public and private), Z = X xor Bern(flip), U = X xor Bern(aux_flip)."""
    bsc = lambda a: np.array([[1 - a, a], [a, 1 - a]])  # noqa: E731
    aux = bsc(aux_flip)
    if informed:
        aux = np.repeat(aux, 2, axis=0)
    return CodingConfig(
        n=n,
        source=JointPmf([0.5, 0.5], names=("X",)),
        aux_channel=aux,
        side_channel=bsc(flip),
        rate_margin=rate_margin,
        bin_margin=bin_margin,
        typicality_delta=typicality_delta,
        seed=seed,
        trials=trials,
        informed=informed,
    )


# ---------------------------------------------------------------------------
# codebook


@dataclass(frozen=True, eq=False)
class Codebook:
    words: np.ndarray  # (M, n) letter indices
    bin_edges: np.ndarray  # (B + 1,), bin k holds [edges[k], edges[k+1])

    @property
    def M(self):
        return self.words.shape[0]

    @property
    def n_bins(self):
        return self.bin_edges.size - 1

    def bin_of(self, w):
        return np.searchsorted(self.bin_edges, w, side="right") - 1

    def members(self, j):
        if not 0 <= j < self.n_bins:
            raise ValueError(f"bin index {j} out of range [0, {self.n_bins})")
        lo, hi = self.bin_edges[j], self.bin_edges[j + 1]
        if hi <= lo:
            raise RuntimeError(f"bin {j} is empty")
        return np.arange(lo, hi)


def build_codebook(config: CodingConfig) -> Codebook:
    """M codewords drawn i.i.d. from p(u), grouped into B contiguous bins."""
    M, B = config.sizes
    rng = np.random.default_rng([int(config.seed), int(config.n), 0])
    words = rng.choice(config.nu, size=(M, int(config.n)), p=config.pu)
    edges = -(-np.arange(B + 1, dtype=np.int64) * M // B)  # ceil(k M / B)
    return Codebook(words, edges)


# ---------------------------------------------------------------------------
# joint types


def _pair_counts(a, b, na, nb):
    """counts[i, j, s, t] = #{positions: a_i = s, b_j = t} for blocks a (I, n), b (J, n)."""
    # only the (na-1)(nb-1) leading cells need products; the rest follow from
    # the per-sequence letter counts
    A = np.stack([(a == s) for s in range(na)]).astype(np.float32)  # (na, I, n)
    Bm = np.stack([(b == t) for t in range(nb)]).astype(np.float32)  # (nb, J, n)
    out = np.empty((a.shape[0], b.shape[0], na, nb), dtype=np.float32)
    if na > 1 and nb > 1:
        out[:, :, :-1, :-1] = np.einsum("sin,tjn->ijst", A[:-1], Bm[:-1], optimize=True)
    ca = A.sum(axis=2).T  # (I, na)
    cb = Bm.sum(axis=2).T  # (J, nb)
    out[:, :, :-1, -1] = ca[:, None, :-1] - out[:, :, :-1, :-1].sum(axis=3)
    out[:, :, -1, :] = cb[None, :, :] - out[:, :, :-1, :].sum(axis=2)
    return out


def _typical(counts, law, n, delta):
    freq = counts / n
    ok = np.all(np.abs(freq - law) <= delta + 1e-12, axis=(-2, -1))
    zero = law <= 0
    if zero.any():
        ok &= ~np.any((counts > 0) & zero, axis=(-2, -1))
    return ok


def _encoder_inputs(config, x, z):
    x = np.atleast_2d(np.asarray(x, dtype=np.int64))
    if config.informed:
        if z is None:
            raise ValidationError("informed encoding needs the side-information sequence")
        z = np.broadcast_to(np.atleast_2d(np.asarray(z, dtype=np.int64)), x.shape)
        return x * config.nz + z, config.nx * config.nz
    return x, config.nx


def _onehot(seq, k, dtype=np.float32):
    return np.stack([(seq == s) for s in range(k)]).astype(dtype)  # (k, I, n)


def _typical_bounds(law, n, delta):
    """Integer count range per cell equivalent to |count/n - p| <= delta."""
    lo = np.maximum(np.ceil(n * (law - delta) - 1e-9), 0.0)
    hi = np.floor(n * (law + delta) + 1e-9)
    hi[law <= 0] = 0.0
    return lo, hi


def _typical_block(Ao, Bo, lo, hi):
    """(I, J) mask of jointly typical pairs from one-hot blocks Ao (na, I, n), Bo (nb, J, n)."""
    na, nb = lo.shape
    ca, cb = Ao.sum(axis=2), Bo.sum(axis=2)
    I, J = Ao.shape[1], Bo.shape[1]
    ok = np.ones((I, J), dtype=bool)
    colsum = np.zeros((nb, I, J), dtype=np.float32)

    def check(c, s, t):
        ok[...] &= (c >= lo[s, t]) & (c <= hi[s, t])

    for s in range(na - 1):
        rowsum = np.zeros((I, J), dtype=np.float32)
        for t in range(nb - 1):
            c = Ao[s] @ Bo[t].T
            check(c, s, t)
            rowsum += c
            colsum[t] += c
        c = ca[s][:, None] - rowsum
        check(c, s, nb - 1)
        colsum[nb - 1] += c
    for t in range(nb):
        check(cb[t][None, :] - colsum[t], na - 1, t)
    return ok


def _encode_many(x, codebook, config, z=None, rows=4096, cols=2048):
    """Per source block: first typical codeword index (``-1`` if none), and
    the same index with maximum-likelihood codewords filled in for the misses.
    """
    inp, nin = _encoder_inputs(config, x, z)
    law = config.input_u
    lo, hi = _typical_bounds(law, int(config.n), config.typicality_delta)
    words = _onehot(codebook.words, config.nu)  # (nu, M, n)
    N = inp.shape[0]
    first = np.full(N, -1, dtype=np.int64)
    for a in range(0, N, rows):
        blk = np.arange(a, min(a + rows, N))
        for w0 in range(0, codebook.M, cols):
            if blk.size == 0:
                break
            ok = _typical_block(_onehot(inp[blk], nin), words[:, w0 : w0 + cols], lo, hi)
            hit = ok.any(axis=1)
            first[blk[hit]] = w0 + ok[hit].argmax(axis=1)
            blk = blk[~hit]

    filled = first.copy()
    todo = np.flatnonzero(first < 0)
    if todo.size:
        logp = np.where(law > 0, np.log(np.where(law > 0, law, 1.0)), _NEG)
        for a in range(0, todo.size, rows):
            blk = todo[a : a + rows]
            Ao = _onehot(inp[blk], nin)
            best = np.full(blk.size, -np.inf)
            best_i = np.zeros(blk.size, dtype=np.int64)
            for w0 in range(0, codebook.M, cols):
                # summed over exact cell counts in a fixed order, so codewords
                # with equal joint types tie exactly and argmax keeps the lowest
                ll = np.zeros((blk.size, min(cols, codebook.M - w0)))
                for s in range(nin):
                    for t in range(config.nu):
                        ll += (Ao[s] @ words[t, w0 : w0 + cols].T).astype(float) * logp[s, t]
                k = ll.argmax(axis=1)
                v = ll[np.arange(blk.size), k]
                better = v > best
                best[better] = v[better]
                best_i[better] = w0 + k[better]
            filled[blk] = best_i
    return first, filled


def encode(source_seq, codebook: Codebook, config: CodingConfig, z_seq=None):
    """``(W, J)`` for the first codeword jointly typical with the block, else ``None``.

    ``z_seq`` is needed only for the informed encoder.
    """
    x = np.asarray(source_seq, dtype=np.int64)
    if x.shape != (int(config.n),):
        raise ValueError(f"source block must have length {config.n}, got shape {x.shape}")
    first, _ = _encode_many(x[None, :], codebook, config, z_seq)
    if first[0] < 0:
        return None
    w = int(first[0])
    return w, int(codebook.bin_of(w))


def decode(J: int, z_seq, codebook: Codebook, config: CodingConfig) -> int:
    """Recover the codeword index from its bin and the side information.

    The unique bin member jointly typical with ``z_seq`` wins; otherwise the
    member maximizing p(z^n | u^n), lowest index on ties.
    """
    members = codebook.members(int(J))
    if members.size == 1:
        return int(members[0])
    z = np.asarray(z_seq, dtype=np.int64)
    if z.shape != (int(config.n),):
        raise ValueError(f"side-information block must have length {config.n}")
    words = codebook.words[members]
    c = _pair_counts(words, z[None, :], config.nu, config.nz)[:, 0]  # (members, u, z)
    typ = _typical(c, config.uz, int(config.n), config.typicality_delta)
    if typ.sum() == 1:
        return int(members[np.flatnonzero(typ)[0]])
    pu = config.uz.sum(axis=1, keepdims=True)
    cond = np.divide(config.uz, pu, out=np.zeros_like(config.uz), where=pu > 0)
    with np.errstate(divide="ignore"):
        logp = np.where(cond > 0, np.log(np.where(cond > 0, cond, 1.0)), _NEG)
    ll = np.zeros(members.size)
    for u in range(config.nu):  # fixed summation order keeps exact ties exact
        for zz in range(config.nz):
            ll += c[:, u, zz].astype(float) * logp[u, zz]
    return int(members[int(np.argmax(ll))])


# ---------------------------------------------------------------------------
# experiment


@dataclass(frozen=True)
class TrialOutcome:
    decoded_ok: bool
    distortion: float
    bin_index: int
    codeword_index: int
    encoded: bool


@dataclass
class ExperimentSummary:
    n: int
    M: int
    bins: int
    trials: int
    err_rate: float
    encode_fail_rate: float
    mean_distortion: float
    design_distortion: float
    plugin_equiv: float | None
    analytic_equiv: float
    zeta: float | None
    equiv_exact: bool
    equiv_samples: int
    rate_bits: float
    nominal_rate: float
    informed: bool
    info: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def _sample_trial(config, rng):
    n = int(config.n)
    x = rng.choice(config.nx, size=n, p=config.px)
    u01 = rng.random(n)
    zc = np.cumsum(config.side_channel, axis=1)
    z = np.minimum((u01[:, None] >= zc[x]).sum(axis=1), config.nz - 1)
    return x, z


def run_trial(config: CodingConfig, codebook: Codebook, trial: int) -> TrialOutcome:
    rng = np.random.default_rng([int(config.seed), int(config.n), trial + 1])
    x, z = _sample_trial(config, rng)
    first, filled = _encode_many(x[None, :], codebook, config, z if config.informed else None)
    encoded = bool(first[0] >= 0)
    w = int(filled[0])
    j = int(codebook.bin_of(w))
    w_hat = decode(j, z, codebook, config)
    u = codebook.words[w_hat]
    xhat = config.reconstruction[u, z]
    r = config._maps[2][x]
    dist = float(config.distortion[r, xhat].mean())
    return TrialOutcome(w_hat == w, dist, j, w, encoded)


def _sequences(k, n):
    return np.stack(np.unravel_index(np.arange(k**n), (k,) * n), axis=1).astype(np.int64)


def plugin_equivocation(
    config: CodingConfig, codebook: Codebook, z_samples=None, max_samples=256, budget=1 << 27
):
    """(1/n) H(X_h^n | J, Z^n) for the given codebook, in bits.

    Source blocks are enumerated exhaustively. Side-information blocks are
    enumerated too when that space is small, otherwise averaged over
    ``z_samples`` (draws from p(z^n)). The informed encoder has to re-encode
    every source block for each z block, so there the number of z blocks is
    also limited to about ``budget / (|X|^n M)``. Returns
    ``(value, exact, n_z)``, or ``(None, False, 0)`` when the source space
    exceeds the cap.
    """
    n = int(config.n)
    nx, nz = config.nx, config.nz
    if nx**n > config.cap:
        return None, False, 0
    xs = _sequences(nx, n)
    h_map, nh, _, _ = config._maps
    hseq = (h_map[xs] * (nh ** np.arange(n - 1, -1, -1))).sum(axis=1)
    logpx = np.log(config.px, where=config.px > 0, out=np.full(nx, _NEG))[xs].sum(axis=1)
    side = config.side_channel
    logpz = np.log(side, where=side > 0, out=np.full(side.shape, _NEG))

    exact = nz**n <= 4096 and nx**n * nz**n <= (1 << 24)
    if config.informed:
        per_z = nx**n * codebook.M
        exact = exact and nz**n * per_z <= budget
        max_samples = min(max_samples, max(8, budget // per_z))
    if exact:
        zs = _sequences(nz, n)
    else:
        if z_samples is None or len(z_samples) == 0:
            return None, False, 0
        zs = np.asarray(z_samples[:max_samples], dtype=np.int64)

    if not config.informed:
        J_all = codebook.bin_of(_encode_many(xs, codebook, config)[1])

    total, weight_sum = 0.0, 0.0
    for z in zs:
        lw = logpx + logpz[xs, z[None, :]].sum(axis=1)
        top = lw.max()
        w = np.exp(lw - top)
        pz = float(np.exp(top) * w.sum()) if exact else 1.0
        w /= w.sum()
        if config.informed:
            J = codebook.bin_of(_encode_many(xs, codebook, config, np.broadcast_to(z, xs.shape))[1])
        else:
            J = J_all
        key = hseq * codebook.n_bins + J
        _, inv = np.unique(key, return_inverse=True)
        p_hj = np.bincount(inv.ravel(), weights=w)
        p_j = np.bincount(J, weights=w, minlength=codebook.n_bins)
        total += pz * (_plogp(p_hj) - _plogp(p_j))
        weight_sum += pz
    return max(total / weight_sum / n, 0.0), exact, len(zs)


def run_experiment(
    config: CodingConfig, codebook: Codebook | None = None, workers: int | None = None
) -> ExperimentSummary:
    """Run ``config.trials`` independent blocks and the equivocation accounting.

    Trial ``t`` draws from its own seed ``(seed, n, t + 1)``, so the summary
    does not depend on ``workers``.
    """
    codebook = codebook or build_codebook(config)
    workers = default_workers() if workers is None else max(1, int(workers))
    trials = range(config.trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            outcomes = list(ex.map(lambda t: run_trial(config, codebook, t), trials))
    else:
        outcomes = [run_trial(config, codebook, t) for t in trials]
    errs = sum(not o.decoded_ok for o in outcomes)
    fails = sum(not o.encoded for o in outcomes)
    dist = sum(o.distortion for o in outcomes)
    z_samples = []
    for t in range(min(config.trials, 256)):
        rng = np.random.default_rng([int(config.seed), int(config.n), t + 1])
        z_samples.append(_sample_trial(config, rng)[1])
    info = config.info
    plug, exact, nzs = plugin_equivocation(config, codebook, np.array(z_samples))
    analytic = info["H_Xh_given_UZ"]
    M, B = config.sizes
    return ExperimentSummary(
        n=int(config.n),
        M=M,
        bins=B,
        trials=config.trials,
        err_rate=errs / config.trials,
        encode_fail_rate=fails / config.trials,
        mean_distortion=dist / config.trials,
        design_distortion=info["design_D"],
        plugin_equiv=plug,
        analytic_equiv=analytic,
        zeta=None if plug is None else analytic - plug,
        equiv_exact=exact,
        equiv_samples=nzs,
        rate_bits=math.log2(B) / int(config.n),
        nominal_rate=info["I_XU_given_Z"] + config.bin_margin,
        informed=config.informed,
        info=dict(info),
    )


def run_sweep(config: CodingConfig, blocklengths, workers: int | None = None) -> list:
    return [run_experiment(config.with_n(n), workers=workers) for n in blocklengths]


def write_summary(rows, path=None) -> str:
    text = json.dumps({"rows": [r.to_dict() for r in rows]}, indent=2)
    if path is not None:
        Path(path).write_text(text)
    return text


def load_config(path) -> tuple:
    """Read a config JSON; returns ``(base_config, blocklengths)``."""
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read coding config {path}: {exc}") from None
    ns = d.get("n", [8])
    ns = ns if isinstance(ns, list) else [ns]
    return CodingConfig.from_dict(d, n=ns[0]), [int(v) for v in ns]
