"""Corpora, competitive-ratio sweeps and access-cost statistics.

Ratios are data words over LZ78 phrase count.  Every stream carries the
same two-word footer, so dropping it on both sides keeps the deterministic
identity ``words = 3 m`` exact.
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from .api import access_many, make_header, sequential_access
from .codec import Scheme, WordStream
from .encoder import AccessTrace, compress_with
from .errors import ParameterError
from .lz78 import SymbolsLike, as_symbols

# ---------------------------------------------------------------- corpora


def gen_random(n: int, seed: int = 0, alphabet: str = "bit") -> np.ndarray:
    if n < 1:
        raise ParameterError("n must be >= 1")
    hi = 2 if alphabet == "bit" else 256
    return np.random.default_rng(seed).integers(0, hi, n, dtype=np.uint8)


def gen_repetitive(n: int, period: int, seed: int = 0, alphabet: str = "bit",
                   unit: Optional[SymbolsLike] = None) -> np.ndarray:
    """``n`` symbols repeating a unit of length ``period`` (random unless given)."""
    if n < 1 or period < 1:
        raise ParameterError("n and period must be >= 1")
    if unit is None:
        u = gen_random(period, seed, alphabet)
    else:
        u = as_symbols(unit, alphabet)
        if u.size != period:
            raise ParameterError(f"unit has length {u.size}, period is {period}")
    return np.resize(u, n)


def _level(i: int) -> list[str]:
    return [format(j, f"0{i}b") for j in range(1 << i)]


def _lb_levels(k: int, ell: Optional[int]) -> list[str]:
    if k < 3:
        raise ParameterError("k must be >= 3")
    q = (1 << (k - 1)) // 4
    parts: list[str] = []
    for i in range(1, k):
        level = _level(i)
        if ell is not None and i == k - 1:
            if not 1 <= ell <= q:
                raise ParameterError(f"ell must lie in [1, {q}], got {ell}")
            level[q + ell - 1] = level[0] + "0"
        parts.extend(level)
    return parts


def gen_lb_S(k: int) -> str:
    """All binary strings of length 1..k-1, by length then lexicographically."""
    return "".join(_lb_levels(k, None))


def gen_lb_S_ell(k: int, ell: int) -> str:
    """``gen_lb_S(k)`` with its (q+ell)-th length-(k-1) string replaced by ``0^k``."""
    return "".join(_lb_levels(k, ell))


def gen_lb_extended(k: int, t: int, ell: Optional[int] = None, anchored: bool = False) -> str:
    """0-prefixed enumeration followed by the unary runs ``1, 11, ..., 1^t``.

    Without a leading lone ``"0"`` the greedy parse does not follow the
    enumeration (the first piece ``"00"`` parses as ``"0"`` plus a spill), so
    an ``ell`` edit can shift many later phrases.  ``anchored=True`` prepends
    that ``"0"``; then every enumerated piece is exactly one phrase and the
    ``ell`` variant differs from the base in a single codeword.
    """
    if t < 1:
        raise ParameterError("t must be >= 1")
    head = "".join("0" + s for s in _lb_levels(k, ell))
    return ("0" if anchored else "") + head + "".join("1" * i for i in range(1, t + 1))


def lb_max_ell(k: int) -> int:
    return (1 << (k - 1)) // 4


# ---------------------------------------------------------------- measurement


@dataclass(frozen=True)
class Config:
    scheme: str
    epsilon: Optional[float] = None
    alpha: Optional[float] = None

    @property
    def label(self) -> str:
        if self.alpha is not None:
            return f"{self.scheme}:alpha={self.alpha:g}"
        if self.epsilon is not None:
            return f"{self.scheme}:eps={self.epsilon:g}"
        return self.scheme


def alpha_sweep(alphas: Sequence[float] = (1 / 16, 1 / 8, 1 / 4)) -> list[Config]:
    """LZ78 as the ``alpha = 0`` point, then one randomized config per alpha."""
    return [Config("lz78")] + [Config("rand", alpha=a) for a in alphas]


def epsilon_sweep(epsilons: Sequence[float] = (0.5, 0.25, 0.125)) -> list[Config]:
    return [Config("rand", epsilon=e) for e in epsilons]


@dataclass
class AccessStats:
    samples: int = 0
    mean: float = 0.0
    median: float = 0.0
    p999: float = 0.0
    max: int = 0
    reads_mean: float = 0.0


@dataclass
class BenchRow:
    corpus: str
    scheme: str
    epsilon: float
    alpha: float
    B: int
    seed: int
    n: int
    m: int
    m1: int
    m2: int
    m3: int
    total: int
    ratio: float
    access_mean: float = 0.0
    access_median: float = 0.0
    access_p999: float = 0.0
    reads_mean: float = 0.0

    def accounting_ok(self) -> bool:
        """``total`` (data words) equals the per-codeword word-count sum."""
        per = 3 if self.scheme == "det" else 1
        return (self.total == per * self.m1 + 5 * self.m2 + 2 * self.m3
                and self.m1 + self.m2 == self.m)


BenchReport = list  # list[BenchRow]

CSV_COLUMNS = [f.name for f in dataclasses.fields(BenchRow)]


def measure_access(stream: WordStream, sample_count: int = 1000, seed: int = 0) -> AccessStats:
    """Node visits over uniformly random positions (codewords read + link hops)."""
    if sample_count <= 0 or stream.n == 0:
        return AccessStats()
    ells = np.random.default_rng(seed).integers(1, stream.n + 1, sample_count)
    if stream.header.scheme == Scheme.BASELINE:
        rows = []
        for ell in ells:
            t = AccessTrace()
            sequential_access(stream, int(ell), t)
            rows.append((t.codewords_read, t.parent_hops, t.spanner_hops))
        traces = np.asarray(rows, np.int64)
    else:
        _, traces = access_many(stream, ells, with_traces=True)
    visits = traces.sum(axis=1)
    return AccessStats(int(sample_count), float(visits.mean()), float(np.median(visits)),
                       float(np.percentile(visits, 99.9)), int(visits.max()),
                       float(traces[:, 0].mean()))


def _scheme_name(scheme: Scheme) -> str:
    return {Scheme.BASELINE: "lz78", Scheme.DETERMINISTIC: "det", Scheme.RANDOMIZED: "rand"}[scheme]


def row_for(stream: WordStream, corpus: str, config: Config, seed: int,
            access_samples: int = 0) -> BenchRow:
    c = stream.counts
    h = stream.header
    m = max(c["m"], 1)
    st = measure_access(stream, access_samples, seed) if access_samples else AccessStats()
    return BenchRow(corpus, _scheme_name(h.scheme),
                    float(config.epsilon or 0.0), float(config.alpha or 0.0),
                    h.B, seed, stream.n, c["m"], c["m1"], c["m2"], c["m3"],
                    stream.data_words, stream.data_words / m,
                    st.mean, st.median, st.p999, st.reads_mean)


def measure_competitive(x: SymbolsLike, configs: Iterable[Config], seeds: Iterable[int] = (0,),
                        corpus: str = "input", alphabet: str = "bit",
                        access_samples: int = 0) -> BenchReport:
    """One row per (config, seed).  Schemes without randomness still get one row per seed."""
    sym = as_symbols(x, alphabet)
    n_max = max(sym.size, 1)
    rows: BenchReport = []
    for seed, cfg in itertools.product(list(seeds), list(configs)):
        header = make_header(cfg.scheme, n_max, alphabet, epsilon=cfg.epsilon,
                             alpha=cfg.alpha, seed=seed)
        stream = compress_with(header, sym)
        rows.append(row_for(stream, corpus, cfg, seed, access_samples))
    return rows


def expected_ratio(alpha: float, B: int) -> float:
    """First-order overhead: 4 extra words per special, 2 per block of B words."""
    return 1 + 4 * alpha + (2 / B if B else 0.0)


# ---------------------------------------------------------------- CSV


def emit_csv(report: BenchReport, dest: Union[str, TextIO]) -> None:
    def write(fh):
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in report:
            w.writerow(dataclasses.asdict(r))

    if isinstance(dest, str):
        with open(dest, "w", newline="") as fh:
            write(fh)
    else:
        write(dest)


def read_csv(src: Union[str, TextIO]) -> BenchReport:
    types = {f.name: f.type for f in dataclasses.fields(BenchRow)}
    conv = {"str": str, "int": int, "float": float}

    def read(fh):
        return [BenchRow(**{k: conv[types[k]](v) for k, v in rec.items()})
                for rec in csv.DictReader(fh)]

    if isinstance(src, str):
        with open(src, newline="") as fh:
            return read(fh)
    return read(src)


def summarize(report: BenchReport) -> str:
    lines = [f"{'corpus':<14}{'scheme':<7}{'eps':>7}{'alpha':>8}{'B':>6}{'seed':>6}"
             f"{'m':>10}{'words':>11}{'ratio':>8}{'visits':>9}"]
    for r in report:
        lines.append(f"{r.corpus:<14}{r.scheme:<7}{r.epsilon:>7.3g}{r.alpha:>8.4g}{r.B:>6}"
                     f"{r.seed:>6}{r.m:>10}{r.total:>11}{r.ratio:>8.4f}{r.access_mean:>9.1f}")
    return "\n".join(lines)
