"""``ralz`` command line.

Exit statuses: 0 success, 2 bad parameters or positions, 3 I/O failure,
4 malformed or truncated stream, 5 verification mismatch, 6 the stream has
no random access (plain LZ78).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from contextlib import contextmanager
from typing import BinaryIO, Iterator, Optional

import numpy as np

from . import harness
from .api import access_many, extract, make_header
from .codec import (HEADER_STRUCT, BitPacker, Header, Scheme, WordStream, read_frames,
                    word_width, write_frame)
from .encoder import (AccessTrace, Compressor, accounting, accounting_holds, decompress,
                      open_prefix)
from .errors import (MalformedStreamError, NoRandomAccessError, ParameterError,
                     RalzError)
from .lz78 import as_symbols, symbols_to_text
from .rand import audit_randomized
from .spanner import block_length

EXIT_OK = 0
EXIT_PARAM = 2
EXIT_IO = 3
EXIT_MALFORMED = 4
EXIT_MISMATCH = 5
EXIT_NO_ACCESS = 6

CHUNK = 1 << 16


class Mismatch(Exception):
    pass


# ---------------------------------------------------------------- I/O helpers


@contextmanager
def _open_in(path: str) -> Iterator[BinaryIO]:
    if path == "-":
        yield sys.stdin.buffer
    else:
        with open(path, "rb") as fh:
            yield fh


@contextmanager
def _open_out(path: Optional[str]) -> Iterator[BinaryIO]:
    if path in (None, "-"):
        yield sys.stdout.buffer
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as fh:
            yield fh


def _clean(data: bytes, alphabet: str) -> bytes:
    # bit-mode text files usually end in a newline; whitespace is not data
    return b"".join(data.split()) if alphabet == "bit" else data


def read_input(path: str, alphabet: str) -> np.ndarray:
    with _open_in(path) as fh:
        return as_symbols(_clean(fh.read(), alphabet), alphabet)


def read_stream(path: str, framed: bool = False) -> WordStream:
    """Load a stream file; a file without its footer opens as a readable prefix."""
    with _open_in(path) as fh:
        if framed:
            header = Header.unpack(fh.read(HEADER_STRUCT.size))
            frames = list(read_frames(fh, header.w))
            words = np.concatenate(frames) if frames else np.zeros(0, np.int64)
        else:
            header, words = WordStream.split_bytes(fh.read())
    dp = header.delim_position
    for cut in (words.size, words.size - 1):  # the unframed body may carry a pad word
        if cut >= 2 and words[cut - 2] == dp:
            stream = WordStream(header, words[:cut - 2], int(words[cut - 1]), True)
            if _is_footer(stream):
                return stream
    return open_prefix(header, words)


def _is_footer(stream: WordStream) -> bool:
    # A cut right after a position codeword also ends in [DP, p], but p is one
    # past the encoded phrases while the footer's n never exceeds them.
    try:
        total = open_prefix(stream.header, stream.words)
    except RalzError:
        return False
    return (total.data_words == stream.data_words
            and total.n - 1 <= stream.n <= total.n <= stream.header.n_max + 1)


def _emit_symbols(fh: BinaryIO, sym: np.ndarray, alphabet: str, fmt: str) -> None:
    if fmt == "int":
        fh.write((" ".join(map(str, sym.tolist())) + "\n").encode())
    else:
        fh.write(symbols_to_text(sym, alphabet))


def _print_trace(t: AccessTrace) -> None:
    print(f"codewords_read={t.codewords_read} parent_hops={t.parent_hops} "
          f"spanner_hops={t.spanner_hops} node_visits={t.node_visits}", file=sys.stderr)


def _header_from_args(args, n_max: int) -> Header:
    return make_header(args.scheme, n_max, args.alphabet, epsilon=args.epsilon,
                       alpha=args.alpha, seed=args.seed)


# ---------------------------------------------------------------- commands


def cmd_compress(args) -> int:
    if args.stream or args.framed:
        if args.n_max is None:
            raise ParameterError("streaming compression needs --n-max up front")
        return _compress_streaming(args)
    x = read_input(args.input, args.alphabet)
    header = _header_from_args(args, args.n_max or max(x.size, 1))
    c = Compressor(header)
    c.push(x)
    c.finalize()
    with _open_out(args.output) as out:
        out.write(c.stream().to_bytes())
    return EXIT_OK


def _compress_streaming(args) -> int:
    header = _header_from_args(args, args.n_max)
    c = Compressor(header)
    packer = BitPacker(header.w)
    with _open_in(args.input) as src, _open_out(args.output) as out:
        out.write(header.pack())

        def emit(words):
            if args.framed:
                if words.size:
                    write_frame(out, words, header.w)
            else:
                out.write(packer.feed(words))
            out.flush()

        while True:
            chunk = src.read1(CHUNK) if hasattr(src, "read1") else src.read(CHUNK)
            if not chunk:
                break
            emit(c.push(_clean(chunk, args.alphabet)))
        emit(c.finalize())
        if args.framed:
            write_frame(out, np.zeros(0, np.int64), header.w)
        else:
            out.write(packer.flush())
    return EXIT_OK


def cmd_decompress(args) -> int:
    stream = read_stream(args.input, args.framed)
    sym = decompress(stream) if stream.finalized else _prefix_symbols(stream)
    with _open_out(args.output) as out:
        out.write(symbols_to_text(sym, stream.header.alphabet))
    return EXIT_OK


def _prefix_symbols(stream: WordStream) -> np.ndarray:
    full = WordStream(stream.header, stream.words, stream.n, True)
    return decompress(full)


def _parse_range(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError:
        raise ParameterError(f"range must look like L1:L2, got {text!r}") from None
    if a > b:
        raise ParameterError(f"range start {a} exceeds end {b}")
    return a, b


def cmd_access(args) -> int:
    stream = read_stream(args.input, args.framed)
    ells = np.asarray(args.pos, np.int64)
    out, traces = access_many(stream, ells, with_traces=True)
    with _open_out(None) as fh:
        _emit_symbols(fh, out, stream.header.alphabet, args.format)
        if args.format == "raw" and sys.stdout.isatty():
            fh.write(b"\n")
    if args.trace:
        for row in traces:
            _print_trace(AccessTrace.from_row(row))
    return EXIT_OK


def cmd_extract(args) -> int:
    stream = read_stream(args.input, args.framed)
    a, b = _parse_range(args.range)
    trace = AccessTrace()
    sym = extract(stream, a, b, trace)
    with _open_out(args.output) as fh:
        _emit_symbols(fh, sym, stream.header.alphabet, args.format)
    if args.trace:
        _print_trace(trace)
    return EXIT_OK


def cmd_verify(args) -> int:
    stream = read_stream(args.input, args.framed)
    x = read_input(args.original, stream.header.alphabet)
    ok = True

    def report(name: str, passed: bool, detail: str = "") -> None:
        nonlocal ok
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}{'  ' + detail if detail else ''}")

    kind = "full stream" if stream.finalized else f"prefix of {stream.n} symbols"
    got = decompress(stream) if stream.finalized else _prefix_symbols(stream)
    n = min(stream.n, x.size)
    want = x if stream.finalized else x[:n]
    report("roundtrip", got[:n].size == want.size and np.array_equal(got[:n], want), kind)

    acc = accounting(stream)
    report("accounting", accounting_holds(acc),
           f"m={acc['m']} m1={acc['m1']} m2={acc['m2']} m3={acc['m3']} total={acc['total']}")

    if stream.header.scheme == Scheme.BASELINE:
        print("SKIP  access (plain LZ78 has no random access)")
    elif n:
        rng = np.random.default_rng(args.seed)
        ells = rng.integers(1, n + 1, min(args.samples, n))
        report("access", np.array_equal(access_many(stream, ells), x[ells - 1]),
               f"{ells.size} positions")
        a = int(rng.integers(1, n + 1))
        b = min(n, a + 63)
        report("extract", np.array_equal(extract(stream, a, b), x[a - 1:b]), f"{a}:{b}")
        if stream.header.scheme == Scheme.RANDOMIZED:
            try:
                audit = audit_randomized(stream)
                report("special links", True, f"{audit.specials} special phrases")
            except RalzError as exc:
                report("special links", False, str(exc))
    if not ok:
        raise Mismatch("verification failed")
    return EXIT_OK


def cmd_gen(args) -> int:
    kind = args.kind
    if kind == "random":
        sym, alphabet = harness.gen_random(args.n, args.seed, args.alphabet), args.alphabet
    elif kind == "repetitive":
        sym = harness.gen_repetitive(args.n, args.period, args.seed, args.alphabet, args.unit)
        alphabet = args.alphabet
    elif kind == "lb":
        text = (harness.gen_lb_S(args.k) if args.ell is None
                else harness.gen_lb_S_ell(args.k, args.ell))
        sym, alphabet = as_symbols(text, "bit"), "bit"
    else:
        text = harness.gen_lb_extended(args.k, args.t, args.ell, args.anchored)
        sym, alphabet = as_symbols(text, "bit"), "bit"
    with _open_out(args.output) as fh:
        fh.write(symbols_to_text(sym, alphabet))
        if alphabet == "bit" and args.output in (None, "-"):
            fh.write(b"\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    corpora = []
    for path in args.inputs:
        corpora.append((path, read_input(path, args.alphabet)))
    if not corpora:
        corpora.append((f"random{args.n}", harness.gen_random(args.n, 0, args.alphabet)))
    if args.sweep == "alpha":
        configs = harness.alpha_sweep(args.alphas or (1 / 16, 1 / 8, 1 / 4))
    else:
        configs = harness.epsilon_sweep(args.epsilons or (0.5, 0.25, 0.125))
    if args.det:
        configs.insert(1, harness.Config("det"))
    report = []
    for name, x in corpora:
        report += harness.measure_competitive(x, configs, range(args.seeds), name,
                                              args.alphabet, args.samples)
    print(harness.summarize(report))
    if args.report:
        harness.emit_csv(report, args.report)
    return EXIT_OK


def cmd_suggest_nmax(args) -> int:
    if args.size is None:
        if args.input is None:
            raise ParameterError("give --size or an input file")
        size = read_input(args.input, args.alphabet).size
    else:
        size = args.size
    if size < 0:
        raise ParameterError("size must be >= 0")
    n_max = max(1, math.ceil(size * (1 + args.headroom)))
    s = 1 if args.alphabet == "bit" else 8
    print(f"n_max={n_max} word_bits={word_width(n_max, s)} L={block_length(n_max)}")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_scheme_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", default="rand", choices=["lz78", "det", "rand"])
    g = p.add_mutually_exclusive_group()
    g.add_argument("--epsilon", type=float, help="randomized overhead target (default 0.5)")
    g.add_argument("--alpha", type=float, help="special-codeword fraction; B = ceil(1/alpha)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-max", type=int, help="capacity bound; required with --stream")


def _add_alphabet(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alphabet", default="byte", choices=["bit", "byte"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ralz", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress a file ('-' for stdin)")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="destination (default stdout)")
    _add_scheme_args(p)
    _add_alphabet(p)
    p.add_argument("--stream", action="store_true", help="consume input incrementally")
    p.add_argument("--framed", action="store_true", help="emit length-prefixed frames")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="restore the original symbols")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--framed", action="store_true")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("access", help="symbols at 1-based positions")
    p.add_argument("input")
    p.add_argument("--pos", type=int, nargs="+", required=True)
    p.add_argument("--trace", action="store_true", help="print work counters to stderr")
    p.add_argument("--format", choices=["raw", "int"], default="raw")
    p.add_argument("--framed", action="store_true")
    p.set_defaults(func=cmd_access)

    p = sub.add_parser("extract", help="substring between two 1-based positions")
    p.add_argument("input")
    p.add_argument("--range", required=True, metavar="L1:L2")
    p.add_argument("-o", "--output")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--format", choices=["raw", "int"], default="raw")
    p.add_argument("--framed", action="store_true")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify", help="check a stream against its original")
    p.add_argument("input")
    p.add_argument("original")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--framed", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="write a synthetic corpus")
    p.add_argument("kind", choices=["random", "repetitive", "lb", "lb-ext"])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--period", type=int, default=2)
    p.add_argument("--unit", help="repeated unit for 'repetitive'")
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--t", type=int, default=4)
    p.add_argument("--ell", type=int)
    p.add_argument("--anchored", action="store_true",
                   help="lb-ext: prepend a lone '0' so phrases follow the enumeration")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    _add_alphabet(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="competitive-ratio sweep")
    p.add_argument("inputs", nargs="*", help="corpus files (default: a random corpus)")
    p.add_argument("--n", type=int, default=10**6, help="random corpus length")
    p.add_argument("--sweep", choices=["alpha", "eps"], default="alpha")
    p.add_argument("--alphas", type=float, nargs="+")
    p.add_argument("--epsilons", type=float, nargs="+")
    p.add_argument("--det", action="store_true", help="include the deterministic scheme")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--samples", type=int, default=0, help="random accesses per row")
    p.add_argument("--report", help="CSV destination")
    _add_alphabet(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("suggest-nmax", help="capacity bound for streaming compression")
    p.add_argument("input", nargs="?")
    p.add_argument("--size", type=int, help="expected input length in symbols")
    p.add_argument("--headroom", type=float, default=0.25)
    _add_alphabet(p)
    p.set_defaults(func=cmd_suggest_nmax)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    warnings.formatwarning = lambda msg, *_a, **_k: f"ralz: warning: {msg}\n"
    try:
        return args.func(args)
    except Mismatch as exc:
        print(f"ralz: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except NoRandomAccessError as exc:
        print(f"ralz: {exc}", file=sys.stderr)
        return EXIT_NO_ACCESS
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except MalformedStreamError as exc:
        print(f"ralz: malformed stream: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except (ParameterError, RalzError, ValueError, IndexError) as exc:
        print(f"ralz: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as exc:
        print(f"ralz: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
