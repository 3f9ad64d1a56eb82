import io
import subprocess
import sys

import numpy as np
import pytest

from ralz import cli
from ralz.codec import WordStream, pack_words
from ralz.harness import gen_lb_S, gen_random
from ralz.rand import codeword_boundaries


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def corpus(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(gen_random(3000, 5, "byte").tobytes())
    return p


@pytest.mark.parametrize("scheme", ["lz78", "det", "rand"])
def test_roundtrip_and_verify(scheme, corpus, tmp_path, capsys):
    z = tmp_path / f"x.{scheme}"
    assert run("compress", corpus, "-o", z, "--scheme", scheme) == 0
    assert run("decompress", z, "-o", tmp_path / "y") == 0
    assert (tmp_path / "y").read_bytes() == corpus.read_bytes()
    assert run("verify", z, corpus) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_deterministic_output(corpus, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run("compress", corpus, "-o", a, "--seed", 7, "--epsilon", 0.25)
    run("compress", corpus, "-o", b, "--seed", 7, "--epsilon", 0.25)
    assert a.read_bytes() == b.read_bytes()


def test_hand_example_file(tmp_path, capsys):
    src = tmp_path / "s.txt"
    src.write_text("0100\n")
    z = tmp_path / "s.det"
    assert run("compress", src, "-o", z, "--scheme", "det", "--alphabet", "bit", "--n-max", 4) == 0
    s = WordStream.from_bytes(z.read_bytes())
    assert s.data_words == 9 and s.n == 4
    assert run("access", z, "--pos", 1, 2, 3, 4) == 0
    assert run("extract", z, "--range", "2:3") == 0
    assert capsys.readouterr().out == "0100" + "10"


def test_access_all_positions(corpus, tmp_path, capsys):
    z = tmp_path / "x.rand"
    run("compress", corpus, "-o", z)
    data = corpus.read_bytes()[:1000]
    assert run("access", z, "--pos", *range(1, 1001), "--format", "int") == 0
    assert capsys.readouterr().out.split() == [str(b) for b in data]
    assert run("extract", z, "--range", f"1:{len(corpus.read_bytes())}", "-o", tmp_path / "e") == 0
    assert (tmp_path / "e").read_bytes() == corpus.read_bytes()


def test_trace_flag(corpus, tmp_path, capsys):
    z = tmp_path / "x.det"
    run("compress", corpus, "-o", z, "--scheme", "det")
    run("access", z, "--pos", 17, "--trace", "--format", "int")
    assert "node_visits=" in capsys.readouterr().err


def test_exit_codes(corpus, tmp_path, capsys):
    z = tmp_path / "x.lz78"
    run("compress", corpus, "-o", z, "--scheme", "lz78")
    assert run("access", z, "--pos", 1) == cli.EXIT_NO_ACCESS
    r = tmp_path / "x.rand"
    run("compress", corpus, "-o", r)
    assert run("access", r, "--pos", 0) == cli.EXIT_PARAM
    assert run("extract", r, "--range", "9:3") == cli.EXIT_PARAM
    assert run("decompress", tmp_path / "missing") == cli.EXIT_IO
    assert run("compress", corpus, "--stream") == cli.EXIT_PARAM
    bad = tmp_path / "bad"
    bad.write_bytes(b"nope" * 20)
    assert run("decompress", bad) == cli.EXIT_MALFORMED
    other = tmp_path / "other"
    other.write_bytes(corpus.read_bytes()[::-1])
    assert run("verify", r, other) == cli.EXIT_MISMATCH


def test_flipped_delimiter_is_malformed(tmp_path, capsys):
    x = gen_random(5000, 2, "byte")
    src = tmp_path / "x"
    src.write_bytes(x.tobytes())
    z = tmp_path / "x.rand"
    run("compress", src, "-o", z, "--alpha", 0.25)
    s = WordStream.from_bytes(z.read_bytes())
    off = int(np.flatnonzero(s.words == s.header.delim_special)[3])
    raw = bytearray(z.read_bytes())
    bit = 48 * 8 + off * s.w  # most significant bit of that delimiter
    raw[bit // 8] ^= 0x80 >> (bit % 8)
    z.write_bytes(bytes(raw))
    assert run("verify", z, src) == cli.EXIT_MALFORMED
    assert "malformed" in capsys.readouterr().err


def test_prefix_file_verifies(tmp_path, capsys):
    x = gen_random(4000, 9, "byte")
    src = tmp_path / "x"
    src.write_bytes(x.tobytes())
    z = tmp_path / "x.rand"
    run("compress", src, "-o", z, "--alpha", 0.125)
    s = WordStream.from_bytes(z.read_bytes())
    for cut in codeword_boundaries(s)[1::157]:
        p = tmp_path / "p"
        p.write_bytes(s.header.pack() + pack_words(s.words[:cut], s.w))
        assert run("verify", p, src) == 0, cut
        assert "prefix of" in capsys.readouterr().out


def test_streaming_matches_batch(corpus, tmp_path):
    a, b, f = tmp_path / "a", tmp_path / "b", tmp_path / "f"
    run("compress", corpus, "-o", a, "--n-max", 5000)
    run("compress", corpus, "-o", b, "--n-max", 5000, "--stream")
    assert a.read_bytes() == b.read_bytes()
    run("compress", corpus, "-o", f, "--n-max", 5000, "--framed")
    assert run("decompress", f, "--framed", "-o", tmp_path / "y") == 0
    assert (tmp_path / "y").read_bytes() == corpus.read_bytes()
    assert run("verify", f, corpus, "--framed") == 0


def test_gen_and_suggest(tmp_path, capsys):
    assert run("gen", "lb", "--k", 3) == 0
    assert capsys.readouterr().out.strip() == "0100011011"
    assert run("gen", "lb", "--k", 6, "--ell", 2, "-o", tmp_path / "l") == 0
    assert len((tmp_path / "l").read_text()) == len(gen_lb_S(6)) + 1
    assert run("gen", "repetitive", "--n", 6, "--unit", "01", "--period", 2,
               "--alphabet", "bit") == 0
    assert capsys.readouterr().out.strip() == "010101"
    assert run("suggest-nmax", "--size", 1000) == 0
    assert "n_max=1250" in capsys.readouterr().out


def test_bench(tmp_path, capsys):
    rep = tmp_path / "r.csv"
    assert run("bench", "--n", 20000, "--seeds", 2, "--report", rep, "--alphabet", "bit") == 0
    lines = rep.read_text().splitlines()
    assert len(lines) == 1 + 4 * 2


def test_stdin_stdout_pipe(tmp_path):
    data = gen_random(2000, 4, "byte").tobytes()
    exe = [sys.executable, "-m", "ralz.cli"]
    z = subprocess.run(exe + ["compress", "-", "--scheme", "det"], input=data,
                       capture_output=True, check=True).stdout
    out = subprocess.run(exe + ["decompress", "-"], input=z, capture_output=True,
                         check=True).stdout
    assert out == data
