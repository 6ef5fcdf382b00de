import csv
import io
import sys

import pytest

from tincalc.cli import decimal_string, main
from tincalc.geom import emit_tin, generate_tin, load_tin, parse_tin

from conftest import square_fan, square_ne, square_nw


def write(tmp_path, name, tin):
    path = tmp_path / name
    path.write_text(emit_tin(tin), encoding="utf-8")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_decimal_string_cases():
    from gmpy2 import mpq

    assert decimal_string(mpq(1, 4)) == "2.5000000000000000e-01"
    assert decimal_string(mpq(-1, 3)) == "-3.3333333333333333e-01"
    assert decimal_string(0) == "0"
    assert decimal_string(mpq(999999999999999999, 1)) == "1.0000000000000000e+18"


def test_inner_both_matches(tmp_path, capsys):
    a = write(tmp_path, "a.tin", square_ne("plane:0,1,0"))
    b = write(tmp_path, "b.tin", square_nw("plane:0,0,1"))
    code, out, _ = run(capsys, "inner", a, b, "--method", "both", "--primes", "4")
    assert code == 0
    assert out.count("1/4") == 2
    assert "MATCH" in out


def test_inner_rejects_degenerate_pair(tmp_path, capsys):
    a = write(tmp_path, "a.tin", square_ne())
    b = write(tmp_path, "b.tin", square_fan())
    with pytest.raises(SystemExit) as exc:
        run(capsys, "inner", a, b)
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "vertex-on-edge" in err


def test_validate_command(tmp_path, capsys):
    a = write(tmp_path, "a.tin", square_ne())
    b = write(tmp_path, "b.tin", square_fan())
    code, out, _ = run(capsys, "validate", a, b)
    assert code == 2
    assert "vertex-on-edge" in out
    c = write(tmp_path, "c.tin", square_nw())
    code, out, _ = run(capsys, "validate", a, c)
    assert code == 0 and "ok" in out


def test_distance_and_match_commands(tmp_path, capsys):
    a = write(tmp_path, "a.tin", square_ne("plane:0,1,0"))
    b = write(tmp_path, "b.tin", square_nw("plane:0,0,1"))
    code, out, _ = run(capsys, "distance", a, b, "--method", "both")
    assert code == 0
    assert "distance2=1/6" in out
    assert "MATCH" in out
    code, out, _ = run(capsys, "match", a, b, "--method", "naive")
    assert code == 0
    assert "s=" in out and "t=" in out and "residual2=" in out


def test_generate_roundtrip(tmp_path, capsys):
    out_path = tmp_path / "gen.tin"
    code, out, _ = run(
        capsys, "generate", "--triangles", "2", "--seed", "1",
        "--surface", "plane:0,1,0", "-o", str(out_path),
    )
    assert code == 0
    t = load_tin(out_path)
    assert t.n_triangles == 2
    for x, _y, z in t.vertices:
        assert z == x  # surface f = x
    assert parse_tin(emit_tin(t)) == t


def test_generate_bad_count_exits_3(tmp_path, capsys):
    code = main(["generate", "--triangles", "3", "--seed", "0", "-o", str(tmp_path / "x")])
    assert code == 3


def test_unknown_flag_exits_3(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["inner", "--bogus"])
    assert exc.value.code == 3


def test_parse_error_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.tin"
    bad.write_text("TIN 2\n", encoding="utf-8")
    ok = write(tmp_path, "ok.tin", square_ne())
    code = main(["inner", str(bad), ok])
    assert code == 3


def test_cliques_stats(tmp_path, capsys):
    a = write(tmp_path, "a.tin", square_ne())
    b = write(tmp_path, "b.tin", square_nw())
    code, out, _ = run(capsys, "cliques", a, b, "--stats")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["cliques", "total_size", "edges", "size_over_nlog2"]
    assert int(rows[1][0]) == 1  # single crossing pair


def test_bench_csv(tmp_path, capsys):
    out_csv = tmp_path / "bench.csv"
    code, out, err = run(
        capsys, "bench", "--sizes", "8,12", "--seeds", "1", "--csv", str(out_csv)
    )
    assert code == 0
    rows = list(csv.reader(open(out_csv, encoding="utf-8")))
    assert rows[0] == ["n", "method", "field_ops", "wall_ms", "clique_cover_size", "match"]
    body = rows[1:]
    assert len(body) == 4  # two sizes x two methods
    assert all(r[5] == "True" for r in body)
    fast_rows = [r for r in body if r[1] == "fast"]
    assert all(int(r[2]) > 0 for r in fast_rows)
