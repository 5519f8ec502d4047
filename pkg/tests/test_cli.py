import json
import subprocess
import sys

import numpy as np
import pytest

from modbergman import __version__
from modbergman.ball import SpaceParams
from modbergman.cli import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_SELFCHECK,
    EXIT_VALIDATION,
    RunConfig,
    builtin_function,
    main,
    parse_complex,
    parse_point,
    run,
)
from modbergman.errors import DomainError


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_helpers():
    assert parse_complex("0.3+0.1i") == 0.3 + 0.1j
    assert parse_complex(" -1 ") == -1
    with pytest.raises(DomainError):
        parse_complex("abc")
    assert np.array_equal(parse_point("0.1,0.2j", 2), np.array([0.1, 0.2j]))
    with pytest.raises(DomainError):
        parse_point("0.1", 2)


def test_builtin_functions():
    w = np.array([[0.3 + 0.4j, 0.1]])
    assert builtin_function("one", 2)(w)[0] == 1
    assert builtin_function("re_w1", 2)(w)[0] == pytest.approx(0.3)
    assert builtin_function("abs_sq", 2)(w)[0] == pytest.approx(0.26)
    assert builtin_function("monomial(2,1)", 2)(w)[0] == pytest.approx((0.3 + 0.4j) ** 2 * 0.1)
    with pytest.raises(DomainError):
        builtin_function("exp", 1)
    with pytest.raises(DomainError):
        builtin_function("monomial(1)", 2)


def test_run_config_validation():
    p = SpaceParams(0, 0, 1)
    with pytest.raises(DomainError):
        RunConfig("plot", p)
    with pytest.raises(DomainError):
        RunConfig("kernel", p, fmt="xml")
    with pytest.raises(DomainError):
        RunConfig("kernel", p, seed=-1)


def test_zeros_json(capsys):
    code, out, _ = run_cli(capsys, "zeros", "--n", "2", "--a", "10", "--b", "-1", "--format", "json")
    assert code == EXIT_OK
    data = json.loads(out)
    roots = [complex(r["re"], r["im"]) for r in data["root"]["roots"]]
    assert len(roots) == 1 and abs(roots[0] + 1 / 11) <= 1e-9
    assert data["root"]["disk_count"] == 1
    meta = data["metadata"]
    assert meta["version"] == __version__ and meta["seed"] == 0
    assert meta["params"] == {"a": 10.0, "b": -1.0, "n": 2}
    assert "tolerances" in meta


def test_berezin_constant(capsys):
    code, out, _ = run_cli(capsys, "berezin", "--n", "1", "--a", "0", "--b", "0", "--f", "one", "--z", "0.3+0i")
    assert code == EXIT_OK
    assert json.loads(out)["value"]["re"] == pytest.approx(1.0, abs=1e-12)
    code, out, _ = run_cli(capsys, "berezin", "--a", "1", "--b", "0.5", "--f", "re_w1", "--z", "0.5",
                           "--method", "mobius")
    # Re w1 is the real part of a holomorphic function, which the transform fixes
    assert json.loads(out)["value"]["re"] == pytest.approx(0.5, abs=1e-6)


def test_kernel_csv(capsys):
    code, out, _ = run_cli(capsys, "kernel", "--a", "1", "--xi", "0.5", "--format", "csv")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0].startswith("# {")
    assert lines[1] == "xi_re,xi_im,re,im,agreement"
    assert float(lines[2].split(",")[2]) == pytest.approx(0.5**-3)


def test_moments_and_metric(capsys):
    code, out, _ = run_cli(capsys, "moments", "--n", "2", "--a", "1", "--b", "0.5", "--max-degree", "2")
    entries = json.loads(out)["moments"]
    assert code == EXIT_OK and len(entries) == 6
    assert all(e["quadrature"] == pytest.approx(e["norm_sq"], rel=1e-10) for e in entries)
    code, out, _ = run_cli(capsys, "metric", "--a", "1", "--b", "0.5", "--z", "0.3", "--w=-0.2+0.4i",
                           "--f", "re_w1")
    data = json.loads(out)
    assert code == EXIT_OK and data["min_eigenvalue"] > 0 and data["lipschitz"]["holds"]


@pytest.mark.parametrize("s,regime", [(-0.5, "Bounded"), (0.0, "Logarithmic")])
def test_growth(capsys, s, regime):
    code, out, _ = run_cli(capsys, "growth", "--a", "1", "--b", "0.5", "--s", str(s))
    data = json.loads(out)
    assert code == EXIT_OK and data["regime"] == regime and data["integral"] == "I_s"
    assert len(data["values"]) == 7


def test_growth_j_s_refuses_q_with_zero(capsys):
    code, _, err = run_cli(capsys, "growth", "--n", "2", "--a", "10", "--b", "-1", "--c", "1", "--d", "0")
    assert code == EXIT_VALIDATION and "zero" in err


def test_figure1(capsys):
    code, out, _ = run_cli(capsys, "figure1", "--format", "csv")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[1] == "panel,set,re,im"
    rows = [ln.split(",") for ln in lines[2:]]
    assert sum(r[1] == "circle" for r in rows) == 512
    roots_by_b = {}
    for r in rows:
        if r[1] == "root":
            roots_by_b.setdefault(float(r[0]), []).append(complex(float(r[2]), float(r[3])))
    assert not any(abs(z) < 0.999 for z in roots_by_b.get(-0.01, []))
    assert any(abs(z) < 0.999 for z in roots_by_b[-1.9])


def test_figure2_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for f in (a, b):
        assert main(["figure2", "--format", "csv", "--output", str(f)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[1] == "set,re,im"
    sets = [ln.split(",")[0] for ln in lines[2:]]
    assert sets.count("root") == 50 and sets.count("curve") == 1024
    meta = json.loads(lines[0][2:])
    assert meta["params"]["m"] == 50 and meta["params"]["tau"] == 2.0
    # 17 significant digits round-trip the floats
    re = [v for v in lines[2].split(",")[1:]]
    assert all(float(repr(float(v))) == float(v) for v in re)


def test_seed_in_metadata_and_mc_determinism(capsys):
    args = ["berezin", "--n", "2", "--a", "1", "--f", "abs_sq", "--z", "0.2,0.1", "--mc-samples", "500"]
    outs = [run_cli(capsys, *args, "--seed", s)[1] for s in ("7", "7", "8")]
    assert outs[0] == outs[1] != outs[2]
    assert json.loads(outs[0])["metadata"]["seed"] == 7


def test_selfcheck(capsys):
    code, out, _ = run_cli(capsys, "selfcheck")
    checks = json.loads(out)["checks"]
    assert code == EXIT_OK and all(c["passed"] for c in checks) and len(checks) >= 9


def test_selfcheck_failure_exit_code(monkeypatch, capsys):
    import modbergman.selfcheck as sc

    monkeypatch.setattr(sc, "CHECKS", [("always_fails", lambda: (False, "forced"))])
    code, out, _ = run_cli(capsys, "selfcheck")
    assert code == EXIT_SELFCHECK


def test_numerical_failure_exit_code(capsys):
    code, _, err = run_cli(capsys, "kernel", "--a", "0.5", "--b", "0.5", "--xi", "0.99", "--max-terms", "10")
    assert code == EXIT_NUMERICAL and "numerical" in err


@pytest.mark.parametrize("argv", [
    ["kernel", "--a", "-1"],
    ["kernel", "--n", "0"],
    ["plot"],
    ["kernel", "--format", "xml"],
    ["kernel", "--xi", "1.5"],
    ["berezin", "--n", "2", "--z", "0.1"],
    ["berezin", "--f", "nope"],
])
def test_validation_errors(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == EXIT_VALIDATION and err


def test_run_writes_to_stream():
    import io

    buf = io.StringIO()
    cfg = RunConfig("kernel", SpaceParams(0, 0, 1), options={"xi": "0.5"}, threads=4)
    assert run(cfg, buf) == EXIT_OK
    data = json.loads(buf.getvalue())
    assert data["metadata"]["threads"] == 4
    assert data["value"]["re"] == pytest.approx(4.0)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "modbergman.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
