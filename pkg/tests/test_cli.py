import json
import subprocess
import sys

import numpy as np
import pytest

from parity_annealer.cli import EXIT_CAP, EXIT_FILE, EXIT_OK, EXIT_SCHEMA, EXIT_VERIFY, main
from parity_annealer.model import SpinGlassProblem, dump_problem


def write_problem(path, n, seed=0, fields=False):
    p = SpinGlassProblem.random(n, np.random.default_rng(seed))
    if fields:
        p = SpinGlassProblem.from_couplings(n, p.couplings, z_fields=[0.3] * n)
    path.write_text(dump_problem(p))
    return path


@pytest.fixture
def program(tmp_path):
    src = write_problem(tmp_path / "p.json", 4)
    out = tmp_path / "prog.json"
    assert main(["compile", str(src), "-o", str(out)]) == EXIT_OK
    return out


def test_compile_is_byte_identical(tmp_path, program):
    again = tmp_path / "again.json"
    main(["compile", str(tmp_path / "p.json"), "-o", str(again)])
    assert again.read_bytes() == program.read_bytes()


def test_compile_flags(tmp_path):
    src = write_problem(tmp_path / "p.json", 4)
    out = tmp_path / "prog.json"
    rc = main(["compile", str(src), "-o", str(out), "--policy", "paper-example",
               "--driver-scope", "logical-only", "--grouping", "nw-es", "--strength", "9"])
    assert rc == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["constraint_strength"] == 9.0
    assert doc["options"]["policy"] == "paper_example" and doc["options"]["driver_scope"] == "logical"
    assert len(doc["model"]["x_terms"]) == 6


@pytest.mark.parametrize("fields", [False, True])
def test_verify_passes(tmp_path, fields):
    src = write_problem(tmp_path / "p.json", 3, seed=4, fields=fields)
    prog = tmp_path / "prog.json"
    main(["compile", str(src), "-o", str(prog)])
    report = tmp_path / "v.json"
    assert main(["verify", str(prog), "-o", str(report)]) == EXIT_OK
    doc = json.loads(report.read_text())
    assert doc["ok"] and doc["constraint_equivalence"]["ok"]


def test_verify_rejects_mutated_gadget(tmp_path, program):
    doc = json.loads(program.read_text())
    doc["model"]["z_terms"][0][1] *= -1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["verify", str(bad), "-o", str(tmp_path / "v.json")]) == EXIT_VERIFY
    assert not json.loads((tmp_path / "v.json").read_text())["ok"]


def test_schema_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 3, "couplings": [[1, 1, 0.5]]}')
    assert main(["compile", str(bad), "-o", str(tmp_path / "o.json")]) == EXIT_SCHEMA
    bad.write_text("not json")
    assert main(["compile", str(bad), "-o", str(tmp_path / "o.json")]) == EXIT_SCHEMA
    assert main(["spectrum", str(bad), "-o", str(tmp_path / "o.csv")]) == EXIT_SCHEMA


def test_file_error(tmp_path):
    assert main(["compile", str(tmp_path / "missing.json"), "-o", str(tmp_path / "o.json")]) == EXIT_FILE


def test_cap_exceeded(tmp_path):
    src = write_problem(tmp_path / "p.json", 5)
    prog = tmp_path / "prog.json"
    main(["compile", str(src), "-o", str(prog)])
    # 22 spins: enumerable but above the diagonalization cap
    assert main(["spectrum", str(prog), "-o", str(tmp_path / "s.csv")]) == EXIT_CAP
    src = write_problem(tmp_path / "p6.json", 6)
    main(["compile", str(src), "-o", str(prog)])
    assert main(["verify", str(prog), "-o", str(tmp_path / "v.json")]) == EXIT_CAP


def test_spectrum_anneal_hardware(tmp_path, program):
    s = tmp_path / "s.csv"
    assert main(["spectrum", str(program), "-o", str(s), "--levels", "3", "--times", "4",
                 "--schedule", "always-on", "--T", "2"]) == EXIT_OK
    lines = s.read_text().splitlines()
    assert lines[0] == "t,level_0,level_1,level_2" and len(lines) == 5
    c = tmp_path / "c.csv"
    assert main(["spectrum", str(program), "-o", str(c), "--levels", "2", "--times", "2", "--compare"]) == 0
    assert c.read_text().splitlines()[0].startswith("t,ramp_level_0")
    a = tmp_path / "a.csv"
    assert main(["anneal", str(program), "-o", str(a), "--T", "1", "--steps", "2"]) == EXIT_OK
    assert a.read_text().splitlines()[0] == "t,success_prob"
    h = tmp_path / "h.csv"
    assert main(["hardware", str(program), "-o", str(h)]) == EXIT_OK
    assert h.read_text().startswith("kind,id,a,b,E_C,E_J,omega_d,A,J_target,E_JRM,g")


def test_anneal_accepts_bare_model(tmp_path, program):
    bare = tmp_path / "model.json"
    bare.write_text(json.dumps(json.loads(program.read_text())["model"]))
    assert main(["anneal", str(bare), "-o", str(tmp_path / "a.csv"), "--T", "1", "--steps", "1"]) == 0
    assert main(["verify", str(bare)]) == EXIT_SCHEMA


def test_demo_is_deterministic(tmp_path):
    args = ["--seed", "7", "--T", "5", "--steps", "20", "--times", "5"]
    assert main(["demo", "-o", str(tmp_path / "a"), *args]) == EXIT_OK
    assert main(["demo", "-o", str(tmp_path / "b"), *args]) == EXIT_OK
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == ["anneal.csv", "plaquette_model.json", "protocols.csv", "spectrum.csv",
                     "spectrum_no_fields.csv", "summary.json"]
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["final_degeneracy_no_fields"] == 8
    assert summary["final_degeneracy_with_fields"] == 1


def test_help_lists_exit_codes():
    out = subprocess.run([sys.executable, "-m", "parity_annealer", "--help"],
                         capture_output=True, text=True, check=True).stdout
    for code in "01234":
        assert f"  {code}  " in out
