import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from deformwb.cli import run

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = Path(__file__).resolve().parent / "golden"
MANIFEST = json.loads((GOLDEN / "manifest.json").read_text())


def _argv(argv):
    return [str(ROOT / a) if a.startswith("samples/") else a for a in argv]


def call(argv):
    buf = io.StringIO()
    code = run(_argv(argv), buf)
    return code, buf.getvalue()


@pytest.mark.parametrize("name", sorted(MANIFEST))
@pytest.mark.parametrize("jobs", ["1", "2"])
def test_golden_reports(name, jobs):
    entry = MANIFEST[name]
    code, text = call(entry["argv"] + ["--jobs", jobs])
    assert code == entry["exit"]
    assert text == (GOLDEN / f"{name}.out").read_text()


def test_report_shape():
    code, text = call(["pbw", "--file", "samples/usl2.wb", "--max-degree", "3"])
    rep = json.loads(text)
    assert code == 0
    assert sorted(rep) == ["command", "inputs_digest", "results", "schema", "verdict", "version"]
    assert rep["results"]["dims_B"] == [1, 3, 6, 10]
    assert len(rep["inputs_digest"]) == 16


def test_digest_tracks_inputs():
    a = json.loads(call(["pbw", "--file", "samples/sra_lambda0.wb", "--max-degree", "3"])[1])
    b = json.loads(call(["pbw", "--file", "samples/sra_lambda1.wb", "--max-degree", "3"])[1])
    c = json.loads(call(["pbw", "--file", "samples/sra_lambda1.wb", "--max-degree", "3", "--jobs", "3"])[1])
    assert a["inputs_digest"] != b["inputs_digest"] == c["inputs_digest"]


def test_text_format():
    code, text = call(["hh", "--algebra", "dual", "--top", "3", "--text"])
    assert code == 0
    assert "verdict: true" in text and "command: \"hh\"" in text
    assert not text.lstrip().startswith("{")


def test_exit_codes(tmp_path):
    assert call(["pbw", "--file", "samples/broken_bracket.wb", "--max-degree", "3"])[0] == 1
    assert call(["pbw", "--file", str(tmp_path / "missing.wb"), "--max-degree", "3"])[0] == 2
    assert call(["pbw"])[0] == 2
    assert call(["no-such-command"])[0] == 2
    bad = tmp_path / "bad.wb"
    bad.write_text("[generators]\nx\n[relations]\nx*q\n")
    assert call(["gb", "--file", str(bad), "--max-degree", "2"])[0] == 2
    assert call(["gb", "--file", "samples/usl2.wb", "--max-degree", "4", "--max-basis", "2"])[0] == 3
    assert call(["graphs", "list", "--m", "5"])[0] == 3


def test_koszul_mode_needs_degree_three():
    assert call(["pbw", "--file", "samples/usl2.wb", "--max-degree", "4", "--koszul"])[0] == 2


def test_results_against_known_values():
    rep = json.loads(call(["hh", "--algebra", "kxk", "--top", "3"])[1])
    assert rep["results"]["dims"] == [2, 0, 0, 0]
    rep = json.loads(call(["ce", "--builtin", "sl2", "--top", "3"])[1])
    assert rep["results"]["dims"] == [1, 0, 0, 1]
    rep = json.loads(call(["graphs", "list", "--m", "2"])[1])
    assert rep["results"]["count"] == 45
    assert call(["potential", "center", "--file", "samples/sklyanin_e6_literal.wb", "--max-degree", "4",
                 "--psi", "c*y^3 + (t^3 - c^3)/(c^3 + 1)*(y*z*x + c*z^3) - t*z*y*x"])[0] == 1


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "deformwb.cli", "wheel", "--m", "2", "--builtin", "sl2"],
                         capture_output=True, text=True, cwd=ROOT, env=dict(os.environ))
    assert out.returncode == 0
    assert out.stdout == (GOLDEN / "wheel_sl2.out").read_text()
