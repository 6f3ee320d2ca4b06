"""End-to-end command-line checks via subprocesses.

Each invocation runs `python -m switchbound.cli` so the tests exercise
argument parsing, exit codes, and emission exactly as a shell user would.
Exit codes: 0 affirmative, 2 reducible, 3 inconclusive or uncertified,
4 precondition failure, 64 usage or parse error, 65 enumeration cap.
"""
import json
import subprocess
import sys

import numpy as np
import pytest

from switchbound import (
    MatrixFamily,
    NormTag,
    chi_exact,
    dump_family,
    mixture_family,
)
from switchbound.core import word_matrix

SWAP_HALF = np.array([[0.0, 0.5], [0.5, 0.0]])

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def run_cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "switchbound.cli", *argv],
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    """Family and generator files shared by the command tests."""
    root = tmp_path_factory.mktemp("cli")
    out = {}

    out["mixture"] = root / "mixture.json"
    out["mixture"].write_text(dump_family(mixture_family(SWAP_HALF)))

    out["single"] = root / "single.json"
    out["single"].write_text(
        dump_family(MatrixFamily((SWAP_HALF,), norm=NormTag.L1))
    )

    out["single_shifted"] = root / "single_shifted.json"
    out["single_shifted"].write_text(
        dump_family(MatrixFamily((SWAP_HALF + 0.25,), norm=NormTag.L1))
    )

    out["scalar"] = root / "scalar.json"
    out["scalar"].write_text(
        dump_family(MatrixFamily((np.array([[0.5]]),), norm=NormTag.L1))
    )

    out["reducible"] = root / "reducible.json"
    out["reducible"].write_text(
        dump_family(
            MatrixFamily(
                (
                    np.array([[0.5, 0.0], [0.3, 0.4]]),
                    np.array([[0.6, 0.0], [0.1, 0.2]]),
                ),
                norm=NormTag.L1,
            )
        )
    )

    rng = np.random.default_rng(6)
    B = rng.uniform(0.1, 0.3, size=(3, 3))
    out["inconclusive"] = root / "inconclusive.json"
    out["inconclusive"].write_text(dump_family(mixture_family(B)))

    theta = 0.9
    R = 1.2 * np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    D = np.diag([1.4, 0.5])
    unstable = MatrixFamily((R, D), norm=NormTag.L1)
    out["unstable"] = root / "unstable.json"
    out["unstable"].write_text(dump_family(unstable))
    out["unstable_family"] = unstable

    out["bad"] = root / "bad.json"
    out["bad"].write_text('{"matrices": "nope"}')

    out["generator"] = root / "generator.json"
    out["generator"].write_text(
        json.dumps(
            {
                "kind": "mixture",
                "norm": "l1",
                "base": SWAP_HALF.tolist(),
                "perturbation": [[1.0, 1.0], [1.0, 1.0]],
                "taus": [0.0, 0.0625],
            }
        )
    )

    out["dir"] = root
    return out


def test_qc_affirmative_exit_and_payload(files):
    res = run_cli("qc", str(files["mixture"]), "--format", "structured")
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc["command"] == "qc"
    assert doc["results"]["status"] == "quasi_controllable"
    assert doc["parameters"]["members"] == 2


def test_qc_reducible_exit_and_certificate(files):
    res = run_cli("qc", str(files["reducible"]), "--format", "structured")
    assert res.returncode == 2
    doc = json.loads(res.stdout)
    assert doc["results"]["status"] == "reducible"
    assert doc["results"]["certificate_dim"] >= 1
    # The certificate prints in the human format too.
    text = run_cli("qc", str(files["reducible"]))
    assert "certificate" in text.stdout


def test_qc_inconclusive_exit(files):
    res = run_cli("qc", str(files["inconclusive"]), "--format", "structured")
    assert res.returncode == 3
    doc = json.loads(res.stdout)
    assert doc["results"]["status"] == "inconclusive"


def test_qc_malformed_file_is_usage_error(files):
    res = run_cli("qc", str(files["bad"]))
    assert res.returncode == 64
    assert "error" in res.stderr


def test_qc_missing_file_is_usage_error(files):
    res = run_cli("qc", str(files["dir"] / "absent.json"))
    assert res.returncode == 64


def test_qc_norm_override_recorded(files):
    res = run_cli(
        "qc", str(files["mixture"]), "--norm", "l2", "--format", "structured"
    )
    doc = json.loads(res.stdout)
    assert doc["parameters"]["norm"] == "l2"


def test_measure_scalar_family_is_exactly_one(files):
    res = run_cli(
        "measure", str(files["scalar"]), "--p", "1", "--format", "structured"
    )
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc["results"]["sigma_upper"] == 1.0
    assert doc["results"]["sigma_lower"] == 1.0


def test_measure_dominates_closed_form_bound(files):
    res = run_cli(
        "measure", str(files["mixture"]), "--p", "2", "--format", "structured"
    )
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc["results"]["sigma_upper"] >= 1.0 / 32.0 - 1e-9
    assert doc["results"]["sigma_lower"] > 0.0
    assert doc["parameters"]["p"] == 2


def test_measure_shallow_depth_warns(files):
    res = run_cli(
        "measure",
        str(files["inconclusive"]),
        "--p",
        "1",
        "--certify-grid",
        "0",
        "--format",
        "structured",
    )
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert any("below n-1" in w for w in doc["warnings"])


def test_measure_uncertified_zero_warns(files):
    res = run_cli(
        "measure", str(files["reducible"]), "--p", "1", "--format", "structured"
    )
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc["results"]["sigma_lower"] == 0.0
    assert any("not certified" in w for w in doc["warnings"])


def test_bound_mixture_model_passes_comparison(files):
    res = run_cli(
        "bound",
        str(files["single"]),
        "--model",
        "mixture",
        "-T",
        "6",
        "--format",
        "structured",
    )
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc["results"]["bound"] == 32.0
    assert doc["results"]["comparison"] == "chi_T <= bound: PASS"
    assert doc["results"]["conditional"] is False


def test_bound_mixture_model_criterion_failure_exits_reducible(files):
    res = run_cli(
        "bound", str(files["single_shifted"]), "--model", "mixture",
        "--format", "structured",
    )
    assert res.returncode == 2
    doc = json.loads(res.stdout)
    assert doc["results"]["structured"]["bound"] == 0.0
    assert doc["results"]["structured"]["status"] == "reducible"


def test_bound_mixture_model_rejects_multi_matrix_file(files):
    res = run_cli("bound", str(files["mixture"]), "--model", "mixture")
    assert res.returncode == 64


def test_bound_family_model_uncertified_is_inconclusive(files):
    res = run_cli("bound", str(files["reducible"]), "--format", "structured")
    assert res.returncode == 3
    doc = json.loads(res.stdout)
    assert doc["results"]["apriori_bound"] == "inf"


def test_overshoot_reports_comparison_and_plot(files, tmp_path):
    png = tmp_path / "profile.png"
    res = run_cli(
        "overshoot",
        str(files["mixture"]),
        "-T",
        "3",
        "--format",
        "structured",
        "--plot",
        str(png),
    )
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc["results"]["chi_T"] >= 1.0
    assert "PASS" in doc["results"]["comparison"]
    assert png.read_bytes()[:8] == PNG_MAGIC


def test_overshoot_enumeration_cap_exit(files):
    res = run_cli("overshoot", str(files["unstable"]), "-T", "40")
    assert res.returncode == 65
    assert "cap" in res.stderr


def test_simulate_word_csv_golden(files):
    res = run_cli(
        "simulate",
        str(files["mixture"]),
        "--word",
        "1,0",
        "--x0",
        "1,0",
        "--format",
        "csv",
    )
    assert res.returncode == 0
    assert res.stdout == (
        "n,i,x0,x1,norm\n"
        "0,1,1.0,0.0,1.0\n"
        "1,0,1.0,0.5,1.5\n"
        "2,,0.25,0.5,0.75\n"
    )


def test_simulate_law_zero_steps_has_single_state(files):
    res = run_cli(
        "simulate",
        str(files["single"]),
        "--law",
        "round_robin",
        "--steps",
        "0",
        "--format",
        "structured",
    )
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc["results"]["steps"] == 0
    assert len(doc["results"]["states"]) == 1


def test_simulate_law_requires_single_matrix(files):
    res = run_cli(
        "simulate", str(files["mixture"]), "--law", "round_robin", "--steps", "3"
    )
    assert res.returncode == 64


def test_simulate_needs_word_or_law(files):
    res = run_cli("simulate", str(files["mixture"]))
    assert res.returncode == 64
    assert "either --word or --law" in res.stderr


def test_simulate_plot_written(files, tmp_path):
    png = tmp_path / "traj.png"
    res = run_cli(
        "simulate",
        str(files["single"]),
        "--law",
        "iid_uniform",
        "--seed",
        "3",
        "--steps",
        "10",
        "--plot",
        str(png),
    )
    assert res.returncode == 0
    assert png.read_bytes()[:8] == PNG_MAGIC


def test_witness_success_and_plot(files, tmp_path):
    fam = files["unstable_family"]
    rep = chi_exact(fam, 8)
    P = word_matrix(fam, rep.witness_word)
    j = int(np.argmax(np.abs(P).sum(axis=0)))
    seed_x = ",".join(str(v) for v in np.eye(2)[j])
    word = ",".join(str(i) for i in rep.witness_word)
    png = tmp_path / "witness.png"
    res = run_cli(
        "witness",
        str(files["unstable"]),
        "--seed-word",
        word,
        "--seed-x",
        seed_x,
        "--mu",
        "2.0",
        "--blocks",
        "3",
        "--sigma-lower",
        "0.26",
        "--format",
        "structured",
        "--plot",
        str(png),
    )
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc["results"]["growth_rate"] > 1.0
    assert doc["results"]["final_norm"] > 1.0
    assert png.read_bytes()[:8] == PNG_MAGIC


def test_witness_precondition_exit(files):
    res = run_cli(
        "witness",
        str(files["mixture"]),
        "--seed-word",
        "0",
        "--seed-x",
        "0,1",
        "--mu",
        "1.5",
        "--sigma-lower",
        "0.1",
    )
    assert res.returncode == 4
    assert "precondition failed" in res.stderr


def test_sweep_csv_and_determinism(files):
    argv = (
        "sweep",
        str(files["generator"]),
        "--p",
        "1",
        "--format",
        "structured",
    )
    first = run_cli(*argv)
    second = run_cli(*argv)
    assert first.returncode == 0
    assert first.stdout == second.stdout
    doc = json.loads(first.stdout)
    assert doc["results"]["kind"] == "measure"
    assert [row[0] for row in doc["results"]["rows"]] == [0.0, 0.0625]
    csv_run = run_cli(
        "sweep", str(files["generator"]), "--p", "1", "--format", "csv"
    )
    lines = csv_run.stdout.splitlines()
    assert lines[0].startswith("tau,")
    assert len(lines) == 3


def test_sweep_probe_requires_depth(files):
    res = run_cli("sweep", str(files["generator"]), "--probe")
    assert res.returncode == 64


def test_sweep_probe_inapplicable_exit(files):
    res = run_cli(
        "sweep", str(files["generator"]), "--probe", "--depth", "3", "--p", "1"
    )
    assert res.returncode == 4
    assert "precondition failed" in res.stderr


def test_out_flag_writes_file_and_silences_stdout(files, tmp_path):
    target = tmp_path / "report.json"
    res = run_cli(
        "qc",
        str(files["mixture"]),
        "--format",
        "structured",
        "--out",
        str(target),
    )
    assert res.returncode == 0
    assert res.stdout == ""
    doc = json.loads(target.read_text())
    assert doc["command"] == "qc"


def test_version_flag(files):
    res = run_cli("--version")
    assert res.returncode == 0
    assert res.stdout.strip()


def test_no_arguments_is_usage_error():
    res = run_cli()
    assert res.returncode == 64
