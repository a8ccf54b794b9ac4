"""Experiment plumbing: CSV io, single-run traces, battery, CLI contract."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from saddlekit.core import RunTrace, TraceRow
from saddlekit.harness import (
    CSV_COLUMNS,
    default_outdir,
    read_csv,
    run_single,
    verify_all,
    write_csv,
)
from saddlekit.instances import HardInstanceSpec


def _trace(seed=0, rows=()):
    tr = RunTrace(suite="unit", instance_id="toy", solver="eg", seed=seed,
                  kappa=8.0, n=1, epsilon=0.05)
    for row in rows:
        tr.append(row)
    return tr


# ---------------------------------------------------------------------------
# CSV io
# ---------------------------------------------------------------------------


def test_csv_round_trip_is_byte_identical(tmp_path):
    rows = [
        TraceRow(calls=3, grad_phi_norm=1.2345678901234567,
                 moreau_norm=math.nan),
        TraceRow(calls=19, grad_phi_norm=0.25, moreau_norm=0.125),
        TraceRow(calls=400, grad_phi_norm=7.1e-13, moreau_norm=math.nan,
                 wall_ms=41.25),
    ]
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    write_csv(str(first), _trace(rows=rows))
    (back,) = read_csv(str(first))
    write_csv(str(second), back)
    assert first.read_bytes() == second.read_bytes()

    assert [r.calls for r in back.rows] == [3, 19, 400]
    assert back.rows[0].grad_phi_norm == rows[0].grad_phi_norm
    assert math.isnan(back.rows[0].moreau_norm)
    assert back.rows[2].wall_ms == 41.25
    assert back.epsilon == 0.05 and back.kappa == 8.0 and back.seed == 0


def test_csv_empty_trace_writes_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv(str(path), _trace())
    assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"
    assert read_csv(str(path)) == []


def test_csv_rejects_embedded_commas(tmp_path):
    tr = RunTrace(suite="unit", instance_id="a,b", solver="eg", seed=0,
                  kappa=1.0, n=1, epsilon=0.1)
    tr.append(TraceRow(calls=1))
    with pytest.raises(ValueError, match="commas"):
        write_csv(str(tmp_path / "bad.csv"), tr)


def test_csv_read_validates_header_and_rows(tmp_path):
    junk = tmp_path / "junk.csv"
    junk.write_text("not,the,header\n")
    with pytest.raises(ValueError, match="header"):
        read_csv(str(junk))

    short = tmp_path / "short.csv"
    short.write_text(",".join(CSV_COLUMNS) + "\nunit,toy,eg,0\n")
    with pytest.raises(ValueError, match="malformed"):
        read_csv(str(short))


def test_csv_read_splits_traces_on_metadata_and_call_resets(tmp_path):
    """Rows group into one trace while the metadata repeats and the call
    counter increases; a reset splits even under identical metadata."""
    a = _trace(seed=0, rows=[TraceRow(calls=2), TraceRow(calls=5)])
    b = _trace(seed=1, rows=[TraceRow(calls=1), TraceRow(calls=4)])
    c = _trace(seed=0, rows=[TraceRow(calls=1), TraceRow(calls=3)])
    path = tmp_path / "multi.csv"
    write_csv(str(path), [a, b, c])
    back = read_csv(str(path))
    assert [len(t.rows) for t in back] == [2, 2, 2]
    assert [t.seed for t in back] == [0, 1, 0]
    assert [r.calls for r in back[2].rows] == [1, 3]


# ---------------------------------------------------------------------------
# single runs
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def tiny_spec():
    return HardInstanceSpec.derive("deterministic", L=2.0, mu=1.0,
                                   Delta=1.0, epsilon=0.25)


def test_run_single_wall_time_on_final_row_only(tiny_spec):
    trace, info = run_single(tiny_spec, solver="eg", trace_every=5,
                             budget=200_000)
    assert info["status"] == "predicate"
    assert len(trace.rows) >= 2
    for row in trace.rows[:-1]:
        assert math.isnan(row.wall_ms)
    final = trace.final
    assert final.wall_ms > 0.0
    assert final.calls == info["work"] == info["fo_calls"]
    assert final.grad_phi_norm == info["grad_phi_norm"]
    assert info["grad_phi_norm"] <= tiny_spec.epsilon
    assert trace.instance_id == tiny_spec.instance_id()
    assert trace.solver == "eg"


def test_run_single_catalyst_rows_carry_round_indices(tiny_spec):
    trace, info = run_single(tiny_spec, solver="catalyst-eg",
                             budget=500_000)
    assert info["status"] == "stationary"
    # per-round rows carry increasing round indices; the last row is the
    # run-level summary
    indices = [r.outer_index for r in trace.rows[:-1]]
    assert indices == sorted(indices)
    assert math.isnan(trace.rows[0].wall_ms) or len(trace.rows) == 1
    assert trace.final.calls == info["work"]
    assert info["grad_phi_norm"] <= tiny_spec.epsilon


def test_run_single_moreau_column(tiny_spec):
    plain, _ = run_single(tiny_spec, solver="eg", budget=200_000)
    assert math.isnan(plain.final.moreau_norm)
    measured, _ = run_single(tiny_spec, solver="eg", budget=200_000,
                             with_moreau=True)
    assert math.isfinite(measured.final.moreau_norm)
    assert measured.final.moreau_norm >= 0.0


# ---------------------------------------------------------------------------
# property battery
# ---------------------------------------------------------------------------


def test_verify_all_name_filter():
    lines = []
    results, ok = verify_all(names=["momentum worked example"],
                             out=lines.append)
    assert ok
    assert [name for name, _, _ in results] == ["momentum worked example"]
    assert lines == ["ok    1/1 momentum worked example"]


def test_verify_all_substring_matches_several():
    results, ok = verify_all(names=["fit"], out=None)
    assert ok
    names = [n for n, _, _ in results]
    assert "power-law fit recovers an exact exponent" in names
    assert "linear-convergence fit on exact geometric data" in names


def test_default_outdir_env(monkeypatch):
    monkeypatch.delenv("SADDLEKIT_OUTDIR", raising=False)
    assert default_outdir() == "."
    monkeypatch.setenv("SADDLEKIT_OUTDIR", "/tmp/somewhere")
    assert default_outdir() == "/tmp/somewhere"


# ---------------------------------------------------------------------------
# command-line interface
# ---------------------------------------------------------------------------


def _cli(*args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "saddlekit.cli", *args],
                          capture_output=True, text=True, env=env,
                          timeout=300)


def test_cli_gen_writes_derived_spec(tmp_path):
    out = tmp_path / "inst.spec"
    proc = _cli("gen", "--mode", "deterministic", "--L", "10", "--mu", "1",
                "--Delta", "1", "--epsilon", "0.05", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    spec = HardInstanceSpec.from_text(out.read_text())
    assert spec.lambda1 == 5.0
    assert spec.lambda2 == 0.5
    assert spec.alpha == pytest.approx(1e-3)
    assert spec.d == 1 and spec.d_clamped
    assert "clamped" in proc.stdout


def test_cli_gen_rejects_bad_constants(tmp_path):
    proc = _cli("gen", "--mode", "deterministic", "--L", "1", "--mu", "5",
                "--Delta", "1", "--epsilon", "0.1",
                "--out", str(tmp_path / "x.spec"))
    assert proc.returncode == 2
    assert "error" in proc.stderr


def test_cli_run_missing_spec_file_exits_2(tmp_path):
    proc = _cli("run", "--spec", str(tmp_path / "absent.spec"))
    assert proc.returncode == 2
    assert "error" in proc.stderr


def test_cli_run_writes_trace_csv(tmp_path):
    out = tmp_path / "trace.csv"
    proc = _cli("run", "--mode", "deterministic", "--L", "2", "--mu", "1",
                "--Delta", "1", "--epsilon", "0.25", "--solver", "eg",
                "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    assert "status=predicate" in proc.stdout
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) >= 2


def test_cli_run_defaults_into_outdir_env(tmp_path):
    proc = _cli("run", "--mode", "deterministic", "--L", "2", "--mu", "1",
                "--Delta", "1", "--epsilon", "0.25",
                env_extra={"SADDLEKIT_OUTDIR": str(tmp_path)})
    assert proc.returncode == 0, proc.stderr
    written = list(tmp_path.glob("*.csv"))
    assert len(written) == 1
    assert written[0].name.endswith("-eg-seed0.csv")


def test_cli_verify_filter_exits_zero():
    proc = _cli("verify", "--filter", "momentum")
    assert proc.returncode == 0, proc.stderr
    assert "properties ok" in proc.stdout


def test_cli_verify_spec_file(tmp_path):
    out = tmp_path / "inst.spec"
    gen = _cli("gen", "--mode", "deterministic", "--L", "2", "--mu", "1",
               "--Delta", "1", "--epsilon", "0.25", "--out", str(out))
    assert gen.returncode == 0
    proc = _cli("verify", "--spec", str(out))
    assert proc.returncode == 0, proc.stderr


def test_cli_unknown_subcommand_exits_2():
    proc = _cli("frobnicate")
    assert proc.returncode == 2
