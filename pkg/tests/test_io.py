import math
import struct
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hrch.errors import IoError
from hrch.experiments import alpha_sweep
from hrch.io import Table, emit_csv, emit_svg_plots, format_number, read_csv, snapshot_indices
from hrch.solver import ForcingSpec, InitSpec, solve
from hrch.vch import vch_solve

from helpers import alpha_base, smooth_regular

SVG = "{http://www.w3.org/2000/svg}"


def bits(x):
    return struct.pack("<d", x)


@given(st.floats(allow_nan=False, allow_infinity=True))
def test_format_roundtrip_bit_exact(x):
    assert bits(float(format_number(x))) == bits(x)


def test_format_is_scientific():
    assert format_number(0.5) == "5.0e-01"
    assert format_number(3) == "3"
    assert format_number(True) == "1"
    assert format_number(math.nan) == "nan"


def test_three_state_trajectory(tmp_path):
    # one row per stored time level, t = 0 included
    traj = solve(smooth_regular(dt=0.1, T=0.2))
    assert len(traj) == 3
    path = emit_csv(traj, tmp_path / "t.csv")
    raw = path.read_bytes()
    assert b"\r" not in raw
    raw.decode("utf-8")
    lines = raw.decode().splitlines()
    assert len(lines) == 4
    assert lines[0].split(",") == ["t", "mass_residual", "energy", "cumulative_dissipation", "phi_min", "phi_max",
                                   "xi_proxy_supnorm", "grad_mu_norm", "laplacian_mu_norm"]


def test_trajectory_roundtrip(tmp_path):
    traj = solve(smooth_regular())
    header, rows, _ = read_csv(emit_csv(traj, tmp_path / "t.csv"))
    assert len(rows) == len(traj.diagnostics)
    for rec, row in zip(traj.diagnostics, rows):
        assert [bits(float(v)) for v in row] == [bits(v) for v in rec.as_row()]


def test_csv_byte_identical(tmp_path):
    cfg = smooth_regular()
    a = emit_csv(solve(cfg), tmp_path / "a.csv").read_bytes()
    b = emit_csv(solve(cfg), tmp_path / "b.csv").read_bytes()
    assert a == b


@pytest.fixture(scope="module")
def sweep4():
    return alpha_sweep(alpha_base().replace(T=0.25, n=8), [1, 0.25, 0.0625, 0.015625])


def test_alpha_sweep_csv(tmp_path, sweep4):
    text = emit_csv(sweep4, tmp_path / "s.csv").read_text()
    lines = text.splitlines()
    assert len(lines) == 6
    assert lines[-1].startswith("# fitted p=") and ", K=" in lines[-1]
    header, rows, comments = read_csv(tmp_path / "s.csv")
    fit = sweep4.fits["phi_diff_linf_h_l2_v"]
    assert comments[0].startswith(f"fitted p={format_number(fit.exponent)}, K={format_number(fit.constant)}")
    for row, stored in zip(rows, sweep4.rows):
        assert [bits(float(v)) for v in row] == [bits(float(stored[c])) for c in header]


def test_vch_table(tmp_path):
    traj = vch_solve(smooth_regular(alpha=0.0, forcing=ForcingSpec(), T=0.05))
    header, rows, _ = read_csv(emit_csv(traj, tmp_path / "v.csv"))
    assert header[:3] == ["t", "mean_drift", "energy"]
    assert len(rows) == len(traj)
    assert all(float(r[1]) == 0.0 for r in rows)


def test_generic_table_with_strings(tmp_path):
    t = Table(["name", "value", "ok"], [["lipschitz", 1e-17, True]])
    header, rows, _ = read_csv(emit_csv(t, tmp_path / "g.csv"))
    assert rows == [["lipschitz", "1.0e-17", "1"]]


def test_csv_io_error(tmp_path):
    with pytest.raises(IoError):
        emit_csv(Table(["a"], []), tmp_path / "missing" / "x.csv")


def test_snapshot_policy():
    assert snapshot_indices(4) == [0, 1, 2, 3]
    idx = snapshot_indices(101)
    assert len(idx) == 10 and idx[0] == 0 and idx[-1] == 100
    assert np.max(np.abs(np.array(idx) - np.linspace(0, 100, 10))) <= 0.5
    assert snapshot_indices(1) == [0]


def test_zero_trajectory_svg(tmp_path):
    traj = solve(smooth_regular(init=InitSpec(), forcing=ForcingSpec(), dt=0.05, T=0.5))
    paths = emit_svg_plots(traj, tmp_path)
    assert {p.name for p in paths} == {"phi_snapshots.svg", "diagnostics.svg"}
    root = ET.parse(tmp_path / "phi_snapshots.svg").getroot()
    assert root.tag == SVG + "svg" and root.get("version") == "1.1"
    lines = root.findall(f"{SVG}polyline")
    assert len(lines) == 10
    for pl in lines:
        ys = {pt.split(",")[1] for pt in pl.get("points").split()}
        assert len(ys) == 1
    ET.parse(tmp_path / "diagnostics.svg")
    text = (tmp_path / "phi_snapshots.svg").read_text()
    assert "href" not in text and "<image" not in text


def test_sweep_svg(tmp_path, sweep4):
    (path,) = emit_svg_plots(sweep4, tmp_path)
    root = ET.parse(path).getroot()
    markers = [c for c in root.iter(f"{SVG}circle") if c.get("class") == "marker"]
    guides = [p for p in root.iter(f"{SVG}polyline") if p.get("class") == "guide"]
    assert len(markers) == 4 and len(guides) == 1
    assert "slope p=" in ET.tostring(root, encoding="unicode")


def test_svg_deterministic(tmp_path):
    traj = solve(smooth_regular())
    a = emit_svg_plots(traj, tmp_path / "a")
    b = emit_svg_plots(traj, tmp_path / "b")
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]


def test_svg_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoError):
        emit_svg_plots(solve(smooth_regular(dt=0.1, T=0.3)), blocker)
