import json
import subprocess
from pathlib import Path

import numpy as np
import pytest

from hexmvop_plots import SchemaError, render
from hexmvop_plots.render import (render_decay, render_density,
                                  render_heatmap, render_zeros)

ART = Path(__file__).parent / "artifacts"


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """verify-all artifacts from the primary CLI (N = 2 keeps it quick)."""
    out = tmp_path_factory.mktemp("artifacts")
    r = subprocess.run(
        ["python3", "-m", "hexmvop.cli", "verify-all", "--alphas", "0.2,2",
         "--N", "2", "--out", str(out)],
        capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    return out


def test_zeros_markers_and_circle(artifacts, tmp_path):
    fig = render_zeros(artifacts / "zeros.csv")
    scatters = [c for c in fig.axes[0].collections]
    assert len(scatters) == 1
    n_rows = len((artifacts / "zeros.csv").read_text().splitlines()) - 2
    assert scatters[0].get_offsets().shape[0] == n_rows == 6  # 3N at N = 2
    # the circle overlay is the line at radius 1
    lines = fig.axes[0].get_lines()
    assert any(np.allclose(np.hypot(l.get_xdata(), l.get_ydata()), 1.0)
               for l in lines)
    out = render("zeros", artifacts / "zeros.csv", tmp_path / "z.png")
    assert Path(out).stat().st_size > 0


def test_density_mass_annotation(artifacts, tmp_path):
    fig = render_density(artifacts / "mu_star.csv")
    notes = [t.get_text() for ax in fig.axes for t in ax.texts]
    assert any("mass 1.000" in t for t in notes)
    render("density", artifacts / "mu_star.csv", tmp_path / "d.png")


def test_decay_slope_negative(artifacts, tmp_path):
    fig = render_decay(artifacts / "decay.csv")
    notes = [t.get_text() for ax in fig.axes for t in ax.texts]
    slope_note = [t for t in notes if "slope" in t]
    assert slope_note and float(slope_note[0].split()[-1]) < 0
    render("decay", artifacts / "decay.csv", tmp_path / "e.png")


def test_heatmap_all_types(artifacts, tmp_path):
    for t in (0, 1, 2, 3):
        fig = render_heatmap(artifacts / "kernel_map.csv", lozenge_type=t)
        assert fig.axes[0].get_images()
    render("heatmap", artifacts / "kernel_map.csv", tmp_path / "h.png")


def test_schema_mismatch_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    with pytest.raises(SchemaError):
        render_zeros(bad)
    r = subprocess.run(["python3", "-m", "hexmvop_plots.cli", "zeros",
                        str(bad), str(tmp_path / "o.png")],
                       capture_output=True, text=True)
    assert r.returncode == 1


def test_render_deterministic(artifacts, tmp_path):
    p1 = render("zeros", artifacts / "zeros.csv", tmp_path / "a.png")
    p2 = render("zeros", artifacts / "zeros.csv", tmp_path / "b.png")
    assert Path(p1).read_bytes() == Path(p2).read_bytes()


def test_inputs_not_mutated(artifacts, tmp_path):
    before = (artifacts / "zeros.csv").read_bytes()
    render("zeros", artifacts / "zeros.csv", tmp_path / "c.png")
    assert (artifacts / "zeros.csv").read_bytes() == before


def test_criterion_13_all_kinds_from_verify_all(artifacts, tmp_path):
    pairs = [("zeros", "zeros.csv"), ("density", "mu_star.csv"),
             ("decay", "decay.csv"), ("heatmap", "kernel_map.csv")]
    for kind, src in pairs:
        out = render(kind, artifacts / src, tmp_path / f"{kind}.png")
        assert Path(out).stat().st_size > 0
    fig = render_zeros(artifacts / "zeros.csv")
    markers = fig.axes[0].collections[0].get_offsets().shape[0]
    assert markers == 6          # exactly 3N at N = 2
    print("ACCEPTANCE 13: PASS - all four plot kinds render; "
          f"zeros figure has circle overlay and {markers} markers")
