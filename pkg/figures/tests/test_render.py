"""Renderer checks against golden CSVs produced by the spinlab CLI."""

from pathlib import Path

import numpy as np
import pytest

from spinfigs.cli import main
from spinfigs.plots import PlotSpec, RenderError, columns, figure_title, render

GOLDEN = Path(__file__).parent / "golden"
PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

CASES = [
    ("decay", "decay.csv"),
    ("entropy", "entropy.csv"),
    ("purification", "purification.csv"),
    ("lightcone", "lr.csv"),
    ("baker", "baker.csv"),
]


@pytest.mark.parametrize("kind,name", CASES)
def test_every_kind_renders_from_golden_inputs(kind, name, tmp_path):
    out = tmp_path / f"{kind}.png"
    rc = main(["--kind", kind, "--in", str(GOLDEN / name), "--out", str(out)])
    assert rc == 0
    assert out.read_bytes().startswith(PNG_MAGIC)
    assert out.stat().st_size > 5000


def test_decay_overlay_residual_below_plot_resolution():
    data = columns(GOLDEN / "decay.csv", ("t", "value", "reference"))
    residual = float(np.max(np.abs(data["value"] - data["reference"])))
    assert residual < 1e-6, f"overlay residual {residual}"
    print(f"PASS decay overlay residual {residual:.1e} (< 1e-6 data units)",
          flush=True)


def test_identical_inputs_give_identical_images(tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    for out in (a, b):
        spec = PlotSpec(inputs=(GOLDEN / "decay.csv",), output=out, kind="decay")
        render(spec)
    assert a.read_bytes() == b.read_bytes()


def test_missing_column(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,wrong\n0.0,1.0\n", encoding="utf-8")
    rc = main(["--kind", "decay", "--in", str(bad), "--out",
               str(tmp_path / "x.png")])
    assert rc == 1
    assert "value" in capsys.readouterr().err


def test_empty_and_header_only_csv(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    assert main(["--kind", "baker", "--in", str(empty),
                 "--out", str(tmp_path / "x.png")]) == 1
    header_only = tmp_path / "h.csv"
    header_only.write_text("step,max_deviation\n", encoding="utf-8")
    assert main(["--kind", "baker", "--in", str(header_only),
                 "--out", str(tmp_path / "x.png")]) == 1


def test_missing_file(tmp_path):
    assert main(["--kind", "decay", "--in", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "x.png")]) == 1


def test_unknown_kind_is_rejected(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["--kind", "pie", "--in", "x.csv", "--out", "x.png"])
    assert exc.value.code != 0


def test_incomplete_lightcone_grid(tmp_path):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("t,x,lhs\n0.5,1,0.1\n0.5,2,0.2\n1.0,1,0.3\n",
                      encoding="utf-8")
    rc = main(["--kind", "lightcone", "--in", str(ragged),
               "--out", str(tmp_path / "x.png")])
    assert rc == 1


def test_plotspec_validation(tmp_path):
    with pytest.raises(ValueError):
        PlotSpec(inputs=(GOLDEN / "decay.csv",), output=tmp_path / "x.png",
                 kind="sculpture")
    with pytest.raises(ValueError):
        PlotSpec(inputs=(), output=tmp_path / "x.png", kind="decay")


def test_title_includes_sidecar_parameters():
    assert figure_title("decay", {"xi": 2.0, "seed": 0, "points": 200}) == \
        "decay (points=200, xi=2.0)"
    assert figure_title("baker", {}) == "baker"
