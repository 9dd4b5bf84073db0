import math

import pytest

from topomode.plot import emit_plot, render_svg


def test_two_point_curve_gives_one_polyline(tmp_path):
    path = emit_plot([("eta", [0, 1], [1, 0])], tmp_path / "p.svg", title="t", xlabel="b", ylabel="eta")
    text = path.read_text()
    assert text.count("<polyline") == 1
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")


def test_one_polyline_per_curve():
    text = render_svg([("a", [0, 1, 2], [0, 1, 0]), ("b", [0, 1, 2], [1, 0, 1])])
    assert text.count("<polyline") == 2


def test_byte_deterministic(tmp_path):
    curves = [("x", [0.0, 0.3, 0.7], [1.0, 0.5, math.nan])]
    first = emit_plot(curves, tmp_path / "a.svg").read_bytes()
    second = emit_plot(curves, tmp_path / "b.svg").read_bytes()
    assert first == second


@pytest.mark.parametrize("curves", [[], [("x", [], [])], [("x", [1.0], [2.0])],
                                    [("x", [1, 2], [1])], [("x", [1, 2], [math.nan, math.nan])]])
def test_degenerate_input_rejected(curves):
    with pytest.raises(ValueError):
        render_svg(curves)


def test_labels_are_escaped():
    assert "&lt;b&gt;" in render_svg([("<b>", [0, 1], [0, 1])])


def test_io_error_mentions_path(tmp_path):
    target = tmp_path / "missing" / "p.svg"
    with pytest.raises(OSError, match="missing"):
        emit_plot([("x", [0, 1], [0, 1])], target)


def test_flat_curve_renders():
    assert "<polyline" in render_svg([("flat", [0, 1, 2], [0.5, 0.5, 0.5])])
