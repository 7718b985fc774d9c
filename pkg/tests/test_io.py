import json

import numpy as np
import pytest

from brc.io import (FormatError, read_region, read_region_csv, region_svg, region_to_csv,
                    write_region_csv, write_region_json, write_region_svg)
from brc.regions import hull_of


@pytest.mark.parametrize("pts", [[[0.3, 0.2], [0.1, 0.5]], [[0.3, 0.2, 0.1], [0.1, 0.5, 0.0]]])
def test_round_trips(tmp_path, pts):
    r = hull_of(np.array(pts))
    write_region_csv(r, tmp_path / "r.csv")
    write_region_json(r, tmp_path / "r.json", meta={"seed": 1})
    for name in ("r.csv", "r.json"):
        back = read_region(tmp_path / name)
        assert np.array_equal(back.vertices, r.vertices)
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["meta"] == {"seed": 1} and data["dim"] == r.dim


def test_csv_has_no_negative_zero():
    r = hull_of(np.array([[0.5, 0.0]]))
    assert "-0" not in region_to_csv(r)


def test_bad_csv_reports_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("0.1,0.2\n0.3,abc\n")
    with pytest.raises(FormatError, match="line 2"):
        read_region_csv(p)
    p.write_text("0.1,0.2\n0.3\n")
    with pytest.raises(FormatError):
        read_region_csv(p)
    p.write_text("# nothing\n")
    with pytest.raises(FormatError):
        read_region_csv(p)
    q = tmp_path / "bad.json"
    q.write_text("{")
    with pytest.raises(FormatError):
        read_region(q)


def test_svg_panels(tmp_path):
    two = region_svg(hull_of(np.array([[0.3, 0.2]])))
    three = region_svg(hull_of(np.array([[0.3, 0.2, 0.1]])))
    assert two.startswith("<svg") and two.count("<polygon") == 1
    assert three.count("<polygon") == 3 and "R1 [bits]" in three
    write_region_svg(hull_of(np.array([[0.3, 0.2]])), tmp_path / "r.svg", title="t")
    assert "<text" in (tmp_path / "r.svg").read_text()
