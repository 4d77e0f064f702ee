import csv
import json

import numpy as np
import pytest

from revmeas.campaign import CampaignRow
from revmeas.core import BipartiteState, DensityMatrix, bell_state, random_state
from revmeas.errors import NotComplete, SchemaError, TraceNotOne
from revmeas.formats import (
    emit_report,
    measurement_to_json,
    parse_measurement,
    parse_measurement_file,
    parse_state_file,
    report_text,
    state_to_json,
)
from revmeas.measurement import computational_basis, construct_reversible, random_basis

HEADER = "state_id,a,d_vn,d_u,j_vn,j_u,h_pna,lower,upper,gap_lhs,gap_rhs,lower_ok,upper_ok,gap_ok,spread_vn,spread_u"


def sample_row(i=0, ok=True):
    return CampaignRow(i, 0.25, 1.0, 1.8112781244591, 1.0, 0.18872187554, 0.8112781244591,
                       0.8112781244591, 1.6225562489, 0.8112781244, 0.18872187554, ok, True, ok,
                       3.3e-16, 0.0)


class TestStateFiles:
    def test_bell_round_trip(self, tmp_path):
        path = tmp_path / "bell.json"
        path.write_text(json.dumps(state_to_json(bell_state())))
        s = parse_state_file(path)
        assert isinstance(s, BipartiteState) and (s.dim_a, s.dim_b) == (2, 2)
        np.testing.assert_allclose(s.matrix, bell_state().matrix, atol=1e-15)

    def test_complex_round_trip(self, tmp_path):
        rho = random_state(3, 2, 5)
        path = tmp_path / "s.json"
        path.write_text(json.dumps(state_to_json(rho)))
        out = parse_state_file(path)
        assert isinstance(out, DensityMatrix)
        np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-15)

    def test_trace_violation_named(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dim": 2, "re": [[0.6, 0], [0, 0.6]], "im": [[0, 0], [0, 0]]}))
        with pytest.raises(TraceNotOne, match="1.2"):
            parse_state_file(path)

    def test_malformed_json_offset(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"dim": 2, "re": [[1, 0], [0 0]]}')
        with pytest.raises(SchemaError, match="byte offset 29"):
            parse_state_file(path)

    @pytest.mark.parametrize(
        "payload, match",
        [
            ({"re": [[1]]}, "dim"),
            ({"dim": 2, "re": [[1, 0]]}, "shape"),
            ({"dim": 2, "re": [[1, 0], [0, 0]], "dims": [3, 1]}, "dims"),
            ({"dim": 0, "re": []}, "positive"),
            ([1, 2], "object"),
        ],
    )
    def test_schema_errors(self, tmp_path, payload, match):
        path = tmp_path / "x.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(SchemaError, match=match):
            parse_state_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            parse_state_file(tmp_path / "nope.json")


class TestMeasurementFiles:
    def test_reversible_round_trip(self, tmp_path):
        meas = construct_reversible(random_basis(3, np.random.default_rng(2)), 0.2)
        path = tmp_path / "m.json"
        path.write_text(json.dumps(measurement_to_json(meas)))
        out = parse_measurement_file(path)
        assert out.a == 0.2
        for x, y in zip(out.elements, meas.elements):
            np.testing.assert_allclose(x, y, atol=1e-14)

    def test_projective(self):
        out = parse_measurement(measurement_to_json(computational_basis(2)))
        assert out.n == 2 and not hasattr(out, "a")

    def test_incomplete(self):
        obj = {"type": "projective", "projectors": [{"dim": 2, "re": [[1, 0], [0, 0]]}]}
        with pytest.raises(NotComplete):
            parse_measurement(obj)

    def test_bad_type(self):
        with pytest.raises(SchemaError):
            parse_measurement({"type": "weak", "projectors": []})

    def test_reversible_needs_a(self):
        obj = measurement_to_json(computational_basis(2))
        obj["type"] = "reversible"
        with pytest.raises(SchemaError, match="'a'"):
            parse_measurement(obj)


class TestEmitReport:
    def test_single_row_csv(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report([sample_row()], "csv", path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert lines[0] == HEADER
        cells = lines[1].split(",")
        assert cells[3] == "1.81127812"
        assert cells[11] == "true"

    def test_csv_json_agree(self, tmp_path):
        rows = [sample_row(0), sample_row(1, ok=False)]
        emit_report(rows, "csv", tmp_path / "r.csv")
        emit_report(rows, "json", tmp_path / "r.json")
        with open(tmp_path / "r.csv", newline="") as fh:
            from_csv = list(csv.DictReader(fh))
        from_json = json.loads((tmp_path / "r.json").read_text())
        assert [list(r) for r in from_json] == [HEADER.split(",")] * 2
        for c, j in zip(from_csv, from_json):
            for key, value in j.items():
                if isinstance(value, bool):
                    assert c[key] == ("true" if value else "false")
                else:
                    assert float(c[key]) == value

    def test_empty_rows(self, tmp_path):
        path = tmp_path / "none.csv"
        with pytest.raises(ValueError):
            emit_report([], "csv", path)
        assert not path.exists()

    def test_nine_significant_digits(self):
        text = report_text([sample_row()], "csv")
        assert "0.188721876" in text and "1.62255625" in text

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            report_text([sample_row()], "xml")
