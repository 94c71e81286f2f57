"""Strict parsing of the simulator's file formats."""

import math

import numpy as np
import pytest

from hypfig.readers import (
    ParseError,
    read_curve,
    read_measure,
    read_particles,
    read_report,
)

PARTICLE_HEADER = "id,parent,birth_time,x,logY,typical_ok,first_violation"


def write(path, text):
    path.write_text(text)
    return str(path)


class TestMeasure:
    def test_roundtrip(self, tmp_path):
        path = write(
            tmp_path / "measure.csv",
            "angle,weight,typical\n1.0,0.5,1\n2.0,0.5,0\n",
        )
        angles, weights = read_measure(path)
        assert angles.tolist() == [1.0, 2.0]
        assert weights.tolist() == [0.5, 0.5]

    def test_empty_is_fine(self, tmp_path):
        path = write(tmp_path / "measure.csv", "angle,weight,typical\n")
        angles, weights = read_measure(path)
        assert angles.size == 0 and weights.size == 0

    def test_bad_header_names_line_one(self, tmp_path):
        path = write(tmp_path / "measure.csv", "angle,weight\n1.0,0.5\n")
        with pytest.raises(ParseError, match="line 1"):
            read_measure(path)

    def test_bad_number_names_its_line(self, tmp_path):
        path = write(
            tmp_path / "measure.csv",
            "angle,weight,typical\n1.0,0.5,1\n2.0,oops,1\n",
        )
        with pytest.raises(ParseError, match="line 3"):
            read_measure(path)

    def test_wrong_field_count_names_its_line(self, tmp_path):
        path = write(
            tmp_path / "measure.csv", "angle,weight,typical\n1.0,0.5\n"
        )
        with pytest.raises(ParseError, match="line 2"):
            read_measure(path)

    def test_angle_range_checked(self, tmp_path):
        path = write(
            tmp_path / "measure.csv", f"angle,weight,typical\n{4.0 * math.pi},0.5,1\n"
        )
        with pytest.raises(ParseError, match="line 2"):
            read_measure(path)

    def test_message_names_the_file(self, tmp_path):
        path = write(tmp_path / "measure.csv", "nope\n")
        with pytest.raises(ParseError, match="measure.csv"):
            read_measure(path)


class TestParticles:
    def test_roundtrip_with_absent_fields(self, tmp_path):
        # The root has no parent and a clean particle no violation time;
        # the writer leaves those fields empty.
        path = write(
            tmp_path / "particles.csv",
            PARTICLE_HEADER + "\n0,,0.0,0.25,-1.5,1,\n1,0,0.5,-0.5,0.5,0,2.0\n",
        )
        x, logy = read_particles(path)
        assert x.tolist() == [0.25, -0.5]
        assert logy.tolist() == [-1.5, 0.5]

    def test_empty_positions_rejected(self, tmp_path):
        path = write(
            tmp_path / "particles.csv",
            PARTICLE_HEADER + "\n0,,0.0,,-1.5,1,\n",
        )
        with pytest.raises(ParseError, match="line 2"):
            read_particles(path)

    def test_blank_line_rejected(self, tmp_path):
        path = write(
            tmp_path / "particles.csv",
            PARTICLE_HEADER + "\n0,,0.0,0.25,-1.5,1,\n\n",
        )
        with pytest.raises(ParseError, match="line 3"):
            read_particles(path)


class TestCurve:
    def test_roundtrip(self, tmp_path):
        path = write(tmp_path / "curve.csv", "delta,value\n0.1,12.0\n0.2,7.0\n")
        deltas, values = read_curve(path)
        assert deltas.tolist() == [0.1, 0.2]
        assert values.tolist() == [12.0, 7.0]

    def test_nonpositive_scale_rejected(self, tmp_path):
        path = write(tmp_path / "curve.csv", "delta,value\n-0.1,3.0\n")
        with pytest.raises(ParseError, match="line 2"):
            read_curve(path)


class TestReport:
    def test_roundtrip(self, tmp_path):
        path = write(
            tmp_path / "dimension.json",
            '{"name": "box-dimension-support", "estimate": 0.8, '
            '"stderr": 0.05, "scales": [0.001, 0.1], "params": {"beta": 0.4}}\n',
        )
        report = read_report(path)
        assert report["estimate"] == 0.8

    def test_missing_keys_rejected(self, tmp_path):
        path = write(tmp_path / "dimension.json", '{"name": "x"}\n')
        with pytest.raises(ParseError):
            read_report(path)

    def test_invalid_json_names_a_line(self, tmp_path):
        path = write(tmp_path / "dimension.json", '{"name": \n')
        with pytest.raises(ParseError, match="line"):
            read_report(path)
