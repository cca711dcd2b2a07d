"""Matrix/table/key-value file round trips and parse diagnostics."""

import numpy as np
import pytest

from pegica.errors import MatrixFormatError
from pegica.matio import (
    format_value,
    parse_matrix_csv,
    parse_value,
    read_keyvalues,
    read_table,
    write_keyvalues,
    write_matrix_csv,
    write_table,
)


class TestValueFormatting:
    def test_shortest_repr_round_trip(self):
        for v in (0.1, 1.0 / 3.0, 1e-300, -2.5e300, 12345.6789, -0.0):
            assert parse_value(format_value(v)) == v

    def test_complex_round_trip(self):
        for v in (1.5 + 2.5j, -0.1 - 0.2j, 3.0 + 0.0j, 0.0 - 1e-30j):
            assert parse_value(format_value(v), complex_field=True) == v

    def test_non_numeric_rejected(self):
        with pytest.raises(MatrixFormatError):
            parse_value("grapefruit")


class TestMatrixRoundTrip:
    def test_real_matrix_exact(self, rng, tmp_path):
        M = rng.standard_normal((100, 7))
        path = tmp_path / "m.csv"
        write_matrix_csv(path, M)
        back = parse_matrix_csv(path)
        assert back.dtype == np.float64
        np.testing.assert_array_equal(back, M)

    def test_complex_matrix_exact(self, rng, tmp_path):
        M = rng.standard_normal((20, 4)) + 1j * rng.standard_normal((20, 4))
        path = tmp_path / "m.csv"
        write_matrix_csv(path, M)
        back = parse_matrix_csv(path)
        assert back.dtype == np.complex128
        np.testing.assert_array_equal(back, M)

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("# a comment\n2,2,real\n\n1.0,2.0\n# another\n3.0,4.0\n")
        np.testing.assert_array_equal(parse_matrix_csv(path), [[1.0, 2.0], [3.0, 4.0]])

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("")
        with pytest.raises(MatrixFormatError, match="empty"):
            parse_matrix_csv(path)

    def test_ragged_row_names_the_row(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("2,3,real\n1.0,2.0,3.0\n4.0,5.0\n")
        with pytest.raises(MatrixFormatError, match="row 2"):
            parse_matrix_csv(path)

    def test_bad_cell_names_row_and_column(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,3,real\n1.0,oops,3.0\n")
        with pytest.raises(MatrixFormatError, match="row 1, column 2"):
            parse_matrix_csv(path)

    def test_row_count_mismatch_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("3,2,real\n1.0,2.0\n3.0,4.0\n")
        with pytest.raises(MatrixFormatError, match="promises 3 rows"):
            parse_matrix_csv(path)

    def test_unknown_field_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,1,quaternion\n1.0\n")
        with pytest.raises(MatrixFormatError, match="quaternion"):
            parse_matrix_csv(path)


class TestTables:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "t.csv"
        header = ("a", "b", "c")
        rows = [("1", "x", "2.5"), ("2", "y", "-1.0")]
        write_table(path, header, rows)
        back_header, back_rows = read_table(path)
        assert tuple(back_header) == header
        assert [tuple(r) for r in back_rows] == rows

    def test_ragged_table_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n1,2\n3\n")
        with pytest.raises(MatrixFormatError, match="row 2"):
            read_table(path)


class TestKeyValues:
    def test_round_trip_with_lists(self, tmp_path):
        path = tmp_path / "cfg.txt"
        write_keyvalues(path, {"n": 8, "samples": [10, 20, 30], "panel": "paper"})
        back = read_keyvalues(path)
        assert back == {"n": "8", "samples": "10,20,30", "panel": "paper"}

    def test_comments_skipped(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("# config\nn=4\n\nm=3\n")
        assert read_keyvalues(path) == {"n": "4", "m": "3"}

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("n=4\nbogus line\n")
        with pytest.raises(MatrixFormatError, match="line 2"):
            read_keyvalues(path)
