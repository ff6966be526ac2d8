"""
Tests for distribution reports
"""

from io import BytesIO

import pytest
from openpyxl import load_workbook

from ranks.oracle import RankDistribution, Source
from ranks.registry import eval_family
from ranks.reports import COLUMNS, emit_report, rank_anchors, report_rows
from ranks.reports import csv as csv_report
from ranks.reports import json as json_report
from ranks.reports.markdown import render_aligned


@pytest.fixture
def single55():
    return eval_family("single", k=5, s=5)


@pytest.fixture
def big_triple():
    return eval_family("triple-2-3-4x6")


@pytest.mark.unit
class TestReportRows:
    """Test the shared row layout"""

    def test_one_row_per_rank(self, single55):
        """Test [5]x5 gives six rows in rank order"""
        rows = report_rows([single55])
        assert [row["i"] for row in rows] == [0, 1, 2, 3, 4, 5]
        assert [row["gamma"] for row in rows] == [1, 3, 12, 48, 192, 256]
        assert {row["source"] for row in rows} == {"closed-form"}

    def test_rank_anchors(self):
        """Test rank-specific prefixes are stripped and shape-wide anchors kept"""
        dist = RankDistribution(
            "[2]x2",
            (1, 3, 4),
            Source.EXTENSION,
            ("i=0: zero", "i=1: one", "free 1x2 block"),
        )
        assert rank_anchors(dist, 1) == "one; free 1x2 block"
        assert rank_anchors(dist, 2) == "free 1x2 block"


@pytest.mark.unit
class TestFormats:
    """Test each report format"""

    def test_markdown(self, single55):
        """Test a markdown table with header, rule and six rows"""
        text = emit_report("md", [single55])
        lines = text.strip().split("\n")
        assert lines[0] == "| " + " | ".join(COLUMNS) + " |"
        assert len(lines) == 8
        assert lines[-1].startswith("| [5]x5 | 5 | 256 | closed-form |")

    def test_aligned(self, single55):
        """Test right-aligned terminal output"""
        lines = render_aligned(report_rows([single55])).split("\n")
        assert lines[0] == "i  gamma"
        assert lines[-1] == "5    256"

    def test_csv_parse(self, big_triple):
        """Test large counts survive CSV exactly"""
        rows = csv_report.parse(emit_report("csv", [big_triple]))
        assert rows[6]["gamma"] == 2145687552
        assert rows == report_rows([big_triple])

    def test_json_parse(self, big_triple):
        """Test JSON stores counts as strings and reads them back exactly"""
        text = emit_report("json", [big_triple])
        assert '"gamma": "2145687552"' in text
        assert json_report.parse(text) == report_rows([big_triple])

    def test_json_version_check(self):
        """Test an unknown report version is refused"""
        with pytest.raises(ValueError):
            json_report.parse('{"report_version": 99, "rows": []}')

    def test_excel(self, single55, big_triple):
        """Test one sheet per shape with bold headers and text counts"""
        content = emit_report("xlsx", [single55, big_triple])
        wb = load_workbook(BytesIO(content))
        assert wb.sheetnames == ["5x5", "2;5;9x6"]
        ws = wb["2;5;9x6"]
        assert [cell.value for cell in ws[1]] == list(COLUMNS)
        assert ws["A1"].font.bold
        assert ws.cell(row=8, column=3).value == "2145687552"

    def test_excel_same_shape(self, single55):
        """Test two distributions of one shape share a sheet"""
        other = RankDistribution("[5]x5", single55.counts, Source.ORACLE)
        wb = load_workbook(BytesIO(emit_report("xlsx", [single55, other])))
        assert wb.sheetnames == ["5x5"]
        assert wb["5x5"].max_row == 13

    def test_unknown_format(self, single55):
        """Test an unsupported format"""
        with pytest.raises(ValueError):
            emit_report("pdf", [single55])
