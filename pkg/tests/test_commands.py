"""
Tests for the rank engine management commands.

Usage errors end with returncode 2 and verification mismatches with
returncode 1; every run here writes its cache and logs under tmp_path.
"""

from io import BytesIO, StringIO
from pathlib import Path
from unittest.mock import patch

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError
from openpyxl import load_workbook

from ranks.reports import csv as csv_report
from ranks.reports import json as json_report
from ranks.services import Mismatch, PointResult, VerificationReport


def run(*args):
    out = StringIO()
    err = StringIO()
    call_command(*args, stdout=out, stderr=err)
    return out.getvalue()


def usage_error(*args):
    with pytest.raises(CommandError) as excinfo:
        run(*args)
    assert excinfo.value.returncode == 2
    return excinfo.value


@pytest.mark.integration
@pytest.mark.usefixtures("isolated_settings")
class TestSolveCountCommand:
    """Test solve_count"""

    def test_prints_only_the_count(self):
        """Test R_1 of [5]x5"""
        assert run("solve_count", "--shape", "[5]x5", "--q", "1") == "63\n"

    def test_free_row_shape(self):
        """Test R_2 of [5;1]x5"""
        assert run("solve_count", "--shape", "[5;1]x5", "--q", "2").strip() == "14752"

    def test_smL(self):
        """Test R_1 of [3;3;3]x4 given as a triple"""
        assert run("solve_count", "--smL", "3,0,0", "--k", "4", "--q", "1").strip() == "527"

    def test_verbose_header(self):
        """Test verbosity 2 names the shape and source"""
        output = run("solve_count", "--shape", "[2]x2", "--q", "3", "--verbosity", "2")
        lines = output.strip().split("\n")
        assert lines[0] == "📊 [2]x2, q=3 (closed-form)"
        assert lines[-1] == "736"

    def test_q_must_be_positive(self):
        """Test --q 0"""
        usage_error("solve_count", "--shape", "[5]x5", "--q", "0")


@pytest.mark.integration
@pytest.mark.usefixtures("isolated_settings")
class TestDistCommand:
    """Test dist"""

    def test_oracle_table(self):
        """Test enumeration of [1;1;1]x1"""
        output = run("dist", "--shape", "[1;1;1]x1", "--method", "oracle")
        lines = output.strip().split("\n")
        assert lines[0] == "📊 [1;1;1]x1  (oracle)"
        assert lines[2].split() == ["0", "1"]
        assert lines[3].split() == ["1", "7"]
        assert "✅ Sum = 8 = 2^3" in output

    def test_oracle_writes_cache(self, isolated_settings):
        """Test the enumeration lands in the configured cache"""
        run("dist", "--shape", "[2]x2", "--method", "oracle")
        cache = Path(isolated_settings.RANKS_CACHE_PATH)
        assert cache.exists()
        assert "[2]x2" in cache.read_text()

    def test_no_cache(self, isolated_settings):
        """Test --no-cache leaves no cache file"""
        run("dist", "--shape", "[2]x2", "--method", "oracle", "--no-cache")
        assert not Path(isolated_settings.RANKS_CACHE_PATH).exists()

    def test_json_format(self):
        """Test --format json from the registry"""
        rows = json_report.parse(run("dist", "--shape", "[2;2]x4", "--format", "json"))
        assert [row["gamma"] for row in rows] == [1, 9, 126, 504, 384]

    def test_shape_and_smL_together(self):
        """Test --shape and --smL are exclusive"""
        usage_error("dist", "--shape", "[2]x2", "--smL", "2,0,0", "--k", "2")

    def test_smL_needs_k(self):
        """Test --smL without --k"""
        usage_error("dist", "--smL", "3,0,2")

    def test_malformed_shape(self):
        """Test unparseable shape text"""
        error = usage_error("dist", "--shape", "[2;;2]x4")
        assert "Invalid shape" in str(error)

    def test_formula_for_unknown_shape(self):
        """Test --method formula without a matching family"""
        usage_error("dist", "--shape", "[3;4]x3", "--method", "formula")

    def test_budget_exceeded(self):
        """Test enumeration beyond --budget is refused"""
        with pytest.raises(CommandError) as excinfo:
            run("dist", "--shape", "[5]x5", "--method", "oracle", "--budget", "2^4")
        assert excinfo.value.returncode == 1
        assert "exceeds budget" in str(excinfo.value)


@pytest.mark.integration
@pytest.mark.usefixtures("isolated_settings")
class TestOracleSolveCommand:
    """Test oracle_solve"""

    def test_show_system(self):
        """Test the expanded system precedes the count"""
        output = run("oracle_solve", "--shape", "[2;2;2]x2", "--q", "2", "--show-system")
        lines = output.strip().split("\n")
        assert lines[0] == "📋 [2;2;2]x2, q=2: 16 variables, 9 equations"
        assert "   x1x5 + x3x7 = 0" in lines
        assert lines[-1] == "4720"

    def test_named_style(self):
        """Test named variables for [1]x1"""
        output = run(
            "oracle_solve", "--shape", "[1]x1", "--q", "1", "--show-system", "--style", "named"
        )
        assert "   y1z1 = 0" in output.split("\n")
        assert output.strip().split("\n")[-1] == "3"

    def test_budget(self):
        """Test the coefficient tuples are held to --budget"""
        with pytest.raises(CommandError) as excinfo:
            run("oracle_solve", "--shape", "[5]x5", "--q", "2", "--budget", "2^10")
        assert "coefficient tuples" in str(excinfo.value)


@pytest.mark.integration
@pytest.mark.usefixtures("isolated_settings")
class TestVerifyCommand:
    """Test verify"""

    def test_family_passes(self, isolated_settings):
        """Test [5;5]x4 verifies by enumeration and writes logs"""
        output = run("verify", "--family", "double55", "--k", "4")
        assert "✅ double55: 1 point(s), 5 rank(s) [oracle: 1]" in output
        assert "✅ 1 family verified, 1 point(s), no mismatches" in output
        log_dir = Path(isolated_settings.RANKS_LOG_DIR) / "verify"
        summaries = list(log_dir.glob("double55_*_SUMMARY.txt"))
        assert len(summaries) == 1
        assert "Workers: 1" in summaries[0].read_text()

    def test_mismatch_exit_code(self):
        """Test a mismatch ends with returncode 1"""
        report = VerificationReport(
            "double22",
            points=[PointResult("[2;2]x4", 4, None, "oracle", 5)],
            mismatches=[Mismatch("double22", "[2;2]x4", 4, None, 2, 125, 126, "oracle")],
        )
        out = StringIO()
        with patch(
            "ranks.management.commands.verify.VerificationService.verify_family",
            return_value=report,
        ):
            with pytest.raises(CommandError) as excinfo:
                call_command("verify", "--family", "double22", "--k", "4", stdout=out)
        assert excinfo.value.returncode == 1
        assert "[2;2]x4 i=2: formula 125, oracle 126" in out.getvalue()

    def test_unknown_family(self):
        """Test an unknown family id"""
        usage_error("verify", "--family", "nope")

    def test_all_with_range(self):
        """Test --k only applies to a single family"""
        usage_error("verify", "--all", "--k", "1..3")


@pytest.mark.integration
@pytest.mark.usefixtures("isolated_settings")
class TestTableCommand:
    """Test table"""

    def test_csv(self):
        """Test evaluated [2;2]xk tables as CSV"""
        rows = csv_report.parse(
            run("table", "--family", "double22", "--k", "4..5", "--format", "csv")
        )
        assert len(rows) == 10
        assert (rows[4]["shape"], rows[4]["i"], rows[4]["gamma"]) == ("[2;2]x4", 4, 384)

    def test_symbolic(self):
        """Test symbolic rendering needs no --l"""
        output = run("table", "--family", "triple-s3", "--symbolic")
        assert output.startswith("📋 triple-s3: [3;3;3+l]xk")

    def test_family_with_l_needs_l(self):
        """Test evaluating an l family without --l"""
        usage_error("table", "--family", "triple-s3", "--k", "4")

    def test_list(self):
        """Test --list names every family"""
        output = run("table", "--list")
        assert "double55" in output
        assert "(partial)" in output

    def test_typos(self):
        """Test --typos prints the arbitrated constants"""
        output = run("table", "--typos")
        assert "stored:  8257536" in output

    def test_xlsx_needs_output(self):
        """Test Excel output is never written to the terminal"""
        usage_error("table", "--family", "double55", "--k", "4", "--format", "xlsx")

    def test_xlsx_output(self, tmp_path):
        """Test an Excel report written to a file"""
        path = tmp_path / "reports" / "double55.xlsx"
        output = run(
            "table", "--family", "double55", "--k", "4", "--format", "xlsx", "--output", str(path)
        )
        assert "✅ 1 distribution(s) written" in output
        wb = load_workbook(BytesIO(path.read_bytes()))
        assert wb.sheetnames == ["5;5x4"]
        assert wb["5;5x4"].cell(row=6, column=3).value == "64800"


@pytest.mark.integration
@pytest.mark.usefixtures("isolated_settings")
class TestReduceCommand:
    """Test reduce"""

    def test_chain(self):
        """Test rank 8 of [3;3;5]x12"""
        output = run("reduce", "--smL", "3,0,2", "--k", "12", "--i", "8")
        assert "=> Gamma_8 [3;3;5]x12 = 16^1 * Gamma_7 [3;3;4]x11" in output
        assert "✅ Matches the source formula" in output

    def test_no_rule(self):
        """Test a rank below every rule"""
        usage_error("reduce", "--smL", "3,0,2", "--k", "12", "--i", "4")


@pytest.mark.unit
@pytest.mark.usefixtures("isolated_settings")
class TestBenchCommand:
    """Test bench"""

    @patch("ranks.management.commands.bench.measure_throughput")
    def test_reports_rate(self, mock_measure):
        """Test states/second/worker is printed"""
        mock_measure.return_value = {
            "shape": "[2;2]x4",
            "states": 1024,
            "workers": 2,
            "seconds": 0.5,
            "states_per_second": 2048,
        }
        output = run("bench", "--shape", "[2;2]x4", "--states", "2^10", "--workers", "2")
        assert "📊 [2;2]x4" in output
        assert "✅ 1,024 states/second/worker" in output
        mock_measure.assert_called_once()
