"""
Tests for VerificationLogger
"""

from io import StringIO

import pytest

from ranks.services import Mismatch
from ranks.verification_logger import VerificationLogger


@pytest.fixture
def verification_logger(tmp_path):
    return VerificationLogger("double22", log_dir=tmp_path)


@pytest.mark.unit
class TestVerificationLogger:
    """Test per-run verification log files"""

    def test_creates_files_under_verify(self, verification_logger, tmp_path):
        """Test the mismatch log exists from the start"""
        assert verification_logger.mismatch_log_file.parent == tmp_path / "verify"
        header = verification_logger.mismatch_log_file.read_text()
        assert header.startswith("MISMATCH LOG - DOUBLE22")

    def test_counts(self, verification_logger):
        """Test points, ranks, mismatches and skips are tallied"""
        verification_logger.log_point("[2;2]x4", "oracle", 5)
        verification_logger.log_point("[2;2]x12", "checksum", 5)
        verification_logger.log_skipped("[2;2]x40", "over budget")
        verification_logger.log_mismatch(
            Mismatch("double22", "[2;2]x4", 4, None, 2, 125, 126, "oracle")
        )
        assert verification_logger.get_stats() == {
            "points": 2,
            "ranks": 10,
            "mismatches": 1,
            "skipped": 1,
        }
        text = verification_logger.mismatch_log_file.read_text()
        assert "Formula: 125" in text
        assert "Reference: 126" in text
        assert "Reason: over budget" in text

    def test_summary(self, verification_logger):
        """Test the summary lists methods and extra statistics"""
        verification_logger.log_point("[2;2]x4", "oracle", 5)
        verification_logger.write_summary({"Budget": "67,108,864 states"})
        text = verification_logger.summary_log_file.read_text()
        assert "Points Checked: 1" in text
        assert "  oracle: 1" in text
        assert "Budget: 67,108,864 states" in text

    def test_console_summary(self, verification_logger):
        """Test the console summary names both log files"""
        out = StringIO()
        verification_logger.print_console_summary(out)
        output = out.getvalue()
        assert "Verification Summary (double22)" in output
        assert str(verification_logger.summary_log_file) in output
