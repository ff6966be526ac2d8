"""
Logging utility for verification runs.
Creates a mismatch log and a summary file per verified family.
"""

from datetime import datetime
from pathlib import Path


class VerificationLogger:
    """Per-run verification logging with file output"""

    def __init__(self, family_id, log_dir="logs"):
        self.family_id = family_id

        # Create logs directory if it doesn't exist
        self.logs_dir = Path(log_dir) / "verify"
        self.logs_dir.mkdir(parents=True, exist_ok=True)

        self.timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")

        self.mismatch_log_file = (
            self.logs_dir / f"{self.family_id}_{self.timestamp}_MISMATCHES.log"
        )
        self.summary_log_file = (
            self.logs_dir / f"{self.family_id}_{self.timestamp}_SUMMARY.txt"
        )

        self.point_count = 0
        self.rank_count = 0
        self.mismatch_count = 0
        self.skipped_count = 0
        self.methods = {}

        self._init_log_files()

    def _init_log_files(self):
        with open(self.mismatch_log_file, "w", encoding="utf-8") as f:
            f.write(f"MISMATCH LOG - {self.family_id.upper()}\n")
            f.write(f"Timestamp: {self.timestamp}\n")
            f.write("=" * 80 + "\n\n")

    def log_point(self, shape, method, ranks_checked):
        """Record one (k, l) point compared by the given method"""
        self.point_count += 1
        self.rank_count += ranks_checked
        self.methods[method] = self.methods.get(method, 0) + 1

    def log_mismatch(self, mismatch):
        self.mismatch_count += 1

        with open(self.mismatch_log_file, "a", encoding="utf-8") as f:
            f.write(f"MISMATCH #{self.mismatch_count}\n")
            f.write(f"Shape: {mismatch.shape}\n")
            f.write(f"Rank: {mismatch.i}\n")
            f.write(f"Method: {mismatch.method}\n")
            f.write(f"Formula: {mismatch.formula}\n")
            f.write(f"Reference: {mismatch.reference}\n")
            if mismatch.detail:
                f.write(f"Detail: {mismatch.detail}\n")
            f.write("-" * 50 + "\n\n")

    def log_skipped(self, shape, reason):
        self.skipped_count += 1

        with open(self.mismatch_log_file, "a", encoding="utf-8") as f:
            f.write(f"SKIPPED #{self.skipped_count}\n")
            f.write(f"Shape: {shape}\n")
            f.write(f"Reason: {reason}\n")
            f.write("-" * 40 + "\n\n")

    def write_summary(self, additional_stats=None):
        """Write final summary to summary log file"""
        with open(self.summary_log_file, "w", encoding="utf-8") as f:
            f.write(f"VERIFICATION SUMMARY - {self.family_id.upper()}\n")
            f.write(f"Timestamp: {self.timestamp}\n")
            f.write("=" * 60 + "\n\n")

            f.write("RESULTS:\n")
            f.write(f"  ✅ Points Checked: {self.point_count}\n")
            f.write(f"  🔢 Ranks Compared: {self.rank_count}\n")
            f.write(f"  ❌ Mismatches: {self.mismatch_count}\n")
            f.write(f"  ⚠️  Skipped: {self.skipped_count}\n\n")

            if self.methods:
                f.write("BY METHOD:\n")
                for method, count in sorted(self.methods.items()):
                    f.write(f"  {method}: {count}\n")
                f.write("\n")

            if additional_stats:
                f.write("ADDITIONAL STATISTICS:\n")
                for key, value in additional_stats.items():
                    f.write(f"  {key}: {value}\n")
                f.write("\n")

            f.write("LOG FILES:\n")
            f.write(f"  Mismatches/Skipped: {self.mismatch_log_file}\n")
            f.write(f"  Summary: {self.summary_log_file}\n")

    def print_console_summary(self, stdout):
        stdout.write(f"\n📊 Verification Summary ({self.family_id}):")
        stdout.write(f"   ✅ Points: {self.point_count}")
        stdout.write(f"   🔢 Ranks: {self.rank_count}")
        stdout.write(f"   ❌ Mismatches: {self.mismatch_count}")
        stdout.write(f"   ⚠️  Skipped: {self.skipped_count}")
        stdout.write(f"\n📁 Detailed logs written to:")
        stdout.write(f"   {self.mismatch_log_file}")
        stdout.write(f"   {self.summary_log_file}")

    def get_stats(self):
        """Return current statistics"""
        return {
            "points": self.point_count,
            "ranks": self.rank_count,
            "mismatches": self.mismatch_count,
            "skipped": self.skipped_count,
        }
