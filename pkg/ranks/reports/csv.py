import csv
import io

from . import COLUMNS


def render(rows):
    """CSV export with a header row"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([row[c] for c in COLUMNS])
    return buffer.getvalue()


def parse(text):
    """Rows from CSV text, with i and gamma back as integers."""
    rows = []
    for record in csv.DictReader(io.StringIO(text)):
        rows.append({**record, "i": int(record["i"]), "gamma": int(record["gamma"])})
    return rows
