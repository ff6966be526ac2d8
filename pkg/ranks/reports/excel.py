from io import BytesIO

from openpyxl import Workbook
from openpyxl.styles import Font

from . import COLUMNS

_FORBIDDEN = str.maketrans({c: "" for c in "[]:*?/\\"})


def _sheet_title(shape, used):
    """Excel sheet names: no brackets, at most 31 characters, unique."""
    base = shape.translate(_FORBIDDEN)[:31] or "shape"
    title = base
    n = 2
    while title in used:
        suffix = f" ({n})"
        title = base[: 31 - len(suffix)] + suffix
        n += 1
    used.add(title)
    return title


def render(rows):
    """Excel workbook with one sheet per shape; counts stored as text."""
    wb = Workbook()
    wb.remove(wb.active)  # Remove default sheet

    sheets = {}
    used = set()
    for row in rows:
        ws = sheets.get(row["shape"])
        if ws is None:
            ws = wb.create_sheet(title=_sheet_title(row["shape"], used))
            ws.append(list(COLUMNS))
            for cell in ws[1]:
                cell.font = Font(bold=True)
            sheets[row["shape"]] = ws
        ws.append(
            [row["shape"], row["i"], str(row["gamma"]), row["source"], row["anchors"]]
        )

    buffer = BytesIO()
    wb.save(buffer)
    return buffer.getvalue()
