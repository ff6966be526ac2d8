"""
Reports for rank distributions (markdown, CSV, JSON, Excel).

Every format shares one row layout: shape, i, gamma, source, anchors.
Counts are written as exact decimal integers.
"""

COLUMNS = ("shape", "i", "gamma", "source", "anchors")
FORMATS = ("md", "csv", "json", "xlsx")


def rank_anchors(dist, i):
    """Anchors for rank i: its own ``"i=N: ..."`` entries plus shape-wide ones."""
    prefix = f"i={i}: "
    anchors = []
    for anchor in dist.anchors:
        if anchor.startswith(prefix):
            anchors.append(anchor[len(prefix):])
        elif not anchor.startswith("i="):
            anchors.append(anchor)
    return "; ".join(anchors)


def report_rows(results):
    """One row dict per (distribution, rank)."""
    rows = []
    for dist in results:
        for i, count in enumerate(dist.counts):
            rows.append(
                {
                    "shape": dist.shape,
                    "i": i,
                    "gamma": count,
                    "source": dist.source.value,
                    "anchors": rank_anchors(dist, i),
                }
            )
    return rows


def emit_report(fmt, results):
    """
    Render distributions in one of the report formats.

    Args:
        fmt: md, csv, json or xlsx
        results: iterable of RankDistribution

    Returns:
        str, or bytes for xlsx
    """
    from . import csv, excel, json, markdown

    renderers = {
        "md": markdown.render,
        "csv": csv.render,
        "json": json.render,
        "xlsx": excel.render,
    }
    if fmt not in renderers:
        raise ValueError(f"unknown report format {fmt!r}; choose from {', '.join(FORMATS)}")
    return renderers[fmt](report_rows(results))
