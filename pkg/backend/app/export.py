# backend/app/export.py
import csv
import io
from typing import Iterable, Iterator, Optional, TextIO

from app.models import SweepRow, SweepTable

CSV_COLUMNS = ["alpha", "var_phi", "var_lz", "product", "hr_bound", "state_bound"]
DIVERGENT_CELL = "div"


def fmt(value: Optional[float]) -> str:
    """17 significant digits: lossless for binary64."""
    if value is None:
        return DIVERGENT_CELL
    return format(value, ".17g")


def row_cells(row: SweepRow) -> list:
    if row.status == "div":
        return [fmt(row.alpha), DIVERGENT_CELL, DIVERGENT_CELL, DIVERGENT_CELL,
                fmt(row.hr_bound), DIVERGENT_CELL]
    return [fmt(row.alpha), fmt(row.var_phi), fmt(row.var_lz), fmt(row.product),
            fmt(row.hr_bound), fmt(row.state_bound)]


def provenance_lines(table: SweepTable) -> Iterator[str]:
    for key, value in table.provenance.items():
        yield f"# {key}: {value}\n"


def write_sweep_csv(table: SweepTable, out: TextIO, provenance: bool = True) -> None:
    """
    CSV layout:
    - optional `# key: value` provenance lines (no timestamps)
    - header: alpha,var_phi,var_lz,product,hr_bound,state_bound
    - one row per alpha, '\\n' line endings
    """
    if provenance:
        for line in provenance_lines(table):
            out.write(line)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in table.rows:
        writer.writerow(row_cells(row))


def sweep_csv_text(table: SweepTable, provenance: bool = True) -> str:
    buf = io.StringIO(newline="")
    write_sweep_csv(table, buf, provenance=provenance)
    return buf.getvalue()


def iter_sweep_csv(table: SweepTable, provenance: bool = False) -> Iterable[str]:
    """Chunks for a streaming HTTP response."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    if provenance:
        yield from provenance_lines(table)
    writer.writerow(CSV_COLUMNS)
    for row in table.rows:
        writer.writerow(row_cells(row))
        yield buf.getvalue()
        buf.seek(0)
        buf.truncate(0)
    if buf.getvalue():
        yield buf.getvalue()
