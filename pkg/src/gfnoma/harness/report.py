"""CSV output for sweep summaries and eigenvalue profiles."""

import csv
import io
import os
import tempfile
from pathlib import Path

CSV_COLUMNS = ["sweep_value", "mean_decoded", "miss_rate", "fa_rate", "mean_ka_hat", "mean_nmse_db", "trials"]


def _fmt(v) -> str:
    # repr gives the shortest decimal that round-trips a float
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _write_atomic(path, text: str) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def format_csv(summaries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for s in summaries:
        writer.writerow([_fmt(v) for v in s.csv_row()])
    return buf.getvalue()


def emit_csv(summaries, path) -> None:
    """Write one row per sweep point; the file is replaced atomically."""
    _write_atomic(path, format_csv(summaries))


def read_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [{k: (int(v) if k == "trials" else float(v)) for k, v in row.items()} for row in reader]


def format_eigen_csv(rows) -> str:
    n = max((lam.size for _, _, lam in rows), default=0)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sweep_value", "realization"] + [f"lambda_{i + 1}" for i in range(n)])
    for value, r, lam in rows:
        writer.writerow([_fmt(value), str(r)] + [_fmt(x) for x in lam])
    return buf.getvalue()


def emit_eigen_csv(rows, path) -> None:
    _write_atomic(path, format_eigen_csv(rows))
