"""Reader for the scheduler sweep results CSV.

This package deliberately consumes only the simulator's delimited output,
so the loader revalidates the full contract instead of trusting the file:
exact eight-column header, numeric fields, and the refused-cell convention
(ber == "unreached" with min_sinr_db and obj_evals set to "nan").
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path


EXPECTED_HEADER = (
    "scheduler",
    "K",
    "snr_db",
    "ber",
    "min_sinr_db",
    "obj_evals",
    "realizations",
    "symbols",
)

UNREACHED = "unreached"


class ResultsFormatError(ValueError):
    """Raised when a results CSV does not match the producer's contract."""


@dataclass(frozen=True)
class ResultRow:
    """One (scheduler, K, snr_db) cell of a sweep.

    ber, min_sinr_db and obj_evals are None on refused cells, where the
    producer declined to run the scheduler and emitted a placeholder row.
    """

    scheduler: str
    restarts: int
    snr_db: float
    ber: float | None
    min_sinr_db: float | None
    obj_evals: float | None
    realizations: int
    symbols: int

    @property
    def refused(self) -> bool:
        return self.ber is None


def _parse_float(text: str, column: str, line_no: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ResultsFormatError(
            f"line {line_no}: column {column!r} is not a number: {text!r}"
        ) from None


def _parse_int(text: str, column: str, line_no: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ResultsFormatError(
            f"line {line_no}: column {column!r} is not an integer: {text!r}"
        ) from None


def load_results(path: str | Path) -> list[ResultRow]:
    """Load and validate a sweep results CSV.

    Returns rows in file order. Raises ResultsFormatError on a bad header,
    a short or long row, or a non-numeric field; raises FileNotFoundError
    when the file does not exist.
    """
    path = Path(path)
    with path.open("r", encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ResultsFormatError(f"{path}: empty file, expected a header row") from None
        if tuple(header) != EXPECTED_HEADER:
            raise ResultsFormatError(
                f"{path}: bad header {header!r}, expected {list(EXPECTED_HEADER)!r}"
            )
        rows: list[ResultRow] = []
        for line_no, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(EXPECTED_HEADER):
                raise ResultsFormatError(
                    f"line {line_no}: expected {len(EXPECTED_HEADER)} columns, got {len(rec)}"
                )
            scheduler = rec[0]
            if not scheduler:
                raise ResultsFormatError(f"line {line_no}: empty scheduler name")
            restarts = _parse_int(rec[1], "K", line_no)
            snr_db = _parse_float(rec[2], "snr_db", line_no)
            if rec[3] == UNREACHED:
                ber = min_sinr = evals = None
            else:
                ber = _parse_float(rec[3], "ber", line_no)
                min_sinr = _parse_float(rec[4], "min_sinr_db", line_no)
                evals = _parse_float(rec[5], "obj_evals", line_no)
            rows.append(
                ResultRow(
                    scheduler=scheduler,
                    restarts=restarts,
                    snr_db=snr_db,
                    ber=ber,
                    min_sinr_db=min_sinr,
                    obj_evals=evals,
                    realizations=_parse_int(rec[6], "realizations", line_no),
                    symbols=_parse_int(rec[7], "symbols", line_no),
                )
            )
    return rows


def series_keys(rows: list[ResultRow]) -> list[tuple[str, int]]:
    """Distinct (scheduler, K) pairs in first-appearance order."""
    seen: dict[tuple[str, int], None] = {}
    for row in rows:
        seen.setdefault((row.scheduler, row.restarts), None)
    return list(seen)
