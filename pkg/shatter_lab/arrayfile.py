"""Plain-text array files.

    words q k n          perms k n
    0110                 3 1 2
    1001                 ...

Word rows are written as contiguous digits when q <= 10, otherwise as
space-separated integers. Permutation rows are space-separated 1-based values.
"""

from __future__ import annotations

from pathlib import Path

from .core import ArrayKind, InvalidInputError, ParameterError, PermArray, ShatterArray, WordArray


class ArrayFileError(ValueError):
    """Raised when an array file is malformed."""


def _format_row(row: list[int], compact: bool) -> str:
    if compact:
        return "".join(str(v) for v in row)
    return " ".join(str(v) for v in row)


def dumps(arr: ShatterArray) -> str:
    if isinstance(arr, WordArray):
        header = f"words {arr.q} {arr.k} {arr.n}"
        compact = arr.q <= 10
    else:
        header = f"perms {arr.k} {arr.n}"
        compact = False
    lines = [header, *(_format_row(row, compact) for row in arr.cells.tolist())]
    return "\n".join(lines) + "\n"


def _parse_ints(fields: list[str], lineno: int) -> list[int]:
    try:
        return [int(v) for v in fields]
    except ValueError:
        joined = " ".join(fields)
        raise ArrayFileError(f"line {lineno}: expected integers, got {joined!r}.") from None


def _parse_header(line: str) -> tuple[ArrayKind, int | None, int, int]:
    fields = line.split()
    if not fields:
        raise ArrayFileError("line 1: missing header.")
    try:
        kind = ArrayKind(fields[0])
    except ValueError:
        raise ArrayFileError(f"line 1: unknown array kind {fields[0]!r}.") from None
    expected = 4 if kind is ArrayKind.WORDS else 3
    if len(fields) != expected:
        raise ArrayFileError(f"line 1: '{kind.value}' header needs {expected - 1} integers.")
    values = _parse_ints(fields[1:], 1)
    if kind is ArrayKind.WORDS:
        q, k, n = values
    else:
        q, (k, n) = None, values
    if k < 0 or n < 1:
        raise ArrayFileError(f"line 1: need k >= 0 and n >= 1, got k={k}, n={n}.")
    return kind, q, k, n


def _parse_row(line: str, lineno: int, n: int, compact: bool) -> list[int]:
    fields = line.split()
    if compact and len(fields) == 1 and len(fields[0]) == n:
        fields = list(fields[0])
    row = _parse_ints(fields, lineno)
    if len(row) != n:
        raise ArrayFileError(f"line {lineno}: expected {n} values, got {len(row)}.")
    return row


def loads(text: str) -> ShatterArray:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ArrayFileError("empty array file.")
    kind, q, k, n = _parse_header(lines[0])
    body = lines[1:]
    if len(body) != k:
        raise ArrayFileError(f"header declares {k} row(s), found {len(body)}.")
    compact = kind is ArrayKind.WORDS and q is not None and q <= 10
    rows = [_parse_row(line, i + 2, n, compact) for i, line in enumerate(body)]
    try:
        if kind is ArrayKind.WORDS:
            return WordArray.from_rows(rows, q=q, n=n)  # type: ignore[arg-type]
        return PermArray.from_rows(rows, n=n)
    except (InvalidInputError, ParameterError) as exc:
        raise ArrayFileError(str(exc)) from exc


def read_array(path: Path | str) -> ShatterArray:
    return loads(Path(path).read_text())


def write_array(path: Path | str, arr: ShatterArray) -> None:
    Path(path).write_text(dumps(arr))
