#!/usr/bin/env python3
"""Prepare a count dataset for `cmpsmooth fit`.

The CLI reads one nonnegative integer count per line (an optional single
header line is ignored). Published count datasets usually arrive in other
shapes; this script converts the common ones:

  # a value,frequency table (rows like "95,3": value 95 seen 3 times)
  scripts/enter_counts.py --from-frequency table.csv --output counts.txt

  # one column of a CSV
  scripts/enter_counts.py --from-csv data.csv --column days --output counts.txt

  # counts typed or pasted directly (comma/space/newline separated)
  scripts/enter_counts.py --from-values "27 28 28 30" --output counts.txt
  scripts/enter_counts.py --output counts.txt   # reads values from stdin

Every path validates that the result is a nonempty list of nonnegative
integers and reports the offending entry otherwise.
"""

import argparse
import csv
import sys


def fail(msg: str) -> None:
    sys.exit(f"error: {msg}")


def parse_count(text: str, where: str) -> int:
    token = text.strip()
    try:
        value = int(token)
    except ValueError:
        fail(f"{where}: expected an integer count, got '{token}'")
    if value < 0:
        fail(f"{where}: counts must be nonnegative, got {value}")
    return value


def from_values(blob: str) -> list[int]:
    tokens = blob.replace(",", " ").split()
    if not tokens:
        fail("no values given")
    return [parse_count(t, f"value #{i + 1}") for i, t in enumerate(tokens)]


def open_rows(path: str):
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as e:
        fail(str(e))
    with handle:
        yield from csv.reader(handle)


def looks_numeric(token: str) -> bool:
    try:
        int(token.strip())
        return True
    except ValueError:
        return False


def from_frequency(path: str) -> list[int]:
    counts: list[int] = []
    for lineno, row in enumerate(open_rows(path), start=1):
        cells = [c for c in row if c.strip()]
        if not cells:
            continue
        if len(cells) != 2:
            fail(f"{path}:{lineno}: expected 'value,frequency', got {row}")
        if lineno == 1 and not all(looks_numeric(c) for c in cells):
            continue  # header row
        value = parse_count(cells[0], f"{path}:{lineno} (value)")
        freq = parse_count(cells[1], f"{path}:{lineno} (frequency)")
        counts.extend([value] * freq)
    if not counts:
        fail(f"{path}: no observations (all frequencies zero?)")
    return counts


def from_csv_column(path: str, column: str) -> list[int]:
    rows = open_rows(path)
    try:
        header = next(rows)
    except StopIteration:
        fail(f"{path}: empty file")
    names = [c.strip() for c in header]
    if column not in names:
        fail(f"{path}: no column '{column}' (have: {', '.join(names)})")
    idx = names.index(column)
    counts = []
    for lineno, row in enumerate(rows, start=2):
        if not any(c.strip() for c in row):
            continue
        if idx >= len(row):
            fail(f"{path}:{lineno}: row has no '{column}' field")
        counts.append(parse_count(row[idx], f"{path}:{lineno}"))
    if not counts:
        fail(f"{path}: column '{column}' has no values")
    return counts


def main() -> None:
    ap = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    source = ap.add_mutually_exclusive_group()
    source.add_argument("--from-frequency", metavar="FILE",
                        help="CSV of value,frequency rows; expands to raw counts")
    source.add_argument("--from-csv", metavar="FILE",
                        help="CSV with a header; use with --column")
    source.add_argument("--from-values", metavar="LIST",
                        help="counts given inline, comma/space separated")
    ap.add_argument("--column", help="column name for --from-csv")
    ap.add_argument("--output", required=True, metavar="FILE",
                    help="where to write the one-count-per-line file")
    args = ap.parse_args()

    if args.from_csv and not args.column:
        ap.error("--from-csv requires --column")
    if args.column and not args.from_csv:
        ap.error("--column only makes sense with --from-csv")

    if args.from_frequency:
        counts = from_frequency(args.from_frequency)
    elif args.from_csv:
        counts = from_csv_column(args.from_csv, args.column)
    elif args.from_values:
        counts = from_values(args.from_values)
    else:
        if sys.stdin.isatty():
            print("enter counts separated by spaces or newlines, "
                  "end with Ctrl-D:", file=sys.stderr)
        counts = from_values(sys.stdin.read())

    with open(args.output, "w", encoding="utf-8") as f:
        f.writelines(f"{c}\n" for c in counts)
    mean = sum(counts) / len(counts)
    print(f"wrote {len(counts)} counts to {args.output} "
          f"(min {min(counts)}, max {max(counts)}, mean {mean:.4g})")


if __name__ == "__main__":
    main()
