"""Qubit and coupling counts of every encoding for a range of problem sizes."""

import argparse
import csv
import sys

from cqa.encodings import ENCODINGS, resource_counts


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmin", type=int, default=2)
    ap.add_argument("--nmax", type=int, default=16)
    ap.add_argument("--out", help="CSV path (default: stdout)")
    args = ap.parse_args()

    rows = []
    for n in range(args.nmin, args.nmax + 1):
        for enc in ENCODINGS:
            for key, val in resource_counts(enc, n).items():
                rows.append((enc, n, key, val))

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["encoding", "n", "quantity", "value"])
    w.writerows(rows)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
