"""Build data/nsw_electricity.csv from the normalized Elec2 table.

The source is `elec.csv` as shipped in the scikit-multiflow 0.2.0 source
distribution (src/skmultiflow/data/datasets/elec.csv, 45312 half-hourly rows,
columns feat_1..feat_6 = period, nswprice, nswdemand, vicprice, vicdemand,
transfer, plus the up/down class label).

The output keeps the last 44016 rows (1996-06-03 onwards), drops the period
and class columns, and adds an ISO-8601 timestamp column at 30-minute spacing.

    pip download --no-deps --no-binary :all: scikit-multiflow==0.2.0
    tar xzf scikit-multiflow-0.2.0.tar.gz
    python scripts/prepare_nsw_electricity.py \
        scikit-multiflow-0.2.0/src/skmultiflow/data/datasets/elec.csv data/nsw_electricity.csv
"""

import csv
import sys
from datetime import datetime, timedelta

ROWS = 44016
START = datetime(1996, 6, 3)
STEP = timedelta(minutes=30)


def main(src: str, dst: str) -> None:
    with open(src, newline="") as f:
        rows = list(csv.DictReader(f))
    if len(rows) < ROWS:
        raise SystemExit(f"expected at least {ROWS} rows, got {len(rows)}")
    rows = rows[-ROWS:]
    with open(dst, "w", newline="") as f:
        out = csv.writer(f, lineterminator="\n")
        out.writerow(["timestamp", "nswdemand", "vicprice", "vicdemand", "transfer", "nswprice"])
        for i, r in enumerate(rows):
            ts = (START + i * STEP).strftime("%Y-%m-%dT%H:%M:%S")
            out.writerow([ts, r["feat_3"], r["feat_4"], r["feat_5"], r["feat_6"], r["feat_2"]])


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
