#!/usr/bin/env python3
# SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
#
# SPDX-License-Identifier: Apache-2.0
"""One-shot converter for the typeset DDR memory price history table.

Reads the tab-separated appendix rows (year fraction, $/GB, date, source,
vendor, size, cost, speed, description, ...) and writes the clean CSV that
ships in data/ddr_price_history.csv:

    year,usd_per_gb,size_kb,cost_usd,description

The year fraction is recomputed from the date column (year + (month-1)/12)
whenever the two disagree by more than a month; the date string is the more
reliable of the two in the final rows of the source table.

Usage: convert_price_appendix.py SOURCE.md > data/ddr_price_history.csv
"""

import csv
import re
import sys

MONTHS = {m: i for i, m in enumerate(
    ["jan", "feb", "mar", "apr", "may", "jun",
     "jul", "aug", "sep", "oct", "nov", "dec"])}

NUM_RE = re.compile(r"^-?\d+(\.\d+)?([eE][+-]?\d+)?$")
DESC_RE = re.compile(
    r"(DIMM|SIMM|Board|[Mm]emory|RAM|Multifunc|Bocaram|Core|Flip-Flop|S-100|AT w/)")


def is_num(s):
    return bool(NUM_RE.match(s.strip()))


def month_of(fields):
    # Date appears as "1975 Jan", or as separate "2011" + "Sep02" / "28-Jul".
    for f in fields[2:5]:
        m = re.search(r"([A-Za-z]{3})", f)
        if m and m.group(1).lower() in MONTHS:
            return MONTHS[m.group(1).lower()]
    return None


def year_of(fields):
    m = re.match(r"^(\d{4})", fields[2].strip())
    return int(m.group(1)) if m else None


def parse_row(line):
    fields = line.rstrip("\n").split("\t")
    if len(fields) < 3 or not re.match(r"^\d{4}(\.\d+)?$", fields[0].strip()):
        return None
    x = float(fields[0])
    y_txt = fields[1].replace("\\", "").replace("$", "").replace(",", "").strip()
    if not is_num(y_txt):
        return None
    usd_per_gb = float(y_txt)

    year = year_of(fields)
    month = month_of(fields)
    note = ""
    if year is not None and month is not None:
        from_date = round(year + month / 12.0, 2)
        if abs(from_date - x) > 0.09:
            note = f"year corrected from {fields[0].strip()} via date column"
            x = from_date

    desc_idx = None
    for i in range(3, len(fields)):
        if DESC_RE.search(fields[i]):
            desc_idx = i
            break
    description = fields[desc_idx].replace("\\$", "$").strip() if desc_idx is not None else ""

    size_kb = cost = ""
    if desc_idx is not None:
        nums = []
        for i in range(desc_idx - 1, 2, -1):
            f = fields[i].strip()
            if f == "":
                continue
            if is_num(f):
                nums.append(float(f))
                if len(nums) == 3:
                    break
            elif nums or len(nums) == 0 and i < desc_idx - 1:
                break
        nums.reverse()
        if len(nums) >= 2:
            s, c = nums[0], nums[1]
            if s > 0 and c > 0:
                implied = c / (s / 1048576.0)
                if 0.5 <= implied / usd_per_gb <= 2.0:
                    size_kb, cost = nums[0], nums[1]
    if note:
        description = f"{description} [{note}]".strip()
    return {"year": x, "usd_per_gb": usd_per_gb, "size_kb": size_kb,
            "cost_usd": cost, "description": description}


def fmt(v):
    if v == "":
        return ""
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def main():
    src = open(sys.argv[1], encoding="utf-8").read().splitlines()
    start = next(i for i, l in enumerate(src) if l.startswith("Memory Price History"))
    rows = [r for r in (parse_row(l) for l in src[start:]) if r]
    rows.sort(key=lambda r: r["year"])
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["year", "usd_per_gb", "size_kb", "cost_usd", "description"])
    for r in rows:
        w.writerow([f"{r['year']:.2f}", fmt(r["usd_per_gb"]), fmt(r["size_kb"]),
                    fmt(r["cost_usd"]), r["description"]])


if __name__ == "__main__":
    main()
