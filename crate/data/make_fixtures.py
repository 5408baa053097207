"""Regenerates the synthetic OWID-style fixtures in this directory.

Each location follows total * (a*atan(b*(t-c))/pi + d) sampled on an
irregular calendar, with a few empty cells. France-style data contains one
reporting error (a decrease), as seen in the published series.
"""
import csv
import datetime as dt
import math
import random

LOCATIONS = {
    # name: (start date, a, b, c, d, total doses, rows)
    "Denmark": ("2020-12-27", 1.15, 0.035, 150.0, 0.52, 10_500_000, 48),
    "Hungary": ("2020-12-26", 1.10, 0.050, 130.0, 0.52, 12_800_000, 45),
    "Mexico": ("2020-12-24", 1.20, 0.025, 170.0, 0.55, 150_000_000, 42),
    "France": ("2020-12-27", 1.12, 0.040, 160.0, 0.53, 105_000_000, 40),
}


def curve(t, a, b, c, d):
    return a * math.atan(b * (t - c)) / math.pi + d


def rows_for(name, start, a, b, c, d, total, count, rng):
    start = dt.date.fromisoformat(start)
    day = 1
    out = []
    for i in range(count):
        value = round(total * curve(day, a, b, c, d))
        cell = str(value)
        if i not in (0, count - 1) and rng.random() < 0.06:
            cell = ""
        out.append([name, (start + dt.timedelta(days=day - 1)).isoformat(), cell])
        day += rng.choice([5, 6, 7, 7, 8, 9])
    return out


def main():
    rng = random.Random(20211211)
    rows = []
    for name, spec in LOCATIONS.items():
        loc_rows = rows_for(name, *spec, rng)
        if name == "France":
            # reporting error: a cumulative count drops below the previous one
            prev = int(loc_rows[19][2] or loc_rows[18][2])
            loc_rows[20][2] = str(prev - 250_000)
        rows.extend(loc_rows)
    with open("owid_sample.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["location", "iso_code", "date", "total_vaccinations", "people_vaccinated"])
        for name, date, cell in rows:
            people = "" if cell == "" else str(int(cell) // 2)
            w.writerow([name, name[:3].upper(), date, cell, people])

    with open("degenerate.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["location", "date", "total_vaccinations"])
        start = dt.date(2021, 1, 1)
        for i in range(30):
            w.writerow(["Flatland", (start + dt.timedelta(days=i)).isoformat(), 5000])


if __name__ == "__main__":
    main()
