"""Generates the 500-row incident fixture and its expected dedup output.

The oracle is a direct O(n^2) pass: stable sort by discovery time, drop
records outside the CONUS box, then keep a record unless some already kept
record lies within 5 km and either shares its calendar day or precedes it
by less than 2 hours.
"""
import csv
import datetime as dt
import math
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "dedup"
R = 6371.0
MIN_KM, MIN_GAP = 5.0, dt.timedelta(hours=2)
LAT, LON = (24.4, 49.4), (-125.0, -66.9)
FMT = "%Y-%m-%dT%H:%M:%SZ"


def haversine(a, b):
    p1, p2 = math.radians(a[0]), math.radians(b[0])
    dp, dl = p2 - p1, math.radians(b[1] - a[1])
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * R * math.asin(min(1.0, math.sqrt(h)))


def generate(n, seed):
    rng = random.Random(seed)
    centers = [(rng.uniform(26, 48), rng.uniform(-123, -70)) for _ in range(12)]
    centers += [(20.0, -100.0), (52.0, -110.0)]  # outside the box
    t0 = dt.datetime(2019, 7, 1)
    rows = []
    for _ in range(n):
        c = centers[rng.randrange(len(centers))]
        lat = round(c[0] + rng.gauss(0, 0.04), 6)
        lon = round(c[1] + rng.gauss(0, 0.05), 6)
        t = t0 + dt.timedelta(minutes=rng.randrange(0, 4 * 24 * 60))
        rows.append((lat, lon, t))
    return rows


def dedup(rows):
    kept = []
    for lat, lon, t in sorted(rows, key=lambda r: r[2]):
        if not (LAT[0] <= lat <= LAT[1] and LON[0] <= lon <= LON[1]):
            continue
        clash = any(
            haversine((lat, lon), (k[0], k[1])) < MIN_KM
            and (k[2].date() == t.date() or t - k[2] < MIN_GAP)
            for k in kept
        )
        if not clash:
            kept.append((lat, lon, t))
    return kept


def write(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["latitude", "longitude", "discovered_at"])
        for lat, lon, t in rows:
            w.writerow([repr(lat), repr(lon), t.strftime(FMT)])


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rows = generate(500, 5)
    kept = dedup(rows)
    write(OUT / "incidents.csv", rows)
    write(OUT / "expected.csv", kept)
    print(f"{len(rows)} rows, {len(kept)} retained")


if __name__ == "__main__":
    main()
