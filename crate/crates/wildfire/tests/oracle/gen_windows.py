"""Builds the weather-window fixture.

reference_rows.csv holds three reference rows verbatim. weather.csv covers the
75-day window around each sample with deterministic filler values, except
that the reference days carry the reference values. One filler day in the
2017 window is left out so the carry-forward path is exercised.
"""
import csv
import datetime as dt
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "windows"
VARS = ["pr", "rmax", "rmin", "sph", "srad", "tmmn", "tmmx", "vs", "bi",
        "fm100", "fm1000", "erc", "etr", "pet", "vpd"]
ROWS = [
    ("48.128431", "-97.276685", "2018-08-15", "No",
     ["0.0", "78.6", "14.9", "0.00582", "272.6", "282.0", "301.6", "3.0", "40.0",
      "10.2", "12.2", "54.0", "7.5", "5.5", "1.59"]),
    ("48.128431", "-97.276685", "2018-08-16", "No",
     ["0.0", "80.4", "13.9", "0.00676", "264.0", "283.9", "304.9", "3.0", "40.0",
      "9.7", "12.0", "56.0", "8.2", "5.9", "1.93"]),
    ("37.920118", "-120.413184", "2017-02-04", "No",
     ["0.0", "99.5", "59.8", "0.00713", "85.8", "280.5", "289.6", "2.8", "19.0",
      "17.2", "25.4", "14.0", "1.9", "1.4", "0.33"]),
]
SAMPLES = [("48.128431", "-97.276685", "2018-08-15", "No", "far_neg"),
           ("37.920118", "-120.413184", "2017-02-04", "No", "far_neg")]
MISSING = {("37.920118", "2017-01-10")}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    header = ["latitude", "longitude", "datetime", "Wildfire"] + VARS
    with open(OUT / "reference_rows.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for lat, lon, day, label, vals in ROWS:
            w.writerow([lat, lon, day, label] + vals)

    with open(OUT / "samples.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["latitude", "longitude", "datetime", "Wildfire", "tier", "source"])
        for s in SAMPLES:
            w.writerow(list(s) + [""])

    reference = {(lat, day): vals for lat, _, day, _, vals in ROWS}
    rng = random.Random(20240815)
    with open(OUT / "weather.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["latitude", "longitude", "datetime"] + VARS)
        for lat, lon, day, _, _ in SAMPLES:
            d0 = dt.date.fromisoformat(day)
            for k in range(-62, 17):
                d = (d0 + dt.timedelta(days=k)).isoformat()
                if (lat, d) in MISSING:
                    continue
                vals = reference.get((lat, d)) or [f"{rng.uniform(0, 100):.1f}" for _ in VARS]
                w.writerow([lat, lon, d] + vals)


if __name__ == "__main__":
    main()
