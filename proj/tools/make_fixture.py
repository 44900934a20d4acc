#!/usr/bin/env python3
"""Writes the bundled end-to-end fixture and the counts it must produce.

Two hours (2020-06-22 13:00 and 14:00 UTC) of 10 s state vectors for 50
aircraft around a synthetic terrain tile. Every count in
reference_manifest.txt follows from how the rows are built here, not from
running the pipeline.
"""
import argparse
import calendar
import gzip
import json
import math
import os
import random
import struct

DAY = "2020-06-22"
HOURS = [13, 14]
YEAR = 2020
T0 = calendar.timegm((2020, 6, 22, 13, 0, 0))
CADENCE = 10
MAX_GAP = 60
MIN_POINTS = 10

FILTER = [(39.8, -75.2), (41.2, -75.2), (41.2, -73.3), (39.8, -73.3)]
LAND = [(39.5, -75.5), (41.5, -75.5), (41.5, -74.0), (39.5, -74.0)]

# class -> (FAA code, CA category, NL categorie, IE type)
TYPES = {
    "FixedWingSingleEngine": ("4", "Aeroplane - single engine", "Fixed wing single engine", "Fixed wing single-engine"),
    "FixedWingMultiEngine": ("5", "Aeroplane - multi engine", "Fixed wing multi engine", "Fixed wing multi-engine"),
    "Rotorcraft": ("6", "Helicopter", "Helicopter", "Helicopter"),
    "Glider": ("1", "Glider", "Sailplane", "Glider"),
    "Balloon": ("2", "Balloon", "Balloon", "Balloon"),
    "Gyroplane": ("9", "Gyroplane", "Gyroplane", "Gyroplane"),
    "WeightShiftControl": ("7", "Weight-shift-control", "Weight-shift-control", "Weight-shift-control"),
}
SPEEDS = {  # kt
    "FixedWingSingleEngine": (95, 140), "FixedWingMultiEngine": (150, 240), "Rotorcraft": (70, 120),
    "Glider": (45, 60), "Balloon": (8, 12), "Gyroplane": (50, 70), "WeightShiftControl": (40, 55), "Unknown": (90, 200),
}


def seat_dir(seats):
    if seats is None or seats < 1:
        return "Seats_Unknown"
    if seats > 200:
        return "Seats_201_plus"
    lo = (seats - 1) // 10 * 10 + 1
    return f"Seats_{lo:03d}_{lo + 9:03d}"


def inside(poly, lat, lon):
    lats = [p[0] for p in poly]
    lons = [p[1] for p in poly]
    return min(lats) < lat < max(lats) and min(lons) < lon < max(lons)


class Aircraft:
    def __init__(self, icao, country, cls, seats, rng, center, radius_nm, start, end):
        self.icao = icao
        self.country = country  # None: not registered
        self.cls = cls
        self.seats = seats
        self.center = center
        self.radius = radius_nm
        self.start = start
        self.end = end
        lo, hi = SPEEDS[cls]
        self.speed_kt = rng.uniform(lo, hi)
        self.phase = rng.uniform(0, 2 * math.pi)
        self.profile = rng.choice(["ramp", "level"])
        self.alt0 = rng.uniform(500, 1100)  # m
        self.alt1 = self.alt0 + rng.uniform(-300, 400) if self.profile == "ramp" else self.alt0
        self.ground_rows = 0
        self.gaps = []  # (after_time, seconds)
        self.spike_time = None

    def times(self):
        out, t, gaps = [], self.start, dict(self.gaps)
        while t <= self.end:
            out.append(t)
            t += gaps.get(t, CADENCE)
        return out

    def state(self, t):
        clat, clon = self.center
        w = self.speed_kt / self.radius / 3600.0
        th = self.phase + w * (t - self.start)
        lat = clat + self.radius / 60.0 * math.sin(th)
        lon = clon + self.radius / 60.0 / math.cos(math.radians(clat)) * math.cos(th)
        heading = math.degrees(math.atan2(-math.sin(th), math.cos(th))) % 360.0
        span = max(self.end - self.start, 1)
        alt = self.alt0 + (self.alt1 - self.alt0) * (t - self.start) / span
        climb = (self.alt1 - self.alt0) / span
        return lat, lon, alt, heading, climb


def build(rng):
    planes = []
    used = set()

    def addr(prefix):
        while True:
            a = prefix + rng.randrange(0x1000, 0xFFFF)
            if a not in used:
                used.add(a)
                return a

    hour_end = T0 + 2 * 3600 - CADENCE

    def window():
        kind = rng.random()
        if kind < 0.5:
            return T0 + rng.randrange(0, 900, 10), hour_end - rng.randrange(0, 900, 10)
        if kind < 0.75:
            return T0 + rng.randrange(0, 600, 10), T0 + 3600 - CADENCE - rng.randrange(0, 600, 10)
        return T0 + 3600 + rng.randrange(0, 600, 10), hour_end - rng.randrange(0, 600, 10)

    def plane(country, cls, seats, where="land"):
        prefix = {"US": 0xA00000, "CA": 0xC00000, "NL": 0x480000, "IE": 0x4C0000, None: 0x700000}[country]
        if where == "land":
            center = (rng.uniform(40.3, 40.7), rng.uniform(-74.75, -74.3))
        elif where == "ocean":
            center = (rng.uniform(40.3, 40.7), rng.uniform(-73.75, -73.6))
        else:  # north of the filter polygon
            center = (rng.uniform(42.5, 43.0), rng.uniform(-74.5, -74.0))
        radius = 0.8 if cls == "Balloon" else rng.uniform(4, 9)
        s, e = window()
        p = Aircraft(addr(prefix), country, cls, seats, rng, center, radius, s, e)
        planes.append(p)
        return p

    for i in range(10):
        plane("US", "FixedWingSingleEngine", rng.randint(2, 6), "ocean" if i % 4 == 0 else "land")
    for i in range(6):
        plane("US", "FixedWingMultiEngine", rng.choice([8, 9, 11, 12]), "ocean" if i == 0 else "land")
    for _ in range(5):
        plane("US", "Rotorcraft", rng.randint(2, 6))
    plane("US", "Glider", 2)
    plane("US", "Glider", 1)
    plane("US", "Balloon", 4)
    plane("US", "Gyroplane", 2)
    plane("US", "WeightShiftControl", 2)
    for cls in ["FixedWingSingleEngine"] * 3 + ["Rotorcraft"] * 2 + ["FixedWingMultiEngine"]:
        plane("CA", cls, rng.randint(2, 9))
    for cls in ["FixedWingMultiEngine", "FixedWingMultiEngine", "Glider"]:
        plane("NL", cls, None)
    plane("IE", "Rotorcraft", 5)
    plane("IE", "FixedWingSingleEngine", 4)
    for _ in range(10):
        plane(None, "Unknown", None, rng.choice(["land", "land", "ocean"]))
    plane("US", "FixedWingSingleEngine", 4, "outside")
    plane("US", "Rotorcraft", 3, "outside")
    plane(None, "Unknown", None, "outside")
    assert len(planes) == 50

    inside_planes = [p for p in planes if inside(FILTER, *p.center)]
    # ground roll before take-off
    for p in rng.sample(inside_planes, 6):
        p.ground_rows = 8
    # coverage holes: one long enough to split, one that strands a short piece
    for p in rng.sample([q for q in inside_planes if q.end - q.start > 2400], 4):
        cut = p.start + (p.end - p.start) // 2 // 10 * 10
        p.gaps.append((cut, 300))
    short = rng.choice([q for q in inside_planes if q.end - q.start > 2400 and not q.gaps])
    short.gaps.append((short.start + 50, 200))  # first 6 rows stranded
    for p in rng.sample([q for q in inside_planes if q.end - q.start > 1800], 3):
        p.spike_time = p.start + (p.end - p.start) // 3 // 10 * 10
    return planes


def fmt(v, digits):
    return f"{v:.{digits}f}"


HEADER = ("time,icao24,lat,lon,velocity,heading,vertrate,callsign,onground,alert,spi,squawk,"
          "baroaltitude,geoaltitude,lastposupdate,lastcontact")


def hour_rows(planes, hour, rng, expect):
    """Rows of one hour file plus the counts they must produce."""
    h0 = T0 + (hour - HOURS[0]) * 3600
    rows = []
    raw = quality = geo = organized = malformed = 0
    organized_by_plane = {}
    for p in planes:
        times = [t for t in p.times() if h0 <= t < h0 + 3600]
        airborne_start = p.start + p.ground_rows * CADENCE
        bad_slots = set()
        if times and p.country != "US" or (times and rng.random() < 0.5):
            # isolated unusable rows, never adjacent
            candidates = times[2:-2:7]
            for t in rng.sample(candidates, min(len(candidates), 2)):
                bad_slots.add(t)
        for t in times:
            lat, lon, alt, heading, climb = p.state(t)
            on_ground = t < airborne_start
            speed = 0.0 if on_ground else p.speed_kt * 1852.0 / 3600.0
            geo_alt = 30.0 if on_ground else alt
            if t == p.spike_time:
                geo_alt += 1500.0
            cols = {
                "lat": fmt(lat, 6), "lon": fmt(lon, 6), "velocity": fmt(speed, 3), "heading": fmt(heading, 3),
                "vertrate": fmt(0.0 if on_ground else climb, 3), "baro": fmt(geo_alt - 12.0, 2),
                "geo": fmt(geo_alt, 2), "onground": "True" if on_ground else "False",
            }
            if t in bad_slots:
                kind = rng.choice(["nopos", "badlat", "noalt"])
                if kind == "nopos":
                    cols["lat"] = cols["lon"] = ""
                elif kind == "badlat":
                    cols["lat"] = "91.5"
                else:
                    cols["baro"] = cols["geo"] = ""
            rows.append((t, p.icao, cols, t - 1))
            raw += 1
            if t in bad_slots:
                quality += 1
                continue
            if not inside(FILTER, lat, lon):
                geo += 1
                continue
            organized += 1
            organized_by_plane.setdefault(p.icao, []).append((t, on_ground, t == p.spike_time))
            # receivers repeat stale vectors: same time, older position fix
            if rng.random() < 0.01:
                stale = dict(cols)
                stale["lat"] = fmt(lat + 0.01, 6)
                rows.append((t, p.icao, stale, t - 30))
                raw += 1
                quality += 1
    rng.shuffle(rows)
    lines = [HEADER]
    for t, icao, c, lastpos in rows:
        lines.append(",".join([
            str(t), f"{icao:06x}", c["lat"], c["lon"], c["velocity"], c["heading"], c["vertrate"], "TEST123",
            c["onground"], "False", "False", "1200", c["baro"], c["geo"], f"{lastpos}.5", f"{t}.9"]))
    for junk in ["notatime,a0b0c0,40.1,-74.1,50,90,0,X,False,False,False,1200,500,500,1,1",
                 f"{h0},zzzzzz,40.1,-74.1,50,90,0,X,False,False,False,1200,500,500,1,1",
                 f"{h0 + 10},a0b0c1,forty,-74.1,50,90,0,X,False,False,False,1200,500,500,1,1"]:
        lines.insert(rng.randrange(1, len(lines)), junk)
        malformed += 1
    expect["hours"].append((hour, raw, malformed, quality, geo, organized, len(organized_by_plane)))
    return "\n".join(lines) + "\n", organized_by_plane


def segments_of(points):
    """points: (time, onGround, spike) of one series, any order."""
    air = sorted((t, s) for t, g, s in points if not g)
    runs, cur = [], []
    for t, s in air:
        if cur and t - cur[-1][0] > MAX_GAP:
            runs.append(cur)
            cur = []
        cur.append((t, s))
    if cur:
        runs.append(cur)
    count = 0
    for run in runs:
        if len(run) < MIN_POINTS:
            continue
        if len([1 for _, s in run if not s]) < MIN_POINTS:
            continue
        count += 1
    return count


def registry_files(planes, rng):
    entries = []  # (country, icao, cls, seats, expiry (y, m, d))
    for p in planes:
        if p.country:
            entries.append((p.country, p.icao, p.cls, p.seats, (2022, rng.randint(1, 12), rng.randint(1, 28))))
    # parked fleet: registered but silent
    for i in range(240):
        country = rng.choice(["US", "US", "US", "CA", "NL", "IE"])
        cls = rng.choice(list(TYPES))
        prefix = {"US": 0xA10000, "CA": 0xC10000, "NL": 0x481000, "IE": 0x4C1000}[country]
        entries.append((country, prefix + i * 7 + 1, cls, None if country == "NL" else rng.randint(1, 14),
                        (rng.randint(2019, 2023), rng.randint(1, 12), rng.randint(1, 28))))
    # one address on two registers: the later expiry (CA) must win
    us_dup = next(p for p in planes if p.country == "US" and p.cls == "FixedWingSingleEngine" and inside(FILTER, *p.center))
    entries.append(("CA", us_dup.icao, "Rotorcraft", 3, (2024, 5, 1)))
    us_dup.cls, us_dup.seats = "Rotorcraft", 3
    # unreadable address rows are skipped
    entries.append(("US", None, "Glider", 1, (2021, 1, 1)))

    files = {}
    us = ["N-NUMBER,SERIAL NUMBER,MFR MDL CODE,TYPE AIRCRAFT,NO-SEATS,EXPIRATION DATE,MODE S CODE HEX"]
    ca = ["MARK,ICAO_HEX,AIRCRAFT_CATEGORY,NUMBER_OF_SEATS,EXPIRY_DATE"]
    nl = ["registratie;icao_hex;categorie;vervaldatum"]
    ie = ['"Registration","ICAO 24 Bit Hex","Aircraft Type","Seats","Expiry"']
    for n, (country, icao, cls, seats, (y, m, d)) in enumerate(entries):
        faa, cat, categorie, ietype = TYPES[cls]
        hexs = "NOTHEX" if icao is None else f"{icao:06X}"
        if country == "US":
            us.append(f"N{n}T,SN{n},{1000 + n},{faa},{seats},{y:04d}{m:02d}{d:02d},{hexs}    ")
        elif country == "CA":
            ca.append(f"C-F{n:03d},{hexs.lower()},{cat},{seats},{y:04d}-{m:02d}-{d:02d}")
        elif country == "NL":
            nl.append(f"PH-{n:03d};{hexs.lower()};{categorie};{d:02d}/{m:02d}/{y:04d}")
        else:
            ie.append(f'"EI-{n:03d}","{hexs}","{ietype}","{seats}","{d:02d}/{m:02d}/{y:04d}"')
    files["US.csv"] = "\r\n".join(us) + "\r\n"
    files["CA.csv"] = "\n".join(ca) + "\n"
    files["NL.csv"] = "\n".join(nl) + "\n"
    files["IE.csv"] = "\n".join(ie) + "\n"
    return files


def terrain_tile():
    """N40W075: 1201x1201 big-endian int16, row 0 at 41N."""
    n = 1201
    out = bytearray()
    for r in range(n):
        row = [30 + r // 4 + c // 6 for c in range(n)]
        out += struct.pack(f">{n}h", *row)
    return bytes(out)


def ring_geojson(ring):
    coords = [[lon, lat] for lat, lon in ring] + [[ring[0][1], ring[0][0]]]
    return {"type": "Polygon", "coordinates": [coords]}


def write(path, data, binary=False):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "wb" if binary else "w", newline="" if not binary else None) as f:
        f.write(data)


def gz(data):
    return gzip.compress(data, mtime=0)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "fixtures", "e2e"))
    args = ap.parse_args()
    out = os.path.abspath(args.out)
    rng = random.Random(20200622)

    planes = build(rng)
    reg = registry_files(planes, rng)
    for name, body in reg.items():
        write(os.path.join(out, "registry", str(YEAR), name), body)

    expect = {"hours": []}
    per_hour = {}
    for hour in HOURS:
        body, organized = hour_rows(planes, hour, rng, expect)
        name = f"states_{DAY}-{hour:02d}.csv.gz"
        write(os.path.join(out, "raw", DAY, name), gz(body.encode()), binary=True)
        per_hour[hour] = organized

    by_icao = {p.icao: p for p in planes}
    leaves = set()
    members = 0
    files = 0
    segments = 0
    merged = {}
    for hour, organized in per_hour.items():
        members += len(organized)
        for icao, pts in organized.items():
            p = by_icao[icao]
            if p.country is None:
                leaves.add(("Unknown", hour))
                n = segments_of(pts)
                segments += n
                files += 1 if n else 0
            else:
                leaves.add((p.cls, seat_dir(p.seats)))
                merged.setdefault(icao, []).extend(pts)
    for icao, pts in merged.items():
        n = segments_of(pts)
        segments += n
        files += 1 if n else 0

    lines = ["organize\tinput\trawCount\tmalformedRows\tqualityDropped\tgeoDropped\torganizedCount\tfilesWritten"]
    total = [0] * 6
    for hour, *counts in expect["hours"]:
        lines.append(f"organize\t{DAY}/states_{DAY}-{hour:02d}.csv.gz\t" + "\t".join(map(str, counts)))
        total = [a + b for a, b in zip(total, counts)]
    lines.append("organize\ttotal\t" + "\t".join(map(str, total)))
    lines += [f"pack\tarchives\t{len(leaves)}", f"pack\tmembers\t{members}",
              f"process\tfiles\t{files}", f"process\tsegments\t{segments}"]
    write(os.path.join(out, "reference_manifest.txt"), "\n".join(lines) + "\n")

    write(os.path.join(out, "terrain", "srtm3", "N40W075.hgt.gz"), gz(terrain_tile()), binary=True)
    write(os.path.join(out, "polygon.geojson"), json.dumps(ring_geojson(FILTER)) + "\n")
    write(os.path.join(out, "land.geojson"), json.dumps(
        {"type": "FeatureCollection", "features": [{"type": "Feature", "properties": {"name": "mainland"},
                                                    "geometry": ring_geojson(LAND)}]}) + "\n")
    countries = [[(40.2, -74.9), (40.9, -74.9), (40.9, -74.2)], [(40.3, -73.9), (40.6, -73.6), (40.3, -73.6)]]
    write(os.path.join(out, "countries.geojson"), json.dumps(
        {"type": "FeatureCollection", "features": [{"type": "Feature", "properties": {}, "geometry": ring_geojson(r)}
                                                   for r in countries]}) + "\n")
    write(os.path.join(out, "airspace.txt"), "\n".join([
        "# class floor_ft ceiling_ft shape",
        "B 0 7000 circle 40.5,-74.5 8",
        "C 0 4000 40.35,-73.85 40.65,-73.85 40.65,-73.55 40.35,-73.55",
        "D 0 2500 circle 40.45,-74.45 3",
    ]) + "\n")
    write(os.path.join(out, "fixture.cfg"), "\n".join([
        "# bundled two-hour fixture; outputs land under out/",
        "raw_root = raw",
        "registry_root = registry",
        "terrain_root = terrain",
        "polygon = polygon.geojson",
        "land = land.geojson",
        "airspace = airspace.txt",
        "organized_root = out/organized",
        "archive_root = out/archives",
        "processed_root = out/processed",
        "stats_root = out/stats",
        "report_root = out/reports",
        "years = 2020",
        "workers = 2",
        "strategy = dynamic-queue",
        "plots = true",
    ]) + "\n")
    print("\n".join(lines))


if __name__ == "__main__":
    main()
