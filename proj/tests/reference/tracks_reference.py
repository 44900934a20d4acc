#!/usr/bin/env python3
"""Reference track pipeline for the mixed two-aircraft fixture.

Writes organized hourly files for two rotorcraft into mixed/ and the expected
processing results (counts and every emitted 1 Hz point) next to them. The
C++ tests load these files; rerun this script only when the fixture changes.
"""
import math
import os
import random
from datetime import datetime, timezone

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "mixed")

MAD_THRESHOLD = 1.5
MAD_SCALE = 1.4826
ZERO_FLOOR = 25.0
WINDOW = 30.0
SIGMA = 6.0
MAX_GAP = 60.0
MIN_POINTS = 10
CEILING = 250.0  # rotorcraft

HEADER = "time,lat,lon,altBaro_ft,altGeo_ft,speed_kt,track_deg,vertRate_ftmin,onGround"


def hour_label(t):
    return datetime.fromtimestamp(t, tz=timezone.utc).strftime("%Y-%m-%d_%H")


def fmt(v):
    return "" if v is None else repr(float(v))


# --- fixture ---------------------------------------------------------------

def fly(rng, t0, n, step, lat, lon, course, speed_fn, alt_fn, turn=0.0):
    """Dead-reckoned observations every `step` +/- 1 s."""
    rows = []
    t = t0
    for i in range(n):
        spd = speed_fn(i)
        alt = alt_fn(i)
        rows.append(dict(time=t, lat=round(lat, 6), lon=round(lon, 6), baro=alt - 40.0, geo=alt,
                         speed=spd, track=course % 360.0, vrate=0.0, ground=False))
        dt = step + rng.choice([-1, 0, 1])
        nm = spd * dt / 3600.0
        lat += nm / 60.0 * math.cos(math.radians(course))
        lon += nm / 60.0 * math.sin(math.radians(course)) / math.cos(math.radians(lat))
        course += turn
        t += dt
    return rows


def build_fixture():
    rng = random.Random(622)
    base = int(datetime(2020, 6, 22, 13, 40, tzinfo=timezone.utc).timestamp())

    # A0B001: climb then level, one altitude spike, a hold, a 300 s gap, crosses the hour
    a = []
    a.append(dict(time=base - 30, lat=40.2, lon=-74.6, baro=100.0, geo=None, speed=0.0, track=0.0, vrate=0.0, ground=True))
    a.append(dict(time=base - 20, lat=40.2, lon=-74.6, baro=100.0, geo=None, speed=5.0, track=0.0, vrate=0.0, ground=True))
    leg1 = fly(rng, base, 150, 5, 40.2, -74.6, 45.0, lambda i: 110.0 + (i % 7),
               lambda i: 2000.0 + 1.0 * i)
    leg1[70]["geo"] += 2600.0
    leg1[71]["speed"] = None  # unusable row
    a += leg1
    t = leg1[-1]["time"] + 300
    leg2 = fly(rng, t, 220, 5, leg1[-1]["lat"], leg1[-1]["lon"], 90.0, lambda i: 120.0,
               lambda i: 2500.0 - 5.0 * i, turn=0.5)
    # hold: four identical positions
    for k in range(31, 34):
        leg2[k].update(lat=leg2[30]["lat"], lon=leg2[30]["lon"], geo=leg2[30]["geo"])
    a += leg2

    # C0F002: circling through north with a fast stretch, then two short fragments
    c = fly(rng, base + 60, 150, 4, 40.6, -74.3, 300.0, lambda i: 280.0 if 60 <= i < 80 else 90.0 + (i % 5),
            lambda i: 1500.0 + 3.0 * math.sin(i / 5.0), turn=3.0)
    t = c[-1]["time"] + 200
    frag = fly(rng, t, 12, 4, 40.7, -74.2, 10.0, lambda i: 300.0 if i >= 7 else 100.0, lambda i: 1200.0)
    c += frag
    t = frag[-1]["time"] + 200
    c += fly(rng, t, 6, 4, 40.8, -74.1, 10.0, lambda i: 100.0, lambda i: 1200.0)
    return {"A0B001": a, "C0F002": c}


def write_fixture(aircraft):
    os.makedirs(OUT, exist_ok=True)
    for name in os.listdir(OUT):
        os.remove(os.path.join(OUT, name))
    for icao, rows in aircraft.items():
        by_hour = {}
        for r in rows:
            by_hour.setdefault(hour_label(r["time"]), []).append(r)
        for label, hr in by_hour.items():
            with open(os.path.join(OUT, f"{label}_{icao}.csv"), "w") as f:
                f.write(HEADER + "\n")
                for r in hr:
                    f.write(",".join([str(r["time"]), fmt(r["lat"]), fmt(r["lon"]), fmt(r["baro"]), fmt(r["geo"]),
                                      fmt(r["speed"]), fmt(r["track"]), fmt(r["vrate"]),
                                      "1" if r["ground"] else "0"]) + "\n")


# --- reference pipeline ----------------------------------------------------

def median(xs):
    s = sorted(xs)
    n = len(s)
    return s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2.0


def mad_mask(xs):
    if len(xs) < 3:
        return [False] * len(xs)
    med = median(xs)
    dev = [abs(x - med) for x in xs]
    mad = median(dev)
    if mad == 0.0:
        return [d > ZERO_FLOOR and d > 0.0 for d in dev]
    bound = MAD_THRESHOLD * MAD_SCALE * mad
    return [d > bound for d in dev]


def smooth(vals, times):
    out = []
    for i in range(len(vals)):
        num = den = 0.0
        for j in range(len(vals)):
            dt = times[j] - times[i]
            if abs(dt) <= WINDOW / 2.0:
                w = math.exp(-(dt * dt) / (2.0 * SIGMA * SIGMA))
                num += w * vals[j]
                den += w
        out.append(num / den)
    return out


def gradient(vals, times):
    n = len(vals)
    if n < 2:
        return [0.0] * n
    g = [0.0] * n
    g[0] = (vals[1] - vals[0]) / (times[1] - times[0])
    g[-1] = (vals[-1] - vals[-2]) / (times[-1] - times[-2])
    for i in range(1, n - 1):
        g[i] = (vals[i + 1] - vals[i - 1]) / (times[i + 1] - times[i - 1])
    return g


def shortest_delta(a, b):
    d = (b - a) % 360.0
    return d - 360.0 if d >= 180.0 else d


def interpolate(pts):
    out = []
    if len(pts) < 2:
        return out
    k = 0
    for t in range(math.ceil(pts[0]["time"]), math.floor(pts[-1]["time"]) + 1):
        while k + 2 < len(pts) and pts[k + 1]["time"] <= t:
            k += 1
        a, b = pts[k], pts[k + 1]
        if t == a["time"]:
            p = dict(a)
        elif t == b["time"]:
            p = dict(b)
        else:
            f = (t - a["time"]) / (b["time"] - a["time"])
            p = {key: a[key] + (b[key] - a[key]) * f for key in ("lat", "lon", "alt", "speed", "vrate", "accel")}
            p["course"] = (a["course"] + shortest_delta(a["course"], b["course"]) * f) % 360.0
        p["time"] = t
        out.append(p)
    return out


def process(rows):
    counts = dict(observations=len(rows), rejected=0, altitudeOutliers=0, speedOutliers=0,
                  segmentsDiscarded=0, segments=0, points=0)
    pts = []
    for r in rows:
        alt = r["geo"] if r["geo"] is not None else r["baro"]
        if r["ground"] or alt is None or r["speed"] is None or r["track"] is None:
            counts["rejected"] += 1
            continue
        pts.append(dict(time=r["time"], lat=r["lat"], lon=r["lon"], alt=alt, speed=r["speed"], course=r["track"]))
    pts.sort(key=lambda p: p["time"])
    deduped = []
    for p in pts:
        if deduped and (deduped[-1]["lat"], deduped[-1]["lon"], deduped[-1]["alt"]) == (p["lat"], p["lon"], p["alt"]):
            continue
        deduped.append(p)

    pieces, cur = [], []
    for p in deduped:
        if cur and p["time"] - cur[-1]["time"] > MAX_GAP:
            pieces.append(cur)
            cur = []
        cur.append(p)
    if cur:
        pieces.append(cur)

    segments = []
    for piece in pieces:
        if len(piece) < MIN_POINTS:
            counts["segmentsDiscarded"] += 1
            continue
        mask = mad_mask([p["alt"] for p in piece])
        counts["altitudeOutliers"] += sum(mask)
        seg = [dict(p) for p, m in zip(piece, mask) if not m]
        if len(seg) < MIN_POINTS:
            counts["segmentsDiscarded"] += 1
            continue
        times = [p["time"] for p in seg]
        alt = smooth([p["alt"] for p in seg], times)
        spd = smooth([p["speed"] for p in seg], times)
        climb = gradient(alt, times)
        acc = gradient(spd, times)
        for i, p in enumerate(seg):
            p.update(alt=alt[i], speed=spd[i], vrate=climb[i] * 60.0, accel=acc[i])
        kept = [p for p in seg if p["speed"] <= CEILING]
        counts["speedOutliers"] += len(seg) - len(kept)
        if len(kept) < MIN_POINTS:
            counts["segmentsDiscarded"] += 1
            continue
        res = interpolate(kept)
        if len(res) < MIN_POINTS:
            counts["segmentsDiscarded"] += 1
            continue
        counts["segments"] += 1
        counts["points"] += len(res)
        segments.append(res)
    return counts, segments


def main():
    aircraft = build_fixture()
    write_fixture(aircraft)
    total = {}
    assert process(aircraft["A0B001"])[0]["altitudeOutliers"] == 1, "fixture should hold exactly one spike"
    lines = ["icao24,time,lat,lon,altMSL,speed,course,vertRate,accel,segmentId"]
    for icao in sorted(aircraft):
        counts, segs = process(aircraft[icao])
        for k, v in counts.items():
            total[k] = total.get(k, 0) + v
        with open(os.path.join(OUT, f"expected_{icao}.txt"), "w") as f:
            for k, v in counts.items():
                f.write(f"{k}={v}\n")
        for sid, seg in enumerate(segs):
            for p in seg:
                lines.append(",".join([icao, str(p["time"])] + [repr(float(p[k])) for k in
                                      ("lat", "lon", "alt", "speed", "course", "vrate", "accel")] + [str(sid)]))
    with open(os.path.join(OUT, "expected_points.csv"), "w") as f:
        f.write("\n".join(lines) + "\n")
    print(total)


if __name__ == "__main__":
    main()
