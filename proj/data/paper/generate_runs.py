#!/usr/bin/env python3
"""Builds run-record fixtures whose aggregates equal the published tables.

Raw per-run energies were never published, so each (agent, gpu) group gets
five synthetic runs per split such that:

  * every split has the published sample std,
  * split means keep the published split proportions, scaled so that the
    per-run totals average to the published total,
  * per-run totals have the published sample std (split correlation is
    solved for), and
  * per-run durations have the published time mean/std and are divided
    across splits proportionally to that run's split energies.

Where the published total std exceeds what the split stds allow (fully
correlated splits), the closest reachable value is used and a warning is
printed. Only MindAct/H200-SXM5 and Synapse/L40S then miss the published
total std by more than its printed precision.

Outputs:
  runs_h100nvl.csv   totals/time from the main efficiency table (H100-NVL)
  runs_appendix.csv  totals/time from the appendix table (all GPUs)
"""
import csv
import math
import pathlib

HERE = pathlib.Path(__file__).resolve().parent
N = 5
SPLITS = ("cross-domain", "cross-task", "cross-website")

# Main-text efficiency table (H100-NVL): energy kWh mean/std, time min mean/std.
MAIN_TABLE = {
    "AutoWebGLM": (0.33, 0.01, 57.0, 0.8),
    "MindAct": (1.22, 0.29, 296.0, 90.2),
    "MultiUI": (0.82, 0.01, 130.0, 1.2),
    "Synapse": (1.74, 0.02, 356.0, 2.8),
    "Synatra": (3.31, 0.04, 426.0, 1.4),
}


def basis():
    """Three orthogonal zero-sum vectors in R^5 with unit sample std."""
    raw = [
        [2, -1, -1, 0, 0],
        [0, 1, -1, 1, -1],
        [1, 1, 1, -1.5, -1.5],
    ]
    out = []
    for v in raw:
        w = list(map(float, v))
        for b in out:
            d = sum(x * y for x, y in zip(w, b)) / sum(y * y for y in b)
            w = [x - d * y for x, y in zip(w, b)]
        scale = math.sqrt(sum(x * x for x in w) / (N - 1))
        out.append([x / scale for x in w])
    return out


U, W, Z = basis()


def split_directions(stds, target):
    """Unit directions (angles in the U/W plane) for the three split deviations
    so that the per-run totals reach sample std `target`.

    Returns (angles, feasible).  The std of a sum is bounded by the sum of the
    stds, so a target above that bound is unreachable; the closest reachable
    configuration is returned in that case.
    """
    s1, s2, s3 = stds
    lo12, hi12 = abs(s1 - s2), s1 + s2
    want_lo, want_hi = abs(target - s3), target + s3
    a, b = max(lo12, want_lo), min(hi12, want_hi)
    feasible = a <= b + 1e-15
    if not feasible:
        r12 = hi12 if want_lo > hi12 else lo12
    else:
        r12 = 0.5 * (a + b)
    phi = 0.0
    if s1 > 0 and s2 > 0:
        phi = math.acos(max(-1.0, min(1.0, (r12 * r12 - s1 * s1 - s2 * s2) / (2 * s1 * s2))))
    # direction of the split-1 + split-2 resultant
    rx, ry = s1 + s2 * math.cos(phi), s2 * math.sin(phi)
    base = math.atan2(ry, rx) if (rx or ry) else 0.0
    psi = 0.0
    if r12 > 0 and s3 > 0:
        psi = math.acos(max(-1.0, min(1.0, (target * target - r12 * r12 - s3 * s3) / (2 * r12 * s3))))
    return (0.0, phi, base + psi), feasible


def build_group(label, split_means, split_stds, total_mean, total_std, time_mean, time_std):
    scale = total_mean / sum(split_means)
    means = [m * scale for m in split_means]
    angles, feasible = split_directions(split_stds, total_std)
    if not feasible:
        print(f"warning: {label}: total std {total_std} exceeds what split stds "
              f"{split_stds} allow; using the closest reachable value")
    dirs = [[math.cos(a) * u + math.sin(a) * w for u, w in zip(U, W)] for a in angles]
    energies = [[means[s] + split_stds[s] * dirs[s][r] for r in range(N)] for s in range(3)]
    runs = []
    for r in range(N):
        total_time = time_mean + time_std * Z[r]
        run_total = sum(energies[s][r] for s in range(3))
        for s in range(3):
            e = energies[s][r]
            if e < 0:
                raise ValueError("negative synthetic energy")
            runs.append((SPLITS[s], r + 1, e * 1000.0, total_time * 60.0 * e / run_total))
    return runs


def load_splits():
    groups = {}
    with open(HERE / "split_energy.csv", newline="") as f:
        for row in csv.DictReader(f):
            key = (row["agent"], row["gpu"])
            groups.setdefault(key, {})[row["split"]] = (
                float(row["energy_kwh"]),
                float(row["energy_std_kwh"]),
            )
    return groups


def write(path, rows):
    with open(path, "w", newline="") as f:
        f.write("agent,gpu,split,run_index,energy_wh,duration_s\n")
        for agent, gpu, split, idx, wh, sec in rows:
            f.write(f"{agent},{gpu},{split},{idx},{wh:.12g},{sec:.12g}\n")


def main():
    splits = load_splits()

    main_rows = []
    for agent, (em, es, tm, ts) in MAIN_TABLE.items():
        g = splits[(agent, "H100-NVL")]
        runs = build_group(f"{agent}/H100-NVL", [g[s][0] for s in SPLITS], [g[s][1] for s in SPLITS], em, es, tm, ts)
        main_rows += [(agent, "H100-NVL", *r) for r in runs]
    write(HERE / "runs_h100nvl.csv", main_rows)

    appendix_rows = []
    with open(HERE / "total_energy.csv", newline="") as f:
        for row in csv.DictReader(f):
            key = (row["agent"], row["gpu"])
            g = splits[key]
            runs = build_group(
                f"{row['agent']}/{row['gpu']}",
                [g[s][0] for s in SPLITS],
                [g[s][1] for s in SPLITS],
                float(row["energy_kwh"]),
                float(row["energy_std_kwh"]),
                float(row["time_min"]),
                float(row["time_std_min"]),
            )
            appendix_rows += [(row["agent"], row["gpu"], *r) for r in runs]
    write(HERE / "runs_appendix.csv", appendix_rows)


if __name__ == "__main__":
    main()
