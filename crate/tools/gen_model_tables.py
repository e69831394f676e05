#!/usr/bin/env python3
"""Generate the embedded West-proxy and South-proxy model life tables.

The tables are relational (Brass logit) families built from the Brass
General Standard. They stand in for the Coale-Demeny regional tables,
which are not redistributed here. Drop the published tables into a
directory with the same file names and point PALEODEMOG_DATA at it to
use them instead.

Usage: python3 tools/gen_model_tables.py crates/core/data/mortality
"""
import math
import sys
from pathlib import Path

# Brass (1971) General Standard, radix 1. Ages 90 and 95 extrapolated by
# extending the second difference of the logits observed over 75-85.
GENERAL_STANDARD = {
    0: 1.0, 1: 0.8499, 5: 0.7691, 10: 0.7502, 15: 0.7362, 20: 0.7130,
    25: 0.6826, 30: 0.6525, 35: 0.6223, 40: 0.5898, 45: 0.5535,
    50: 0.5106, 55: 0.4585, 60: 0.3965, 65: 0.3210, 70: 0.2380,
    75: 0.1516, 80: 0.0768, 85: 0.0276,
}
TERMINAL_AGE = 95
TERMINAL_EXPECTANCY = 2.5
LEVELS = [20.0 + 2.5 * i for i in range(25)]
# Female-minus-male e0 gap imposed at the lowest level; the matching logit
# shift is then held constant across levels.
MALE_GAP_AT_LEVEL_ONE = 2.0

# South-proxy: multiply the General Standard death probabilities by age to
# raise early-childhood and old-age mortality and lower mid-life mortality.
SOUTH_Q_MULTIPLIER = [
    (1, 5, 1.35), (5, 10, 1.15), (15, 50, 0.85), (60, 200, 1.15),
]


def logit(l):
    return 0.5 * math.log((1.0 - l) / l)


def inv_logit(y):
    return 1.0 / (1.0 + math.exp(2.0 * y))


def extended_standard():
    std = dict(GENERAL_STANDARD)
    y75, y80, y85 = (logit(std[a]) for a in (75, 80, 85))
    d1 = y85 - y80
    dd = d1 - (y80 - y75)
    y90 = y85 + d1 + dd
    y95 = y90 + d1 + 2 * dd
    std[90] = inv_logit(y90)
    std[95] = inv_logit(y95)
    return std


def south_standard(std):
    ages = sorted(std)
    out = {0: 1.0}
    for lo, hi in zip(ages, ages[1:]):
        q = 1.0 - std[hi] / std[lo]
        for a, b, m in SOUTH_Q_MULTIPLIER:
            if a <= lo < b:
                q *= m
        out[hi] = out[lo] * (1.0 - q)
    return out


def separation(q0, sex):
    # Coale-Demeny separation factors for ages 0 and 1-4.
    if sex == "female":
        return (0.35, 1.361) if q0 >= 0.1 else (0.05 + 3.0 * q0, 1.522 - 1.518 * q0)
    return (0.33, 1.352) if q0 >= 0.1 else (0.0425 + 2.875 * q0, 1.653 - 3.013 * q0)


def build(std, alpha, sex):
    l = {a: (1.0 if a == 0 else inv_logit(alpha + logit(v))) for a, v in std.items()}
    a0, a1 = separation(1.0 - l[1], sex)
    rows = []
    nl0 = l[1] + a0 * (1.0 - l[1]) + 4.0 * l[5] + a1 * (l[1] - l[5])
    rows.append((0, 1.0, nl0))
    for x in range(5, TERMINAL_AGE, 5):
        rows.append((x, l[x], 2.5 * (l[x] + l[x + 5])))
    rows.append((TERMINAL_AGE, l[TERMINAL_AGE], l[TERMINAL_AGE] * TERMINAL_EXPECTANCY))
    return rows


def e0(rows):
    return sum(r[2] for r in rows)


def solve_alpha(std, target, sex):
    lo, hi = -3.0, 3.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if e0(build(std, mid, sex)) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def write(path, header, std, male_shift, sex):
    with open(path, "w", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("level_e0,age_lower,lx,nLx\n")
        for level in LEVELS:
            alpha = solve_alpha(std, level, "female")
            if sex == "male":
                alpha += male_shift
            for age, lx, nlx in build(std, alpha, sex):
                fh.write(f"{level:.1f},{age},{lx:.12f},{nlx:.12f}\n")


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "crates/core/data/mortality")
    out.mkdir(parents=True, exist_ok=True)
    families = {"west": extended_standard()}
    families["south"] = south_standard(families["west"])
    for name, std in families.items():
        alpha1 = solve_alpha(std, LEVELS[0], "female")
        male_alpha1 = solve_alpha(std, LEVELS[0] - MALE_GAP_AT_LEVEL_ONE, "male")
        shift = male_alpha1 - alpha1
        for sex in ("female", "male"):
            header = [
                f"{name}-proxy model life tables, {sex}; levels indexed by female e0",
                "edition: relational reconstruction from the Brass (1971) General Standard,",
                "generated by tools/gen_model_tables.py; not the published Coale-Demeny tables",
                f"terminal group {TERMINAL_AGE}+; 0-4 nLx uses Coale-Demeny separation factors",
            ]
            write(out / f"{name}_{sex}.csv", header, std, shift, sex)


if __name__ == "__main__":
    main()
