"""Generate the synthetic stand-in for the FY92-FY16 food-inflation table.

The published replication table could not be bundled, so this writes a
surrogate with the same layout: 25 annual rows, FCPI plus seven predictors,
ProteinExp missing for FY14-FY16. Magnitudes are chosen to look like
annual Indian macro series; the response is built from a fixed generating
process in which MSP carries the largest effect and FAO the smallest.
Replace data/food_inflation_fy92_fy16.csv with the real table to run the
case study on actual data.

    python3 scripts/make_surrogate_fixture.py [OUT]
"""

import sys
from pathlib import Path

import numpy as np

SEED = 1992
N = 25


def generate(seed=SEED):
    rng = np.random.default_rng(seed)
    periods = [f"FY{(92 + t) % 100:02d}" for t in range(N)]
    z = rng.standard_normal((N, 7))

    mons = np.clip(-2.0 + 9.0 * z[:, 0], -25, 15)
    msp = 7.0 + 4.0 * z[:, 1]
    msp[[17, 21]] += 9.0  # FY09 / FY13 hikes
    fao = 6.0 + 12.0 * (0.6 * z[:, 1] + 0.8 * z[:, 2])
    fd = 8.0 + np.cumsum(0.6 * z[:, 3])
    fwi = 6.0 + 3.0 * z[:, 4] + np.where(np.arange(N) >= 16, 7.0, 0.0)
    agri = 6.0 + 3.5 * z[:, 5]
    prot = 1.0 + 2.0 * z[:, 6]

    # each predictor enters through a standardized term with a fixed
    # in-sample effect size; MSP also carries a threshold bump
    effect_sd = {
        "MSP": 2.0, "FWI": 1.0, "ProteinExp": 0.9, "MonsDev": -0.7,
        "FD": 0.6, "AgrilInput": 0.5, "FAO": 0.2,
    }
    terms = {
        "MSP": msp + np.where(msp > 10.0, 6.0, 0.0), "FWI": fwi, "ProteinExp": prot,
        "MonsDev": mons, "FD": fd, "AgrilInput": agri, "FAO": fao,
    }
    fcpi = 8.0 + 0.8 * rng.standard_normal(N)
    for name, g in terms.items():
        fcpi += effect_sd[name] * (g - g.mean()) / g.std(ddof=1)
    prot_obs = prot.copy()
    prot_obs[-3:] = np.nan
    cols = {
        "FCPI": fcpi, "MonsDev": mons, "MSP": msp, "FAO": fao, "FD": fd,
        "FWI": fwi, "AgrilInput": agri, "ProteinExp": prot_obs,
    }
    return periods, cols


def write(path):
    periods, cols = generate()
    lines = ["period," + ",".join(cols)]
    for t in range(N):
        cells = ["NA" if np.isnan(c[t]) else f"{c[t]:.2f}" for c in cols.values()]
        lines.append(periods[t] + "," + ",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "data" / "food_inflation_fy92_fy16.csv"
    write(out)
    print(f"wrote {out}")
