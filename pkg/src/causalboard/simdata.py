"""Synthetic demo datasets with known causal structure.

Stand-ins for the classic car-attributes (AutoMPG-style) and county-health
tables: same schemas and realistic value ranges, generated from explicit
linear mechanisms so discovery output is predictable. Used by the demo
scripts and the end-to-end tests.
"""

from __future__ import annotations

import io

import numpy as np

AUTOMPG_COLUMNS = [
    "mpg", "cylinders", "displacement", "horsepower", "weight",
    "acceleration", "model year", "origin",
]


def autompg_like(seed: int = 7, n: int = 398, n_missing: int = 6) -> str:
    """Car attributes CSV: 398 rows, 8 columns, a few missing horsepower cells.

    True mechanisms: cylinders -> displacement -> {horsepower, weight},
    {horsepower, weight} -> acceleration (time to 60), {weight, model year,
    origin} -> mpg. The colliders at acceleration and mpg compel their
    in-edges; the cylinders/displacement/horsepower/weight cluster has no
    collider, so its edges come out reversible (undirected in the CPDAG).
    """
    rng = np.random.default_rng(seed)
    cylinders = rng.choice([3, 4, 5, 6, 8], size=n, p=[0.01, 0.51, 0.01, 0.21, 0.26])
    displacement = 40.0 * cylinders - 60.0 + 20.0 * rng.normal(size=n)
    displacement = np.clip(displacement, 65.0, None)
    horsepower = 0.5 * displacement + 20.0 + 15.0 * rng.normal(size=n)
    weight = 8.0 * displacement + 1400.0 + 250.0 * rng.normal(size=n)
    acceleration = (
        24.0 - 0.09 * horsepower + 0.0035 * weight + 1.3 * rng.normal(size=n)
    )
    model_year = rng.integers(70, 83, size=n)
    origin = rng.choice([1, 2, 3], size=n, p=[0.62, 0.18, 0.20])
    mpg = (
        46.0
        - 0.0075 * weight
        + 0.55 * (model_year - 76)
        + 0.9 * (origin == 3)
        + 0.45 * (origin == 2)
        + 1.8 * rng.normal(size=n)
    )
    mpg = np.clip(mpg, 5.0, None)

    missing_rows = set(rng.choice(n, size=n_missing, replace=False).tolist())
    out = io.StringIO()
    out.write(",".join(AUTOMPG_COLUMNS) + "\n")
    for i in range(n):
        hp = "NA" if i in missing_rows else f"{horsepower[i]:.1f}"
        out.write(
            f"{mpg[i]:.1f},{cylinders[i]},{displacement[i]:.1f},{hp},"
            f"{weight[i]:.0f},{acceleration[i]:.1f},{model_year[i]},{origin[i]}\n"
        )
    return out.getvalue()


OPIOID_COLUMNS = [
    "education index", "opioid dispensing rate", "primary care physician rate",
    "food environment index", "percent frequent physical distress",
    "unemployment rate", "median household income", "percent uninsured",
    "violent crime rate", "opioid death rate",
]


def opioid_like(seed: int = 11, n: int = 3000, n_missing: int = 40) -> str:
    """County-level socioeconomic factors plus an opioid mortality outcome."""
    rng = np.random.default_rng(seed)
    z = lambda: rng.normal(size=n)
    unemployment = 5.0 + 1.8 * z()
    income = 58.0 - 2.4 * unemployment + 9.0 * z()  # $1000s
    education = 0.5 + 0.004 * income + 0.08 * z()
    food_env = 4.0 + 0.055 * income + 0.9 * z()
    uninsured = 14.0 - 0.08 * income + 2.5 * z()
    pcp = 75.0 - 1.6 * uninsured + 14.0 * z()
    distress = 16.0 - 0.9 * food_env + 1.4 * z()
    crime = 520.0 - 32.0 * food_env + 90.0 * z()
    dispensing = (
        95.0 - 42.0 * education + 0.12 * pcp + 1.6 * distress + 7.0 * z()
    )
    deaths = 6.0 + 0.16 * dispensing + 0.5 * distress + 2.2 * z()

    cols = [education, dispensing, pcp, food_env, distress, unemployment,
            income, uninsured, crime, deaths]
    return _to_csv(OPIOID_COLUMNS, cols, rng, n, n_missing)


LIFE_EXPECTANCY_COLUMNS = [
    "firearm fatality rate", "violent crime rate", "average grade performance",
    "high school graduation rate", "food environment index",
    "percent fair or poor health", "primary care physician rate",
    "debt income ratio", "life expectancy",
]


def life_expectancy_like(seed: int = 13, n: int = 3000, n_missing: int = 40) -> str:
    """County-level life-expectancy table with 8 upstream health factors."""
    rng = np.random.default_rng(seed)
    z = lambda: rng.normal(size=n)
    food_env = 6.5 + 1.1 * z()
    grade = 3.0 + 0.04 * food_env + 0.35 * z()
    graduation = 62.0 + 7.5 * grade + 5.0 * z()
    debt = 1.9 - 0.011 * graduation + 0.28 * z()
    crime = 620.0 - 41.0 * food_env + 120.0 * z()
    firearm = 8.0 + 0.011 * crime + 2.4 * z()
    pcp = 55.0 + 3.2 * grade + 13.0 * z()
    pfph = 24.0 - 1.3 * food_env - 0.05 * pcp + 2.6 * debt + 2.1 * z()
    life_exp = 83.5 - 0.30 * pfph - 0.012 * firearm + 1.1 * z()

    cols = [firearm, crime, grade, graduation, food_env, pfph, pcp, debt,
            life_exp]
    return _to_csv(LIFE_EXPECTANCY_COLUMNS, cols, rng, n, n_missing)


def _to_csv(names, cols, rng, n, n_missing) -> str:
    missing = set()
    if n_missing:
        rows = rng.choice(n, size=n_missing, replace=False)
        col_picks = rng.integers(0, len(cols), size=n_missing)
        missing = set(zip(rows.tolist(), col_picks.tolist()))
    out = io.StringIO()
    out.write(",".join(names) + "\n")
    for i in range(n):
        cells = [
            "NA" if (i, j) in missing else f"{cols[j][i]:.3f}"
            for j in range(len(cols))
        ]
        out.write(",".join(cells) + "\n")
    return out.getvalue()
