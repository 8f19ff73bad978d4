"""Schema-shaped stand-ins for the real-world datasets.

The housing file has the same columns, types and row count as the public
house-price table (545 rows, 12 features, price target), with prices drawn
from a noisy linear model so there is signal to fit.
"""

import numpy as np

HOUSING_COLUMNS = ["price", "area", "bedrooms", "bathrooms", "stories", "mainroad", "guestroom",
                   "basement", "hotwaterheating", "airconditioning", "parking", "prefarea",
                   "furnishingstatus"]
WISDM_ACTIVITIES = ["Walking", "Jogging", "Upstairs", "Downstairs", "Sitting", "Standing"]


def write_housing_csv(path, m=545, seed=0):
    rng = np.random.default_rng(seed)
    area = rng.integers(1650, 16200, m)
    bedrooms = rng.integers(1, 7, m)
    bathrooms = rng.integers(1, 5, m)
    stories = rng.integers(1, 5, m)
    parking = rng.integers(0, 4, m)
    flags = rng.random((m, 6)) < [0.86, 0.18, 0.35, 0.05, 0.32, 0.23]
    furnish = rng.choice(["furnished", "semi-furnished", "unfurnished"], m)
    price = (1.75e6 + 380 * area + 1.2e5 * bedrooms + 9.8e5 * bathrooms + 4.1e5 * stories
             + 2.8e5 * parking + flags @ np.array([4.2e5, 3.0e5, 3.5e5, 8.5e5, 8.6e5, 6.3e5])
             + np.where(furnish == "unfurnished", -4.1e5, 0) + rng.normal(0, 1.0e6, m))
    yn = np.where(flags, "yes", "no")
    with open(path, "w") as fh:
        fh.write(",".join(HOUSING_COLUMNS) + "\n")
        for i in range(m):
            row = [int(price[i]), area[i], bedrooms[i], bathrooms[i], stories[i], *yn[i, :2], yn[i, 2],
                   yn[i, 3], yn[i, 4], parking[i], yn[i, 5], furnish[i]]
            fh.write(",".join(str(v) for v in row) + "\n")
    return path


def write_wide_regression_csv(path, m=1000, n=81, target="critical_temp", seed=0):
    """``n`` correlated numeric features and a nonlinear target."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(m, 8))
    x = z @ rng.normal(size=(8, n)) + 0.1 * rng.normal(size=(m, n))
    y = np.abs(z[:, 0]) * 20 + z[:, 1] ** 2 * 5 + rng.normal(0, 2, m)
    header = [f"f{j}" for j in range(n)] + [target]
    np.savetxt(path, np.column_stack([x, y]), delimiter=",", header=",".join(header), comments="", fmt="%.6g")
    return path


def write_wisdm_raw(path, users=range(1, 37), per_run=170, seed=0):
    """Raw ``user,activity,timestamp,x,y,z;`` records, one run per (user, activity)."""
    rng = np.random.default_rng(seed)
    lines = []
    t = 0
    for user in users:
        for k, act in enumerate(WISDM_ACTIVITIES):
            phase = rng.uniform(0, 2 * np.pi)
            for i in range(per_run):
                a = (k + 1) * np.sin(0.3 * (k + 1) * i + phase)
                x, y, z = a + rng.normal(0, 0.5), 9.8 - a + rng.normal(0, 0.5), k + rng.normal(0, 0.5)
                lines.append(f"{user},{act},{t},{x:.4f},{y:.4f},{z:.4f};")
                t += 50_000_000
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
