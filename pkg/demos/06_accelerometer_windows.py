"""
Windowing a raw accelerometer stream
====================================

WISDM-style records ``user,activity,timestamp,x,y,z;`` are cut into
non-overlapping windows that never straddle a change of user or activity.
Each window of 80 readings becomes one 240-value feature row.
"""

from pathlib import Path

import numpy as np

from ehdcnn import data, train

rng = np.random.default_rng(0)
lines = []
for user in (1, 2, 3):
    for act in ("Walking", "Sitting"):
        for i in range(800):
            x, y, z = rng.normal(size=3) + (3 * np.sin(i / 3) if act == "Walking" else 0)
            lines.append(f"{user},{act},{i},{x:.3f},{y:.3f},{z:.3f};")
Path("demo_out").mkdir(exist_ok=True)
Path("demo_out/raw.txt").write_text("\n".join(lines))

stream = data.read_wisdm("demo_out/raw.txt")
ds = data.window_har(stream, window_len=80)
print("windows:", ds.features.shape, "labels:", ds.label_names)

tr, te = data.standardize(*data.split_by_group(ds, [1, 2]))
cfg = train.TrainConfig(filter_span=9, epochs=10, batch_size=8, task="classification", n_classes=2)
hist = train.fit(cfg, tr, te)
print("test accuracy per epoch:", hist.test_metrics)
