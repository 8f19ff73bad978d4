"""
Training across curvatures
==========================

Fit the same synthetic regression task at several curvatures from a shared
seed and compare test RMSE after each epoch.  This is a short run; raise
``EPOCHS`` to 100 for the full protocol.
"""

from dataclasses import replace

from ehdcnn import data, train

EPOCHS = 10

tr, te = data.synthetic_task("sqrt_ratio", m=1000, dim=10, seed=0)
base = train.TrainConfig(batch_size=train.SYNTHETIC_BATCH_SIZE, epochs=EPOCHS, seed=0)
hists = train.curvature_sweep(base, (0.0, 0.5, 1.0, 4.0), tr, te)

print("epoch " + "".join(f"{f'c={h.curvature:g}':>10}" for h in hists))
for e in range(EPOCHS):
    print(f"{e + 1:>5} " + "".join(f"{h.test_metrics[e]:>10.4f}" for h in hists))

path = train.write_sweep_csv(hists, "demo_out/sweep.csv")
print("history written to", path)

# a single run can also be driven directly
hist = train.fit(replace(base, curvature=2.0), tr, te)
print(f"c=2 final RMSE {hist.final_metric:.4f}, reached 5% of final at epoch {train.epochs_to_reach(hist.test_metrics)}")
