"""
Train the main and init networks on seven synthetic recordings and save them.

Run: python3 demos/03_train.py [OUT_DIR]   (default: demo_models)
"""

import sys
import time
from pathlib import Path

from ppgtrack import TrainConfig, build_labeled_set, exercise_suite, save_model, train_models

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_models")
out.mkdir(parents=True, exist_ok=True)

t0 = time.perf_counter()
pairs = exercise_suite(10)[:7]
data = build_labeled_set(pairs)
print(f"{len(data)} labeled candidates from {len(pairs)} recordings "
      f"({int(data.y.sum())} HR) in {time.perf_counter() - t0:.1f} s")

outcome = train_models(data, TrainConfig(seed=0))
main, init = outcome.models.main, outcome.models.init
print(f"main network inputs ({main.input_dim}): {', '.join(main.feature_names)}")
print(f"init network inputs ({init.input_dim}): {', '.join(init.feature_names)}")
for name, rep in (("main", outcome.main_report), ("init", outcome.init_report)):
    metrics = " ".join(f"{k}={v:.3f}" for k, v in rep.holdout.items())
    print(f"{name}: loss {rep.loss[0]:.4f} -> {rep.loss[-1]:.4f}, holdout {metrics}")

save_model(main, out / "main.txt")
save_model(init, out / "init.txt")
outcome.report.write_csv(out / "features.csv")
print(f"wrote {out}/main.txt, init.txt, features.csv in {time.perf_counter() - t0:.1f} s total")
