"""
Collaborative pick-and-place
=============================

Four objects move from the rack to the drop box while the shipped hand
track first forces a detour on a transfer leg and later reaches into the
drop area, pinning the arm into free-drive. Plots the TCP coordinates
against time with the avoidance and free-drive episodes shaded.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cobot_apf import experiments as ex

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

base_metrics, base_log = ex.run_pick_place_task()
metrics, log = ex.run_pick_place_task(ex.pick_place_hand_track())

print(f"baseline : {base_metrics.duration:.1f} s, 8 goals reached={base_metrics.reached_goals == 8}")
print(f"disturbed: {metrics.duration:.1f} s, avoidance {metrics.time_in_avoidance:.1f} s, "
      f"free-drive {metrics.time_in_freedrive:.1f} s, min clearance {metrics.min_d_ro:.3f} m")
for i, sub in enumerate(ex.split_pick_place_log(log), start=1):
    m = ex.compute_metrics(sub)
    print(f"  object {i}: {m.duration:.1f} s, path {m.path_length:.3f} m")

fig, axes = plt.subplots(2, 1, figsize=(10, 7), sharex=True)
for ax, lg, title in ((axes[0], base_log, "without obstacle"),
                      (axes[1], log, "with the hand track")):
    t = np.array([r.t for r in lg.records])
    tcp = np.array([r.tcp for r in lg.records])
    for k, name in enumerate("xyz"):
        ax.plot(t, tcp[:, k], label=name)
    avoid = np.array([r.mode.value.startswith("avoid") for r in lg.records])
    fd = np.array([r.mode.value == "freedrive" for r in lg.records])
    ax.fill_between(t, tcp.min(), tcp.max(), where=avoid, color="orange", alpha=0.25,
                    label="avoidance")
    ax.fill_between(t, tcp.min(), tcp.max(), where=fd, color="tab:blue", alpha=0.25,
                    label="free drive")
    ax.set_ylabel("TCP [m]")
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8, ncol=5)
axes[1].set_xlabel("t [s]")
fig.tight_layout()
fig.savefig(OUT / "pick_place_timeline.png", dpi=120)
print("wrote pick_place_timeline.png")
