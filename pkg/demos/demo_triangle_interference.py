"""
Triangle task with a human hand in the way
===========================================

Runs one lap of the three-point cycle twice: free of obstacles, then with
the shipped hand track crossing the second leg. Plots both TCP paths and
the distance/mode timeline of the disturbed run.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cobot_apf import experiments as ex

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

base_metrics, base_log = ex.run_triangle_task()
metrics, log = ex.run_triangle_task(ex.triangle_hand_track())

print(f"baseline lap : {base_metrics.duration:.1f} s, path {base_metrics.path_length:.3f} m")
print(f"disturbed lap: {metrics.duration:.1f} s, path {metrics.path_length:.3f} m, "
      f"avoidance {metrics.time_in_avoidance:.1f} s, min clearance {metrics.min_d_ro:.3f} m")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 5))
for lg, label, color in ((base_log, "no obstacle", "tab:orange"),
                         (log, "hand present", "tab:green")):
    xy = np.array([r.tcp[:2] for r in lg.records])
    ax1.plot(xy[:, 0], xy[:, 1], color=color, label=label)
track = ex.triangle_hand_track()
hand = np.array([track.sample(r.t) for r in log.records])
ax1.plot(hand[:, 0], hand[:, 1], "r--", lw=1, label="hand track")
for point, name in ((ex.POINT_A, "A"), (ex.POINT_B, "B"), (ex.POINT_C, "C")):
    ax1.annotate(name, point[:2], fontsize=12, fontweight="bold")
ax1.set_aspect("equal")
ax1.set_xlim(-0.6, 1.0)
ax1.legend()
ax1.set_xlabel("x [m]")
ax1.set_ylabel("y [m]")
ax1.set_title("TCP paths (top view)")

t = [r.t for r in log.records]
d = [r.d_ro for r in log.records]
ax2.plot(t, d, label="robot-hand distance")
ax2.axhline(0.2, ls="--", c="orange", label="avoidance radius")
ax2.axhline(0.1, ls="--", c="red", label="free-drive radius")
in_avoid = [r.mode.value.startswith("avoid") for r in log.records]
ax2.fill_between(t, 0, 1.05 * max(d), where=in_avoid, alpha=0.15, color="orange",
                 label="avoidance active")
ax2.set_xlabel("t [s]")
ax2.set_ylabel("distance [m]")
ax2.legend(loc="upper right", fontsize=8)
ax2.set_title("clearance and active mode")
fig.tight_layout()
fig.savefig(OUT / "triangle_interference.png", dpi=120)
print("wrote triangle_interference.png")
