"""
Calibration sweeps: approach-angle threshold and avoidance radius
==================================================================

Reproduces the two calibration experiments on the A->B line with a hand
parked at the midpoint: four runs varying the obstacle threshold angle,
then three runs varying the avoidance radius. Prints the per-run metrics
and saves top-down path plots (demos/output/).
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cobot_apf import experiments as ex

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

print("= approach-angle sweep (avoidance radius fixed at 0.2 m)")
fig, ax = plt.subplots(figsize=(7, 5))
for value, report, log in ex.run_theta_sweep():
    xy = np.array([r.tcp[:2] for r in log.records])
    ax.plot(xy[:, 0], xy[:, 1], label=f"{value:.0f} deg")
    print(f"  theta={value:4.0f} deg: min clearance {report.min_d_ro:.4f} m, "
          f"path {report.path_length:.3f} m, {report.duration:.1f} s")
ax.plot(*ex.AB_MIDPOINT[:2], "ro", label="hand")
ax.plot([ex.POINT_A[0], ex.POINT_B[0]], [ex.POINT_A[1], ex.POINT_B[1]], "k:", lw=1)
ax.set_aspect("equal")
ax.set_xlabel("x [m]")
ax.set_ylabel("y [m]")
ax.legend(title="threshold angle")
ax.set_title("path curvature vs approach-angle threshold (top view)")
fig.tight_layout()
fig.savefig(OUT / "theta_sweep_paths.png", dpi=120)

print("\n= avoidance-radius sweep (angle fixed at 45 deg)")
fig, ax = plt.subplots(figsize=(7, 5))
for value, report, log in ex.run_dat_sweep():
    xy = np.array([r.tcp[:2] for r in log.records])
    ax.plot(xy[:, 0], xy[:, 1], label=f"{value:.1f} m")
    t_onset, d_onset = ex.avoidance_onset(log)
    print(f"  d_at={value:.1f} m: onset at d={d_onset:.3f} m (t={t_onset:.1f} s), "
          f"min clearance {report.min_d_ro:.4f} m, path {report.path_length:.3f} m")
ax.plot(*ex.AB_MIDPOINT[:2], "ro", label="hand")
ax.set_aspect("equal")
ax.set_xlabel("x [m]")
ax.set_ylabel("y [m]")
ax.legend(title="avoidance radius")
ax.set_title("path curvature vs avoidance radius (top view)")
fig.tight_layout()
fig.savefig(OUT / "dat_sweep_paths.png", dpi=120)

print("\nwrote theta_sweep_paths.png, dat_sweep_paths.png")
