"""
Controller anatomy: saturation, repulsion, blending
====================================================

Plots the three ingredients of the velocity command: the tanh-saturated
position feedback, the inverse-square repulsive speed, and the
exponential weight that hands control from the goal-seeker to the
avoider as the hand gets close. Figures land in demos/output/.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cobot_apf.controller import (
    ControlGains,
    ObstacleClass,
    ObstacleKind,
    ControlInputs,
    blend,
    position_velocity,
    repulsive_force_1,
    repulsive_velocity,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

gains = ControlGains()

# 1. saturated position feedback: bounded by k_pc1 per axis
errors = np.linspace(-0.5, 0.5, 401)
feedback = [position_velocity([e, 0, 0], [0, 0, 0], [0, 0, 0], gains)[0] for e in errors]
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(errors, feedback)
ax.axhline(gains.k_pc1, ls="--", c="gray")
ax.axhline(-gains.k_pc1, ls="--", c="gray")
ax.set_xlabel("position error x [m]")
ax.set_ylabel("commanded velocity [m/s]")
ax.set_title("saturated position feedback")
fig.tight_layout()
fig.savefig(OUT / "position_feedback.png", dpi=120)

# 2. direct repulsive speed vs distance (inverse square, floored)
rho = np.linspace(0.005, 0.3, 300)
speed = [np.linalg.norm(repulsive_force_1([0, 0, 0], [r, 0, 0], gains.k_ca1)) for r in rho]
fig, ax = plt.subplots(figsize=(6, 4))
ax.semilogy(rho, speed)
ax.set_xlabel("robot-hand distance [m]")
ax.set_ylabel("|F_rep1| [m/s]")
ax.set_title("inverse-square repulsion (floored at 1 cm)")
fig.tight_layout()
fig.savefig(OUT / "repulsion.png", dpi=120)

# 3. blend weight: avoidance takes over only near the hand
w = np.exp(-gains.tau * rho)
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(rho, w, label="avoidance weight")
ax.plot(rho, 1 - w, label="position-control weight")
ax.legend()
ax.set_xlabel("robot-hand distance [m]")
ax.set_ylabel("weight")
ax.set_title("exponential null-space blend")
fig.tight_layout()
fig.savefig(OUT / "blend_weight.png", dpi=120)

# 4. the full avoidance velocity around an obstacle, as a vector field
grid = np.linspace(-0.3, 0.3, 17)
obstacle = np.array([0.0, 0.8, 0.7])
goal = np.array([0.3, 0.8, 0.7])
fig, ax = plt.subplots(figsize=(6, 6))
for gx in grid:
    for gy in grid:
        x_r = obstacle + np.array([gx, gy, 0.0])
        if np.linalg.norm([gx, gy]) < 0.02:
            continue
        inputs = ControlInputs(x_r=x_r, v_r=[0.1, 0, 0], x_g=goal,
                               xdot_g=[0, 0, 0], x_o=obstacle)
        b = repulsive_velocity(inputs, ObstacleClass(ObstacleKind.TYPE1_IMMINENT, 0.0), gains)
        v_pc = position_velocity(x_r, goal, [0, 0, 0], gains)
        v = blend(v_pc, b.v_rep, float(np.linalg.norm([gx, gy])), gains.tau)
        v = v / (np.linalg.norm(v) + 1e-9) * min(np.linalg.norm(v), 0.2)
        ax.arrow(x_r[0], x_r[1], v[0] * 0.08, v[1] * 0.08,
                 head_width=0.004, alpha=0.7, color="tab:blue")
ax.plot(*obstacle[:2], "ro", label="hand")
ax.plot(*goal[:2], "g*", ms=14, label="goal")
ax.set_aspect("equal")
ax.legend()
ax.set_title("blended command field (imminent obstacle, XY slice)")
fig.tight_layout()
fig.savefig(OUT / "command_field.png", dpi=120)

print("wrote", sorted(p.name for p in OUT.glob("*.png")))
