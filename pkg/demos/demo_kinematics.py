"""
Kinematics walkthrough: forward kinematics, Jacobian, damped rates
===================================================================

Shows the default arm's TCP pose, the geometric Jacobian, what happens to
plain inversion near a singular pose, and how damping keeps joint rates
finite.
"""

import numpy as np

from cobot_apf.kinematics import (
    forward_kinematics,
    jacobian,
    manipulability,
    solve_joint_rates,
)
from cobot_apf.models import default_arm

np.set_printoptions(precision=4, suppress=True)

arm = default_arm()

# a comfortable elbow configuration
q = np.array([1.9, 0.02, 1.52, 0.24, 0.56, 0.0])
pose = forward_kinematics(arm, q)
print("TCP position [m]:", pose.position)
print("TCP quaternion  :", pose.orientation)

J = jacobian(arm, q)
print("\nJacobian (rows: linear xyz, angular xyz):")
print(J)
print("manipulability:", manipulability(J))

# map a 5 cm/s Cartesian x-velocity to joint rates
v = np.array([0.05, 0, 0, 0, 0, 0])
q_dot = solve_joint_rates(J, v, damping=0.01)
print("\njoint rates for 5 cm/s along x [rad/s]:", q_dot)
print("achieved TCP velocity:", J @ q_dot)

# the fully stretched pose is singular: all link offsets line up on z
q_singular = np.zeros(6)
J_sing = jacobian(arm, q_singular)
print("\nstretched pose manipulability:", manipulability(J_sing))
sigma = np.linalg.svd(J_sing[:3], compute_uv=False)
print("smallest singular value:", sigma[-1])

# damping bounds the response where plain inversion would blow up
for lam in (0.0, 0.01, 0.05):
    try:
        rates = solve_joint_rates(J_sing, v, damping=lam)
        print(f"lambda={lam}: |q_dot| = {np.linalg.norm(rates):.4f}")
    except Exception as exc:  # lambda = 0 on a singular matrix can fail
        print(f"lambda={lam}: {exc}")
