# Trace a qubit on the Bloch sphere during one arbitrary-axis rotation.
#
# The native single-qubit instruction rotates by gamma about an axis at
# azimuth phi in the xy plane.  With a 20 ns gate played at 1 GS/s the state
# passes 21 sampled positions; for a pi rotation the path is the great circle
# orthogonal to the axis, ending at the south pole.

import math

from qcoproc.isa import RotationKey, rxy_matrix
from qcoproc.simulator import rotation_trajectory

key = RotationKey.from_pi_units(0.2, 1.0)   # axis at 0.2*pi, rotate by pi
print(f"rotation: phi = {key.phi_over_pi}*pi, gamma = {key.gamma_over_pi}*pi")
print(f"unitary:\n{rxy_matrix(key).round(4)}\n")

print("step  theta/pi  phi/pi")
for step, point in enumerate(rotation_trajectory(key, n_steps=20)):
    print(f"{step:4d}  {point.theta / math.pi:8.4f}  {point.phi / math.pi:6.4f}")

final = rotation_trajectory(key, n_steps=20)[-1]
assert abs(final.theta - math.pi) < 1e-12, "a pi rotation must reach the south pole"
print("\nfinal state is |1> (south pole), as a pi rotation demands")
