"""Recover a slice function everywhere from its values on a few slices.

Run: python3 demos/representation.py
"""
import numpy as np

from slicecalc import SliceFunctionData, algebra, random_unit_imaginary, represent, slice_inverse, unit_structure
from slicecalc.errors import KernelViolationError

rng = np.random.default_rng(5)
H = algebra("quaternion")
units = [unit_structure(random_unit_imaginary(H, rng), H) for _ in range(3)]

# f(q) = q^3 c + q, c a fixed quaternion
c = np.array([0.3, -1.0, 0.4, 2.0])
f = SliceFunctionData.polynomial({(3,): c, (1,): H.one()}, 4)

S = slice_inverse(units[:2])
print("two slices: kernel dim", S.kernel_dim, "slice solution", S.is_slice_solution)

x, y = np.array([[0.4]]), np.array([[-0.7]])
vals = np.stack([f.on_slice(J, x, y) for J in units[:2]], axis=-2)
for _ in range(3):
    I = unit_structure(random_unit_imaginary(H, rng), H)
    got = represent(vals, units[:2], I)[0]
    print("  error on a random slice:", float(np.linalg.norm(got - f.on_slice(I, x, y)[0])))

# one slice alone determines f only on that slice
one = vals[:, :1]
try:
    represent(one, units[:1], units[1])
except KernelViolationError as exc:
    print("single slice:", exc)
