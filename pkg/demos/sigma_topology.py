"""Walk through the sigma-distance and the two topology witnesses.

Run: python3 demos/sigma_topology.py
"""
import numpy as np

from slicecalc import SlicePoint, algebra, metrizability_witness, random_unit_imaginary, sigma_distance
from slicecalc import sigma_ball_contains, unit_structure

H = algebra("quaternion")
i, j = unit_structure(H.element("i"), H), unit_structure(H.element("j"), H)

# two imaginary units on different slices
p, q = SlicePoint([0.0], [1.0], i), SlicePoint([0.0], [1.0], j)
print("sigma distance i to j:", sigma_distance(p, q))
print("orthogonal variant:   ", sigma_distance(p, q, "orthogonal"))

# on a shared slice the distance is the plane distance
a, b = SlicePoint([0.2], [0.3], i), SlicePoint([0.5], [-0.1], i)
print("same slice:", sigma_distance(a, b), "plane:", abs(complex(0.2, 0.3) - complex(0.5, -0.1)))

# a sigma-ball around a non-real point reaches other slices only near the
# real axis: 0.2i is inside Sigma(0.5i, 0.6), 0.2K is not for K off the slice
c = SlicePoint([0.0], [0.5], i)
rng = np.random.default_rng(1)
print("0.2i inside:", sigma_ball_contains(c, 0.6, SlicePoint([0.0], [0.2], i)))
for h in (0.05, 0.2):
    hits = 0
    for _ in range(500):
        K = unit_structure(random_unit_imaginary(H, rng), H)
        hits += sigma_ball_contains(c, 0.6, SlicePoint([0.0], [h], K))
    print(f"points {h}K inside: {hits}/500")

# metrizability: the k-th slice carries a region whose boundary sits 1/k from 0
units = []
while len(units) < 8:
    T = unit_structure(random_unit_imaginary(H, rng), H)
    if not any(T.same_slice(S) for S in units):
        units.append(T)
rep = metrizability_witness(units, threshold=0.15)
for k, d in enumerate(rep.distances, start=1):
    print(f"  slice {k}: boundary distance {d:.4f}")
print("no uniform ball fits inside:", rep.verdict)
