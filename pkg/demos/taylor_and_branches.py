"""Taylor expansion with a tail estimate, and the glued square root.

Run: python3 demos/taylor_and_branches.py
"""
import numpy as np

from slicecalc import SliceFunctionData, SlicePoint, algebra, branch_psi, taylor_coefficients, taylor_eval
from slicecalc import unit_structure

H = algebra("quaternion")
i, k = unit_structure(H.element("i"), H), unit_structure(H.element("k"), H)

# exp on the cone, expanded at 0.2 + 0.1i and evaluated on the slice of k
f = SliceFunctionData.from_complex(np.exp, H.one())
T = taylor_coefficients(f, SlicePoint([0.2], [0.1], i), 14, rho=1.0)
q = SlicePoint([0.35], [0.3], k)
exact = f(q)
print("order  tail estimate  actual error")
for N in (2, 4, 8, 12):
    tv = taylor_eval(T, q, N)
    print(f"{N:5d}  {tv.tail:13.3e}  {np.linalg.norm(tv.value - exact):12.3e}")

# the branch Psi_s squares to 2q - j on the slice of j
j = unit_structure(H.element("j"), H)
for s in (0.0, 0.5, 1.0):
    p = SlicePoint([0.7], [0.8], j)
    v = branch_psi(s, j, p)
    sq = H.mul(v, v)
    print(f"s={s}: Psi^2 = {np.round(sq, 12)}  (2q - j = {2 * p.element(H)[0] - H.element('j')})")
