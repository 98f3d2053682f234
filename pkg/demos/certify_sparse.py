"""How many measurements does a 1-sparse signal in R^6 need?

Draws Gaussian matrices with m = 1..6 rows and prints the optimal null space
constant next to the lower bound sqrt(n/m) that holds for every matrix.
"""
import math

import numpy as np

from iocert import KSparse
from iocert.certify import nsp_constant_l2, rip_constants

rng = np.random.default_rng(0)
n = 6
model = KSparse(n, 1)

print("m   sqrt(n/m)   d_star      alpha on the differences")
for m in range(1, n + 1):
    M = rng.standard_normal((m, n))
    d = nsp_constant_l2(M, model).d_star
    alpha = rip_constants(M, model, on="difference").alpha
    # with m = n the kernel is trivial and the bound does not apply
    bound = f"{math.sqrt(n / m):9.4f}" if m < n else "        -"
    print(f"{m}   {bound}   {d:9.4f}   {alpha:.4f}")

print()
print("With m = 1 the kernel is 5-dimensional and always contains a 2-sparse")
print("vector, so the constant is infinite. From m = 2 on it is finite, and it")
print("never drops below sqrt(n/m).")
