"""Four points that no decoder can handle well.

Two model vectors z1, z2 whose difference is almost in the kernel give two
points p1, p2 with the same measurement. Whatever a decoder outputs for that
measurement, it is far from one of them.
"""
import numpy as np

from iocert import KSparse
from iocert.certify import nsp_constant_l2
from iocert.constructions import adversarial_pair, decoder_ratios
from iocert.decoders import decode_noiseless

rng = np.random.default_rng(7)
model = KSparse(6, 1)
M = rng.standard_normal((4, 6))
d = nsp_constant_l2(M, model).d_star
D = 0.9 * d
pair = adversarial_pair(M, model, D)

np.set_printoptions(precision=4, suppress=True)
print(f"d_star = {d:.4f}, using D = {D:.4f}")
print("z1 =", pair.z1)
print("z2 =", pair.z2)
print("p1 =", pair.p1)
print("p2 =", pair.p2)
print("|M p1 - M p2| =", np.linalg.norm(M @ (pair.p1 - pair.p2)))
print()
ratios = decoder_ratios(pair, lambda y: decode_noiseless(y, M, model), M, model)
for name, r in zip(("p1", "p2", "z1", "z2"), ratios):
    print(f"error / distance at {name}: {r:.4f}")
print(f"guaranteed worst case sqrt(D^2 - 1) = {pair.ratio_bound:.4f}")
