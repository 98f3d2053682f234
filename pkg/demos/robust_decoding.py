"""Noisy decoding of nearly sparse vectors and the bounds that cover it."""
import numpy as np

from iocert import KSparse
from iocert.certify import rip_constants
from iocert.decoders import decode_robust
from iocert.models import sample_model
from iocert.norms import m_distance_to_model, noisy_anchor_bound

rng = np.random.default_rng(1)
model = KSparse(6, 1)
M = rng.standard_normal((4, 6))
alpha = rip_constants(M, model, on="difference").alpha
print(f"lower RIP constant on the differences: alpha = {alpha:.4f}")
print()
print("noise    error     M-norm bound   anchor bound")

for scale in (0.0, 0.01, 0.1, 1.0):
    x = sample_model(model, rng) + 0.05 * rng.standard_normal(6)
    e = scale * rng.standard_normal(4)
    x_hat = decode_robust(M @ x + e, M, model, alpha).x_hat
    err = np.linalg.norm(x - x_hat)
    dm = m_distance_to_model(x, model, M, alpha).value
    bound = 2 * dm + 2 / alpha * np.linalg.norm(e)
    anchor = noisy_anchor_bound(x, e, model, M, alpha).value
    print(f"{scale:5.2f}   {err:8.4f}   {bound:12.4f}   {anchor:12.4f}")

print()
print("The anchor bound picks one model point for both terms, which is why it")
print("never exceeds the M-norm bound.")
