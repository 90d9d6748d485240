"""The stochastic latent stage and how gradients flow through it.

A latent vector is built as z = mu + exp(s) * eps with eps ~ N(0, 1).
Because the noise enters multiplicatively, z is differentiable in both
the mean head and the scale head for a fixed eps draw, which is what
lets the whole model train by plain backpropagation.
"""

import numpy as np

from varcf.layers import variational_backward, variational_sample
from varcf.models import ModelConfig, build_model, draw_eps, loss_and_grads
from varcf.data import TrainingBatch
from varcf.rng import RngState

# %% The sampling rule, on paper-sized numbers.
mu = np.array([[0.5]])
log_scale = np.array([[np.log(2.0)]])
for eps_value in (0.0, 1.0, -0.25):
    z = variational_sample(mu, log_scale, np.array([[eps_value]]))
    print(f"mu=0.5, scale=2, eps={eps_value:+.2f}  ->  z = {z[0, 0]:+.2f}")

# %% With eps = 0 the layer is exactly the identity on the mean; with the
# scale head pushed to -50 the stochastic path collapses numerically too.
z_frozen = variational_sample(mu, np.array([[-50.0]]), np.array([[10.0]]))
print(f"\nscale head at -50, eps=10: |z - mu| = {abs(z_frozen[0,0] - mu[0,0]):.2e}")

# %% Backward rule: grad_mu passes straight through; grad on the scale
# head is grad_z * eps * exp(s).
grad_mu, grad_s = variational_backward(
    np.array([[1.0]]), np.array([[0.0]]), np.array([[2.0]])
)
print(f"\ngrad_z=1, s=0, eps=2  ->  grad_mu={grad_mu[0,0]}, grad_s={grad_s[0,0]}")

# %% End to end: compare every analytic gradient of the training loss with
# central finite differences (noise frozen so both sides see the same z).
cfg = ModelConfig("VDeepMF", num_users=6, num_items=8, embedding_dim=3, latent_dim=3)
params = build_model(cfg, RngState(11))
batch = TrainingBatch(
    user_ids=np.array([0, 3, 5]),
    item_ids=np.array([2, 7, 1]),
    ratings=np.array([3.5, 1.0, 4.0]),
)
eps = draw_eps(cfg, len(batch), RngState(99))


def loss_value():
    value, _ = loss_and_grads(params, cfg, batch, eps=eps)
    return value


_, grads = loss_and_grads(params, cfg, batch, eps=eps)
print("\nanalytic vs numeric gradient (worst relative error per tensor):")
flat = params.flat()
h = 1e-6
for name, arr in flat.items():
    analytic = np.zeros_like(arr)
    if name in grads.dense:
        analytic = grads.dense[name]
    else:
        ids, rows = grads.embedding[name]
        analytic[ids] = rows
    numeric = np.zeros_like(arr)
    it = np.nditer(arr, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        saved = arr[idx]
        arr[idx] = saved + h
        up = loss_value()
        arr[idx] = saved - h
        down = loss_value()
        arr[idx] = saved
        numeric[idx] = (up - down) / (2 * h)
        it.iternext()
    scale = max(np.abs(analytic).max(), np.abs(numeric).max(), 1e-12)
    print(f"  {name:28s} {np.abs(analytic - numeric).max() / scale:.2e}")
