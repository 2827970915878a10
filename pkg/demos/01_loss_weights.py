"""
Weighting losses by their recent behaviour
==========================================

Three synthetic loss curves are fed to a controller and the resulting
weights are printed every few steps, once per strategy.
"""

import numpy as np

from dmf import Controller, ControllerConfig, DecaySchedule

rng = np.random.default_rng(0)
steps = np.arange(300)

# a smooth decay, a noisy decay and one that plateaus with rare spikes
smooth = 2.0 * np.exp(-steps / 80) + 0.1
noisy = 1.5 * np.exp(-steps / 120) + 0.3 + 0.15 * rng.standard_normal(steps.size).clip(-1, 1)
spiky = 0.6 + 0.02 * rng.standard_normal(steps.size) + 0.8 * (rng.random(steps.size) < 0.03)
curves = np.column_stack([smooth, noisy, spiky])

for strategy in ("variance", "mad", "bayesian"):
    priors = (0.5, 0.25, 0.25) if strategy == "bayesian" else None
    ctrl = Controller(3, ControllerConfig(strategy, priors), DecaySchedule(gamma0=1.0, tau=0.01))
    print(f"\n{strategy}")
    print("  step   w_smooth  w_noisy  w_spiky   gamma")
    for t, losses in enumerate(curves):
        res = ctrl.step(losses, aux_loss=0.5, t=t)
        if t % 50 == 0 or t == steps[-1]:
            w = res.weights
            print(f"  {t:4d}   {w[0]:.4f}    {w[1]:.4f}   {w[2]:.4f}   {res.gamma:.4f}")

# variance rewards the curves that are still moving; MAD does the opposite
# and favours the one whose typical deviation is smallest, while ignoring
# the rare spikes that would dominate a variance estimate.

# The controller state can be saved and restored as plain text.
snapshot = ctrl.to_text()
print("\nsnapshot keys:", [line.split("=")[0] for line in snapshot.splitlines()])
restored = Controller.from_text(snapshot)
np.testing.assert_array_equal(restored.current_weights(300), ctrl.current_weights(300))
