# Where noise enters the teleportation circuit, and what it costs.
#
# Monte Carlo trials sample Pauli errors and measurement outcomes; the exact
# channel sums over them. The two should agree within a few standard errors.

import numpy as np

from qnetsim import InputState, NoiseConfig, PauliNoise, exact_teleport_channel, fixed_resource, run_trials
from qnetsim.kernel import derive_rng
from qnetsim.quantum import werner_from_fidelity

psi = InputState(np.sqrt(0.3), np.sqrt(0.7) * 1j)
pair = werner_from_fidelity(0.9)
print(f"Werner pair at F = 0.9, ideal gates: {exact_teleport_channel(psi, pair, NoiseConfig()):.4f}"
      f"  (closed form {(1 + 2 * 0.9) / 3:.4f})\n")

points = {
    "none": NoiseConfig(),
    "cnot bit flip 0.05": NoiseConfig(cnot=PauliNoise.bit_flip(0.05)),
    "hadamard phase flip 0.05": NoiseConfig(h=PauliNoise.phase_flip(0.05)),
    "X correction bit flip 0.05": NoiseConfig(correction_x=PauliNoise.bit_flip(0.05)),
    "measurement flip 0.05": NoiseConfig(measurement_flip=0.05),
}
print(f"{'noise':28s}  monte carlo        exact")
for i, (label, noise) in enumerate(points.items()):
    agg = run_trials(40_000, psi, fixed_resource(pair), noise, derive_rng(3, "demo", i))
    exact = exact_teleport_channel(psi, pair, noise)
    print(f"{label:28s}  {agg.mean_fidelity:.4f} +/- {agg.std_error:.4f}  {exact:.4f}")

# a phase flip right before a Z-basis measurement changes nothing;
# the correction noise only acts on trials where the gate is applied,
# so a bit flip there costs about half as much as one on the CNOT
