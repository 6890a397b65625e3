# The 3 m diamond-memory benchmark, end to end.
#
# Loads the shipped preset, heralds a fresh pair for every teleportation
# trial and prints the fidelity chain. Trials are reduced here for speed.

from qnetsim import load_config, run_scenario

cfg = load_config("pfaff").replace(trials=20_000)
m = run_scenario(cfg).metrics

print(f"entanglement fidelity     {m['entanglement_fidelity']:.4f}")
print(f"BSM-side fidelity         {m['bsm_fidelity']:.4f}")
print(f"receiver-side fidelity    {m['receiver_fidelity']:.4f}")
print(f"teleported fidelity       {m['teleported_fidelity']:.4f} +/- {m['teleported_fidelity_std_error']:.4f}")
print(f"exact channel             {m['teleported_fidelity_oracle']:.4f}")
print(f"CNOT double bit flip      {m['cnot_double_bitflip_probability']:.6f}")
print(f"attempts per pair         {m['mean_attempts_per_pair']:.2f}")
print(f"receiver counts 0/1       {m['receiver_count_0']}/{m['receiver_count_1']}")

# sweep the memory fidelity with the same gate noise
from dataclasses import replace

from qnetsim.runner import nominal_resource
from qnetsim.teleportation import exact_teleport_channel

print("\nmemory fidelity -> exact teleported fidelity")
for f in (1.0, 0.95, 0.9, 0.87, 0.8, 0.7):
    print(f"  {f:.2f}  {exact_teleport_channel(cfg.input_state, nominal_resource(cfg, f), cfg.noise):.4f}")
