# How photon loss changes the herald rate but not the heralded state.
#
# With per-photon survival q the protocol succeeds with probability q^2/2.
# Losing a photon in either round leaves a click pattern that fails the
# double herald, so every accepted pair is still a perfect Bell state.

import numpy as np

from qnetsim import LinkHardware, MemoryParams, fidelity_to_pure, success_probability_oracle
from qnetsim.barrett_kok import run_attempts
from qnetsim.kernel import derive_rng

n = 50_000
print(" q     measured  q^2/2    worst fidelity")
for q in (1.0, 0.8, 0.5, 0.2):
    mem = MemoryParams(efficiency=q)
    hw = LinkHardware(memory_a=mem, memory_b=mem)
    records = []
    outcomes = run_attempts(hw, n, derive_rng(7, "demo", q), on_entangled=records.append)
    rate = np.mean([o.verdict.success for o in outcomes])
    worst = min(fidelity_to_pure(r.state, r.sign.vector) for r in records)
    print(f"{q:4.1f}  {rate:8.4f}  {success_probability_oracle(q):7.4f}  {worst:.12f}")

# failure reasons at q = 0.5
mem = MemoryParams(efficiency=0.5)
outcomes = run_attempts(LinkHardware(memory_a=mem, memory_b=mem), n, derive_rng(7, "reasons"))
reasons = {}
for o in outcomes:
    key = o.verdict.reason or o.verdict.sign.value
    reasons[key] = reasons.get(key, 0) + 1
print("\noutcomes at q = 0.5:", dict(sorted(reasons.items())))
