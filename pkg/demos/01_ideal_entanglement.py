# Entangling ten memory pairs on one shared timeline.
#
# Each pair runs the two-round heralding protocol independently; the timeline
# interleaves their events. Pairs that need more attempts finish later.

from qnetsim import LinkHardware, QuantumChannelParams, ClassicalChannelParams
from qnetsim.barrett_kok import BarrettKokLink
from qnetsim.kernel import Timeline, derive_rng

arm = QuantumChannelParams(length=1000, attenuation=0)
hw = LinkHardware(channel_a=arm, channel_b=arm, classical=ClassicalChannelParams(length=2000))

timeline = Timeline()
links = []
for k in range(10):
    link = BarrettKokLink(hw, timeline, derive_rng(1, "barrett_kok", "pair", k), memory_a=k, memory_b=k + 10)
    link.start()
    links.append(link)
executed = timeline.run()
print(f"{executed} events executed, clock stopped at {timeline.now} ps")
print(f"one attempt occupies {links[0].slot} ps\n")

print("pair  memories  attempts  rounds(1/2)  completed_ps  state")
for k, link in enumerate(sorted(links, key=lambda l: l.record.completion_time)):
    r = link.record
    print(f"{k:4d}  {r.memory_a:2d}<->{r.memory_b:2d}  {r.attempts:8d}  {r.round1_count:5d}/{r.round2_count:<5d}"
          f"  {r.completion_time:12d}  {r.sign.value}")

# the ordering above follows the attempt counts exactly
