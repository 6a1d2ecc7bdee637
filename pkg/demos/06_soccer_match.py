"""Full closed-loop match demo: kickoff, approach, kick, then a shove from
behind and the recovery. Prints a behavior timeline as it happens.

This runs the same deterministic stack as `soccerbot run`, about 20
simulated seconds (roughly half a minute of wall time).
"""

import numpy as np

from soccerbot.behavior import BehaviorState
from soccerbot.runtime.loop import DT, Simulation

sim = Simulation(seed=7)
ball_start = sim.world.ball_pos.copy()
print(f"kickoff: robot at {sim.world.pose[:2]}, ball {np.hypot(*(sim.world.ball_pos - sim.world.pose[:2])):.1f} m ahead")

last_state = None
pushed = False
for _ in range(int(40.0 / DT)):
    sim.run_cycle()
    t = sim.clock_us / 1e6
    if sim.fsm.state != last_state:
        last_state = sim.fsm.state
        ball = sim.belief.ball
        extra = ""
        if ball and ball.distance:
            extra = f" (ball {ball.distance:.2f} m at {ball.bearing:+.2f} rad)"
        print(f"  t={t:6.2f}s  {last_state.value:<10}{extra}")
    displaced = float(np.hypot(*(sim.world.ball_pos - ball_start)))
    if not pushed and displaced > 1.0 and last_state == BehaviorState.SEARCH:
        print(f"  t={t:6.2f}s  ball kicked {displaced:.2f} m -- shoving the robot over")
        sim.world.push(1.6)
        pushed = True
        recover_deadline = t + 20.0
    if pushed and last_state == BehaviorState.SEARCH and sim.fall.state.value == "stable" \
            and sim.clock_us / 1e6 > recover_deadline - 19.0:
        print(f"  t={t:6.2f}s  back on its feet and searching")
        break

print(f"\nfinal: behavior={sim.fsm.state.value}, ball moved "
      f"{np.hypot(*(sim.world.ball_pos - ball_start)):.2f} m, "
      f"battery {sim.world.battery_v:.2f} V, bus warnings {sim.master.warnings}")
