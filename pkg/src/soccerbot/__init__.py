"""Hardware-free humanoid soccer robot stack.

A deterministic re-creation of a classic humanoid soccer software stack:
servo-bus codec and simulated actuators, an 8 ms control loop, attitude
estimation, a CPG gait with feedback stabilization, iterative-learning
feed-forward control, fisheye color-segmentation vision, keyframe motions,
a soccer behavior FSM, a hierarchical config server, and a simulated world
with a synthetic fisheye camera that closes the loop.
"""

__version__ = "0.1.0"
