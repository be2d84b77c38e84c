"""
Graph snapshots and feasibility repair
======================================

Exports per-step graph snapshots from a solved schedule (the training data
for a learned scheduler), then shows the repair operator turning noisy
per-edge class probabilities into feasible link choices.
"""

import numpy as np

from hyrosched.graphio import (
    N_CLASSES,
    augment_label,
    class_weights,
    decode_label,
    snapshots_for_trace,
)
from hyrosched.milp import SolverLimits, build_model, solve_bnb
from hyrosched.repair import detect_violations, top2_repair
from hyrosched.replay import simulate
from hyrosched.scenario import GenConfig, generate

scn = generate(GenConfig(), seed=4)
trace = simulate(scn, solve_bnb(build_model(scn), SolverLimits(node_cap=50)))

snaps = snapshots_for_trace(trace)
print(f"{len(snaps)} snapshots (one input + one recorded per step)")
rec = [s for s in snaps if s.kind == "recorded"]
print(f"node features {rec[0].node_features.shape}, "
      f"edge features {rec[0].edge_features.shape}")

# augmented 8-class codes combine availability with the chosen link; their
# distribution is skewed toward "no transmission", hence inverse-frequency
# class weights for training
codes = [augment_label(int(a), int(l))
         for s in rec for a, l in zip(s.availability(), s.labels)]
w = class_weights(codes)
print("class weights (inverse frequency):", " ".join(f"{x:.2f}" for x in w))

# --- repair: noisy probabilities become feasible labels -------------------
snap = rec[0]
rng = np.random.default_rng(0)
probs = rng.dirichlet(np.ones(N_CLASSES), size=len(snap.edge_index))
avail = snap.availability()

# hard-labeling the argmax usually violates something: wrong availability
# codes, or one device claimed by several edges at once
hard = probs.argmax(axis=1)
hard_chosen = np.array([decode_label(int(c))[1] for c in hard])
before = detect_violations(hard_chosen, avail, snap.n_devices)

labels = top2_repair(probs, avail, snap.n_devices)
chosen = np.array([decode_label(int(c))[1] for c in labels])
after = detect_violations(chosen, avail, snap.n_devices)
print(f"repair: {len(before)} violations before, {len(after)} after; "
      f"active edges {int((chosen > 0).sum())} <= floor(N/2) = {snap.n_devices // 2}")
