"""Calibration walkthrough: temperature scaling and ensemble averaging.

Run with: python3 demos/01_calibration.py
"""

import numpy as np

from groundcheck import ScoreSet, ensemble_average, entropy, sigmoid_scores, softmax_with_temperature

# Raw logits recorded for one command over four candidate objects.
logits = np.array([2.1, 1.8, 0.3, -0.5])
print("raw logits:        ", logits)

# The plain softmax (temperature 1) is overconfident about candidate 0.
for tau in (0.5, 1.0, 2.0, 10.0):
    out = softmax_with_temperature(logits, tau)
    print(f"softmax @ tau={tau:<5}", np.round(out.values, 4), f"entropy={entropy(out):.3f}")

# Raising the temperature flattens the distribution but never reorders it:
# candidate 0 stays on top all the way to a near-uniform spread.

print()
print("sigmoid output:    ", np.round(sigmoid_scores(logits).values, 4))

# An ensemble of independently trained models gives a second calibration
# route: average the per-member softmax distributions.
members = np.array(
    [
        [2.1, 1.8, 0.3, -0.5],
        [1.6, 2.2, 0.1, -0.2],
        [2.4, 1.7, 0.5, -0.9],
        [1.9, 2.0, 0.2, -0.4],
    ]
)
scores = ScoreSet(members=members, kind="raw_logit")
avg = ensemble_average(scores, temperature=1.0)
print()
print("member argmaxes:   ", [int(np.argmax(row)) for row in members])
print("ensemble average:  ", np.round(avg.values, 4))
# Members split two against two here, and the averaged distribution shows
# much less confidence than any single member would.
