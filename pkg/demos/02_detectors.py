"""The five uncertainty detectors on one ambiguous score distribution.

Run with: python3 demos/02_detectors.py
"""

import numpy as np

from groundcheck import (
    ScoreSet,
    ScoreVector,
    calibrate,
    CalibSpec,
    detect_cahc,
    detect_ev,
    detect_jenks,
    detect_sa,
    detect_threshold,
    sigmoid_scores,
)

# Two candidates score almost the same; a third trails far behind. A good
# meta-classifier should flag this as uncertain between candidates 0 and 1.
probs = ScoreVector(values=np.array([0.45, 0.44, 0.11]), kind="softmax")
print("probabilities:", probs.values)
print()

print("SA           ", detect_sa(probs))
print("CAHC d=0.05  ", detect_cahc(probs, delta=0.05))
print("SoftTr e=0.4 ", detect_threshold(probs, eta=0.4))
print("Jenks gvf=0.9", detect_jenks(probs, gvf_target=0.9))

# Every detector above agrees: uncertain, candidates {0, 1}.

# A confident distribution flips all of them to certain.
confident = ScoreVector(values=np.array([0.9, 0.06, 0.04]), kind="softmax")
print()
print("confident distribution:", confident.values)
print("SA           ", detect_sa(confident))
print("CAHC d=0.05  ", detect_cahc(confident, delta=0.05))

# Ensemble voting works on the kept member distributions instead of a
# single averaged vector: disagreement between argmaxes is the signal.
members = ScoreSet(
    members=np.array([[2.0, 1.9, 0.1], [1.8, 2.1, 0.0], [2.2, 1.7, 0.2], [1.9, 2.0, 0.1]]),
    kind="raw_logit",
)
kept = calibrate(members, CalibSpec(ensemble_mode="keep_members"))
print()
print("EV over 4 members:", detect_ev(kept))

# Thresholding also runs on sigmoid or raw scores; the kind only changes
# the admissible eta range.
print("SigmTr e=0.5 ", detect_threshold(sigmoid_scores(members.member(0)), eta=0.5))
