# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# # One SPRT per component
#
# Each component runs its own sequential probability ratio test with
# thresholds s^-(1+eps) and (n-s)^(1+eps). The thresholds are tuned so the
# expected number of false positives and misses both stay below one.

# + {"tags": ["parameters"]}
n, s, eps = 10100, 100, 0.1
trials = 200
# -

import numpy as np

from seqsparse import ExperimentSpec, GaussianShift, ProblemInstance, Sprt, run_experiment, run_sprt
from seqsparse.bounds import sprt_thresholds

pair = GaussianShift(1.0)
stats = pair.llr_stats()
th = sprt_thresholds(n, s, eps)
print(f"log thresholds: {th.log_gamma_L:.4f} .. {th.log_gamma_U:.4f}")

# -
# A single instance: null components stop after a few samples, while the
# shifted ones climb to the upper threshold.

inst = ProblemInstance.generate(n, s, seed=42)
out = run_sprt(inst, pair, Sprt(epsilon=eps))
null_J = out.samples_per_index[~inst.mask]
alt_J = out.samples_per_index[inst.mask]
print(f"null components: mean {null_J.mean():.2f} samples, max {null_J.max()}")
print(f"signal components: mean {alt_J.mean():.2f} samples, max {alt_J.max()}")
print(f"exact: {out.exact}, false positives {out.false_positives}, misses {out.false_negatives}")

# -
# Over many trials the per-component error rates sit under 1/gamma_U and
# gamma_L. The average cost lands near (1+eps) ln s / d01 plus the
# overshoot past the threshold.

r = run_experiment(ExperimentSpec(n, s, pair, Sprt(epsilon=eps), trials=trials, base_seed=3))
print(f"alpha_hat {r.alpha_hat:.2e} (bound {1 / th.gamma_U:.2e})")
print(f"beta_hat  {r.beta_hat:.2e} (bound {th.gamma_L:.2e})")
print(f"samples per dimension {r.avg_samples_per_dim:.3f} vs (1+eps) ln s / d01 = {(1 + eps) * np.log(s) / stats.d01:.3f}")

# -
# Wald's identity says E[J] = E[L_J] / drift for each hypothesis. The
# residual J - L_J / drift should average to zero.

d = r.diagnostics
for label in ("null", "alt"):
    print(
        f"{label}: residual {d[f'wald_{label}_residual']:+.4f} +/- {d[f'wald_{label}_residual_se']:.4f}"
        f" over {d[f'wald_{label}_count']} stopped components"
    )
print(f"mean overshoot below / above: {d['overshoot_lower_mean']:.3f} / {d['overshoot_upper_mean']:.3f}")
