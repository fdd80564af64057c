# %% [markdown]
# # Early-warning scores and the alert reward
#
# Each vital sign is mapped to a score from 0 (normal) to 4 (call the
# emergency team). An agent that alerts team level k is rewarded +10 when
# k matches the score and penalised otherwise.

# %%
import numpy as np

from vitalrl import VitalKind, classify, max_attainable_score
from vitalrl.rewards import DEFAULT_REWARDS, best_action

# %%
for hr in (35, 45, 72, 105, 120, 139, 150):
    print(f"heart rate {hr:>3} -> score {classify('heart_rate', hr)}")

# %% [markdown]
# Temperature never reaches 4, so its agent can only ever be rewarded for
# actions 0..3.

# %%
for vital in VitalKind:
    print(f"{vital.value:<12} max score {max_attainable_score(vital)}")

# %%
print("sedation:", {label: classify("sedation", label) for label in ("awake", "mild", "moderate", "severe")})

# %% [markdown]
# Reward matrix, rows are actions and columns are scores 0..4.

# %%
print(DEFAULT_REWARDS.cells)
print("best action per score:", [best_action(s) for s in range(5)])

# %% [markdown]
# Perfect alerting over a recording of length N earns exactly 10N.

# %%
rng = np.random.default_rng(0)
hr = rng.uniform(30, 160, 1000)
scores = [classify("heart_rate", v) for v in hr]
print(sum(DEFAULT_REWARDS.reward(s, s) for s in scores), "of", 10 * len(hr))
