# %% [markdown]
# # Learning-rate and discount sweeps, and a tabular baseline

# %%
import numpy as np

from vitalrl.agents import QTable, greedy_policy, run_tabular_episode
from vitalrl.data import SynthSpec, synthesize
from vitalrl.env import VitalEnv
from vitalrl.harness import RunConfig, SweepGrid, run_sweep

N = 500
stream = synthesize(SynthSpec.named("uniform", ["heart_rate"], N + 1, seed=0))
base = RunConfig(monitor_length=N, episodes=10, seed=0)

# %%
alpha = run_sweep(stream, base, SweepGrid("alpha", (0.1, 0.01, 0.001, 0.0001, 0.00001)))
for value, score in alpha.final_scores("heart_rate").items():
    print(f"alpha={value:<8g} final episode score {score}")

# %%
gamma = run_sweep(stream, base, SweepGrid("gamma", (0.95, 0.9, 0.85, 0.8, 0.75)))
for value, score in gamma.final_scores("heart_rate").items():
    print(f"gamma={value:<5g} final episode score {score}")

# %% [markdown]
# Tabular Q-learning on the discrete score itself. Because the recording
# moves on regardless of the alert, the best action in each state is simply
# the one with the highest immediate reward, and the table finds it.

# %%
env = VitalEnv("heart_rate", stream["heart_rate"], N)
table = QTable(alpha=0.1, gamma=0.9)
rng = np.random.default_rng(0)
for _ in range(10):
    run_tabular_episode(table, env, 1.0, rng)
print(table.q.round(1))
print(greedy_policy(table))
print("greedy score:", run_tabular_episode(table, env, 0.0, rng, learn=False), "of", 10 * N)
