# %% [markdown]
# # Training one DQN agent per vital
#
# Three agents watch heart rate, respiration and temperature on a shared
# clock. They never see each other's readings, so training them together
# gives exactly the same trajectories as training each alone.

# %%
import numpy as np

from vitalrl.data import SynthSpec, synthesize
from vitalrl.harness import RunConfig, evaluate_greedy, run_training, smoothed

N = 500
stream = synthesize(SynthSpec.named("uniform", ["heart_rate", "resp_rate", "temperature"], N + 1, seed=0))
config = RunConfig(monitor_length=N, episodes=10, seed=0,
                   vitals=("heart_rate", "resp_rate", "temperature"))
metrics = run_training(stream, config)

# %%
for vital in config.vitals:
    scores = metrics.scores(vital)
    print(f"{vital.value:<12}", scores)
    print(" " * 12, smoothed(scores).round(0))

# %% [markdown]
# Greedy evaluation switches exploration off. The fraction is the score over
# the 10N maximum.

# %%
for vital in config.vitals:
    agent = metrics.models[("synth", vital.value)]
    print(f"{vital.value:<12} fraction {evaluate_greedy(agent, stream, N) / (10 * N):.3f}")

# %% [markdown]
# Longer training on heart rate alone (about half a minute).

# %%
hr = synthesize(SynthSpec.named("uniform", ["heart_rate"], N + 1, seed=1))
long_run = run_training(hr, RunConfig(monitor_length=N, episodes=200, seed=1))
agent = long_run.models[("synth", "heart_rate")]
print("after 200 episodes:", evaluate_greedy(agent, hr, N) / (10 * N))

# %%
# same seed, same bits
again = run_training(stream, config)
print(again.rows == metrics.rows)
