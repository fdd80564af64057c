# %% [markdown]
# # Synthetic vital-sign streams
#
# A band-dwell profile says what fraction of the recording a vital spends in
# each score band. Values are drawn near band centres, in runs of `dwell`
# samples, so the stream looks like a patient drifting between states.

# %%
import numpy as np

from vitalrl.data import SynthSpec, load_csv, synthesize, write_csv
from vitalrl.mews import VitalKind, classify

# %%
spec = SynthSpec.named("uniform", ["heart_rate", "resp_rate", "temperature"], 500, seed=1)
stream = synthesize(spec)
for vital in stream.vitals:
    hist = np.bincount([classify(vital, v) for v in stream[vital]], minlength=5)
    print(f"{vital.value:<12}", hist)

# %% [markdown]
# Temperature has no score-4 band, so the uniform profile spreads over four
# bands instead of five.

# %%
print(stream[VitalKind.HEART_RATE][:25].round(1))

# %% [markdown]
# Streams round-trip through the CSV ingestion schema.

# %%
path = write_csv(stream, "/tmp/vitalrl_demo_subject.csv")
(back,) = load_csv(path)
print(back.subject_id, back.sample_count, np.allclose(back[VitalKind.HEART_RATE], stream[VitalKind.HEART_RATE]))

# %% [markdown]
# Fahrenheit recordings must be flagged; otherwise 98.6 would read as fever.

# %%
with open("/tmp/vitalrl_demo_f.csv", "w") as fh:
    fh.write("timestamp,heart_rate,resp_rate,temperature\n0,72,16,98.6\n1,72,16,101.3\n")
(f,) = load_csv("/tmp/vitalrl_demo_f.csv", temp_unit="fahrenheit")
print(f[VitalKind.TEMPERATURE].round(2), [classify("temperature", t) for t in f[VitalKind.TEMPERATURE]])
