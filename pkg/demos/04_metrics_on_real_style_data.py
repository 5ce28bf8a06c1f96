# coding: utf-8

# # Metrics, preprocessing and file formats
#
# Raw data goes through row normalization and column centering first. After
# that the sum of squared pairwise distances equals n times the energy.

# In[1]:

import tempfile
from pathlib import Path

import numpy as np

import diffred as dr

rng = np.random.default_rng(0)
raw = rng.lognormal(size=(400, 30)) @ rng.standard_normal((30, 30))
A = dr.preprocess(raw)
print(A.flags(), A.history)
print("pair-sum identity gap:", dr.pairwise_energy_identity_check(A)[2])

# Exact Stress over all pairs, and a sampled estimate with a standard error.

# In[2]:

cfg, _, summary = dr.auto_config(A, 8, eta=50)
Y = dr.diffred_embed(A, cfg, summary=summary).values
exact = dr.stress_exact(A, Y)
est, se = dr.stress_sampled(A, Y, 5000, dr.RandomStream(0, dr.Purpose.PAIR_SAMPLE, 0))
print(f"exact {exact:.4f}  sampled {est:.4f} +/- {1.96 * se:.4f}")

# Energy matching rescales any embedding so that M1 becomes zero.

# In[3]:

matched = dr.energy_match(Y, A)
print("M1 after matching:", dr.m1(A, matched.values), "scale", round(matched.provenance["energy_match_scale"], 4))

# Round trip through the binary format.

# In[4]:

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "A.bin"
    dr.save_matrix(path, A)
    back = dr.load_matrix(path, "bin")
    print("identical after reload:", np.array_equal(np.asarray(back), np.asarray(A)))
