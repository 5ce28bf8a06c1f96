# coding: utf-8

# # Stable rank and random maps
#
# A Gaussian map preserves energy better when the energy is spread over many
# directions. Equal-spike data has stable rank equal to the number of spikes,
# which makes the effect easy to see.

# In[1]:

import math

import numpy as np

import diffred as dr

MAP = dr.Purpose.GAUSSIAN_MAP


def median_m1(X, d, maps=50, seed=0):
    vals = [dr.m1(X, dr.project(X, dr.sample_map(X.shape[1], d, dr.RandomStream(seed, MAP, i))))
            for i in range(maps)]
    return float(np.median(vals))


# In[2]:

data = {}
for r in (2, 8, 32):
    prof = dr.SpectrumProfile.equal(r, math.sqrt(64.0 / r))
    data[r] = dr.synth_spiked(500, 200, prof, dr.RandomStream(0, dr.Purpose.SYNTH_DATA, 0), centered=True).values
    print(f"rank {r:2d}: stable rank {dr.truncated_svd(data[r], 1).stable_rank:.2f}, "
          f"median M1 at d=10 {median_m1(data[r], 10):.4f}")

# Quadrupling the target dimension should roughly halve the typical M1.

# In[3]:

print("median(d=5) / median(d=20):", round(median_m1(data[32], 5) / median_m1(data[32], 20), 3))

# Residual stable rank as more principal directions are removed.

# In[4]:

X = dr.synth_spiked(300, 100, dr.SpectrumProfile.spiked([8.0, 4.0, 2.0], 30),
                    dr.RandomStream(3, dr.Purpose.SYNTH_DATA, 0), centered=True).values
for k1, rho in dr.residual_stable_rank_curve(X, k1_max=5):
    print(k1, round(rho, 2))
