"""Omni-directional SNR distribution of UEs dropped in a 100 m cell.

Run: python3 demos/02_snr_calibration.py
"""
# %%
import numpy as np

from mmframe import load_template, sample_snr_distribution
from mmframe.channel import db

sc = load_template("table2")
dist = sample_snr_distribution(sc.budget, sc.path_loss, 100_000, np.random.default_rng(1))
conn = dist.connected
print(f"{len(conn)} of {len(dist)} drops connected")

# %% Percentiles that dimension the control channels
for d in ("ul", "dl"):
    g = db(conn.gammas(d))
    p5, p50 = np.percentile(g, [5, 50])
    print(f"{d}: 5th percentile {p5:6.1f} dB, median {p50:6.1f} dB")

# %% A coarse text CDF of the UL SNR
hist, edges = np.histogram(db(conn.gamma_ul), bins=12)
cdf = np.cumsum(hist) / hist.sum()
for e, c in zip(edges[1:], cdf):
    print(f"{e:7.1f} dB  {'#' * int(40 * c)}")
