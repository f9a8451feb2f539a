"""Total control overhead as the number of UEs grows.

Run: python3 demos/04_overhead_vs_users.py
"""
# %%
from mmframe import load_template, total_overhead, BeamformingArch, SrMode

sc = load_template("table2")
archs = {"analog": BeamformingArch.analog(), "hybrid K=4": BeamformingArch.hybrid(4),
         "digital": BeamformingArch.digital()}

# %% With AUTO, each point picks the cheaper of the TDMA and FDMA SR layouts,
# so analog overhead grows until FDMA wins and then stays flat.
print("n_ue " + "".join(f"{k:>14}" for k in archs))
for n in (1, 2, 4, 8, 9, 12, 16, 32, 64):
    row = [total_overhead(sc, arch=a, sr_mode=SrMode.AUTO, n_ue=n) for a in archs.values()]
    print(f"{n:4d} " + "".join(f"{r.total:9.4f} {r.sr_mode:>4}" for r in row))
