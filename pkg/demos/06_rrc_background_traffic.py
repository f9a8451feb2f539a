"""Per-user throughput of a saturated DL flow under RRC signalling load.

Run: python3 demos/06_rrc_background_traffic.py   (about 10 s)
"""
# %%
from mmframe import load_template, rrc_experiment

sc = load_template("rrc")
rows = rrc_experiment(sc, rates=[0, 500, 1250], duration=0.5)

# %% Every short RRC message occupies a whole TTI in fixed mode, while
# flexible mode spends a few symbols on it and keeps serving the flow.
for r in rows:
    print(f"{r['mode']:>8}  {r['rrc_rate_per_s']:6.0f}/s  {r['user_rate_bps'] / 1e6:8.1f} Mb/s"
          f"  drop {r['drop']:.1%}")
