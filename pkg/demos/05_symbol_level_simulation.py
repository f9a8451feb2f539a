"""Symbol-level simulation checked against the closed-form predictions.

Run: python3 demos/05_symbol_level_simulation.py
"""
# %%
from mmframe import load_template, Simulation, TtiMode, analytic_prediction
from mmframe.simulator import check_invariants

sc = load_template("small-packets")

# %% One second of traffic in each TTI mode on the same UE drop. Short runs
# carry noise from the realized packet mix; longer runs tighten the match.
for mode in TtiMode:
    s = sc.replace(frame=sc.frame.with_mode(mode))
    sim = Simulation(s, 1.0, seed=3)
    rep = sim.run()
    pred = analytic_prediction(s, sim.ue_snr)
    print(f"{mode.value:>8}: utilization {rep.utilization:.3f} (analytic {pred.utilization:.3f}), "
          f"overhead {rep.overhead['total']:.4f} (analytic {pred.overhead.total:.4f})")
    assert check_invariants(sim) == []

# %% The first few scheduled TTIs
for r in sim.records[:5]:
    print(r)

# %% Round-trip latency with one UE and a fully digital array
lat = load_template("latency")
r = Simulation(lat, 1.0, seed=1).run()
print("UL RTT percentiles (us):", {k: round(v) for k, v in r.rtt_us.items() if k != "n"})
