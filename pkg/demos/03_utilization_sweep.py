"""Fixed versus flexible TTI utilization as the maximum TTI length grows.

Run: python3 demos/03_utilization_sweep.py
"""
# %%
from mmframe import load_template, TtiMode
from mmframe.analysis import scenario_utilization

SWEEP = (4, 8, 16, 30, 60, 100)

# %% Each traffic model in turn; bursty ones are Monte Carlo estimates
for name in ("tcp-fullbuffer", "large-packets", "small-packets"):
    sc = load_template(name)
    print(name)
    for n in SWEEP:
        fp = sc.frame.with_tti_symbols(n)
        eta = {m.value: scenario_utilization(sc.replace(frame=fp.with_mode(m)), n_samples=20_000).eta
               for m in TtiMode}
        print(f"  {n:4d} symbols  fixed {eta['fixed']:.3f}  flexible {eta['flexible']:.3f}")

# %% Fixed TTIs pad small PDUs to the full TTI, so their utilization collapses
# as the TTI grows. Flexible TTIs only round up to the next symbol.
