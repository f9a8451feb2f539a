"""Control overhead per message and beamforming architecture.

Run: python3 demos/01_control_overhead_table.py
"""
# %% Load the default 8-UE scenario and lay out every control channel
from mmframe import load_template, table2, format_table2, total_overhead, BeamformingArch

sc = load_template("table2")
tab = table2(sc)
print(format_table2(tab))

# %% Per-channel breakdown for one architecture
rep = total_overhead(sc, arch=BeamformingArch.hybrid(4))
for name, value in rep.as_dict().items():
    print(f"{name:>10}: {value}")

# %% Scheduling requests dominate for analog arrays; a fully digital array
# serves all UEs in one symbol, so its overhead is roughly 13x smaller.
print("analog / digital total:", tab.totals[0] / tab.totals[2])
