"""Experiments described as text and written out as CSV.

The same runner is available from a shell as ``python -m iotaoi``.
"""

import io

from iotaoi import cli

config = """
# update coverage vs power control
preset = fig7_left
"""
cfg = cli.parse_config(config)
out = io.StringIO()
status = cli.run(cfg, out=out)
print(out.getvalue().splitlines()[0])
print(f"... {len(out.getvalue().splitlines()) - 1} data rows, exit status {status}")

# a quick simulation check of one point, with CI columns
cfg = cli.parse_config("""
command = compare
beta_d = 0 dB
n_realizations = 200
n_slots = 200
window_side = 2000
""")
out = io.StringIO()
status = cli.run(cfg, out=out)
row = out.getvalue().splitlines()
header, values = row[0].split(","), row[1].split(",")
for key in ("P_d_analytic", "P_d_sim", "P_d_rel_err", "M_1_analytic", "M_1_sim"):
    print(f"{key:14s} {float(values[header.index(key)]):.4f}")
print(f"exit status {status} (3 means a tolerance was exceeded)")
