"""
SNR sweep
=========

The same grid the command line produces with ``dctneuron sweep``, printed as
a table.  Each cell averages ten block (least-squares) fits.
"""

from dctneuron.config import parse_config
from dctneuron.experiments import run_sweep

cfg = parse_config(
    "[sweep]\nsnr_list = -10, 0, 10, 30\nnonlinearities = compander, sine, square\n"
    "estimators = direct, inverse\n",
    sweep=True,
)
rows = run_sweep(cfg).cells
table = {(r["nonlinearity"], r["snr_db"], r["estimator"]): r["function_nmse"] for r in rows}

print(f"{'':>10}" + "".join(f"{s:>20g}" for s in cfg.snr_list))
for kind in cfg.nonlinearities:
    for est in cfg.estimators:
        cells = "".join(f"{table[(kind, s, est)]:20.2e}" for s in cfg.snr_list)
        print(f"{kind[:6] + ' ' + est[:3]:>10}{cells}")
