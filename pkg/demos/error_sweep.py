"""Desk-scale version of the M-sweep error benchmark.

Runs both KeRF flavors over a grid of forest sizes on one noisy target,
prints the summary table, and writes the CSV artifacts plus a line chart
into demo_output/.  The full-scale configuration lives behind the CLI:

    kerflab experiment --target all --out experiment_out --jobs 4
"""

from kerflab import ExperimentConfig, emit_outputs, make_target, run_sweep, summarize

config = ExperimentConfig(
    target=make_target("linear"),
    n=400,
    d=2,
    k=8,
    m_values=(1, 10, 50, 100),
    reps=10,
    test_fraction=0.2,
    master_seed=3,
)

records = run_sweep(config, jobs=2)
summaries = summarize(records)

print(f"{'M':>5} {'centered mse':>14} {'directional mse':>16}")
by_m = {}
for s in summaries:
    by_m.setdefault(s.M, {})[s.algorithm] = s
for M in config.m_values:
    cen, dire = by_m[M]["centered"], by_m[M]["directional"]
    print(f"{M:>5} {cen.mean_mse:>10.4f} +/- {cen.std_mse:.3f} {dire.mean_mse:>9.4f} +/- {dire.std_mse:.3f}")

paths = emit_outputs(records, summaries, "demo_output", render_plots=True)
print("\nwrote:")
for p in paths:
    print(f"  {p}")
