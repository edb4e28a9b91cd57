"""A desk-scale benchmark sweep with summary statistics.

Runs a reduced factor grid (full grids take ~15 minutes; see the bench CLI)
and prints per-cell means with 95% confidence intervals, plus the
device-scaling shape checks at the largest sensor level.
"""

from sensedeploy.bench import (
    ExperimentDesign,
    check_device_scaling,
    check_phase_growth,
    run_design,
    summarize,
)

design = ExperimentDesign(
    device_levels=(1, 4),
    sensor_levels=(1000, 5000),
    replications=3,
    seed=42,
)
print(f"running {design.cells} cells…")
report = run_design(design, progress=True)
assert not report.failures, report.failures

print("\nper-cell means (95% CI half-widths in parentheses):")
for row in summarize(report.records):
    print(
        f"  d={row['devices']:2d} s={row['sensors']:6d}: "
        f"unmarshal {row['unmarshal_ms_mean']:7.1f} ({row['unmarshal_ms_ci95']:.1f}) "
        f"marshal {row['marshal_ms_mean']:7.1f} ({row['marshal_ms_ci95']:.1f}) "
        f"deploy {row['deploy_ms_mean']:7.1f} ({row['deploy_ms_ci95']:.1f}) ms"
    )

scaling = check_device_scaling(report.records, sensors=5000)
print("\nbytes per device by device level:", [f"{b:.0f}" for b in scaling["bytes_per_device_means"]])
print("strictly decreasing:", scaling["bytes_strictly_decreasing"])
print("phase spreads across device levels:", {k: f"{v:.2%}" for k, v in scaling["phase_spreads"].items()})

growth = check_phase_growth(report.records, devices=1)
print("\nphase growth within linear x1.5 slack:", growth["linear_within_slack"])
for violation in growth["violations"]:
    print("  !", violation)
