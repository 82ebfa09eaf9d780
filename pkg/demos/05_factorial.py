"""The 2x2 existence factorial, its report files, and paired comparisons.

Ten seeds at full length is 40 runs, about a minute and a half on one core.
Raise ``workers`` on a multi-core machine; the report does not change.
"""
from artmarket.experiment import FactorialSpec, emit_report, paired_difference, render_text, run_factorial
from artmarket.simulator import SimConfig

spec = FactorialSpec(base=SimConfig(), seeds=range(10), workers=1)
report = run_factorial(spec, out_dir="factorial_out")
emit_report(report, "factorial_out")
print(render_text(report))

# cells are cross-seed means; orderings are judged on paired per-seed differences
for metric, a, b in [("ctaa_volume", "both", "ctaa_only"), ("strta_volume", "both", "strta_only"),
                     ("stdev_100", "both", "neither")]:
    diff, se = paired_difference(report.records, metric, a, b)
    print(f"{metric}: {a} - {b} = {diff:+.4f} (se {se:.4f})")
