"""
Auditing the four conditions from the command line
==================================================

``rigidgen check conditions`` prints declared constants next to measured
values.  The same entry point is callable in-process.
"""

# %%
import io
import json

from rigidgen.cli import main

for argv in (["--family", "oa", "--q", "3", "--n", "3", "--t", "1"],
             ["--family", "design", "--v", "7", "--k", "3", "--t", "1"]):
    out = io.StringIO()
    code = main(["check", "conditions", *argv], stdout=out)
    report = json.loads(out.getvalue())
    print(" ".join(argv), "-> exit", code)
    for row in report["result"]["constants_table"]:
        print(f"   {row['constant']:5s} declared={row['declared']!s:>8}"
              f" measured={row['measured']!s:>6}")
    window = report["result"]["admissible_N"]
    print(f"   N window [{window['lower_bound']:.3g}, {window['upper_bound']:.3g}]"
          f" smallest={window['smallest']}")
