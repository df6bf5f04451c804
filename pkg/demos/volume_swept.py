"""Volume swept out by disarrangements on a two-cell mesh.

The right cell carries a traceless shear and the shared face a jump, so all of
the swept volume is interfacial. The positive and negative parts split V_abs
around the total trace.
"""

from pathlib import Path

from disarrangement import disarrangement_report, rowmax_bulk_integral
from disarrangement.io import load_json, parse_mesh

mesh = parse_mesh(load_json(Path(__file__).parent / "data" / "two_cells.json"))
rep = disarrangement_report(mesh)
print(f"bulk |tr M| integral    {rep.bulk_abs:.6f}")
print(f"interfacial |[g].nu|    {rep.interfacial_abs:.6f}")
print(f"V_abs = {rep.V_abs:.6f}, V_plus = {rep.V_plus:.6f}, V_minus = {rep.V_minus:.6f}")
print(f"total trace             {rep.trace_total:.6f}")
print(f"V_plus - (V_abs + trace)/2 = {rep.V_plus - 0.5 * (rep.V_abs + rep.trace_total):.1e}")
print(f"row-max bulk integral   {rowmax_bulk_integral(mesh):.6f}")
