"""Run the numerical checks of the combination's theory and print one line per claim."""
import sys

from palette.verify import enhancement_gaps, lambda_from_cmi_min, FactorizationInstance, run_suite

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
for result in run_suite(seed):
    print(result.line())

# two hand-sized instances
rep = enhancement_gaps(0.8, 0.2, s=1.0, mode="exact")
print(f"\ngap between p=0.8 and p=0.2: palette {rep.gap_ours:.4f}, linear {rep.gap_linear:.4f}")
inst = FactorizationInstance(p_i=0.5, p_j=0.5, lam_i=0.6, lam_j=0.4, lam_ic=0.4, lam_jc=0.6, p_z=0.5)
print(f"lambda_ij for (0.6, 0.4, p_z=0.5): {lambda_from_cmi_min(inst).ij:.4f}")
