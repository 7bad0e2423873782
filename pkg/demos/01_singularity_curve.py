"""How often is a random symmetric sign matrix singular?

Exact enumeration decides every n up to 6; beyond that we sample matrices and
decide det = 0 exactly per sample (integer Bareiss elimination, so there is
no float threshold anywhere).  The claimed asymptotic rate 2 n^2 2^-n is used
only as a plausibility band: at desk scale the true curve decays noticeably
more slowly.
"""

from siglab import SeedSpec, fit_exponential, singularity_exhaustive, singularity_mc

rows = []
print("exact counts (all 2^(n(n+1)/2) matrices):")
for n in range(1, 6):
    row = singularity_exhaustive(n)
    print(f"  n={n}:  {row.count} / {row.total}  = {row.p_hat:.6f}")

print("\nMonte Carlo with exact determinants (1e5 samples/point):")
for n in range(8, 17, 2):
    row = singularity_mc(n, 100_000, SeedSpec(1, f"demo{n}"))
    rows.append(row)
    conj = 2 * n * n * 2.0**-n
    print(
        f"  n={n:2d}:  p = {row.p_hat:.5f}  [{row.ci_low:.5f}, {row.ci_high:.5f}]"
        f"   2n^2 2^-n = {conj:.5f}  ratio = {row.p_hat / conj:.2f}"
    )

fit = fit_exponential(rows, (8, 16))
print(
    f"\nweighted log-linear fit over n in [8,16]: slope {fit.slope:.3f} "
    f"+- {fit.slope_se:.3f} (decay certified: {fit.decay_certified})"
)
print("note: the desk-scale slope sits well above the asymptotic -log 2.")
