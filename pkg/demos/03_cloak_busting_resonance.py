"""A cloak-busting inclusion: why the lossless construction fails.

Without the lossy lining, for every regularization parameter there is an
interior medium that resonates: the two-layer disk below admits a
nontrivial radial compressional field with traction-free outer boundary,
so its boundary map does not even exist. The mode-0 interface system
becomes singular exactly at the constructed core density, which the
conditioning scan makes visible as a spike.
"""

from elastocloak import (
    IsotropicMedium,
    LayeredDiskConfig,
    NearResonanceError,
    assemble_ntd,
    find_resonant_densities,
    mode_system_condition,
    resonant_config,
)

lam, mu, omega = 1.0, 1.0, 1.0
r0, r1 = 0.5, 1.0

res = find_resonant_densities(lam, mu, r0, r1, omega)
print(f"constructed densities: annulus rho1 = {res.rho1:.6f}, core rho2 = {res.rho2:.6f}")
print(f"matched roots: t* = {res.t_star:.6f}, t1 = {res.t1:.6f}, t2 = {res.t2:.6f}")
print(f"coefficient pair (c1, c2) = ({res.c[0]:.6f}, {res.c[1]:.6f})")
print(f"transmission-determinant residual: {res.det_residual:.2e}\n")

config = resonant_config(lam, mu, r0, r1, res)
try:
    assemble_ntd(config, omega, n_max=4)
except NearResonanceError as exc:
    print(f"assembly refuses: {exc} (mode {exc.mode})\n")

print("conditioning of the mode-0 system around the resonant core density:")
for fac in (0.99, 0.999, 1.0, 1.001, 1.01):
    cfg = LayeredDiskConfig(
        radii=(r1, r0),
        media=(IsotropicMedium(lam, mu, res.rho1), IsotropicMedium(lam, mu, res.rho2 * fac)),
        inner="core",
    )
    cond = mode_system_condition(cfg, omega, 0)
    print(f"  rho2 * {fac:<6}  cond = {cond:10.3e}")
