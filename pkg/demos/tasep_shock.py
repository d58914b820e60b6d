"""
A TASEP shock and its Gaussian height fluctuations
==================================================

With density 0.2 on the left and 0.6 on the right the particles pile up into
a shock travelling at speed 1 - rho_- - rho_+ = 0.2.  Left of the shock the
height fluctuations are Gaussian on the T^(1/2) scale, inherited from the
random initial data.

The heights come from the last-passage representation, which gives the exact
law of h_T(j) without simulating the whole line.
"""

from kpzlab import tasep
from kpzlab.sampling import generate_bernoulli_profile

rm, rp = 0.2, 0.6
print("shock speed:", tasep.shock_position(rm, rp))

# %%
# One trajectory, a few snapshots of the height profile against t * h_ma(j / t)
t_max = 60.0
window = tasep.shielded_window((-40, 40), t_max)
traj = tasep.simulate_event_driven(generate_bernoulli_profile(rm, rp, window, 3), t_max, window, 4)
for t in (20.0, 40.0, 60.0):
    row = [(j, traj.height(t, j), t * tasep.h_ma(j / t, rm, rp)) for j in range(-30, 31, 10)]
    print(f"t={t:4.0f} " + "  ".join(f"{j:+d}:{h:3d}/{m:5.1f}" for j, h, m in row))

# %%
# Variance left of the shock at xi = 0.1, against 4 rho(1 - rho)(1 - 2 rho - xi) T
T, xi, n = 400, 0.1, 2000
j = int(round(xi * T))
h = tasep.lpp_height_samples(rm, rp, T, j, n, master_seed=7)
target = 4 * rm * (1 - rm) * (1 - 2 * rm - xi) * T
print(f"Var h_T({j}) = {h.var(ddof=1):.1f}   prediction {target:.1f}")
print(f"mean h_T({j}) = {h.mean():.1f}   T h_ma = {T * tasep.h_ma(xi, rm, rp):.1f}")
