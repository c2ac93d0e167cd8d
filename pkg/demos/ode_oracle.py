"""Integrate the model ODE at small eps and read off the exponentials it carries.

Starting from the optimally truncated series in the lower half-plane, the
residual y - (truncated series) stays at the cancellation floor until the
path crosses the B>1 Stokes line, where exp(-z^2/(2 eps)) appears.  Far to
the right its rate switches to that of exp(-(z - 1/2)/eps).

Run: python3 demos/ode_oracle.py   (about 5 s)
"""
from hosplab import odeoracle as oo
from hosplab.recurrences import model_base_coefficients
from hosplab.singulants import model_case

eps = 0.05
case = model_case()
table = model_base_coefficients(320)
pts = (oo.MODEL_SEED_POINT, -1 - 0.5j, -1 + 0.5j, -0.5 + 0.5j, 1 + 0.5j, 2 + 0.5j)
seed = oo.seed_from_base_series(pts[0], eps, case, table)
run = oo.integrate_path(oo.OdePath(pts, eps, seed.values, "asymptotic_seed",
                                   singular_points=case.singular_points),
                        case, 1e-32, sample_spacing=0.05)
print("      z            log10|residual|  present  fitted rate")
for e in oo.extract_exponential(run, case, table)[::4]:
    rate = "" if e.fitted_rate is None else f"{e.fitted_rate:.3f}"
    print(f"{e.z:18.2f}   {e.residual.log_magnitude / 2.302585:10.2f}      {e.present!s:5}   {rate}")
