"""Physical constants (SI, CODATA values from scipy.constants).

The permittivity is derived from mu_0 and the exact speed of light so that
c**2 * EPSILON_0 * MU_0 == 1 to rounding; closed-form expressions written
with mu_0 only then agree with their epsilon_0 forms to machine precision.
"""

from scipy import constants as _sc

C = _sc.c
MU_0 = _sc.mu_0
EPSILON_0 = 1.0 / (MU_0 * C**2)
Z_0 = MU_0 * C

__all__ = ["C", "MU_0", "EPSILON_0", "Z_0"]
