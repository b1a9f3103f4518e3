"""Physical constants (CODATA 2018), SI units.

Kept as plain floats instead of ``scipy.constants`` because newer SciPy
releases track CODATA 2022 and the numbers here must not drift.
"""

import math

h = 6.62607015e-34  # J s (exact)
hbar = h / (2 * math.pi)
e = 1.602176634e-19  # C (exact)
k_B = 1.380649e-23  # J/K (exact)
mu_0 = 1.25663706212e-6  # N/A^2
mu_B = 9.2740100783e-24  # J/T
Phi_0 = h / (2 * e)  # Wb
phi_0 = Phi_0 / (2 * math.pi)  # reduced flux quantum, Wb

GHZ = 1e9


def ghz_to_joule(f_ghz):
    return h * f_ghz * GHZ
