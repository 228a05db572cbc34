"""Unit system and physical constants.

Every public quantity in this package carries the same units: energies in
microelectronvolts (ueV), magnetic fields in milliteslas (mT), and times in
nanoseconds (ns).
"""

MU_B = 0.05788381806
"""Bohr magneton, ueV/mT."""

HBAR = 0.6582119569
"""Reduced Planck constant, ueV*ns."""
