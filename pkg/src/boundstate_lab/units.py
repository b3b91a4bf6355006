"""Hartree atomic units and the SI conversions used in reports."""

FINE_STRUCTURE = 1.0 / 137.035999
SPEED_OF_LIGHT = 1.0 / FINE_STRUCTURE  # c in atomic units

TIME_AU_S = 2.4188843265857e-17  # one atomic unit of time in seconds
HARTREE_EV = 27.211386245988
BOHR_M = 5.29177210903e-11
PROTON_MASS_AU = 1836.15267343  # proton mass in electron masses


def rate_to_per_second(rate_au):
    return rate_au / TIME_AU_S


def hartree_to_ev(energy):
    return energy * HARTREE_EV


def area_au_to_m2(sigma):
    return sigma * BOHR_M**2
