#!/usr/bin/env python3
"""Transverse normal modes of a linear Coulomb crystal, written as a mode file.

Equilibrium positions are found in units of the axial length scale
l = (e^2 / (4 pi eps0 m w_z^2))^(1/3); the transverse Hessian then gives
mode frequencies and participation vectors.

    python scripts/ion_chain_modes.py -L 11 --axial-MHz 0.47 --com-MHz 4.4 out.txt
"""

import argparse

import numpy as np
from scipy.optimize import minimize

from kinkquench.couplings import KHZ, ModeSpectrum, save_mode_file


def equilibrium_positions(L):
    def energy(u):
        d = np.abs(np.subtract.outer(u, u))[np.triu_indices(L, 1)]
        return 0.5 * np.sum(u**2) + np.sum(1.0 / d)

    def grad(u):
        diff = np.subtract.outer(u, u)
        np.fill_diagonal(diff, np.inf)
        return u - np.sum(np.sign(diff) / diff**2, axis=1)

    u0 = np.linspace(-1, 1, L) * L**0.56
    res = minimize(energy, u0, jac=grad, method="BFGS", options={"gtol": 1e-12})
    return np.sort(res.x)


def transverse_modes(L, axial, com):
    """Angular frequencies (ascending) and participation matrix b[ion, mode]."""
    u = equilibrium_positions(L)
    inv3 = np.abs(np.subtract.outer(u, u))
    np.fill_diagonal(inv3, np.inf)
    inv3 = 1.0 / inv3**3
    beta = (com / axial) ** 2
    K = inv3.copy()
    np.fill_diagonal(K, beta - inv3.sum(axis=1))
    w2, b = np.linalg.eigh(K)
    b *= np.sign(b[np.argmax(np.abs(b), axis=0), np.arange(L)])
    return axial * np.sqrt(w2), b


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("output")
    ap.add_argument("-L", type=int, default=11)
    ap.add_argument("--axial-MHz", type=float, default=0.47)
    ap.add_argument("--com-MHz", type=float, default=4.4)
    args = ap.parse_args()
    nu, b = transverse_modes(args.L, args.axial_MHz * 1e3 * KHZ, args.com_MHz * 1e3 * KHZ)
    header = (f"transverse modes, L={args.L}, axial {args.axial_MHz} MHz, COM {args.com_MHz} MHz\n"
              "row 1: mode frequencies (kHz); rows 2..L+1: participation b[ion, mode]")
    save_mode_file(args.output, ModeSpectrum(nu, b), header=header)


if __name__ == "__main__":
    main()
