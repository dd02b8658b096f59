"""Frozen physical constants (CODATA 2018, SI units)."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    bohr_magneton: float = 9.2740100783e-24  # J/T
    boltzmann: float = 1.380649e-23  # J/K


CONSTANTS = PhysicalConstants()

BOHR_MAGNETON = CONSTANTS.bohr_magneton
BOLTZMANN = CONSTANTS.boltzmann

MHZ = 1e6
US = 1e-6
NS = 1e-9
