"""Counter-based deterministic random stream (SplitMix64).

Randomised test families must reproduce bit-identically across runs,
platforms and reimplementations, so instead of a library RNG we fix the
classic SplitMix64 stream:

    state_{k+1} = state_k + 0x9E3779B97F4A7C15  (mod 2^64)
    z = state_{k+1}
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9    (mod 2^64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB    (mod 2^64)
    output_k = z ^ (z >> 31)

Doubles are (output >> 11) * 2^-53 in [0, 1); normals use Box-Muller on
consecutive uniforms.  A generator is identified by its integer seed.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


class CounterRNG:
    """SplitMix64 stream with convenience samplers."""

    def __init__(self, seed: int = 0):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MUL1) & _MASK
        z = ((z ^ (z >> 27)) * _MUL2) & _MASK
        return (z ^ (z >> 31)) & _MASK

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def normal(self) -> float:
        # Box-Muller; guard against log(0)
        u1 = max(self.uniform(), 2.0 ** -53)
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def complex_normal(self) -> complex:
        return complex(self.normal(), self.normal()) / math.sqrt(2.0)

    def complex_vector(self, n: int) -> np.ndarray:
        return np.array([self.complex_normal() for _ in range(n)])

    def unit_vector(self, n: int) -> np.ndarray:
        v = self.complex_vector(n)
        return v / np.linalg.norm(v)

    def complex_matrix(self, rows: int, cols: int) -> np.ndarray:
        return self.complex_vector(rows * cols).reshape(rows, cols)

    def hermitian(self, n: int) -> np.ndarray:
        g = self.complex_matrix(n, n)
        return 0.5 * (g + g.conj().T)

    def unitary(self, n: int) -> np.ndarray:
        q, r = np.linalg.qr(self.complex_matrix(n, n))
        return q * (np.diagonal(r) / np.abs(np.diagonal(r)))[None, :]
