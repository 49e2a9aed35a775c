"""Ground-truth biometric sampling and the BSC measurement model.

A user's underlying biometric is an i.i.d. Bernoulli(0.5) vector A0.
Every enrollment and probe measurement is A0 passed through an
independent binary symmetric channel.  Systems are numbered 1..u;
biometric index 0 refers to the ground truth itself (noise 0 by
convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2 import BitVec, uniform_bitvec


def _check_noise(p: float, allow_half: bool = False) -> None:
    hi_ok = p <= 0.5 if allow_half else p < 0.5
    if not (0.0 <= p and hi_ok):
        limit = "[0, 0.5]" if allow_half else "[0, 0.5)"
        raise ValueError(f"crossover probability must be in {limit}, got {p}")


@dataclass(frozen=True)
class BiometricWorld:
    """One user's ground truth plus per-system channel parameters."""

    n: int
    A0: BitVec
    enroll_noise: tuple[float, ...]
    probe_noise: tuple[float, ...]

    def __post_init__(self):
        if self.A0.n != self.n:
            raise ValueError("ground truth length does not match n")
        if len(self.enroll_noise) != len(self.probe_noise):
            raise ValueError("need one enrollment and one probe noise per system")
        if not self.enroll_noise:
            raise ValueError("need at least one system")
        for p in self.enroll_noise + self.probe_noise:
            _check_noise(p)

    @property
    def u(self) -> int:
        return len(self.enroll_noise)

    def enroll_p(self, i: int) -> float:
        """Enrollment crossover for system i (1-based); index 0 is the ground truth."""
        if i == 0:
            return 0.0
        return self.enroll_noise[i - 1]


def sample_ground_truth(n: int, rng: np.random.Generator) -> BitVec:
    """Length-n i.i.d. Bernoulli(0.5) ground-truth vector."""
    return uniform_bitvec(n, rng)


def sample_world(n: int, enroll_noise, probe_noise, rng: np.random.Generator) -> BiometricWorld:
    return BiometricWorld(n=n, A0=sample_ground_truth(n, rng),
                          enroll_noise=tuple(enroll_noise), probe_noise=tuple(probe_noise))


def bsc_apply(x: BitVec, p: float, rng: np.random.Generator) -> BitVec:
    """Flip each bit of x independently with probability p (p < 0.5)."""
    _check_noise(p)
    if p == 0.0:
        return x
    flips = BitVec.from_numpy(rng.random(x.n) < p)
    return x ^ flips


def composite_crossover(p1: float, alpha: float) -> float:
    """Crossover of two cascaded BSCs: p1 (1 - alpha) + (1 - p1) alpha."""
    _check_noise(p1, allow_half=True)
    _check_noise(alpha, allow_half=True)
    return p1 * (1.0 - alpha) + (1.0 - p1) * alpha


def sample_enrollments(world: BiometricWorld, rng: np.random.Generator) -> list[BitVec]:
    """Per-system enrollment measurements A_i = BSC_{p_i}(A0), independent noise."""
    return [bsc_apply(world.A0, p, rng) for p in world.enroll_noise]


def sample_probe(world: BiometricWorld, j: int, rng: np.random.Generator) -> BitVec:
    """A probe measurement for system j (1-based): BSC_{alpha_j}(A0)."""
    if not 1 <= j <= world.u:
        raise ValueError(f"system index out of range: {j}")
    return bsc_apply(world.A0, world.probe_noise[j - 1], rng)
