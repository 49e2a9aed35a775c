"""Attack constructors for every compromise scenario.

An attack is a forged (probe, key-input) pair (C, J).  Constructors are
pure: they read only public parameters plus the values the compromise
scenario actually exposes.  Where the underlying analysis proves a maximum
is achieved by a specific construction, that construction is implemented;
where the success rate is distribution-free, a uniform attack is used.

Systems are numbered 1..u.  Biometric index 0 denotes the ground truth.
Keyless systems carry a public all-zero key, so their key counts as
exposed by convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf2 import (
    BitMatrix,
    BitVec,
    Gf2Solver,
    mat_vec_mul,
    residual_rank,
    solve_any,
    uniform_bitvec,
)
from .schemes import EnrollmentRecord, Scheme, SystemParams

ATTACK_TAGS = ("uninformed", "stored", "biometric+key", "substitute",
               "rank-linked", "coset-sampling")


@dataclass(frozen=True)
class CompromiseSet:
    """Exposure flags: which stored data, keys, and biometrics leaked."""

    u: int
    exposed_S: frozenset[int] = frozenset()
    exposed_K: frozenset[int] = frozenset()
    exposed_bio: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.u < 1:
            raise ValueError("need at least one system")
        for name, ids in (("exposed_S", self.exposed_S), ("exposed_K", self.exposed_K)):
            if any(not 1 <= i <= self.u for i in ids):
                raise ValueError(f"{name} contains an invalid system id")
        if any(not 0 <= i <= self.u for i in self.exposed_bio):
            raise ValueError("exposed_bio contains an invalid index")

    def fully_compromised(self, i: int) -> bool:
        return i in self.exposed_S and i in self.exposed_K

    def fully_compromised_ids(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.u + 1) if self.fully_compromised(i))

    def union(self, other: CompromiseSet) -> CompromiseSet:
        if other.u != self.u:
            raise ValueError("system counts differ")
        return CompromiseSet(self.u, self.exposed_S | other.exposed_S,
                             self.exposed_K | other.exposed_K,
                             self.exposed_bio | other.exposed_bio)


@dataclass(frozen=True)
class Attack:
    C: BitVec
    J: BitVec


@dataclass(frozen=True)
class ExposedData:
    """Everything the adversary holds: public params plus leaked values."""

    compromise: CompromiseSet
    params: tuple[SystemParams, ...]
    S: dict[int, BitVec] = field(default_factory=dict)
    K: dict[int, BitVec] = field(default_factory=dict)
    bio: dict[int, BitVec] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.params) != self.compromise.u:
            raise ValueError("parameter list does not match system count")

    def known_syndrome(self, i: int) -> BitVec:
        """H_i A_i, recoverable from a fully compromised system i."""
        S, K = self.S[i], self.K[i]
        p = self.params[i - 1]
        if p.scheme is Scheme.SECURE_SKETCH:
            return S ^ K
        return mat_vec_mul(p.code.H, S ^ K)


def expose(records: list[EnrollmentRecord], A0: BitVec, enrollments: list[BitVec],
           compromise: CompromiseSet) -> ExposedData:
    """Collect the values a given compromise scenario reveals.

    Keyless systems get their (public, all-zero) key marked exposed so that
    "fully compromised" reduces to stored-data exposure for them.
    """
    u = compromise.u
    if len(records) != u or len(enrollments) != u:
        raise ValueError("records/enrollments do not match system count")
    keyless = frozenset(i for i in range(1, u + 1) if not records[i - 1].params.keyed)
    comp = CompromiseSet(u, compromise.exposed_S, compromise.exposed_K | keyless,
                         compromise.exposed_bio)
    S = {i: records[i - 1].S for i in comp.exposed_S}
    K = {i: records[i - 1].K for i in comp.exposed_K}
    bio = {i: (A0 if i == 0 else enrollments[i - 1]) for i in comp.exposed_bio}
    return ExposedData(compromise=comp, params=tuple(r.params for r in records),
                       S=S, K=K, bio=bio)


def attack_uninformed(params: SystemParams, rng: np.random.Generator) -> Attack:
    """Uniform (C, J), independent of all system state.

    The decoding syndrome is uniform for any state-independent attack
    distribution, so uniform is as good as any.
    """
    return Attack(C=uniform_bitvec(params.n, rng), J=uniform_bitvec(params.key_len, rng))


def attack_with_stored(params: SystemParams, S: BitVec) -> Attack:
    """Force the all-zero decoding syndrome from exposed stored data.

    Keyed variants use (C, J) = (0, S).  Keyless secure sketch needs a
    probe in the stored coset; keyless fuzzy commitment replays S itself.
    Accepts deterministically with decoded weight 0.
    """
    if params.keyed:
        return Attack(C=BitVec.zeros(params.n), J=S)
    zero_key = BitVec.zeros(params.key_len)
    if params.scheme is Scheme.SECURE_SKETCH:
        return Attack(C=solve_any(params.code.H, S), J=zero_key)
    return Attack(C=S, J=zero_key)


def attack_with_biometric_and_key(params: SystemParams, rng: np.random.Generator,
                                  A: BitVec | None = None,
                                  K: BitVec | None = None) -> Attack:
    """Replay whichever of (A, K) leaked; unknown parts are uniform.

    With both factors the enrolled pair is reproduced and the attack
    accepts with weight 0; with a single factor the success rate is the
    false acceptance rate.
    """
    if A is None and K is None:
        raise ValueError("no exposed factor: use attack_uninformed")
    C = A if A is not None else uniform_bitvec(params.n, rng)
    if K is None:
        J = BitVec.zeros(params.key_len) if not params.keyed \
            else uniform_bitvec(params.key_len, rng)
    else:
        J = K
    return Attack(C=C, J=J)


def attack_substitute_enrollment(params_j: SystemParams, A_i: BitVec,
                                 K_j: BitVec | None = None,
                                 rng: np.random.Generator | None = None) -> Attack:
    """Impersonate with another enrollment measurement of the same biometric.

    (C, J) = (A_i, K_j).  When the donor channel is no noisier than the
    probe channel this succeeds at least as often as a legitimate probe.
    Without K_j the key input falls back to uniform and the rate drops to
    the false acceptance rate.
    """
    if K_j is None:
        if rng is None:
            raise ValueError("rng required when K_j is not exposed")
        K_j = uniform_bitvec(params_j.key_len, rng)
    return Attack(C=A_i, J=K_j)


def _stacked_known(view: ExposedData, ids: tuple[int, ...]) -> tuple[BitMatrix, BitVec]:
    mats = [view.params[i - 1].code.H for i in ids]
    synds = [view.known_syndrome(i) for i in ids]
    stacked = BitMatrix.stack(mats)
    bits = 0
    shift = 0
    for s in synds:
        bits |= s.bits << shift
        shift += s.n
    return stacked, BitVec(shift, bits)


def _require_target_key(view: ExposedData, j: int) -> BitVec:
    if j not in view.compromise.exposed_K:
        raise ValueError(f"target key K_{j} not exposed")
    return view.K[j]


def attack_linked_rank_dependent(view: ExposedData, j: int) -> Attack:
    """Linkage attack when H_j's row space lies inside the compromised span.

    Writes H_j = M_j [H_1; ...; H_l] row by row over the fully compromised
    systems, reconstructs the target syndrome H_j A_0 from the known
    H_i A_i values, and probes with any vector in that coset.  Succeeds
    with probability one under noiseless enrollment.
    """
    K_j = _require_target_key(view, j)
    ids = view.compromise.fully_compromised_ids()
    if j in ids:
        raise ValueError("target system must not itself be fully compromised")
    if not ids:
        raise ValueError("not rank-dependent: no fully compromised system")
    H_j = view.params[j - 1].code.H
    stacked, s_stack = _stacked_known(view, ids)
    if residual_rank([stacked], H_j) > 0:
        raise ValueError("not rank-dependent: H_j adds residual rank")
    row_solver = Gf2Solver(stacked.transpose())
    target_bits = 0
    for r in range(H_j.rows):
        coeffs = row_solver.solve(H_j.row(r))  # stacked^T y = h_r
        if (coeffs.bits & s_stack.bits).bit_count() & 1:
            target_bits |= 1 << r
    target = BitVec(H_j.rows, target_bits)
    return Attack(C=solve_any(H_j, target), J=K_j)


def attack_coset_sampling(view: ExposedData, j: int, rng: np.random.Generator) -> Attack:
    """Sample a probe uniformly from the solution set of the known constraints.

    The compromised systems pin H A_0 on their joint row space; the target
    syndrome then ranges over 2^t cosets, t the residual rank of H_j, and a
    uniform sample hits the enrolled one with probability 2^-t.  With no
    fully compromised system (or inconsistent noisy constraints) the probe
    degenerates to uniform.
    """
    K_j = _require_target_key(view, j)
    n = view.params[j - 1].n
    ids = view.compromise.fully_compromised_ids()
    if not ids:
        return Attack(C=uniform_bitvec(n, rng), J=K_j)
    stacked, s_stack = _stacked_known(view, ids)
    solver = Gf2Solver(stacked)
    if not solver.is_consistent(s_stack):
        # noisy enrollments can contradict each other; fall back to uniform
        return Attack(C=uniform_bitvec(n, rng), J=K_j)
    return Attack(C=solver.sample_solution(s_stack, rng), J=K_j)


def best_attack(view: ExposedData, j: int, rng: np.random.Generator) -> tuple[str, Attack]:
    """Strongest implemented attack available under the given exposure."""
    comp = view.compromise
    params_j = view.params[j - 1]
    if j in comp.exposed_S:
        return "stored", attack_with_stored(params_j, view.S[j])
    key_exposed = j in comp.exposed_K
    if key_exposed and j in comp.exposed_bio:
        return "biometric+key", attack_with_biometric_and_key(
            params_j, rng, A=view.bio[j], K=view.K[j])
    full_ids = tuple(i for i in comp.fully_compromised_ids() if i != j)
    if key_exposed and full_ids:
        stacked, _ = _stacked_known(view, full_ids)
        if residual_rank([stacked], params_j.code.H) == 0:
            return "rank-linked", attack_linked_rank_dependent(view, j)
    if key_exposed and comp.exposed_bio:
        # prefer the ground truth when exposed; else lowest id (the view
        # carries no channel parameters to rank donors by noise)
        donor = min(comp.exposed_bio)
        return "substitute", attack_substitute_enrollment(
            params_j, view.bio[donor], view.K[j])
    if key_exposed and full_ids:
        return "coset-sampling", attack_coset_sampling(view, j, rng)
    if key_exposed or comp.exposed_bio:
        A = view.bio[min(comp.exposed_bio)] if comp.exposed_bio else None
        K = view.K[j] if key_exposed else None
        return "biometric+key", attack_with_biometric_and_key(params_j, rng, A=A, K=K)
    return "uninformed", attack_uninformed(params_j, rng)
