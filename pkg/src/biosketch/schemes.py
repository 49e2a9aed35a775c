"""Fuzzy-commitment and secure-sketch systems, keyless or two-factor.

Enrollment stores
    fuzzy commitment:  S = A xor G^T Z xor K   (n bits; K is n bits)
    secure sketch:     S = H A xor K           (m bits; K is m bits)

Authentication recovers a decoding syndrome from (D, L, S), decodes the
minimum-weight coset leader W, and accepts iff weight(W) <= floor(tau n).
Keyless variants carry an explicit all-zero K so that a single code path
serves both; an attacker-visible record contains S alone.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass

import numpy as np

from .codes import CosetLeaderTable, LinearCode
from .gf2 import BitVec, mat_vec_mul, uniform_bitvec


class Scheme(enum.Enum):
    FUZZY_COMMITMENT = "FC"
    SECURE_SKETCH = "SS"


def accept_threshold(tau: float, n: int) -> int:
    """floor(tau n); the epsilon guards against float artifacts like 0.3*10."""
    return int(math.floor(tau * n + 1e-9))


@dataclass(frozen=True)
class SystemParams:
    """Public parameters of one access-control device."""

    scheme: Scheme
    keyed: bool
    tau: float
    code: LinearCode

    def __post_init__(self):
        if not 0.0 < self.tau < 0.5:
            raise ValueError(f"tau must be in (0, 0.5), got {self.tau}")

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def m(self) -> int:
        return self.code.m

    @property
    def key_len(self) -> int:
        """Key length convention: n bits for FC, m bits for SS."""
        return self.code.n if self.scheme is Scheme.FUZZY_COMMITMENT else self.code.m

    @property
    def threshold(self) -> int:
        return accept_threshold(self.tau, self.code.n)


@dataclass(frozen=True)
class EnrollmentRecord:
    """Full state of one enrollment; only S is attacker-visible storage."""

    params: SystemParams
    S: BitVec
    K: BitVec
    Z: BitVec | None = None  # FC codeword selector, kept for white-box tests only

    def __post_init__(self):
        p = self.params
        s_len = p.n if p.scheme is Scheme.FUZZY_COMMITMENT else p.m
        if self.S.n != s_len:
            raise ValueError("stored data has wrong length")
        if self.K.n != p.key_len:
            raise ValueError("key has wrong length")
        if not p.keyed and self.K.bits != 0:
            raise ValueError("keyless record must carry the all-zero key")


@dataclass(frozen=True)
class AuthDecision:
    accepted: bool
    weight: int
    syndrome_used: BitVec


def enroll(params: SystemParams, A: BitVec, rng: np.random.Generator,
           z: BitVec | None = None) -> EnrollmentRecord:
    """Enroll biometric A; K (if keyed) and the FC codeword selector Z are uniform.

    ``z`` lets tests pin the fuzzy-commitment selector; leave it None in
    normal operation.
    """
    code = params.code
    if A.n != code.n:
        raise ValueError(f"length mismatch: biometric has {A.n} bits, code n={code.n}")
    K = uniform_bitvec(params.key_len, rng) if params.keyed else BitVec.zeros(params.key_len)
    if params.scheme is Scheme.FUZZY_COMMITMENT:
        if z is None:
            z = uniform_bitvec(code.k, rng)
        elif z.n != code.k:
            raise ValueError("z must have k bits")
        codeword = mat_vec_mul(code.G.transpose(), z)
        S = A ^ codeword ^ K
        return EnrollmentRecord(params=params, S=S, K=K, Z=z)
    if z is not None:
        raise ValueError("z is meaningful only for fuzzy commitment")
    S = mat_vec_mul(code.H, A) ^ K
    return EnrollmentRecord(params=params, S=S, K=K)


def decoding_syndrome(record: EnrollmentRecord, D: BitVec, L: BitVec | None = None) -> BitVec:
    """The syndrome handed to the decoder.

    Secure sketch: H D xor L xor S.  Fuzzy commitment: H (D xor L xor S).
    For the legitimate input (D = B, L = K) both reduce to H (A xor B).
    ``L = None`` stands for the all-zero key input.
    """
    params = record.params
    if D.n != params.n:
        raise ValueError(f"length mismatch: probe has {D.n} bits, expected {params.n}")
    if L is None:
        L = BitVec.zeros(params.key_len)
    elif L.n != params.key_len:
        raise ValueError(f"length mismatch: key input has {L.n} bits, expected {params.key_len}")
    H = params.code.H
    if params.scheme is Scheme.FUZZY_COMMITMENT:
        return mat_vec_mul(H, D ^ L ^ record.S)
    return mat_vec_mul(H, D) ^ L ^ record.S


def authenticate(record: EnrollmentRecord, D: BitVec, L: BitVec | None,
                 table: CosetLeaderTable) -> AuthDecision:
    """Threshold test on the decoded minimum coset weight."""
    q = decoding_syndrome(record, D, L)
    w = table.weight(q)
    return AuthDecision(accepted=w <= record.params.threshold, weight=w, syndrome_used=q)


def storage_bits(record: EnrollmentRecord) -> int:
    """Stored-data size: n for fuzzy commitment, m for secure sketch."""
    return record.S.n


def key_bits(record: EnrollmentRecord) -> int:
    """Key size: matches the storage size when keyed, 0 when keyless."""
    return record.K.n if record.params.keyed else 0


_SCHEME_BYTE = {Scheme.FUZZY_COMMITMENT: 1, Scheme.SECURE_SKETCH: 2}
_BYTE_SCHEME = {v: k for k, v in _SCHEME_BYTE.items()}
_HEADER = struct.Struct("<BBII")  # scheme, keyed, n, m


@dataclass(frozen=True)
class StoredRecord:
    """The attacker-visible part of an enrollment, as parsed from disk."""

    scheme: Scheme
    keyed: bool
    n: int
    m: int
    S: BitVec


def serialize_stored(record: EnrollmentRecord) -> bytes:
    """Binary layout: scheme(1) keyed(1) n(4 LE) m(4 LE), then S packed LSB-first.

    K models the user's smart card and is never serialized with S.
    """
    p = record.params
    header = _HEADER.pack(_SCHEME_BYTE[p.scheme], int(p.keyed), p.n, p.m)
    return header + record.S.to_bytes()


def parse_stored(data: bytes) -> StoredRecord:
    if len(data) < _HEADER.size:
        raise ValueError("truncated record header")
    scheme_b, keyed_b, n, m = _HEADER.unpack_from(data)
    if scheme_b not in _BYTE_SCHEME:
        raise ValueError(f"unknown scheme byte: {scheme_b}")
    if keyed_b not in (0, 1):
        raise ValueError(f"bad keyed byte: {keyed_b}")
    scheme = _BYTE_SCHEME[scheme_b]
    s_len = n if scheme is Scheme.FUZZY_COMMITMENT else m
    body = data[_HEADER.size:]
    if len(body) != (s_len + 7) // 8:
        raise ValueError("stored data length does not match header")
    return StoredRecord(scheme=scheme, keyed=bool(keyed_b), n=n, m=m,
                        S=BitVec.from_bytes(body, s_len))
