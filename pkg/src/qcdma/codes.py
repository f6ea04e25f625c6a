"""Maximum-length pseudo-noise codes from Fibonacci LFSRs.

Register ``k`` (1-based) holds bit ``state[k - 1]``. Each clock emits
register ``n``, XORs the tapped registers into the feedback bit and shifts
it into register 1. Output bit ``b`` maps to chip ``1 - 2b`` (0 -> +1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

# One primitive polynomial per register count. Exponents are tap positions.
# Validated by a full-period check whenever a code is generated.
PRIMITIVE_TAPS: dict[int, tuple[int, ...]] = {
    2: (2, 1),
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 9, 7, 6),
    11: (11, 9),
    12: (12, 11, 10, 4),
    13: (13, 12, 11, 8),
    14: (14, 13, 12, 2),
    15: (15, 14),
    16: (16, 15, 13, 4),
    17: (17, 14),
    18: (18, 11),
    19: (19, 18, 17, 14),
    20: (20, 17),
}


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class LfsrSpec:
    n: int
    taps: tuple[int, ...]
    seed: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n < 2:
            raise CodeError(f"register count must be >= 2, got {self.n}")
        taps = tuple(sorted(set(int(t) for t in self.taps), reverse=True))
        if not taps or any(t < 1 or t > self.n for t in taps):
            raise CodeError(f"taps must lie in 1..{self.n}, got {self.taps}")
        if self.n not in taps:
            raise CodeError(f"tap set must include the top register {self.n}")
        object.__setattr__(self, "taps", taps)
        seed = self.seed or (1,) + (0,) * (self.n - 1)
        seed = tuple(int(b) for b in seed)
        if len(seed) != self.n or any(b not in (0, 1) for b in seed):
            raise CodeError(f"seed must be {self.n} bits, got {self.seed}")
        if not any(seed):
            raise CodeError("seed must not be all-zero")
        object.__setattr__(self, "seed", seed)

    @classmethod
    def standard(cls, n: int) -> "LfsrSpec":
        """Built-in primitive taps with the canonical seed ``[1, 0, ..., 0]``."""
        try:
            taps = PRIMITIVE_TAPS[n]
        except KeyError:
            raise CodeError(f"no built-in primitive polynomial for n={n}") from None
        return cls(n, taps)

    @property
    def length(self) -> int:
        return 2**self.n - 1


@dataclass(frozen=True, eq=False)
class Code:
    chips: np.ndarray
    shift: int = 0
    n: int = 0
    taps: tuple[int, ...] = ()

    def __post_init__(self):
        chips = np.asarray(self.chips, dtype=np.int8)
        chips.setflags(write=False)
        object.__setattr__(self, "chips", chips)

    def __len__(self) -> int:
        return len(self.chips)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Code):
            return NotImplemented
        return self.shift == other.shift and np.array_equal(self.chips, other.chips)

    def __hash__(self) -> int:
        return hash((self.shift, self.chips.tobytes()))

    @property
    def length(self) -> int:
        return len(self.chips)

    def to_text(self) -> str:
        return "".join(f"{c:+d}\n" for c in self.chips)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "taps": list(self.taps),
            "shift": self.shift,
            "chips": [int(c) for c in self.chips],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Code":
        return cls(np.array(d["chips"]), int(d["shift"]), int(d["n"]), tuple(d["taps"]))

    def save(self, path: str | Path, fmt: str = "json") -> None:
        path = Path(path)
        if fmt == "json":
            path.write_text(json.dumps(self.to_dict()) + "\n")
        elif fmt == "text":
            path.write_text(self.to_text())
        else:
            raise ValueError(f"unknown code export format {fmt!r}")


def lfsr_bits(spec: LfsrSpec, count: int) -> np.ndarray:
    """Raw output bits of the register, ``count`` clocks from the seed."""
    n = spec.n
    state = 0
    for k, b in enumerate(spec.seed):
        state |= b << k
    tap_mask = 0
    for t in spec.taps:
        tap_mask |= 1 << (t - 1)
    top = n - 1
    full = (1 << n) - 1
    out = np.empty(count, dtype=np.int8)
    for i in range(count):
        out[i] = (state >> top) & 1
        fb = (state & tap_mask).bit_count() & 1
        state = ((state << 1) | fb) & full
    return out


def lfsr_period(spec: LfsrSpec) -> int:
    """Clocks until the register first revisits its seed state."""
    state = 0
    for k, b in enumerate(spec.seed):
        state |= b << k
    start = state
    tap_mask = sum(1 << (t - 1) for t in spec.taps)
    full = (1 << spec.n) - 1
    for i in range(1, 1 << spec.n):
        fb = (state & tap_mask).bit_count() & 1
        state = ((state << 1) | fb) & full
        if state == start:
            return i
    return 1 << spec.n  # unreachable for a nonzero seed


def generate_mseq(spec: LfsrSpec) -> Code:
    period = lfsr_period(spec)
    if period != spec.length:
        raise CodeError(
            f"taps {spec.taps} are not primitive for n={spec.n}: "
            f"period {period} != {spec.length}"
        )
    bits = lfsr_bits(spec, spec.length)
    return Code(1 - 2 * bits, 0, spec.n, spec.taps)


def cyclic_shift(code: Code, i: int) -> Code:
    """Advance the sequence by ``i`` chips: ``out[k] = code[(k + i) mod S]``."""
    S = code.length
    i %= S
    return Code(np.roll(code.chips, -i), (code.shift + i) % S, code.n, code.taps)


def correlation(a: Code, b: Code) -> int:
    if a.length != b.length:
        raise CodeError(f"length mismatch: {a.length} vs {b.length}")
    return int(np.dot(a.chips.astype(np.int64), b.chips.astype(np.int64)))


def correlation_matrix(codes: Sequence[Code]) -> np.ndarray:
    chips = np.array([c.chips for c in codes], dtype=np.int64)
    return chips @ chips.T


@dataclass(frozen=True)
class CodeFamily:
    base: Code
    members: tuple[Code, ...] = field(default_factory=tuple)
    n: int = 0

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i: int) -> Code:
        return self.members[i]

    def chip_matrix(self) -> np.ndarray:
        """(count, S) array of +-1 chips, row ``p`` is user ``p``'s code."""
        return np.array([c.chips for c in self.members], dtype=np.int8)


def build_family(spec: LfsrSpec, count: int) -> CodeFamily:
    """Users ``0..count-1`` receive consecutive cyclic shifts of one m-sequence."""
    if count < 1:
        raise CodeError("family needs at least one member")
    if count > spec.length:
        raise CodeError(f"{count} users exceed the {spec.length} available shifts")
    base = generate_mseq(spec)
    members = tuple(cyclic_shift(base, i) for i in range(count))
    return CodeFamily(base, members, spec.n)
