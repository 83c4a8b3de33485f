"""Generalized LeadingOnes instances, fitness evaluation, and counting oracles.

An instance is a pair (z, sigma): fitness of x is the length of the longest
prefix, in the significance order sigma, on which x agrees with the target
string z.  Positions are stored 0-based internally; every on-disk format and
reported position list is 1-based.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

# flip masks at least this wide take the vectorized path
_WIDE_DELTA = 48


class Ordering(IntEnum):
    """Three-way comparison outcome; the only fitness signal a strategy sees."""

    LESS = -1
    EQUAL = 0
    GREATER = 1


LESS = Ordering.LESS
EQUAL = Ordering.EQUAL
GREATER = Ordering.GREATER

# Pseudo-level that the very first query of a run is charged to.
INIT_LEVEL = -1


class BitString:
    """Immutable word-packed bit string of length n.

    Bit i of `word` is position i (0-based; position i+1 in 1-based terms).
    Treated as a value type: never mutate `word` or `n` after construction.
    """

    __slots__ = ("n", "word")

    def __init__(self, n: int, word: int = 0):
        if n < 1:
            raise ValueError(f"bit string length must be >= 1, got {n}")
        if word < 0 or word >> n:
            raise ValueError("word has bits outside the string length")
        self.n = n
        self.word = word

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(n, 0)

    @classmethod
    def ones(cls, n: int) -> "BitString":
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_bits(cls, bits) -> "BitString":
        bits = list(bits)
        word = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"bit value must be 0 or 1, got {b!r}")
            word |= b << i
        return cls(len(bits), word)

    @classmethod
    def from_str(cls, s: str) -> "BitString":
        """Parse e.g. "1101"; the first character is position 1."""
        return cls.from_bits(int(c) for c in s)

    @classmethod
    def random(cls, n: int, rng: random.Random) -> "BitString":
        return cls(n, rng.getrandbits(n))

    def bit(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"position {i} out of range for n={self.n}")
        return (self.word >> i) & 1

    def flip(self, i: int) -> "BitString":
        if not 0 <= i < self.n:
            raise IndexError(f"position {i} out of range for n={self.n}")
        return BitString(self.n, self.word ^ (1 << i))

    def flip_mask(self, mask: int) -> "BitString":
        if mask >> self.n:
            raise ValueError("flip mask has bits outside the string length")
        return BitString(self.n, self.word ^ mask)

    def count_ones(self) -> int:
        return self.word.bit_count()

    def hamming(self, other: "BitString") -> int:
        if other.n != self.n:
            raise ValueError("length mismatch")
        return (self.word ^ other.word).bit_count()

    def to01(self) -> str:
        return "".join(str((self.word >> i) & 1) for i in range(self.n))

    def bits(self) -> list[int]:
        return [(self.word >> i) & 1 for i in range(self.n)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitString)
            and other.n == self.n
            and other.word == self.word
        )

    def __hash__(self) -> int:
        return hash((self.n, self.word))

    def __repr__(self) -> str:
        return f"BitString({self.n}, {self.to01()!r})"


def validate_permutation(sigma) -> tuple[int, ...]:
    """Check that sigma is a bijection on {0, ..., n-1}; return it as a tuple."""
    sigma = tuple(sigma)
    n = len(sigma)
    if sorted(sigma) != list(range(n)):
        raise ValueError("sigma is not a permutation of 0..n-1")
    return sigma


def invert_permutation(sigma: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(sigma)
    for rank, pos in enumerate(sigma):
        inv[pos] = rank
    return tuple(inv)


@dataclass(frozen=True)
class LoInstance:
    """Target string z plus significance order sigma.

    sigma[j] (0-based) is the position whose agreement with z is checked
    j+1-th; fitness values live in [0..n].
    """

    n: int
    z: BitString
    sigma: tuple[int, ...]

    def __post_init__(self):
        if self.z.n != self.n:
            raise ValueError("target string length does not match n")
        if len(self.sigma) != self.n:
            raise ValueError("sigma length does not match n")
        validate_permutation(self.sigma)

    def rank_of(self) -> tuple[int, ...]:
        """Inverse permutation: rank_of()[pos] = significance rank of pos."""
        return invert_permutation(self.sigma)


def lo_value(inst: LoInstance, x: BitString) -> int:
    """Length of the longest common prefix of x and z in the order sigma.

    Reference implementation by direct scan; the oracle fast path must agree
    with this exactly.
    """
    if x.n != inst.n:
        raise ValueError(f"point has length {x.n}, instance has n={inst.n}")
    zw, xw = inst.z.word, x.word
    for j, pos in enumerate(inst.sigma):
        if ((zw >> pos) ^ (xw >> pos)) & 1:
            return j
    return inst.n


def random_instance(n: int, rng: random.Random) -> LoInstance:
    """Uniform instance: z uniform over {0,1}^n, sigma uniform over S_n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    z = BitString.random(n, rng)
    sigma = list(range(n))
    rng.shuffle(sigma)
    return LoInstance(n, z, tuple(sigma))


def identity_instance(n: int) -> LoInstance:
    """The all-ones target with the identity order (classic LeadingOnes)."""
    return LoInstance(n, BitString.ones(n), tuple(range(n)))


def significant_prefix(inst: LoInstance, k: int) -> list[tuple[int, int]]:
    """White-box accessor: the first k significant positions and target bits.

    Positions are reported 1-based, matching the on-disk instance format.
    Touches no oracle counter.
    """
    if not 0 <= k <= inst.n:
        raise ValueError(f"k={k} out of range [0, {inst.n}]")
    zw = inst.z.word
    return [(pos + 1, (zw >> pos) & 1) for pos in inst.sigma[:k]]


class CountingOracle:
    """Query-metered, comparison-only access to one LO instance.

    Counters:
      * query_count -- total charged queries.
      * best_fitness_seen -- best raw fitness among charged queries (None
        before the first query).
      * per_level_counts -- queries charged per best-so-far level at issue
        time; the very first query is charged to INIT_LEVEL, and the query
        that enters a new level is charged to the level being left.

    A strictly increasing `fitness_transform` may be installed; it changes
    the numeric values (visible only through the test-only leak
    `last_query_value`) but never the comparisons or the level accounting,
    which always use raw LO values.

    Owned by exactly one run at a time; concurrent runs need disjoint oracles.
    """

    def __init__(self, instance: LoInstance, fitness_transform=None,
                 record_queries: bool = False):
        self.instance = instance
        self.query_count = 0
        self.best_fitness_seen: int | None = None
        self.per_level_counts: dict[int, int] = {}
        self.optimum_found = False
        self.last_query_value = None
        self.queries: list[BitString] | None = [] if record_queries else None
        self._transform = fitness_transform
        self._rank_of = list(invert_permutation(instance.sigma))
        self._rank_arr = np.array(self._rank_of, dtype=np.int64)
        self._nbytes = (instance.n + 7) // 8
        # last materialized agreement word (usually the incumbent's)
        self._last_word: int | None = None
        self._last_norm = 0
        self._zword = instance.z.word

    # -- fitness fast path -------------------------------------------------

    def _delta_ranks(self, delta: int) -> np.ndarray:
        """Significance ranks of the positions set in delta (vectorized)."""
        raw = np.frombuffer(delta.to_bytes(self._nbytes, "little"), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little", count=self.instance.n)
        return self._rank_arr[np.nonzero(bits)[0]]

    def _translate(self, norm: int, delta: int) -> int:
        """XOR the significance-ranked image of delta into an agreement word."""
        if delta.bit_count() >= _WIDE_DELTA:
            perm = np.zeros(self.instance.n, dtype=np.uint8)
            perm[self._delta_ranks(delta)] = 1
            mask = int.from_bytes(np.packbits(perm, bitorder="little").tobytes(), "little")
            return norm ^ mask
        rank_of = self._rank_of
        base = 0
        while delta:
            chunk = delta & 0xFFFFFFFFFFFFFFFF
            while chunk:
                low = chunk & -chunk
                norm ^= 1 << rank_of[base + low.bit_length() - 1]
                chunk ^= low
            delta >>= 64
            base += 64
        return norm

    def _normalize(self, word: int) -> int:
        """Map x to its agreement word: bit j set iff x agrees with z at
        sigma[j].  Fitness is then the number of trailing ones.

        Translates from the last materialized point, so successive incumbents
        cost work proportional to the accepted flip mask only.
        """
        if word == self._last_word:
            return self._last_norm
        if self._last_word is not None:
            norm = self._translate(self._last_norm, word ^ self._last_word)
        else:
            agree = ~(word ^ self._zword)
            norm = 0
            for j, pos in enumerate(self.instance.sigma):
                norm |= ((agree >> pos) & 1) << j
        self._last_word = word
        self._last_norm = norm
        return norm

    def _fitness_of_delta(self, norm_x: int, fx: int, delta: int) -> int:
        """Fitness of y = x ^ delta, given x's agreement word and fitness.

        Avoids materializing y's agreement word: only the significance ranks
        of the flipped positions matter.
        """
        n = self.instance.n
        if delta.bit_count() >= _WIDE_DELTA:
            ranks = self._delta_ranks(delta)
            lowest = int(ranks.min())
            if lowest < fx:
                return lowest
            # all flipped ranks are >= fx here; walk them in order
            ordered = np.sort(ranks).tolist()
            idx = 0
            total = len(ordered)
            j = fx
            while j < n:
                flip = idx < total and ordered[idx] == j
                if flip:
                    idx += 1
                if not (((norm_x >> j) & 1) ^ flip):
                    return j
                j += 1
            return n
        rank_of = self._rank_of
        ranks_list: list[int] = []
        append = ranks_list.append
        base = 0
        while delta:
            chunk = delta & 0xFFFFFFFFFFFFFFFF
            while chunk:
                low = chunk & -chunk
                append(rank_of[base + low.bit_length() - 1])
                chunk ^= low
            delta >>= 64
            base += 64
        if not ranks_list:
            return fx
        lowest = min(ranks_list)
        if lowest < fx:
            return lowest
        flipped = frozenset(ranks_list)
        j = fx
        while j < n:
            bit = (norm_x >> j) & 1
            if j in flipped:
                bit ^= 1
            if not bit:
                return j
            j += 1
        return n

    def _raw_fitness(self, x: BitString) -> int:
        norm = self._normalize(x.word)
        # number of trailing ones of norm
        return ((norm + 1) & ~norm).bit_length() - 1

    def _count(self, x: BitString, f: int) -> None:
        """Charge one query with known fitness f: update all counters."""
        best = self.best_fitness_seen
        level = INIT_LEVEL if best is None else best
        counts = self.per_level_counts
        counts[level] = counts.get(level, 0) + 1
        self.query_count += 1
        if best is None or f > best:
            self.best_fitness_seen = f
        if f == self.instance.n:
            self.optimum_found = True
        self.last_query_value = f if self._transform is None else self._transform(f)
        if self.queries is not None:
            self.queries.append(x)

    def _charge(self, x: BitString) -> int:
        f = self._raw_fitness(x)
        self._count(x, f)
        return f

    # -- public API ----------------------------------------------------------

    def submit(self, x: BitString) -> int:
        """Charge one query for x and return its raw fitness.

        Runner-side API: strategies must never see this value; runners expose
        only comparisons or ranks derived from it.
        """
        if x.n != self.instance.n:
            raise ValueError(f"point has length {x.n}, instance has n={self.instance.n}")
        return self._charge(x)

    def compare(self, x: BitString, y: BitString) -> Ordering:
        """Three-way order of f(y) versus f(x), charging one query for y.

        x must be the incumbent whose fitness was already charged.  Never
        exposes a numeric fitness to the caller.
        """
        n = self.instance.n
        if x.n != n or y.n != n:
            raise ValueError("dimension mismatch in compare")
        norm_x = self._normalize(x.word)
        fx = ((norm_x + 1) & ~norm_x).bit_length() - 1
        fy = self._fitness_of_delta(norm_x, fx, x.word ^ y.word)
        self._count(y, fy)
        # The transform is strictly increasing, so the raw order is the
        # transformed order; comparing raw keeps the fast path exact.
        if fy < fx:
            return LESS
        if fy > fx:
            return GREATER
        return EQUAL


# -- instance text format ----------------------------------------------------
#
# One instance per file:
#   n=<int>
#   z=<bitstring>
#   sigma=<space-separated 1-based permutation>


def format_instance(inst: LoInstance) -> str:
    sigma_1 = " ".join(str(p + 1) for p in inst.sigma)
    return f"n={inst.n}\nz={inst.z.to01()}\nsigma={sigma_1}\n"


def parse_instance(text: str) -> LoInstance:
    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip() != ""]
    if len(lines) != 3:
        raise ValueError(f"expected 3 non-empty lines, got {len(lines)}")
    fields = {}
    for line, key in zip(lines, ("n", "z", "sigma")):
        prefix = key + "="
        if not line.startswith(prefix):
            raise ValueError(f"expected line starting with {prefix!r}, got {line!r}")
        fields[key] = line[len(prefix):].strip()
    try:
        n = int(fields["n"])
    except ValueError:
        raise ValueError(f"bad n value {fields['n']!r}") from None
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    zs = fields["z"]
    if len(zs) != n or any(c not in "01" for c in zs):
        raise ValueError(f"z must be a {n}-character bit string, got {zs!r}")
    try:
        sigma_1 = [int(tok) for tok in fields["sigma"].split()]
    except ValueError:
        raise ValueError("sigma entries must be integers") from None
    if sorted(sigma_1) != list(range(1, n + 1)):
        raise ValueError("sigma is not a 1-based permutation of 1..n")
    return LoInstance(n, BitString.from_str(zs), tuple(p - 1 for p in sigma_1))


def load_instance(path) -> LoInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())


def save_instance(inst: LoInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_instance(inst))
