"""Two-dimensional difference sets: construction, validation and I/O.

A ``(P x Q, H, gamma)`` difference set is a set of H cells of the torus
Z_P x Z_Q whose indicator has circular autocorrelation H at the origin and
gamma at every other lag.  Every constructor below returns a set that has
been checked with exact integer arithmetic.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    NonPrimitivePolynomial,
    NotADifferenceSet,
    NotCoprime,
    NotTwinPrimes,
    SearchSpaceTooLarge,
    SizeMismatch,
)
from .sequences import ExcitationGrid, cyclic_shift

# One primitive polynomial per degree; bit i is the coefficient of x^i.
PRIMITIVE_POLYNOMIALS = {
    2: 0b111,                  # x^2 + x + 1
    3: 0b1011,                 # x^3 + x + 1
    4: 0b10011,                # x^4 + x + 1
    5: 0b100101,               # x^5 + x^2 + 1
    6: 0b1000011,              # x^6 + x + 1
    7: 0b10000011,             # x^7 + x + 1
    8: 0b100011101,            # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,           # x^9 + x^4 + 1
    10: 0b10000001001,         # x^10 + x^3 + 1
    11: 0b100000000101,        # x^11 + x^2 + 1
    12: 0b1000001010011,       # x^12 + x^6 + x^4 + x + 1
    13: 0b10000000011011,      # x^13 + x^4 + x^3 + x + 1
    14: 0b100010001000011,     # x^14 + x^10 + x^6 + x + 1
    15: 0b1000000000000011,    # x^15 + x + 1
    16: 0b10001000000001011,   # x^16 + x^12 + x^3 + x + 1
}

BRUTE_FORCE_MAX_CELLS = 25


@dataclass(frozen=True)
class DsDescriptor:
    """Parameters of a difference set without the set itself."""

    P: int
    Q: int
    H: int
    gamma: int
    name: str = ""

    @property
    def N(self):
        return self.P * self.Q

    @property
    def tau(self):
        return self.H / self.N

    def counting_identity_holds(self):
        return self.H * (self.H - 1) == self.gamma * (self.N - 1)

    @property
    def descriptor(self):
        return self


@dataclass(frozen=True)
class DifferenceSet:
    P: int
    Q: int
    H: int
    gamma: int
    indices: tuple
    name: str = ""

    @property
    def N(self):
        return self.P * self.Q

    @property
    def tau(self):
        return self.H / self.N

    @property
    def descriptor(self):
        return DsDescriptor(self.P, self.Q, self.H, self.gamma, self.name)

    def grid(self):
        return to_excitations(self, 0, 0)

    def complement(self):
        full = set(itertools.product(range(self.P), range(self.Q)))
        rest = sorted(full - set(self.indices))
        return make_difference_set(self.P, self.Q, rest, name=f"complement({self.name})")

    def shifted(self, sx, sy):
        """The set translated so that its indicator equals ``to_excitations(self, sx, sy)``."""
        pts = sorted(((p - sx) % self.P, (q - sy) % self.Q) for p, q in self.indices)
        return DifferenceSet(self.P, self.Q, self.H, self.gamma, tuple(pts), self.name)


def _difference_counts(P, Q, indices):
    pts = np.asarray(indices, dtype=np.int64).reshape(-1, 2)
    dp = (pts[None, :, 0] - pts[:, None, 0]) % P
    dq = (pts[None, :, 1] - pts[:, None, 1]) % Q
    return np.bincount((dp * Q + dq).ravel(), minlength=P * Q).reshape(P, Q)


def validate(P, Q, indices):
    """Return ``(H, gamma)`` if ``indices`` is a difference set on Z_P x Z_Q.

    Raises NotADifferenceSet naming the first lag (row-major) whose
    autocorrelation departs from the common off-peak level.
    """
    pts = [(int(p), int(q)) for p, q in indices]
    if P < 1 or Q < 1 or P * Q < 2:
        raise ValueError("grid needs at least two cells")
    for p, q in pts:
        if not (0 <= p < P and 0 <= q < Q):
            raise ValueError(f"index ({p}, {q}) outside the {P}x{Q} grid")
    if len(set(pts)) != len(pts):
        raise ValueError("duplicate indices")
    H = len(pts)
    if H == 0:
        raise NotADifferenceSet("empty set")
    a = _difference_counts(P, Q, pts)
    flat = a.ravel()
    gamma = int(flat[1])
    bad = np.nonzero(flat[1:] != gamma)[0]
    if bad.size:
        idx = int(bad[0]) + 1
        s, t = divmod(idx, Q)
        raise NotADifferenceSet(
            f"autocorrelation at lag ({s}, {t}) is {int(flat[idx])}, expected {gamma}",
            offending=(s, t),
        )
    return H, gamma


def make_difference_set(P, Q, indices, name=""):
    H, gamma = validate(P, Q, indices)
    pts = tuple(sorted((int(p), int(q)) for p, q in indices))
    return DifferenceSet(P, Q, H, gamma, pts, name)


def _is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _quadratic_character(p):
    chi = np.full(p, -1, dtype=int)
    chi[0] = 0
    chi[[(x * x) % p for x in range(1, p)]] = 1
    return chi


def twin_prime(p, q):
    """Twin-prime difference set on the p x q torus (q = p + 2, both prime).

    Cells ``(x, 0)`` for every x, plus ``(x, y)`` with x, y nonzero and
    equal quadratic characters.
    """
    if q != p + 2 or not (_is_prime(p) and _is_prime(q)):
        raise NotTwinPrimes(f"({p}, {q}) is not a twin-prime pair")
    cp, cq = _quadratic_character(p), _quadratic_character(q)
    pts = [(x, 0) for x in range(p)]
    pts += [(x, y) for x in range(1, p) for y in range(1, q) if cp[x] == cq[y]]
    return make_difference_set(p, q, pts, name=f"twin-prime({p},{q})")


def lfsr_sequence(m, poly):
    """One period of the binary m-sequence for ``poly`` (bit i = coeff of x^i).

    Raises NonPrimitivePolynomial if the register period is not 2^m - 1.
    """
    if m < 2 or poly >> m != 1 or not poly & 1:
        raise NonPrimitivePolynomial(f"polynomial {poly:#x} is not a degree-{m} polynomial with constant term")
    N = (1 << m) - 1
    taps = [i for i in range(m) if (poly >> i) & 1]
    state = [0] * (m - 1) + [1]
    start = tuple(state)
    out = np.empty(N, dtype=np.int8)
    for n in range(N):
        out[n] = state[0]
        fb = 0
        for i in taps:
            fb ^= state[i]
        state = state[1:] + [fb]
        if tuple(state) == start and n < N - 1:
            raise NonPrimitivePolynomial(f"register period {n + 1} < {N} for polynomial {poly:#x}")
    if tuple(state) != start:
        raise NonPrimitivePolynomial(f"polynomial {poly:#x} does not generate a maximal sequence")
    return out


def primitive_polynomials(m):
    """All degree-m primitive polynomials over GF(2), ascending bitmask order."""
    found = []
    for poly in range((1 << m) | 1, 1 << (m + 1), 2):
        try:
            lfsr_sequence(m, poly)
        except NonPrimitivePolynomial:
            continue
        found.append(poly)
    return found


def singer_lfsr(m, poly=None):
    """Cyclic ``(2^m-1, 2^(m-1)-1, 2^(m-2)-1)`` set: zero positions of an m-sequence.

    Returned as a ``N x 1`` set; fold it with :func:`crt_fold`.
    """
    if poly is None:
        if m not in PRIMITIVE_POLYNOMIALS:
            raise ValueError(f"no default primitive polynomial for m={m}")
        poly = PRIMITIVE_POLYNOMIALS[m]
    seq = lfsr_sequence(m, poly)
    N = len(seq)
    zeros = [(int(n), 0) for n in np.nonzero(seq == 0)[0]]
    return make_difference_set(N, 1, zeros, name=f"singer(m={m},poly={poly:#x})")


def crt_fold(ds, P, Q):
    """Map a cyclic set on Z_N onto Z_P x Z_Q through n -> (n mod P, n mod Q)."""
    if ds.Q != 1:
        raise SizeMismatch("crt_fold expects a cyclic (N x 1) set")
    N = ds.P
    if P * Q != N:
        raise SizeMismatch(f"{P} x {Q} != {N}")
    if math.gcd(P, Q) != 1:
        raise NotCoprime(f"gcd({P}, {Q}) = {math.gcd(P, Q)}")
    pts = [(n % P, n % Q) for n, _ in ds.indices]
    name = f"{ds.name} folded {P}x{Q}" if ds.name else ""
    return make_difference_set(P, Q, pts, name=name)


def brute_force_search(P, Q, H, limit=None, max_cells=BRUTE_FORCE_MAX_CELLS):
    """Exhaustively enumerate difference sets with the given size, lexicographically.

    Combinations containing cell 0 are enough up to translation, but the
    search is exhaustive so that every translate is reported too.
    """
    N = P * Q
    if N < 2 or not 0 < H <= N:
        return []
    if (H * (H - 1)) % (N - 1):
        return []
    if N > max_cells:
        raise SearchSpaceTooLarge(f"{N} cells exceeds the brute-force guard of {max_cells}")
    gamma = H * (H - 1) // (N - 1)
    cells = [(p, q) for p in range(P) for q in range(Q)]
    out = []
    for combo in itertools.combinations(range(N), H):
        pts = [cells[i] for i in combo]
        a = _difference_counts(P, Q, pts).ravel()
        if np.all(a[1:] == gamma):
            out.append(DifferenceSet(P, Q, H, gamma, tuple(pts), name=f"search({P}x{Q},{H})"))
            if limit is not None and len(out) >= limit:
                break
    return out


def to_excitations(ds, sx=0, sy=0):
    """Binary grid with 1 at (p, q) iff ((p+sx) mod P, (q+sy) mod Q) is in the set."""
    base = ExcitationGrid.from_indices(ds.P, ds.Q, ds.indices)
    return cyclic_shift(base, sx, sy)


def save(ds, path):
    lines = [f"{ds.P} {ds.Q} {ds.H} {ds.gamma}"]
    lines += [f"{p} {q}" for p, q in sorted(ds.indices)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def loads(text, name=""):
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([int(tok) for tok in line.split()])
    if not rows or len(rows[0]) != 4:
        raise ValueError("difference-set file must start with 'P Q H gamma'")
    P, Q, H, gamma = rows[0]
    pts = rows[1:]
    if any(len(r) != 2 for r in pts):
        raise ValueError("index lines must hold exactly two integers")
    if len(pts) != H:
        raise NotADifferenceSet(f"header declares H={H} but {len(pts)} indices follow")
    ds = make_difference_set(P, Q, [tuple(r) for r in pts], name=name)
    if ds.gamma != gamma:
        raise NotADifferenceSet(f"header declares gamma={gamma}, measured {ds.gamma}")
    return ds


def load(path):
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), name=path.stem)
