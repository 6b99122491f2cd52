"""Exact evaluation of implicitly defined partition norms.

The norm computed here is the unique fixed point of

    N(x) = max( sup-norm(x),
                max over n >= n0 and successive sets E_1 < ... < E_n
                    of (1/w(n)) * sum_i N(E_i x) )

for a weight system ``w`` (strictly increasing, > 1).  The built-in
``F_SYSTEM`` uses w(n) = log2(n+1) with minimum part count 2; the
companion ``G_SYSTEM`` uses w(n) = log2(1 + n/2) with minimum part
count 3.

The supremum over arbitrary successive sets reduces to ordered interval
partitions of the support: the norm only reads absolute values, so
enlarging a set to its hull cannot decrease any part's norm.  The
engine exploits this with a dynamic program over the tables

    N[i, j]     norm of the restriction to support positions i..j
    S[i, n, j]  best sum of part norms over partitions of i..j into
                exactly n contiguous position runs,

with S[i, n, j] = max over m of N[i, m] + S[m+1, n-1, j].  The set-level
supremum is kept alive independently in ``brute_norm``, which enumerates
all gapped successive-set families on small supports; the acceptance
suite checks the two routes agree.

Determinism: candidates are scanned in a fixed order (sup-norm branch
first, then ascending part count, then earliest split points) and a new
candidate replaces the incumbent only when strictly larger, so values,
witnesses and functionals are reproducible bit for bit.
"""

from __future__ import annotations

import hashlib
import math
import pickle
import struct
import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .vectors import FinVector, Functional, WitnessTree

ENGINE_VERSION = "implicitnorm-engine-1"

DEFAULT_TOLERANCE = 1e-9
DEFAULT_SUPPORT_GUARD = 4096
# Full interval DP needs an O(L^3) table; refuse sizes whose tables
# would not fit rather than letting numpy die trying.
DP_MEMORY_LIMIT_BYTES = 1 << 30
# Bitwise-constant vectors larger than this route through the
# length-composition fast path instead of the full DP.
CONSTANT_ROUTE_MIN = 65
BRUTE_SUPPORT_CAP = 8


class SupportGuardError(RuntimeError):
    """Vector size exceeds a configured or feasible resource guard."""


class DomainError(ValueError):
    """Operation called outside its mathematical domain."""


class EngineCheckError(RuntimeError):
    """An internal cross-check failed beyond tolerance."""


# ---------------------------------------------------------------------------
# Weight systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormSystem:
    """A weight function w on part counts n >= min_parts, w(n) > 1 increasing.

    The (name, min_parts) pair identifies the system in memo caches, so
    distinct custom weight functions need distinct names.
    """

    name: str
    min_parts: int
    weight_fn: Callable[[int], float]
    _weights: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.min_parts < 2:
            raise DomainError("minimum part count must be at least 2")
        w0 = self.weight_fn(self.min_parts)
        if not w0 > 1.0:
            raise DomainError(f"weight({self.min_parts}) = {w0} must exceed 1")
        if not self.weight_fn(self.min_parts + 1) > w0:
            raise DomainError("weight function must be strictly increasing")

    def weight(self, n: int) -> float:
        w = self._weights.get(n)
        if w is None:
            w = float(self.weight_fn(n))
            self._weights[n] = w
        return w

    @property
    def cache_key(self) -> tuple[str, int]:
        return (self.name, self.min_parts)


def _f_weight(n: int) -> float:
    return math.log2(n + 1)


def _g_weight(n: int) -> float:
    return math.log2(1 + n / 2)


F_SYSTEM = NormSystem("f", 2, _f_weight)
G_SYSTEM = NormSystem("g", 3, _g_weight)


def log2_affine_system(name: str, min_parts: int, add: float, scale: float) -> NormSystem:
    """Custom system with w(n) = log2(add + scale * n)."""
    def w(n: int) -> float:
        return math.log2(add + scale * n)
    return NormSystem(name, min_parts, w)


def get_system(name: str) -> NormSystem:
    lowered = name.lower()
    if lowered == "f":
        return F_SYSTEM
    if lowered == "g":
        return G_SYSTEM
    raise DomainError(f"unknown weight system {name!r}")


# ---------------------------------------------------------------------------
# Memo table (content-addressed cache for norm values)
# ---------------------------------------------------------------------------

def vector_digest(values: tuple[float, ...]) -> str:
    return hashlib.sha256(struct.pack(f"<{len(values)}d", *values)).hexdigest()


class MemoTable:
    """Cache of computed norm values keyed by (system, canonical sub-vector).

    The canonical form is the tuple of absolute coefficients in support
    order: the norm is invariant under sign flips and spreadings by
    construction, so this is the finest key that still deduplicates.
    Cached values are exactly the values the engine computes, so lookups
    never change results.
    """

    def __init__(self):
        self._data: dict = {}
        self._lock = threading.Lock()

    def get(self, system: NormSystem, canon: tuple[float, ...]) -> Optional[float]:
        with self._lock:
            return self._data.get((system.cache_key, canon))

    def put(self, system: NormSystem, canon: tuple[float, ...], value: float) -> None:
        with self._lock:
            self._data[(system.cache_key, canon)] = value

    def __len__(self) -> int:
        return len(self._data)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()

    # -- persistence ---------------------------------------------------------

    def save(self, path: str) -> None:
        with self._lock:
            payload = {"version": ENGINE_VERSION,
                       "entries": {(sk, vector_digest(canon)): val
                                   for (sk, canon), val in self._data.items()}}
        with open(path, "wb") as fh:
            pickle.dump(payload, fh)
        self._persisted = payload["entries"]

    @staticmethod
    def load(path: str) -> "MemoTable":
        table = MemoTable()
        try:
            with open(path, "rb") as fh:
                payload = pickle.load(fh)
            if payload.get("version") != ENGINE_VERSION:
                warnings.warn("memo cache from a different engine version; rebuilding")
                return table
            table._persisted = payload.get("entries", {})
        except FileNotFoundError:
            pass
        except Exception:
            warnings.warn("memo cache unreadable; rebuilding")
        return table

    def lookup_digest(self, system: NormSystem, canon: tuple[float, ...]) -> Optional[float]:
        persisted = getattr(self, "_persisted", None)
        if persisted is None:
            return None
        return persisted.get((system.cache_key, vector_digest(canon)))


GLOBAL_MEMO = MemoTable()


# ---------------------------------------------------------------------------
# Interval-partition dynamic program
# ---------------------------------------------------------------------------

@dataclass
class IntervalTables:
    """DP tables for one vector under one system; positions index the support."""

    system: NormSystem
    indices: tuple[int, ...]
    signed: np.ndarray
    vabs: np.ndarray
    N: np.ndarray          # N[i, j]
    S: np.ndarray          # S[i, n, j], n >= 1
    kind: np.ndarray       # 0 = sup-norm leaf, else winning part count

    @property
    def size(self) -> int:
        return len(self.indices)

    def value(self) -> float:
        return float(self.N[0, self.size - 1])

    def best_sum(self, k: int) -> float:
        L = self.size
        top = min(k, L)
        return float(max(self.S[0, n, L - 1] for n in range(1, top + 1)))

    def layer_value(self, ell: int) -> float:
        return self.best_sum(ell) / self.system.weight(ell)


def build_tables(x: FinVector, system: NormSystem = F_SYSTEM, *,
                 guard: int = DEFAULT_SUPPORT_GUARD) -> IntervalTables:
    L = x.support_size()
    if L == 0:
        raise DomainError("zero vector has no DP tables")
    if L > guard:
        raise SupportGuardError(f"support size {L} exceeds guard {guard}")
    need = 8 * (L + 1) * L * L + 16 * L * L
    if need > DP_MEMORY_LIMIT_BYTES:
        raise SupportGuardError(
            f"support size {L} needs ~{need >> 20} MiB of DP tables "
            f"(limit {DP_MEMORY_LIMIT_BYTES >> 20} MiB)")

    signed = np.array(x.values, dtype=float)
    v = np.abs(signed)
    l0 = system.min_parts
    W = system.weight

    N = np.full((L, L), -np.inf)
    S = np.full((L, L + 1, L), -np.inf)
    kind = np.zeros((L, L), dtype=np.int64)

    for j in range(L):
        for i in range(j, -1, -1):
            ln = j - i + 1
            if ln == 1:
                N[i, j] = v[i]
                S[i, 1, j] = v[i]
                continue
            for n in range(2, ln + 1):
                hi = j - n + 1  # last admissible end of the first part
                a = N[i, i:hi + 1]
                b = S[i + 1:hi + 2, n - 1, j]
                S[i, n, j] = np.max(a + b)
            seg = v[i:j + 1]
            best = float(np.max(seg))
            l1v = float(np.sum(seg))
            chosen = 0
            for n in range(2, ln + 1):
                nn = n if n >= l0 else l0
                w = W(nn)
                if l1v / w < best:
                    break  # upper bound below incumbent for this and all larger n
                val = S[i, n, j] / w
                if val > best:
                    best = val
                    chosen = n
            N[i, j] = best
            S[i, 1, j] = best
            kind[i, j] = chosen

    return IntervalTables(system, x.indices, signed, v, N, S, kind)


def _witness_from_tables(t: IntervalTables, i: int, j: int) -> WitnessTree:
    if i == j or t.kind[i, j] == 0:
        pos = i + int(np.argmax(t.vabs[i:j + 1]))
        return WitnessTree.leaf(t.indices[pos])
    n = int(t.kind[i, j])
    nn = max(n, t.system.min_parts)
    children = []
    cur, rem = i, n
    while rem > 1:
        hi = j - rem + 1
        arr = t.N[cur, cur:hi + 1] + t.S[cur + 1:hi + 2, rem - 1, j]
        m = cur + int(np.argmax(arr))
        children.append(_witness_from_tables(t, cur, m))
        cur, rem = m + 1, rem - 1
    children.append(_witness_from_tables(t, cur, j))
    return WitnessTree.split(nn, t.system.weight(nn), children)


# ---------------------------------------------------------------------------
# Constant-coefficient fast path (length-composition DP)
# ---------------------------------------------------------------------------

class _ConstTables:
    """Norm data for unit constant vectors, shared across lengths.

    By spreading invariance the norm of a constant-coefficient vector
    depends only on its length, so one growing table per system serves
    every request:

        nu[len]    norm of the unit constant vector of that length
        T[n, len]  best sum of piece norms over compositions of len
                   into exactly n parts.
    """

    def __init__(self, system: NormSystem):
        self.system = system
        self.filled = 1
        self.nu = np.zeros(2)
        self.nu[1] = 1.0
        self.T = np.full((2, 2), -np.inf)
        self.T[1, 1] = 1.0
        self._lock = threading.RLock()

    def _grow(self, L: int) -> None:
        cap = self.T.shape[0] - 1
        if L <= cap:
            return
        new_cap = max(L, 2 * cap)
        T = np.full((new_cap + 1, new_cap + 1), -np.inf)
        T[: cap + 1, : cap + 1] = self.T
        nu = np.zeros(new_cap + 1)
        nu[: cap + 1] = self.nu
        self.T, self.nu = T, nu

    def ensure(self, L: int) -> None:
        with self._lock:
            if L <= self.filled:
                return
            self._grow(L)
            nu, T = self.nu, self.T
            l0 = self.system.min_parts
            W = self.system.weight
            for ln in range(self.filled + 1, L + 1):
                for n in range(2, ln + 1):
                    a = nu[1:ln - n + 2]
                    b = T[n - 1, ln - 1:n - 2:-1]
                    T[n, ln] = np.max(a + b)
                best = 1.0
                chosen_l1 = float(ln)
                for n in range(2, ln + 1):
                    nn = n if n >= l0 else l0
                    w = W(nn)
                    if chosen_l1 / w < best:
                        break
                    val = T[n, ln] / w
                    if val > best:
                        best = val
                nu[ln] = best
                T[1, ln] = best
            self.filled = L

    def norm_unit(self, L: int) -> float:
        self.ensure(L)
        return float(self.nu[L])

    def best_sum_unit(self, L: int, k: int) -> float:
        self.ensure(L)
        top = min(k, L)
        return float(np.max(self.T[1:top + 1, L]))

    def layer_sums(self, L: int) -> np.ndarray:
        """Running max of the partition sums: entry k (1-based) is the
        best sum over at most k parts for the unit constant vector."""
        self.ensure(L)
        return np.maximum.accumulate(self.T[1:L + 1, L])

    def witness(self, indices: tuple[int, ...]) -> WitnessTree:
        L = len(indices)
        self.ensure(L)
        return self._node(indices, 0, L)

    def _node(self, indices: tuple[int, ...], offset: int, ln: int) -> WitnessTree:
        if ln == 1:
            return WitnessTree.leaf(indices[offset])
        nu, T = self.nu, self.T
        l0 = self.system.min_parts
        chosen = 0
        for n in range(2, ln + 1):
            nn = max(n, l0)
            if T[n, ln] / self.system.weight(nn) == nu[ln] and nu[ln] > 1.0:
                chosen = n
                break
        if chosen == 0:
            return WitnessTree.leaf(indices[offset])
        children = []
        cur, rem = offset, chosen
        length = ln
        while rem > 1:
            arr = nu[1:length - rem + 2] + T[rem - 1, length - 1:rem - 2:-1]
            m = 1 + int(np.argmax(arr))
            children.append(self._node(indices, cur, m))
            cur += m
            length -= m
            rem -= 1
        children.append(self._node(indices, cur, length))
        nn = max(chosen, l0)
        return WitnessTree.split(nn, self.system.weight(nn), children)


_CONST_TABLES: dict[tuple[str, int], _ConstTables] = {}
_CONST_LOCK = threading.Lock()


def _const_tables(system: NormSystem) -> _ConstTables:
    with _CONST_LOCK:
        tab = _CONST_TABLES.get(system.cache_key)
        if tab is None:
            tab = _ConstTables(system)
            _CONST_TABLES[system.cache_key] = tab
        return tab


def _const_guard(L: int, guard: int) -> None:
    if L > guard:
        raise SupportGuardError(f"constant length {L} exceeds guard {guard}")
    need = 8 * (L + 1) * (L + 1)
    if need > DP_MEMORY_LIMIT_BYTES:
        raise SupportGuardError(
            f"constant length {L} needs ~{need >> 20} MiB of composition tables")


def constant_vector_norm(system: NormSystem, length: int, coefficient: float, *,
                         guard: int = DEFAULT_SUPPORT_GUARD) -> float:
    """Norm of coefficient * (e_1 + ... + e_length) via the composition DP."""
    if length < 1:
        raise DomainError("length must be >= 1")
    _const_guard(length, guard)
    return abs(coefficient) * _const_tables(system).norm_unit(length)


def constant_best_sum(system: NormSystem, length: int, coefficient: float, k: int, *,
                      guard: int = DEFAULT_SUPPORT_GUARD) -> float:
    """Best partition sum (at most k parts) for a constant vector."""
    if length < 1 or k < 1:
        raise DomainError("length and k must be >= 1")
    _const_guard(length, guard)
    return abs(coefficient) * _const_tables(system).best_sum_unit(length, k)


def _is_bitwise_constant(vabs: tuple[float, ...]) -> bool:
    first = vabs[0]
    return all(v == first for v in vabs)


# ---------------------------------------------------------------------------
# Public norm operations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormResult:
    value: float
    witness: Optional[WitnessTree]
    character: Optional[float]      # int-valued float, math.inf, or None for 0
    character_tie: bool
    system: str

    def to_jsonable(self, *, include_witness: bool = True) -> dict:
        out: dict = {"value": self.value, "system": self.system}
        if self.character is not None:
            out["character"] = ("inf" if math.isinf(self.character)
                                else int(self.character))
            out["character_tie"] = self.character_tie
        if include_witness and self.witness is not None:
            out["witness"] = self.witness.to_jsonable()
        return out


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _character_scan(value: float, linf: float, layer_at: Callable[[int], float],
                    lo: int, hi: int, tol: float) -> tuple[float, bool]:
    attained = None
    for ell in range(lo, hi + 1):
        if _close(value, layer_at(ell), tol):
            attained = ell
            break
    linf_hit = _close(value, linf, tol)
    if attained is not None:
        return float(attained), linf_hit
    return math.inf, False


def norm(x: FinVector, system: NormSystem = F_SYSTEM, *,
         guard: int = DEFAULT_SUPPORT_GUARD,
         tol: float = DEFAULT_TOLERANCE,
         memo: Optional[MemoTable] = GLOBAL_MEMO) -> NormResult:
    """Full norm evaluation: value, witness tree, and character.

    The character is the smallest layer ell with norm == layer norm at
    ell (within tolerance); infinity when only the sup norm attains it.
    When both a finite layer and the sup norm attain the value, the
    finite layer is reported and the tie flagged.
    """
    L = x.support_size()
    if L == 0:
        return NormResult(0.0, None, None, False, system.name)
    if L > guard:
        raise SupportGuardError(f"support size {L} exceeds guard {guard}")

    vabs = tuple(abs(v) for v in x.values)
    lo_char = max(2, system.min_parts)

    if L >= CONSTANT_ROUTE_MIN and _is_bitwise_constant(vabs):
        tab = _const_tables(system)
        _const_guard(L, guard)
        c = vabs[0]
        value = c * tab.norm_unit(L)
        witness = tab.witness(x.indices)
        sums = tab.layer_sums(L)

        def layer_at(ell: int) -> float:
            return c * float(sums[min(ell, L) - 1]) / system.weight(ell)

        char, tie = _character_scan(value, c, layer_at, lo_char, L, tol)
        if memo is not None:
            memo.put(system, vabs, value)
        return NormResult(value, witness, char, tie, system.name)

    tables = build_tables(x, system, guard=guard)
    value = tables.value()
    witness = _witness_from_tables(tables, 0, L - 1)
    char, tie = _character_scan(value, float(np.max(tables.vabs)),
                                tables.layer_value, lo_char, L, tol)
    if memo is not None:
        memo.put(system, vabs, value)
    return NormResult(value, witness, char, tie, system.name)


def norm_value(x: FinVector, system: NormSystem = F_SYSTEM, *,
               guard: int = DEFAULT_SUPPORT_GUARD,
               memo: Optional[MemoTable] = GLOBAL_MEMO) -> float:
    """Norm value only, with memoized and constant fast paths."""
    L = x.support_size()
    if L == 0:
        return 0.0
    vabs = tuple(abs(v) for v in x.values)
    if memo is not None:
        hit = memo.get(system, vabs)
        if hit is not None:
            return hit
        hit = memo.lookup_digest(system, vabs)
        if hit is not None:
            return hit
    if L > guard:
        raise SupportGuardError(f"support size {L} exceeds guard {guard}")
    if L >= CONSTANT_ROUTE_MIN and _is_bitwise_constant(vabs):
        _const_guard(L, guard)
        value = vabs[0] * _const_tables(system).norm_unit(L)
    else:
        value = build_tables(x, system, guard=guard).value()
    if memo is not None:
        memo.put(system, vabs, value)
    return value


def best_sum(x: FinVector, k: int, system: NormSystem = F_SYSTEM, *,
             guard: int = DEFAULT_SUPPORT_GUARD) -> float:
    """Max over partitions into at most k nonempty-projection interval
    parts of the sum of part norms.  Nondecreasing in k; at k = 1 this is
    the norm of the whole vector."""
    if k < 1:
        raise DomainError("part budget k must be >= 1")
    L = x.support_size()
    if L == 0:
        return 0.0
    vabs = tuple(abs(v) for v in x.values)
    if L >= CONSTANT_ROUTE_MIN and _is_bitwise_constant(vabs):
        return constant_best_sum(system, L, vabs[0], k, guard=guard)
    return build_tables(x, system, guard=guard).best_sum(k)


def layer_norm(x: FinVector, ell: int, system: NormSystem = F_SYSTEM, *,
               guard: int = DEFAULT_SUPPORT_GUARD) -> float:
    """The ell-partition layer of the norm: best_sum over at most ell
    parts divided by w(ell).  Surplus parts beyond the support project to
    zero, so "at most" and "exactly ell" coincide."""
    if ell < max(2, system.min_parts):
        raise DomainError(f"layer index must be >= {max(2, system.min_parts)}")
    L = x.support_size()
    if L == 0:
        return 0.0
    return best_sum(x, min(ell, L), system, guard=guard) / system.weight(ell)


def tail_layer_norm(x: FinVector, r: float, system: NormSystem = F_SYSTEM, *,
                    guard: int = DEFAULT_SUPPORT_GUARD) -> float:
    """Supremum of the layers at indices >= r, the sup norm included.

    Finite layers beyond the support size only shrink (the partition sum
    saturates while the weight grows), so the scan stops at the support
    size or at ceil(r), whichever is larger."""
    lo = max(2, system.min_parts)
    if r < lo:
        raise DomainError(f"layer threshold r must be >= {lo}")
    L = x.support_size()
    if L == 0:
        return 0.0
    first = math.ceil(r)
    last = max(first, L)
    best = x.linf()
    if L >= CONSTANT_ROUTE_MIN and _is_bitwise_constant(tuple(abs(v) for v in x.values)):
        c = abs(x.values[0])
        tab = _const_tables(system)
        _const_guard(L, guard)
        sums = tab.layer_sums(L)
        for ell in range(first, last + 1):
            best = max(best, c * float(sums[min(ell, L) - 1]) / system.weight(ell))
        return best
    tables = build_tables(x, system, guard=guard)
    for ell in range(first, last + 1):
        best = max(best, tables.layer_value(ell))
    return best


@dataclass(frozen=True)
class CharacterResult:
    value: float          # int-valued float or math.inf
    tie: bool


def character(x: FinVector, system: NormSystem = F_SYSTEM, *,
              guard: int = DEFAULT_SUPPORT_GUARD,
              tol: float = DEFAULT_TOLERANCE) -> CharacterResult:
    """Smallest layer attaining the norm; infinity when only the sup norm
    does.  Near-ties between a finite layer and the sup norm report the
    finite layer with the tie flag set."""
    if x.is_zero():
        raise DomainError("character of the zero vector is undefined")
    result = norm(x, system, guard=guard, tol=tol)
    return CharacterResult(result.character, result.character_tie)


def norming_functional(x: FinVector, system: NormSystem = F_SYSTEM, *,
                       guard: int = DEFAULT_SUPPORT_GUARD) -> Functional:
    """Functional from the witness tree with leaf signs copied from x.

    Applying it to x recovers the norm; applying it to any y stays below
    the norm of y (membership in the dual unit ball)."""
    if x.is_zero():
        raise DomainError("no norming functional for the zero vector")
    result = norm(x, system, guard=guard)
    return Functional.from_witness(result.witness, x)


# ---------------------------------------------------------------------------
# Independent oracle: all successive-set families on small supports
# ---------------------------------------------------------------------------

def brute_norm(x: FinVector, system: NormSystem = F_SYSTEM, *,
               cap: int = BRUTE_SUPPORT_CAP) -> float:
    """Fixed-point value by enumerating ALL partitions into successive
    finite sets, not only intervals.

    Successive sets may skip support points, so a family is a subset T of
    the support plus a chunking of T into consecutive runs; the oracle
    maximises over every such pair.  Super-exponential: refuses supports
    larger than ``cap``."""
    t = x.support_size()
    if t > cap:
        raise SupportGuardError(f"brute oracle capped at support {cap}, got {t}")
    if t == 0:
        return 0.0
    vals = [abs(v) for v in x.values]
    l0 = system.min_parts
    W = system.weight
    full = (1 << t) - 1

    linf_of = [0.0] * (full + 1)
    for mask in range(1, full + 1):
        low = mask & (-mask)
        linf_of[mask] = max(linf_of[mask ^ low], vals[low.bit_length() - 1])

    B = [0.0] * (full + 1)
    M = [-math.inf] * (full + 1)
    by_count: list[list[int]] = [[] for _ in range(t + 1)]
    for mask in range(1, full + 1):
        by_count[bin(mask).count("1")].append(mask)

    for count in range(1, t + 1):
        for mask in by_count[count]:
            ps = [i for i in range(t) if mask >> i & 1]
            k = len(ps)
            best_p = -math.inf
            if k >= 2:
                run = [[0.0] * k for _ in range(k)]
                for a in range(k):
                    m2 = 0
                    for b in range(a, k):
                        m2 |= 1 << ps[b]
                        if not (a == 0 and b == k - 1):
                            run[a][b] = B[m2]
                D = [[-math.inf] * (k + 1) for _ in range(k + 1)]
                for e in range(1, k):
                    D[1][e] = run[0][e - 1]
                for jparts in range(2, k + 1):
                    for e in range(jparts, k + 1):
                        D[jparts][e] = max(D[jparts - 1][m] + run[m][e - 1]
                                           for m in range(jparts - 1, e))
                for jparts in range(2, k + 1):
                    cand = D[jparts][k] / W(max(jparts, l0))
                    if cand > best_p:
                        best_p = cand
            m_best = best_p
            rem = mask
            while rem:
                low = rem & (-rem)
                rem ^= low
                sub = mask ^ low
                if sub and M[sub] > m_best:
                    m_best = M[sub]
            M[mask] = m_best
            B[mask] = max(linf_of[mask], m_best)

    return B[full]
