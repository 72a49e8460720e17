"""Clifford group elements as conjugation tableaux.

A tableau stores the sign-free images of the 2n generators X_i, Z_i plus one
sign per image; it pins a Clifford down exactly up to global phase.  Row
bit vectors are Python ints; for gate application the tableau is transposed
into column form so that each H/S/CNOT is O(1) big-int operations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .gf2pauli import (
    DimensionError,
    PauliOperator,
    _from_xz,
    _iter_bits,
    _xz_exponent,
    commutes,
    format_pauli,
    parse_pauli,
)

__all__ = [
    "InvalidTableauError",
    "CliffordTableau",
    "CliffordCircuit",
    "identity_tableau",
    "gate_tableau",
    "conjugate_pauli",
    "compose",
    "invert",
    "pauli_as_tableau",
    "pauli_from_frame",
    "circuit_tableau",
    "synthesize_circuit",
    "random_clifford",
    "random_symplectic",
    "enumerate_cliffords",
    "clifford_group_size",
    "clifford_class_count",
    "query_lower_bound",
    "bell_support",
    "tableau_to_json",
    "tableau_from_json",
]


class InvalidTableauError(ValueError):
    """Images do not preserve the generator commutation relations."""


@dataclass(frozen=True)
class CliffordTableau:
    n: int
    x_images: tuple[PauliOperator, ...]
    z_images: tuple[PauliOperator, ...]
    x_signs: tuple[int, ...]
    z_signs: tuple[int, ...]

    def __post_init__(self):
        for field in (self.x_images, self.z_images, self.x_signs, self.z_signs):
            if len(field) != self.n:
                raise DimensionError("tableau fields must all have length n")
        for img in self.x_images + self.z_images:
            if img.n != self.n:
                raise DimensionError("image acts on the wrong number of qubits")
            if img.phase != 0:
                raise ValueError("tableau images must be sign-free")
        for s in self.x_signs + self.z_signs:
            if s not in (1, -1):
                raise ValueError("signs must be +1 or -1")

    @cached_property
    def _xz_rows(self) -> list[tuple[int, int, int]]:
        # signed images in i**e X^x Z^z form, x generators first
        rows = []
        for img, s in zip(self.x_images + self.z_images, self.x_signs + self.z_signs):
            e = (0 if s == 1 else 2) + (img.x_bits & img.z_bits).bit_count()
            rows.append((img.x_bits, img.z_bits, e & 3))
        return rows

    def image(self, index: int) -> PauliOperator:
        """Signed image of generator ``index`` (0..n-1 X-type, n..2n-1 Z-type)."""
        if index < self.n:
            img, s = self.x_images[index], self.x_signs[index]
        else:
            img, s = self.z_images[index - self.n], self.z_signs[index - self.n]
        return img if s == 1 else img.with_phase(2)

    def images(self) -> list[PauliOperator]:
        return [self.image(i) for i in range(2 * self.n)]

    def is_symplectic(self) -> bool:
        imgs = self.x_images + self.z_images
        n = self.n
        for a in range(2 * n):
            for b in range(a + 1, 2 * n):
                want_anti = b == a + n
                if commutes(imgs[a], imgs[b]) == want_anti:
                    return False
        return all(img.x_bits | img.z_bits for img in imgs)

    def check_symplectic(self) -> None:
        if not self.is_symplectic():
            raise InvalidTableauError("tableau images are not a symplectic basis")

    def signs_positive(self) -> CliffordTableau:
        return CliffordTableau(self.n, self.x_images, self.z_images, (1,) * self.n, (1,) * self.n)

    def is_identity(self) -> bool:
        return self == identity_tableau(self.n)


def identity_tableau(n: int) -> CliffordTableau:
    xs = tuple(PauliOperator(n, 1 << q, 0) for q in range(n))
    zs = tuple(PauliOperator(n, 0, 1 << q) for q in range(n))
    return CliffordTableau(n, xs, zs, (1,) * n, (1,) * n)


def _split_signed(p: PauliOperator) -> tuple[PauliOperator, int]:
    if p.phase % 2:
        raise InvalidTableauError(f"image {format_pauli(p)} is not Hermitian")
    return p.sign_free(), (1 if p.phase == 0 else -1)


def _from_signed_images(n: int, images: Sequence[PauliOperator]) -> CliffordTableau:
    split = [_split_signed(p) for p in images]
    return CliffordTableau(
        n,
        tuple(p for p, _ in split[:n]),
        tuple(p for p, _ in split[n:]),
        tuple(s for _, s in split[:n]),
        tuple(s for _, s in split[n:]),
    )


def conjugate_pauli(t: CliffordTableau, p: PauliOperator) -> PauliOperator:
    """Return ``C p C^dagger`` with its phase."""
    if t.n != p.n:
        raise DimensionError(f"tableau on {t.n} qubits, Pauli on {p.n}")
    rows = t._xz_rows
    n = t.n
    x = z = 0
    e = _xz_exponent(p)
    for q in _iter_bits(p.x_bits):
        ix, iz, ie = rows[q]
        e += ie + 2 * (z & ix).bit_count()
        x ^= ix
        z ^= iz
    for q in _iter_bits(p.z_bits):
        ix, iz, ie = rows[n + q]
        e += ie + 2 * (z & ix).bit_count()
        x ^= ix
        z ^= iz
    return _from_xz(n, x, z, e)


def compose(a: CliffordTableau, b: CliffordTableau) -> CliffordTableau:
    """Tableau of ``a . b``: apply ``b`` first, then ``a``."""
    if a.n != b.n:
        raise DimensionError(f"cannot compose {a.n}- and {b.n}-qubit tableaux")
    return _from_signed_images(a.n, [conjugate_pauli(a, img) for img in b.images()])


def _bits_matrix(vals: Sequence[int], width: int) -> np.ndarray:
    nbytes = max(1, (width + 7) // 8)
    buf = b"".join(v.to_bytes(nbytes, "little") for v in vals)
    arr = np.frombuffer(buf, dtype=np.uint8).reshape(len(vals), nbytes)
    return np.unpackbits(arr, axis=1, bitorder="little")[:, :width]


def _matrix_ints(mat: np.ndarray) -> list[int]:
    packed = np.packbits(np.asarray(mat, dtype=np.uint8), axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _transpose(vals: Sequence[int], width: int) -> list[int]:
    if not vals:
        return [0] * width
    return _matrix_ints(_bits_matrix(vals, width).T)


def invert(t: CliffordTableau) -> CliffordTableau:
    n = t.n
    ax = [p.x_bits for p in t.x_images]
    az = [p.z_bits for p in t.x_images]
    bx = [p.x_bits for p in t.z_images]
    bz = [p.z_bits for p in t.z_images]
    # symplectic inverse is Omega M^T Omega
    inv_xx, inv_xz = _transpose(bz, n), _transpose(az, n)
    inv_zx, inv_zz = _transpose(bx, n), _transpose(ax, n)
    base = CliffordTableau(
        n,
        tuple(PauliOperator(n, inv_xx[j], inv_xz[j]) for j in range(n)),
        tuple(PauliOperator(n, inv_zx[j], inv_zz[j]) for j in range(n)),
        (1,) * n,
        (1,) * n,
    )
    frame = compose(base, t)
    if any(img != ref for img, ref in zip(frame.x_images + frame.z_images,
                                         identity_tableau(n).x_images + identity_tableau(n).z_images)):
        raise InvalidTableauError("tableau is not invertible (not symplectic)")
    q = pauli_from_frame(frame)
    # base . t is conjugation by q; q is an involution, so q . base inverts t
    return _from_signed_images(
        n, [img if commutes(img, q) else img.with_phase(img.phase + 2) for img in base.images()]
    )


def pauli_as_tableau(q: PauliOperator) -> CliffordTableau:
    if not q.is_hermitian:
        raise ValueError(f"{format_pauli(q)} is not Hermitian; phase must be +1 or -1")
    n = q.n
    ident = identity_tableau(n)
    x_signs = tuple(-1 if (q.z_bits >> i) & 1 else 1 for i in range(n))
    z_signs = tuple(-1 if (q.x_bits >> i) & 1 else 1 for i in range(n))
    return CliffordTableau(n, ident.x_images, ident.z_images, x_signs, z_signs)


def pauli_from_frame(t: CliffordTableau) -> PauliOperator:
    """Sign-free Pauli whose conjugation action is ``t`` (images must be trivial)."""
    ident = identity_tableau(t.n)
    if t.x_images != ident.x_images or t.z_images != ident.z_images:
        raise ValueError("tableau is not a Pauli frame")
    z = sum(1 << i for i, s in enumerate(t.x_signs) if s == -1)
    x = sum(1 << i for i, s in enumerate(t.z_signs) if s == -1)
    return PauliOperator(t.n, x, z)


# ----------------------------------------------------------------------------
# circuits


_GATE_ARITY = {"H": 1, "S": 1, "CNOT": 2}


@dataclass(frozen=True)
class CliffordCircuit:
    """Gates in time order: each entry is ``("H", q)``, ``("S", q)`` or ``("CNOT", c, t)``."""

    n: int
    gates: tuple[tuple, ...] = ()

    def __post_init__(self):
        for gate in self.gates:
            name, *qubits = gate
            if name not in _GATE_ARITY or len(qubits) != _GATE_ARITY[name]:
                raise ValueError(f"bad gate {gate!r}")
            if any(not 0 <= q < self.n for q in qubits):
                raise ValueError(f"gate {gate!r} out of range for n={self.n}")
            if name == "CNOT" and qubits[0] == qubits[1]:
                raise ValueError("CNOT control equals target")

    def __len__(self) -> int:
        return len(self.gates)

    def to_text(self) -> str:
        return "".join(" ".join(map(str, g)) + "\n" for g in self.gates)

    @classmethod
    def from_text(cls, n: int, text: str) -> CliffordCircuit:
        gates = []
        for lineno, line in enumerate(text.splitlines(), 1):
            parts = line.split()
            if not parts:
                continue
            try:
                gates.append((parts[0], *map(int, parts[1:])))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {line!r}") from exc
        return cls(n, tuple(gates))

    def inverse(self) -> CliffordCircuit:
        out = []
        for gate in reversed(self.gates):
            out.extend([gate] * 3 if gate[0] == "S" else [gate])
        return CliffordCircuit(self.n, tuple(out))


class _Columns:
    """Column-packed tableau; bit r of each column is row r (x gens, then z gens)."""

    def __init__(self, n: int, xcols: list[int], zcols: list[int], signs: int):
        self.n = n
        self.xcols = xcols
        self.zcols = zcols
        self.signs = signs
        self.mask = (1 << (2 * n)) - 1

    @classmethod
    def from_tableau(cls, t: CliffordTableau) -> _Columns:
        imgs = t.x_images + t.z_images
        signs = 0
        for r, s in enumerate(t.x_signs + t.z_signs):
            if s == -1:
                signs |= 1 << r
        return cls(
            t.n,
            _transpose([p.x_bits for p in imgs], t.n),
            _transpose([p.z_bits for p in imgs], t.n),
            signs,
        )

    def to_tableau(self) -> CliffordTableau:
        n = self.n
        xs = _transpose(self.xcols, 2 * n)
        zs = _transpose(self.zcols, 2 * n)
        imgs = [PauliOperator(n, xs[r], zs[r]) for r in range(2 * n)]
        signs = [-1 if (self.signs >> r) & 1 else 1 for r in range(2 * n)]
        return CliffordTableau(n, tuple(imgs[:n]), tuple(imgs[n:]), tuple(signs[:n]), tuple(signs[n:]))

    def h(self, q: int) -> None:
        x, z = self.xcols[q], self.zcols[q]
        self.signs ^= x & z
        self.xcols[q], self.zcols[q] = z, x

    def s(self, q: int) -> None:
        x = self.xcols[q]
        self.signs ^= x & self.zcols[q]
        self.zcols[q] ^= x

    def cnot(self, c: int, t: int) -> None:
        xc, zc, xt, zt = self.xcols[c], self.zcols[c], self.xcols[t], self.zcols[t]
        self.signs ^= xc & zt & ~(xt ^ zc) & self.mask
        self.xcols[t] = xt ^ xc
        self.zcols[c] = zc ^ zt

    def apply(self, gate: tuple) -> None:
        name = gate[0]
        if name == "H":
            self.h(gate[1])
        elif name == "S":
            self.s(gate[1])
        else:
            self.cnot(gate[1], gate[2])

    def xbit(self, row: int, q: int) -> int:
        return (self.xcols[q] >> row) & 1

    def zbit(self, row: int, q: int) -> int:
        return (self.zcols[q] >> row) & 1


def circuit_tableau(circuit: CliffordCircuit) -> CliffordTableau:
    cols = _Columns.from_tableau(identity_tableau(circuit.n))
    for gate in circuit.gates:
        cols.apply(gate)
    return cols.to_tableau()


def gate_tableau(name: str, *qubits: int, n: int | None = None) -> CliffordTableau:
    n = n if n is not None else max(qubits) + 1
    return circuit_tableau(CliffordCircuit(n, ((name, *qubits),)))


def synthesize_circuit(t: CliffordTableau) -> CliffordCircuit:
    """Exact {H, S, CNOT} circuit for ``t`` by symplectic Gaussian elimination.

    Gates are appended after ``t`` until it is reduced to the identity; the
    returned circuit is the inverse of that reduction.
    """
    t.check_symplectic()
    n = t.n
    cols = _Columns.from_tableau(t)
    reduce: list[tuple] = []

    def emit(*gate):
        cols.apply(gate)
        reduce.append(gate)

    def swap(a, b):
        emit("CNOT", a, b)
        emit("CNOT", b, a)
        emit("CNOT", a, b)

    for i in range(n):
        drow, srow = i, n + i
        # pivot: X on qubit i in the destabilizer-like row
        if not cols.xbit(drow, i):
            j = next((j for j in range(i + 1, n) if cols.xbit(drow, j)), None)
            if j is not None:
                swap(i, j)
            else:
                j = next(j for j in range(i, n) if cols.zbit(drow, j))
                emit("H", j)
                if j != i:
                    swap(i, j)
        for j in range(i + 1, n):
            if cols.xbit(drow, j):
                emit("CNOT", i, j)
        if any(cols.zbit(drow, j) for j in range(i, n)):
            if not cols.zbit(drow, i):
                emit("S", i)
            for j in range(i + 1, n):
                if cols.zbit(drow, j):
                    emit("CNOT", j, i)
            emit("S", i)
        # the partner row is now Z_i times X/Z stuff on qubits > i
        for j in range(i + 1, n):
            if cols.zbit(srow, j):
                emit("CNOT", j, i)
        if any(cols.xbit(srow, j) for j in range(i, n)):
            emit("H", i)
            for j in range(i + 1, n):
                if cols.xbit(srow, j):
                    emit("CNOT", i, j)
            if cols.zbit(srow, i):
                emit("S", i)
            emit("H", i)

    if any(cols.xcols[q] != 1 << q or cols.zcols[q] != 1 << (n + q) for q in range(n)):
        raise InvalidTableauError("elimination did not reach the identity")  # pragma: no cover

    out: list[tuple] = []
    # residual sign frame is a Pauli; Paulis are their own inverses up to phase
    for i in range(n):
        if (cols.signs >> i) & 1:
            out += [("S", i), ("S", i)]  # Z flips the X_i sign
        if (cols.signs >> (n + i)) & 1:
            out += [("H", i), ("S", i), ("S", i), ("H", i)]  # X flips the Z_i sign
    for gate in reversed(reduce):
        out.extend([gate] * 3 if gate[0] == "S" else [gate])
    return CliffordCircuit(n, tuple(out))


# ----------------------------------------------------------------------------
# sampling and enumeration


def _sp_inner(u: np.ndarray, v: np.ndarray, n: int) -> int:
    return int((u[:n] @ v[n:] + u[n:] @ v[:n]) & 1)


def _bridge(x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    # z with <x,z> = <y,z> = 1; exists whenever x != y are both nonzero
    a = np.concatenate([x[n:], x[:n]])
    b = np.concatenate([y[n:], y[:n]])
    z = np.zeros_like(x)
    i = int(np.flatnonzero(a)[0])
    if b[i]:
        z[i] = 1
        return z
    j = int(np.flatnonzero(b)[0])
    z[j] = 1
    if not a[j]:
        z[i] = 1
    return z


def _transvect(u: np.ndarray, h: np.ndarray, n: int) -> np.ndarray:
    return u ^ h if _sp_inner(u, h, n) else u


def _vector_transvections(x: np.ndarray, y: np.ndarray, n: int) -> list[np.ndarray]:
    if np.array_equal(x, y):
        return []
    if _sp_inner(x, y, n):
        return [x ^ y]
    z = _bridge(x, y, n)
    return [x ^ z, z ^ y]


def _pair_transvections(i: int, v: np.ndarray, w: np.ndarray, n: int) -> list[np.ndarray]:
    """Transvections sending (X_i, Z_i) to (v, w); requires <v, w> = 1."""
    e = np.zeros(2 * n, dtype=np.uint8)
    f = np.zeros(2 * n, dtype=np.uint8)
    e[i] = 1
    f[n + i] = 1
    hs = _vector_transvections(e, v, n)
    for h in hs:
        f = _transvect(f, h, n)
    if np.array_equal(f, w):
        return hs
    if _sp_inner(f, w, n):
        return hs + [f ^ w]
    return hs + [v.copy(), v ^ f ^ w]


def _symplectic_from_pairs(n: int, pairs: Sequence[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Rows are images of X_0..X_{n-1}, Z_0..Z_{n-1}.

    Pair ``i`` must live on qubits >= i; the map sends (X_i, Z_i) to the pair
    after the pairs of lower qubits have been pushed through, so distinct
    pair sequences give distinct matrices.
    """
    rows = np.eye(2 * n, dtype=np.uint8)
    omega_perm = np.r_[n : 2 * n, 0:n]
    for i in range(n - 1, -1, -1):
        for h in _pair_transvections(i, pairs[i][0], pairs[i][1], n):
            flips = (rows @ h[omega_perm]) & 1
            rows ^= np.outer(flips, h).astype(np.uint8)
    return rows


def _subspace_positions(i: int, n: int) -> np.ndarray:
    return np.r_[i:n, n + i : 2 * n]


def random_symplectic(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform element of Sp(2n, GF(2)) as a 2n x 2n 0/1 matrix of image rows."""
    pairs = []
    for i in range(n):
        pos = _subspace_positions(i, n)
        v = np.zeros(2 * n, dtype=np.uint8)
        while not v.any():
            v[pos] = rng.integers(0, 2, pos.size, dtype=np.uint8)
        w = np.zeros(2 * n, dtype=np.uint8)
        while True:
            w[pos] = rng.integers(0, 2, pos.size, dtype=np.uint8)
            if _sp_inner(v, w, n):
                break
        pairs.append((v, w))
    return _symplectic_from_pairs(n, pairs)


def _tableau_from_matrix(n: int, rows: np.ndarray, signs: Iterable[int]) -> CliffordTableau:
    xs = _matrix_ints(rows[:, :n])
    zs = _matrix_ints(rows[:, n:])
    signs = tuple(signs)
    imgs = [PauliOperator(n, xs[r], zs[r]) for r in range(2 * n)]
    return CliffordTableau(n, tuple(imgs[:n]), tuple(imgs[n:]), signs[:n], signs[n:])


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_clifford(n: int, seed=None) -> CliffordTableau:
    """Uniform Clifford modulo global phase; deterministic for an int seed."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = _as_rng(seed)
    rows = random_symplectic(n, rng)
    signs = 1 - 2 * rng.integers(0, 2, 2 * n)
    return _tableau_from_matrix(n, rows, (int(s) for s in signs))


def _pairs_on(i: int, n: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    pos = _subspace_positions(i, n)
    for vb in product((0, 1), repeat=pos.size):
        if not any(vb):
            continue
        v = np.zeros(2 * n, dtype=np.uint8)
        v[pos] = vb
        for wb in product((0, 1), repeat=pos.size):
            w = np.zeros(2 * n, dtype=np.uint8)
            w[pos] = wb
            if _sp_inner(v, w, n):
                yield v, w


def enumerate_symplectic(n: int) -> Iterator[np.ndarray]:
    if n > 3:
        raise ValueError("exhaustive symplectic enumeration is limited to n <= 3")

    def rec(i, chosen):
        if i == n:
            yield _symplectic_from_pairs(n, chosen)
            return
        for pair in _pairs_on(i, n):
            yield from rec(i + 1, chosen + [pair])

    yield from rec(0, [])


def enumerate_cliffords(n: int) -> list[CliffordTableau]:
    """Every Clifford phase-class (symplectic part and signs), 24 at n=1, 11520 at n=2."""
    out = []
    for rows in enumerate_symplectic(n):
        for signs in product((1, -1), repeat=2 * n):
            out.append(_tableau_from_matrix(n, rows, signs))
    return out


# ----------------------------------------------------------------------------
# counting


def clifford_group_size(n: int) -> int:
    """Size of the Clifford group modulo phase as counted in the optimality bound."""
    if n < 1:
        raise ValueError("n must be positive")
    return 2 ** (n * n + 2 * n + 3) * math.prod(4**j - 1 for j in range(1, n + 1))


def clifford_class_count(n: int) -> int:
    """Number of distinct tableaux (symplectic matrices times sign patterns)."""
    return 2 ** (n * n + 2 * n) * math.prod(4**j - 1 for j in range(1, n + 1))


def query_lower_bound(n: int) -> int:
    """Smallest m with 2^(2nm) >= clifford_group_size(n)."""
    size = clifford_group_size(n)
    bits = (size - 1).bit_length()  # ceil(log2(size))
    return -(-bits // (2 * n))


# ----------------------------------------------------------------------------
# Bell-sampling support of a Clifford channel


def _rref(rows: Iterable[tuple[int, int]]):
    """Reduced row echelon form over GF(2) of (row, rhs) pairs; None if inconsistent."""
    pivots: dict[int, tuple[int, int]] = {}
    for row, rhs in rows:
        for col, (prow, prhs) in pivots.items():
            if (row >> col) & 1:
                row ^= prow
                rhs ^= prhs
        if row == 0:
            if rhs:
                return None
            continue
        col = row.bit_length() - 1
        for c, (prow, prhs) in list(pivots.items()):
            if (prow >> col) & 1:
                pivots[c] = (prow ^ row, prhs ^ rhs)
        pivots[col] = (row, rhs)
    return pivots


def _left_kernel(vectors: Sequence[int]) -> list[int]:
    """Bitmasks of index subsets whose vectors XOR to zero (a basis)."""
    basis: list[tuple[int, int]] = []  # (vector, tag) with distinct leading bits
    kernel = []
    for idx, vec in enumerate(vectors):
        tag = 1 << idx
        for bvec, btag in basis:
            if vec ^ bvec < vec:
                vec ^= bvec
                tag ^= btag
        if vec == 0:
            kernel.append(tag)
        else:
            basis.append((vec, tag))
            basis.sort(key=lambda item: -item[0])
    return kernel


def bell_support(t: CliffordTableau) -> tuple[int, list[int]]:
    """Affine support of the Bell-sampling distribution of a Clifford channel.

    Outcome vectors are packed as ``x | z << n``.  Returns ``(offset, basis)``;
    the distribution is uniform over ``offset + span(basis)``.  The support is
    cut out by ``<p, h> = [C s_h C^dagger = -s_h]`` for every ``h`` fixed by the
    symplectic part of ``C``.
    """
    n = t.n
    full = (1 << n) - 1
    moved = [
        (img.x_bits | img.z_bits << n) ^ (1 << r)
        for r, img in enumerate(t.x_images + t.z_images)
    ]
    equations = []
    for h in _left_kernel(moved):
        hx, hz = h & full, h >> n
        fixed = PauliOperator(n, hx, hz)
        image = conjugate_pauli(t, fixed)
        if image.sign_free() != fixed or image.phase % 2:
            raise InvalidTableauError("tableau is not symplectic")  # pragma: no cover
        # <p, h> = p_x . h_z + p_z . h_x
        equations.append((hz | hx << n, 1 if image.phase == 2 else 0))
    pivots = _rref(equations)
    if pivots is None:
        raise InvalidTableauError("inconsistent Bell support")  # pragma: no cover
    offset = 0
    for col, (_, rhs) in pivots.items():
        if rhs:
            offset |= 1 << col
    basis = []
    for free in range(2 * n):
        if free in pivots:
            continue
        vec = 1 << free
        for col, (prow, _) in pivots.items():
            if (prow >> free) & 1:
                vec |= 1 << col
        basis.append(vec)
    return offset, basis


# ----------------------------------------------------------------------------
# JSON


def tableau_to_json(t: CliffordTableau) -> dict:
    return {
        "n": t.n,
        "x_images": [format_pauli(p) for p in t.x_images],
        "z_images": [format_pauli(p) for p in t.z_images],
        "x_signs": list(t.x_signs),
        "z_signs": list(t.z_signs),
    }


def tableau_from_json(data: dict | str) -> CliffordTableau:
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["n"])
    xs = tuple(parse_pauli(s) for s in data["x_images"])
    zs = tuple(parse_pauli(s) for s in data["z_images"])
    return CliffordTableau(n, xs, zs, tuple(int(s) for s in data["x_signs"]),
                           tuple(int(s) for s in data["z_signs"]))
