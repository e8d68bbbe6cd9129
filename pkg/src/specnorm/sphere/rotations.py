"""Exact rational rotation sets, Wigner D-matrices and the averaging operator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InvalidSpec
from ..spectral import theta_of
from .harmonics import BASIS_CONVENTION

# exact 3x3 matrices are tuples of 9 Fractions, row-major
ExactMatrix = tuple


def _exact(entries) -> ExactMatrix:
    vals = [Fraction(e) for e in entries]
    if len(vals) != 9:
        raise InvalidSpec(f"rotation needs 9 entries, got {len(vals)}")
    return tuple(vals)


def exact_matmul(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    return tuple(
        sum(a[3 * i + k] * b[3 * k + j] for k in range(3)) for i in range(3) for j in range(3)
    )


def exact_transpose(a: ExactMatrix) -> ExactMatrix:
    return tuple(a[3 * j + i] for i in range(3) for j in range(3))


def exact_det(a: ExactMatrix) -> Fraction:
    return (
        a[0] * (a[4] * a[8] - a[5] * a[7])
        - a[1] * (a[3] * a[8] - a[5] * a[6])
        + a[2] * (a[3] * a[7] - a[4] * a[6])
    )


IDENTITY = _exact([1, 0, 0, 0, 1, 0, 0, 0, 1])


@dataclass(frozen=True)
class RotationSet:
    """Generators g_1..g_M of a free subgroup of SO(3), held exactly."""

    generators: tuple
    label: str = "custom"

    def __post_init__(self):
        if not self.generators:
            raise InvalidSpec("empty rotation set")
        for k, g in enumerate(self.generators):
            if len(g) != 9:
                raise InvalidSpec(f"generator {k} is not 3x3")
            if exact_matmul(g, exact_transpose(g)) != IDENTITY:
                raise InvalidSpec(f"generator {k} is not orthogonal")
            if exact_det(g) != 1:
                raise InvalidSpec(f"generator {k} has determinant {exact_det(g)}")
        sym = self.symmetric()
        if len(set(sym)) != len(sym):
            raise InvalidSpec("generators and inverses must be 2M distinct rotations")

    @property
    def M(self) -> int:
        return len(self.generators)

    @property
    def q(self) -> int:
        return 2 * self.M - 1

    def symmetric(self) -> list[ExactMatrix]:
        """[g_1, ..., g_M, g_1^{-1}, ..., g_M^{-1}]."""
        return list(self.generators) + [exact_transpose(g) for g in self.generators]

    def float_generators(self) -> list[np.ndarray]:
        return [exact_to_float(g) for g in self.generators]

    def to_strings(self) -> list[list[str]]:
        return [[str(e) for e in g] for g in self.generators]


def exact_to_float(a: ExactMatrix) -> np.ndarray:
    return np.array([float(e) for e in a]).reshape(3, 3)


def default_rotation_set() -> RotationSet:
    """Rotations by arccos(3/5) about the z- and x-axes (M = 2, q = 3)."""
    c, s = Fraction(3, 5), Fraction(4, 5)
    rz = _exact([c, -s, 0, s, c, 0, 0, 0, 1])
    rx = _exact([1, 0, 0, 0, c, -s, 0, s, c])
    return RotationSet((rz, rx), label="z,x by arccos(3/5)")


def rotation_set_from_strings(rows, label="custom") -> RotationSet:
    """Build from a list of generators, each 9 ``num/den`` strings or a 3x3 nested list."""
    gens = []
    for k, g in enumerate(rows):
        flat = [e for row in g for e in row] if isinstance(g[0], (list, tuple)) else list(g)
        try:
            gens.append(_exact(Fraction(str(e).strip()) for e in flat))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"generator {k}: bad rational entry ({exc})") from exc
    return RotationSet(tuple(gens), label=label)


def load_rotation_set(path) -> RotationSet:
    """Read a rotation-set file.

    TOML layout::

        label = "my set"
        [[rotation]]
        matrix = ["3/5", "-4/5", "0", "4/5", "3/5", "0", "0", "0", "1"]
    """
    from ..config import load_toml

    data = load_toml(Path(path))
    rots = data.get("rotation")
    if not isinstance(rots, list) or not rots:
        raise ConfigError(f"{path}: expected one or more [[rotation]] tables")
    try:
        mats = [r["matrix"] for r in rots]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: every [[rotation]] needs a 'matrix' entry") from exc
    return rotation_set_from_strings(mats, label=str(data.get("label", Path(path).stem)))


# ---------------------------------------------------------------------------
# Wigner D


def euler_zyz(R: np.ndarray) -> tuple[float, float, float]:
    """Angles (alpha, beta, gamma) with R = Rz(alpha) Ry(beta) Rz(gamma)."""
    R = np.asarray(R, dtype=np.float64)
    beta = math.atan2(math.hypot(R[0, 2], R[1, 2]), R[2, 2])
    sb = math.sin(beta)
    if sb > 1e-12:
        alpha = math.atan2(R[1, 2], R[0, 2])
        gamma = math.atan2(R[2, 1], -R[2, 0])
    elif R[2, 2] > 0:
        alpha, gamma = math.atan2(R[1, 0], R[0, 0]), 0.0
    else:
        alpha, gamma = math.atan2(-R[1, 0], -R[0, 0]), 0.0
    return alpha, beta, gamma


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(b: float) -> np.ndarray:
    c, s = math.cos(b), math.sin(b)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


@lru_cache(maxsize=32)
def _jy_eigen(s: int):
    m = np.arange(-s, s)
    up = np.sqrt(s * (s + 1) - m * (m + 1.0))
    jy = np.zeros((2 * s + 1, 2 * s + 1), dtype=complex)
    idx = np.arange(2 * s)
    jy[idx + 1, idx] = -0.5j * up
    jy[idx, idx + 1] = 0.5j * up
    mu, vec = np.linalg.eigh(jy)
    return np.rint(mu), vec


def wigner_small_d(s: int, beta: float) -> np.ndarray:
    """d^s_{m'm}(beta) = <m'| exp(-i beta J_y) |m>, rows m', columns m = -s..s."""
    mu, vec = _jy_eigen(s)
    d = (vec * np.exp(-1j * beta * mu)) @ vec.conj().T
    return d.real


def wigner_D(s: int, R) -> np.ndarray:
    """Matrix of f -> f(R^{-1} .) on degree-s harmonics in the complex basis.

    Y_s^m(R^{-1} x) = sum_{m'} D[m', m] Y_s^{m'}(x), so coefficients transform as c -> D c.
    """
    alpha, beta, gamma = euler_zyz(R)
    m = np.arange(-s, s + 1)
    return np.exp(-1j * alpha * m)[:, None] * wigner_small_d(s, beta) * np.exp(-1j * gamma * m)[None, :]


@dataclass(frozen=True)
class HarmonicSpace:
    """Degree-s harmonics with the averaging operator of a rotation set."""

    s: int
    rotations: RotationSet
    averaging: np.ndarray
    convention: dict = field(default_factory=lambda: dict(BASIS_CONVENTION))

    @property
    def dim(self) -> int:
        return 2 * self.s + 1

    @property
    def q(self) -> int:
        return self.rotations.q


def build_averaging(s: int, rotations: RotationSet | None = None) -> HarmonicSpace:
    """(1/sqrt q) sum_j (D(g_j) + D(g_j)^dagger) on the degree-s harmonics."""
    rotations = rotations or default_rotation_set()
    acc = np.zeros((2 * s + 1, 2 * s + 1), dtype=complex)
    for g in rotations.float_generators():
        D = wigner_D(s, g)
        acc += D + D.conj().T
    acc /= math.sqrt(rotations.q)
    return HarmonicSpace(s, rotations, 0.5 * (acc + acc.conj().T))


@dataclass(frozen=True)
class JointEigenbasis:
    """Orthonormal eigenvectors (columns) of the averaging operator."""

    eigenvalues: np.ndarray
    vectors: np.ndarray
    thetas: np.ndarray
    tempered: np.ndarray
    residual: float


def joint_eigenbasis(space: HarmonicSpace) -> JointEigenbasis:
    """Eigenvectors with each column's largest entry made real and positive."""
    lam, vec = np.linalg.eigh(space.averaging)
    k = np.argmax(np.abs(vec), axis=0)
    phase = vec[k, np.arange(vec.shape[1])]
    vec = vec * (np.abs(phase) / phase)[None, :]
    theta, _, tempered = theta_of(lam)
    res = float(np.max(np.linalg.norm(space.averaging @ vec - vec * lam, axis=0)))
    return JointEigenbasis(lam, vec, theta, tempered, res)


# ---------------------------------------------------------------------------
# reduced words


@dataclass(frozen=True)
class Word:
    """Reduced word; lower-case letter = generator, upper-case = its inverse.

    ``numerators / denominator`` is the product matrix, reduced to lowest terms.
    """

    label: str
    numerators: tuple
    denominator: int

    def matrix(self) -> np.ndarray:
        return np.array(self.numerators, dtype=np.float64).reshape(3, 3) / self.denominator

    def exact(self) -> ExactMatrix:
        return tuple(Fraction(n, self.denominator) for n in self.numerators)


def _int_form(a: ExactMatrix) -> tuple[tuple, int]:
    den = math.lcm(*(e.denominator for e in a))
    return tuple(int(e * den) for e in a), den


def _int_mul(a, b):
    return tuple(
        a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j]
        for i in range(3) for j in range(3)
    )


def _reduce(nums, den):
    g = math.gcd(den, *nums)
    return tuple(n // g for n in nums), den // g


def _letters(rotations: RotationSet):
    M = rotations.M
    names = [chr(ord("a") + j) for j in range(M)] + [chr(ord("A") + j) for j in range(M)]
    forms = [_int_form(g) for g in rotations.symmetric()]
    inverse = [(j + M) % (2 * M) for j in range(2 * M)]
    return names, forms, inverse


def enumerate_words(rotations: RotationSet, n: int) -> list[Word]:
    """All reduced words of length exactly n, 2M(2M-1)^{n-1} of them (one for n = 0)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    names, forms, inverse = _letters(rotations)
    layer = [("", None, (1, 0, 0, 0, 1, 0, 0, 0, 1), 1)]
    for _ in range(n):
        nxt = []
        for label, last, nums, den in layer:
            for j, (fn, fd) in enumerate(forms):
                if last is not None and j == inverse[last]:
                    continue
                nn, nd = _reduce(_int_mul(nums, fn), den * fd)
                nxt.append((label + names[j], j, nn, nd))
        layer = nxt
    return [Word(label, nums, den) for label, _, nums, den in layer]


def rotation_angle(word: Word) -> float:
    """Angle in [0, pi] from the exact antisymmetric part and trace."""
    a, d = word.numerators, word.denominator
    vx, vy, vz = a[7] - a[5], a[2] - a[6], a[3] - a[1]
    sin2 = math.sqrt(float(vx * vx + vy * vy + vz * vz))  # 2 d sin(angle)
    cos2 = float(a[0] + a[4] + a[8] - d)  # 2 d cos(angle)
    return math.atan2(sin2, cos2)


def fixes_point(word: Word, x, tol: float = 1e-12) -> bool:
    x = np.asarray(x, dtype=np.float64)
    return bool(np.linalg.norm(word.matrix() @ x - x) <= tol)


def inverse_label(label: str) -> str:
    return label[::-1].swapcase()


def primitive_root(label: str) -> str:
    """Shortest string r with label = r^k."""
    n = len(label)
    for p in range(1, n + 1):
        if n % p == 0 and label[:p] * (n // p) == label:
            return label[:p]
    return label


def exact_axis(word: Word) -> tuple[int, int, int]:
    """Integer vector along the rotation axis (zero for the identity)."""
    a, d = word.numerators, word.denominator
    v = (a[7] - a[5], a[2] - a[6], a[3] - a[1])
    if any(v):
        return v
    # half-turn or identity: the axis spans the column space of R + I
    for j in range(3):
        col = (a[j] + (d if j == 0 else 0), a[3 + j] + (d if j == 1 else 0), a[6 + j] + (d if j == 2 else 0))
        if any(col):
            return col
    return (0, 0, 0)


def fixes_exactly(word: Word, v) -> bool:
    a, d = word.numerators, word.denominator
    return all(a[3 * i] * v[0] + a[3 * i + 1] * v[1] + a[3 * i + 2] * v[2] == d * v[i] for i in range(3))


@dataclass
class StabilizerRow:
    axis_word: str
    fixers: list                 # labels of words of length 1..n fixing the axis
    expected: list               # powers of the axis word and of its inverse
    ok: bool


def stabilizer_probe(rotations: RotationSet, axis_length: int = 3, n: int = 6) -> list[StabilizerRow]:
    """Empirical check that point stabilizers are cyclic.

    For every cyclically reduced, primitive word w with |w| <= axis_length (one of
    each inverse pair), the words of length <= n fixing the axis of w in exact
    arithmetic should be exactly the powers w^k and w^{-k}.
    """
    words = [w for L in range(1, max(n, axis_length) + 1) for w in enumerate_words(rotations, L)]
    rows, seen = [], set()
    for w in words:
        lab = w.label
        if len(lab) > axis_length or (len(lab) > 1 and lab[0].swapcase() == lab[-1]):
            continue
        if primitive_root(lab) != lab or inverse_label(lab) in seen:
            continue
        seen.add(lab)
        v = exact_axis(w)
        fixers = sorted(u.label for u in words if len(u.label) <= n and fixes_exactly(u, v))
        inv = inverse_label(lab)
        expected = sorted(r * k for r in (lab, inv) for k in range(1, n // len(lab) + 1))
        rows.append(StabilizerRow(lab, fixers, expected, fixers == expected))
    return rows


@dataclass
class SeparationStats:
    n: int
    num_words: int
    min_angle: float
    min_angle_by_length: dict
    thresholds: list
    close_counts: list           # per threshold: max over points of #words with d(gx, x) < threshold
    max_close_words: int
    safe_scale: float            # largest threshold at which no point exceeds the allowed count
    fit_constant: float          # max over lengths L of (1/min_angle_L)^{1/L}
    ok: bool
    sorted_distances: np.ndarray = field(repr=False, default=None)


def separation_stats(rotations: RotationSet, n: int, points, thresholds,
                     max_allowed: int = 2) -> SeparationStats:
    """Closeness of g x to x over reduced words g of length n at the given points.

    ``ok`` holds when at every point and every threshold at most ``max_allowed``
    words move the point by less than the threshold.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    points = points / np.linalg.norm(points, axis=1, keepdims=True)
    words = enumerate_words(rotations, n)
    mats = np.stack([w.matrix() for w in words])
    moved = np.einsum("wij,pj->pwi", mats, points)
    chord = np.linalg.norm(moved - points[:, None, :], axis=2)
    dist = np.sort(2 * np.arcsin(np.clip(chord / 2, 0.0, 1.0)), axis=1)
    thresholds = sorted(map(float, thresholds))
    counts = [int(np.max(np.sum(dist < t, axis=1))) for t in thresholds]
    safe = 0.0
    for t, c in zip(thresholds, counts):
        if c > max_allowed:
            break
        safe = t
    by_len = {}
    for L in range(1, n + 1):
        ws = words if L == n else enumerate_words(rotations, L)
        by_len[L] = min(rotation_angle(w) for w in ws)
    fit = max((1.0 / a) ** (1.0 / L) if a > 0 else math.inf for L, a in by_len.items()) if by_len else 0.0
    mx = max(counts) if counts else 0
    return SeparationStats(
        n=n, num_words=len(words), min_angle=min(by_len.values()) if by_len else math.pi,
        min_angle_by_length=by_len, thresholds=thresholds, close_counts=counts,
        max_close_words=mx, safe_scale=safe, fit_constant=fit, ok=mx <= max_allowed,
        sorted_distances=dist,
    )
