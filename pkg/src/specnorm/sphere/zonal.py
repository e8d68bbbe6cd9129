"""Zonal kernel pieces, radial L^r norms and the word-averaged kernel."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import QuadratureFailure
from .harmonics import SphereGrid, zonal, zonal_l2_sq
from .rotations import RotationSet, enumerate_words

RTOL = 1e-6


def window_scales(s: int) -> tuple[float, float]:
    """Cutoff is 1 on [0, s^{-1/2}] and 0 beyond s^{-1/4}."""
    return s ** -0.5, s ** -0.25


def smoothstep_window(t, a: float, b: float) -> np.ndarray:
    """1 for t <= a, 0 for t >= b, quintic smoothstep in between."""
    t = np.asarray(t, dtype=np.float64)
    u = np.clip((t - a) / (b - a), 0.0, 1.0)
    return 1.0 - u**3 * (10.0 - 15.0 * u + 6.0 * u * u)


def zonal_pieces(s: int, t) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(Z1, Z2, Z3, Z): near, middle (residual), antipodal pieces and the whole kernel."""
    a, b = window_scales(s)
    z = zonal(s, t)
    z1 = z * smoothstep_window(t, a, b)
    z3 = z * smoothstep_window(math.pi - np.asarray(t), a, b)
    return z1, z - z1 - z3, z3, z


# ---------------------------------------------------------------------------
# adaptive composite Gauss-Legendre on an interval


def _rule(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


_LO = _rule(20)
_HI = _rule(30)


def _panel_sums(f, lo, hi, rule):
    x, w = rule
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return (vals * w[None, :]).sum(axis=1) * half


def adaptive_integrate(f, breaks, rtol: float = RTOL, max_rounds: int = 40,
                       max_panels: int = 2_000_000) -> float:
    """Integral of a vectorized f over [breaks[0], breaks[-1]].

    Panels whose 20/30-point Gauss-Legendre disagreement exceeds their share of
    the tolerance are bisected until the summed estimate meets ``rtol``.
    """
    edges = np.unique(np.asarray(breaks, dtype=np.float64))
    lo, hi = edges[:-1], edges[1:]
    done = 0.0
    done_err = 0.0
    for _ in range(max_rounds):
        coarse = _panel_sums(f, lo, hi, _LO)
        fine = _panel_sums(f, lo, hi, _HI)
        err = np.abs(fine - coarse)
        total = done + fine.sum()
        scale = max(abs(total), np.finfo(float).tiny)
        if done_err + err.sum() <= rtol * scale:
            return float(total)
        share = rtol * scale * (hi - lo) / (edges[-1] - edges[0])
        bad = err > share
        done += fine[~bad].sum()
        done_err += err[~bad].sum()
        lo, hi = lo[bad], hi[bad]
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        if lo.size > max_panels:
            break
    raise QuadratureFailure(f"adaptive quadrature did not reach rtol={rtol}")


def radial_norm(fn, r: float, breaks, rtol: float = RTOL) -> float:
    """(2 pi int_0^pi |fn(t)|^r sin t dt)^{1/r} for a zonal function fn."""
    if math.isinf(r):
        grid = np.linspace(breaks[0], breaks[-1], 200_001)
        return float(np.max(np.abs(fn(grid))))
    val = adaptive_integrate(lambda t: np.abs(fn(t)) ** r * np.sin(t), breaks, rtol)
    return float((2 * math.pi * val) ** (1.0 / r))


def _breaks(s: int, extra=()) -> np.ndarray:
    a, b = window_scales(s)
    base = np.linspace(0.0, math.pi, 4 * (s + 1) + 1)
    return np.unique(np.concatenate([base, [a, b, math.pi - a, math.pi - b], list(extra)]))


@dataclass
class SplitNorms:
    s: int
    p: float
    near: float
    middle: float
    antipodal: float
    full: float
    tail: float        # sharp restriction to [s^{-1/2}, pi - s^{-1/2}]
    tail_near: float   # sharp restriction to [s^{-1/2}, pi]

    def as_row(self) -> dict:
        return dict(self.__dict__)


def kernel_split_norms(s: int, p: float, rtol: float = RTOL) -> SplitNorms:
    """L^{p/2} norms of the split zonal kernel, plus the sharp tail norms."""
    if not p > 4:
        raise ValueError("p must exceed 4")
    r = p / 2.0
    a, _ = window_scales(s)
    br = _breaks(s)

    def piece(k):
        return lambda t: zonal_pieces(s, t)[k]

    near, middle, anti, full = (radial_norm(piece(k), r, br, rtol) for k in range(4))

    def restricted(lo, hi):
        return lambda t: np.where((t >= lo) & (t <= hi), zonal(s, t), 0.0)

    tail = radial_norm(restricted(a, math.pi - a), r, br, rtol)
    tail_near = radial_norm(restricted(a, math.pi), r, br, rtol)
    return SplitNorms(s, float(p), near, middle, anti, full, tail, tail_near)


def zonal_l1(s: int, rtol: float = RTOL) -> float:
    return radial_norm(lambda t: zonal(s, t), 1.0, _breaks(s), rtol)


def zonal_l2(s: int, rtol: float = 1e-10) -> float:
    return radial_norm(lambda t: zonal(s, t), 2.0, _breaks(s), rtol)


def zonal_bound_constant(s: int, num: int = 20001) -> float:
    """max over t in [1/s, pi/2] of |Z_s(t)| / sqrt(s/t)."""
    t = np.linspace(1.0 / s, math.pi / 2, num)
    return float(np.max(np.abs(zonal(s, t)) / np.sqrt(s / t)))


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


# ---------------------------------------------------------------------------
# kernel averaged over words of length n


@dataclass
class AveragedKernelRow:
    y: tuple
    near: float
    middle: float
    antipodal: float
    full: float
    near_prediction: float        # 2 q^{-n/2} q^{2n/p} ||Z1||_{p/2}
    near_scale: float             # q^{n(4-p)/(2p)} s^{1-4/p}
    middle_scale: float           # q^{n/2} s^{3/4-2/p}
    row_l1: float                 # ||K(., y)||_1
    copy_mass: float              # q^{-n/2} sum_g ||Z_s(d(g., y))||_1

    @property
    def near_ratio(self) -> float:
        return self.near / self.near_prediction if self.near_prediction else math.nan


@dataclass
class AveragedKernelReport:
    s: int
    n: int
    p: float
    q: int
    num_words: int
    zonal_l1: float
    split: SplitNorms
    rows: list

    @property
    def mass_prediction_words(self) -> float:
        """Each reduced word contributes one copy: (q+1) q^{n-1} q^{-n/2} ||Z||_1."""
        return self.num_words * self.q ** (-self.n / 2) * self.zonal_l1

    @property
    def mass_prediction_plain(self) -> float:
        return self.q ** (self.n / 2) * self.zonal_l1


def _probe_grid(s: int, p: float) -> SphereGrid:
    deg = int(math.ceil((s + 8) * p / 2)) + 8
    return SphereGrid.exact_for(deg)


def averaged_kernel_probe(rot: RotationSet, s: int, n: int, p: float, samples, grid: SphereGrid | None = None,
                          copy_mass: bool = True) -> AveragedKernelReport:
    """Split norms in x of K(x, y) = q^{-n/2} sum_{|g|=n} Z_s(d(gx, y)) at sample points y.

    Uses d(gx, y) = d(x, g^{-1} y), so each word contributes a zonal copy
    centred at g^{-1} y, and integrates on a product Gauss grid.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    samples = samples / np.linalg.norm(samples, axis=1, keepdims=True)
    words = enumerate_words(rot, n)
    mats = np.stack([w.matrix() for w in words])
    q = rot.q
    if grid is None:
        grid = _probe_grid(s, p)
    X = np.ascontiguousarray(grid.points())
    w = grid.weights().ravel()
    a, b = window_scales(s)
    r = p / 2.0
    split = kernel_split_norms(s, p)
    zl1 = zonal_l1(s)
    norm = q ** (-n / 2)
    rows = []
    for y in samples:
        centres = np.ascontiguousarray(np.einsum("wji,j->wi", mats, y))  # g^T y = g^{-1} y
        cols = norm * kernels.zonal_window_sums(int(s), X, centres, float(a), float(b))
        full, near, middle, anti = (float((w @ np.abs(cols[:, k]) ** r) ** (1 / r)) for k in range(4))
        row_l1 = float(w @ np.abs(cols[:, 0]))
        mass = math.nan
        if copy_mass:
            mass = 0.0
            for c in centres:
                one = kernels.zonal_window_sums(int(s), X, np.ascontiguousarray(c[None, :]), float(a), float(b))
                mass += float(w @ np.abs(one[:, 0]))
            mass *= norm
        rows.append(AveragedKernelRow(
            y=tuple(map(float, y)), near=near, middle=middle, antipodal=anti, full=full,
            near_prediction=2 * norm * q ** (2 * n / p) * split.near,
            near_scale=q ** (n * (4 - p) / (2 * p)) * s ** (1 - 4 / p),
            middle_scale=q ** (n / 2) * s ** (0.75 - 2 / p),
            row_l1=row_l1, copy_mass=mass,
        ))
    return AveragedKernelReport(s, n, float(p), q, len(words), zl1, split, rows)


def zonal_l2_identity_gap(s: int) -> float:
    return abs(zonal_l2(s) ** 2 - zonal_l2_sq(s))

