"""Legendre functions, spherical harmonics of a fixed degree, and sphere quadrature.

Complex basis Y_s^m for m = -s..s with the Condon-Shortley phase,
normalized to unit L^2 norm against surface measure (total area 4 pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from .. import kernels
from ..errors import ResolutionTooLow

BASIS_CONVENTION = {
    "order": "m = -s..s",
    "phase": "Condon-Shortley",
    "normalization": "orthonormal on the unit sphere (area 4 pi)",
    "azimuth": "Y_s^m(theta, phi) = Pbar_s^m(cos theta) exp(i m phi)",
}


def legendre(s: int, x) -> np.ndarray:
    """P_s(x) by the upward three-term recursion."""
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))
    return kernels.legendre(int(s), x.ravel()).reshape(x.shape)


def zonal(s: int, t) -> np.ndarray:
    """Reproducing kernel of degree s as a function of geodesic distance t."""
    return (2 * s + 1) / (4 * math.pi) * legendre(s, np.cos(t))


def zonal_l2_sq(s: int) -> float:
    return (2 * s + 1) / (4 * math.pi)


def to_xyz(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def to_angles(xyz):
    xyz = np.asarray(xyz, dtype=np.float64)
    theta = np.arccos(np.clip(xyz[..., 2], -1.0, 1.0))
    phi = np.arctan2(xyz[..., 1], xyz[..., 0])
    return theta, phi


def assoc_table(s: int, cos_theta) -> np.ndarray:
    """Normalized associated Legendre factors Pbar_s^m, m = 0..s; shape (n, s+1)."""
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(cos_theta, dtype=np.float64)))
    return kernels.assoc_legendre_table(int(s), x)


def _signed_table(s: int, cos_theta) -> np.ndarray:
    """Polar factors for m = -s..s: Pbar^{|m|} times (-1)^m for negative m."""
    tab = assoc_table(s, cos_theta)
    m = np.arange(-s, s + 1)
    sign = np.where((m < 0) & (np.abs(m) % 2 == 1), -1.0, 1.0)
    return tab[:, np.abs(m)] * sign


def sph_harm_matrix(s: int, points) -> np.ndarray:
    """Y_s^m at each point (rows) for m = -s..s (columns)."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    theta, phi = to_angles(points)
    m = np.arange(-s, s + 1)
    return _signed_table(s, np.cos(theta)) * np.exp(1j * np.outer(phi, m))


def evaluate(s: int, coeffs, points) -> np.ndarray:
    """Value of sum_m c_m Y_s^m at the given points."""
    return sph_harm_matrix(s, points) @ np.asarray(coeffs)


def real_basis_transform(s: int) -> np.ndarray:
    """Unitary U with (real harmonics) = U @ (complex harmonics), rows m = -s..s."""
    dim = 2 * s + 1
    U = np.zeros((dim, dim), dtype=complex)
    r2 = 1 / math.sqrt(2)
    for m in range(-s, s + 1):
        i = m + s
        if m == 0:
            U[i, s] = 1.0
        elif m > 0:
            U[i, s - m] = r2
            U[i, s + m] = r2 * (-1) ** m
        else:
            a = -m
            U[i, s - a] = 1j * r2
            U[i, s + a] = -1j * r2 * (-1) ** a
    return U


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre in cos(theta) times equispaced azimuth.

    Integrates exactly every spherical polynomial of degree
    <= min(2 n_theta - 1, n_phi - 1).
    """

    n_theta: int
    n_phi: int

    @cached_property
    def _gl(self):
        return np.polynomial.legendre.leggauss(self.n_theta)

    @property
    def cos_theta(self) -> np.ndarray:
        return self._gl[0]

    @property
    def theta(self) -> np.ndarray:
        return np.arccos(self._gl[0])

    @property
    def theta_weights(self) -> np.ndarray:
        return self._gl[1]

    @property
    def phi(self) -> np.ndarray:
        return 2 * math.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def exact_degree(self) -> int:
        return min(2 * self.n_theta - 1, self.n_phi - 1)

    def weights(self) -> np.ndarray:
        """Quadrature weights, shape (n_theta, n_phi); they sum to 4 pi."""
        return np.outer(self.theta_weights, np.full(self.n_phi, 2 * math.pi / self.n_phi))

    def points(self) -> np.ndarray:
        """Cartesian nodes, shape (n_theta * n_phi, 3), theta-major."""
        th, ph = np.meshgrid(self.theta, self.phi, indexing="ij")
        return to_xyz(th, ph).reshape(-1, 3)

    @classmethod
    def exact_for(cls, degree: int) -> "SphereGrid":
        return cls(degree // 2 + 1, degree + 1)

    @classmethod
    def for_norm(cls, s: int, p) -> "SphereGrid":
        """Smallest grid ``lp_norm_sphere`` accepts for degree s and exponent p."""
        n_theta, n_phi = required_resolution(s, p)
        return cls(n_theta, n_phi)


def required_resolution(s: int, p) -> tuple[int, int]:
    p = float(p)
    if math.isinf(p):
        # dense enough that the grid maximum is within a few percent before polishing
        return 4 * s + 4, 8 * s + 8
    n_theta = s * max(2, math.ceil(p / 2)) + 2
    return n_theta, max(2 * n_theta, math.ceil(p) * s + 1)


def grid_values(s: int, coeffs, grid: SphereGrid) -> np.ndarray:
    """sum_m c_m Y_s^m on the grid, shape (n_theta, n_phi), via an azimuthal FFT."""
    if grid.n_phi < 2 * s + 1:
        raise ResolutionTooLow(f"n_phi = {grid.n_phi} < 2s+1 = {2 * s + 1}")
    coeffs = np.asarray(coeffs)
    polar = _signed_table(s, grid.cos_theta) * coeffs
    spec = np.zeros((grid.n_theta, grid.n_phi), dtype=complex)
    m = np.arange(-s, s + 1)
    spec[:, m % grid.n_phi] = polar
    return np.fft.ifft(spec, axis=1) * grid.n_phi


def _abs_pow(v2: np.ndarray, p: float) -> np.ndarray:
    """|psi|^p from |psi|^2, by repeated squaring when p/2 is an integer."""
    half = p / 2
    if half == int(half) and half >= 1:
        k = int(half)
        out, base = None, v2
        while k:
            if k & 1:
                out = base if out is None else out * base
            k >>= 1
            if k:
                base = base * base
        return out
    return v2 ** half


def _check_resolution(s, p, grid):
    need_theta, need_phi = required_resolution(s, p)
    if grid.n_theta < need_theta or grid.n_phi < min(need_phi, 2 * grid.n_theta):
        raise ResolutionTooLow(
            f"grid {grid.n_theta}x{grid.n_phi} too coarse for s={s}, p={p} "
            f"(need n_theta >= {need_theta})"
        )


def lp_norms_many(vectors, p, grid: SphereGrid | None = None, refine=True,
                  chunk_bytes: int = 64 << 20) -> np.ndarray:
    """L^p norms of every column of ``vectors`` (coefficients in the m = -s..s basis).

    For p = inf, ``refine=True`` polishes every column's grid maximum and
    ``refine="top"`` only those within 10% of the largest one, which is
    enough when just the maximum over columns is wanted.
    """
    V = np.asarray(vectors, dtype=complex)
    if V.ndim == 1:
        V = V[:, None]
    s = (V.shape[0] - 1) // 2
    p = float(p)
    if grid is None:
        grid = SphereGrid.for_norm(s, p)
    _check_resolution(s, p, grid)
    K = V.shape[1]
    polar = _signed_table(s, grid.cos_theta)
    m_idx = np.arange(-s, s + 1) % grid.n_phi
    wt = grid.theta_weights * (2 * math.pi / grid.n_phi)
    rows = max(1, chunk_bytes // (16 * grid.n_phi * K))
    acc = np.zeros(K)
    best = np.full(K, -1.0)
    where = np.zeros((K, 2), dtype=np.int64)
    for i0 in range(0, grid.n_theta, rows):
        i1 = min(grid.n_theta, i0 + rows)
        spec = np.zeros((i1 - i0, K, grid.n_phi), dtype=complex)
        spec[:, :, m_idx] = (polar[i0:i1, None, :] * V.T[None, :, :])
        vals = np.fft.ifft(spec, axis=2) * grid.n_phi
        v2 = vals.real**2 + vals.imag**2
        if math.isinf(p):
            flat = v2.transpose(1, 0, 2).reshape(K, -1)
            j = np.argmax(flat, axis=1)
            top = flat[np.arange(K), j]
            upd = top > best
            best[upd] = top[upd]
            where[upd, 0] = i0 + j[upd] // grid.n_phi
            where[upd, 1] = j[upd] % grid.n_phi
        else:
            acc += np.einsum("i,ikj->k", wt[i0:i1], _abs_pow(v2, p))
    if not math.isinf(p):
        return acc ** (1.0 / p)
    out = np.sqrt(best)
    if refine:
        todo = np.flatnonzero(out >= 0.9 * out.max()) if refine == "top" else range(K)
        for k in todo:
            out[k] = max(out[k], _polish_max(s, V[:, k], grid.theta[where[k, 0]], grid.phi[where[k, 1]]))
    return out


def lp_norm_sphere(coeffs, p, grid: SphereGrid | None = None, s: int | None = None,
                   refine: bool = True) -> float:
    """(integral |psi|^p d sigma)^{1/p} for psi = sum_m c_m Y_s^m.

    For p = inf the grid maximum is polished by a local search started at the
    best grid point.
    """
    coeffs = np.asarray(coeffs)
    if s is not None and coeffs.size != 2 * s + 1:
        raise ValueError(f"expected {2 * s + 1} coefficients for s={s}")
    return float(lp_norms_many(coeffs, p, grid, refine)[0])


def _polish_max(s, coeffs, theta0, phi0) -> float:
    def neg(x):
        return -float(np.abs(evaluate(s, coeffs, to_xyz(x[0], x[1])[None, :])[0]))

    res = minimize(neg, x0=[theta0, phi0], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400})
    return -float(res.fun)


def reproduce_check(s: int, grid: SphereGrid | None = None, s_prime: int | None = None,
                    max_points: int = 256, rng=0) -> float:
    """Max |Z_s * Y - expected| over basis harmonics Y and sampled grid points.

    With ``s_prime`` given, Y ranges over degree s_prime and the expected value
    is Y itself when s_prime == s and 0 otherwise.
    """
    sp_ = s if s_prime is None else s_prime
    if grid is None:
        grid = SphereGrid.exact_for(s + sp_)
    elif grid.exact_degree < s + sp_:
        raise ResolutionTooLow(f"grid exact to degree {grid.exact_degree} < {s + sp_}")
    pts = grid.points()
    w = grid.weights().ravel()
    rng = np.random.default_rng(rng)
    idx = np.arange(len(pts))
    if len(idx) > max_points:
        idx = np.sort(rng.choice(len(pts), size=max_points, replace=False))
    x = pts[idx]
    dots = np.clip(x @ pts.T, -1.0, 1.0)
    Z = (2 * s + 1) / (4 * math.pi) * legendre(s, dots)
    Y = sph_harm_matrix(sp_, pts)
    conv = Z @ (Y * w[:, None])
    expect = Y[idx] if sp_ == s else 0.0
    return float(np.max(np.abs(conv - expect)))
