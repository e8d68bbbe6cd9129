"""Joint-eigenfunction norms against the zonal comparison curve."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .harmonics import lp_norms_many
from .rotations import RotationSet, build_averaging, default_rotation_set, joint_eigenbasis


def baseline(s: int, p: float) -> float:
    """s^{1/2 - 2/p}."""
    return s ** (0.5 - (0.0 if math.isinf(p) else 2.0 / p))


@dataclass
class SphereNormRow:
    s: int
    p: float
    max_joint_norm: float
    argmax_eigenvalue: float
    joint_ratio: float          # max_joint_norm / s^{1/2-2/p}
    joint_ratio_log: float      # ... / (s^{1/2-2/p} / sqrt(log s))
    zonal_norm: float
    zonal_ratio: float
    zonal_ratio_log: float

    @property
    def below_zonal(self) -> bool:
        return self.joint_ratio < self.zonal_ratio


@dataclass
class SphereSpaceInfo:
    s: int
    dim: int
    hermitian_gap: float
    spectral_radius: float
    spectral_bound: float
    eigen_residual: float
    orthonormality_gap: float
    num_tempered: int


@dataclass
class SphereTheoremReport:
    rotation_label: str
    q: int
    s_list: list
    p_list: list
    rows: list = field(default_factory=list)
    spaces: list = field(default_factory=list)

    def table(self):
        return [
            dict(s=r.s, p=r.p, max_joint_norm=r.max_joint_norm, argmax_eigenvalue=r.argmax_eigenvalue,
                 joint_ratio=r.joint_ratio, joint_ratio_log=r.joint_ratio_log, zonal_norm=r.zonal_norm,
                 zonal_ratio=r.zonal_ratio, zonal_ratio_log=r.zonal_ratio_log, below_zonal=r.below_zonal)
            for r in self.rows
        ]


def _one_degree(s: int, rot: RotationSet, p_list):
    space = build_averaging(s, rot)
    basis = joint_eigenbasis(space)
    A = space.averaging
    V = basis.vectors
    info = SphereSpaceInfo(
        s=s, dim=space.dim,
        hermitian_gap=float(np.max(np.abs(A - A.conj().T))),
        spectral_radius=float(np.max(np.abs(basis.eigenvalues))),
        spectral_bound=(rot.q + 1) / math.sqrt(rot.q),
        eigen_residual=basis.residual,
        orthonormality_gap=float(np.max(np.abs(V.conj().T @ V - np.eye(space.dim)))),
        num_tempered=int(np.sum(basis.tempered)),
    )
    zonal_coeffs = np.zeros(space.dim)
    zonal_coeffs[s] = 1.0  # Z_s(d(., north pole)) / ||Z_s||_2 = Y_s^0
    rows = []
    for p in p_list:
        refine = "top" if math.isinf(p) else False
        norms = lp_norms_many(V, p, refine=refine)
        zn = float(lp_norms_many(zonal_coeffs, p, refine=True)[0])
        k = int(np.argmax(norms))
        base = baseline(s, p)
        log_fac = math.sqrt(math.log(s)) if s > 1 else math.nan
        rows.append(SphereNormRow(
            s=s, p=float(p), max_joint_norm=float(norms[k]), argmax_eigenvalue=float(basis.eigenvalues[k]),
            joint_ratio=float(norms[k]) / base, joint_ratio_log=float(norms[k]) / base * log_fac,
            zonal_norm=zn, zonal_ratio=zn / base, zonal_ratio_log=zn / base * log_fac,
        ))
    return info, rows


def verify_sphere_theorem(rot: RotationSet | None, s_list, p_list, threads: int = 1) -> SphereTheoremReport:
    """Max over an eigenbasis of the averaging operator of ||psi_s||_p, per (s, p).

    Degrees are independent and mapped over a thread pool of size ``threads``.
    """
    rot = rot or default_rotation_set()
    s_list = sorted(int(s) for s in s_list)
    p_list = [float(p) for p in p_list]
    report = SphereTheoremReport(rot.label, rot.q, s_list, p_list)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda s: _one_degree(s, rot, p_list), s_list))
    for info, rows in results:
        report.spaces.append(info)
        report.rows.extend(rows)
    return report
