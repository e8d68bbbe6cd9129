"""Kernel-norm conditions, cluster operators and delocalization reports on graphs."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import spectral, treeops
from .errors import NoUntemperedSpectrum, OddN
from .graphs import RegularGraph, girth, injectivity_radius
from .tables import to_csv

CONDITION_SLACK = 1.0 + 1e-9


def lp_norm(v, p) -> float:
    """Counting-measure l^p norm; ``p`` may be ``inf`` or the string ``"inf"``."""
    v = np.abs(np.asarray(v))
    p = parse_p(p)
    if math.isinf(p):
        return float(v.max()) if v.size else 0.0
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    top = v.max() if v.size else 0.0
    if top == 0:
        return 0.0
    return float(top * np.sum((v / top) ** p) ** (1.0 / p))


def parse_p(p) -> float:
    if isinstance(p, str):
        return math.inf if p.strip().lower() in ("inf", "infinity", "oo") else float(p)
    return float(p)


def p_label(p) -> str:
    p = parse_p(p)
    return "inf" if math.isinf(p) else f"{p:g}"


def op_norm_1_inf(op: np.ndarray) -> float:
    """L^1 -> L^inf norm under counting measure: the largest kernel entry."""
    return float(np.max(np.abs(op)))


# ---------------------------------------------------------------------------
# cycle condition


def condition_bound(q: int, n: int, delta: float) -> float:
    return CONDITION_SLACK * q ** ((-0.5 + delta) * n)


def admissible_n(norms, q: int, delta: float) -> int:
    """Largest N such that norms[n] <= C q^{(-1/2+delta) n} for every n <= N."""
    N = -1
    for n, value in enumerate(norms):
        if value > condition_bound(q, n, delta):
            break
        N = n
    return max(N, 0)


def sphere_norms(g: RegularGraph, n_max: int) -> list[float]:
    return [op_norm_1_inf(s) for s in treeops.iter_sphere_ops(g, n_max)]


def check_condition(g: RegularGraph, n_max: int, delta: float, norms=None) -> int:
    """Largest admissible N <= n_max for the kernel-decay condition at exponent delta."""
    if norms is None:
        norms = sphere_norms(g, n_max)
    return admissible_n(norms[: n_max + 1], g.q, delta)


def implied_delta(norm: float, q: int, n: int) -> float:
    """Smallest delta for which ||S_n||_{1->inf} <= q^{(-1/2+delta)n}."""
    return 0.5 + math.log(norm, q) / n


# ---------------------------------------------------------------------------
# cosine mass


@dataclass
class CosineMass:
    N: int
    grid_min: float
    argmin_alpha: float
    analytic_bound: float


def cosine_sum(N: int, alpha) -> np.ndarray:
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    n = np.arange(1, N + 1)
    return (np.cos(np.outer(alpha, n)) ** 2).sum(axis=1)


def cosine_mass_bound(N: int) -> float:
    """Lower bound (2N-1)/4 - 1/(4 sin(pi/(2N+1))) on sum_{n<=N} cos^2(n alpha)."""
    return (2 * N - 1) / 4 - 1 / (4 * math.sin(math.pi / (2 * N + 1)))


def cosine_mass(N: int, alpha_grid_size: int | None = None) -> CosineMass:
    if N < 1:
        raise ValueError("N must be >= 1")
    size = 10 * N + 1 if alpha_grid_size is None else int(alpha_grid_size)
    if size < 10 * N:
        raise ValueError(f"alpha grid of {size} points is too coarse for N = {N}")
    alphas = np.linspace(0.0, math.pi, size)
    sums = cosine_sum(N, alphas)
    j = int(np.argmin(sums))
    return CosineMass(N, float(sums[j]), float(alphas[j]), cosine_mass_bound(N))


# ---------------------------------------------------------------------------
# cluster operators


@dataclass
class ClusterOperator:
    N: int
    alpha: float
    projector_epsilon: float
    matrix: np.ndarray

    @property
    def num_terms(self) -> int:
        return self.N // 2


def _check_even(N):
    if N % 2 or N < 2:
        raise OddN(f"N must be even and >= 2, got {N}")


def build_cluster(g: RegularGraph, N: int, alpha: float, epsilon: float = 0.0,
                  spec: spectral.SpectralData | None = None, props=None) -> ClusterOperator:
    """W = sum_{n=1}^{N/2} cos(2n alpha) P_{2n}(T/2) Pi_eps, from propagator matrices."""
    _check_even(N)
    if spec is None:
        spec = spectral.eig_sym(treeops.adjacency_op(g))
    if props is None:
        props = treeops.chebyshev_props(g, N)
    acc = np.zeros((g.num_vertices, g.num_vertices))
    for n in range(1, N // 2 + 1):
        acc += math.cos(2 * n * alpha) * props[2 * n]
    w = acc @ spectral.projector(spec, epsilon).matrix
    return ClusterOperator(N, float(alpha), float(epsilon), w)


def cluster_weights(spec: spectral.SpectralData, N: int, alpha: float, epsilon: float = 0.0) -> np.ndarray:
    """Eigenvalue of W_{N,alpha} on each eigenvector (0 outside the projector)."""
    _check_even(N)
    n = np.arange(1, N // 2 + 1)
    temp = spec.tempered
    cheb = np.where(
        temp[:, None],
        np.cos(np.outer(spec.thetas, 2 * n)),
        np.cosh(np.outer(np.where(temp, 0.0, spec.thetas), 2 * n)),
    )
    w = cheb @ np.cos(2 * n * alpha)
    mask = np.zeros(len(spec), dtype=bool)
    mask[spectral.included(spec, epsilon)] = True
    return np.where(mask, w, 0.0)


def cluster_from_spectrum(spec, N, alpha, epsilon=0.0) -> ClusterOperator:
    w = cluster_weights(spec, N, alpha, epsilon)
    v = spec.eigenvectors
    return ClusterOperator(N, float(alpha), float(epsilon), (v * w) @ v.T)


@dataclass
class SelfAction:
    index: int
    alpha: float
    N: int
    scalar: float            # <psi_j, W psi_j>
    cos_sum: float           # sum_{n<=N/2} cos^2(2 n alpha)
    action_gap: float        # ||W psi_j - scalar psi_j||_2
    floor_terms: float       # 0.3 * (N/2), against the number of terms summed
    floor_N: float           # 0.3 * N, as literally stated
    holds_terms: bool
    holds_N: bool


def cluster_self_action(g: RegularGraph, N: int, j: int, epsilon: float = 0.0,
                        spec: spectral.SpectralData | None = None, props=None) -> SelfAction:
    """Apply W_{N,alpha_j} (built from propagators) to its own tempered eigenvector psi_j.

    With lambda_j = 2 cos(alpha_j) the result is sum_{n<=N/2} cos^2(2 n alpha_j) psi_j.
    The scalar is compared with 0.3 times both N/2 and N.
    """
    if spec is None:
        spec = spectral.eig_sym(treeops.adjacency_op(g))
    if not spec.tempered[j]:
        raise ValueError(f"eigenvalue {j} is untempered; alpha_j is not real")
    alpha = float(spec.thetas[j])
    W = build_cluster(g, N, alpha, epsilon, spec=spec, props=props).matrix
    psi = spec.eigenvectors[:, j]
    w_psi = W @ psi
    scalar = float(psi @ w_psi)
    n = np.arange(1, N // 2 + 1)
    cos_sum = float(np.sum(np.cos(2 * n * alpha) ** 2))
    return SelfAction(
        index=int(j), alpha=alpha, N=int(N), scalar=scalar, cos_sum=cos_sum,
        action_gap=float(np.linalg.norm(w_psi - scalar * psi)),
        floor_terms=0.3 * (N // 2), floor_N=0.3 * N,
        holds_terms=scalar >= 0.3 * (N // 2), holds_N=scalar >= 0.3 * N,
    )


def norm_2_inf(W) -> float:
    """L^2 -> L^inf norm: the largest row 2-norm."""
    W = W.matrix if isinstance(W, ClusterOperator) else np.asarray(W)
    return float(np.max(np.linalg.norm(W, axis=1)))


def norm_2_inf_spectral(spec: spectral.SpectralData, weights: np.ndarray) -> float:
    """Same as ``norm_2_inf`` for W = V diag(weights) V^T, without forming W."""
    diag = (spec.eigenvectors**2) @ (weights**2)
    return float(np.sqrt(diag.max()))


def norm_2_p_lower(W, p, probes: int = 8, rng=None, iters: int = 200) -> float:
    """Attained value of ||Wv||_p / ||v||_2 maximized by nonlinear power iteration.

    Every returned value is achieved by an explicit unit vector, hence a lower
    bound on ||W||_{2->p}. Starts are random unit vectors plus the largest rows.
    """
    W = W.matrix if isinstance(W, ClusterOperator) else np.asarray(W)
    p = parse_p(p)
    rng = np.random.default_rng(rng)
    starts = [rng.standard_normal(W.shape[1]) for _ in range(probes)]
    rows = np.argsort(-np.linalg.norm(W, axis=1))[: max(1, probes // 2)]
    starts += [W[i].copy() for i in rows]
    best = 0.0
    for v in starts:
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        v = v / nv
        for _ in range(iters):
            u = W @ v
            val = lp_norm(u, p)
            best = max(best, val)
            if val == 0:
                break
            if math.isinf(p):
                dual = np.zeros_like(u)
                i = int(np.argmax(np.abs(u)))
                dual[i] = np.sign(u[i])
            else:
                dual = np.sign(u) * (np.abs(u) / val) ** (p - 1)
            nxt = W.T @ dual
            nn = np.linalg.norm(nxt)
            if nn == 0:
                break
            nxt /= nn
            if np.allclose(nxt, v, atol=1e-13, rtol=0):
                break
            v = nxt
        best = max(best, lp_norm(W @ v, p))
    return float(best)


def riesz_thorin(norm_1_inf: float, norm_2_2: float, p) -> float:
    """Interpolated L^{p'} -> L^p bound from the 1->inf and 2->2 norms."""
    p = parse_p(p)
    theta = 0.0 if math.isinf(p) else 2.0 / p
    return norm_1_inf ** (1.0 - theta) * norm_2_2**theta


def epsilon_schedule(p, delta: float) -> float:
    p = parse_p(p)
    frac = 1.0 if math.isinf(p) else 1.0 - 2.0 / p
    return min(0.1, (0.5 - delta) * frac / 4.0)


# ---------------------------------------------------------------------------
# untempered machinery


@dataclass
class DecayProbeResult:
    epsilon: float
    trials: int
    k_values: list[int]
    num_untempered: int
    violations: dict[str, int]
    sup_ratio_max: float
    sup_ratio_min: float
    lambda_eps: dict[int, float]
    min_slack: dict[str, float]

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())


def untempered_decay_probe(g: RegularGraph, epsilon: float, trials: int, rng=None,
                           spec: spectral.SpectralData | None = None, k_max: int | None = None,
                           tol: float = 1e-9) -> DecayProbeResult:
    """Exercise the inequality chain bounding sup norms in the untempered span.

    For each random nonnegative combination f of untempered eigenvectors, with
    x the maximizer of |f| and f' the part of f with nonnegative components at
    x, checks for every k <= k_max:

    * |S_k f'(x)| <= ||K_k(x,.)||_2 ||f'||_2           (Cauchy-Schwarz)
    * S_k f'(x) >= lambda_{eps,k} f'(x)                 (k even)
    * lambda_{eps,k} f'(x) <= ||K_k(x,.)||_2 ||f'||_2   (k even)
    * ||f||_2 <= ||f||_1 and the pruning facts f'(x) >= ||f||_inf, ||f'||_2 <= ||f||_2.
    """
    rng = np.random.default_rng(rng)
    if spec is None:
        spec = spectral.eig_sym(treeops.adjacency_op(g))
    ex = np.flatnonzero(np.abs(spec.eigenvalues) > 2.0 + epsilon + 1e-10)
    if ex.size == 0:
        raise NoUntemperedSpectrum(f"{g.label}: no eigenvalue beyond 2 + {epsilon}")
    if k_max is None:
        k_max = max(2, injectivity_radius(g))
    q = g.q
    ks = list(range(1, k_max + 1))
    sk = treeops.sphere_ops(g, k_max)
    lam_eps = {k: spectral.sphere_eigenvalue(q, 2.0 + epsilon, k) for k in ks}

    V = spec.eigenvectors[:, ex]
    coef = np.abs(rng.standard_normal((ex.size, trials)))
    F = V @ coef
    xs = np.argmax(np.abs(F), axis=0)
    cols = np.arange(trials)
    sgn = np.sign(F[xs, cols])
    sgn[sgn == 0] = 1.0
    coef *= sgn
    F *= sgn
    keep = (V[xs, :].T * coef) >= 0
    Fp = V @ (coef * keep)

    names = ["cauchy_schwarz", "large_action", "combined", "l2_le_l1", "prune_sup", "prune_l2"]
    viol = dict.fromkeys(names, 0)
    slack = dict.fromkeys(names, math.inf)

    def record(name, margin, scale):
        # margin >= 0 means the inequality holds; tol is relative to scale
        viol[name] += int(np.sum(margin < -tol * (1 + np.abs(scale))))
        slack[name] = min(slack[name], float(np.min(margin)))

    n2 = np.linalg.norm(Fp, axis=0)
    fx = Fp[xs, cols]
    for k in ks:
        rows = sk[k][xs, :]
        skf = np.einsum("ij,ji->i", rows, Fp)
        cs = np.linalg.norm(rows, axis=1) * n2
        record("cauchy_schwarz", cs - np.abs(skf), cs)
        if k % 2 == 0:
            record("large_action", skf - lam_eps[k] * fx, np.abs(skf))
            record("combined", cs - lam_eps[k] * fx, cs)
    for arr in (F, Fp):
        l1 = np.abs(arr).sum(axis=0)
        record("l2_le_l1", l1 - np.linalg.norm(arr, axis=0), l1)
    sup = np.abs(F).max(axis=0)
    full2 = np.linalg.norm(F, axis=0)
    record("prune_sup", fx - sup, sup)
    record("prune_l2", full2 - n2, full2)

    ratio = sup / full2
    return DecayProbeResult(
        epsilon=float(epsilon), trials=int(trials), k_values=ks, num_untempered=int(ex.size),
        violations=viol, sup_ratio_max=float(ratio.max()), sup_ratio_min=float(ratio.min()),
        lambda_eps={k: float(v) for k, v in lam_eps.items()}, min_slack=slack,
    )


# ---------------------------------------------------------------------------
# delocalization report


@dataclass
class DelocalizationReport:
    label: str
    q: int
    num_vertices: int
    girth: int
    inj_rad: int
    delta: float
    admissible_N: int
    p_list: list[str]
    n_table: list[dict] = field(default_factory=list)
    eigen_table: list[dict] = field(default_factory=list)
    headline: dict[str, dict] = field(default_factory=dict)
    untempered: dict[str, dict] = field(default_factory=dict)
    interpolation: list[dict] = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def n_table_csv(self) -> str:
        return to_csv(self.n_table, ["n", "norm_1_inf", "implied_delta", "bound", "holds"])

    def eigen_table_csv(self) -> str:
        cols = ["index", "lambda", "tempered"]
        for p in self.p_list:
            cols += [f"norm_{p}", f"ratio_{p}"]
        return to_csv(self.eigen_table, cols)


def default_n_max(g: RegularGraph) -> int:
    return max(2, int(math.ceil(2 * math.log(g.num_vertices, g.q))))


def verify_graph_theorem(g: RegularGraph, p_list, delta: float, n_max: int | None = None,
                         spec: spectral.SpectralData | None = None,
                         N_override: int | None = None, interpolation: bool = True) -> DelocalizationReport:
    """Measure ||psi||_p sqrt(N) / ||psi||_2 for every eigenfunction of T_q."""
    if not g.connected:
        raise ValueError(f"{g.label}: theorem checks need a connected graph")
    q = g.q
    n_max = default_n_max(g) if n_max is None else n_max
    p_vals = [parse_p(p) for p in p_list]
    labels = [p_label(p) for p in p_vals]
    if spec is None:
        spec = spectral.eig_sym(treeops.adjacency_op(g))
    gth = girth(g)
    inj = (gth - 1) // 2

    eps_list = sorted({epsilon_schedule(p, delta) for p in p_vals}) if interpolation else []
    n_rows, interp_rows, norms = [], [], []
    for n, s_n in enumerate(treeops.iter_sphere_ops(g, n_max)):
        nrm = op_norm_1_inf(s_n)
        norms.append(nrm)
        n_rows.append({
            "n": n,
            "norm_1_inf": nrm,
            "implied_delta": implied_delta(nrm, q, n) if n > 0 else 0.0,
            "bound": condition_bound(q, n, delta),
            "holds": bool(nrm <= condition_bound(q, n, delta)),
        })
        for eps in eps_list:
            ex = np.flatnonzero(np.abs(spec.eigenvalues) > 2.0 + eps + 1e-10)
            mu = np.array([spectral.sphere_eigenvalue(q, lam, n) for lam in spec.eigenvalues])
            v = spec.eigenvectors[:, ex]
            snp = s_n - (v * mu[ex]) @ v.T
            inc = np.setdiff1d(np.arange(len(spec)), ex)
            n11 = op_norm_1_inf(snp)
            n22 = float(np.max(np.abs(mu[inc]))) if inc.size else 0.0
            row = {"n": n, "epsilon": eps, "norm_1_inf": n11, "norm_2_2": n22}
            for p, lab in zip(p_vals, labels):
                if epsilon_schedule(p, delta) == eps:
                    row[f"rt_{lab}"] = riesz_thorin(n11, n22, p)
            interp_rows.append(row)
    N = admissible_n(norms, q, delta) if N_override is None else int(N_override)

    vecs = spec.eigenvectors
    n2 = np.linalg.norm(vecs, axis=0)
    eig_rows = []
    norms_p = {lab: np.array([lp_norm(vecs[:, j], p) for j in range(vecs.shape[1])])
               for p, lab in zip(p_vals, labels)}
    for j in range(len(spec)):
        row = {"index": j, "lambda": float(spec.eigenvalues[j]), "tempered": bool(spec.tempered[j])}
        for lab in labels:
            row[f"norm_{lab}"] = float(norms_p[lab][j])
            row[f"ratio_{lab}"] = float(norms_p[lab][j] * math.sqrt(N) / n2[j])
        eig_rows.append(row)

    headline, untemp = {}, {}
    for lab in labels:
        ratios = norms_p[lab] * math.sqrt(N) / n2
        for target, mask in ((headline, spec.tempered), (untemp, ~spec.tempered)):
            idx = np.flatnonzero(mask)
            if idx.size:
                # ties resolve to the smallest index
                j = int(idx[np.argmax(ratios[idx])])
                target[lab] = {"max_ratio": float(ratios[j]), "index": j,
                               "lambda": float(spec.eigenvalues[j])}
    cm = cosine_mass(max(N // 2, 1))
    return DelocalizationReport(
        label=g.label, q=q, num_vertices=g.num_vertices, girth=gth, inj_rad=inj,
        delta=float(delta), admissible_N=N, p_list=labels, n_table=n_rows,
        eigen_table=eig_rows, headline=headline, untempered=untemp,
        interpolation=interp_rows,
        constants={
            "cluster_terms": N // 2,
            # W_{N,alpha} sums N/2 terms; both readings of the 0.3 floor are reported
            "cosine_floor_terms": 0.3 * (N // 2),
            "cosine_floor_N": 0.3 * N,
            "cosine_mass_min": cm.grid_min,
            "cosine_mass_bound": cm.analytic_bound,
            "num_tempered": int(spec.tempered.sum()),
            "num_untempered": int((~spec.tempered).sum()),
            "top_eigenvalue": float(spec.eigenvalues[-1]),
            "epsilon_schedule": {lab: epsilon_schedule(p, delta) for p, lab in zip(p_vals, labels)},
        },
    )
