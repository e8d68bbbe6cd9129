"""``specnorm`` command line: config-driven runs that write reports, tables and plots.

    specnorm <mode> --config <file> [--out <dir>] [--seed <u64>]
    specnorm graph-report --graph <file|spec> --p 4,8,inf --delta 0.25
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, graphbounds, graphs, spectral, treeops
from .config import (
    MODES,
    ExperimentConfig,
    config_from_dict,
    derive_int,
    load_config,
    parse_p_list,
    thread_count,
)
from .errors import ConfigError, ResourceBudgetExceeded, SpecnormError
from .tables import CSV_SCHEMA_VERSION, dumps, to_csv

MAX_VERTICES = 5000
MAX_DEGREE_S = 1000
DEFAULT_GRAPH = "random_regular:n=200,d=4"


@dataclass
class RunManifest:
    config_hash: str
    tool_version: str
    csv_schema_version: int
    stage_seconds: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


class StageError(SpecnormError):
    def __init__(self, stage, exc):
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")
        self.stage = stage
        self.cause = exc


class Runner:
    def __init__(self, cfg: ExperimentConfig, out_dir: Path, dump_ops=()):
        self.cfg = cfg
        self.out = out_dir
        self.dump_ops = list(dump_ops)
        self.report: dict = {"config": cfg.content_dict(), "checks": []}
        self.manifest = RunManifest(cfg.hash(), __version__, CSV_SCHEMA_VERSION)

    # -- bookkeeping -------------------------------------------------------

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text)
        return path

    def check(self, stage: str, name: str, value, limit, ok: bool) -> None:
        entry = {"stage": stage, "check": name, "value": value, "limit": limit, "ok": bool(ok)}
        self.report["checks"].append(entry)
        if not ok:
            self.manifest.failures.append(entry)

    def stage(self, name, fn):
        t0 = time.perf_counter()
        try:
            fn()
        except (ConfigError, ResourceBudgetExceeded):
            raise
        except SpecnormError as exc:
            raise StageError(name, exc) from exc
        finally:
            self.manifest.stage_seconds[name] = round(time.perf_counter() - t0, 3)

    def run(self) -> RunManifest:
        self.out.mkdir(parents=True, exist_ok=True)
        mode = self.cfg.mode
        if mode in ("tree_check", "full"):
            self.stage("tree", self.tree_stage)
        if mode in ("graph_report", "full"):
            self.stage("graph", self.graph_stage)
        if mode in ("sphere_report", "full"):
            self.stage("sphere", self.sphere_stage)
        self.report["failures"] = self.manifest.failures
        self.write("report.json", dumps(self.report))
        self.finish_manifest()
        return self.manifest

    def finish_manifest(self):
        files = {}
        for path in sorted(self.out.iterdir()):
            if path.name == "manifest.json" or not path.is_file():
                continue
            data = path.read_bytes()
            files[path.name] = {"sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}
        self.manifest.files = files
        self.write("manifest.json", dumps(asdict(self.manifest)))

    # -- stages ------------------------------------------------------------

    def tree_stage(self):
        sec = self.cfg.tree
        rows = []
        for q in sec.q:
            for n in range(2, sec.n_max + 1, 2):
                dev = treeops.tree_kernel_check(q, n)
                radial = treeops.radial_chebyshev_delta(q, n)
                closed = treeops.tree_kernel_closed_form(q, n, np.arange(radial.size))
                rows.append({"q": q, "n": n, "deviation": dev,
                             "radial_deviation": float(np.max(np.abs(radial - closed)))})
        self.write("tree_kernel.csv", to_csv(rows, ["q", "n", "deviation", "radial_deviation"]))
        worst = max((r["deviation"] for r in rows), default=0.0)
        self.check("tree", "tree_kernel_max_deviation", worst, sec.tolerance, worst <= sec.tolerance)
        self.report["tree"] = {"rows": rows, "max_deviation": worst}

    def _graph(self, i, spec_arg):
        seed = derive_int(self.cfg.seed, f"graph:{i}")
        path = Path(spec_arg)
        if not path.exists():
            bspec = graphs.parse_graph_spec(spec_arg, seed=seed)
            n = bspec.params.get("n")
            if n is not None and int(n) > MAX_VERTICES:
                raise ResourceBudgetExceeded(f"|G| = {n} exceeds {MAX_VERTICES}")
            g = graphs.build_graph(bspec)
        else:
            g = graphs.load_edge_list(path)
        if g.num_vertices > MAX_VERTICES:
            raise ResourceBudgetExceeded(f"|G| = {g.num_vertices} exceeds {MAX_VERTICES}")
        return g

    def graph_stage(self):
        sec = self.cfg.graph
        specs = sec.specs or [DEFAULT_GRAPH]
        summaries = []
        self.report["graphs"] = []
        for i, arg in enumerate(specs):
            g = self._graph(i, arg)
            summaries.append(self._one_graph(i, g, dump=(i == 0)))
        labels = [graphbounds.p_label(p) for p in sec.p]
        cols = ["index", "label", "num_vertices", "degree", "girth", "inj_rad", "admissible_N"]
        cols += [f"max_ratio_{lab}" for lab in labels]
        self.write("graph_summary.csv", to_csv(summaries, cols))
        if not sec.p:
            self.manifest.notes.append("graph plots skipped: empty p list")
            return
        from .plots import ratio_vs_size_plot

        sizes = [r["num_vertices"] for r in summaries]
        series = {f"p={lab}": [r[f"max_ratio_{lab}"] for r in summaries] for lab in labels}
        ratio_vs_size_plot(self.out / "graph_ratio_vs_size.svg", sizes, series,
                           "max tempered ratio ||psi||_p sqrt(N) / ||psi||_2")

    def _one_graph(self, i, g, dump):
        sec = self.cfg.graph
        tol = sec.tolerance
        tag = f"graph{i}"
        n_cap = max(2, math.ceil(2 * math.log(g.num_vertices) / math.log(g.q)))
        n_max = sec.n_max if sec.n_max is not None else graphbounds.default_n_max(g)
        if n_max > n_cap:
            self.manifest.notes.append(f"{tag}: n_max {n_max} capped at 2 log_q|G| = {n_cap}")
            n_max = n_cap
        spec = spectral.eig_sym(treeops.adjacency_op(g))
        rep = graphbounds.verify_graph_theorem(g, sec.p, sec.delta, n_max=n_max, spec=spec,
                                               N_override=sec.N)
        self.write(f"{tag}_spectrum.csv", spec.to_csv())
        self.write(f"{tag}_n_table.csv", rep.n_table_csv())
        self.write(f"{tag}_eigen_table.csv", rep.eigen_table_csv())

        res = float(np.max(spectral.residuals(treeops.adjacency_op(g), spec)))
        self.check(tag, "eigen_residual", res, tol, res <= tol)

        law_n = min(n_max, 6)
        law = spectral.sn_eigenvalue_check(spec, g.q, treeops.iter_sphere_ops(g, law_n), tol=tol)
        law_rows = [asdict(r) for r in law]
        self.write(f"{tag}_eigenvalue_law.csv", to_csv(
            law_rows, ["n", "measured_constant", "dev_unit", "dev_corrected", "dev_fitted", "matches"]))
        worst_law = max(r.dev_corrected for r in law)
        self.check(tag, "sphere_eigenvalue_law", worst_law, tol, worst_law <= tol)

        ident_n = sec.identity_n - sec.identity_n % 2
        ident = treeops.chebyshev_sphere_decomposition_check(g, max(2, ident_n))
        self.check(tag, "chebyshev_sphere_identity", ident, 1e-10, ident <= 1e-10)

        eps = sec.epsilon if sec.epsilon is not None else min(
            (graphbounds.epsilon_schedule(p, sec.delta) for p in sec.p), default=0.0)
        probe = None
        try:
            probe = graphbounds.untempered_decay_probe(
                g, eps, sec.probe_trials, rng=self.cfg.rng(f"probe:{i}"), spec=spec)
        except SpecnormError as exc:
            self.manifest.notes.append(f"{tag}: untempered probe skipped ({exc})")
        if probe is not None:
            self.check(tag, "untempered_probe_violations", probe.total_violations, 0,
                       probe.total_violations == 0)

        if dump:
            self._dump_ops(g, spec, rep)

        labels = rep.p_list
        summary = {"index": i, "label": g.label, "num_vertices": g.num_vertices, "degree": g.degree,
                   "girth": rep.girth, "inj_rad": rep.inj_rad, "admissible_N": rep.admissible_N}
        for lab in labels:
            summary[f"max_ratio_{lab}"] = rep.headline.get(lab, {}).get("max_ratio", float("nan"))
        body = rep.to_dict()
        body.pop("eigen_table")
        body["eigenvalue_law"] = law_rows
        body["eigenvalues"] = spec.eigenvalues.tolist() if g.num_vertices <= 64 else None
        body["chebyshev_identity_gap"] = ident
        body["eigen_residual"] = res
        body["untempered_probe"] = None if probe is None else asdict(probe)
        self.report["graphs"].append(body)
        return summary

    def _dump_ops(self, g, spec, rep):
        for name in self.dump_ops:
            key = name.strip()
            kind, idx = key[:1].upper(), key[1:]
            if kind == "A" and not idx:
                op = g.adjacency_matrix()
            elif kind == "T" and not idx:
                op = treeops.adjacency_op(g)
            elif kind in "SPN" and idx.isdigit():
                n = int(idx)
                if kind == "S":
                    op = treeops.sphere_ops(g, n)[n]
                elif kind == "P":
                    op = treeops.chebyshev_props(g, n)[n]
                else:
                    op = treeops.nbw_count_ops(g, n)[n]
            else:
                raise ConfigError(f"--dump-op: unknown operator {name!r} (use A, T, S<n>, P<n>, N<n>)")
            lines = [",".join(f"{v:.17g}" for v in row) for row in op]
            self.write(f"op_{key}.csv", "\n".join(lines) + "\n")

    def sphere_stage(self):
        from .plots import loglog_fit_plot, p_tag
        from .sphere import harmonics, rotations, zonal
        from .sphere.report import verify_sphere_theorem

        sec = self.cfg.sphere
        tol = sec.tolerance
        big = max([*sec.s, *sec.kernel_s, sec.reproduce_s, 0])
        if big > MAX_DEGREE_S:
            raise ResourceBudgetExceeded(f"degree s = {big} exceeds {MAX_DEGREE_S}")
        rot = (rotations.default_rotation_set() if sec.rotations == "default"
               else rotations.load_rotation_set(sec.rotations))
        out = {"rotations": {"label": rot.label, "M": rot.M, "q": rot.q, "generators": rot.to_strings()}}

        # reproducing property and its cross-degree counterpart
        s0 = sec.reproduce_s
        dev = harmonics.reproduce_check(s0)
        cross = harmonics.reproduce_check(s0, s_prime=max(s0 - 1, 0)) if s0 > 0 else 0.0
        out["reproduce"] = {"s": s0, "deviation": dev, "cross_degree": cross}
        self.check("sphere", "reproducing_property", dev, tol, dev <= tol)
        self.check("sphere", "cross_degree_annihilation", cross, tol, cross <= tol)

        # representation checks on random words of the generators
        s_rep = min(max(sec.s or [10]), 100)
        rng = self.cfg.rng("sphere:wigner")
        words = rotations.enumerate_words(rot, 3)
        hom, uni = 0.0, 0.0
        for _ in range(10):
            a, b = (words[k].matrix() for k in rng.integers(len(words), size=2))
            Da, Db, Dab = (rotations.wigner_D(s_rep, m) for m in (a, b, a @ b))
            hom = max(hom, float(np.max(np.abs(Dab - Da @ Db))))
            uni = max(uni, float(np.max(np.abs(Da @ Da.conj().T - np.eye(Da.shape[0])))))
        out["wigner"] = {"s": s_rep, "homomorphism": hom, "unitarity": uni}
        self.check("sphere", "wigner_homomorphism", hom, 1e-8, hom <= 1e-8)
        self.check("sphere", "wigner_unitarity", uni, 1e-10, uni <= 1e-10)

        # word separation
        # generic points plus both ends of every generator axis, where powers of that generator stay put
        poles = [s * np.array(rotations.exact_axis(w), dtype=float)
                 for w in rotations.enumerate_words(rot, 1) for s in (1, -1)]
        pts = np.vstack([rng.normal(size=(sec.separation_points, 3)), *poles])
        sep_rows = []
        for L in range(1, sec.word_length + 1):
            ws = rotations.enumerate_words(rot, L)
            distinct = len({(w.numerators, w.denominator) for w in ws})
            st = rotations.separation_stats(rot, L, pts, [sec.separation_threshold])
            sep_rows.append({"length": L, "num_words": len(ws), "distinct": distinct,
                             "expected": 2 * rot.M * (2 * rot.M - 1) ** (L - 1),
                             "min_angle": st.min_angle_by_length[L],
                             "max_close_words": st.max_close_words})
            self.check("sphere", f"words_distinct_L{L}", distinct, len(ws), distinct == len(ws))
            self.check("sphere", f"separation_L{L}", st.max_close_words, 2, st.ok)
        self.write("separation.csv", to_csv(sep_rows, list(sep_rows[0]) if sep_rows else ["length"]))
        out["separation"] = sep_rows

        # stabilizers of word axes, probed empirically
        stab = rotations.stabilizer_probe(rot, axis_length=min(3, sec.word_length), n=sec.word_length)
        stab_rows = [{"axis_word": r.axis_word, "num_fixers": len(r.fixers),
                      "num_expected": len(r.expected), "cyclic": r.ok} for r in stab]
        self.write("stabilizers.csv", to_csv(stab_rows, ["axis_word", "num_fixers", "num_expected", "cyclic"]))
        bad = [r.axis_word for r in stab if not r.ok]
        self.check("sphere", "stabilizers_cyclic", bad, [], not bad)
        out["stabilizers"] = [asdict(r) for r in stab]

        # zonal kernel splitting and exponent fits
        krows = []
        for p in sec.kernel_p:
            for s in sec.kernel_s:
                krows.append(zonal.kernel_split_norms(s, p).as_row())
        kcols = ["s", "p", "near", "middle", "antipodal", "full", "tail", "tail_near"]
        self.write("kernel_norms.csv", to_csv(krows, kcols))
        slope_rows = []
        if len(sec.kernel_s) >= 2:
            for p in sec.kernel_p:
                rows = [r for r in krows if r["p"] == p]
                xs = [r["s"] for r in rows]
                full = zonal.loglog_slope(xs, [r["full"] for r in rows])
                tail = zonal.loglog_slope(xs, [r["tail"] for r in rows])
                slope_rows.append({"p": p, "full_slope": full, "full_target": 1 - 4 / p,
                                   "tail_slope": tail, "tail_target": 0.75 - 2 / p})
                st = sec.slope_tolerance
                self.check("sphere", f"kernel_full_slope_p{p:g}", full, [1 - 4 / p, st],
                           abs(full - (1 - 4 / p)) <= st)
                self.check("sphere", f"kernel_tail_slope_p{p:g}", tail, [0.75 - 2 / p, st],
                           abs(tail - (0.75 - 2 / p)) <= st)
                loglog_fit_plot(self.out / f"kernel_fit_p{p_tag(p)}.svg", xs,
                                {"full": [r["full"] for r in rows], "tail": [r["tail"] for r in rows]},
                                f"zonal kernel L^{p / 2:g} norms", "s", "norm",
                                reference=("1-4/p", 1 - 4 / p))
        self.write("kernel_slopes.csv", to_csv(
            slope_rows, ["p", "full_slope", "full_target", "tail_slope", "tail_target"]))
        out["kernel"] = {"rows": krows, "slopes": slope_rows}

        # joint eigenfunctions against the zonal curve
        rep = verify_sphere_theorem(rot, sec.s, sec.p, threads=thread_count())
        table = rep.table()
        cols = ["s", "p", "max_joint_norm", "argmax_eigenvalue", "joint_ratio", "joint_ratio_log",
                "zonal_norm", "zonal_ratio", "zonal_ratio_log", "below_zonal"]
        self.write("sphere_norms.csv", to_csv(table, cols))
        for info in rep.spaces:
            self.check("sphere", f"averaging_hermitian_s{info.s}", info.hermitian_gap, 1e-10,
                       info.hermitian_gap <= 1e-10)
            self.check("sphere", f"joint_eigen_residual_s{info.s}", info.eigen_residual, 1e-9,
                       info.eigen_residual <= 1e-9)
        for row in table:
            if row["p"] > 2:
                self.check("sphere", f"joint_below_zonal_s{row['s']}_p{p_tag(row['p'])}",
                           [row["joint_ratio"], row["zonal_ratio"]], "joint < zonal", row["below_zonal"])
        out["theorem"] = {"rows": table, "spaces": [asdict(i) for i in rep.spaces]}
        if not sec.p:
            self.manifest.notes.append("sphere plots skipped: empty p list")
        elif len(sec.s) < 3:
            self.manifest.notes.append("sphere ratio plots skipped: fewer than 3 degrees")
        else:
            for p in sec.p:
                rows = [r for r in table if r["p"] == p]
                xs = [r["s"] for r in rows]
                expo = 0.5 - (0 if math.isinf(p) else 2 / p)
                loglog_fit_plot(self.out / f"sphere_norms_p{p_tag(p)}.svg", xs,
                                {"joint max": [r["max_joint_norm"] for r in rows],
                                 "zonal": [r["zonal_norm"] for r in rows]},
                                f"||psi_s||_{p_tag(p)} over an averaging eigenbasis", "s", "norm",
                                reference=("1/2-2/p", expo))
        self.report["sphere"] = out


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specnorm", description=__doc__.splitlines()[0])
    ap.add_argument("mode", help="graph-report | tree-check | sphere-report | full")
    ap.add_argument("--config", help="TOML config file")
    ap.add_argument("--out", help="output directory (overrides the config)")
    ap.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides the config)")
    ap.add_argument("--graph", action="append", help="edge-list file or spec string; repeatable")
    ap.add_argument("--p", help="comma-separated exponents, e.g. 4,8,inf")
    ap.add_argument("--delta", type=float)
    ap.add_argument("--dump-op", help="comma-separated operators to export for the first graph: "
                                      "A, T, S<n>, P<n>, N<n>")
    return ap


def make_config(args) -> ExperimentConfig:
    mode = args.mode.replace("-", "_")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {args.mode!r}; expected one of {', '.join(MODES)}")
    if args.config:
        cfg = load_config(args.config)
        data = cfg.to_dict()
        base = Path(args.config).parent
    else:
        data, base = {}, Path.cwd()
    data["mode"] = mode
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out:
        data["out"] = args.out
    graph = data.setdefault("graph", {})
    if args.graph:
        graph["specs"] = args.graph
    if args.p is not None:
        parsed = parse_p_list(args.p)
        if mode == "sphere_report":
            data.setdefault("sphere", {})["p"] = parsed
        else:
            graph["p"] = parsed
    if args.delta is not None:
        graph["delta"] = args.delta
    if "specs" in graph:
        graph["spec"] = graph.pop("specs")
    return config_from_dict(_restore_inf(data), base_dir=base, source=args.config)


def _restore_inf(data):
    if isinstance(data, dict):
        return {k: _restore_inf(v) for k, v in data.items()}
    if isinstance(data, list):
        return [math.inf if v == "inf" else _restore_inf(v) for v in data]
    return data


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        dump = [s for s in (args.dump_op or "").split(",") if s.strip()]
        runner = Runner(cfg, Path(cfg.out), dump)
        manifest = runner.run()
    except (ConfigError, ResourceBudgetExceeded, StageError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    if manifest.ok:
        print(f"ok: {len(runner.report['checks'])} checks passed; outputs in {cfg.out}")
        return 0
    print(dumps({"failures": manifest.failures}), file=sys.stderr, end="")
    return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
