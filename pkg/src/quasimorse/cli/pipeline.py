"""Stage orchestration: assemble -> find -> index -> certify -> flow -> homology, plus cerami."""
from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from .. import cerami as cer
from .. import homology as hom
from .._rng import substream
from ..critical import deflated_search, make_seeds, newton_refine
from ..errors import (DegenerateSplittingError, EstimationError, NoConvergenceError, PreconditionError,
                      QuasiMorseError)
from ..flow import (containment_report, estimate_epsilon, gradient_like_field, gronwall_radius, integrate,
                    shoot_unstable_sphere, write_csv)
from ..functionals import PsiModel, assemble, fixture
from ..functionals import mesh as meshmod
from ..functionals import nonlinearity
from ..functionals.psi import check_sandwich
from ..nondeg import certify, criterion_check, hyperbolic_from_splitting, initial_delta
from ..spectral import accumulation_check, splitting

STAGES = ("assemble", "find", "index", "certify", "flow", "homology", "cerami")
DEPENDS = {
    "assemble": (),
    "find": ("assemble",),
    "index": ("find",),
    "certify": ("index",),
    "flow": ("certify",),
    "homology": ("flow",),
    "cerami": ("assemble",),
}
MONOTONE_TOL = 1e-9


class StageFailure(QuasiMorseError):
    def __init__(self, stage, message):
        super().__init__(f"stage {stage} failed: {message}")
        self.stage = stage


def resolve(stages):
    """Requested stages plus their dependencies, in pipeline order."""
    need = set()

    def add(s):
        if s not in DEPENDS:
            raise ValueError(f"unknown stage {s!r}; expected one of {list(STAGES)}")
        if s not in need:
            need.add(s)
            for d in DEPENDS[s]:
                add(d)

    for s in stages:
        add(s)
    return [s for s in STAGES if s in need]


def build_functional(cfg):
    if cfg["backend"] == "explicit":
        ex = cfg["explicit"]
        return fixture(ex["name"], order=ex.get("order", 10)), None
    ps = cfg["psi"]
    psi = PsiModel(kind=ps.get("kind", "area-kappa"), p=float(ps["p"]), kappa=float(ps.get("kappa", 1.0)),
                   mu1=ps.get("mu1"), mu2=ps.get("mu2"))
    g = nonlinearity.from_config(cfg["g"]["kind"], cfg["g"].get("params", {}), psi.p)
    m = cfg["mesh"]
    mesh = meshmod.from_config(m["dim"], m["domain"], m["resolution"], cfg["quadrature"]["order"])
    return assemble(psi, g, mesh), g


class Pipeline:
    def __init__(self, cfg, out_dir=None, write_files=True):
        self.cfg = cfg
        self.seed = int(cfg["seed"])
        self.out = Path(out_dir if out_dir is not None else cfg["output"])
        self.write_files = write_files
        self.results = {}
        self.checks = {}
        self.timings = {}
        self.files = []
        self.F = self.g = None
        self.crits = []
        self.splits = {}
        self.ops = {}
        self.deltas = {}
        self.parities = {}

    # -- stages ---------------------------------------------------------
    def stage_assemble(self):
        self.F, self.g = build_functional(self.cfg)
        desc = self.F.describe()
        if self.F.backend == "galerkin":
            psi = self.F.psi
            psi.validate(self.F.mesh.dim)
            rng = substream(self.seed, "sandwich")
            xis = rng.standard_normal((200, self.F.mesh.dim)) * np.logspace(-3, 3, 200)[:, None]
            self.checks["assemble.sandwich"] = check_sandwich(psi, xis) >= -1e-12 * psi.mu2
        return desc

    def stage_find(self):
        sol = self.cfg["solver"]
        seeds = make_seeds(self.F, sol.get("seed_grid") or {})
        self.crits = deflated_search(self.F, seeds, sol["tol"], sol["max_iter"])
        self.checks["find.nonempty"] = bool(self.crits)
        self.checks["find.residuals"] = all(c.residual <= sol["tol"] for c in self.crits)
        return [c.to_dict() for c in self.crits]

    def stage_index(self):
        sp = self.cfg["spectral"]
        out, ok = [], True
        for c in self.crits:
            s = splitting(self.F, c, sp["zero_tol"], sp["rel_tol"])
            self.splits[c.id] = s
            c.morse_index, c.degenerate = s.morse_index, s.degenerate
            res = s.eigen_residual()
            ok &= res <= 1e-8 * max(1.0, float(np.max(np.abs(s.eigenvalues))))
            entry = {"id": c.id, **s.to_dict(), "eigen_residual": res}
            if self.F.backend == "galerkin":
                entry["accumulation_fraction"] = accumulation_check(s, sp["window"])
            out.append(entry)
        self.checks["index.eigen_residual"] = bool(ok)
        return out

    def stage_certify(self):
        nd = self.cfg["nondeg"]
        out = []
        all_pass = True
        for c in self.crits:
            s = self.splits[c.id]
            if s.degenerate:
                refusal = None
                try:
                    hyperbolic_from_splitting(s)
                except DegenerateSplittingError as exc:
                    refusal = str(exc)
                d0 = nd["delta"] or initial_delta(c, self.crits, self.F.ambient_gram())
                crit = criterion_check(self.F, c, s, d0, nd["samples"], self.seed)
                out.append({"id": c.id, "refused": refusal, "criterion": crit.to_dict()})
                all_pass = False
                continue
            L, lyap, crit = certify(self.F, c, s, self.crits, nd["samples"], self.seed, nd["delta"],
                                    nd["max_halvings"])
            self.ops[c.id] = L
            self.deltas[c.id] = lyap.delta
            ok = lyap.passed and crit.passed
            all_pass &= ok
            out.append({"id": c.id, "lyapunov": lyap.to_dict(), "criterion": crit.to_dict()})
        self.checks["certify.all_pass"] = bool(all_pass)
        return out

    def _field(self):
        entries = [(c, self.ops[c.id], self.deltas[c.id]) for c in self.crits if c.id in self.ops]
        return gradient_like_field(self.F, entries, self.cfg["flow"]["profile"])

    def _perturb(self):
        """Seeded relative bump of g; critical points re-refined and re-split."""
        rng = substream(self.seed, "transversality")
        g = self.F.g.perturbed(rng, 1e-6)
        F = self.F.with_g(g)
        tol, it = self.cfg["solver"]["tol"], self.cfg["solver"]["max_iter"]
        sp = self.cfg["spectral"]
        for c in self.crits:
            try:
                new = newton_refine(F, c.coefficients, tol, it)
            except NoConvergenceError as exc:
                raise StageFailure("flow", f"critical point {c.id} lost under perturbation: {exc}") from None
            c.coefficients, c.value, c.residual = new.coefficients, new.value, new.residual
            s = splitting(F, c, sp["zero_tol"], sp["rel_tol"])
            if s.morse_index != c.morse_index or s.degenerate:
                raise StageFailure("flow", f"critical point {c.id} changed type under perturbation")
            self.splits[c.id] = s
            if c.id in self.ops:
                self.ops[c.id] = hyperbolic_from_splitting(s)
        self.F = F
        return {"relative": 1e-6, "factor": g.scale}

    def stage_flow(self):
        fc = self.cfg["flow"]
        norms = [float(np.sqrt(c.coefficients @ self.F.ambient_gram() @ c.coefficients)) for c in self.crits]
        band = fc["band"]
        R = eps = r0 = None
        if band is not None:
            a, b = map(float, band)
            r0 = fc["r0"] or max(1.0, 1.5 * max(norms, default=0.0))
            try:
                eps = estimate_epsilon(self.F, a, b, r0, fc["epsilon_samples"], self.seed)
            except EstimationError as exc:
                raise StageFailure("flow", str(exc)) from None
            R = gronwall_radius(r0, eps, a, b)
            escape = 10.0 * R
        else:
            escape = 1e3 * (1.0 + max(norms, default=0.0))
        retained = [c for c in self.crits if c.id in self.ops]
        if fc["pairs"] == "all":
            pairs = [(h.id, l.id) for h in retained for l in retained if h.morse_index == l.morse_index + 1]
        else:
            pairs = [tuple(p) for p in fc["pairs"]]
        by_id = {c.id: c for c in self.crits}
        his = sorted({h for h, _ in pairs})

        perturbation = None
        attempts = []
        for attempt in range(2):
            V = self._field()
            shots, trajs, warnings = {}, [], []
            for hid in his:
                n = fc["n_shoot"]
                shot = None
                for refine in range(3):
                    sink = []
                    try:
                        shot = shoot_unstable_sphere(self.F, V, by_id[hid], fc["sphere_radius"], n, self.seed,
                                                     fc["horizon"], fc["tol"], escape, sink)
                    except PreconditionError as exc:
                        warnings.append(f"critical point {hid}: {exc}")
                        shot = None
                        break
                    if shot.reliable:
                        break
                    n *= 2
                if shot is not None:
                    shots[hid] = shot
                    trajs.extend((hid, t) for t in sink)
            unreliable = [h for h, s in shots.items() if not s.reliable]
            attempts.append({"unreliable": unreliable, "warnings": warnings})
            can_perturb = fc["perturb"] and self.F.backend == "galerkin" and attempt == 0
            if not unreliable or not can_perturb:
                break
            perturbation = self._perturb()

        counts = []
        self.parities = {}
        for h, l in pairs:
            if h not in shots:
                continue
            if by_id[h].morse_index != by_id[l].morse_index + 1:
                raise StageFailure("flow", f"pair ({h}, {l}) does not have index gap 1")
            k = shots[h].count(l)
            self.parities[(h, l)] = k % 2
            counts.append({"hi": h, "lo": l, "count": k, "parity": k % 2, "reliable": shots[h].reliable,
                           "n_shoot": shots[h].n_shoot, "warnings": list(shots[h].warnings)})

        rng = substream(self.seed, "containment")
        extra = []
        if band is not None:
            M = self.F.ambient_gram()
            C = np.linalg.cholesky(M)
            for _ in range(fc["containment_starts"]):
                z = rng.standard_normal(self.F.N)
                d = np.linalg.solve(C.T, z / np.linalg.norm(z))
                u0 = rng.uniform() ** (1.0 / self.F.N) * r0 * d
                extra.append((None, integrate(V, u0, fc["horizon"], fc["tol"], escape)))
        all_trajs = trajs + extra
        tlist = []
        for k, (hid, t) in enumerate(all_trajs):
            name = f"traj_{k}.csv"
            if self.write_files:
                self.out.mkdir(parents=True, exist_ok=True)
                write_csv(t, self.out / name)
                self.files.append(name)
            tlist.append({"file": name, "from": hid, **t.to_dict(), "f_increase": t.f_increase()})
        worst_increase = max((t.f_increase() for _, t in all_trajs), default=0.0)
        self.checks["flow.monotone"] = worst_increase <= MONOTONE_TOL
        self.checks["flow.reliable"] = all(c["reliable"] for c in counts) and not any(a["warnings"] for a in attempts[-1:])
        out = {
            "field": {"profile": fc["profile"],
                      "radii": {str(nb.cp.id): nb.rho for nb in V.neighborhoods}},
            "escape_radius": escape,
            "orbits": counts,
            "trajectories": tlist,
            "worst_f_increase": worst_increase,
            "perturbation": perturbation,
            "attempts": attempts,
        }
        if band is not None:
            rep = containment_report(self.F, [t for _, t in all_trajs], a, b, r0, eps)
            self.checks["flow.gronwall_contained"] = rep.contained
            out["cerami"] = rep.to_dict()
        return out

    def stage_homology(self):
        P = self.cfg["homology"]["P"]
        retained = [c for c in self.crits if c.id in self.ops]
        try:
            mc = hom.build_morse_complex(retained, self.parities, P)
        except QuasiMorseError as exc:
            raise StageFailure("homology", str(exc)) from None
        summary = hom.homology_summary(mc)
        self.checks["homology.d_squared_zero"] = summary["d_squared_zero"]
        if summary["match"] is not None:
            self.checks["homology.match"] = summary["match"]
        return summary

    def stage_cerami(self):
        if self.F.backend != "galerkin":
            return {"applicable": False, "reason": "growth classes refer to the galerkin nonlinearity"}
        cc = self.cfg["cerami"]
        mesh = self.F.mesh
        length = cc["length"]
        if length is None and mesh.dim == 1:
            length = float(mesh.domain[1] - mesh.domain[0])
        gc = cer.classify_growth(self.F.g, self.F.psi.p, mesh.dim, length, cc["k_max"])
        out = {"applicable": True, **gc.to_dict()}
        if gc.resonant is not None:
            self.checks["cerami.non_resonant"] = not gc.resonant
            out["certification"] = "excluded (resonant)" if gc.resonant else "conditions checked"
        if gc.tag == "superlinear":
            out["superlinear"] = cer.superlinear_check(self.F.g, self.F.psi.p).to_dict()
        return out

    # -- driver ---------------------------------------------------------
    def run(self, stages=STAGES):
        order = resolve(stages)
        if not self.cfg["flow"]["enabled"]:
            order = [s for s in order if s not in ("flow", "homology")]
        for name in order:
            t0 = time.perf_counter()
            try:
                self.results[name] = getattr(self, f"stage_{name}")()
            except StageFailure:
                raise
            except QuasiMorseError as exc:
                raise StageFailure(name, str(exc)) from exc
            finally:
                self.timings[name] = time.perf_counter() - t0
        return self.report()

    def report(self):
        cfg = {k: v for k, v in self.cfg.items() if k != "output"}
        checks = {k: bool(v) for k, v in self.checks.items()}
        return {
            "config": cfg,
            "seed": self.seed,
            "stages": self.results,
            "checks": checks,
            "passed": all(checks.values()),
        }


def counterexample_report(orders=(5, 10, 20)):
    """Nearest nonzero critical point of the truncated sequence functional per order."""
    from ..functionals.explicit import build_truncated, nearest_nonzero_critical

    rows, ok = [], True
    for N in orders:
        F = build_truncated(N)
        pt, dist = nearest_nonzero_critical(N)
        res = float(np.linalg.norm(F.gradient(pt)))
        h0 = F.hessian_diagonal(np.zeros(N))
        good = res <= 1e-12 and abs(np.linalg.norm(pt) - np.pi / N) <= 1e-15
        ok &= good
        rows.append({
            "order": N,
            "distance": dist,
            "expected": np.pi / N,
            "residual": res,
            "hessian_at_origin": [float(x) for x in h0],
            "origin_signature": {"negative": int(np.sum(h0 < 0)), "positive": int(np.sum(h0 > 0))},
            "smallest_hessian_magnitude": float(np.min(np.abs(h0))),
            "verified": bool(good),
        })
    return {"stages": {"counterexample": rows}, "checks": {"counterexample.stationary": bool(ok)}, "passed": bool(ok)}
