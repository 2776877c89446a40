"""Batch scenario runner.

Runs named experiment suites against presets or structure-constant
documents and writes machine-readable reports.  Reports are deterministic:
identical inputs produce byte-identical JSON (fixed iteration orders, no
wall-clock data in the payload; timings live in the .meta.json sidecar).

Exit codes: 0 all contracts passed; 2 schema errors; 3 axiom violations;
4 contract failures (report still written); 5 resource caps.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import actions, coreps, fock, functionals, genfun, linalg, presets
from ._rng import CounterRNG
from .core import FiniteQG, dense_image_report
from .errors import (
    RESOURCE_CAP_ERRORS,
    AxiomViolation,
    HaarNotFound,
    NonUnique,
    NotAMorphism,
    QGWBError,
    SchemaError,
)
from .serialize import load_qg
from .windows import GroupDualWindow

EXPERIMENTS = {}
PRESET_DIR_ENV = "QGWB_PRESET_DIR"


def experiment(name):
    def deco(fn):
        EXPERIMENTS[name] = fn
        return fn
    return deco


def _check(name, value, tol, passed=None):
    value = float(value)
    if passed is None:
        passed = bool(value <= tol)
    return {"name": name, "value": value, "tol": float(tol), "passed": bool(passed)}


def _resolve_parent(spec, radius=None):
    """Preset name, 'NAME r=R' window form, or a document path."""
    spec = str(spec).strip()
    if " r=" in spec:
        name, _, r = spec.rpartition(" r=")
        return presets.load_preset(name.strip(), radius=int(r))
    try:
        return presets.load_preset(spec, radius=radius)
    except SchemaError:
        pass
    candidates = [spec]
    extra = os.environ.get(PRESET_DIR_ENV)
    if extra:
        for root in extra.split(os.pathsep):
            candidates.append(os.path.join(root, spec))
            candidates.append(os.path.join(root, spec + ".json"))
    for path in candidates:
        if os.path.isfile(path):
            return load_qg(path)
    raise SchemaError(f"unknown preset or document {spec!r}")


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

@experiment("axioms")
def _run_axioms(parent, params, tol_scale, seed):
    checks = []
    if isinstance(parent, FiniteQG):
        tol = 1e-9 * tol_scale
        res = parent.validate()
        for name in sorted(res):
            checks.append(_check(f"axiom:{name}", res[name], tol))
        for name in sorted(parent.dual().residuals):
            checks.append(_check(f"dual:{name}", parent.dual().residuals[name], tol))
        checks.append(_check("kac", 0.0 if parent.kac else 1.0, 0.5))
    else:
        checks.append(_check("window:size", parent.size, float("inf"), True))
        checks.append(_check("window:identity_length", parent.lengths[0], 0.0,
                             parent.lengths[0] == 0))
    return {"checks": checks}


@experiment("semigroup")
def _run_semigroup(parent, params, tol_scale, seed):
    checks = []
    if isinstance(parent, FiniteQG):
        grid = params.get("t_grid", [0.1, 0.5, 1.0])
        rng = CounterRNG(seed)
        mu = functionals.vector_state(parent, rng.unit_vector(parent.d))
        lf = 3.0 * (functionals.counit_functional(parent) - mu)
        gen = genfun.validate_generating(lf)
        states = [functionals.semigroup_state(lf, t) for t in grid]
        worst = 0.0
        for i, s in enumerate(grid):
            for j, t in enumerate(grid):
                prod = functionals.convolve(states[i], states[j])
                direct = functionals.semigroup_state(lf, s + t)
                worst = max(worst, float(np.max(np.abs(prod.coeffs - direct.coeffs))))
        checks.append(_check("semigroup_law", worst, 1e-9 * tol_scale))
        state_ok = all(functionals.is_state(s, 1e-9 * tol_scale) for s in states)
        checks.append(_check("members_are_states", 0.0 if state_ok else 1.0, 0.5))
        h = params.get("h", 1e-4)
        rec = functionals.derivative_recovery(lf, h, order=2)
        err = float(np.max(np.abs(rec.coeffs - lf.coeffs)))
        checks.append(_check("derivative_recovery", err, 1e-5 * tol_scale))
    else:
        grid = params.get("t_grid", [0.1, 1.0, 10.0])
        wl = functionals.Functional(
            parent, np.array([float(parent.length(g)) for g in parent.elements]))
        genfun.validate_generating(wl)
        checks.append(_check("generator_valid", 0.0, 0.5, True))
        for t in grid:
            mu_t = functionals.semigroup_state(wl, t)
            gram = functionals.positivity_matrix(mu_t)
            lam = linalg.min_eig(0.5 * (gram + gram.conj().T))
            checks.append(_check(f"gram_min_eig:t={t}", max(0.0, -lam),
                                 1e-9 * tol_scale))
    return {"checks": checks}


@experiment("kazhdan")
def _run_kazhdan(parent, params, tol_scale, seed):
    if not isinstance(parent, FiniteQG):
        raise SchemaError("kazhdan experiment needs a FiniteQG parent")
    checks = []
    nontrivial = [a for a in range(len(parent.block_dims))
                  if a != parent.trivial_block]
    u = coreps.direct_sum(*[coreps.block_corep(parent, a) for a in nontrivial])
    gap_units = coreps.kazhdan_gap(u, coreps.dual_matrix_units(parent))
    checks.append(_check("gap_matrix_units_positive", 0.0 if gap_units > 0 else 1.0, 0.5))
    if parent.key.startswith("dual-Z("):
        n = parent.d
        xg = np.exp(2j * np.pi * np.arange(n) / n)
        gap = coreps.kazhdan_gap(u, [xg])
        expected = 2.0 * math.sin(math.pi / n)
        checks.append(_check("gap_generator_vs_closed_form", abs(gap - expected),
                             1e-9 * tol_scale))
        return {"checks": checks, "gap": float(gap), "expected": expected}
    return {"checks": checks, "gap": float(gap_units)}


def _conjugate_block(parent: FiniteQG, alpha: int) -> int:
    """Index of the block carrying the conjugate irrep, via the dual antipode."""
    q0 = int(parent.block_offsets[alpha])
    col = np.abs(parent.dual().antipode[:, q0])
    q_target = int(np.argmax(col))
    for a, (n, off) in enumerate(zip(parent.block_dims, parent.block_offsets)):
        if off <= q_target < off + n * n:
            return a
    raise AxiomViolation("dual antipode does not permute the blocks")


def _central_index_generator(parent: FiniteQG):
    """Index-weighted central generator, symmetrised over conjugate blocks;
    falls back to a multiple of (counit - haar), which is central and
    conditionally negative definite on every parent."""
    idx = np.arange(len(parent.block_dims), dtype=float)
    idx[parent.trivial_block] = 0.0
    cvals = np.array([0.5 * (idx[a] + idx[_conjugate_block(parent, a)])
                      for a in range(len(parent.block_dims))])
    blocks = [cvals[a] * np.eye(n) for a, n in enumerate(parent.block_dims)]
    try:
        return genfun.validate_generating(functionals.from_blocks(parent, blocks))
    except genfun.NotCND:
        scale = float(len(parent.block_dims))
        lf = scale * (functionals.counit_functional(parent)
                      - functionals.haar_functional(parent))
        return genfun.validate_generating(lf)


@experiment("v_matrices")
def _run_v_matrices(parent, params, tol_scale, seed):
    checks = []
    stage_rows = []
    if isinstance(parent, FiniteQG):
        gen = _central_index_generator(parent)
        triple = genfun.schurmann_triple(gen)
        alpha = int(params.get("alpha", 1 % len(parent.block_dims)))
        beta = int(params.get("beta", 2 % len(parent.block_dims)))
        gammas = list(range(len(parent.block_dims)))
        rows = genfun.triple_form_matrices(gen, alpha, beta, gammas, triple=triple)
        for r in rows:
            stage_rows.append({
                "gamma": int(r["gamma"]),
                "min_eig": r["min_eig"],
                "lower_bound": r["lower_bound"],
                "hermiticity": r["hermiticity"],
                "route_residual": r["route_residual"],
            })
            checks.append(_check(f"hermitian:gamma={r['gamma']}",
                                 r["hermiticity"], 1e-10 * tol_scale))
            checks.append(_check(f"routes_agree:gamma={r['gamma']}",
                                 r["route_residual"], 1e-10 * tol_scale))
            tn = genfun.cocycle_norm_residual(triple, int(r["gamma"]))
            checks.append(_check(f"cocycle_norms:gamma={r['gamma']}", tn,
                                 1e-8 * tol_scale))
    else:
        wl = functionals.Functional(
            parent, np.array([float(parent.length(g)) for g in parent.elements]))
        gen = genfun.validate_generating(wl)
        l_max = int(params.get("l_max", min(parent.radius, 10)))
        e = parent.identity
        gammas = []
        cur = e
        gen_label = parent.elements[1]
        for _ in range(l_max):
            cur = parent.mul(cur, gen_label)
            gammas.append(cur)
        rows = genfun.triple_form_matrices(gen, e, e, gammas)
        for l, r in enumerate(rows, start=1):
            stage_rows.append({"gamma": repr(r["gamma"]), "min_eig": r["min_eig"],
                               "lower_bound": r["lower_bound"]})
            checks.append(_check(f"min_eig_exact:l={l}", abs(r["min_eig"] - l),
                                 1e-12 * tol_scale))
    return {"checks": checks, "per_stage": stage_rows}


@experiment("theorem69")
def _run_unbounded_growth(parent, params, tol_scale, seed):
    eps = float(params.get("eps", 0.5))
    n_windows = int(params.get("n_windows", 8))
    report, gen = genfun.unbounded_generator_on_z(
        lambda k, m: math.exp(-abs(m) / k), eps=eps, n_windows=n_windows)
    checks = []
    stage_rows = []
    for st in report["stages"]:
        ok = st["witness_norm"] >= st["witness_bound"] - 1e-12
        checks.append(_check(f"witness_bound:l={st['l']}",
                             max(0.0, st["witness_bound"] - st["witness_norm"]),
                             1e-9 * tol_scale, ok))
        stage_rows.append({"l": st["l"], "k": st["k"],
                           "witness": int(st["witness"]),
                           "witness_norm": st["witness_norm"],
                           "witness_bound": st["witness_bound"]})
    checks.append(_check("stages_completed", len(report["stages"]),
                         float("inf"), len(report["stages"]) >= n_windows))
    checks.append(_check("generator_valid_on_windows", 0.0, 0.5, True))
    return {"checks": checks, "per_stage": stage_rows}


@experiment("lemma74")
def _run_pair_bounds(parent, params, tol_scale, seed):
    if not isinstance(parent, GroupDualWindow):
        raise SchemaError("this experiment needs a window parent")
    t = float(params.get("t", 1.0))
    l_max = int(params.get("l_max", 3))
    wl = functionals.Functional(
        parent, np.array([float(parent.length(g)) for g in parent.elements]))
    gen = genfun.validate_generating(wl)
    e = parent.identity
    gen_label = parent.elements[1]
    gammas, cur = [], e
    for _ in range(l_max):
        cur = parent.mul(cur, gen_label)
        if cur is None:
            break
        gammas.append(cur)
    rows = genfun.pair_invariance_bounds(gen, t, [(e, e)], gammas)
    checks = []
    stage_rows = []
    prev = -np.inf
    for l, r in enumerate(rows, start=1):
        expected = 1.0 - 2.0 * math.exp(-2.0 * t * l)
        stage_rows.append({"l": l, "gamma": repr(r["gamma"]),
                           "bound": r["bound"], "expected": expected})
        checks.append(_check(f"bound_closed_form:l={l}",
                             abs(r["bound"] - expected), 1e-12 * tol_scale))
        checks.append(_check(f"bound_increasing:l={l}",
                             0.0 if r["bound"] > prev else 1.0, 0.5))
        prev = r["bound"]
    return {"checks": checks, "per_stage": stage_rows}


def grading_action(parent: FiniteQG) -> actions.Action:
    """The degree action of the two-element dual on M_2."""
    if parent.d != 2 or not parent.key.startswith("dual-Z(2"):
        raise SchemaError("the grading action lives over dual-Z(2)")
    alpha = np.zeros((2, 2, 2, 2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            alpha[(a - b) % 2, a, b, a, b] = 1.0
    return actions.Action(parent, [2], alpha, invariant_state=np.eye(2) / 2)


def delta_action(parent: FiniteQG) -> actions.Action:
    """Self-action by the coproduct for pointwise (diagonal) parents."""
    d = parent.d
    diag = np.zeros((d, d, d), dtype=complex)
    for i in range(d):
        diag[i, i, i] = 1.0
    if np.linalg.norm(parent.mult - diag) > 1e-12:
        raise SchemaError("the coproduct self-action needs a pointwise parent")
    alpha = np.zeros((d, d, d, d, d), dtype=complex)
    nz = np.argwhere(np.abs(parent.comult) > 1e-12)
    for (g, a, b) in nz:
        alpha[a, b, b, g, g] += parent.comult[g, a, b]
    theta = np.diag(parent.haar).astype(complex)
    return actions.Action(parent, [1] * d, alpha, invariant_state=theta)


@experiment("action_suite")
def _run_action_suite(parent, params, tol_scale, seed):
    if not isinstance(parent, FiniteQG):
        raise SchemaError("action suite needs a FiniteQG parent")
    checks = []
    acts = []
    if parent.key.startswith("dual-Z(2"):
        acts.append(("grading", grading_action(parent)))
    try:
        acts.append(("coproduct", delta_action(parent)))
    except SchemaError:
        pass
    # corepresentation-induced actions on B(K) for the small blocks
    for a, n in enumerate(parent.block_dims):
        if n >= 2 or (n == 1 and a != parent.trivial_block and len(acts) == 0):
            acts.append((f"conjugation:block={a}",
                         actions.action_from_corep(coreps.block_corep(parent, a))))
            break
    for name, act in acts:
        impl = act.implement()
        checks.append(_check(f"{name}:implementation", impl.implementation_residual,
                             1e-9 * tol_scale))
        checks.append(_check(f"{name}:condition_r",
                             0.0 if impl.condition_r else 1.0, 0.5))
        fixed, expectation = actions.fixed_point_expectation(act)
        checks.append(_check(f"{name}:fixed_dim", len(fixed), float("inf"), True))
        if parent.kac:
            basis = [np.eye(parent.d)[i] for i in range(min(parent.d, 2))]
            ok = actions.cone_preservation_check(act, basis)
            checks.append(_check(f"{name}:cone", 0.0 if ok else 1.0, 0.5))
        rep = actions.spectral_gap_report(act)
        checks.append(_check(f"{name}:gap_consistent",
                             0.0 if rep["consistent"] else 1.0, 0.5))
    # the implementation-comparison identity on the largest block corep
    big = int(np.argmax(parent.block_dims))
    ok, resid = actions.v_vbar_implementation_check(coreps.block_corep(parent, big))
    checks.append(_check("conjugate_pair_implementation",
                         resid if np.isfinite(resid) else 1.0, 1e-8 * tol_scale, ok))
    return {"checks": checks}


@experiment("fock_suite")
def _run_fock_suite(parent, params, tol_scale, seed):
    checks = []
    depth = int(params.get("depth", 8))
    f2 = fock.TruncatedFock(2, depth)
    zeta = np.array([1.0, 0.0])
    s = f2.s_operator(zeta)
    moments = f2.vacuum_moments(s, [2, 4, 6, 8])
    catalan = {2: 1.0, 4: 2.0, 6: 5.0, 8: 14.0}
    for k in sorted(catalan):
        checks.append(_check(f"catalan_m{k}", abs(moments[k] - catalan[k]),
                             1e-12 * tol_scale))
    s1, s2 = f2.s_operator(np.array([1.0, 0.0])), f2.s_operator(np.array([0.0, 1.0]))
    words = []
    import itertools as it
    for length in range(1, 5):
        for combo in it.product([s1, s2], repeat=length):
            words.append(list(combo))
    checks.append(_check("vacuum_traciality", fock.trace_check(f2, words),
                         1e-9 * tol_scale))
    if isinstance(parent, FiniteQG):
        # GNS of the dimension-weighted invariant dual state, lifted
        w = np.zeros(parent.d)
        for n, off in zip(parent.block_dims, parent.block_offsets):
            for i in range(n):
                w[off + i * n + i] = n / parent.d
        corep, omega, jm = coreps.gns(parent, w)
        if jm is None:
            raise AxiomViolation("dual trace state is not conjugation-invariant")
        fk = fock.TruncatedFock(corep.space_dim, 2, j_conj=jm)
        lifted = fock.lift_rep(fk, corep)
        act = fock.induced_action(lifted)
        omegas = [np.eye(parent.d)[i] for i in range(parent.d)]
        # a J-real unit vector in the corep space
        v = np.ones(corep.space_dim, dtype=complex)
        v = v + fk.apply_j(v)
        v = v / np.linalg.norm(v)
        checks.append(_check("generator_intertwining",
                             act.generator_intertwining_residual(v, omegas),
                             1e-9 * tol_scale))
        sv = fk.s_operator(v)
        checks.append(_check("vacuum_invariance",
                             act.vacuum_invariance_residual([[sv]]),
                             1e-8 * tol_scale))
        checks.append(_check("word_multiplicativity",
                             act.multiplicativity_residual([sv]),
                             1e-9 * tol_scale))
    return {"checks": checks}


@experiment("dense_image")
def _run_dense_image(parent, params, tol_scale, seed):
    kp = presets.load_preset("kac-paljutkin")
    ident = np.eye(kp.d)
    rep1 = dense_image_report(kp, kp, ident)
    z4, z2 = presets.load_preset("fn-Z(4)"), presets.load_preset("fn-Z(2)")
    restrict = np.zeros((2, 4))
    restrict[0, 0] = 1.0
    restrict[1, 2] = 1.0
    rep2 = dense_image_report(z4, z2, restrict)
    pullback = np.zeros((4, 2))
    pullback[0, 0] = pullback[2, 0] = 1.0
    pullback[1, 1] = pullback[3, 1] = 1.0
    rep3 = dense_image_report(z2, z4, pullback)
    checks = []
    for name, rep, expected in [("identity", rep1, True),
                                ("restriction", rep2, True),
                                ("pullback", rep3, False)]:
        verdicts = [rep["injective_dual"], rep["injective_dual_reduced"],
                    rep["bicharacter_span"], rep["surjective"]]
        checks.append(_check(f"{name}:verdict", 0.0 if rep["dense_image"] == expected else 1.0, 0.5))
        checks.append(_check(f"{name}:conditions_agree",
                             0.0 if len(set(verdicts)) == 1 else 1.0, 0.5))
    return {"checks": checks}


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

def run_scenario(scenario, out_dir="."):
    """Execute one scenario; returns (exit_code, report_path or None)."""
    try:
        name = scenario["name"]
        experiment_id = scenario["experiment"]
        parent_spec = scenario.get("parent", scenario.get("preset"))
        params = dict(scenario.get("parameters", {}))
        tol_scale = float(scenario.get("tol_scale", 1.0))
        seed = int(scenario.get("seed", 0))
        if experiment_id not in EXPERIMENTS:
            raise SchemaError(f"unknown experiment {experiment_id!r}")
        needs_parent = experiment_id not in ("theorem69", "dense_image", "fock_suite")
        parent = None
        if parent_spec is not None:
            parent = _resolve_parent(parent_spec, radius=params.get("radius"))
        elif needs_parent:
            raise SchemaError("scenario needs a 'preset' or 'parent'")
    except (SchemaError, KeyError, TypeError, ValueError) as exc:
        sys.stderr.write(f"schema error: {exc}\n")
        return 2, None

    started = time.time()
    try:
        body = EXPERIMENTS[experiment_id](parent, params, tol_scale, seed)
        failure = None
    except RESOURCE_CAP_ERRORS as exc:
        body, failure = {"checks": []}, (5, exc)
    except (AxiomViolation, HaarNotFound, NonUnique, NotAMorphism) as exc:
        body, failure = {"checks": []}, (3, exc)
    except SchemaError as exc:
        sys.stderr.write(f"schema error: {exc}\n")
        return 2, None
    except QGWBError as exc:
        body, failure = {"checks": []}, (4, exc)
    elapsed = time.time() - started

    report = {
        "name": name,
        "experiment": experiment_id,
        "parent_id": getattr(parent, "key", None),
        "parameters": params,
        "tol_scale": tol_scale,
        "seed": seed,
        "checks": body.get("checks", []),
        "per_stage": body.get("per_stage", []),
    }
    for key, value in body.items():
        if key not in report:
            report[key] = value
    if failure is not None:
        report["error"] = {"type": type(failure[1]).__name__,
                           "message": str(failure[1])}
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, f"{name}.report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=1, separators=(",", ": "))
        fh.write("\n")
    with open(os.path.join(out_dir, f"{name}.report.csv"), "w",
              encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check", "value", "tol", "passed"])
        for c in report["checks"]:
            writer.writerow([c["name"], repr(c["value"]), repr(c["tol"]), c["passed"]])
        if report["per_stage"]:
            cols = sorted({k for row in report["per_stage"] for k in row})
            writer.writerow([])
            writer.writerow(cols)
            for row in report["per_stage"]:
                writer.writerow([repr(row.get(c, "")) for c in cols])
    with open(os.path.join(out_dir, f"{name}.meta.json"), "w", encoding="utf-8") as fh:
        json.dump({"elapsed_seconds": elapsed, "version": "0.1.0"}, fh, sort_keys=True)
        fh.write("\n")
    if failure is not None:
        sys.stderr.write(f"{type(failure[1]).__name__}: {failure[1]}\n")
        return failure[0], report_path
    if not all(c["passed"] for c in report["checks"]):
        return 4, report_path
    return 0, report_path


def list_presets_table():
    return presets.preset_table()


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="qgwb", description="finite quantum group workbench runner")
    parser.add_argument("batch", nargs="?", help="scenario JSON file (object or array)")
    parser.add_argument("--list-presets", action="store_true")
    parser.add_argument("--preset", help="preset name or document path")
    parser.add_argument("--experiment", help="experiment id")
    parser.add_argument("--param", action="append", default=[],
                        metavar="K=V", help="experiment parameter")
    parser.add_argument("--name", default="scenario")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--tol-scale", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if args.list_presets:
        rows = list_presets_table()
        widths = (max(len(r["name"]) for r in rows), 6)
        print(f"{'name':<{widths[0]}}  kind    dim  kac    max_block")
        for r in rows:
            dim = "-" if r["dim"] is None else r["dim"]
            print(f"{r['name']:<{widths[0]}}  {r['kind']:<6}  {dim!s:<3}  "
                  f"{str(r['kac']).lower():<5}  {r['max_block_dim']}")
        return 0

    scenarios = []
    if args.batch:
        try:
            with open(args.batch, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            sys.stderr.write(f"schema error: {exc}\n")
            return 2
        scenarios = doc if isinstance(doc, list) else [doc]
    elif args.experiment:
        params = {}
        for kv in args.param:
            k, _, v = kv.partition("=")
            try:
                params[k] = json.loads(v)
            except json.JSONDecodeError:
                params[k] = v
        scenarios = [{
            "name": args.name,
            "preset": args.preset,
            "experiment": args.experiment,
            "parameters": params,
            "tol_scale": args.tol_scale,
            "seed": args.seed,
        }]
    else:
        parser.print_usage()
        return 2

    worst = 0
    for sc in scenarios:
        code, _ = run_scenario(sc, out_dir=args.out)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
