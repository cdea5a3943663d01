"""Command-line front end.

Subcommands::

    smmsgeom invariants  --config problem.cfg [--out report.txt]
    smmsgeom expand      --config problem.cfg [--order N]
    smmsgeom obstruction --config problem.cfg
    smmsgeom poincare    --config problem.cfg [--order N]
    smmsgeom verify      --config problem.cfg | --catalog NAME

Common flags: --config PATH, --catalog NAME, --order N, --points K,
--seed S, --tol X, --out PATH.  Reports are deterministic key-value
text (identical inputs give byte-identical output apart from the
trailing timings block); the exit status is 0 exactly when every check
passed.  `verify --corrupt-coefficient K,I,J,EPS` is a test hook that
perturbs one solved coefficient to demonstrate check sensitivity.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from . import invariants as inv
from .ambient import AmbientMetric, order_report
from .catalog import EntryRejected, load_entry, standard_catalog
from .config import ConfigError, Report, load_config
from .expansion import (Branch, ConsistencyError, OrderError, expand,
                        obstruction)
from .invariants import ValidationError, curvature_scale
from .poincare import cone_identity_check, poincare_residual, to_poincare

__all__ = ["main"]


def _parser():
    p = argparse.ArgumentParser(
        prog="smmsgeom",
        description="weighted curvature invariants and ambient expansions "
                    "of smooth metric measure spaces")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_text in [
            ("invariants", "evaluate the weighted invariants at sample points"),
            ("expand", "run the order-by-order deformation solver"),
            ("obstruction", "compute the obstruction tensor (even d+m)"),
            ("poincare", "conformally compact form and its residuals"),
            ("verify", "run the full residual suite; nonzero exit on failure")]:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="problem configuration file")
        sp.add_argument("--catalog", help="named catalog entry "
                        f"({', '.join(sorted(standard_catalog()))})")
        sp.add_argument("--order", type=int, help="deformation order override")
        sp.add_argument("--points", type=int, help="sample point count override")
        sp.add_argument("--seed", type=int, help="sampling seed override")
        sp.add_argument("--tol", type=float, help="residual tolerance override")
        sp.add_argument("--out", help="write the report to this path")
        if name == "verify":
            sp.add_argument("--corrupt-coefficient", metavar="K,I,J,EPS",
                            help="test hook: perturb coefficient K at (I,J)")
    return p


class _Problem:
    """Resolved inputs: a space, solver order, samples, tolerances."""

    def __init__(self, args):
        self.catalog_entry = None
        if args.config and args.catalog:
            raise ConfigError("give either --config or --catalog, not both")
        if args.config:
            cfg = load_config(args.config)
            self.space = cfg.space()
            self.order = args.order or cfg.order
            self.points_n = args.points or cfg.points
            self.seed = cfg.seed if args.seed is None else args.seed
            self.tolerances = dict(cfg.tolerances)
            self.label = args.config
        elif args.catalog:
            self.catalog_entry = load_entry(args.catalog)
            self.space = self.catalog_entry.space
            self.order = args.order or 3
            self.points_n = args.points or 10
            self.seed = 0 if args.seed is None else args.seed
            self.tolerances = {}
            self.label = f"catalog:{args.catalog}"
        else:
            raise ConfigError("one of --config or --catalog is required")
        if args.tol is not None:
            self.tolerances["residual"] = args.tol
        self.points = self.space.sample(self.points_n, self.seed)
        self.scale = max(curvature_scale(self.space, self.points), 1.0)

    def tol(self, name, default):
        return float(self.tolerances.get(name, default))


def _echo(report, prob):
    report.put("config.label", prob.label)
    report.put("config.dimension", prob.space.dim)
    report.put("config.m", float(prob.space.m))
    report.put("config.mu", float(prob.space.mu))
    report.put("config.order", prob.order)
    report.put("config.points", prob.points_n)
    report.put("config.seed", prob.seed)
    report.put("scale", prob.scale)


def _put_tensor(report, key, values):
    arr = np.asarray(values)
    for idx in np.ndindex(arr.shape):
        report.put(f"{key}.{''.join(str(i) for i in idx)}", float(arr[idx]))


def cmd_invariants(args, report) -> int:
    prob = _Problem(args)
    _echo(report, prob)
    s = prob.space
    w = inv.weighted_invariants(s)
    plain_scalar = inv.scalar(s.g)
    bianchi = inv.bianchi_residual(s)
    tol = prob.tol("residual", 1e-9)
    worst_bianchi = 0.0
    for n, p in enumerate(prob.points):
        key = f"point{n}"
        _put_tensor(report, f"{key}.coords", list(p))
        _put_tensor(report, f"{key}.ricci_phi", w.ricci_phi.matrix_values(p))
        report.put(f"{key}.scalar", plain_scalar.value(p))
        report.put(f"{key}.scalar_phi", w.scalar_phi.value(p))
        report.put(f"{key}.f_phi", w.f_phi.value(p))
        _put_tensor(report, f"{key}.schouten", w.schouten.matrix_values(p))
        report.put(f"{key}.schouten_scalar", w.schouten_scalar.value(p))
        report.put(f"{key}.y_phi", w.y_phi.value(p))
        report.put(f"{key}.weyl_norm",
                   float(np.max(np.abs(w.weyl.values(p)))))
        report.put(f"{key}.cotton_norm",
                   float(np.max(np.abs(w.cotton.values(p)))))
        if w.bach is not None:
            _put_tensor(report, f"{key}.bach", w.bach.matrix_values(p))
        worst_bianchi = max(worst_bianchi,
                            max(abs(r.value(p)) for r in bianchi))
    report.put_check("bianchi_residual", worst_bianchi,
                     prob.tol("bianchi", 1e-8) * prob.scale)
    report.put_check("trace_identity", _trace_identity_residual(s, w, prob.points),
                     tol * prob.scale)
    return 0 if report.ok else 1


def _trace_identity_residual(s, w, points) -> float:
    worst = 0.0
    for p in points:
        gm = s.g.matrix_values(p)
        tr = float(np.trace(np.linalg.inv(gm) @ w.ricci_phi.matrix_values(p)))
        want = tr - float(s.m) / s.f.value(p) ** 2 * w.f_phi.value(p)
        worst = max(worst, abs(w.scalar_phi.value(p) - want))
    return worst


def _expansion_for(prob):
    return expand(prob.space, prob.order, check_points=prob.points)


def cmd_expand(args, report) -> int:
    prob = _Problem(args)
    _echo(report, prob)
    e = _expansion_for(prob)
    report.put("branch", e.branch.value)
    for n, note in enumerate(e.ambiguity_notes):
        report.put(f"ambiguity_note.{n}", note)
    for n, note in enumerate(e.warnings):
        report.put(f"warning.{n}", note)
    for pn, p in enumerate(prob.points[: min(3, len(prob.points))]):
        for k in range(e.order + 1):
            _put_tensor(report, f"point{pn}.g_coeff{k}",
                        e.g_coeffs[k].matrix_values(p))
            report.put(f"point{pn}.f_coeff{k}", e.f_coeffs[k].value(p))
    if e.obstruction is not None:
        tol = prob.tol("identities", 1e-8)
        report.put("obstruction.constant", e.obstruction.c)
        worst = _obstruction_identities(prob, e.obstruction, report, tol)
        if float(prob.space.dim) + float(prob.space.m) == 4.0:
            B = inv.weighted_bach(prob.space)
            diff = max(np.max(np.abs(e.obstruction.tensor.matrix_values(p)
                                     - B.matrix_values(p)))
                       for p in prob.points)
            report.put_check("obstruction_equals_bach", diff, tol * prob.scale)
    a = AmbientMetric(e)
    rep = order_report(a, prob.tol("residual", 1e-9), points=prob.points)
    for name, block in rep.blocks.items():
        report.put(f"order.{name}.guaranteed",
                   -1 if block.guaranteed is None else block.guaranteed)
        fv = block.first_violation
        report.put(f"order.{name}.first_violation", -1 if fv is None else fv)
        report.put(f"order.{name}.ok", block.ok)
        if not block.ok:
            report.failures.append(f"order.{name}")
    return 0 if report.ok else 1


def _obstruction_identities(prob, obs, report, tol) -> float:
    from . import curvature as cv
    s = prob.space
    mat, ginv_f, _, gamma, derivs, zero = inv._space_geometry(s)
    dphi = cv.phi_gradient(s.f, derivs, s.m) if s.m else [zero] * s.dim
    div_O = cv.weighted_divergence_sym2(obs.tensor.as_matrix(), ginv_f, dphi,
                                        gamma, derivs, zero)
    worst_tr = worst_div = 0.0
    for p in prob.points:
        gm = s.g.matrix_values(p)
        fv = s.f.value(p)
        tr = float(np.trace(np.linalg.inv(gm) @ obs.tensor.matrix_values(p)))
        worst_tr = max(worst_tr, abs(tr - float(s.m) / fv ** 2
                                     * obs.scalar_part.value(p)))
        for l in range(s.dim):
            want = obs.scalar_part.value(p) / fv ** 2 * dphi[l].value(p)
            worst_div = max(worst_div, abs(div_O[l].value(p) - want))
    report.put_check("obstruction_trace_identity", worst_tr, tol * prob.scale)
    report.put_check("obstruction_divergence_identity", worst_div,
                     tol * prob.scale)
    return max(worst_tr, worst_div)


def cmd_obstruction(args, report) -> int:
    prob = _Problem(args)
    _echo(report, prob)
    obs = obstruction(prob.space, check_points=prob.points)
    report.put("obstruction.constant", obs.c)
    for pn, p in enumerate(prob.points[: min(3, len(prob.points))]):
        _put_tensor(report, f"point{pn}.obstruction", obs.tensor.matrix_values(p))
        report.put(f"point{pn}.f_script", obs.scalar_part.value(p))
    _obstruction_identities(prob, obs, report, prob.tol("identities", 1e-8))
    return 0 if report.ok else 1


def cmd_poincare(args, report) -> int:
    prob = _Problem(args)
    _echo(report, prob)
    e = _expansion_for(prob)
    p = to_poincare(e)
    res = poincare_residual(p)
    report.put("poincare.max_even_order", p.max_even_order)
    report.put("poincare.residual_trunc", res.trunc)
    tol = prob.tol("poincare", 1e-8)
    guaranteed = min(2 * e.order - 1, res.trunc)
    if e.branch is Branch.EVEN_INTEGER:
        n_c = int(prob.space.dim + float(prob.space.m)) // 2
        guaranteed = min(2 * min(e.order, n_c - 1) - 1, res.trunc)
    worst = 0.0
    for power in range(-2, guaranteed + 1):
        for name in ("ij", "ri", "rr"):
            worst = max(worst, res.block_max(name, power, prob.points))
        worst = max(worst, res.scalar_max(power, prob.points))
    report.put("poincare.guaranteed_power", guaranteed)
    report.put_check("poincare_residual", worst, tol * prob.scale)
    if prob.space.m > 0:
        wr, wF, side = cone_identity_check(p, points=prob.points[:4])
        cone_scale = max(prob.scale, side)
        report.put("cone.sides_magnitude", side)
        report.put_check("cone_identity_ricci", wr,
                         prob.tol("cone", 1e-9) * cone_scale)
        report.put_check("cone_identity_f", wF,
                         prob.tol("cone", 1e-9) * cone_scale)
    return 0 if report.ok else 1


def cmd_verify(args, report) -> int:
    prob = _Problem(args)
    _echo(report, prob)
    tol = prob.tol("residual", 1e-9)
    entry = prob.catalog_entry
    if entry is not None:
        try:
            entry.verify(points=min(prob.points_n, 6), seed=prob.seed)
            report.put_check("catalog_flags", 0.0, 1.0)
        except EntryRejected as exc:
            report.put("catalog_flags.error", str(exc))
            report.put_check("catalog_flags", 1.0, 0.5)
    e = _expansion_for(prob)
    if args.corrupt_coefficient:
        k, i, j, eps = args.corrupt_coefficient.split(",")
        k, i, j, eps = int(k), int(i), int(j), float(eps)
        bad = dict(e.g_coeffs[k].comps)
        key = (min(i, j), max(i, j))
        bad[key] = bad[key] + prob.space.chart.constant(eps)
        from .fields import SymTensor2Field
        e.g_coeffs[k] = SymTensor2Field(prob.space.chart, bad)
        report.put("corruption", f"g_coeff{k}[{i}{j}] += {eps}")

    a = AmbientMetric(e)
    rep = order_report(a, tol, points=prob.points)
    for name, block in rep.blocks.items():
        worst = 0.0
        g = block.guaranteed
        if g is not None and g >= 0:
            worst = max(block.coeff_max[: g + 1], default=0.0)
        report.put_check(f"ambient_order_{name}", worst, block.tol_abs)

    bianchi = inv.bianchi_residual(prob.space)
    worst = max(abs(r.value(p)) for p in prob.points for r in bianchi)
    report.put_check("bianchi_residual", worst,
                     prob.tol("bianchi", 1e-8) * prob.scale)

    if e.obstruction is not None:
        _obstruction_identities(prob, e.obstruction, report,
                                prob.tol("identities", 1e-8))

    pc = to_poincare(e)
    res = poincare_residual(pc)
    guaranteed = min(2 * e.order - 1, res.trunc)
    if e.branch is Branch.EVEN_INTEGER:
        n_c = int(prob.space.dim + float(prob.space.m)) // 2
        guaranteed = min(2 * min(e.order, n_c - 1) - 1, res.trunc)
    worst = 0.0
    for power in range(-2, guaranteed + 1):
        for name in ("ij", "ri", "rr"):
            worst = max(worst, res.block_max(name, power, prob.points))
        worst = max(worst, res.scalar_max(power, prob.points))
    report.put_check("poincare_residual", worst,
                     prob.tol("poincare", 1e-8) * prob.scale)
    if prob.space.m > 0:
        wr, wF, side = cone_identity_check(pc, points=prob.points[:3])
        cone_scale = max(prob.scale, side)
        report.put_check("cone_identity_ricci", wr,
                         prob.tol("cone", 1e-9) * cone_scale)
        report.put_check("cone_identity_f", wF,
                         prob.tol("cone", 1e-9) * cone_scale)

    if entry is not None and entry.closed_form is not None:
        worst = _closed_form_agreement(prob, e, entry)
        report.put_check("solver_matches_closed_form", worst, 1e-9 * prob.scale)
    return 0 if report.ok else 1


def _closed_form_agreement(prob, e, entry) -> float:
    branch = e.branch
    upto = e.order
    if branch is Branch.EVEN_INTEGER:
        n_c = int(prob.space.dim + float(prob.space.m)) // 2
        upto = min(upto, n_c - 1)
    g_want, f_want = entry.closed_form(upto)
    worst = 0.0
    for p in prob.points:
        for k in range(upto + 1):
            dg = e.g_coeffs[k].matrix_values(p) - g_want[k].matrix_values(p)
            worst = max(worst, float(np.max(np.abs(dg))))
            worst = max(worst, abs(e.f_coeffs[k].value(p) - f_want[k].value(p)))
    return worst


_COMMANDS = {
    "invariants": cmd_invariants,
    "expand": cmd_expand,
    "obstruction": cmd_obstruction,
    "poincare": cmd_poincare,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    report = Report(__version__)
    report.put("command", args.command)
    started = time.perf_counter()
    code = 0
    try:
        code = _COMMANDS[args.command](args, report)
    except (ConfigError, ValidationError, EntryRejected, OrderError,
            ConsistencyError) as exc:
        report.put("error", f"{type(exc).__name__}: {exc}")
        code = 2
    report.put_timing("total_seconds", time.perf_counter() - started)
    text = report.write(args.out)
    sys.stdout.write(text)
    if report.failures and code == 0:
        code = 1
    return code


if __name__ == "__main__":
    sys.exit(main())
