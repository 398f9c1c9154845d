"""Command-line front end: ``locclab <command> [options]``.

Exit codes: 0 success, 1 a check failed, 2 usage or input error, 3 the
search was inconclusive. ``LOCCLAB_SEED`` overrides the default seed 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
ORDER_TOL = 1e-6


def _seed() -> int:
    raw = os.environ.get("LOCCLAB_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"LOCCLAB_SEED must be an integer, got {raw!r}")


def _h(v: float) -> str:
    return f"{v:.6g}"


def _write_json(data, path) -> None:
    text = json.dumps(data, indent=2, default=_json_default)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _ppt_margin(proj: np.ndarray, dims) -> float:
    dA, dB = dims
    n = dA * dB
    pt = proj.reshape(dA, dB, dA, dB).transpose(0, 3, 2, 1).reshape(n, n)
    return float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])


def _helstrom_is_ppt(inst, tol: float = 1e-9) -> bool:
    """Is some optimal two-outcome measurement PPT on both outcomes?

    Optimal measurements are P_+ + k P_0 versus its complement, with P_0 the
    kernel projector. The smaller PPT margin is concave in k, so a bounded
    scalar search finds its best value (kernels of dimension <= 1 only).
    """
    from scipy.optimize import minimize_scalar

    from .ensembles import discrimination_operator

    m = discrimination_operator(inst).matrix
    vals, vecs = np.linalg.eigh(m)
    scale = np.max(np.abs(vals))
    pos = vecs[:, vals > 1e-12 * scale]
    ker = vecs[:, np.abs(vals) <= 1e-12 * scale]
    if ker.shape[1] > 1:
        return False
    p_pos, p_ker, eye = pos @ pos.conj().T, ker @ ker.conj().T, np.eye(m.shape[0])

    def margin(k):
        e = p_pos + k * p_ker
        return min(_ppt_margin(e, inst.dims), _ppt_margin(eye - e, inst.dims))

    if ker.shape[1] == 0:
        return margin(0.0) >= -tol
    res = minimize_scalar(lambda k: -margin(k), bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-13})
    return max(margin(0.0), margin(1.0), -res.fun) >= -tol


def report_data() -> dict:
    from .discrim import error_to_norm, helstrom_error
    from .ensembles import instance_to_dict, koashi_instance
    from .oneway import enumerate_extrema
    from .twoway import minimize_total_error, simulate_protocol

    inst = koashi_instance()
    p_global = helstrom_error(inst).p_err
    # For two qubits, PPT is equivalent to separability, so a PPT Helstrom
    # measurement shows the separable optimum equals the global one.
    helstrom_ppt = _helstrom_is_ppt(inst)
    p_sep = p_global if helstrom_ppt else float("nan")
    p_one = enumerate_extrema()[0].p_err
    best = minimize_total_error()
    sim = simulate_protocol(best.p).total_error
    norms = {
        "global": error_to_norm(p_global),
        "sep": error_to_norm(p_sep),
        "one_way": error_to_norm(p_one),
        "two_way_closed_form": error_to_norm(best.p_err),
    }
    ordering = {
        "one_way < two_way": norms["two_way_closed_form"] - norms["one_way"] > ORDER_TOL,
        "two_way < sep": norms["sep"] - norms["two_way_closed_form"] > ORDER_TOL,
        "sep == global": helstrom_ppt and abs(norms["sep"] - norms["global"]) <= 1e-12,
    }
    return {
        "instance": instance_to_dict(inst),
        "errors": {"global": p_global, "sep": p_sep, "one_way": p_one,
                   "two_way_closed_form": best.p_err, "two_way_closed_form_p": best.p},
        "norms": norms,
        "ordering": ordering,
        "ordering_ok": all(ordering.values()),
        "helstrom_measurement_ppt": helstrom_ppt,
        "simulation": {
            "p": best.p,
            "simulated_error": sim,
            "closed_form_error": best.p_err,
            "agrees": abs(sim - best.p_err) <= 1e-10,
        },
    }


def cmd_report(args) -> int:
    d = report_data()
    e, n = d["errors"], d["norms"]
    print("quantity                 error       norm")
    print(f"global (Helstrom)        {_h(e['global']):<11} {_h(n['global'])}")
    print(f"separable                {_h(e['sep']):<11} {_h(n['sep'])}")
    print(f"one-way LOCC             {_h(e['one_way']):<11} {_h(n['one_way'])}")
    print(f"two-way (closed-form)    {_h(e['two_way_closed_form']):<11} {_h(n['two_way_closed_form'])}"
          f"   at p = {_h(e['two_way_closed_form_p'])}")
    for k, v in d["ordering"].items():
        print(f"ordering {k}: {'ok' if v else 'VIOLATED'}")
    sim = d["simulation"]
    if not sim["agrees"]:
        print(f"warning: operator simulation of the two-way protocol gives {_h(sim['simulated_error'])} "
              f"at p = {_h(sim['p'])}, not the closed-form {_h(sim['closed_form_error'])}")
    if args.json:
        _write_json(d, args.json)
    return EXIT_OK if d["ordering_ok"] else EXIT_FAIL


def cmd_twoway_curve(args) -> int:
    from .twoway import sample_curve, write_curve_csv

    if args.steps < 2:
        print("error: --steps must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    pts = sample_curve(args.steps)
    write_curve_csv(pts, args.out)
    best = min(pts, key=lambda p: p.p_err)
    print(f"wrote {len(pts)} rows to {args.out}; smallest sampled error {_h(best.p_err)} at p = {_h(best.p)}")
    return EXIT_OK


def _parse_x_list(text: str) -> list[float]:
    try:
        xs = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not xs:
        raise argparse.ArgumentTypeError("empty x list")
    for x in xs:
        if not 0.5 < x < 1.0:
            raise argparse.ArgumentTypeError(f"x = {x} is outside the open interval (1/2, 1)")
    return xs


def cmd_domino_check(args) -> int:
    from .asymptotic import domino_nogo_certificate

    cert = domino_nogo_certificate(args.x, restarts=args.restarts, seed=_seed(), workers=args.workers)
    st = cert.stages
    print(f"stage a: {st['a']['count']} product states in supp(sigma) "
          f"({'pass' if st['a']['passed'] else 'FAIL'})")
    for k in cert.product_states_in_supp_sigma:
        amps = np.round(k.amplitudes.real, 6)
        print("    " + " ".join(f"{a:+.6g}" for a in amps))
    for x, rec in st["b"]["per_x"].items():
        dist = rec["max_relative_distance"]
        print(f"stage b: x = {x}: {rec['converged']}/{rec['restarts']} restarts converged, "
              f"{rec['pair_form']} pair-form, {rec['unresolved']} unresolved"
              + (f", max distance {_h(dist)}" if dist is not None else ""))
    print(f"stage c: max overlap of |11> with the pair spans {_h(max(st['c']['overlaps']))} "
          f"({'pass' if st['c']['passed'] else 'FAIL'})")
    verdict = "inconclusive" if cert.inconclusive else ("true" if cert.conclusion else "false")
    print(f"certificate conclusion: {verdict} ({_h(cert.elapsed_seconds)} s)")
    if args.json:
        _write_json(cert.to_dict(), args.json)
    if cert.inconclusive:
        return EXIT_INCONCLUSIVE
    return EXIT_OK if cert.conclusion else EXIT_FAIL


def cmd_oneway(args) -> int:
    from .oneway import enumerate_extrema, grid_oracle

    if args.grid < 4:
        print("error: --grid must be >= 4", file=sys.stderr)
        return EXIT_USAGE
    ext = enumerate_extrema()
    print("extremum                 p_err       multiplier")
    for r in ext:
        flag = "  (global minimum)" if r.global_minimum else ""
        print(f"{r.extremum_label:<24} {_h(r.p_err):<11} {_h(r.multiplier)}{flag}")
    g = grid_oracle(args.grid, args.grid)
    gap = abs(ext[0].p_err - g.p_err)
    print(f"grid oracle ({args.grid}x{args.grid}): {_h(g.p_err)}; discrepancy {_h(gap)}")
    if args.json:
        _write_json({
            "extrema": [{"label": r.extremum_label, "p_err": r.p_err, "multiplier": r.multiplier,
                         "global_minimum": r.global_minimum} for r in ext],
            "grid": {"n": args.grid, "p_err": g.p_err, "discrepancy": gap},
        }, args.json)
    return EXIT_OK if gap <= 2e-4 else EXIT_FAIL


def cmd_product_basis(args) -> int:
    from .asymptotic import product_basis_2d, product_states_in_span
    from .qcore import from_pairs, to_pairs

    try:
        data = json.loads(Path(args.input).read_text())
        dims = tuple(data["dims"])
        vecs = [from_pairs(v).reshape(-1) for v in data["vectors"]]
    except (OSError, KeyError, ValueError, TypeError) as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    vecs = [v / np.linalg.norm(v) for v in vecs]
    try:
        if len(vecs) == 2:
            cls = product_basis_2d(vecs[0], vecs[1], dims, seed=_seed())
            res, kind, orth = cls.search, cls.kind, cls.orthogonal
        else:
            res = product_states_in_span(vecs, dims, seed=_seed())
            kind, orth = ("continuum" if res.continuum else f"{res.count} product states"), None
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"classification: {kind}" + ("" if orth is None else f" (orthogonal: {orth})"))
    if res.continuum:
        print(f"continuum of product states ({res.structure})")
    for k, (r1, rs) in zip(res.states, res.residuals):
        print("  state " + " ".join(f"{a:.6g}" for a in k.amplitudes)
              + f"   rank-1 residual {_h(r1)}, span residual {_h(rs)}")
    out = {
        "dims": list(dims),
        "classification": kind,
        "orthogonal": orth,
        "continuum": res.continuum,
        "structure": res.structure,
        "states": [to_pairs(k.amplitudes) for k in res.states],
        "residuals": [list(r) for r in res.residuals],
        "unresolved": list(res.unresolved),
    }
    if args.json:
        _write_json(out, args.json)
    return EXIT_INCONCLUSIVE if res.unresolved else EXIT_OK


def cmd_theorem1_check(args) -> int:
    from .asymptotic import check_theorem1_witness, witness_from_dict
    from .ensembles import instance_from_dict

    try:
        w = witness_from_dict(json.loads(Path(args.witness).read_text()))
        inst = instance_from_dict(json.loads(Path(args.instance).read_text()))
        rep = check_theorem1_witness(w, inst.rho, inst.sigma)
    except (OSError, KeyError, ValueError, TypeError) as exc:
        print(f"error: rejected: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for c in rep.checks:
        where = "" if c.element is None else f" element {c.element}"
        print(f"{c.condition}{where}: {_h(c.value)} {'pass' if c.passed else 'FAIL'}")
    print(f"witness at x = {_h(rep.x)}: {'pass' if rep.passed else 'FAIL'}")
    if args.json:
        _write_json(rep.to_dict(), args.json)
    return EXIT_OK if rep.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="locclab", description="LOCC state-discrimination toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("report", help="error and norm table for the pure-versus-mixed instance")
    r.add_argument("--json", metavar="PATH", help="also write the table as JSON ('-' for stdout)")
    r.set_defaults(func=cmd_report)

    c = sub.add_parser("twoway-curve", help="export the two-way closed-form error curve as CSV")
    c.add_argument("--steps", type=int, default=200)
    c.add_argument("--out", required=True, metavar="PATH")
    c.set_defaults(func=cmd_twoway_curve)

    d = sub.add_parser("domino-check", help="run the domino no-go certificate")
    d.add_argument("--x", type=_parse_x_list, default=[0.6, 0.75, 0.9], metavar="LIST",
                   help="comma-separated x values in (1/2, 1)")
    d.add_argument("--restarts", type=int, default=1000)
    d.add_argument("--workers", type=int, default=1)
    d.add_argument("--json", metavar="PATH")
    d.set_defaults(func=cmd_domino_check)

    o = sub.add_parser("oneway", help="one-way extrema and grid cross-check")
    o.add_argument("--grid", type=int, default=256)
    o.add_argument("--json", metavar="PATH")
    o.set_defaults(func=cmd_oneway)

    b = sub.add_parser("product-basis", help="product vectors in a span given as JSON")
    b.add_argument("--input", required=True, metavar="JSON")
    b.add_argument("--json", metavar="PATH")
    b.set_defaults(func=cmd_product_basis)

    t = sub.add_parser("theorem1-check", help="verify a perfect-discrimination witness")
    t.add_argument("--witness", required=True, metavar="JSON")
    t.add_argument("--instance", required=True, metavar="JSON")
    t.add_argument("--json", metavar="PATH")
    t.set_defaults(func=cmd_theorem1_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "restarts", 1) < 1:
        print("error: --restarts must be positive", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
