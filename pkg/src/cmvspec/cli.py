"""Command-line front end.

Commands: ``spectrum`` (alias ``gaps``), ``tongue``, ``qwalk``, ``oracle``.
All numeric output is deterministic: floats carry 17 significant digits,
angles are radians in [0, 2*pi) (gap arcs through the seam use a negative
lower endpoint, understood mod 2*pi), rotation numbers are revolutions in
[0, 1).  Every output file carries a metadata header or sidecar with the
config hash, tool version and convention flags.

Exit codes: 0 success, 1 partial failure (tongue tracing below quorum),
2 configuration or I/O error, 3 coin structure violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .model import (ModelError, ModelSpec, PERIOD_TWO, QUASI_PERIODIC,
                    model_from_dict)
from .qwalk import (CoinStructureError, WalkError, build_walk, coin_sequence,
                    step_state, verify_cgmv, walk_spectrum)
from .spectrum import (SpectrumError, detect_gaps, half_cell_grid,
                       load_gaps_json, oracle_compare, scan, truncated_cmv,
                       write_gaps_json, write_spectrum_csv)
from .tongues import (TongueError, measure_slopes, p2_coefficients,
                      predicted_slopes_qp, tip_theta, tip_theta_p2,
                      trace_tongue, write_tongue_csv)

CONVENTIONS = {
    "angles": "radians in [0, 2*pi); wrapped arcs use a negative lower endpoint",
    "rotation_numbers": "revolutions in [0, 1)",
    "torus_characters": "exp(2*pi*i*<k, x>) on R^d/Z^d",
    "walk_matrix": "transition convention (row = source); action is the transpose",
}


class ConfigError(ValueError):
    pass


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None


def _config_hash(cfg: dict) -> str:
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True).encode("utf-8")).hexdigest()[:16]


def _metadata(cfg: dict, command: str, seed) -> dict:
    return {"tool": "cmvspec", "version": __version__, "command": command,
            "config_hash": _config_hash(cfg), "seed": seed,
            "conventions": CONVENTIONS}


def _model_from_config(cfg: dict, base: Path) -> ModelSpec:
    if "model" in cfg:
        return model_from_dict(cfg["model"])
    if "model_file" in cfg:
        path = Path(cfg["model_file"])
        if not path.is_absolute():
            path = base / path
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return model_from_dict(json.load(fh))
        except FileNotFoundError:
            raise ConfigError(f"model file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
            ) from None
    raise ConfigError("config needs 'model' (inline) or 'model_file'")


def _positive(value, name: str) -> float:
    v = float(value)
    if v <= 0.0:
        raise ConfigError(f"{name} must be positive, got {v}")
    return v


def _check_margin(model: ModelSpec):
    margin = model.omega.margin(n_check=20)
    if margin < 1e-6:
        warnings.warn(f"frequency looks resonant within the checked range "
                      f"(margin {margin:.3g} < 1e-6); labels may be ambiguous")


def cmd_spectrum(cfg: dict, out: Path, seed, overrides: dict) -> int:
    model = _model_from_config(cfg, out)
    _check_margin(model)
    sub = dict(cfg.get("spectrum", {}))
    points = int(overrides.get("grid") or sub.get("points", 512))
    n_iter = int(overrides.get("n_iter") or sub.get("n_iter", 200_000))
    if points < 1:
        raise ConfigError("empty grid")
    kmax = int(overrides.get("kmax") or sub.get("kmax", 10))
    tol = _positive(overrides.get("tol") or sub.get("label_tol", 1e-3), "label_tol")
    sc = scan(model, half_cell_grid(points), n_iter)
    gaps = detect_gaps(sc,
                       le_threshold=_positive(sub.get("le_threshold", 0.02),
                                              "le_threshold"),
                       tol_rho=_positive(sub.get("tol_rho", 1e-3), "tol_rho"),
                       refine_tol=_positive(sub.get("refine_tol", 1e-5),
                                            "refine_tol"),
                       kmax=kmax, label_tol=tol,
                       refine_n_iter=sub.get("refine_n_iter"))
    meta = _metadata(cfg, "spectrum", seed)
    meta["n_iter"] = n_iter
    meta["points"] = points
    write_spectrum_csv(out / "spectrum.csv", sc, gaps, meta)
    write_gaps_json(out / "gaps.json", gaps, meta)
    print(f"spectrum: {points} grid points, {len(gaps)} gap(s) -> "
          f"{out / 'spectrum.csv'}, {out / 'gaps.json'}")
    return 0


def cmd_tongue(cfg: dict, out: Path, seed, overrides: dict) -> int:
    model = _model_from_config(cfg, out)
    _check_margin(model)
    sub = dict(cfg.get("tongue", {}))
    k = tuple(int(v) for v in np.atleast_1d(sub.get("k", 1)))
    half = bool(sub.get("half_shift", False))
    delta_max = float(sub.get("delta_max", 0.1))
    steps = int(sub.get("steps", 6))
    n_iter = int(overrides.get("n_iter") or sub.get("n_iter", 200_000))
    refine_tol = _positive(sub.get("refine_tol", 1e-5), "refine_tol")
    fit_fraction = _positive(sub.get("fit_fraction", 1.0), "fit_fraction")
    if delta_max > 0.5:
        print("warning: delta_max outside the perturbative regime", file=sys.stderr)
    if all(v == 0 for v in k) and not half:
        print("warning: k=0 gap open at delta=0", file=sys.stderr)

    trace = trace_tongue(model.with_delta, k, delta_max, steps,
                         refine_tol=refine_tol, n_iter=n_iter, half_shift=half)
    doc = {"k": list(k), "half_shift": half, "failures": trace.failures,
           "ok_fraction": trace.ok_fraction()}
    try:
        slope, resid = measure_slopes(trace, fit_fraction)
        doc["measured_slope"] = slope
        doc["fit_residual"] = resid
    except TongueError as exc:
        doc["measured_slope"] = None
        doc["fit_error"] = str(exc)
    if model.kind == QUASI_PERIODIC and any(v != 0 for v in k):
        tip = tip_theta(k, model.omega, model.lam)
        pred = predicted_slopes_qp(model.lam, tip, k, model.h)
        doc["tip_theta"] = tip
        doc["predicted"] = {
            "a1": pred.a1, "b1": pred.b1,
            "b2": [pred.b2.real, pred.b2.imag],
            "slope_minus": pred.slope_minus, "slope_plus": pred.slope_plus,
            "slope_difference": pred.slope_difference,
            "transversal": pred.transversal,
        }
        if doc.get("measured_slope") and pred.slope_difference > 0:
            doc["measured_over_predicted"] = doc["measured_slope"] / pred.slope_difference
    elif model.kind == PERIOD_TWO:
        tip = tip_theta_p2(k, model.omega, model.lam1, model.lam2, half)
        doc["tip_theta"] = tip
        if 0.0 < tip < math.pi:
            coeff = p2_coefficients(model.lam1, model.lam2, tip, k, model.h,
                                    model.omega)
            doc["p2_coefficients"] = {
                "f11": [coeff.f11.real, coeff.f11.imag],
                "f12": [coeff.f12.real, coeff.f12.imag],
                "b2": [coeff.b2.real, coeff.b2.imag],
                "small_cond": coeff.small_cond,
            }
    meta = _metadata(cfg, "tongue", seed)
    name = "tongue_" + "_".join(str(v) for v in k) + ("_half" if half else "")
    write_tongue_csv(out / f"{name}.csv", trace, meta)
    with open(out / "slopes.json", "w", encoding="utf-8") as fh:
        json.dump({"metadata": meta, "results": doc}, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"tongue k={list(k)}: {len(trace.deltas)} couplings, "
          f"{len(trace.failures)} failure(s) -> {out / (name + '.csv')}")
    return 0 if trace.ok_fraction() >= 0.8 else 1


def cmd_qwalk(cfg: dict, out: Path, seed, overrides: dict) -> int:
    sub = dict(cfg.get("qwalk", {}))
    lam = float(sub.get("lambda", 0.5))
    delta = float(sub.get("delta", 0.0))
    omega = np.atleast_1d(sub.get("omega", [0.5 * (math.sqrt(5.0) - 1.0)]))
    from .model import FourierPoly

    hdoc = sub.get("h", {"coeffs": [{"k": [1], "re": 0.5, "im": 0.0},
                                    {"k": [-1], "re": 0.5, "im": 0.0}]})
    coeffs = {tuple(e["k"]): complex(e.get("re", 0.0), e.get("im", 0.0))
              for e in hdoc.get("coeffs", [])}
    h = FourierPoly(coeffs, len(omega)) if coeffs else FourierPoly.zero(len(omega))
    sites = int(sub.get("sites", 64))
    steps = int(sub.get("steps", 16))
    n_lo, n_hi = -(sites // 2), sites - sites // 2 - 1

    if "coins" in sub:
        from .qwalk import Coin

        # each config coin is a 2x2 nest of [re, im] pairs
        coins = [Coin.from_array([[complex(*e) for e in row] for row in c])
                 for c in sub["coins"]]
        for i, coin in enumerate(coins[1:-1], start=1):
            if not coin.symmetric:
                raise CoinStructureError(f"coin {i} violates the symmetric structure")
    else:
        coins = coin_sequence(lam, h, omega, delta, n_lo, n_hi)
    window = build_walk(coins, (n_lo, n_hi))
    residual = verify_cgmv(window)

    rng = np.random.default_rng(seed if seed is not None else 0)
    start_site = int(sub.get("start_site", 0))
    psi = window.basis_state(start_site, spin_up=True)
    snapshots = [psi.copy()]
    for _ in range(steps):
        psi = step_state(psi, window)
        snapshots.append(psi.copy())
    # cross-check the banded matrix action on a random interior state
    probe = np.zeros(window.dim, dtype=complex)
    interior = slice(4, window.dim - 4)
    probe[interior] = rng.normal(size=window.dim - 8) + 1j * rng.normal(size=window.dim - 8)
    probe /= np.linalg.norm(probe)
    action_dev = float(np.max(np.abs(window.apply(probe) - step_state(probe, window))))

    meta = _metadata(cfg, "qwalk", seed)
    doc = {"metadata": meta, "cgmv_residual": residual,
           "action_deviation": action_dev,
           "window": [n_lo, n_hi], "steps": steps,
           "norm_drift": float(abs(np.linalg.norm(psi) - 1.0))}
    lines = ["# " + json.dumps(meta, sort_keys=True),
             "site,re_up,im_up,re_down,im_down"]
    final = snapshots[-1]
    for n in range(n_lo, n_hi + 1):
        pu = 2 * n - window.lo
        pd = 2 * n + 1 - window.lo
        up = final[pu] if 0 <= pu < window.dim else 0.0
        dn = final[pd] if 0 <= pd < window.dim else 0.0
        lines.append(",".join([str(n)] + [format(v, ".17g") for v in
                                          (up.real, up.imag, dn.real, dn.imag)]))
    with open(out / "walk_final.csv", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    if sub.get("spectrum", False):
        sc, gaps, wmeta = walk_spectrum(lam, h, omega, delta,
                                        n_points=int(sub.get("points", 512)),
                                        n_iter=int(overrides.get("n_iter")
                                                   or sub.get("n_iter", 200_000)))
        meta2 = dict(meta)
        meta2.update(wmeta)
        write_spectrum_csv(out / "walk_spectrum.csv", sc, gaps, meta2)
        write_gaps_json(out / "walk_gaps.json", gaps, meta2)
        doc["n_gaps"] = len(gaps)
    with open(out / "qwalk.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"qwalk: residual {residual:.3e} -> {out / 'qwalk.json'}")
    return 0


def cmd_oracle(cfg: dict, out: Path, seed, overrides: dict) -> int:
    model = _model_from_config(cfg, out)
    sub = dict(cfg.get("oracle", {}))
    size = int(sub.get("size", 512))
    margin = _positive(overrides.get("tol") or sub.get("margin", 0.02), "margin")
    phase = float(sub.get("boundary_phase_angle", 0.0))
    gaps_file = sub.get("gaps_file", "gaps.json")
    path = Path(gaps_file)
    if not path.is_absolute():
        path = out / path
    if not path.exists():
        raise ConfigError(f"gaps file not found: {path}")
    gaps = load_gaps_json(path)
    trunc = truncated_cmv(model, size, complex(math.cos(phase), math.sin(phase)))
    report = oracle_compare(gaps, trunc, margin)
    meta = _metadata(cfg, "oracle", seed)
    with open(out / "oracle.json", "w", encoding="utf-8") as fh:
        json.dump({"metadata": meta, "size": size,
                   "unitarity_residual": trunc.unitarity_residual(),
                   "report": report.as_dict()}, fh, sort_keys=True, indent=2)
        fh.write("\n")
    status = "ok" if report.ok else f"{len(report.violations)} violation(s)"
    print(f"oracle: N={size}, margin={margin}: {status} -> {out / 'oracle.json'}")
    return 0


COMMANDS = {"spectrum": cmd_spectrum, "gaps": cmd_spectrum,
            "tongue": cmd_tongue, "qwalk": cmd_qwalk, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmvspec",
        description="spectral computations for CMV matrices with quasi-periodic "
                    "Verblunsky coefficients")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--n-iter", type=int, default=None, dest="n_iter")
    parser.add_argument("--grid", type=int, default=None,
                        help="number of theta grid points")
    parser.add_argument("--kmax", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None,
                        help="label tolerance (spectrum) or margin (oracle)")
    parser.add_argument("--seed", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    overrides = {"n_iter": args.n_iter, "grid": args.grid,
                 "kmax": args.kmax, "tol": args.tol}
    try:
        cfg = _load_config(args.config)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.seed, overrides)
    except CoinStructureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ModelError, SpectrumError, TongueError, WalkError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
