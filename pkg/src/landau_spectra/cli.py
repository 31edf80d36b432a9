"""Command-line front end.

Subcommands ``toeplitz``, ``scan``, ``verify``, ``oracle`` and ``asymptotics``
read one JSON configuration and write CSV/JSON reports into ``--out``.
Failures print a JSON object on stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    SectorSpec,
    check_numerical_range,
    check_theorem2,
    check_theorem4,
    check_theorem6,
    sector_report,
)
from .birman_schwinger import GalerkinBasis, default_hermite_scale
from .landau_core import MagneticConfig
from .oracle import dense_eigenvalues, dense_hamiltonian
from .potentials import (
    LongitudinalProfile,
    SeparablePotential,
    TransverseProfile,
    check_assumptions,
    effective_W,
)
from .toeplitz import asymptotic_comparator, cluster_radii, counting, toeplitz_spectrum_radial
from .zero_finder import KRegion, eigenvalues_near_level

__all__ = ["run_cli", "main", "load_config", "Config", "THREADS_ENV"]

THREADS_ENV = "LANDAU_THREADS"
EIG_COLUMNS = ["re_z", "im_z", "re_k", "im_k", "multiplicity", "method", "stable"]

EXIT_OK, EXIT_FAILED_CHECK, EXIT_ERROR = 0, 1, 2


class ConfigError(ValueError):
    pass


def _f(x):
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# configuration


class Config:
    """Parsed configuration with defaults filled in."""

    def __init__(self, raw):
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        for block in ("magnetic", "potential"):
            if block not in raw:
                raise ConfigError(f"missing required block '{block}'")
        self.raw = raw
        try:
            self.magnetic = MagneticConfig(float(raw["magnetic"]["b"]))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"magnetic.b: {exc}") from exc
        self.b = self.magnetic.b
        self.potential = self._potential(raw["potential"])
        basis = raw.get("basis", {})
        scan = raw.get("scan", {})
        self.level = int(scan.get("level", 0))
        self.J = int(basis.get("J", 3))
        self.m_max = int(basis.get("m_max", 12))
        self.n_max = int(basis.get("n_max", 20))
        hs = basis.get("hermite_scale")
        self.hermite_scale = float(hs) if hs is not None else default_hermite_scale(self.potential.G)
        reg = scan.get("region", {})
        self.eta = float(reg.get("eta", 0.95 * math.sqrt(2 * self.b)))
        if not 0 < self.eta < math.sqrt(2 * self.b):
            raise ConfigError(f"scan.region.eta must lie in (0, sqrt(2b)) = (0, {math.sqrt(2 * self.b):.6g})")
        self.rho_min = float(reg.get("rho_min", 1e-2 * self.eta))
        self.margin = float(reg.get("margin", 1e-3 * self.eta))
        self.branch = int(reg.get("branch", 1 if math.sin(self.potential.alpha) >= 0 else -1))
        self.tol = float(scan.get("tol", 1e-6))
        ver = raw.get("verify", {})
        self.r_ladder = [float(r) for r in ver.get("r_ladder", [2.0**-j for j in range(3, 7)])]
        self.nu_gap = float(ver.get("nu_gap", 0.25))
        self.nu_im_cutoff = float(ver.get("nu_im_cutoff", 0.01))
        self.theta = float(ver.get("theta", 0.2))
        self.n_clusters = int(ver.get("n_clusters", 2))
        self.ratio_factor = float(ver.get("ratio_factor", 10.0))
        self.tol_xval = float(ver.get("tol_xval", 1e-3))
        self.warn_L1 = bool(ver.get("warn_F_not_L1", True))
        orc = raw.get("oracle", {})
        self.oracle_n_max = int(orc.get("n_max", 240))
        self.oracle_scale = float(orc.get("hermite_scale", 5.0 * self.hermite_scale))
        self.oracle_enlarge = float(orc.get("enlarge", 1.25))
        self.oracle_drift = float(orc.get("drift_tol", 1e-3))
        tp = raw.get("toeplitz", {})
        self.toeplitz_r = [float(r) for r in tp.get("r_values", [math.exp(-j) for j in range(5, 21)])]
        self.toeplitz_m_max = tp.get("m_max")

    @staticmethod
    def _potential(p):
        try:
            F = TransverseProfile(**p["F"])
            G = LongitudinalProfile(**p["G"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"potential profiles: {exc}") from exc
        alpha = float(p.get("alpha", 0.75 * math.pi))
        if "epsilon" in p:
            eps = float(p["epsilon"])
        elif "sup_fraction" in p:
            # epsilon ||W||_inf = sup_fraction * 2b is resolved once b is known
            eps = None
        else:
            eps = 1.0
        return SeparablePotential(F, G, alpha=alpha, epsilon=1.0 if eps is None else eps, p=float(p.get("p", 2.0)))

    def resolve_coupling(self):
        p = self.raw["potential"]
        if "epsilon" not in p and "sup_fraction" in p:
            unit = self.potential.with_epsilon(1.0)
            eps = float(p["sup_fraction"]) * 2 * self.b / unit.sup_norm
            self.potential = unit.with_epsilon(eps)
        return self

    def basis(self, q=None):
        q = self.level if q is None else q
        return GalerkinBasis.around(q, self.J, self.m_max, self.n_max, self.hermite_scale)

    def oracle_basis(self, q=None):
        q = self.level if q is None else q
        b0 = self.basis(q)
        return GalerkinBasis(q, b0.levels, b0.m_max, self.oracle_n_max, self.oracle_scale)

    def region(self, rho_min=None):
        return KRegion.half_disk(self.eta, self.branch, margin=self.margin, rho_min=self.rho_min if rho_min is None else rho_min)

    def sector(self, q=None):
        return SectorSpec(self.potential.alpha, self.theta, self.branch, self.level if q is None else q, self.b)


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return Config(raw).resolve_coupling()


# ---------------------------------------------------------------------------
# output helpers


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _eig_rows(records):
    return [r.csv_row() for r in records]


def _threads(arg):
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return max(1, int(arg or 1))


def _comparator(cfg, r, w):
    F = cfg.potential.F
    if F.family == "power":
        return asymptotic_comparator("power", r, cfg.b, u0=w.prefactor * F.amplitude, m=F.m_perp)
    if F.family == "gaussian":
        return asymptotic_comparator("gaussian", r, cfg.b, beta=F.beta, mu=F.mu)
    return asymptotic_comparator("compact", r, cfg.b)


# ---------------------------------------------------------------------------
# subcommands


def cmd_toeplitz(cfg, args, out):
    q = cfg.level
    w = effective_W(cfg.potential)
    if cfg.toeplitz_m_max is not None:
        spec = toeplitz_spectrum_radial(q, cfg.b, w, m_max=int(cfg.toeplitz_m_max))
    else:
        spec = toeplitz_spectrum_radial(q, cfg.b, w, r_min=min(cfg.toeplitz_r))
    order = np.argsort(spec.m_index)
    _write_csv(out / "toeplitz_spectrum.csv", ["m", "mu"], [[str(int(spec.m_index[i])), _f(spec.mu[i])] for i in order])
    rows = []
    for r in cfg.toeplitz_r:
        n = counting(spec, r)
        try:
            c = _comparator(cfg, r, w)
        except ValueError:
            c = float("nan")
        rows.append([_f(r), str(n), _f(c)])
    _write_csv(out / "toeplitz_counting.csv", ["r", "counting", "comparator"], rows)
    return EXIT_OK, {"m_max": spec.m_max, "floor": spec.floor, "q": q}


def _scan(cfg, threads, rho_min=None):
    q = cfg.level
    return eigenvalues_near_level(cfg.potential, cfg.basis(q), q, cfg.region(rho_min), cfg.tol, b=cfg.b, threads=threads)


def cmd_scan(cfg, args, out):
    recs = _scan(cfg, _threads(args.threads))
    _write_csv(out / "eigenvalues.csv", EIG_COLUMNS, _eig_rows(recs))
    rep = sector_report(recs, cfg.sector())
    _write_json(out / "sector_report.json", rep.to_dict())
    return EXIT_OK, {"eigenvalues": len(recs)}


def _oracle(cfg, region):
    model = dense_hamiltonian(cfg.potential, cfg.oracle_basis(), cfg.b)
    return dense_eigenvalues(model, region, pot=cfg.potential, enlarge=cfg.oracle_enlarge, drift_tol=cfg.oracle_drift)


def cmd_oracle(cfg, args, out):
    recs = _oracle(cfg, cfg.region())
    _write_csv(out / "oracle_eigenvalues.csv", EIG_COLUMNS, _eig_rows(recs))
    return EXIT_OK, {"eigenvalues": len(recs), "stable": sum(r.stable for r in recs)}


def cross_validate(det, orc, level, tol):
    """Pair determinant zeros with stable oracle eigenvalues (relative distance in ``z - level``)."""
    stable = [r for r in orc if r.stable]
    rows, ok = [], True

    def rel(a, b):
        return abs(a.z - b.z) / abs(b.z - level)

    for d in det:
        best = min(stable, key=lambda o: rel(d, o), default=None)
        err = rel(d, best) if best is not None else math.inf
        good = err < tol and best.multiplicity == d.multiplicity
        rows.append({"direction": "determinant->oracle", "re_z": d.z.real, "im_z": d.z.imag, "m": d.m, "rel_error": err, "matched": good})
        ok &= good
    for o in stable:
        best = min(det, key=lambda d: rel(d, o), default=None)
        err = rel(best, o) if best is not None else math.inf
        good = err < tol
        rows.append({"direction": "oracle->determinant", "re_z": o.z.real, "im_z": o.z.imag, "m": o.m, "rel_error": err, "matched": good})
        ok &= good
    return ok, rows


def run_verification(cfg, threads=1):
    """Full pipeline: determinant scan, oracle, and theorem checks.  Returns ``(verdicts, det, orc)``."""
    from .analysis import Verdict

    q = cfg.level
    pot = cfg.potential
    spec = cfg.sector()
    region = cfg.region()
    rho_det = min(cfg.rho_min, min(cfg.r_ladder))
    if 2 * max(cfg.r_ladder) > cfg.eta:
        raise ConfigError("verify.r_ladder: the annulus (r^2, 4 r^2) must fit inside eta^2")
    det_all = _scan(cfg, threads, rho_min=rho_det)
    det = [r for r in det_all if region.contains(r.k)]
    orc = _oracle(cfg, region)
    verdicts = []

    ok, rows = cross_validate(det, orc, 2 * cfg.b * q, cfg.tol_xval)
    verdicts.append(Verdict("cross_validation", ok, rows, {"tol": cfg.tol_xval, "determinant": len(det), "oracle_stable": sum(o.stable for o in orc)}))

    w = effective_W(pot)
    tw = toeplitz_spectrum_radial(q, cfg.b, w, r_min=min(cfg.r_ladder))
    verdicts.append(
        check_theorem2(det_all, tw, cfg.r_ladder, spec, cfg.nu_im_cutoff, scanned=(rho_det, cfg.eta), factor=cfg.ratio_factor)
    )

    rep = check_assumptions(pot)
    verdicts[-1].details["F_in_L1"] = rep.F_in_L1
    if cfg.warn_L1 and not rep.F_in_L1:
        verdicts[-1].details["warning"] = "F is not integrable: the trace estimate needs F in L1, only the cluster bounds apply"
    accumulating = spec.branch * math.sin(pot.alpha) > 0 and math.cos(pot.alpha) < 0
    if accumulating:
        unit = effective_W(pot.with_epsilon(1.0))
        # the ladder needs n_clusters + 2 eigenvalues whatever the scan truncation
        tu = toeplitz_spectrum_radial(q, cfg.b, unit, m_max=max(cfg.m_max, cfg.n_clusters + 1))
        ladder = cluster_radii(tu, cfg.nu_gap)
        v = check_theorem4(det_all, ladder, tu, pot.epsilon, spec, (rho_det, cfg.eta), cfg.n_clusters)
        v.details["A3"] = rep.A3
        verdicts.append(v)
    verdicts.append(check_theorem6(det_all, spec, cfg.eta))
    stable_orc = [o for o in orc if o.stable]
    verdicts.append(check_theorem6(stable_orc, spec, cfg.eta))
    verdicts[-1].name += "_oracle"
    verdicts.append(check_numerical_range(det_all + stable_orc, pot.sup_norm))
    return verdicts, det_all, orc


def cmd_verify(cfg, args, out):
    verdicts, det, orc = run_verification(cfg, _threads(args.threads))
    _write_csv(out / "eigenvalues.csv", EIG_COLUMNS, _eig_rows(det) + _eig_rows(orc))
    all_ok = all(v.passed for v in verdicts)
    _write_json(
        out / "verdicts.json",
        {
            "all_passed": all_ok,
            "verdicts": [v.to_dict() for v in verdicts],
            "assumptions": check_assumptions(cfg.potential).to_dict(),
            "potential": cfg.potential.to_dict(),
        },
    )
    return (EXIT_OK if all_ok else EXIT_FAILED_CHECK), {"all_passed": all_ok}


def cmd_asymptotics(cfg, args, out):
    q = cfg.level
    w = effective_W(cfg.potential)
    spec = toeplitz_spectrum_radial(q, cfg.b, w, r_min=min(cfg.toeplitz_r))
    rows = []
    for r in cfg.toeplitz_r:
        n = counting(spec, r)
        c = _comparator(cfg, r, w)
        rows.append([_f(r), str(n), _f(c), _f(n / c if c else float("nan"))])
    _write_csv(out / "asymptotics.csv", ["r", "counting", "comparator", "ratio"], rows)
    return EXIT_OK, {"rows": len(rows)}


COMMANDS = {
    "toeplitz": cmd_toeplitz,
    "scan": cmd_scan,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "asymptotics": cmd_asymptotics,
}


def build_parser():
    p = argparse.ArgumentParser(prog="landau-spectra", description="Complex eigenvalues near Landau levels.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--level", type=int, default=None, help="Landau level q (overrides scan.level)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=None, help=f"worker threads (the {THREADS_ENV} variable wins)")
    return p


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def run_cli(argv=None):
    """Run one subcommand; returns the exit code."""
    parser = build_parser()
    parser.__class__ = _Parser
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        if args.level is not None:
            if args.level < 0:
                raise ConfigError("--level must be non-negative")
            cfg.level = args.level
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        code, _ = COMMANDS[args.command](cfg, args, out)
        return code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except _ArgError as exc:
        _error("UsageError", str(exc))
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - every failure becomes a JSON error
        _error(type(exc).__name__, str(exc))
        return EXIT_ERROR


def _error(kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
