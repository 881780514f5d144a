"""Command-line front end: ``verify``, ``k2``, ``selftest`` and ``orbit-info``.

Exit codes: 0 when every check passes, 1 on any violation, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .algebra import AlgebraSpec, LieAlgebra, build_algebra
from .errors import DomainError, ParameterError, UnsupportedError
from .geometry import CHECKS, Tolerances, verify_point
from .orbits import (OrbitId, cohomogeneity, jordan_type, k2_closed_form, measure_k2,
                     random_orbit_point, representative)
from .potentials import parse_potential

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "orbit": None,
    "potential": "theorem",
    "c": None,
    "grid": "0.3:2:5x0.3:2:5",
    "tol_id": 1e-10,
    "tol_fd": 1e-6,
    "tol_closed": 1e-5,
    "seed": 0,
    "format": "text",
    "exclusion": 1e-3,
    "fd_pairs": 2,
    "fd_triples": 1,
    "jobs": 1,
    "conjugate": True,
}


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ config
def parse_grid(text: str) -> tuple[np.ndarray, np.ndarray]:
    """``"smin:smax:steps x tmin:tmax:steps"`` (a single axis applies to both)."""
    axes = [a.strip() for a in text.lower().split("x")]
    if len(axes) == 1:
        axes *= 2
    if len(axes) != 2:
        raise UsageError(f"cannot parse grid {text!r}")
    out = []
    for ax in axes:
        try:
            lo, hi, n = ax.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
        except ValueError:
            raise UsageError(f"cannot parse grid axis {ax!r}") from None
        if n < 1 or lo <= 0 or hi < lo:
            raise UsageError(f"grid axis {ax!r} must have 0 < min <= max and steps >= 1")
        out.append(np.linspace(lo, hi, n))
    return out[0], out[1]


def read_config_file(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for num, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{num}: unknown key {key!r}")
        values[key] = value
    return values


def _coerce(key: str, value):
    if value is None:
        return None
    default = DEFAULTS[key]
    try:
        if isinstance(default, bool):
            if isinstance(value, bool):
                return value
            return str(value).lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float) or key == "c":
            return float(value)
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None
    return value


@dataclass
class RunConfig:
    orbit: str
    potential: str
    c: float | None
    grid: str
    tol_id: float
    tol_fd: float
    tol_closed: float
    seed: int
    format: str
    exclusion: float
    fd_pairs: int
    fd_triples: int
    jobs: int
    conjugate: bool

    @classmethod
    def resolve(cls, flags: dict, config_path: str | None) -> RunConfig:
        """Flags override the config file, which overrides the defaults."""
        merged = dict(DEFAULTS)
        if config_path:
            merged.update(read_config_file(config_path))
        merged.update({k: v for k, v in flags.items() if k in DEFAULTS and v is not None})
        merged = {k: _coerce(k, v) for k, v in merged.items()}
        if merged["orbit"] is None:
            raise UsageError("an orbit is required (--orbit or 'orbit' in the config file)")
        if merged["format"] not in ("text", "json", "csv"):
            raise UsageError(f"unknown format {merged['format']!r}")
        return cls(**merged)

    def tolerances(self) -> Tolerances:
        return Tolerances(identity=self.tol_id, fd=self.tol_fd, closedness=self.tol_closed)


# ------------------------------------------------------------------ verify
def _resolve_potential(cfg: RunConfig, oid: OrbitId):
    text = cfg.potential
    name = text.split(":", 1)[0].strip().lower()
    if cfg.c is not None:
        if name not in ("sl2", "family"):
            raise UsageError("--c only applies to 'sl2' and 'family' potentials")
        text = f"{name}:c={cfg.c}"
    if name == "g2" and oid.kind != "G2":
        raise UsageError("the g2 potential applies to the G2 orbit only")
    if name != "g2" and oid.kind == "G2":
        raise UsageError("the G2 orbit takes the 'g2' potential")
    k = None if oid.kind == "G2" else float(np.sqrt(measure_k2(oid)))
    return parse_potential(text, k)


def grid_points(cfg: RunConfig) -> list[tuple[int, float, float]]:
    s_axis, t_axis = parse_grid(cfg.grid)
    pts = []
    for s in s_axis:
        for t in t_axis:
            if abs(s - t) < cfg.exclusion:
                continue
            pts.append((len(pts), float(s), float(t)))
    return pts


def _evaluate(args) -> dict:
    cfg, index, s, t = args
    oid = OrbitId.parse(cfg.orbit)
    pot = _resolve_potential(cfg, oid)
    point = representative(oid, s, t)
    if cfg.conjugate:
        point = random_orbit_point(point, seed=[cfg.seed, index])
    try:
        report = verify_point(point, pot, tol=cfg.tolerances(), seed=[cfg.seed, index, 1],
                              n_pairs=cfg.fd_pairs, n_triples=cfg.fd_triples)
    except DomainError as exc:
        return {"index": index, "s": s, "t": t, "error": str(exc), "passed": False}
    d = report.to_dict()
    d["index"] = index
    d["point"]["s"], d["point"]["t"] = s, t
    return d


def _stream_text(rec, out):
    if "error" in rec:
        out.write(f"[{rec['index']:3d}] s={rec['s']:.4g} t={rec['t']:.4g} ERROR {rec['error']}\n")
        return
    p = rec["point"]
    status = "PASS" if rec["passed"] else "FAIL " + ",".join(k for k, v in rec["verdicts"].items() if not v)
    out.write(f"[{rec['index']:3d}] s={p['s']:.4g} t={p['t']:.4g} eta=({p['eta1']:.6g}, {p['eta2']:.6g}) "
              f"J2={rec['j_squared_residual']:.2e} mineig={rec['min_metric_eigenvalue']:.3g} {status}\n")
    out.flush()


def _csv_rows(rec):
    if "error" in rec:
        return [[rec["s"], rec["t"], "", "", "error", rec["error"]]]
    p = rec["point"]
    return [[p["s"], p["t"], repr(p["eta1"]), repr(p["eta2"]), name, repr(rec[name])]
            for name in CHECKS if rec[name] is not None]


def cmd_verify(cfg: RunConfig, expect_fail: bool, timestamp: bool, out) -> int:
    try:
        oid = OrbitId.parse(cfg.orbit)
        pot = _resolve_potential(cfg, oid)
    except (ParameterError, UnsupportedError) as exc:
        raise UsageError(str(exc)) from None
    pts = grid_points(cfg)
    if not pts:
        raise UsageError("the grid is empty after excluding the diagonal")
    jobs = [(cfg, i, s, t) for i, s, t in pts]
    writer = csv.writer(out, lineterminator="\n") if cfg.format == "csv" else None
    if writer:
        writer.writerow(["s", "t", "eta1", "eta2", "residual_name", "value"])
    records = []

    def consume(rec):
        records.append(rec)
        if cfg.format == "text":
            _stream_text(rec, out)
        elif writer:
            writer.writerows(_csv_rows(rec))
            out.flush()

    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for rec in pool.map(_evaluate, jobs):  # map preserves grid order
                consume(rec)
    else:
        for job in jobs:
            consume(_evaluate(job))

    n_fail = sum(not r["passed"] for r in records)
    all_pass = n_fail == 0
    code = EXIT_OK if all_pass != expect_fail else EXIT_FAIL
    summary = {"points": len(records), "failed": n_fail, "all_passed": all_pass,
               "expect_fail": expect_fail, "exit_code": code}
    if cfg.format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": "verify", "version": __version__,
               "orbit": str(oid), "potential": repr(pot), "config": _config_dict(cfg),
               "points": records, "summary": summary}
        if timestamp:
            doc["timestamp"] = datetime.now(timezone.utc).isoformat()
        out.write(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    elif cfg.format == "text":
        verdict = "all checks passed" if all_pass else f"{n_fail} of {len(records)} points failed"
        tail = " (failure expected)" if expect_fail else ""
        out.write(f"{oid} {pot!r}: {verdict}{tail}; exit {code}\n")
    return code


def _config_dict(cfg: RunConfig) -> dict:
    d = dict(cfg.__dict__)
    d.pop("jobs")  # does not affect results
    return d


# ---------------------------------------------------------------------- k2
def k2_table(max_a: int = 8, max_bd: int = 10, max_c: int = 4) -> list[dict]:
    rows = []
    ids = [f"A:{m}:2,2" + ",1" * (m - 4) for m in range(4, max_a + 1)]
    ids += [f"{'B' if m % 2 else 'D'}:{m}:3,1^{m - 3}" for m in range(7, max_bd + 1)]
    ids += [f"C:{n}:2,2" + ",1" * (2 * n - 4) for n in range(2, max_c + 1)]
    for text in ids:
        oid = OrbitId.parse(text)
        measured, closed = measure_k2(oid), k2_closed_form(oid)
        rows.append({"algebra": str(oid.algebra), "measured": measured, "closed_form": closed,
                     "match": abs(measured - closed) <= 1e-10 * closed})
    return rows


def cmd_k2(args, out) -> int:
    rows = k2_table(args.max_a, args.max_bd, args.max_c)
    if args.format == "json":
        out.write(json.dumps({"schema_version": SCHEMA_VERSION, "command": "k2", "rows": rows},
                             sort_keys=True, indent=1) + "\n")
    else:
        out.write(f"{'algebra':<8} {'measured':>12} {'closed form':>12}  status\n")
        for r in rows:
            flag = "ok" if r["match"] else "MISMATCH"
            out.write(f"{r['algebra']:<8} {r['measured']:>12.10g} {r['closed_form']:>12.10g}  {flag}\n")
    return EXIT_OK if all(r["match"] for r in rows) else EXIT_FAIL


# ---------------------------------------------------------------- selftest
def _corrupted(alg: LieAlgebra) -> LieAlgebra:
    sc = alg.sc_num.copy()
    i, j, k = np.argwhere(sc != 0)[0]
    sc[i, j, k] += 1
    sc[j, i, k] -= 1
    return LieAlgebra(alg.name + "*", alg.labels, alg.basis, alg.pivots, alg.coord_num,
                      alg.coord_den, sc, alg.sc_den, alg.sigma_matrix, alg.spec)


def run_selftest(seed: int = 0, corrupt: bool = False) -> list[tuple[str, bool, str]]:
    """Exact algebra invariants, orbit identities and the model checks."""
    from .models import g2_pde_residuals, moment_vector_check, so4_block_residual, so4_point
    from .potentials import Sl2FamilyPotential, TheoremPotential

    results = []
    specs = ["A:2", "A:4", "A:8", "B:7", "B:9", "D:8", "D:10", "C:2", "C:4", "G2"]
    for text in specs:
        alg = build_algebra(AlgebraSpec.parse(text))
        if corrupt and text == "A:4":
            alg = _corrupted(alg)
        res = (alg.jacobi_residual_exact(), alg.killing_invariance_residual_exact(),
               alg.antisymmetry_residual_exact(), alg.sigma_involution_residual_exact(),
               alg.sigma_automorphism_residual_exact())
        pos = alg.hermitian_form_min_eigenvalue()
        ok = not any(res) and pos > 0
        results.append((f"algebra {text}", ok, f"exact residuals {res}, min Hermitian eig {pos:.3g}"))

    rng = np.random.default_rng(seed)
    for text in ("A:5:2,2,1", "C:3:2,2,1,1", "B:9:2^4,1", "D:8:3,1^5"):
        oid = OrbitId.parse(text)
        s, t = rng.uniform(0.3, 2.0, size=2)
        p = representative(oid, s, t)
        k2 = measure_k2(oid)
        want = (4 * k2 * (s * s + t * t), 8 * k2 * (s**4 + t**4))
        err = max(abs(p.eta1 / want[0] - 1), abs(p.eta2 / want[1] - 1))
        coh = cohomogeneity(p.algebra, p.X)
        ok = err <= 1e-10 and coh == 2 and jordan_type(p.algebra, p.X) == oid.label
        results.append((f"orbit {text}", ok, f"eta rel err {err:.1e}, cohomogeneity {coh}"))

    g2 = representative("G2", 1.0, 1.0)
    ok = abs(g2.eta1 - 32) <= 1e-10 * 32 and abs(g2.eta2 - 160) <= 1e-10 * 160
    results.append(("orbit G2", ok, f"eta = ({g2.eta1:.12g}, {g2.eta2:.12g})"))

    for c in (0.0, 1.0):
        lams = [moment_vector_check(t, 1.0, c) for t in (0.5, 1.0, 2.0)]
        err = max(abs(r["lambda"] - r["expected"]) for r in lams)
        spread = float(np.std([r["lambda"] for r in lams]))
        ok = err <= 1e-10 and ((spread <= 1e-10) == (c == 0))
        results.append((f"sl2 moment c={c:g}", ok, f"lambda err {err:.1e}, spread {spread:.2e}"))
    ode = max(abs(Sl2FamilyPotential(k, c).ode_residual(eta))
              for k in (0.5, 1, 2) for c in (0, 0.3, 1) for eta in (0.1, 1, 10, 100))
    results.append(("sl2 ode", ode <= 1e-12, f"max residual {ode:.1e}"))

    k = float(np.sqrt(measure_k2("D:8:3,1^5")))
    cross = so4_block_residual(so4_point(1.0, 0.6), TheoremPotential(k))["cross_block"]
    results.append(("so4 blocks", cross <= 1e-9, f"cross-block {cross:.1e}"))
    pde = max(max(v for n, v in g2_pde_residuals(s, t).items() if n != "branch_i_witness")
              for s, t in ((1, 1), (0.5, 1.7)))
    results.append(("g2 pde", pde <= 1e-10, f"max residual {pde:.1e}"))
    return results


def cmd_selftest(args, out) -> int:
    results = run_selftest(args.seed, corrupt=args.inject_fault)
    for name, ok, detail in results:
        out.write(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FAIL


# -------------------------------------------------------------- orbit-info
def cmd_orbit_info(args, out) -> int:
    try:
        oid = OrbitId.parse(args.orbit)
        p = representative(oid, args.s, args.t)
    except (ParameterError, UnsupportedError) as exc:
        raise UsageError(str(exc)) from None
    alg = p.algebra
    info = {"orbit": str(oid), "algebra_dim": alg.dim, "s": args.s, "t": args.t,
            "eta1": p.eta1, "eta2": p.eta2, "complex_dim": p.complex_dimension,
            "cohomogeneity": cohomogeneity(alg, p.X)}
    if oid.kind != "G2":
        info["jordan_type"] = list(jordan_type(alg, p.X))
        info["k2"] = measure_k2(oid)
    if args.format == "json":
        out.write(json.dumps(info, sort_keys=True, indent=1) + "\n")
    else:
        for key, val in info.items():
            out.write(f"{key:>14}: {val}\n")
    return EXIT_OK


# ------------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hkorbits", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the geometry suite over an (s, t) grid")
    v.add_argument("orbit_pos", nargs="?", metavar="ORBIT", help="same as --orbit")
    v.add_argument("potential_pos", nargs="?", metavar="POTENTIAL", help="same as --potential")
    v.add_argument("--orbit", help='orbit id, e.g. "A:4:2,2", "D:8:2,2,2,2:+", "G2"')
    v.add_argument("--potential", help='"theorem", "g2", "family:c=0.5" or "sl2:c=0.5"')
    v.add_argument("--c", type=float, help="family constant (overrides the potential string)")
    v.add_argument("--grid", help='"smin:smax:steps x tmin:tmax:steps" (default 0.3:2:5x0.3:2:5)')
    v.add_argument("--tol-id", type=float, help="identity tolerance (default 1e-10)")
    v.add_argument("--tol-fd", type=float, help="finite-difference tolerance (default 1e-6)")
    v.add_argument("--tol-closed", type=float, help="closedness tolerance (default 1e-5)")
    v.add_argument("--seed", type=int, help="seed for conjugation and FD directions")
    v.add_argument("--format", choices=["text", "json", "csv"])
    v.add_argument("--fd-pairs", type=int, help="random pairs for the d(I d rho) check per point")
    v.add_argument("--fd-triples", type=int, help="random triples for the closedness check per point")
    v.add_argument("--jobs", type=int, help="worker processes (output order is unaffected)")
    v.add_argument("--no-conjugate", dest="conjugate", action="store_const", const=False,
                   help="use the explicit representatives rather than random conjugates")
    v.add_argument("--expect-fail", action="store_true", help="exit 0 only if some check fails")
    v.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from JSON")
    v.add_argument("--config", help="file of key=value defaults (flags take precedence)")

    k = sub.add_parser("k2", help="measured k^2 beside the closed forms")
    k.add_argument("--max-a", type=int, default=8)
    k.add_argument("--max-bd", type=int, default=10)
    k.add_argument("--max-c", type=int, default=4)
    k.add_argument("--format", choices=["text", "json"], default="text")

    st = sub.add_parser("selftest", help="exact algebra invariants and model checks")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    o = sub.add_parser("orbit-info", help="invariants, Jordan type and cohomogeneity")
    o.add_argument("--orbit", required=True)
    o.add_argument("--s", type=float, default=1.0)
    o.add_argument("--t", type=float, default=0.6)
    o.add_argument("--format", choices=["text", "json"], default="text")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "verify":
            flags = {k: v for k, v in vars(args).items() if k in DEFAULTS}
            for name in ("orbit", "potential"):
                pos = getattr(args, name + "_pos")
                if pos is not None:
                    if flags[name] is not None and flags[name] != pos:
                        raise UsageError(f"{name} given both positionally and as a flag")
                    flags[name] = pos
            cfg = RunConfig.resolve(flags, args.config)
            return cmd_verify(cfg, args.expect_fail, not args.no_timestamp, out)
        if args.command == "k2":
            return cmd_k2(args, out)
        if args.command == "selftest":
            return cmd_selftest(args, out)
        return cmd_orbit_info(args, out)
    except (UsageError, ParameterError) as exc:
        sys.stderr.write(f"hkorbits: error: {exc}\n")
        return EXIT_USAGE
    except BrokenPipeError:
        # reader went away (e.g. piped into head); stay quiet
        sys.stdout = None
        return EXIT_FAIL


def run_to_string(argv) -> tuple[int, str]:
    """Run the CLI capturing its output (used by tests)."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()
