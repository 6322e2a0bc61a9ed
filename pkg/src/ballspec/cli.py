"""Command-line front end: ``ballspec {operators,verify,bessel,roundtrip}``."""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import io, radial, regularity, solver, tensor, verify

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def parse_range(text):
    """Integers from ``a``, ``a,b,c``, ``a:b`` / ``a:b:step`` (inclusive) or ``a:b:xK`` (geometric)."""
    text = text.strip()
    if "," in text:
        return [v for part in text.split(",") for v in parse_range(part)]
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [int(parts[0])]
        if len(parts) not in (2, 3):
            raise ValueError
        lo, hi = int(parts[0]), int(parts[1])
        if len(parts) == 3 and parts[2].startswith("x"):
            k = int(parts[2][1:])
            if k < 2 or lo < 1:
                raise ValueError
            out = []
            v = lo
            while v <= hi:
                out.append(v)
                v *= k
            return out
        step = int(parts[2]) if len(parts) == 3 else 1
        if step < 1:
            raise ValueError
    except ValueError:
        raise ConfigError(f"bad range {text!r}; use a, a:b, a:b:step or a:b:xK") from None
    if hi < lo:
        raise ConfigError(f"empty range {text!r}")
    return list(range(lo, hi + 1, step))


def _jobs(value):
    if value is not None:
        return value
    env = os.environ.get("BALLSPEC_JOBS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ConfigError(f"BALLSPEC_JOBS must be an integer, got {env!r}") from None


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


# operators


def cmd_operators(args):
    if args.N < 1:
        raise ConfigError("N must be positive")
    if args.rank < 0 or args.rank > 4:
        raise ConfigError("rank must be between 0 and 4")
    basis = radial.RadialBasisId(args.alpha, args.ell)
    mats = {
        "Dplus": radial.build_Dplus(basis, args.N),
        "C": radial.build_C(basis, args.N),
        "R": radial.build_R(basis, args.N),
    }
    if args.ell >= 1:
        mats["Dminus"] = radial.build_Dminus(basis, args.N)
    Q = regularity.build_Q(args.ell, args.rank)
    meta = {
        "alpha": args.alpha,
        "ell": args.ell,
        "N": args.N,
        "operators": {
            k: {"in_basis": [op.in_basis.alpha, op.in_basis.ell], "out_basis": [op.out_basis.alpha, op.out_basis.ell],
                "offsets": [int(o) for o in op.offsets]}
            for k, op in mats.items()
        },
        "restriction_row": [float(v) for v in radial.restriction_row(basis, args.N)],
        "Q": {
            "rank": args.rank,
            "index_order": tensor.INDEX_ORDER,
            "valid_cols": [bool(v) for v in Q.valid_cols],
            "valid_rows": [bool(v) for v in Q.valid_rows],
        },
    }
    if args.ell == 0:
        meta["omitted"] = {"Dminus": "lowering operator is undefined at ell = 0"}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    arrays = {k: op.to_sparse() for k, op in mats.items()}
    arrays["Q"] = Q.matrix
    if args.format == "matrixmarket":
        for k, m in arrays.items():
            written.append(io.write_matrix(out / f"{k}.mtx", m))
    elif args.format == "json":
        payload = {k: (m.toarray() if hasattr(m, "toarray") else m).tolist() for k, m in arrays.items()}
        p = out / "operators.json"
        p.write_text(json.dumps(payload) + "\n")
        written.append(p)
    else:
        for k, m in arrays.items():
            coo = sp.coo_matrix(m)
            p = out / f"{k}.csv"
            with p.open("w") as fh:
                fh.write("row,col,value\n")
                for i, j, v in sorted(zip(coo.row, coo.col, coo.data)):
                    fh.write(f"{i},{j},{v!r}\n")
            written.append(p)
    meta["files"] = [p.name for p in written]
    written.append(io.write_sidecar(out / "operators.meta.json", meta))
    for p in written:
        print(p)
    return EXIT_OK


# verify


def cmd_verify(args):
    results = verify.run_invariants(quick=args.quick)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.module}.{r.name} max_residual={r.max_residual:.3e} tol={r.tolerance:.1e}")
    ok = all(r.passed for r in results)
    report = {"passed": ok, "count": len(results), "invariants": [r.as_dict() for r in results]}
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=2) + "\n")
    print(f"{sum(r.passed for r in results)}/{len(results)} invariants passed")
    return EXIT_OK if ok else EXIT_VERIFY


# bessel


def cmd_bessel(args):
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in solver.METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {', '.join(solver.METHODS)}")
    ells = parse_range(args.ell)
    if args.fixedN is not None:
        if args.N is not None:
            raise ConfigError("give either --N or --fixedN")
        Ns = [args.fixedN]
    else:
        Ns = parse_range(args.N or "8:256:x2")
    if min(Ns) < 4:
        raise ConfigError("every N must be at least 4")
    if min(ells) < 0:
        raise ConfigError("ell must be non-negative")
    if "jones_worland" in methods and 0 in ells:
        raise ConfigError("the Jones-Worland column needs ell >= 1")
    rows = solver.error_sweep(methods, ells, Ns, jobs=_jobs(args.jobs))
    stream, close = _open_out(args.out)
    try:
        io.write_sweep_csv(stream, rows, timing=args.timing)
    finally:
        if close:
            stream.close()
    return EXIT_OK


# roundtrip


def cmd_roundtrip(args):
    if not 0 <= args.rank <= 2:
        raise ConfigError("rank must be 0, 1 or 2")
    if args.Lmax < 0 or args.N < 1:
        raise ConfigError("Lmax must be >= 0 and N >= 1")
    grid = tensor.projection_grid(args.Lmax, args.N, args.rank, args.alpha)
    if args.field == "constant":
        if args.rank != 0:
            raise ConfigError("the constant field is a scalar; use --rank 0")
        samples = np.ones((1,) + grid.shape)
        spec = tensor.project_tensor(samples, 0, args.Lmax, args.N, grid, args.alpha)
        nonzero = [
            {"ell": l, "m": m, "a": list(a), "n": int(n), "value": [float(c.real), float(c.imag)]}
            for (l, m, a), item in sorted(spec.entries.items())
            for n, c in enumerate(item.coeffs)
            if abs(c) > args.tol
        ]
        back = tensor.synthesize_tensor(spec, grid)
        err = float(np.max(np.abs(back - samples)))
        report = {"field": "constant", "nonzero_coefficients": nonzero, "max_error": err}
    else:
        field_ = tensor.random_field(args.rank, args.Lmax, args.N, args.alpha, rng=args.seed)
        samples = tensor.synthesize_tensor(field_, grid)
        spec = tensor.project_tensor(samples, args.rank, args.Lmax, args.N, grid, args.alpha)
        coeff_err = field_.max_abs_difference(spec)
        sample_err = float(np.max(np.abs(tensor.synthesize_tensor(spec, grid) - samples)))
        err = max(coeff_err, sample_err)
        report = {"field": "random", "seed": args.seed, "coefficient_error": coeff_err,
                  "sample_error": sample_err, "max_error": err}
    report.update(rank=args.rank, Lmax=args.Lmax, N=args.N, alpha=args.alpha, tol=args.tol)
    report["passed"] = bool(err <= args.tol)
    text = json.dumps(report, indent=2)
    if args.json:
        Path(args.json).write_text(text + "\n")
    print(text)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def build_parser():
    p = argparse.ArgumentParser(prog="ballspec", description="Sparse spectral operators for tensors in the unit ball.")
    sub = p.add_subparsers(dest="command", required=True)

    o = sub.add_parser("operators", help="dump radial operators and the regularity rotation")
    o.add_argument("--alpha", type=float, default=0.0)
    o.add_argument("--ell", type=int, required=True)
    o.add_argument("--N", type=int, required=True)
    o.add_argument("--rank", type=int, default=2, help="rank of the dumped rotation matrix")
    o.add_argument("--format", choices=("matrixmarket", "json", "csv"), default="matrixmarket")
    o.add_argument("--out", default=".", help="output directory")
    o.set_defaults(func=cmd_operators)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--quick", action="store_true", help="skip the slower checks")
    v.add_argument("--json", help="write a JSON report here")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bessel", help="relative errors of the first spherical-Bessel root")
    b.add_argument("--ell", default="2")
    b.add_argument("--N", default=None, help="range such as 8:256:x2")
    b.add_argument("--fixedN", type=int, default=None)
    b.add_argument("--methods", default="tau_alpha0,jones_worland,chebyshev")
    b.add_argument("--out", default=None, help="CSV path (default stdout)")
    b.add_argument("--jobs", type=int, default=None, help="worker processes (env BALLSPEC_JOBS)")
    b.add_argument("--timing", action="store_true", help="fill the wall_time_ms column")
    b.set_defaults(func=cmd_bessel)

    r = sub.add_parser("roundtrip", help="grid -> spectral -> grid on a band-limited field")
    r.add_argument("--rank", type=int, default=1)
    r.add_argument("--Lmax", type=int, default=8)
    r.add_argument("--N", type=int, default=12)
    r.add_argument("--alpha", type=float, default=0.0)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--field", choices=("random", "constant"), default="random")
    r.add_argument("--tol", type=float, default=1e-10)
    r.add_argument("--json", help="write the report here")
    r.set_defaults(func=cmd_roundtrip)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
