"""Command-line front end.

Exit codes: 0 success, 2 input/parameter error, 3 internal assertion
failure, 4 verification failure.  Structured output is canonical JSON
(17 significant digits, byte-identical across reruns); sweeps also write
CSV, fields write the MTFR binary format.  MTFR_THREADS caps the BLAS/FFT
thread pools when set before start-up.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile


def _cap_threads():
    cap = os.environ.get("MTFR_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def _atomic_write(path: str, data):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory)
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(obj, out_dir, name, to_stdout=True):
    from .serialize import canonical_json

    text = canonical_json(obj)
    if out_dir:
        _atomic_write(os.path.join(out_dir, name), text)
    elif to_stdout:
        sys.stdout.write(text)


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _parse_grid(spec: str):
    try:
        pts, extent = spec.split("@")
        points = tuple(int(p) for p in pts.replace("×", "x").split("x"))
        return points, float(extent)
    except ValueError:
        print(f"error: bad grid spec {spec!r} (expected e.g. 256x256@16)", file=sys.stderr)
        raise SystemExit(2)


def _load_symplectic(path: str):
    import numpy as np

    from .errors import MtfrError
    from .serialize import matrix_from_obj
    from .symplectic import SymplecticMatrix, symplectic_defect

    obj = _load_json(path)
    try:
        rows = matrix_from_obj(obj)
    except (KeyError, ValueError, MtfrError) as exc:
        print(f"error: malformed matrix JSON: {exc}", file=sys.stderr)
        raise SystemExit(2)
    try:
        return SymplecticMatrix.from_array(rows)
    except MtfrError:
        print(
            f"error: input is not symplectic (residual {symplectic_defect(rows):.3e})",
            file=sys.stderr,
        )
        raise SystemExit(2)


# ---------------------------------------------------------------------------
# commands


def cmd_factor(args) -> int:
    from .serialize import (
        complex_matrix_to_obj,
        matrix_to_obj,
        word_to_obj,
    )
    from .symplectic import factor_to_word, pre_iwasawa

    m = _load_symplectic(args.matrix)
    pre = pre_iwasawa(m)
    word = factor_to_word(m)
    obj = {
        "n": m.n,
        "pre_iwasawa": {
            "Q": matrix_to_obj(pre.q),
            "L": matrix_to_obj(pre.l),
            "U": complex_matrix_to_obj(pre.u),
        },
        "word": word_to_obj(word),
        "reconstruction_error": float(
            __import__("numpy").linalg.norm(word.matrix() - m.entries)
        ),
    }
    _emit(obj, args.out, "factor.json")
    return 0


def cmd_classify(args) -> int:
    from .certify import TOL_BLK, certify
    from .errors import MtfrError, NumericalFailure, RankZero, RealnessFailure
    from .serialize import certificate_to_obj

    bold = _load_symplectic(args.matrix)
    if bold.n % 2:
        print("error: half-dimension must be even for classification", file=sys.stderr)
        return 2
    tol_blk = args.tol_blk if args.tol_blk is not None else TOL_BLK
    if tol_blk <= 0:
        print("error: --tol-blk must be positive", file=sys.stderr)
        return 2
    try:
        cert = certify(bold, tol_blk=tol_blk)
    except (NumericalFailure, RankZero, RealnessFailure) as exc:
        print(f"certification assertion failed: {exc}", file=sys.stderr)
        return 3
    except MtfrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for note in cert.warnings:
        print(f"warning: {note}", file=sys.stderr)
    _emit(certificate_to_obj(cert), args.out, "certificate.json")
    return 0


def _cert_from_obj(obj):
    import numpy as np

    from .certify import AltIData, AltIIData, Certificate
    from .serialize import (
        complex_matrix_from_obj,
        matrix_from_obj,
        word_from_obj,
    )
    from .symplectic import PreIwasawa, SymplecticMatrix

    inter = obj["intermediates"]
    bold = SymplecticMatrix.from_array(matrix_from_obj(inter["bold_matrix"]))
    d = int(obj["d"])
    pre = PreIwasawa(
        matrix_from_obj(inter["pre_iwasawa"]["Q"]),
        matrix_from_obj(inter["pre_iwasawa"]["L"]),
        complex_matrix_from_obj(inter["pre_iwasawa"]["U"]),
    )
    word_bold = word_from_obj(2 * d, inter["word_bold"])
    if obj["alternative"] == "I":
        alt1 = AltIData(
            w=matrix_from_obj(obj["W"]),
            v1=complex_matrix_from_obj(obj["V1"]),
            v2=complex_matrix_from_obj(obj["V2"]),
        )
        return Certificate(
            alternative="I",
            d=d,
            offdiag_norm=float(obj["offdiag_norm"]),
            pre=pre,
            bold=bold,
            word_bold=word_bold,
            alt1=alt1,
            warnings=tuple(obj.get("warnings", ())),
        )
    alt2 = AltIIData(
        tau=complex(obj["tau"]["re"], obj["tau"]["im"]),
        k=int(obj["k"]),
        p=matrix_from_obj(inter["P"]),
        w1=matrix_from_obj(inter["W1"]),
        gamma1=np.asarray(inter["Gamma1"], dtype=float),
        w2=matrix_from_obj(inter["W2"]),
        pi=matrix_from_obj(inter["Pi"]),
        omega=matrix_from_obj(obj["Omega"]),
        word_a=word_from_obj(d, obj["word_A"]),
        word_b=word_from_obj(d, obj["word_B"]),
        chirp_sign=str(inter.get("chirp_sign", "-P22")),
    )
    return Certificate(
        alternative="II",
        d=d,
        offdiag_norm=float(obj["offdiag_norm"]),
        pre=pre,
        bold=bold,
        word_bold=word_bold,
        alt2=alt2,
        warnings=tuple(obj.get("warnings", ())),
    )


def cmd_verify(args) -> int:
    import numpy as np

    from .certify import verify_identity, verify_pair_identity
    from .gaussian import random_gaussian
    from .serialize import gaussian_from_obj, pair_certificate_from_obj

    if args.points <= 0:
        print("error: --points must be positive", file=sys.stderr)
        return 2
    obj = _load_json(args.certificate)
    rng = np.random.default_rng(args.seed)

    if obj.get("kind") == "pair":
        cert = pair_certificate_from_obj(obj)
        d = cert.d
        if args.gaussians is not None:
            f = gaussian_from_obj(_load_json(args.gaussians[0]))
        else:
            f = random_gaussian(d, rng)
        pts = rng.uniform(-args.box, args.box, size=(args.points, 2 * d))
        errs = [
            verify_pair_identity(cert, f, pts[i : i + 1]) for i in range(args.points)
        ]
        err = max(errs)
        if err > args.tol:
            worst = pts[int(np.argmax(errs))]
            print(f"FAIL max relative error {err:.3e} at lambda = {worst.tolist()}")
            return 4
    else:
        if obj.get("alternative") != "II":
            print("error: verification needs an Alternative II or pair certificate",
                  file=sys.stderr)
            return 2
        cert = _cert_from_obj(obj)
        d = cert.d
        if args.gaussians is not None:
            f = gaussian_from_obj(_load_json(args.gaussians[0]))
            g = gaussian_from_obj(_load_json(args.gaussians[1]))
        else:
            f = random_gaussian(d, rng)
            g = random_gaussian(d, rng)
        pts = rng.uniform(-args.box, args.box, size=(args.points, 2 * d))
        errs = [
            verify_identity(cert, f, g, pts[i : i + 1]) for i in range(args.points)
        ]
        err = max(errs)
        worst = pts[int(np.argmax(errs))]
        if err > args.tol:
            print(
                f"FAIL max relative error {err:.3e} at lambda = {worst.tolist()}",
            )
            return 4
        print(f"PASS max relative error {err:.3e} over {args.points} points")
        _emit({"max_relative_error": err, "points": args.points, "tol": args.tol},
              args.out, "verify.json", to_stdout=False)
        return 0

    if err > args.tol:
        print(f"FAIL max relative error {err:.3e}")
        return 4
    print(f"PASS max relative error {err:.3e} over {args.points} points")
    _emit({"max_relative_error": err, "points": args.points, "tol": args.tol},
          args.out, "verify.json", to_stdout=False)
    return 0


def _default_stft_field(grid_spec):
    from .gaussian import standard_gaussian
    from .grid import partial_stft_slice, sample

    points, extent = grid_spec
    phi = sample(standard_gaussian(1), (points[0],), (extent,))
    return partial_stft_slice(phi, phi, 1)


def cmd_check(args) -> int:
    import numpy as np

    from .checks import (
        Ball,
        Box,
        beurling_sweep,
        gelfand_shilov_sweep,
        hardy_fit_field,
        mean_width,
        nazarov_bound,
    )
    from .errors import MtfrError
    from .serialize import read_field, sweep_to_csv

    grid_spec = _parse_grid(args.grid)
    radii = tuple(float(r) for r in args.radii.split(","))
    try:
        if args.field:
            field = read_field(args.field)
        else:
            field = _default_stft_field(grid_spec)
    except MtfrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    pts_flat = field.mesh().reshape(-1, field.n)
    vals_flat = np.abs(field.values).ravel()

    def evaluator(pts):
        # nearest-grid lookup for field-backed evaluators
        idx = []
        for a in range(field.n):
            j = np.rint(pts[:, a] / field.spacing(a)).astype(int) + field.points[a] // 2
            idx.append(np.clip(j, 0, field.points[a] - 1))
        return np.abs(field.values[tuple(idx)])

    try:
        if args.kind == "hardy":
            fit = hardy_fit_field(field, rmin=args.rmin, rmax=args.rmax)
            obj = {
                "condition": "hardy",
                "alpha_hat": fit.alpha,
                "N_hat": fit.n_hat,
                "log_c": fit.log_c,
                "residual": fit.residual,
            }
            _emit(obj, args.out, "report.json")
            return 0
        if args.kind == "beurling":
            d = field.n // 2
            m = np.zeros((field.n, field.n))
            m[:d, d:] = 0.5 * np.eye(d)
            m[d:, :d] = 0.5 * np.eye(d)
            report = beurling_sweep(
                evaluator, m, args.n_exponent, radii, dim=field.n,
                resolution=args.resolution,
            )
        elif args.kind == "gs":
            if args.p <= 1.0:
                print("error: need p > 1", file=sys.stderr)
                return 2
            report = gelfand_shilov_sweep(
                evaluator, args.p, args.alpha, args.beta, radii, dim=field.n,
                resolution=args.resolution,
            )
        elif args.kind == "nazarov":
            from .gaussian import apply_partial_fourier, standard_gaussian
            from .grid import sample
            from .symplectic import standard_j

            points, extent = grid_spec
            im_u = np.eye(1)
            if abs(args.imu) <= 1e-12:
                print("error: Im(U) singular: the Nazarov hypothesis fails",
                      file=sys.stderr)
                return 2
            phi = standard_gaussian(1)
            f1 = sample(phi, (points[0],), (extent,))
            f2 = sample(apply_partial_fourier(phi, (0,)), (points[0],), (extent,))
            s_shape = Box((0.0,), (args.s_halfwidth,))
            t_shape = Box((0.0,), (args.t_halfwidth,))
            rep = nazarov_bound(
                f1, f2, s_shape, t_shape, np.eye(1), np.eye(1),
                args.imu * im_u, c=args.constant,
            )
            obj = {
                "condition": "nazarov",
                "lhs": rep.lhs,
                "rhs": rep.rhs,
                "ratio": rep.ratio,
                "nc": rep.nc,
                "calibration_c0": rep.calibration_c0,
                "complement_s": rep.complement_s,
                "complement_t": rep.complement_t,
                "ball_width_check": mean_width(Ball((0.0,), 1.0))[0],
            }
            _emit(obj, args.out, "report.json")
            return 0
        else:
            print(f"error: unknown check kind {args.kind}", file=sys.stderr)
            return 2
    except MtfrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    obj = {
        "condition": report.condition,
        "parameters": {
            k: v for k, v in report.parameters.items() if not isinstance(v, tuple)
        },
        "sweep": [[r, v] for r, v in report.sweep],
        "ratios": list(report.ratios),
        "verdict": report.verdict,
        "rule": report.rule,
    }
    if args.format in ("json", "both"):
        _emit(obj, args.out, "report.json")
    if args.format in ("csv", "both"):
        if args.out:
            _atomic_write(os.path.join(args.out, "sweep.csv"), sweep_to_csv(report))
        else:
            sys.stdout.write(sweep_to_csv(report))
    return 0


def cmd_counterexample(args) -> int:
    import numpy as np

    from .certify import alt1_tfr_tensor, counterexample_alt1
    from .errors import MtfrError
    from .grid import field_l2, mass_outside
    from .serialize import write_field

    obj = _load_json(args.certificate)
    if obj.get("alternative") != "I":
        print("error: counterexamples need an Alternative I certificate",
              file=sys.stderr)
        return 2
    cert = _cert_from_obj(obj)
    points, extent = _parse_grid(args.grid)
    if points[0] < 128:
        print(f"warning: {points[0]} points per axis is coarse; "
              "expect larger discretization error", file=sys.stderr)
    try:
        cx = counterexample_alt1(
            cert, bump_box=(-args.bump_halfwidth, args.bump_halfwidth),
            points=points[0], extent=extent,
        )
        tfr = alt1_tfr_tensor(cx)
    except MtfrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    lo = np.full(2, -args.bump_halfwidth)
    hi = np.full(2, args.bump_halfwidth)
    mass = mass_outside(tfr, (lo, hi))
    report = {
        "mass_outside": mass,
        "predicted_map": [list(map(float, r)) for r in cx.predicted_map],
        "bump_box": list(cx.bump_box),
        "f_l2": field_l2(cx.f),
        "g_l2": field_l2(cx.g),
    }
    _emit(report, args.out, "mass.json")
    if args.out and args.format in ("bin", "both"):
        write_field(cx.f, os.path.join(args.out, "f.bin"))
        write_field(cx.g, os.path.join(args.out, "g.bin"))
        write_field(tfr, os.path.join(args.out, "tfr.bin"))
    if mass > 1e-4:
        print(f"FAIL mass outside predicted support {mass:.3e} exceeds 1e-4")
        return 4
    print(f"PASS mass outside predicted support {mass:.3e}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtfr",
        description="Symplectic factorizations, time-frequency representation "
        "certificates, and uncertainty-principle checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factor", help="pre-Iwasawa decomposition and generator word")
    p.add_argument("matrix", help="symplectic matrix JSON")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("classify", help="Alternative I/II certificate")
    p.add_argument("matrix", help="symplectic matrix JSON (doubled dimension)")
    p.add_argument("--tol-blk", type=float, default=None,
                   help="block-diagonality tolerance (default 1e-8)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="check the reduction identity of a certificate")
    p.add_argument("certificate", help="certificate JSON")
    p.add_argument("--gaussians", nargs="+", default=None,
                   help="Gaussian JSON inputs (f [g]); default random")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--box", type=float, default=3.0, help="sample box half-width")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("check", help="uncertainty-principle condition sweeps")
    p.add_argument("kind", choices=["beurling", "hardy", "gs", "nazarov"])
    p.add_argument("--field", default=None, help="MTFR binary field input")
    p.add_argument("--grid", default="256@16", help="grid spec points[x...]@extent")
    p.add_argument("--radii", default="1,2,4,8")
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--n-exponent", type=float, default=0.0)
    p.add_argument("--rmin", type=float, default=1.5)
    p.add_argument("--rmax", type=float, default=4.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=1.5)
    p.add_argument("--beta", type=float, default=1.5)
    p.add_argument("--s-halfwidth", type=float, default=2.0)
    p.add_argument("--t-halfwidth", type=float, default=2.0)
    p.add_argument("--imu", type=float, default=1.0, help="Im(U) scalar (d = 1)")
    p.add_argument("--constant", type=float, default=1.0, help="Nazarov constant C")
    p.add_argument("--format", choices=["json", "csv", "both"], default="both")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("counterexample",
                       help="compactly supported pair for an Alternative I certificate")
    p.add_argument("certificate")
    p.add_argument("--grid", default="256@16")
    p.add_argument("--bump-halfwidth", type=float, default=2.0)
    p.add_argument("--format", choices=["json", "bin", "both"], default="both")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_counterexample)

    return parser


def main(argv=None) -> int:
    _cap_threads()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except AssertionError as exc:
        print(f"internal assertion: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
