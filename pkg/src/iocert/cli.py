"""Command-line front end.

Data goes to stdout (or ``--out``), diagnostics to stderr. Exit codes: 2 for
unreadable input or bad parameters, 3 for dimension mismatches, 4 when a
model has too many components, 5 when the measurement matrix is not onto.
"""

import argparse
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from ._json import (
    ParseError,
    csv_text,
    dumps,
    load_json,
    matrix_from_json,
    vector_from_json,
)
from .certify import _canonical_frame, certify, frame_constant, io_constant_lower_bound
from .certify import nsp_constant_l2, rip_constants
from .constructions import fourier_rank1_onb, hyperbola_demo, hyperbola_svg, spd_sparse_inverse_onb
from .decoders import (
    SAMPLERS,
    decode_noise_aware,
    decode_noiseless,
    decode_robust,
    io_harness,
)
from .exceptions import (
    ComponentOverflowError,
    ConvergenceError,
    DimensionMismatchError,
    NotOntoError,
    UnsupportedModelError,
)
from .linalg import RANK_TOL
from .models import KSparse, LowRank, model_from_dict, project_model
from .norms import (
    L2,
    MNorm,
    atomic_norm,
    eval_norm,
    greedy_decomposition,
    m_distance_to_model,
    noisy_anchor_bound,
    norm_from_dict,
    sigma_norm_sandwich,
)

EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_OVERFLOW = 4
EXIT_NOT_ONTO = 5


def _load_model(path):
    spec = load_json(path)
    try:
        return model_from_dict(spec)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DimensionMismatchError):
            raise
        raise ParseError(f"bad model description in {path}: {exc}") from exc


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _header(args):
    return {"tool": "iocert", "version": __version__, "seed": args.seed}


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ParseError(f"expected comma-separated numbers, got {text!r}") from exc


# ---------------------------------------------------------------------------
# certify


def _parse_sweep(spec, n):
    m = re.fullmatch(r"(?:m=)?(\d+)\.\.(\d+|n)", spec.strip())
    if not m:
        raise ParseError(f"sweep must look like m=1..n, got {spec!r}")
    lo = int(m.group(1))
    hi = n if m.group(2) == "n" else int(m.group(2))
    if not 1 <= lo <= hi <= n:
        raise ParseError(f"sweep range must satisfy 1 <= lo <= hi <= {n}")
    return range(lo, hi + 1)


def cmd_certify(args):
    model = _load_model(args.model)
    n = model.ambient_dim
    if args.sweep:
        rng = np.random.default_rng(args.seed)
        frame = _canonical_frame(model, args.max_count)
        K = frame_constant(frame) if frame is not None else None
        rows = []
        for m in _parse_sweep(args.sweep, n):
            G = rng.standard_normal((m, n))
            d = nsp_constant_l2(G, model, args.max_count).d_star
            # a trivial kernel (m = n) has d_star = 0 and no lower bound
            bound = io_constant_lower_bound(n, m, K) if K and m < n else None
            rows.append((m, bound, d))
        _emit(csv_text(["m", "d_star_lower_bound", "d_star"], rows), args.out)
        return 0
    if not args.matrix:
        raise ParseError("--matrix is required unless --sweep is given")
    M = matrix_from_json(load_json(args.matrix))
    frame = None
    if args.frame:
        frame = matrix_from_json(load_json(args.frame), key="vectors")
    start = time.perf_counter()
    tol = RANK_TOL if args.tol is None else args.tol
    rep = certify(M, model, args.max_count, tol, frame_vectors=frame, seed=args.seed)
    out = _header(args)
    out.update(
        {
            "d_star": rep.d_star,
            "alpha": rep.alpha,
            "beta": rep.beta,
            "frame_K": rep.frame_K,
            "m_lower_bound": rep.m_lower_bound,
            "io_lower_bound": rep.io_lower_bound,
            "worst_pair": list(rep.worst_pair) if rep.worst_pair is not None else None,
            "rank": rep.rank,
            "exact": rep.exact,
            "tolerances": rep.tolerances,
        }
    )
    if args.timing:
        out["runtime_seconds"] = time.perf_counter() - start
    _emit(dumps(out), args.out)
    return 0


# ---------------------------------------------------------------------------
# decode and harness


def _alpha(args, M, model):
    if args.alpha is not None:
        if not args.alpha > 0:
            raise ParseError("--alpha must be positive")
        return args.alpha
    alpha = rip_constants(M, model, "difference", args.max_count).alpha
    if not alpha > 0:
        raise ParseError("lower RIP constant on Sigma - Sigma is zero; robust decoding is undefined")
    return alpha


def _result_dict(res):
    return {
        "x_hat": res.x_hat,
        "component": res.component,
        "objective": res.objective,
        "residual": res.residual,
        "delta_slack": res.delta_slack,
        "model_point": res.model_point,
        "noise_level": res.noise_level,
    }


def cmd_decode(args):
    if args.harness:
        return cmd_harness(args)
    model = _load_model(args.model)
    M = matrix_from_json(load_json(args.matrix))
    if not args.y:
        raise ParseError("--y is required")
    y = vector_from_json(load_json(args.y), key="y")
    out = _header(args)
    out["mode"] = args.mode
    if args.mode == "noiseless":
        res = decode_noiseless(y, M, model)
    else:
        alpha = _alpha(args, M, model)
        out["alpha"] = alpha
        if args.mode == "robust":
            res = decode_robust(y, M, model, alpha, args.max_count)
        else:
            eps = 0.0 if args.epsilon is None else args.epsilon
            res = decode_noise_aware(y, eps, M, model, alpha, args.max_count)
    out.update(_result_dict(res))

    if args.check:
        x = vector_from_json(load_json(args.check))
        if x.size != M.shape[1]:
            raise DimensionMismatchError(f"ground truth has length {x.size}, M has {M.shape[1]} columns")
        err = float(np.linalg.norm(x - res.x_hat))
        if args.mode == "noiseless":
            d_star = nsp_constant_l2(M, model, args.max_count).d_star
            d = project_model(x, model).distance
            bound = 2.0 * d_star * d if d > 0 else 0.0
            out["check"] = {"error": err, "bound": bound, "d_star": d_star, "distance": d,
                            "holds": bool(err <= bound + 1e-8)}
        else:
            e = y - M @ x
            dm = m_distance_to_model(x, model, M, alpha, tol=args.tol or 1e-8).value
            bound = 2.0 * dm + 2.0 / alpha * float(np.linalg.norm(e))
            anchor = noisy_anchor_bound(x, e, model, M, alpha, tol=args.tol or 1e-8).value
            out["check"] = {"error": err, "bound": bound, "m_distance": dm, "anchor_bound": anchor,
                            "holds": bool(err <= bound + 1e-6)}
    _emit(dumps(out), args.out)
    return 0


def cmd_harness(args):
    model = _load_model(args.model)
    M = matrix_from_json(load_json(args.matrix))
    noise = _floats(args.noise) if args.noise else [0.0]
    tol = args.tol or 1e-8
    out = _header(args)
    out["mode"] = args.mode
    if args.mode == "noiseless":
        d_star = nsp_constant_l2(M, model, args.max_count).d_star
        constants = (2.0 * d_star, 0.0)
        distance, alpha = L2(), None

        def decoder(y):
            return decode_noiseless(y, M, model)

        out["d_star"] = d_star
    else:
        alpha = _alpha(args, M, model)
        constants = (2.0, 2.0 / alpha)
        distance = MNorm(M, alpha)

        def decoder(y):
            return decode_robust(y, M, model, alpha, args.max_count)

        out["alpha"] = alpha
    if args.constants:
        vals = _floats(args.constants)
        if len(vals) != 2:
            raise ParseError("--constants needs two numbers C1,C2")
        constants = tuple(vals)
    rep = io_harness(
        decoder, M, model, L2(), distance, constants, args.trials, noise, args.seed,
        args.sampler, alpha, tol=tol,
    )
    out.update(
        {
            "trials": rep.trials,
            "bound_constant": list(rep.bound_constant),
            "max_ratio": rep.max_ratio,
            "violations": len(rep.violations),
            "anchor_max_ratio": rep.anchor_max_ratio,
            "anchor_violations": len(rep.anchor_violations) if alpha is not None else None,
        }
    )
    if args.csv:
        rows = [(i, *r) for i, r in enumerate(rep.rows)]
        Path(args.csv).write_text(
            csv_text(["trial", "lhs", "rhs", "anchor_rhs", "distance", "noise_norm"], rows)
        )
    _emit(dumps(out), args.out)
    return 0


# ---------------------------------------------------------------------------
# norms


def cmd_norms(args):
    model = _load_model(args.model)
    x = vector_from_json(load_json(args.x))
    if x.size != model.ambient_dim:
        raise DimensionMismatchError(f"x has length {x.size}, model lives in R^{model.ambient_dim}")
    out = _header(args)
    out["l2"] = float(np.linalg.norm(x))
    out["l1"] = float(np.abs(x).sum())
    out["model_distance_l2"] = project_model(x, model).distance
    if isinstance(model, (KSparse, LowRank)):
        lo, hi = sigma_norm_sandwich(x, model)
        g = greedy_decomposition(x, model)
        out["sandwich"] = [lo, hi]
        out["greedy"] = {"value": g.value, "upper_bound": g.upper_bound, "pieces": g.decomposition.pieces}
    if isinstance(model, KSparse):
        a = atomic_norm(x, model, tol=args.tol or 1e-6, max_count=args.max_count)
        out["atomic"] = {"value": a.value, "gap": a.gap, "dual": a.dual, "pieces": a.decomposition.pieces}
    elif isinstance(model, LowRank):
        out["atomic"] = None  # only the sandwich and greedy bounds are available
    if args.matrix:
        M = matrix_from_json(load_json(args.matrix))
        alpha = _alpha(args, M, model)
        out["alpha"] = alpha
        out["m_norm"] = eval_norm(x, MNorm(M, alpha))
        out["m_distance"] = m_distance_to_model(x, model, M, alpha, tol=args.tol or 1e-8).value
    if args.norm:
        spec = norm_from_dict(load_json(args.norm), model)
        out["norm"] = eval_norm(x, spec)
    _emit(dumps(out), args.out)
    return 0


# ---------------------------------------------------------------------------
# witnesses and demo


def _witness_json(kind, params, w):
    certs = []
    for c in w.certificates:
        certs.append({k: (list(v) if isinstance(v, tuple) else v) for k, v in c.items()})
    G = w.gram()
    return {
        "kind": kind,
        **params,
        "complex": bool(np.iscomplexobj(G)),
        "count": len(w.basis_elements),
        "gram_error": float(np.max(np.abs(G - np.eye(len(G))))),
        "elements": w.basis_elements,
        "pairs": [list(p) for p in w.witness_pairs],
        "certificates": certs,
    }


def cmd_witness(args):
    if args.kind == "spd":
        if args.n is None:
            raise ParseError("witness spd needs --n")
        w = spd_sparse_inverse_onb(args.n)
        data = _witness_json("spd", {"n": args.n}, w)
        header = ["element", "i", "j", "inverse_nnz", "min_eigenvalue", "product_error"]
        rows = [
            (t, c["index"][0], c["index"][1], c["inverse_nnz"], c["min_eigenvalue"], c["product_error"])
            for t, c in enumerate(w.certificates)
        ]
    else:
        if args.n1 is None or args.n2 is None:
            raise ParseError("witness fourier needs --n1 and --n2")
        w = fourier_rank1_onb(args.n1, args.n2)
        data = _witness_json("fourier", {"n1": args.n1, "n2": args.n2}, w)
        header = ["element", "k", "l", "u_inf", "v_inf", "uv_inf"]
        rows = [
            (t, c["index"][0], c["index"][1], c["u_inf"], c["v_inf"], c["uv_inf"])
            for t, c in enumerate(w.certificates)
        ]
    data = {**_header(args), **data}
    _emit(dumps(data), args.out)
    if args.csv:
        Path(args.csv).write_text(csv_text(header, rows))
    return 0


def cmd_demo(args):
    t_grid = _floats(args.t) if args.t else None
    rows = hyperbola_demo(args.x2, t_grid)
    text = csv_text(
        ["t", "distance", "vertical_gap", "foot"],
        [(r.t, r.distance, r.vertical_gap, r.foot) for r in rows],
    )
    _emit(text, args.out)
    if args.svg:
        Path(args.svg).write_text(hyperbola_svg(rows, args.x2))
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--max-count", type=int, default=10_000, dest="max_count")

    io = argparse.ArgumentParser(add_help=False)
    io.add_argument("--matrix", required=True)
    io.add_argument("--model", required=True)
    io.add_argument("--mode", choices=["noiseless", "robust", "aware"], default="noiseless")
    io.add_argument("--alpha", type=float)
    io.add_argument("--epsilon", type=float)
    io.add_argument("--trials", type=int, default=1000)
    io.add_argument("--noise", help="comma-separated noise levels for the harness")
    io.add_argument("--sampler", choices=SAMPLERS, default="near")
    io.add_argument("--constants", help="override C1,C2 for the harness")
    io.add_argument("--csv", help="per-trial CSV for the harness")

    p = argparse.ArgumentParser(prog="iocert", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"iocert {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", parents=[common], help="NSP and RIP certificates")
    c.add_argument("--matrix")
    c.add_argument("--model", required=True)
    c.add_argument("--frame", help="JSON with unit frame vectors (rows)")
    c.add_argument("--sweep", help="m=LO..HI: certify random Gaussian matrices, CSV out")
    c.add_argument("--timing", action="store_true", help="include runtime in the report")
    c.set_defaults(func=cmd_certify)

    d = sub.add_parser("decode", parents=[common, io], help="run an ideal decoder")
    d.add_argument("--y")
    d.add_argument("--check", help="ground-truth x to evaluate the error bound")
    d.add_argument("--harness", action="store_true", help="run the IO harness instead")
    d.set_defaults(func=cmd_decode)

    h = sub.add_parser("harness", parents=[common, io], help="empirical instance optimality")
    h.set_defaults(func=cmd_harness)

    n = sub.add_parser("norms", parents=[common], help="evaluate norms of a vector")
    n.add_argument("--x", required=True)
    n.add_argument("--model", required=True)
    n.add_argument("--matrix")
    n.add_argument("--alpha", type=float)
    n.add_argument("--norm", help="JSON norm spec to evaluate")
    n.set_defaults(func=cmd_norms)

    w = sub.add_parser("witness", parents=[common], help="orthonormal bases inside Sigma - Sigma")
    w.add_argument("kind", choices=["spd", "fourier"])
    w.add_argument("--n", type=int)
    w.add_argument("--n1", type=int)
    w.add_argument("--n2", type=int)
    w.add_argument("--csv")
    w.set_defaults(func=cmd_witness)

    m = sub.add_parser("demo", parents=[common], help="pedagogical demos")
    m.add_argument("name", choices=["hyperbola"])
    m.add_argument("--x2", type=float, default=-1.0)
    m.add_argument("--t", help="comma-separated increasing t values")
    m.add_argument("--svg")
    m.set_defaults(func=cmd_demo)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ComponentOverflowError as exc:
        print(f"iocert: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except DimensionMismatchError as exc:
        print(f"iocert: dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except NotOntoError as exc:
        print(f"iocert: {exc}", file=sys.stderr)
        return EXIT_NOT_ONTO
    except ConvergenceError as exc:
        print(f"iocert: {exc} (best value {exc.best_value})", file=sys.stderr)
        return 1
    except (ParseError, UnsupportedModelError, ValueError) as exc:
        print(f"iocert: {exc}", file=sys.stderr)
        return EXIT_PARSE

