"""Command-line surface over JSON files.

Exit codes: 0 success / positive verdict, 1 definite negative verdict,
2 input or processing error, 3 budget exhausted (best-so-far emitted).
Results go to stdout (or --out, written atomically); an optional --manifest
sidecar records input digests, seeds, tolerances, wall time, and the digest
of the emitted result for replay checks.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import tempfile
import time


def _apply_thread_cap():
    cap = os.environ.get("TSEP_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise argparse.ArgumentTypeError(f"cannot parse complex number from {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsep",
        description="Positivity, atomic decomposition, dilation, duality, and "
                    "entanglement tooling for block-Toeplitz matrices and matrix "
                    "trigonometric polynomials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the result JSON to this path (atomic)")
        p.add_argument("--manifest", help="write a run manifest JSON to this path")

    p = sub.add_parser("check", help="certify positivity of an element")
    p.add_argument("path")
    p.add_argument("--kind", choices=["toeplitz", "trigpoly"],
                   help="override the file's kind tag")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--grid", type=int, default=None, help="initial sampling grid (trigpoly)")
    common(p)

    p = sub.add_parser("decompose", help="atomic (separable) decomposition")
    p.add_argument("path")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-atoms", type=int, default=60)
    p.add_argument("--max-rounds", type=int, default=200)
    p.add_argument("--engine", choices=["auto", "caratheodory", "greedy", "grid2d"],
                   default="auto")
    common(p)

    p = sub.add_parser("factorize", help="decompose, dilate, and verify the factorization")
    p.add_argument("path")
    p.add_argument("--tol", type=float, default=1e-8)
    common(p)

    p = sub.add_parser("witness", help="entanglement witness / separability search")
    p.add_argument("path")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--search-budget", type=int, default=40,
                   help="rounds for the separability search")
    p.add_argument("--tol", type=float, default=1e-9)
    common(p)

    p = sub.add_parser("gen", help="emit a reproducible instance")
    p.add_argument("--mode", choices=["atoms", "density", "pure", "universal", "dualpure"],
                   required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--atoms", type=int, default=3, help="atom count for atoms mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lam", type=_parse_complex, default=complex(1.0),
                   help="circle point for universal mode, as RE or RE,IM")
    p.add_argument("--sidecar", help="path for the ground-truth sidecar (atoms/pure modes)")
    common(p)

    p = sub.add_parser("pair", help="duality pairing of a Toeplitz and a trig-poly file")
    p.add_argument("toeplitz_path")
    p.add_argument("trigpoly_path")
    common(p)

    p = sub.add_parser("cp-probe", help="Toeplitz complete positivity probe of a matrix map")
    p.add_argument("map_path")
    p.add_argument("--nmax", type=int, default=5)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    common(p)

    return parser


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return _sha256(fh.read())


def _emit(text: str, out_path: str | None):
    if out_path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out_path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tsep-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_kind(path: str, want_kind: str | None):
    from . import serialize

    element = serialize.load_path(path)
    if want_kind is not None:
        from .errors import ParseError
        from .toeplitz import BlockToeplitz, TrigMatrixPoly

        expected = {"toeplitz": BlockToeplitz, "trigpoly": TrigMatrixPoly}[want_kind]
        if not isinstance(element, expected):
            raise ParseError(f"file holds a different kind than requested {want_kind!r}")
    return element


def _choose_engine(element, requested: str) -> str:
    from .separability import _is_toeplitz_block

    if requested != "auto":
        return requested
    if element.p == 1:
        return "caratheodory"
    if (element.n, element.p) == (2, 2):
        scale = max(1.0, float(abs(element.coeffs).max()))
        if all(_is_toeplitz_block(element.coeff(ell), 1e-9 * scale) for ell in (-1, 0, 1)):
            return "grid2d"
    return "greedy"


def _cmd_check(args, info):
    from . import serialize
    from .positivity import check_toeplitz_psd, check_trigpoly_psd
    from .toeplitz import BlockToeplitz

    element = _load_kind(args.path, args.kind)
    if isinstance(element, BlockToeplitz):
        cert = check_toeplitz_psd(element, args.tol)
    else:
        cert = check_trigpoly_psd(element, args.grid, args.tol)
    info["tolerances"] = {"tol": args.tol, "grid": args.grid}
    return serialize.positivity_cert_to_json(cert), (0 if cert.is_positive() else 1)


def _cmd_decompose(args, info):
    from . import serialize
    from .errors import BudgetExhaustedError
    from .separability import (
        caratheodory_scalar,
        decompose_block,
        decompose_toeplitz_toeplitz,
    )

    element = _load_kind(args.path, "toeplitz")
    engine = _choose_engine(element, args.engine)
    info["engine"] = engine
    info["tolerances"] = {"tol": args.tol, "max_atoms": args.max_atoms,
                          "max_rounds": args.max_rounds}
    try:
        if engine == "caratheodory":
            dec = caratheodory_scalar(element, tol=args.tol)
            payload = serialize.decomposition_to_json(dec)
        elif engine == "grid2d":
            dec = decompose_toeplitz_toeplitz(element, tol=args.tol)
            payload = serialize.product_decomposition_to_json(dec)
        else:
            dec = decompose_block(element, tol=args.tol, max_atoms=args.max_atoms,
                                  max_rounds=args.max_rounds)
            payload = serialize.decomposition_to_json(dec)
    except BudgetExhaustedError as exc:
        if exc.best is None:
            raise
        if engine == "grid2d":
            payload = serialize.product_decomposition_to_json(exc.best)
        else:
            payload = serialize.decomposition_to_json(exc.best)
        info["residual"] = payload["residual"]
        return payload, 3
    info["residual"] = payload["residual"]
    return payload, 0


def _cmd_factorize(args, info):
    from . import serialize
    from .dilation import coefficient_deviation, naimark_from_atoms, verify_factorization
    from .errors import BudgetExhaustedError
    from .separability import caratheodory_scalar, decompose_block

    element = _load_kind(args.path, "toeplitz")
    engine = "caratheodory" if element.p == 1 else "greedy"
    info["engine"] = engine
    info["tolerances"] = {"tol": args.tol}
    exit_code = 0
    try:
        if engine == "caratheodory":
            dec = caratheodory_scalar(element, tol=args.tol)
        else:
            dec = decompose_block(element, tol=args.tol)
    except BudgetExhaustedError as exc:
        if exc.best is None:
            raise
        dec = exc.best
        exit_code = 3
    fac = naimark_from_atoms(dec)
    payload = serialize.dilation_to_json(fac)
    payload["verification_residual"] = verify_factorization(element, fac)
    payload["coefficient_deviation"] = coefficient_deviation(element, fac)
    payload["decomposition_residual"] = float(dec.residual)
    return payload, exit_code


def _cmd_witness(args, info):
    from . import serialize
    from .entanglement import (
        ENTANGLED,
        SEPARABLE_FOUND,
        rank_one_range_witness,
        separability_search_dual,
    )

    element = _load_kind(args.path, "trigpoly")
    info["tolerances"] = {"tol": args.tol, "samples": args.samples,
                          "search_budget": args.search_budget}
    cert = rank_one_range_witness(element, samples=args.samples, tol=args.tol)
    if cert.verdict != ENTANGLED:
        cert = separability_search_dual(element, tol=args.tol,
                                        max_rounds=args.search_budget)
    payload = serialize.entanglement_cert_to_json(cert)
    return payload, (0 if cert.verdict in (ENTANGLED, SEPARABLE_FOUND) else 3)


def _cmd_gen(args, info):
    from . import generators, serialize

    info["seed"] = args.seed
    info["prng"] = {"name": generators.PRNG_NAME, "version": generators.PRNG_VERSION}
    rng = generators.make_rng(args.seed)
    sidecar_payload = None
    if args.mode == "atoms":
        element, truth = generators.gen_atoms(args.n, args.p, args.atoms, rng)
        payload = serialize.block_toeplitz_to_json(element)
        sidecar_payload = serialize.decomposition_to_json(truth)
    elif args.mode == "density":
        element = generators.gen_density(args.n, args.p, rng)
        payload = serialize.block_toeplitz_to_json(element)
    elif args.mode == "pure":
        element, (lam, alpha, q) = generators.gen_pure(args.n, args.p, rng)
        payload = serialize.block_toeplitz_to_json(element)
        sidecar_payload = {"kind": "pure_ground_truth", "lambda": serialize.cnum(lam),
                           "alpha": alpha, "projection": serialize.cmatrix(q)}
    elif args.mode == "universal":
        element = generators.gen_universal(args.n, args.lam)
        payload = serialize.block_toeplitz_to_json(element)
    else:  # dualpure
        element, w = generators.gen_dualpure(args.n, args.p, rng)
        payload = serialize.trigpoly_to_json(element)
        sidecar_payload = {"kind": "dualpure_ground_truth", "w": serialize.cmatrix(w)}

    sidecar_path = args.sidecar
    if sidecar_path is None and args.out is not None and sidecar_payload is not None:
        sidecar_path = args.out + ".truth.json"
    if sidecar_path is not None and sidecar_payload is not None:
        _emit(serialize.dumps(sidecar_payload), sidecar_path)
        info["sidecar"] = sidecar_path
    return payload, 0


def _cmd_pair(args, info):
    from . import serialize
    from .toeplitz import duality_pair

    t = _load_kind(args.toeplitz_path, "toeplitz")
    f = _load_kind(args.trigpoly_path, "trigpoly")
    value = duality_pair(t, f)
    return {"kind": "pairing", "value": serialize.cnum(value)}, 0


def _cmd_cp_probe(args, info):
    from . import serialize
    from .cpmaps import DEFAULT_PROBE_SEED, toeplitz_cp_probe

    psi = _load_kind(args.map_path, None)
    from .cpmaps import MatrixMap
    from .errors import ParseError

    if not isinstance(psi, MatrixMap):
        raise ParseError("cp-probe expects a matrixmap file")
    seed = DEFAULT_PROBE_SEED if args.seed is None else args.seed
    info["seed"] = seed
    info["tolerances"] = {"tol": args.tol, "nmax": args.nmax, "trials": args.trials}
    report = toeplitz_cp_probe(psi, n_max=args.nmax, trials=args.trials,
                               seed=seed, tol=args.tol)
    return serialize.probe_report_to_json(report), (0 if report.ok else 1)


_COMMANDS = {
    "check": _cmd_check,
    "decompose": _cmd_decompose,
    "factorize": _cmd_factorize,
    "witness": _cmd_witness,
    "gen": _cmd_gen,
    "pair": _cmd_pair,
    "cp-probe": _cmd_cp_probe,
}


def _input_paths(args) -> list:
    return [p for p in (getattr(args, "path", None),
                        getattr(args, "toeplitz_path", None),
                        getattr(args, "trigpoly_path", None),
                        getattr(args, "map_path", None)) if p]


def main(argv=None) -> int:
    _apply_thread_cap()
    args = _build_parser().parse_args(argv)

    from . import serialize
    from .errors import (
        BudgetExhaustedError,
        NotPositiveError,
        NotStrictlyPositiveError,
        TsepError,
    )

    started = time.monotonic()
    info: dict = {}
    try:
        payload, exit_code = _COMMANDS[args.command](args, info)
    except (NotPositiveError, NotStrictlyPositiveError) as exc:
        print(f"tsep {args.command}: {exc}", file=sys.stderr)
        return 1
    except BudgetExhaustedError as exc:
        print(f"tsep {args.command}: {exc}", file=sys.stderr)
        return 3
    except TsepError as exc:
        print(f"tsep {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"tsep {args.command}: {exc}", file=sys.stderr)
        return 2

    text = serialize.dumps(payload)
    _emit(text, args.out)

    if args.manifest:
        manifest = {
            "kind": "run_manifest",
            "command": list(argv) if argv is not None else sys.argv[1:],
            "inputs": {p: _file_digest(p) for p in _input_paths(args)},
            "seed": info.get("seed"),
            "engine": info.get("engine"),
            "tolerances": info.get("tolerances", {}),
            "prng": info.get("prng"),
            "wall_time_s": time.monotonic() - started,
            "result_sha256": _sha256(text.encode("utf-8")),
        }
        _emit(serialize.dumps(manifest), args.manifest)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
