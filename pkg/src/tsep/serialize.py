"""JSON schemas for every artifact type.

Complex numbers are two-element [re, im] arrays; matrices are
{"rows", "cols", "data"} with row-major flat data; structured objects carry
a "kind" tag used for dispatch. Serialization is deterministic (sorted keys,
repr floats) so identical inputs produce byte-identical outputs.
"""

from __future__ import annotations

import json

import numpy as np

from .cpmaps import MatrixMap, ProbeReport, ProbeViolation
from .dilation import DilationFactorization
from .entanglement import EntanglementCertificate
from .errors import ParseError
from .positivity import PositivityCertificate
from .separability import AtomicDecomposition, ProductDecomposition
from .toeplitz import BlockToeplitz, TrigMatrixPoly

KIND_TOEPLITZ = "toeplitz"
KIND_TRIGPOLY = "trigpoly"
KIND_DECOMPOSITION = "decomposition"
KIND_PRODUCT_DECOMPOSITION = "product_decomposition"
KIND_DILATION = "dilation"
KIND_MATRIXMAP = "matrixmap"
KIND_POSITIVITY_CERT = "positivity_certificate"
KIND_ENTANGLEMENT_CERT = "entanglement_certificate"
KIND_PROBE_REPORT = "probe_report"


def cnum(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def cnum_from(obj) -> complex:
    try:
        re, im = obj
        return complex(float(re), float(im))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"expected a [re, im] pair, got {obj!r}") from exc


def cmatrix(m) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim == 1:
        m = m[None, :]
    rows, cols = m.shape
    flat = m.reshape(-1)
    return {"rows": rows, "cols": cols,
            "data": [[z.real, z.imag] for z in flat]}


def cmatrix_from(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        data = obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix object: {exc}") from exc
    if len(data) != rows * cols:
        raise ParseError(f"matrix data length {len(data)} != rows*cols {rows * cols}")
    flat = np.array([cnum_from(z) for z in data])
    return (flat[:, 0] + 1j * flat[:, 1]).reshape(rows, cols)


def _cvector(v) -> list:
    return [cnum(z) for z in np.asarray(v).ravel()]


def _jsonify(value):
    """Recursive best-effort conversion of evidence payloads to JSON types."""
    if isinstance(value, dict):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, TrigMatrixPoly):
        return trigpoly_to_json(value)
    if isinstance(value, BlockToeplitz):
        return block_toeplitz_to_json(value)
    if isinstance(value, np.ndarray):
        if value.ndim <= 1:
            return _cvector(value)
        if value.ndim == 2:
            return cmatrix(value)
        return [_jsonify(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return cnum(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def block_toeplitz_to_json(t: BlockToeplitz) -> dict:
    return {"kind": KIND_TOEPLITZ, "n": t.n, "p": t.p,
            "coeffs": [cmatrix(c) for c in t.coeffs]}


def trigpoly_to_json(f: TrigMatrixPoly) -> dict:
    return {"kind": KIND_TRIGPOLY, "n": f.n, "p": f.p,
            "coeffs": [cmatrix(c) for c in f.coeffs]}


def _coeffs_from(obj):
    try:
        n, p = int(obj["n"]), int(obj["p"])
        raw = obj["coeffs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed element object: {exc}") from exc
    if len(raw) != 2 * n - 1:
        raise ParseError(f"expected {2 * n - 1} coefficients, got {len(raw)}")
    coeffs = np.stack([cmatrix_from(c) for c in raw])
    if coeffs.shape != (2 * n - 1, p, p):
        raise ParseError(f"coefficient matrices are not all {p}x{p}")
    return n, p, coeffs


def block_toeplitz_from_json(obj) -> BlockToeplitz:
    return BlockToeplitz(*_coeffs_from(obj))


def trigpoly_from_json(obj) -> TrigMatrixPoly:
    return TrigMatrixPoly(*_coeffs_from(obj))


def decomposition_to_json(d: AtomicDecomposition) -> dict:
    return {
        "kind": KIND_DECOMPOSITION, "n": d.n, "p": d.p,
        "atoms": [{"lambda": cnum(lam), "b": cmatrix(b)} for lam, b in d.atoms()],
        "residual": float(d.residual),
    }


def decomposition_from_json(obj) -> AtomicDecomposition:
    try:
        n, p = int(obj["n"]), int(obj["p"])
        atoms = obj["atoms"]
        residual = float(obj["residual"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed decomposition: {exc}") from exc
    lambdas = np.array([cnum_from(a["lambda"]) for a in atoms], dtype=np.complex128)
    blocks = (np.stack([cmatrix_from(a["b"]) for a in atoms])
              if atoms else np.zeros((0, p, p), dtype=np.complex128))
    return AtomicDecomposition(n, p, lambdas, blocks, residual)


def product_decomposition_to_json(d: ProductDecomposition) -> dict:
    return {
        "kind": KIND_PRODUCT_DECOMPOSITION,
        "atoms": [{"lambda": cnum(lam), "mu": cnum(mu), "weight": w}
                  for lam, mu, w in d.terms()],
        "residual": float(d.residual),
    }


def dilation_to_json(f: DilationFactorization) -> dict:
    return {
        "kind": KIND_DILATION, "q": f.q,
        "u": cmatrix(f.u), "w": cmatrix(f.w),
        "spectrum": [{"lambda": cnum(lam), "mult": int(mult)} for lam, mult in f.spectrum],
    }


def dilation_from_json(obj) -> DilationFactorization:
    try:
        q = int(obj["q"])
        u = cmatrix_from(obj["u"])
        w = cmatrix_from(obj["w"])
        spectrum = [(cnum_from(s["lambda"]), int(s["mult"])) for s in obj["spectrum"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed dilation: {exc}") from exc
    return DilationFactorization(q, u, w, spectrum)


def positivity_cert_to_json(c: PositivityCertificate) -> dict:
    return {"kind": KIND_POSITIVITY_CERT, "verdict": c.verdict,
            "margin": float(c.margin), "witness": _jsonify(c.witness)}


def entanglement_cert_to_json(c: EntanglementCertificate) -> dict:
    return {"kind": KIND_ENTANGLEMENT_CERT, "verdict": c.verdict,
            "evidence": _jsonify(c.evidence)}


def matrixmap_to_json(m: MatrixMap) -> dict:
    units = [cmatrix(m.unit_values[i, j]) for i in range(m.p) for j in range(m.p)]
    return {"kind": KIND_MATRIXMAP, "p": m.p, "q": m.q, "units": units}


def matrixmap_from_json(obj) -> MatrixMap:
    builtin = obj.get("builtin")
    if builtin is not None:
        try:
            p = int(obj["p"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"matrixmap builtin requires p: {exc}") from exc
        factories = {"identity": MatrixMap.identity,
                     "transpose": MatrixMap.transpose,
                     "depolarizing": MatrixMap.depolarizing}
        if builtin not in factories:
            raise ParseError(f"unknown builtin map {builtin!r}")
        return factories[builtin](p)
    try:
        p, q = int(obj["p"]), int(obj["q"])
        units = obj["units"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrixmap: {exc}") from exc
    if len(units) != p * p:
        raise ParseError(f"expected {p * p} unit values, got {len(units)}")
    stack = np.stack([cmatrix_from(u) for u in units]).reshape(p, p, q, q)
    return MatrixMap(p, q, stack)


def probe_report_to_json(r: ProbeReport) -> dict:
    return {
        "kind": KIND_PROBE_REPORT,
        "seed": r.seed, "prng": r.prng, "prng_version": r.prng_version,
        "n_max": r.n_max, "trials": r.trials, "tol": r.tol,
        "num_checked": r.num_checked,
        "max_negative_eigenvalue": r.max_negative_eigenvalue,
        "violations": [_violation_to_json(v) for v in r.violations],
    }


def _violation_to_json(v: ProbeViolation) -> dict:
    return {
        "n": v.n, "trial": v.trial, "generator": v.generator,
        "lambda_min": v.lambda_min,
        "eigenvector": _cvector(v.eigenvector),
        "input": block_toeplitz_to_json(v.input_element),
    }


_ELEMENT_LOADERS = {
    KIND_TOEPLITZ: block_toeplitz_from_json,
    KIND_TRIGPOLY: trigpoly_from_json,
    KIND_DECOMPOSITION: decomposition_from_json,
    KIND_DILATION: dilation_from_json,
    KIND_MATRIXMAP: matrixmap_from_json,
}


def loads(text: str):
    """Parse a JSON document and dispatch on its "kind" tag."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return from_obj(obj)


def from_obj(obj):
    if not isinstance(obj, dict):
        raise ParseError(f"expected a JSON object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind is None:
        raise ParseError('missing "kind" tag')
    loader = _ELEMENT_LOADERS.get(kind)
    if loader is None:
        raise ParseError(f"unsupported kind {kind!r}")
    return loader(obj)


def load_path(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(obj: dict) -> str:
    """Deterministic JSON encoding (sorted keys, two-space indent)."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
