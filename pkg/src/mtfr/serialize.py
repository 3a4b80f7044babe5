"""JSON, CSV, and binary wire formats.

JSON output is rendered by a small canonical writer with floats fixed to
17 significant digits, so identical inputs produce byte-identical files.
Fields travel as little-endian binary: magic "MTFR", version u32, n u32,
per-axis (points u64, extent f64), then interleaved (re, im) f64.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import DimensionMismatch
from .grid import SampledField
from .gaussian import GeneralizedGaussian
from .symplectic import (
    Chirp,
    Dilation,
    GeneratorWord,
    PartialFourier,
    SymplecticMatrix,
)

FIELD_MAGIC = b"MTFR"
FIELD_VERSION = 1

__all__ = [
    "canonical_json",
    "matrix_to_obj",
    "matrix_from_obj",
    "complex_matrix_to_obj",
    "complex_matrix_from_obj",
    "word_to_obj",
    "word_from_obj",
    "gaussian_to_obj",
    "gaussian_from_obj",
    "certificate_to_obj",
    "pair_certificate_to_obj",
    "pair_certificate_from_obj",
    "write_field",
    "read_field",
    "field_to_csv",
    "sweep_to_csv",
]


def _fmt_float(x: float) -> str:
    if np.isnan(x) or np.isinf(x):
        raise ValueError("JSON output cannot carry NaN or infinity")
    s = format(float(x), ".17g")
    return s


def _render(obj, out: list):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(obj))
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, val) in enumerate(obj.items()):
            if i:
                out.append(",")
            _render(str(key), out)
            out.append(":")
            _render(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, val in enumerate(obj):
            if i:
                out.append(",")
            _render(val, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj)}")


def canonical_json(obj) -> str:
    """Deterministic JSON text: insertion order, 17 significant digits."""
    out: list = []
    _render(obj, out)
    return "".join(out) + "\n"


# ---------------------------------------------------------------------------
# matrices and words


def matrix_to_obj(m) -> dict:
    if isinstance(m, SymplecticMatrix):
        return {"n": m.n, "rows": [list(map(float, r)) for r in m.entries]}
    m = np.asarray(m, dtype=float)
    n = m.shape[0] // 2 if m.shape[0] % 2 == 0 else m.shape[0]
    return {"n": n, "rows": [list(map(float, r)) for r in m]}


def matrix_from_obj(obj) -> np.ndarray:
    rows = np.asarray(obj["rows"], dtype=float)
    if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
        raise DimensionMismatch("matrix rows must be square")
    return rows


def complex_matrix_to_obj(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "n": m.shape[0],
        "re": [list(map(float, r)) for r in m.real],
        "im": [list(map(float, r)) for r in m.imag],
    }


def complex_matrix_from_obj(obj) -> np.ndarray:
    return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)


def word_to_obj(word: GeneratorWord) -> list:
    letters = []
    for letter in word.letters:
        if isinstance(letter, Chirp):
            letters.append({"kind": "chirp", "q": [list(map(float, r)) for r in letter.q]})
        elif isinstance(letter, Dilation):
            letters.append({"kind": "dilation", "l": [list(map(float, r)) for r in letter.l]})
        elif isinstance(letter, PartialFourier):
            letters.append({"kind": "pfourier", "axes": list(letter.axes)})
    return letters


def word_from_obj(n: int, obj) -> GeneratorWord:
    letters = []
    for item in obj:
        kind = item["kind"]
        if kind == "chirp":
            letters.append(Chirp(np.asarray(item["q"], dtype=float)))
        elif kind == "dilation":
            letters.append(Dilation(np.asarray(item["l"], dtype=float)))
        elif kind == "pfourier":
            letters.append(PartialFourier(tuple(item["axes"])))
        else:
            raise DimensionMismatch(f"unknown letter kind {kind!r}")
    return GeneratorWord(n, tuple(letters))


def gaussian_to_obj(g: GeneralizedGaussian) -> dict:
    return {
        "n": g.n,
        "M_re": [list(map(float, r)) for r in g.m.real],
        "M_im": [list(map(float, r)) for r in g.m.imag],
        "b_re": list(map(float, g.b.real)),
        "b_im": list(map(float, g.b.imag)),
        "logamp": float(g.logamp),
    }


def gaussian_from_obj(obj) -> GeneralizedGaussian:
    m = np.asarray(obj["M_re"], dtype=float) + 1j * np.asarray(obj["M_im"], dtype=float)
    b = np.asarray(obj["b_re"], dtype=float) + 1j * np.asarray(obj["b_im"], dtype=float)
    return GeneralizedGaussian(m, b, float(obj["logamp"]))


# ---------------------------------------------------------------------------
# certificates


def certificate_to_obj(cert) -> dict:
    obj = {
        "alternative": cert.alternative,
        "d": cert.d,
        "offdiag_norm": float(cert.offdiag_norm),
        "warnings": list(cert.warnings),
        "intermediates": {
            "bold_matrix": matrix_to_obj(cert.bold),
            "pre_iwasawa": {
                "Q": matrix_to_obj(cert.pre.q),
                "L": matrix_to_obj(cert.pre.l),
                "U": complex_matrix_to_obj(cert.pre.u),
            },
            "word_bold": word_to_obj(cert.word_bold),
        },
    }
    if cert.alternative == "I":
        obj["W"] = matrix_to_obj(cert.alt1.w)
        obj["V1"] = complex_matrix_to_obj(cert.alt1.v1)
        obj["V2"] = complex_matrix_to_obj(cert.alt1.v2)
    else:
        a2 = cert.alt2
        obj["tau"] = {"re": float(np.real(a2.tau)), "im": float(np.imag(a2.tau))}
        obj["k"] = a2.k
        obj["Omega"] = matrix_to_obj(a2.omega)
        obj["word_A"] = word_to_obj(a2.word_a)
        obj["word_B"] = word_to_obj(a2.word_b)
        obj["intermediates"].update(
            {
                "P": matrix_to_obj(a2.p),
                "Gamma1": list(map(float, a2.gamma1)),
                "W1": matrix_to_obj(a2.w1),
                "W2": matrix_to_obj(a2.w2),
                "Pi": matrix_to_obj(a2.pi),
                "chirp_sign": a2.chirp_sign,
                "omega_condition": float(np.linalg.cond(a2.omega)),
            }
        )
    return obj


def pair_certificate_to_obj(pc) -> dict:
    return {
        "kind": "pair",
        "d": pc.d,
        "k": pc.k,
        "V": complex_matrix_to_obj(pc.v),
        "Omega": matrix_to_obj(pc.omega),
        "word_B": word_to_obj(pc.word_b),
        "sigma": {
            "re": list(map(float, pc.sigma.real)),
            "im": list(map(float, pc.sigma.imag)),
        },
        "W1": matrix_to_obj(pc.w1),
        "W2": matrix_to_obj(pc.w2),
    }


def pair_certificate_from_obj(obj):
    from .certify import PairCertificate

    d = int(obj["d"])
    sigma = np.asarray(obj["sigma"]["re"], dtype=float) + 1j * np.asarray(
        obj["sigma"]["im"], dtype=float
    )
    return PairCertificate(
        v=complex_matrix_from_obj(obj["V"]),
        d=d,
        k=int(obj["k"]),
        omega=matrix_from_obj({"rows": obj["Omega"]["rows"]}),
        word_b=word_from_obj(d, obj["word_B"]),
        sigma=sigma,
        w1=matrix_from_obj(obj["W1"]),
        w2=matrix_from_obj(obj["W2"]),
    )


# ---------------------------------------------------------------------------
# binary fields and CSV


def write_field(field: SampledField, path):
    with open(path, "wb") as fh:
        fh.write(FIELD_MAGIC)
        fh.write(struct.pack("<II", FIELD_VERSION, field.n))
        for a in range(field.n):
            fh.write(struct.pack("<Qd", field.points[a], field.extents[a]))
        inter = np.empty(field.values.size * 2, dtype="<f8")
        inter[0::2] = field.values.real.ravel()
        inter[1::2] = field.values.imag.ravel()
        fh.write(inter.tobytes())


def read_field(path) -> SampledField:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != FIELD_MAGIC:
            raise DimensionMismatch(f"bad field magic {magic!r}")
        version, n = struct.unpack("<II", fh.read(8))
        if version != FIELD_VERSION:
            raise DimensionMismatch(f"unsupported field version {version}")
        points, extents = [], []
        for _ in range(n):
            p, t = struct.unpack("<Qd", fh.read(16))
            points.append(int(p))
            extents.append(float(t))
        count = int(np.prod(points)) * 2
        inter = np.frombuffer(fh.read(count * 8), dtype="<f8")
        values = (inter[0::2] + 1j * inter[1::2]).reshape(points)
    return SampledField(values, tuple(extents))


def field_to_csv(field: SampledField) -> str:
    """CSV export for 1-D and 2-D fields: coordinates, re, im."""
    if field.n == 1:
        lines = ["t,re,im"]
        t = field.coords(0)
        for j in range(field.points[0]):
            v = field.values[j]
            lines.append(f"{_fmt_float(t[j])},{_fmt_float(v.real)},{_fmt_float(v.imag)}")
        return "\n".join(lines) + "\n"
    if field.n == 2:
        lines = ["t0,t1,re,im"]
        t0, t1 = field.coords(0), field.coords(1)
        for j in range(field.points[0]):
            for k in range(field.points[1]):
                v = field.values[j, k]
                lines.append(
                    f"{_fmt_float(t0[j])},{_fmt_float(t1[k])},"
                    f"{_fmt_float(v.real)},{_fmt_float(v.imag)}"
                )
        return "\n".join(lines) + "\n"
    raise DimensionMismatch("CSV export supports 1-D and 2-D fields")


def sweep_to_csv(report) -> str:
    """CSV text with columns R, value, ratio (ratio empty on the first row)."""
    lines = ["R,value,ratio"]
    ratios = (None,) + tuple(report.ratios)
    for (r, v), ratio in zip(report.sweep, ratios):
        if ratio is None:
            tail = ""
        elif np.isfinite(ratio):
            tail = _fmt_float(ratio)
        else:
            tail = "inf"
        lines.append(f"{_fmt_float(r)},{_fmt_float(v)},{tail}")
    return "\n".join(lines) + "\n"
