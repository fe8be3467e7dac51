"""Deterministic JSON and CSV serialisation of results."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

import flint
import mpmath
import numpy as np

from .errors import UnsupportedFormat

CSV_HEADER = ("E_re", "E_im", "B_re", "B_im", "route")


def normalize(obj, digits: int = 20):
    """Plain JSON types: Fractions as ``"p/q"``, complex numbers as ``{re, im}`` strings."""
    if hasattr(obj, "to_json"):
        return normalize(obj.to_json(), digits)
    if isinstance(obj, dict):
        return {str(k): normalize(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v, digits) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, flint.fmpq):
        return f"{int(obj.p)}/{int(obj.q)}"
    if isinstance(obj, flint.fmpq_poly):
        return [f"{int(c.p)}/{int(c.q)}" for c in obj.coeffs()] or ["0/1"]
    if isinstance(obj, (mpmath.mpc, complex, np.complexfloating)):
        with mpmath.workdps(max(digits, 15)):
            c = mpmath.mpc(obj)
            return {"re": mpmath.nstr(c.real, digits), "im": mpmath.nstr(c.imag, digits)}
    if isinstance(obj, (mpmath.mpf, float, np.floating)):
        with mpmath.workdps(max(digits, 15)):
            return mpmath.nstr(mpmath.mpf(obj), digits)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def sweep_rows(results) -> list:
    rows = []
    for r in results:
        E, B = complex(r.E), complex(r.multiplier)
        rows.append((repr(E.real), repr(E.imag), repr(B.real), repr(B.imag), r.route))
    return rows


def emit_report(result, fmt: str = "json", digits: int = 20) -> bytes:
    """Serialise ``result``; identical input gives identical bytes."""
    if fmt == "json":
        text = json.dumps(normalize(result, digits), sort_keys=True, indent=2)
        return (text + "\n").encode()
    if fmt == "csv":
        items = result if isinstance(result, (list, tuple)) else [result]
        if not all(hasattr(r, "multiplier") and hasattr(r, "route") for r in items):
            raise UnsupportedFormat("CSV output is only defined for multiplier sweeps")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(sweep_rows(items))
        return buf.getvalue().encode()
    raise UnsupportedFormat(f"unknown format {fmt!r}")
