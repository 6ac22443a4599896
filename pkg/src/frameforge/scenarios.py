"""Built-in scenarios, scenario JSON files and matrix literals.

Scenario file layout::

    {"dimension": 1,
     "generators": [[{"box": [[lo, hi]], "poly": [{"coeff": [re, im], "freq": [n]}]}]]}

or ``"gramian_entries"`` (an m x m grid of piece lists) instead of
``"generators"``.  An optional ``"transform"`` matrix records a conjugation.
"""

from dataclasses import dataclass
import json
import math
import numbers

import numpy as np

from .errors import ParseError, UnknownScenario
from .torus import GeneratorSpec, GramianField, Piece, TrigPoly


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    field: GramianField
    notes: str = ""


def _const(value, d=1):
    return TrigPoly.constant(value, d)


def _chi(lo, hi, value=1.0):
    return Piece(((lo, hi),), _const(value))


def _example1():
    g1 = GeneratorSpec(1, (_chi(-0.5, 0.5, -8.0), _chi(0.5, 1.5, 4.0)))
    g2 = GeneratorSpec(1, (_chi(-0.5, 0.5, 1.0), _chi(1.5, 2.5, 4.0)))
    g3 = GeneratorSpec(1, (_chi(0.5, 1.5, 1.0), _chi(1.5, 2.5, 8.0)))
    return GramianField.from_generators([g1, g2, g3])


def _example2():
    square = ((-0.5, 0.5), (-0.5, 0.5))
    # -sin(2 pi w1) = (i/2) e^{2 pi i w1} - (i/2) e^{-2 pi i w1}
    minus_sin = TrigPoly.from_terms([((1, 0), 0.5j), ((-1, 0), -0.5j)], 2)
    # e^{2 pi i w2} cos(2 pi w1)
    shifted_cos = TrigPoly.from_terms([((1, 1), 0.5), ((-1, 1), 0.5)], 2)
    return GramianField.from_generators([
        GeneratorSpec(2, (Piece(square, minus_sin),)),
        GeneratorSpec(2, (Piece(square, shifted_cos),)),
    ])


def _paley_split():
    return GramianField.from_generators([
        GeneratorSpec(1, (_chi(0.0, 0.5),)),
        GeneratorSpec(1, (_chi(0.5, 1.0),)),
    ])


def _bessel_not_frame():
    # |1 - e^{2 pi i w}|^2 = 2 - 2 cos(2 pi w)
    poly = TrigPoly.from_terms([((0,), 1.0), ((1,), -1.0)], 1)
    return GramianField.from_generators([GeneratorSpec(1, (Piece(((-0.5, 0.5),), poly),))])


_BUILTINS = {
    "example1": (_example1, "three generators in L2(R), constant Gramian of rank 2 with G^2 = 81 G"),
    "example2": (_example2, "two generators in L2(R^2), projector-valued Gramian of rank 1"),
    "paley-split": (_paley_split, "indicator of [0,1) split into [0,1/2) and [1/2,1)"),
    "bessel-not-frame": (_bessel_not_frame, "single generator with Gramian 2 - 2 cos(2 pi w)"),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin(name):
    try:
        factory, notes = _BUILTINS[name]
    except KeyError:
        raise UnknownScenario(f"unknown scenario {name!r}; known: {', '.join(BUILTIN_NAMES)}") from None
    return Scenario(name, factory(), notes)


def identity_field(m, dimension=1):
    """Constant identity Gramian of size ``m`` (orthonormal generators)."""
    one, zero = [Piece(((-0.5, 0.5),) * dimension, TrigPoly.constant(1.0, dimension))], []
    return GramianField.from_entries(
        dimension, [[one if i == j else zero for j in range(m)] for i in range(m)]
    )


# --- JSON -------------------------------------------------------------------


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, numbers.Real) or not math.isfinite(x):
        raise ParseError(f"expected a finite number, got {x!r}", where)
    return float(x)


def parse_complex(x, where):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ParseError(f"complex numbers are [re, im] pairs, got {x!r}", where)
        return complex(_number(x[0], where), _number(x[1], where))
    return complex(_number(x, where), 0.0)


def _parse_piece(obj, d, where):
    if not isinstance(obj, dict):
        raise ParseError("piece must be an object with 'box' and 'poly'", where)
    for k in ("box", "poly"):
        if k not in obj:
            raise ParseError(f"missing key {k!r}", where)
    box = obj["box"]
    if not isinstance(box, list) or len(box) != d:
        raise ParseError(f"box must list {d} intervals", f"{where}.box")
    intervals = []
    for a, iv in enumerate(box):
        w = f"{where}.box[{a}]"
        if not isinstance(iv, list) or len(iv) != 2:
            raise ParseError("interval must be [lo, hi]", w)
        lo, hi = _number(iv[0], w), _number(iv[1], w)
        if not lo < hi:
            raise ParseError(f"empty interval [{lo}, {hi})", w)
        intervals.append((lo, hi))
    terms = obj["poly"]
    if not isinstance(terms, list):
        raise ParseError("poly must be a list of terms", f"{where}.poly")
    parsed = []
    for t, term in enumerate(terms):
        w = f"{where}.poly[{t}]"
        if not isinstance(term, dict) or "coeff" not in term or "freq" not in term:
            raise ParseError("term must have 'coeff' and 'freq'", w)
        freq = term["freq"]
        if not isinstance(freq, list) or len(freq) != d or not all(
            isinstance(n, int) and not isinstance(n, bool) for n in freq
        ):
            raise ParseError(f"freq must be a list of {d} integers", f"{w}.freq")
        parsed.append((tuple(freq), parse_complex(term["coeff"], f"{w}.coeff")))
    try:
        return Piece(tuple(intervals), TrigPoly.from_terms(parsed, d))
    except ValueError as exc:
        raise ParseError(str(exc), where) from None


def _parse_pieces(obj, d, where):
    if not isinstance(obj, list):
        raise ParseError("expected a list of pieces", where)
    return [_parse_piece(p, d, f"{where}[{i}]") for i, p in enumerate(obj)]


def field_from_dict(doc):
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object", "$")
    d = doc.get("dimension")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ParseError("dimension must be a positive integer", "$.dimension")
    has_g, has_e = "generators" in doc, "gramian_entries" in doc
    if has_g == has_e:
        raise ParseError("exactly one of 'generators' or 'gramian_entries' is required", "$")
    try:
        if has_g:
            gens = doc["generators"]
            if not isinstance(gens, list) or not gens:
                raise ParseError("generators must be a non-empty list", "$.generators")
            field = GramianField.from_generators(
                [GeneratorSpec(d, tuple(_parse_pieces(g, d, f"$.generators[{i}]")))
                 for i, g in enumerate(gens)]
            )
        else:
            rows = doc["gramian_entries"]
            if not isinstance(rows, list) or not rows or any(
                not isinstance(r, list) or len(r) != len(rows) for r in rows
            ):
                raise ParseError("gramian_entries must be a square nested list", "$.gramian_entries")
            field = GramianField.from_entries(d, [
                [_parse_pieces(cell, d, f"$.gramian_entries[{i}][{j}]") for j, cell in enumerate(r)]
                for i, r in enumerate(rows)
            ])
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc), "$") from None
    if "transform" in doc:
        from .torus import conjugate

        field = conjugate(field, parse_matrix(doc["transform"], "$.transform"))
    return field


def _piece_to_dict(p):
    return {
        "box": [[lo, hi] for lo, hi in p.box],
        "poly": [{"coeff": [c.real, c.imag], "freq": list(f)} for f, c in p.poly.terms()],
    }


def field_to_dict(field):
    doc = {"dimension": field.dimension}
    if field.generators is not None:
        doc["generators"] = [[_piece_to_dict(p) for p in g.pieces] for g in field.generators]
    else:
        doc["gramian_entries"] = [[[_piece_to_dict(p) for p in cell] for cell in row]
                                  for row in field.entries]
    if field.transform is not None:
        doc["transform"] = matrix_to_json(field.transform)
    return doc


def load(path):
    """Read a scenario file; ``ParseError`` carries the line or field at fault."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    try:
        field = field_from_dict(doc)
    except ParseError as exc:
        raise ParseError(str(exc), str(path)) from None
    return Scenario(str(path), field, doc.get("notes", "") if isinstance(doc, dict) else "")


def save(scenario, path):
    doc = field_to_dict(scenario.field)
    if scenario.notes:
        doc["notes"] = scenario.notes
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def resolve(name_or_path):
    """A built-in name, or otherwise a path to a scenario file."""
    if name_or_path in _BUILTINS:
        return builtin(name_or_path)
    return load(name_or_path)


def parse_matrix(obj, where="matrix"):
    """Matrix from nested lists whose entries are numbers or ``[re, im]`` pairs."""
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", f"{where}:{exc.colno}") from None
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) and r for r in obj):
        raise ParseError("matrix must be a non-empty list of non-empty rows", where)
    if len({len(r) for r in obj}) != 1:
        raise ParseError("matrix rows have different lengths", where)
    return np.array(
        [[parse_complex(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(obj)],
        dtype=np.complex128,
    )


def matrix_to_json(A):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(A)]
