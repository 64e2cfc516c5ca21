"""Instance ingestion: MPS files, JSON fixtures, and the ``Ãx ≥ b̃`` form."""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, TextIO

from .ratlin import RatMatrix, as_fraction

BINARY, INTEGER, CONTINUOUS = "binary", "integer", "continuous"
KINDS = (BINARY, INTEGER, CONTINUOUS)
SENSES = (">=", "<=", "=")


class ParseError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnsupportedFeature(ValueError):
    pass


class SchemaError(ValueError):
    pass


class NonzeroLowerBound(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    lower: Fraction | None = Fraction(0)   # None = -inf
    upper: Fraction | None = None          # None = +inf
    kind: str = CONTINUOUS


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[tuple[int, Fraction], ...]
    sense: str
    rhs: Fraction
    name: str = ""

    def activity(self, x) -> Fraction:
        return sum((a * x[j] for j, a in self.coeffs), Fraction(0))

    def satisfied(self, x) -> bool:
        lhs = self.activity(x)
        if self.sense == ">=":
            return lhs >= self.rhs
        if self.sense == "<=":
            return lhs <= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class Objective:
    sense: str
    c: tuple[Fraction, ...]


@dataclass(frozen=True)
class Model:
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective: Objective
    name: str = ""

    def __post_init__(self):
        n = len(self.variables)
        for v in self.variables:
            if v.kind not in KINDS:
                raise SchemaError(f"unknown variable kind {v.kind!r}")
            if v.kind == BINARY and not (
                v.lower is not None and v.upper is not None
                and 0 <= v.lower and v.upper <= 1
            ):
                raise SchemaError(f"binary variable {v.name} has bounds outside [0,1]")
        for con in self.constraints:
            if con.sense not in SENSES:
                raise SchemaError(f"unknown constraint sense {con.sense!r}")
            for j, _ in con.coeffs:
                if not 0 <= j < n:
                    raise SchemaError(f"coefficient index {j} out of range")
        if len(self.objective.c) != n:
            raise SchemaError("objective length differs from variable count")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def binaries(self) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.kind == BINARY]

    @property
    def p(self) -> int:
        return len(self.binaries)


# ---------------------------------------------------------------------------
# Standard form


@dataclass(frozen=True)
class RowTag:
    """Where a row of ``Ã`` came from.

    ``kind`` is ``"structural"``, ``"lower"`` or ``"upper"``.  For structural
    rows ``index`` is the constraint index, or the variable index when
    ``origin == "bound"`` (finite upper bounds of non-binary variables, which
    have no slot among the binary upper-bound rows).
    """

    kind: str
    index: int
    origin: str = "constraint"


@dataclass(frozen=True)
class StandardForm:
    A_tilde: RatMatrix
    b_tilde: tuple[Fraction, ...]
    provenance: tuple[RowTag, ...]
    n: int
    m: int
    p: int

    @property
    def q(self) -> int:
        return self.A_tilde.rows

    def rows_of_kind(self, kind: str) -> list[int]:
        return [i for i, tag in enumerate(self.provenance) if tag.kind == kind]

    def lower_row(self, j: int) -> int | None:
        for i, tag in enumerate(self.provenance):
            if tag.kind == "lower" and tag.index == j:
                return i
        return None

    def upper_row(self, j: int) -> int | None:
        for i, tag in enumerate(self.provenance):
            if tag.kind == "upper" and tag.index == j:
                return i
        return None

    def satisfied(self, x) -> bool:
        return all(lhs >= b for lhs, b in zip(self.A_tilde.matvec(list(x)), self.b_tilde))

    def with_rows(self, rows: Iterable[tuple[Iterable, object]]) -> "StandardForm":
        """Append extra ``a x ≥ b`` rows, tagged as structural cuts.

        They are inserted after the existing structural rows so that the
        structural / lower / upper block order is preserved.
        """
        rows = [([as_fraction(a) for a in coeffs], as_fraction(b)) for coeffs, b in rows]
        old = self.A_tilde.to_rows()
        cut_tags = [RowTag("structural", -1 - k, "cut") for k in range(len(rows))]
        pos = self.m
        A = old[:pos] + [r for r, _ in rows] + old[pos:]
        b = list(self.b_tilde[:pos]) + [b for _, b in rows] + list(self.b_tilde[pos:])
        tags = list(self.provenance[:pos]) + cut_tags + list(self.provenance[pos:])
        return StandardForm(
            RatMatrix.from_rows(A, cols=self.n), tuple(b), tuple(tags),
            self.n, self.m + len(rows), self.p,
        )


def _ge_rows(con: Constraint, n: int) -> list[tuple[list[Fraction], Fraction]]:
    row = [Fraction(0)] * n
    for j, a in con.coeffs:
        row[j] += a
    neg = [-a for a in row]
    if con.sense == ">=":
        return [(row, con.rhs)]
    if con.sense == "<=":
        return [(neg, -con.rhs)]
    return [(row, con.rhs), (neg, -con.rhs)]


def to_standard_form(model: Model, mode: str = "full") -> StandardForm:
    """Build ``Ãx ≥ b̃``.

    Row order: structural rows (constraints, then finite upper bounds of
    non-binary variables), lower-bound rows, binary upper-bound rows.  In
    ``full`` mode every variable must have lower bound 0 and the lower-bound
    block is exactly ``I_n``.  ``raw`` mode keeps only the bounds the model
    ``full`` mode every variable must have lower bound 0 and the lower-bound
    """
    if mode == "auto":
        mode = "full" if all(v.lower == 0 for v in model.variables) else "raw"
    if mode not in ("full", "raw"):
        raise ValueError(f"unknown mode {mode!r}")
    n = model.n
    A: list[list[Fraction]] = []
    b: list[Fraction] = []
    tags: list[RowTag] = []
    for i, con in enumerate(model.constraints):
        for row, rhs in _ge_rows(con, n):
            A.append(row)
            b.append(rhs)
            tags.append(RowTag("structural", i))
    binaries = set(model.binaries)
    for j, var in enumerate(model.variables):
        if j in binaries or var.upper is None:
            continue
        row = [Fraction(0)] * n
        row[j] = Fraction(-1)
        A.append(row)
        b.append(-var.upper)
        tags.append(RowTag("structural", j, "bound"))
    m = len(A)
    for j, var in enumerate(model.variables):
        if mode == "full":
            if var.lower != 0:
                raise NonzeroLowerBound(
                    f"variable {var.name} has lower bound {var.lower}; shift it first"
                )
        elif var.lower is None:
            continue
        row = [Fraction(0)] * n
        row[j] = Fraction(1)
        A.append(row)
        b.append(Fraction(0) if var.lower is None else var.lower)
        tags.append(RowTag("lower", j))
    p = 0
    for j, var in enumerate(model.variables):
        if j in binaries:
            row = [Fraction(0)] * n
            row[j] = Fraction(-1)
            A.append(row)
            b.append(-var.upper)
            tags.append(RowTag("upper", j))
            p += 1
    return StandardForm(RatMatrix.from_rows(A, cols=n), tuple(b), tuple(tags), n, m, p)


# ---------------------------------------------------------------------------
# JSON fixtures


def _rat(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str, float)):
        raise SchemaError(f"{where}: expected a rational, got {value!r}")
    try:
        return as_fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{where}: bad rational {value!r}") from exc


def model_from_dict(data: dict) -> Model:
    if not isinstance(data, dict):
        raise SchemaError("fixture must be a JSON object")
    for key in ("variables", "constraints", "objective"):
        if key not in data:
            raise SchemaError(f"missing key {key!r}")
    variables = []
    for k, v in enumerate(data["variables"]):
        if not isinstance(v, dict) or "name" not in v:
            raise SchemaError(f"variables[{k}]: needs a name")
        lower = v.get("lower", 0)
        upper = v.get("upper")
        kind = v.get("kind", CONTINUOUS)
        if kind not in KINDS:
            raise SchemaError(f"variables[{k}]: unknown kind {kind!r}")
        variables.append(Variable(
            str(v["name"]),
            None if lower is None else _rat(lower, f"variables[{k}].lower"),
            None if upper is None else _rat(upper, f"variables[{k}].upper"),
            kind,
        ))
    n = len(variables)
    constraints = []
    for k, c in enumerate(data["constraints"]):
        if not isinstance(c, dict) or not {"coeffs", "sense", "rhs"} <= set(c):
            raise SchemaError(f"constraints[{k}]: needs coeffs, sense and rhs")
        if c["sense"] not in SENSES:
            raise SchemaError(f"constraints[{k}]: bad sense {c['sense']!r}")
        coeffs = []
        for idx, val in dict(c["coeffs"]).items():
            try:
                j = int(idx)
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"constraints[{k}]: bad index {idx!r}") from exc
            if not 0 <= j < n:
                raise SchemaError(f"constraints[{k}]: index {j} out of range")
            coeffs.append((j, _rat(val, f"constraints[{k}].coeffs[{idx}]")))
        coeffs.sort()
        constraints.append(Constraint(
            tuple(coeffs), c["sense"], _rat(c["rhs"], f"constraints[{k}].rhs"),
            str(c.get("name", "")),
        ))
    obj = data["objective"]
    if not isinstance(obj, dict) or obj.get("sense", "min") not in ("min", "max"):
        raise SchemaError("objective needs sense min|max")
    c = obj.get("c", [0] * n)
    if len(c) != n:
        raise SchemaError("objective length differs from variable count")
    objective = Objective(obj.get("sense", "min"),
                          tuple(_rat(v, f"objective.c[{j}]") for j, v in enumerate(c)))
    return Model(tuple(variables), tuple(constraints), objective, str(data.get("name", "")))


def load_fixture(stream: TextIO | str) -> Model:
    text = stream if isinstance(stream, str) else stream.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return model_from_dict(data)


def _fmt(x: Fraction | None):
    if x is None:
        return None
    return str(x)


def model_to_dict(model: Model) -> dict:
    return {
        "name": model.name,
        "variables": [
            {"name": v.name, "lower": _fmt(v.lower), "upper": _fmt(v.upper), "kind": v.kind}
            for v in model.variables
        ],
        "constraints": [
            {"name": c.name, "coeffs": {str(j): str(a) for j, a in c.coeffs},
             "sense": c.sense, "rhs": str(c.rhs)}
            for c in model.constraints
        ],
        "objective": {"sense": model.objective.sense,
                      "c": [str(v) for v in model.objective.c]},
    }


def dump_fixture(model: Model) -> str:
    return json.dumps(model_to_dict(model), indent=2)


# ---------------------------------------------------------------------------
# MPS


_UNSUPPORTED = {"RANGES", "SOS", "QUADOBJ", "QMATRIX", "QSECTION", "QCMATRIX",
                "INDICATORS", "CSECTION"}
_FIXED_FIELDS = ((1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61))


def _fields(line: str, expected: tuple[int, ...]) -> list[str]:
    parts = line.split()
    if len(parts) in expected or len(line) < 15:
        return parts
    # Fixed format allows blanks inside names; fall back to column positions.
    out = [line[a:b].strip() for a, b in _FIXED_FIELDS if len(line) > a]
    return [f for f in out if f] or parts


def parse_mps(stream: TextIO | str) -> Model:
    """Parse fixed or free MPS into an exact :class:`Model`.

    Integer columns (INTORG/INTEND markers, BV, LI/UI bounds) with bounds
    inside ``[0, 1]`` are reported as binary.  A constant attached to the
    objective row in RHS is ignored, it does not affect any cut.
    """
    text = stream if isinstance(stream, str) else stream.read()
    name = ""
    obj_sense = "min"
    obj_row: str | None = None
    row_order: list[str] = []
    row_sense: dict[str, str] = {}
    col_order: list[str] = []
    col_index: dict[str, int] = {}
    coeffs: dict[str, dict[int, Fraction]] = {}
    obj: dict[int, Fraction] = {}
    integer: set[int] = set()
    rhs: dict[str, Fraction] = {}
    lower: dict[int, Fraction | None] = {}
    upper: dict[int, Fraction | None] = {}
    bv: set[int] = set()
    section = None
    in_int = False

    def number(tok: str, lineno: int) -> Fraction:
        try:
            return as_fraction(tok)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(lineno, f"bad number {tok!r}") from exc

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n\r")
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        if not line[0].isspace():
            head = line.split()
            key = head[0].upper()
            if key in _UNSUPPORTED:
                raise UnsupportedFeature(f"line {lineno}: section {key} is not supported")
            if key == "NAME":
                name = " ".join(head[1:])
                section = "NAME"
                continue
            if key == "OBJSENSE":
                section = "OBJSENSE"
                if len(head) > 1:
                    obj_sense = "max" if head[1].upper().startswith("MAX") else "min"
                continue
            if key not in {"ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"}:
                raise ParseError(lineno, f"unknown section {head[0]!r}")
            section = key
            if key == "ENDATA":
                break
            continue
        parts = line.split()
        if section == "OBJSENSE":
            obj_sense = "max" if parts[0].upper().startswith("MAX") else "min"
        elif section == "ROWS":
            if len(parts) != 2:
                raise ParseError(lineno, "ROWS entry needs a type and a name")
            kind, rname = parts[0].upper(), parts[1]
            if kind == "N":
                if obj_row is None:
                    obj_row = rname
                continue
            if kind not in ("E", "L", "G"):
                raise ParseError(lineno, f"bad row type {parts[0]!r}")
            row_sense[rname] = {"E": "=", "L": "<=", "G": ">="}[kind]
            row_order.append(rname)
            coeffs[rname] = {}
        elif section == "COLUMNS":
            if len(parts) >= 3 and parts[1].strip("'").upper() == "MARKER":
                tag = parts[2].strip("'").upper()
                if tag == "INTORG":
                    in_int = True
                elif tag == "INTEND":
                    in_int = False
                else:
                    raise ParseError(lineno, f"unknown marker {parts[2]!r}")
                continue
            parts = _fields(line, (3, 5))
            if len(parts) not in (3, 5):
                raise ParseError(lineno, "COLUMNS entry needs 3 or 5 fields")
            cname = parts[0]
            if cname not in col_index:
                col_index[cname] = len(col_order)
                col_order.append(cname)
                if in_int:
                    integer.add(col_index[cname])
            j = col_index[cname]
            for rname, val in zip(parts[1::2], parts[2::2]):
                v = number(val, lineno)
                if rname == obj_row:
                    obj[j] = obj.get(j, Fraction(0)) + v
                elif rname in coeffs:
                    if v:
                        coeffs[rname][j] = coeffs[rname].get(j, Fraction(0)) + v
                else:
                    raise ParseError(lineno, f"unknown row {rname!r}")
        elif section == "RHS":
            parts = _fields(line, (2, 3, 4, 5))
            if len(parts) % 2 == 1:
                parts = parts[1:]
            for rname, val in zip(parts[0::2], parts[1::2]):
                v = number(val, lineno)
                if rname == obj_row:
                    continue
                if rname not in row_sense:
                    raise ParseError(lineno, f"unknown row {rname!r}")
                rhs[rname] = v
        elif section == "BOUNDS":
            parts = _fields(line, (2, 3, 4))
            if len(parts) < 2:
                raise ParseError(lineno, "BOUNDS entry too short")
            btype = parts[0].upper()
            if btype in ("FR", "MI", "PL", "BV"):
                # optional bound-set name; BV may carry a (ignored) value
                cname, val = (parts[1] if len(parts) == 2 else parts[2]), None
            elif len(parts) >= 4:
                cname, val = parts[2], number(parts[3], lineno)
            elif len(parts) == 3:
                cname, val = parts[1], number(parts[2], lineno)
            else:
                raise ParseError(lineno, f"bound {btype} needs a value")
            if cname not in col_index:
                raise ParseError(lineno, f"unknown column {cname!r}")
            j = col_index[cname]
            if btype == "UP":
                upper[j] = val
                if val is not None and val < 0 and lower.get(j, Fraction(0)) == 0:
                    lower[j] = None
            elif btype == "LO":
                lower[j] = val
            elif btype == "FX":
                lower[j] = upper[j] = val
            elif btype == "FR":
                lower[j] = upper[j] = None
            elif btype == "MI":
                lower[j] = None
            elif btype == "PL":
                upper[j] = None
            elif btype == "BV":
                lower[j], upper[j] = Fraction(0), Fraction(1)
                bv.add(j)
            elif btype in ("LI", "UI"):
                integer.add(j)
                if btype == "LI":
                    lower[j] = val
                else:
                    upper[j] = val
            else:
                raise ParseError(lineno, f"unsupported bound type {btype!r}")
        elif section in (None, "NAME"):
            raise ParseError(lineno, "data outside a section")
    else:
        if section != "ENDATA" and not row_order and not col_order:
            raise ParseError(0, "empty MPS input")

    variables = []
    for j, cname in enumerate(col_order):
        lo = lower.get(j, Fraction(0))
        up = upper.get(j)
        if j in bv:
            kind = BINARY
        elif j in integer:
            kind = BINARY if (lo is not None and up is not None and lo >= 0 and up <= 1) else INTEGER
        else:
            kind = CONTINUOUS
        variables.append(Variable(cname, lo, up, kind))
    constraints = tuple(
        Constraint(tuple(sorted(coeffs[r].items())), row_sense[r], rhs.get(r, Fraction(0)), r)
        for r in row_order
    )
    c = tuple(obj.get(j, Fraction(0)) for j in range(len(col_order)))
    return Model(tuple(variables), constraints, Objective(obj_sense, c), name)


def read_model(path: str | Path) -> Model:
    """Load ``.mps``, ``.mps.gz`` or ``.json`` from disk."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt") as fh:
        text = fh.read()
    stem = path.name[:-3] if path.suffix == ".gz" else path.name
    if stem.endswith(".json"):
        return load_fixture(text)
    model = parse_mps(text)
    if not model.name:
        model = Model(model.variables, model.constraints, model.objective,
                      stem.rsplit(".", 1)[0])
    return model
