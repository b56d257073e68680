"""CPLEX LP-format writer and a matching token-stream reader.

The writer is deterministic: identical models produce identical bytes.  Every
variable gets an explicit bound line because LP files default the lower bound
to zero.  The objective constant has no portable LP syntax, so it travels in a
comment line that the reader understands.
"""
from __future__ import annotations

import math
import re
from typing import Dict, List, Tuple

from .model import BINARY, CONTINUOUS, INTEGER, MilpModel

LINE_WIDTH = 200
_CONST_TAG = "\\ objective constant:"
_BAD = re.compile(r"[^A-Za-z0-9_.]")


def sanitize(name: str, prefix: str = "v") -> str:
    s = _BAD.sub("_", name) or prefix
    # a leading digit, '.', or e/E could be read as part of a number
    if s[0].isdigit() or s[0] in ".eE":
        s = prefix + "_" + s
    return s


def fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _unique_names(names, prefix: str) -> List[str]:
    out, seen = [], set()
    for n in names:
        s = sanitize(n, prefix)
        base, k = s, 1
        while s in seen:
            s = f"{base}_{k}"
            k += 1
        seen.add(s)
        out.append(s)
    return out


def _wrap(head: str, terms: List[str], tail: str = "") -> List[str]:
    lines, cur = [], head
    for t in terms + ([tail] if tail else []):
        if len(cur) + 1 + len(t) > LINE_WIDTH and cur.strip():
            lines.append(cur)
            cur = "   "
        cur = f"{cur} {t}" if cur else t
    lines.append(cur)
    return lines


def _expr(coeffs: Dict[int, float], names: List[str]) -> List[str]:
    terms = []
    for j in sorted(coeffs):
        c = coeffs[j]
        sign = "-" if c < 0 else "+"
        terms.append(f"{sign} {fmt(abs(c))} {names[j]}")
    return terms


def write_lp_string(model: MilpModel) -> str:
    vnames = _unique_names(model.names(), "v")
    rnames = _unique_names([r.name for r in model.rows], "c")
    out = [f"\\ {sanitize(model.name, 'm')}"]
    if model.objective_constant:
        out.append(f"{_CONST_TAG} {fmt(model.objective_constant)}")
    out.append("Minimize")
    obj = _expr(model.objective, vnames)
    if not obj and model.n:
        obj = [f"+ 0 {vnames[0]}"]
    out.extend(_wrap(" obj:", obj))
    out.append("Subject To")
    for r, rn in zip(model.rows, rnames):
        terms = _expr(r.coefficients, vnames) or [f"+ 0 {vnames[0]}"]
        out.extend(_wrap(f" {rn}:", terms, f"{r.sense} {fmt(r.rhs)}"))
    out.append("Bounds")
    for v, vn in zip(model.variables, vnames):
        if v.integrality == BINARY and v.lower == 0.0 and v.upper == 1.0:
            out.append(f" 0 <= {vn} <= 1")
        elif v.lower == v.upper:
            out.append(f" {vn} = {fmt(v.lower)}")
        elif math.isinf(v.lower) and math.isinf(v.upper):
            out.append(f" {vn} free")
        else:
            out.append(f" {fmt(v.lower)} <= {vn} <= {fmt(v.upper)}")
    gens = [vn for v, vn in zip(model.variables, vnames) if v.integrality == INTEGER]
    bins = [vn for v, vn in zip(model.variables, vnames) if v.integrality == BINARY]
    if gens:
        out.append("General")
        out.extend(_wrap("", gens))
    if bins:
        out.append("Binary")
        out.extend(_wrap("", bins))
    out.append("End")
    return "\n".join(out) + "\n"


def serialize_lp(model: MilpModel, path) -> List[str]:
    """Write ``model`` to ``path``; returns the LP names in variable order."""
    text = write_lp_string(model)
    with open(path, "w") as fh:
        fh.write(text)
    return _unique_names(model.names(), "v")


def lp_names(model: MilpModel) -> List[str]:
    return _unique_names(model.names(), "v")


# ---------------------------------------------------------------------------
# reader
# ---------------------------------------------------------------------------

_SECTIONS = {
    "minimize": "obj", "minimise": "obj", "min": "obj",
    "subject to": "rows", "such that": "rows", "st": "rows", "s.t.": "rows",
    "bounds": "bounds", "bound": "bounds",
    "general": "gen", "generals": "gen", "gen": "gen",
    "binary": "bin", "binaries": "bin", "bin": "bin",
    "end": "end",
}
_TOKEN = re.compile(
    r"<=|>=|=<|=>|[<>=]|[+-]|:"
    r"|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?![A-Za-z_])"
    r"|[^\s<>=+:-]+")


def _number(tok: str):
    try:
        return float(tok)
    except ValueError:
        low = tok.lower()
        if low in ("inf", "infinity"):
            return math.inf
        return None


class LpParseError(ValueError):
    pass


def _parse_linear(tokens: List[str]) -> Tuple[Dict[str, float], List[str]]:
    """Consume ``[sign] [coef] name`` terms until a sense token or the end."""
    coeffs: Dict[str, float] = {}
    i = 0
    while i < len(tokens) and tokens[i] not in ("<=", ">=", "=<", "=>", "<", ">", "="):
        sign = 1.0
        while tokens[i] in "+-":
            if tokens[i] == "-":
                sign = -sign
            i += 1
        coef = 1.0
        num = _number(tokens[i])
        if num is not None and i + 1 < len(tokens) and _number(tokens[i + 1]) is None \
                and tokens[i + 1] not in ("<=", ">=", "=<", "=>", "<", ">", "=", "+", "-"):
            coef = num
            i += 1
        elif num is not None:
            raise LpParseError(f"constant term {tokens[i]!r} not supported in expressions")
        name = tokens[i]
        coeffs[name] = coeffs.get(name, 0.0) + sign * coef
        i += 1
    return coeffs, tokens[i:]


def _normalize_sense(tok: str) -> str:
    return {"=<": "<=", "<": "<=", "=>": ">=", ">": ">="}.get(tok, tok)


def read_lp_string(text: str) -> MilpModel:
    model = MilpModel()
    constant = 0.0
    section = None
    statements: Dict[str, List[List[str]]] = {"obj": [], "rows": [], "bounds": [], "gen": [], "bin": []}
    current: List[str] = []

    def flush():
        nonlocal current
        if current and section in statements:
            statements[section].append(current)
        current = []

    for lineno, raw in enumerate(text.splitlines()):
        line = raw.strip()
        if lineno == 0 and line.startswith("\\ ") and section is None:
            model.name = line[2:].strip() or model.name
            continue
        if line.startswith(_CONST_TAG):
            constant = float(line[len(_CONST_TAG):])
            continue
        if "\\" in line:
            line = line[:line.index("\\")].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            flush()
            section = _SECTIONS[key]
            continue
        toks = _TOKEN.findall(line)
        if section in ("rows", "obj"):
            # a new statement starts with a label or follows a completed row
            starts_label = len(toks) >= 2 and toks[1] == ":"
            if starts_label or (section == "rows" and current and _row_complete(current)):
                flush()
            current.extend(toks)
        elif section == "bounds":
            flush()
            current = toks
        elif section in ("gen", "bin"):
            statements[section].append(toks)
    flush()

    order: List[str] = []
    seen: Dict[str, int] = {}

    def ref(name: str) -> str:
        if name not in seen:
            seen[name] = len(order)
            order.append(name)
        return name

    # the bounds section lists every variable in declaration order
    bounds: Dict[str, Tuple[float, float]] = {}
    for st in statements["bounds"]:
        _parse_bound(st, bounds, ref)
    obj_coeffs: Dict[str, float] = {}
    for st in statements["obj"]:
        if len(st) >= 2 and st[1] == ":":
            st = st[2:]
        c, rest = _parse_linear(st)
        for k, v in c.items():
            obj_coeffs[ref(k)] = obj_coeffs.get(k, 0.0) + v
    rows = []
    for st in statements["rows"]:
        name = ""
        if len(st) >= 2 and st[1] == ":":
            name, st = st[0], st[2:]
        c, rest = _parse_linear(st)
        for k in c:
            ref(k)
        if len(rest) < 2:
            raise LpParseError(f"row {name!r} lacks a right-hand side")
        sign = 1.0
        rest = list(rest)
        sense = _normalize_sense(rest.pop(0))
        while rest and rest[0] in "+-":
            if rest.pop(0) == "-":
                sign = -sign
        rhs = _number(rest[0])
        if rhs is None:
            raise LpParseError(f"bad right-hand side in row {name!r}")
        rows.append((name, c, sense, sign * rhs))
    gens = {ref(t) for st in statements["gen"] for t in st}
    bins = {ref(t) for st in statements["bin"] for t in st}

    for name in order:
        lo, hi = bounds.get(name, (0.0, math.inf))
        kind = BINARY if name in bins else INTEGER if name in gens else CONTINUOUS
        if kind == BINARY and name not in bounds:
            lo, hi = 0.0, 1.0
        model.add_var(name, lo, hi, kind)
    model.set_objective({seen[k]: v for k, v in obj_coeffs.items()}, constant)
    for name, c, sense, rhs in rows:
        model.add_row({seen[k]: v for k, v in c.items()}, sense, rhs, name)
    return model


def _row_complete(tokens: List[str]) -> bool:
    for i, t in enumerate(tokens):
        if t in ("<=", ">=", "=<", "=>", "<", ">", "="):
            rest = [x for x in tokens[i + 1:] if x not in "+-"]
            return bool(rest) and _number(rest[0]) is not None
    return False


def _signed_numbers(tokens: List[str]) -> List:
    """Fold sign tokens into the following token."""
    out, sign = [], 1.0
    for t in tokens:
        if t in ("+", "-"):
            sign = -sign if t == "-" else sign
            continue
        num = _number(t)
        out.append(sign * num if num is not None else t)
        sign = 1.0
    return out


def _parse_bound(tokens: List[str], bounds, ref) -> None:
    toks = _signed_numbers(tokens)
    if len(toks) == 2 and isinstance(toks[0], str) and str(toks[1]).lower() == "free":
        bounds[ref(toks[0])] = (-math.inf, math.inf)
        return
    if len(toks) == 5:  # lo <= x <= hi
        lo, _, name, _, hi = toks
        bounds[ref(name)] = (float(lo), float(hi))
        return
    if len(toks) == 3:
        a, op, b = toks
        op = _normalize_sense(op)
        if isinstance(a, str):
            name, val, flip = a, float(b), False
        else:
            name, val, flip = b, float(a), True
        lo, hi = bounds.get(ref(name), (0.0, math.inf))
        if op == "=":
            lo = hi = val
        elif (op == "<=") != flip:
            hi = val
        else:
            lo = val
        bounds[name] = (lo, hi)
        return
    raise LpParseError(f"cannot parse bound line {' '.join(map(str, tokens))!r}")


def read_lp(path) -> MilpModel:
    with open(path) as fh:
        return read_lp_string(fh.read())
