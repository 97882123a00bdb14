"""CPLEX LP text export and a reader for the subset written here."""

from __future__ import annotations

import re

from .model import LinearModel

_SECTIONS = {
    "maximize": "obj",
    "maximise": "obj",
    "max": "obj",
    "subject to": "rows",
    "such that": "rows",
    "st": "rows",
    "s.t.": "rows",
    "bounds": "bounds",
    "binaries": "bin",
    "binary": "bin",
    "bin": "bin",
    "generals": "gen",
    "general": "gen",
    "gen": "gen",
    "end": "end",
}


def _terms(cols, coefs, names) -> str:
    parts = []
    for c, a in zip(cols, coefs):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        coef = "" if mag == 1 else f"{mag} "
        parts.append(f"{sign} {coef}{names[c]}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _wrap(text: str, indent: str = "   ", width: int = 250) -> str:
    # LP readers limit line length; break between terms
    out, line = [], ""
    for tok in text.split(" "):
        if len(line) + len(tok) + 1 > width and line:
            out.append(line)
            line = indent
        line = f"{line} {tok}" if line.strip() else f"{line}{tok}"
    out.append(line)
    return "\n".join(out)


def write_lp(model: LinearModel) -> str:
    names = model.names
    lines = ["\\ integer program, maximize", "Maximize"]
    obj_cols = [j for j, c in enumerate(model.obj) if c]
    lines.append(_wrap(" obj: " + _terms(obj_cols, [model.obj[j] for j in obj_cols], names)))
    lines.append("Subject To")
    for row in model.rows:
        op = {"<=": "<=", ">=": ">=", "=": "="}[row.sense]
        lines.append(_wrap(f" {row.name}: {_terms(row.cols, row.coefs, names)} {op} {row.rhs}"))
    lines.append("Bounds")
    bins, gens = [], []
    for j, name in enumerate(names):
        if model.lb[j] == 0 and model.ub[j] == 1:
            bins.append(name)
        else:
            gens.append(name)
            lines.append(f" {model.lb[j]} <= {name} <= {model.ub[j]}")
    if bins:
        lines.append("Binaries")
        lines.extend(_wrap(" " + " ".join(bins[i : i + 10])) for i in range(0, len(bins), 10))
    if gens:
        lines.append("Generals")
        lines.extend(" " + " ".join(gens[i : i + 10]) for i in range(0, len(gens), 10))
    lines.append("End")
    return "\n".join(lines) + "\n"


_TERM = re.compile(r"([+-])?\s*(\d+)?\s*([A-Za-z_][\w.\[\]]*)")


def _parse_expr(text: str, index: dict, model: LinearModel):
    cols, coefs = [], []
    text = text.strip()
    if text in ("", "0"):
        return cols, coefs
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse LP expression near {text[pos:pos + 20]!r}")
        sign = -1 if m.group(1) == "-" else 1
        coef = int(m.group(2)) if m.group(2) else 1
        name = m.group(3)
        if name not in index:
            index[name] = model.add_var(name, 0, 1)
        cols.append(index[name])
        coefs.append(sign * coef)
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return cols, coefs


def read_lp(text: str) -> LinearModel:
    """Parse LP text produced by ``write_lp`` (maximize, integer variables only)."""
    model = LinearModel()
    index: dict[str, int] = {}
    section = None
    statements: dict[str, list[str]] = {"obj": [], "rows": [], "bounds": [], "bin": [], "gen": []}
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            if section == "end":
                break
            continue
        if section is None:
            raise ValueError(f"LP text outside any section: {line!r}")
        statements[section].append(line)

    def joined(chunks):
        # a statement continues until the next line that starts with "name:"
        out = []
        for ln in chunks:
            if re.match(r"^[A-Za-z_][\w.\[\]]*\s*:", ln) or not out:
                out.append(ln)
            else:
                out[-1] += " " + ln
        return out

    # declare variables first so their order follows the Binaries/Generals lists
    for ln in statements["bin"] + statements["gen"]:
        for name in ln.split():
            if name not in index:
                index[name] = model.add_var(name, 0, 1)
    for ln in statements["bounds"]:
        m = re.fullmatch(r"(-?\d+)\s*<=\s*(\S+)\s*<=\s*(-?\d+)", ln)
        if not m:
            raise ValueError(f"unsupported bound line {ln!r}")
        name = m.group(2)
        if name not in index:
            index[name] = model.add_var(name, 0, 1)
        j = index[name]
        model.lb[j], model.ub[j] = int(m.group(1)), int(m.group(3))

    obj_text = " ".join(statements["obj"])
    obj_text = obj_text.split(":", 1)[1] if ":" in obj_text else obj_text
    cols, coefs = _parse_expr(obj_text, index, model)
    for c, a in zip(cols, coefs):
        model.obj[c] += a

    for stmt in joined(statements["rows"]):
        name, _, body = stmt.partition(":")
        m = re.fullmatch(r"(.*?)(<=|>=|=<|=>|=)\s*(-?\d+)\s*", body)
        if not m:
            raise ValueError(f"cannot parse LP row {stmt!r}")
        sense = {"=<": "<=", "=>": ">="}.get(m.group(2), m.group(2))
        cols, coefs = _parse_expr(m.group(1), index, model)
        model.add_row(cols, coefs, sense, int(m.group(3)), name=name.strip())
    return model
