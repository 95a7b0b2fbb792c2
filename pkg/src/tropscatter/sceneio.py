"""Versioned JSON documents for scenes, diagrams, potentials, periods and descendant tables.

Every document is an envelope ``{"schema_version", "kind", "payload"}``.  Output
is canonical (sorted keys, canonical list order, two-space indent, LF newlines,
trailing newline) so ``emit`` is a pure function of the value and
``emit(parse(text)) == text`` for any canonical ``text``.
"""

from __future__ import annotations

import csv
import io
import json
from importlib import resources

from .errors import MalformedDocument, MalformedRational, SchemaMismatch, TropScatterError
from .geometry import RationalPoint
from .nilring import LaurentPoly, NilCoefficient, format_rational, mask_members, parse_rational, tset_mask
from .period import DescendantTable, PeriodSeries
from .potential import BrokenLine, ChamberPotential, Segment
from .scatter import Diagram, Provenance, Wall
from .toric import Fan, Scene, fan_builtin

__all__ = [
    "SCHEMA_VERSION",
    "KINDS",
    "emit",
    "parse",
    "read",
    "write",
    "descendants_csv",
    "golden_tables",
    "GOLDEN_POINTS",
]

SCHEMA_VERSION = "1"
KINDS = ("scene", "diagram", "potential", "period", "descendants")


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


def _pt(p) -> list[str]:
    return [format_rational(p[0]), format_rational(p[1])]


def _fan(fan: Fan):
    if fan.name is not None:
        try:
            if fan_builtin(fan.name) == fan:
                return fan.name
        except TropScatterError:
            pass
    return {"rays": [list(v) for v in fan.rays]}


def _scene(scene: Scene) -> dict:
    return {"fan": _fan(scene.fan), "points": [_pt(p) for p in scene.points]}


def _provenance(p: Provenance) -> dict:
    if p.kind == "point":
        return {"kind": "point", "index": p.index}
    return {"kind": "scattered", "at": _pt(p.at)}


def _wall(w: Wall) -> dict:
    return {
        "base": _pt(w.base),
        "dir": list(w.dir),
        "fun": w.fun.to_records(),
        "provenance": _provenance(w.provenance),
    }


def _line(line: BrokenLine) -> dict:
    return {
        "endpoint": _pt(line.endpoint),
        "segments": [
            {
                "exponent": list(s.exponent),
                "coeff": format_rational(s.coeff),
                "tset": list(s.tset),
                "start": None if s.start is None else _pt(s.start),
                "bend": None if s.bend is None else _wall(s.bend),
            }
            for s in line.segments
        ],
    }


def _nil_records(c: NilCoefficient) -> list[dict]:
    return [
        {"tset": list(mask_members(mask)), "value": format_rational(v)}
        for mask, v in sorted(c.items(), key=lambda kv: (bin(kv[0]).count("1"), kv[0]))
    ]


def _encode(x) -> tuple[str, dict]:
    if isinstance(x, Scene):
        return "scene", _scene(x)
    if isinstance(x, Diagram):
        return "diagram", {
            "scene": _scene(x.scene),
            "subset": list(mask_members(x.subset)),
            "walls": [_wall(w) for w in x.walls],
        }
    if isinstance(x, ChamberPotential):
        payload = {"at": _pt(x.at), "value": x.value.to_records()}
        if x.lines is not None:
            payload["lines"] = [_line(line) for line in x.lines]
        return "potential", payload
    if isinstance(x, PeriodSeries):
        return "period", {
            "mmax": x.mmax,
            "terms": [
                {"m": m, "tset": list(mask_members(mask)), "value": format_rational(v)}
                for m, mask, v in x.terms()
            ],
        }
    if isinstance(x, DescendantTable):
        return "descendants", {
            "mmax": x.mmax,
            "k": x.k,
            "entries": [
                {
                    "m": e.m,
                    "n": e.n,
                    "delta": e.degree_size,
                    "psi": e.psi_power,
                    "tset": list(e.tset),
                    "value": format_rational(e.value),
                }
                for e in x.entries()
            ],
        }
    raise TypeError(f"cannot serialize {type(x).__name__}")


def emit(x) -> str:
    """Canonical JSON text of ``x`` inside a versioned envelope."""
    kind, payload = _encode(x)
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, "payload": payload}
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def descendants_csv(table: DescendantTable) -> str:
    """CSV with columns m, n, |Delta|, I, value (I as space-separated indices)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["m", "n", "|Delta|", "I", "value"])
    for e in table.entries():
        writer.writerow([e.m, e.n, e.degree_size, " ".join(map(str, e.tset)), format_rational(e.value)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------


class _Bad(Exception):
    """Structural problem at a JSON path; converted to MalformedDocument."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")


def _obj(x, path, required, optional=()):
    if not isinstance(x, dict):
        raise _Bad(path, f"expected an object, got {type(x).__name__}")
    keys = set(x)
    unknown = keys - set(required) - set(optional)
    if unknown:
        raise _Bad(f"{path}.{sorted(unknown)[0]}", f"unknown field(s) {sorted(unknown)}")
    missing = set(required) - keys
    if missing:
        raise _Bad(path, f"missing field(s) {sorted(missing)}")
    return x


def _list(x, path):
    if not isinstance(x, list):
        raise _Bad(path, f"expected a list, got {type(x).__name__}")
    return x


def _int(x, path):
    if type(x) is not int:
        raise _Bad(path, f"expected an integer, got {x!r}")
    return x


def _rat(x, path):
    try:
        return parse_rational(x)
    except MalformedRational as exc:
        raise MalformedRational(f"{path}: {exc}") from None


def _dec_pt(x, path) -> RationalPoint:
    x = _list(x, path)
    if len(x) != 2:
        raise _Bad(path, "a point has two coordinates")
    return RationalPoint.of(_rat(x[0], f"{path}[0]"), _rat(x[1], f"{path}[1]"))


def _dec_vec(x, path) -> tuple[int, int]:
    x = _list(x, path)
    if len(x) != 2:
        raise _Bad(path, "a vector has two entries")
    return (_int(x[0], f"{path}[0]"), _int(x[1], f"{path}[1]"))


def _dec_tset(x, path) -> tuple[int, ...]:
    x = _list(x, path)
    out = tuple(_int(v, f"{path}[{j}]") for j, v in enumerate(x))
    if any(v < 1 for v in out) or len(set(out)) != len(out):
        raise _Bad(path, "a t-set lists distinct positive indices")
    return out


def _dec_poly(x, path) -> LaurentPoly:
    x = _list(x, path)
    for j, rec in enumerate(x):
        rp = f"{path}[{j}]"
        _obj(rec, rp, ("zexp", "tset", "coeff"))
        _dec_vec(rec["zexp"], f"{rp}.zexp")
        _dec_tset(rec["tset"], f"{rp}.tset")
        _rat(rec["coeff"], f"{rp}.coeff")
    try:
        return LaurentPoly.from_records(x)
    except ValueError as exc:
        raise _Bad(path, str(exc)) from None


def _dec_fan(x, path) -> Fan:
    if isinstance(x, str):
        return fan_builtin(x)
    _obj(x, path, ("rays",))
    rays = [_dec_vec(v, f"{path}.rays[{j}]") for j, v in enumerate(_list(x["rays"], f"{path}.rays"))]
    return Fan.from_rays(rays)


def _dec_scene(x, path) -> Scene:
    _obj(x, path, ("fan", "points"))
    fan = _dec_fan(x["fan"], f"{path}.fan")
    pts = [_dec_pt(p, f"{path}.points[{j}]") for j, p in enumerate(_list(x["points"], f"{path}.points"))]
    return Scene(fan, tuple(pts))


def _dec_provenance(x, path) -> Provenance:
    if not isinstance(x, dict) or "kind" not in x:
        raise _Bad(path, "provenance needs a kind")
    if x["kind"] == "point":
        _obj(x, path, ("kind", "index"))
        return Provenance.from_point(_int(x["index"], f"{path}.index"))
    if x["kind"] == "scattered":
        _obj(x, path, ("kind", "at"))
        return Provenance.scattered(_dec_pt(x["at"], f"{path}.at"))
    raise _Bad(path, f"unknown provenance kind {x['kind']!r}")


def _dec_wall(x, path) -> Wall:
    _obj(x, path, ("base", "dir", "fun", "provenance"))
    try:
        return Wall(
            _dec_pt(x["base"], f"{path}.base"),
            _dec_vec(x["dir"], f"{path}.dir"),
            _dec_poly(x["fun"], f"{path}.fun"),
            _dec_provenance(x["provenance"], f"{path}.provenance"),
        )
    except (ValueError, TropScatterError) as exc:
        if isinstance(exc, (MalformedRational, MalformedDocument)):
            raise
        raise _Bad(path, str(exc)) from None


def _dec_line(x, path) -> BrokenLine:
    _obj(x, path, ("endpoint", "segments"))
    segs = []
    for j, s in enumerate(_list(x["segments"], f"{path}.segments")):
        sp = f"{path}.segments[{j}]"
        _obj(s, sp, ("exponent", "coeff", "tset", "start", "bend"))
        segs.append(
            Segment(
                _dec_vec(s["exponent"], f"{sp}.exponent"),
                _rat(s["coeff"], f"{sp}.coeff"),
                _dec_tset(s["tset"], f"{sp}.tset"),
                None if s["start"] is None else _dec_pt(s["start"], f"{sp}.start"),
                None if s["bend"] is None else _dec_wall(s["bend"], f"{sp}.bend"),
            )
        )
    return BrokenLine(tuple(segs), _dec_pt(x["endpoint"], f"{path}.endpoint"))


def _dec_period(x, path) -> PeriodSeries:
    _obj(x, path, ("mmax", "terms"))
    mmax = _int(x["mmax"], f"{path}.mmax")
    if mmax < 2:
        raise _Bad(f"{path}.mmax", "mmax must be at least 2")
    coeff = {m: {} for m in range(2, mmax + 1)}
    for j, t in enumerate(_list(x["terms"], f"{path}.terms")):
        tp = f"{path}.terms[{j}]"
        _obj(t, tp, ("m", "tset", "value"))
        m = _int(t["m"], f"{tp}.m")
        if m not in coeff:
            raise _Bad(f"{tp}.m", f"m={m} outside 2..{mmax}")
        mask = tset_mask(_dec_tset(t["tset"], f"{tp}.tset"))
        if mask in coeff[m]:
            raise _Bad(tp, "duplicate term")
        coeff[m][mask] = _rat(t["value"], f"{tp}.value")
    return PeriodSeries(mmax, {m: NilCoefficient(c) for m, c in coeff.items()})


def _dec_descendants(x, path) -> DescendantTable:
    _obj(x, path, ("mmax", "k", "entries"))
    mmax = _int(x["mmax"], f"{path}.mmax")
    k = _int(x["k"], f"{path}.k")
    if mmax < 2 or k < 0:
        raise _Bad(path, "need mmax >= 2 and k >= 0")
    coeff = {m: {} for m in range(2, mmax + 1)}
    for j, e in enumerate(_list(x["entries"], f"{path}.entries")):
        ep = f"{path}.entries[{j}]"
        _obj(e, ep, ("m", "n", "delta", "psi", "tset", "value"))
        m = _int(e["m"], f"{ep}.m")
        tset = _dec_tset(e["tset"], f"{ep}.tset")
        if m not in coeff or any(i > k for i in tset):
            raise _Bad(ep, "entry outside the table range")
        n = _int(e["n"], f"{ep}.n")
        if n != len(tset) or _int(e["delta"], f"{ep}.delta") != m + n or _int(e["psi"], f"{ep}.psi") != m - 2:
            raise _Bad(ep, "n, delta and psi must equal |I|, m+|I| and m-2")
        coeff[m][tset_mask(tset)] = _rat(e["value"], f"{ep}.value")
    return DescendantTable(PeriodSeries(mmax, {m: NilCoefficient(c) for m, c in coeff.items()}), k)


def _decode(kind: str, payload):
    if kind == "scene":
        return _dec_scene(payload, "payload")
    if kind == "diagram":
        _obj(payload, "payload", ("scene", "subset", "walls"))
        scene = _dec_scene(payload["scene"], "payload.scene")
        subset = _dec_tset(payload["subset"], "payload.subset")
        if any(i > scene.k for i in subset):
            raise _Bad("payload.subset", "index exceeds the number of points")
        walls = [_dec_wall(w, f"payload.walls[{j}]") for j, w in enumerate(_list(payload["walls"], "payload.walls"))]
        return Diagram(scene, tuple(walls), tset_mask(subset))
    if kind == "potential":
        _obj(payload, "payload", ("at", "value"), ("lines",))
        lines = None
        if "lines" in payload:
            lines = tuple(
                _dec_line(v, f"payload.lines[{j}]") for j, v in enumerate(_list(payload["lines"], "payload.lines"))
            )
        return ChamberPotential(_dec_pt(payload["at"], "payload.at"), _dec_poly(payload["value"], "payload.value"), lines)
    if kind == "period":
        return _dec_period(payload, "payload")
    if kind == "descendants":
        return _dec_descendants(payload, "payload")
    raise _Bad("kind", f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")


def _locate(text: str, path: str) -> tuple[int | None, int | None]:
    """Best-effort line/column of the JSON value at ``path`` (its last key)."""
    last = path.split(".")[-1].split("[")[0]
    if not last:
        return None, None
    needle = f'"{last}"'
    pos = text.find(needle)
    if pos < 0:
        return None, None
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def parse(text: str, expect: str | None = None):
    """Parse a document; returns the decoded value.  ``expect`` pins the kind."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from None
    try:
        _obj(doc, "document", ("schema_version", "kind", "payload"))
        version = doc["schema_version"]
        if version != SCHEMA_VERSION:
            raise SchemaMismatch(f"unsupported schema_version {version!r}; this build reads {SCHEMA_VERSION!r}")
        kind = doc["kind"]
        if expect is not None and kind != expect:
            raise _Bad("kind", f"expected a {expect} document, got {kind!r}")
        return _decode(kind, doc["payload"])
    except _Bad as exc:
        path = str(exc).split(":", 1)[0]
        line, col = _locate(text, path)
        raise MalformedDocument(str(exc), line=line, column=col) from None


def read(path, expect: str | None = None):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), expect)


def write(path, x) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit(x))


# ---------------------------------------------------------------------------
# Golden P2 tables
# ---------------------------------------------------------------------------

#: Scenes the bundled tables belong to, keyed by order.
GOLDEN_SCENES = {
    1: (("0", "0"),),
    2: (("0", "0"), ("3", "-2")),
}

#: Chamber labels of the bundled tables with the representative point stored in each file.
GOLDEN_POINTS = {
    (1, "A"): (1, -1),
    (1, "B"): (-2, 1),
    (1, "C"): (2, 1),
    (2, "A1"): (10, -10),
    (2, "A2"): (1, -8),
    (2, "B1"): (-5, -3),
    (2, "B2"): (-2, 1),
    (2, "C1"): (4, 3),
    (2, "C2"): (7, 1),
    (2, "I"): (1, 3),
    (2, "J"): (5, -1),
    (2, "K"): (-4, -6),
}


def golden_name(order: int, label: str) -> str:
    return f"P2_k{order}_{label}.potential.json"


def golden_text(order: int, label: str) -> str:
    return resources.files("tropscatter").joinpath("golden", golden_name(order, label)).read_text(encoding="utf-8")


def golden_tables() -> dict[tuple[int, str], ChamberPotential]:
    """The bundled first- and second-order P2 chamber potentials, keyed by (order, label)."""
    return {key: parse(golden_text(*key), expect="potential") for key in GOLDEN_POINTS}


def golden_scene(order: int) -> Scene:
    return Scene.make("P2", [tuple(parse_rational(c) for c in p) for p in GOLDEN_SCENES[order]])
