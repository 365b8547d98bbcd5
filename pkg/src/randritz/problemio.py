"""Problem manifests: ``key = value`` text naming term kinds, coefficients and Matrix Market files.

Example::

    # pencil A0 - xi A1
    region = disc 0 10
    probe = 0.5
    term.0.kind = constant
    term.0.file = A0.mtx
    term.1.kind = monomial
    term.1.power = 1
    term.1.coeff = -1
    term.1.file = A1.mtx
    term.2.kind = analytic
    term.2.function = exp
    term.2.rate = -1

Complex values use Python literals (``1+2j``).  Relative file paths are
resolved against the manifest's directory.  Analytic terms are named
functions; only ``exp`` (``coeff * exp(rate * xi)``) is built in.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import ManifestError
from .mmio import read_matrix, write_matrix
from .nep import Disc, MatrixFunction, Rect, ScalarTerm, constant, exponential, monomial

_TERM_KEY = re.compile(r"^term\.(\d+)\.(kind|power|coeff|file|function|rate)$")
_TOP_KEYS = {"region", "probe", "name"}


def parse_complex(text: str, path=None, line=None) -> complex:
    s = text.strip().replace(" ", "")
    if "," in s:
        parts = s.split(",")
        if len(parts) == 2:
            try:
                return complex(float(parts[0]), float(parts[1]))
            except ValueError:
                pass
    try:
        return complex(s)
    except ValueError:
        raise ManifestError(f"not a complex number: {text!r}", path, line) from None


def _parse_region(value: str, path, line):
    parts = value.split()
    if len(parts) == 3 and parts[0] == "disc":
        r = float(parts[2])
        if r <= 0:
            raise ManifestError("disc radius must be positive", path, line)
        return Disc(parse_complex(parts[1], path, line), r)
    if len(parts) == 3 and parts[0] == "rect":
        return Rect(parse_complex(parts[1], path, line), parse_complex(parts[2], path, line))
    raise ManifestError(f"region must be 'disc CENTER RADIUS' or 'rect LOWER UPPER', got {value!r}", path, line)


def _region_text(region) -> str:
    if isinstance(region, Disc):
        return f"disc {complex(region.center)!r} {float(region.radius)!r}"
    return f"rect {complex(region.lower)!r} {complex(region.upper)!r}"


def read_manifest(path) -> MatrixFunction:
    path = Path(path)
    if not path.exists():
        raise ManifestError("manifest not found", path=path)
    top: dict = {}
    terms: dict[int, dict] = {}
    where: dict = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ManifestError(f"expected 'key = value', got {raw.strip()!r}", path, lineno)
        key, value = (s.strip() for s in text.split("=", 1))
        m = _TERM_KEY.match(key)
        if m:
            idx, field = int(m.group(1)), m.group(2)
            entry = terms.setdefault(idx, {})
            if field in entry:
                raise ManifestError(f"duplicate key {key!r}", path, lineno)
            entry[field] = value
            where[(idx, field)] = lineno
            where.setdefault((idx, None), lineno)
        elif key in _TOP_KEYS:
            if key in top:
                raise ManifestError(f"duplicate key {key!r}", path, lineno)
            top[key] = (value, lineno)
        else:
            raise ManifestError(f"unknown key {key!r}", path, lineno)
    if not terms:
        raise ManifestError("manifest declares no terms", path)
    region = Disc()
    if "region" in top:
        region = _parse_region(top["region"][0], path, top["region"][1])
    probe = parse_complex(top["probe"][0], path, top["probe"][1]) if "probe" in top else region.mid
    built = []
    for idx in sorted(terms):
        t = terms[idx]
        first = where[(idx, None)]
        kind = t.get("kind")
        coeff = parse_complex(t["coeff"], path, where[(idx, "coeff")]) if "coeff" in t else 1.0
        if kind == "constant":
            f = constant(coeff)
        elif kind == "monomial":
            if "power" not in t:
                raise ManifestError(f"term {idx}: monomial needs a power", path, first)
            try:
                power = int(t["power"])
            except ValueError:
                raise ManifestError(f"term {idx}: bad power {t['power']!r}", path, where[(idx, "power")]) from None
            if power < 0:
                raise ManifestError(f"term {idx}: negative power", path, where[(idx, "power")])
            f = monomial(power, coeff) if power else constant(coeff)
        elif kind == "analytic":
            name = t.get("function")
            if name != "exp":
                raise ManifestError(f"term {idx}: unknown analytic function {name!r}", path,
                                    where.get((idx, "function"), first))
            rate = parse_complex(t["rate"], path, where[(idx, "rate")]) if "rate" in t else 1.0
            f = exponential(rate, coeff)
        else:
            raise ManifestError(f"term {idx}: kind must be constant, monomial or analytic, got {kind!r}",
                                path, where.get((idx, "kind"), first))
        if "file" not in t:
            raise ManifestError(f"term {idx}: no matrix file", path, first)
        mpath = Path(t["file"])
        if not mpath.is_absolute():
            mpath = path.parent / mpath
        try:
            M = read_matrix(mpath)
        except ManifestError as exc:
            raise ManifestError(f"term {idx}: {exc.message} ({mpath})", path, where[(idx, "file")]) from exc
        built.append((f, M))
    n = built[0][1].shape[0]
    for (f, M), idx in zip(built, sorted(terms)):
        if M.shape != (n, n):
            raise ManifestError(f"term {idx}: matrix shape {M.shape} differs from {(n, n)}", path,
                                where[(idx, "file")])
    return MatrixFunction(tuple(built), region, probe)


def _term_lines(i: int, f: ScalarTerm) -> list[str]:
    out = []
    if f.kind == "analytic":
        if not f.name.startswith("exp:"):
            raise ValueError(f"cannot serialize analytic term {f.name!r}")
        out += [f"term.{i}.kind = analytic", f"term.{i}.function = exp", f"term.{i}.rate = {f.name[4:]}"]
    elif f.kind == "monomial":
        out += [f"term.{i}.kind = monomial", f"term.{i}.power = {f.power}"]
    else:
        out.append(f"term.{i}.kind = constant")
    out.append(f"term.{i}.coeff = {complex(f.coeff)!r}")
    return out


def write_manifest(directory, A: MatrixFunction, name: str = "problem") -> Path:
    """Write ``<name>.manifest`` plus one ``<name>_A<i>.mtx`` per term into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [f"name = {name}", f"region = {_region_text(A.region)}", f"probe = {complex(A.probe)!r}"]
    for i, (f, M) in enumerate(A.terms):
        fname = f"{name}_A{i}.mtx"
        write_matrix(directory / fname, M)
        lines += _term_lines(i, f)
        lines.append(f"term.{i}.file = {fname}")
    path = directory / f"{name}.manifest"
    path.write_text("\n".join(lines) + "\n")
    return path


def read_basis(path) -> np.ndarray:
    W = read_matrix(path)
    if W.ndim != 2:
        raise ManifestError("basis must be a matrix", path=path)
    return W
