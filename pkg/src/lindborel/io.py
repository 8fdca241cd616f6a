"""System configuration files, run configuration and deterministic output writers."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .fourier_algebra import EquilibriumViolated, NotHyperbolic, SystemSpec, parse_perturbation
from .freq_diophantine import FrequencyVector

log = logging.getLogger(__name__)

SCHEMA = "lindborel-system/1"
CAPS = {"K": 8, "N": 12, "K_se": 4}


class SchemaError(ValueError):
    """Malformed configuration; the message names the offending field."""


def bundled_system_path(name: str = "golden_pendulum") -> Path:
    return Path(str(resources.files("lindborel") / "data" / f"{name}.json"))


def _field(data: dict, key: str, kind=None):
    if key not in data:
        raise SchemaError(f"missing field '{key}'")
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(f"field '{key}' has the wrong type")
    return value


def system_from_dict(data: dict) -> SystemSpec:
    if data.get("schema") != SCHEMA:
        raise SchemaError(f"field 'schema' must be {SCHEMA!r}")
    try:
        omega = _field(data, "omega", list)
        if len(omega) != 2 or any(len(w) != 4 for w in omega):
            raise SchemaError("field 'omega' must hold two [a, b, c, d] entries")
        C0 = data.get("C0")
        if C0 is not None:
            C0 = Fraction(int(C0[0]), int(C0[1]))
        freq = FrequencyVector.from_json(omega, C0=C0)
    except SchemaError:
        raise
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise SchemaError(f"field 'omega': {exc}") from exc
    s = _field(data, "s", int)
    if s < 0:
        raise SchemaError("field 's' must be non-negative")
    try:
        f = parse_perturbation(_field(data, "f", list), s)
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(f"field 'f': {exc}") from exc
    beta0 = _field(data, "beta0", list)
    if len(beta0) != s:
        raise SchemaError("field 'beta0' must have s entries")
    eta0 = float(data.get("eta0", 0.1))
    try:
        return SystemSpec(freq, s, f, beta0, eta0, name=str(data.get("name", "system")))
    except NotHyperbolic as exc:
        raise NotHyperbolic(f"field 'beta0': {exc}") from exc
    except EquilibriumViolated as exc:
        raise EquilibriumViolated(f"field 'beta0': {exc}") from exc


def load_system(path=None) -> SystemSpec:
    """Read and validate a system file (the bundled golden pendulum when ``path`` is None)."""
    path = bundled_system_path() if path is None else Path(path)
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("top level must be an object")
    return system_from_dict(data)


@dataclass
class RunConfig:
    system: str | None = None
    out: str = "out"
    K: int = 4
    N: int = 6
    K_se: int = 3
    P: int = 12
    scheme: str = "A"
    etas: list[float] = field(default_factory=lambda: [0.05, 0.025, 0.0125])
    grid: int = 64
    tol: float = 1e-10
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        for name, cap in CAPS.items():
            v = getattr(self, name)
            if not 0 <= v <= cap:
                raise SchemaError(f"{name} = {v} outside 0..{cap}")
        if self.scheme.upper() not in ("A", "B"):
            raise SchemaError(f"scheme {self.scheme!r} is not A or B")
        if self.tol <= 0 or any(e <= 0 for e in self.etas) or self.grid <= 0:
            raise SchemaError("tolerances, eta values and grid sizes must be positive")
        if self.P < 0:
            raise SchemaError("P must be non-negative")
        return self


# ----------------------------------------------------------------------
# deterministic writers


def fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


class OutputDir:
    """Collects written files and their hashes for the manifest."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}

    def write(self, name: str, text: str):
        data = text.encode()
        (self.path / name).write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()

    def manifest(self, command: str, parameters: dict, inputs: dict[str, str]) -> dict:
        from . import __version__
        import mpmath
        import numpy

        return {
            "command": command,
            "parameters": parameters,
            "inputs": inputs,
            "outputs": dict(sorted(self.files.items())),
            "versions": {"lindborel": __version__, "numpy": numpy.__version__, "mpmath": mpmath.__version__},
        }


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
