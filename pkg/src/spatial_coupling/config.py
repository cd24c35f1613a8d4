"""Run configuration: a flat ``key = value`` file with dotted keys.

Grammar, one statement per line::

    # comment (also after a value)
    key = value
    section = {key = value, key = value}     # same as section.key = value

Keys are dotted names from :data:`KEYS`.  A value is an integer, a float, a
fraction ``a/b`` (handy for ``grid.dx = 1/64``), ``true``/``false``, or a
string, optionally in double quotes.  Unknown keys are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Key:
    name: str
    type: type
    default: object
    help: str

    @property
    def flag(self) -> str:
        return "--" + self.name.split(".")[-1].replace("_", "-")

    @property
    def dest(self) -> str:
        return self.name.replace(".", "__")


KEYS = [
    Key("system.family", str, "ldpc_bec", "system family: ldpc_bec, gldpc, gaussian_ldpc or amp"),
    Key("system.l", int, 3, "variable degree of the (l, r) ensembles"),
    Key("system.r", int, 6, "check degree of the (l, r) ensembles"),
    Key("system.eps_offset", float, 0.0, "move the erasure probability off its threshold (ldpc_bec)"),
    Key("system.n", int, 15, "component code length of the GLDPC ensemble"),
    Key("system.e", int, 3, "errors corrected by the GLDPC component code"),
    Key("system.rho", float, 0.2, "sparsity of the Bernoulli-Gaussian prior (amp)"),
    Key("system.delta", float, 0.35, "measurement rate (amp)"),
    Key("window.kind", str, "uniform", "window shape: uniform, triangular or gaussian"),
    Key("window.half_width", float, 0.5, "half support (standard deviation for gaussian)"),
    Key("grid.x_min", float, -16.0, "left end of the spatial grid"),
    Key("grid.x_max", float, 16.0, "right end of the spatial grid"),
    Key("grid.dx", float, 1 / 64, "grid spacing"),
    Key("solver.max_iterations", int, 100_000, "iteration cap"),
    Key("solver.tol", float, 1e-12, "stop when a sweep changes no sample by more than this"),
    Key("solver.cadence", int, 50, "recentre every this many sweeps"),
    Key("solver.init", str, "step", "initial profile: step or ramp"),
    Key("solver.ramp_half_width", float, 2.0, "half width of the ramp initialisation"),
    Key("solver.damping", float, 0.0, "fraction of the old iterate kept per half step"),
    Key("convexity.points", int, 21, "number of lambda points in a sweep"),
    Key("convexity.count", int, 1, "random pairs per convexity batch"),
    Key("convexity.workers", int, 1, "worker processes for convexity batches"),
    Key("check.lattice", int, 256, "lattice size for the gap-condition check"),
    Key("seed", int, 0, "seed for every random draw"),
]
KEY_INDEX = {k.name: k for k in KEYS}


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {k.name: k.default for k in KEYS})

    def __getitem__(self, name):
        return self.values[name]

    def set(self, name: str, raw) -> None:
        if name not in KEY_INDEX:
            raise ConfigError(f"unknown config key {name!r}")
        self.values[name] = _coerce(KEY_INDEX[name], raw)

    def section(self, prefix: str) -> dict:
        p = prefix + "."
        return {k[len(p):]: v for k, v in self.values.items() if k.startswith(p)}

    def dump(self) -> str:
        return "".join(f"{k} = {_format(v)}\n" for k, v in self.values.items())


def _format(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return f'"{v}"'
    return repr(v)


def _parse_scalar(text: str):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] == '"':
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if re.fullmatch(r"[-+]?\d+\s*/\s*\d+", text):
        return float(Fraction(text.replace(" ", "")))
    return text


def _coerce(key: Key, raw):
    value = _parse_scalar(raw) if isinstance(raw, str) else raw
    try:
        if key.type is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if key.type is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key.name} expects {key.type.__name__}, got {raw!r}") from None


def _strip_comment(line: str) -> str:
    out, quoted = [], False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out).strip()


def parse_config(text: str, config: RunConfig | None = None) -> RunConfig:
    config = config or RunConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = key.strip(), value.strip()
        try:
            if value.startswith("{"):
                if not value.endswith("}"):
                    raise ConfigError("unterminated inline table")
                for item in filter(None, (s.strip() for s in value[1:-1].split(","))):
                    sub, sep, v = item.partition("=")
                    if not sep:
                        raise ConfigError(f"expected 'key = value' inside braces, got {item!r}")
                    config.set(f"{key}.{sub.strip()}", v.strip())
            else:
                config.set(key, value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return config


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
