"""Experiment configuration files.

Grammar (one statement per line, ``#`` starts a comment)::

    document  := { line }
    line      := blank | comment | section | assignment
    section   := "[experiment." NAME "]"
    assignment:= KEY "=" value
    value     := scalar | "[" scalar { "," scalar } "]"
    scalar    := integer | float | "true" | "false" | bare-word | quoted-string

Assignments before the first section are defaults inherited by every
experiment. A list value is a grid: each experiment expands into the
cartesian product of its list-valued keys, in order of first appearance,
and the expanded specs are named ``name[key=value,...]``.

Keys (unknown keys are an error):

=============  ===========================================================
``n``, ``s``   dimension and sparsity (``1 <= s <= n/2``)
``family``     ``gaussian`` (needs ``theta``) or ``bernoulli`` (``p0``, ``p1``)
``alt_known``  whether procedures may use the alternative (default true)
``procedure``  ``fixed`` | ``sprt`` | ``simple_st`` | ``general_st``
``m``          budget for fixed / simple_st / general_st
``delta``      target error for simple_st / general_st
``rho``        general_st discard fraction (default 0.5)
``epsilon``    sprt threshold exponent
``j_max``      sprt truncation cap (default from ``ln s / d01``)
``rule``       fixed decision rule: ``top_s`` (default) or ``llr_threshold``
``tau``        llr_threshold cut-off
``trials``     Monte Carlo trials
``seed``       base seed
``placement``  ``uniform_random`` (default) or ``fixed_first_s``
=============  ===========================================================
"""

import itertools
import re

from .distributions import BernoulliPair, GaussianShift
from .errors import ConfigParseError, ConfigValidationError
from .harness import ExperimentSpec
from .procedures import FixedSample, GeneralST, SimpleST, Sprt

KEYS = (
    "n", "s", "family", "theta", "p0", "p1", "alt_known", "procedure", "m", "delta",
    "rho", "epsilon", "j_max", "rule", "tau", "trials", "seed", "placement",
)  # fmt: skip
_INT_KEYS = {"n", "s", "m", "j_max", "trials", "seed"}
_FLOAT_KEYS = {"theta", "p0", "p1", "delta", "rho", "epsilon", "tau"}
_SECTION = re.compile(r"^\[experiment\.([A-Za-z0-9_\-]+)\]$")
_ASSIGN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+)$")


def _strip_comment(line):
    out, quote = [], None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            break
        out.append(ch)
    return "".join(out).strip()


def _scalar(text, lineno, key):
    text = text.strip()
    if not text:
        raise ConfigParseError("empty value", lineno, key)
    if text[0] in "\"'":
        if len(text) < 2 or text[-1] != text[0]:
            raise ConfigParseError(f"unterminated string {text!r}", lineno, key)
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", text):
        return text
    raise ConfigParseError(f"cannot parse value {text!r}", lineno, key)


def _value(text, lineno, key):
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ConfigParseError("unterminated list", lineno, key)
        body = text[1:-1].strip()
        if not body:
            raise ConfigParseError("empty list", lineno, key)
        return [_scalar(item, lineno, key) for item in body.split(",")]
    return _scalar(text, lineno, key)


def parse_document(text):
    """Parse into ``(defaults, [(name, assignments), ...])`` without validation."""
    defaults, sections = {}, []
    current = defaults
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("["):
            match = _SECTION.match(line)
            if not match:
                raise ConfigParseError(f"bad section header {line!r}; expected [experiment.<name>]", lineno)
            name = match.group(1)
            if any(name == other for other, _ in sections):
                raise ConfigParseError(f"duplicate experiment {name!r}", lineno)
            current = {}
            sections.append((name, current))
            continue
        match = _ASSIGN.match(line)
        if not match:
            raise ConfigParseError(f"expected 'key = value', got {line!r}", lineno)
        key, rhs = match.group(1), match.group(2)
        if key not in KEYS:
            raise ConfigParseError(f"unknown key (allowed: {', '.join(KEYS)})", lineno, key)
        if key in current:
            raise ConfigParseError("key assigned twice", lineno, key)
        current[key] = (_value(rhs, lineno, key), lineno)
    return defaults, sections


def _typed(key, value, lineno):
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigParseError(f"expected an integer, got {value!r}", lineno, key)
    elif key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigParseError(f"expected a number, got {value!r}", lineno, key)
        return float(value)
    elif key == "alt_known":
        if not isinstance(value, bool):
            raise ConfigParseError(f"expected true or false, got {value!r}", lineno, key)
    elif not isinstance(value, str):
        raise ConfigParseError(f"expected a word, got {value!r}", lineno, key)
    return value


def _require(values, keys, context):
    missing = [k for k in keys if k not in values]
    if missing:
        raise ConfigValidationError(f"{context}: missing required key(s) {', '.join(missing)}")


def build_spec(name, values):
    """Validate one fully expanded assignment map into an ExperimentSpec."""
    _require(values, ("n", "s", "family", "procedure", "trials", "seed"), name)
    n, s = values["n"], values["s"]
    if n < 2:
        raise ConfigValidationError(f"{name}: n = {n} violates n >= 2")
    if s < 1 or 2 * s > n:
        raise ConfigValidationError(f"{name}: s = {s}, n = {n} violates 1 <= s <= n/2")
    if values["trials"] < 1:
        raise ConfigValidationError(f"{name}: trials must be >= 1")
    alt_known = values.get("alt_known", True)

    family = values["family"]
    try:
        if family == "gaussian":
            _require(values, ("theta",), name)
            pair = GaussianShift(theta=values["theta"], alt_known=alt_known)
        elif family == "bernoulli":
            _require(values, ("p0", "p1"), name)
            pair = BernoulliPair(p0=values["p0"], p1=values["p1"], alt_known=alt_known)
        else:
            raise ConfigValidationError(f"{name}: family must be gaussian or bernoulli, got {family!r}")

        procedure = values["procedure"]
        if procedure == "fixed":
            _require(values, ("m",), name)
            cfg = FixedSample(m=values["m"], rule=values.get("rule", "top_s"), tau=values.get("tau"))
        elif procedure == "sprt":
            _require(values, ("epsilon",), name)
            cfg = Sprt(epsilon=values["epsilon"], j_max=values.get("j_max"))
        elif procedure == "simple_st":
            _require(values, ("m", "delta"), name)
            cfg = SimpleST(delta=values["delta"], m=values["m"])
        elif procedure == "general_st":
            _require(values, ("m", "delta"), name)
            cfg = GeneralST(delta=values["delta"], m=values["m"], rho=values.get("rho", 0.5))
        else:
            raise ConfigValidationError(
                f"{name}: procedure must be fixed, sprt, simple_st or general_st, got {procedure!r}"
            )
        return ExperimentSpec(
            n=n,
            s=s,
            pair=pair,
            procedure=cfg,
            trials=values["trials"],
            base_seed=values["seed"],
            support_placement=values.get("placement", "uniform_random"),
            name=name,
        )
    except ConfigValidationError:
        raise
    except ValueError as exc:
        raise ConfigValidationError(f"{name}: {exc}") from exc


def parse_config(text, overrides=None):
    """Parse a configuration document into a list of validated ExperimentSpec.

    ``overrides`` (e.g. ``{"seed": 7, "trials": 100}``) replace the given
    keys in every experiment after grid expansion.
    """
    defaults, sections = parse_document(text)
    if not sections:
        if not defaults:
            raise ConfigValidationError("document defines no experiments")
        sections = [("default", {})]
    overrides = dict(overrides or {})
    for key in overrides:
        if key not in KEYS:
            raise ConfigParseError("unknown override key", field=key)

    specs = []
    for name, assigned in sections:
        merged = {**defaults, **assigned}
        typed_grid = {}
        for key, (value, lineno) in merged.items():
            items = value if isinstance(value, list) else [value]
            typed_grid[key] = [_typed(key, v, lineno) for v in items]
        grid_keys = [k for k, (v, _) in merged.items() if isinstance(v, list)]
        for combo in itertools.product(*(typed_grid[k] for k in grid_keys)):
            values = {k: v[0] for k, v in typed_grid.items()}
            values.update(zip(grid_keys, combo))
            values.update(overrides)
            label = name
            if grid_keys:
                label += "[" + ",".join(f"{k}={v}" for k, v in zip(grid_keys, combo)) + "]"
            specs.append(build_spec(label, values))
    return specs
