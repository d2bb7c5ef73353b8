"""Config-file reader and the reference parameter sets."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .circuit import DEFAULT_L_MAG, QabConfig, validate_config
from .errors import ConfigError, UnknownConfigKey

SECTIONS = {
    "source": {"v1", "v3"},
    "load": {"v2", "v4"},
    "modulation": {f"delta{i}" for i in range(1, 5)},
    "transformer": {f"l{i}{w}" for i in range(1, 5) for w in (1, 2)}
    | {f"r{i}{w}" for i in range(1, 5) for w in (1, 2)}
    | {f"lm{i}" for i in range(1, 5)}
    | {f"n{i}" for i in range(1, 5)},
    "switching": {"fs"},
}
# optional analysis defaults, not part of the converter description
DISPATCH_KEYS = {"split", "p_rated"}

DEFAULT_SPLIT = 0.5
DEFAULT_P_RATED = 500.0


@dataclass(frozen=True)
class DispatchOptions:
    split: float = DEFAULT_SPLIT
    p_rated: float = DEFAULT_P_RATED


def parse_config(doc: dict) -> tuple[QabConfig, DispatchOptions]:
    raw = {}
    for section, body in doc.items():
        if section == "dispatch":
            bad = sorted(set(body) - DISPATCH_KEYS)
            if bad:
                raise UnknownConfigKey(f"unknown key(s) in [dispatch]: {', '.join(bad)}")
            continue
        if section not in SECTIONS:
            raise UnknownConfigKey(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        bad = sorted(set(body) - SECTIONS[section])
        if bad:
            raise UnknownConfigKey(f"unknown key(s) in [{section}]: {', '.join(bad)}")
        raw.update(body)
    cfg = validate_config(raw)
    dispatch = doc.get("dispatch", {})
    try:
        opts = DispatchOptions(
            split=float(dispatch.get("split", DEFAULT_SPLIT)),
            p_rated=float(dispatch.get("p_rated", DEFAULT_P_RATED)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad [dispatch] value: {exc}") from None
    if not 0.0 <= opts.split <= 1.0:
        raise ConfigError(f"split = {opts.split} outside [0, 1]")
    return cfg, opts


def load_config(path) -> tuple[QabConfig, DispatchOptions]:
    """Read a TOML config file.

    ``FileNotFoundError``/``OSError`` propagate untouched; malformed content
    raises :class:`ConfigError`.
    """
    text = Path(path).read_bytes()
    try:
        doc = tomllib.loads(text.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(doc)


def dump_config(cfg: QabConfig, opts: DispatchOptions | None = None) -> str:
    raw = cfg.to_raw()
    lines = []
    for section, keys in SECTIONS.items():
        lines.append(f"[{section}]")
        for key in sorted(keys):
            lines.append(f"{key} = {raw[key]!r}")
        lines.append("")
    if opts is not None:
        lines += ["[dispatch]", f"split = {opts.split!r}", f"p_rated = {opts.p_rated!r}", ""]
    return "\n".join(lines)


def table_i_config(l_mag: float = DEFAULT_L_MAG, delta=(0.0, 0.4560, 0.0063, 0.4380)) -> QabConfig:
    """The reference prototype: 200/180/220/250 V, 238/38 uH, 0.4/0.2 ohm, 25 kHz."""
    big, small = 238e-6, 38e-6
    r_big, r_small = 0.4, 0.2
    return QabConfig(
        v_dc=(200.0, 180.0, 220.0, 250.0),
        delta=delta,
        # bridge-side windings are 11, 22, 31, 42
        l_leak=((big, small), (small, big), (big, small), (small, big)),
        r_wind=((r_big, r_small), (r_small, r_big), (r_big, r_small), (r_small, r_big)),
        turns=(2.0, 2.0, 2.0, 2.0),
        f_sw=25e3,
        l_mag=(l_mag,) * 4,
    )


def experiment_config(l_mag: float = DEFAULT_L_MAG) -> QabConfig:
    """Low-power test point: 30.86/26.07/30.72/27.3 V at delta = 0/0.0314/0.0053/0.030."""
    return table_i_config(l_mag).with_voltages((30.86, 26.07, 30.72, 27.3)).with_delta(
        (0.0, 0.0314, 0.0053, 0.030)
    )
