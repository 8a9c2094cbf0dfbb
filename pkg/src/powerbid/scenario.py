"""Scenario files: strict TOML schema, validation, and default resolution.

A scenario describes one allocation problem: the downlink budget, the
terminal roster, convergence knobs, and (optionally) a distance-based
channel model.  Example covering every field:

    p_total_w = 150.0
    qos_target = 0.95            # utility level deemed "served" (optional)
    output_dir = "out"           # default CLI output directory (optional)

    [convergence]                # any subset of knobs; see ConvergenceConfig
    delta = 1e-5
    w_init = 2.5

    [channel]                    # only needed when terminals use distance_m
    frequency_hz = 2.0e9
    path_loss_exponent = 3.5
    cell_radius_m = 500.0        # equal annuli; or explicit zones:
    # zones = [[15, 0.0, 33.0], [14, 33.0, 66.0]]   # [cqi, d_lo_m, d_hi_m)

    [[ue]]
    id = 1
    cqi = 1                      # exactly one of: cqi | a & b | distance_m
    power_limit_w = 23.240       # optional (see resolution rules below)
    qos_power_w = 23.240         # optional

Resolution rules for the two per-terminal thresholds:

* ``qos_power_w`` (reached-QoS flag threshold): explicit value, else the
  CQI catalog's configured QoS power, else -- for terminals given directly
  by (a, b) -- the analytic power at which the utility hits ``qos_target``.
* ``power_limit_w`` (exit cap in power-limited mode): explicit value, else
  the terminal's explicit ``qos_power_w``, else the catalog QoS power.
  Terminals specified by (a, b) with neither field set have no cap, which
  is an input error for the power-limited mode.

Validation is strict: unknown keys are rejected, and all problems are
collected into one :class:`ScenarioError` so a file's issues surface in a
single pass.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

try:  # stdlib from 3.11; identical API from the backport on 3.10
    import tomllib  # type: ignore[import-not-found]
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib  # type: ignore[no-redef]

from importlib.resources import files as _resource_files

from .bidding import ConvergenceConfig, UeSetup
from .channel import CqiZone, CqiZoneMap, PathLossModel
from .cqi import catalog_entry, utility_for_cqi
from .sigmoid import SigmoidUtility

__all__ = [
    "ScenarioError",
    "UeSpec",
    "ChannelConfig",
    "Scenario",
    "load_scenario",
    "validate_for_mode",
    "with_overrides",
    "bundled_scenario_names",
]

MODES = ("baseline", "power-limit", "both")


class ScenarioError(ValueError):
    """Invalid scenario input; ``errors`` lists every problem found."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class UeSpec:
    """One terminal as written in the file (pre-resolution)."""

    id: int
    cqi: Optional[int] = None
    a: Optional[float] = None
    b: Optional[float] = None
    distance_m: Optional[float] = None
    power_limit_w: Optional[float] = None
    qos_power_w: Optional[float] = None


@dataclass(frozen=True)
class ChannelConfig:
    model: PathLossModel = field(default_factory=PathLossModel)
    zone_map: Optional[CqiZoneMap] = None


@dataclass(frozen=True)
class Scenario:
    p_total_w: float
    ues: tuple[UeSpec, ...]
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
    qos_target: float = 0.95
    channel: Optional[ChannelConfig] = None
    output_dir: Optional[str] = None

    def _cqi_for(self, spec: UeSpec) -> Optional[int]:
        if spec.cqi is not None:
            return spec.cqi
        if spec.distance_m is not None:
            if self.channel is None or self.channel.zone_map is None:
                raise ScenarioError(
                    [f"ue id={spec.id}: distance_m given but scenario has no channel zone map"]
                )
            cqi = self.channel.zone_map.cqi_of_distance(spec.distance_m)
            if cqi is None:
                raise ScenarioError(
                    [f"ue id={spec.id}: distance {spec.distance_m} m is outside every zone"]
                )
            return cqi
        return None

    def resolve(self) -> list[UeSetup]:
        """Materialize the roster: utilities and thresholds per terminal,
        ascending id."""
        out = []
        for spec in sorted(self.ues, key=lambda s: s.id):
            cqi = self._cqi_for(spec)
            if cqi is not None:
                utility = utility_for_cqi(cqi)
                catalog_qos: Optional[float] = catalog_entry(cqi).qos_power_w
            else:
                utility = SigmoidUtility(a=spec.a, b=spec.b)
                catalog_qos = None
            qos_power = spec.qos_power_w
            if qos_power is None:
                qos_power = catalog_qos if catalog_qos is not None else utility.inverse(self.qos_target)
            power_limit = spec.power_limit_w
            if power_limit is None:
                power_limit = spec.qos_power_w if spec.qos_power_w is not None else catalog_qos
            out.append(
                UeSetup(
                    id=spec.id,
                    utility=utility,
                    qos_power_w=qos_power,
                    power_limit_w=power_limit,
                    cqi=cqi,
                )
            )
        return out


# --------------------------------------------------------------------------
# TOML loading / validation
# --------------------------------------------------------------------------

def _num(v: Any) -> Optional[float]:
    """Coerce a TOML number to float; None when it is not a number."""
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        return None
    return float(v)


def _check_keys(table: dict, allowed: set[str], ctx: str, errors: list[str]) -> None:
    for key in table:
        if key not in allowed:
            errors.append(f"{ctx}: unknown key '{key}' (allowed: {', '.join(sorted(allowed))})")


def _positive(table: dict, key: str, ctx: str, errors: list[str], *, allow_inf: bool = False) -> Optional[float]:
    if key not in table:
        return None
    v = _num(table[key])
    ok = v is not None and v > 0.0 and (allow_inf or math.isfinite(v))
    if not ok:
        errors.append(f"{ctx}.{key}: must be a positive{'' if allow_inf else ' finite'} number, got {table[key]!r}")
        return None
    return v


def _parse_convergence(table: dict, errors: list[str]) -> ConvergenceConfig:
    ctx = "convergence"
    allowed = {"delta", "l1", "l2", "w_init", "max_iterations", "root_tolerance"}
    _check_keys(table, allowed, ctx, errors)
    kwargs: dict[str, Any] = {}
    for key in ("delta", "l1", "l2", "w_init", "root_tolerance"):
        v = _positive(table, key, ctx, errors)
        if v is not None:
            kwargs[key] = v
    if "max_iterations" in table:
        v = table["max_iterations"]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            errors.append(f"{ctx}.max_iterations: must be a positive integer, got {v!r}")
        else:
            kwargs["max_iterations"] = v
    try:
        return ConvergenceConfig(**kwargs)
    except ValueError as exc:  # pragma: no cover - guarded by checks above
        errors.append(f"{ctx}: {exc}")
        return ConvergenceConfig()


def _parse_channel(table: dict, errors: list[str]) -> Optional[ChannelConfig]:
    ctx = "channel"
    allowed = {"frequency_hz", "path_loss_exponent", "cell_radius_m", "zones"}
    _check_keys(table, allowed, ctx, errors)
    model_kwargs: dict[str, float] = {}
    for key in ("frequency_hz", "path_loss_exponent"):
        v = _positive(table, key, ctx, errors)
        if v is not None:
            model_kwargs[key] = v
    try:
        model = PathLossModel(**model_kwargs)
    except ValueError as exc:
        errors.append(f"{ctx}: {exc}")
        model = PathLossModel()

    has_radius = "cell_radius_m" in table
    has_zones = "zones" in table
    if has_radius and has_zones:
        errors.append(f"{ctx}: give either cell_radius_m or zones, not both")
        return ChannelConfig(model=model)

    zone_map: Optional[CqiZoneMap] = None
    if has_radius:
        radius = _positive(table, "cell_radius_m", ctx, errors)
        if radius is not None:
            zone_map = CqiZoneMap.equal_annuli(radius)
    elif has_zones:
        raw = table["zones"]
        zones = []
        bad = False
        if not isinstance(raw, list) or not raw:
            errors.append(f"{ctx}.zones: must be a non-empty array of [cqi, d_lo_m, d_hi_m]")
            bad = True
        else:
            for k, item in enumerate(raw):
                if (
                    not isinstance(item, list)
                    or len(item) != 3
                    or isinstance(item[0], bool)
                    or not isinstance(item[0], int)
                    or _num(item[1]) is None
                    or _num(item[2]) is None
                ):
                    errors.append(f"{ctx}.zones[{k}]: expected [cqi, d_lo_m, d_hi_m], got {item!r}")
                    bad = True
        if not bad:
            try:
                zone_map = CqiZoneMap(
                    zones=tuple(CqiZone(cqi=z[0], d_lo_m=float(z[1]), d_hi_m=float(z[2])) for z in raw)
                )
            except ValueError as exc:
                errors.append(f"{ctx}.zones: {exc}")
    return ChannelConfig(model=model, zone_map=zone_map)


def _parse_ue(table: dict, index: int, errors: list[str]) -> Optional[UeSpec]:
    ctx = f"ue[{index}]"
    allowed = {"id", "cqi", "a", "b", "distance_m", "power_limit_w", "qos_power_w"}
    if not isinstance(table, dict):
        errors.append(f"{ctx}: must be a table")
        return None
    _check_keys(table, allowed, ctx, errors)

    raw_id = table.get("id")
    if isinstance(raw_id, bool) or not isinstance(raw_id, int):
        errors.append(f"{ctx}: integer 'id' is required, got {raw_id!r}")
        return None
    ctx = f"ue[{index}] (id={raw_id})"

    sources = [k for k in ("cqi", "distance_m") if k in table]
    if "a" in table or "b" in table:
        sources.append("a/b")
        if ("a" in table) != ("b" in table):
            errors.append(f"{ctx}: a and b must be given together")
    if len(sources) != 1:
        errors.append(
            f"{ctx}: exactly one of cqi, (a, b), distance_m must be given "
            f"(got {sources or 'none'})"
        )

    cqi = None
    if "cqi" in table:
        v = table["cqi"]
        if isinstance(v, bool) or not isinstance(v, int) or not 1 <= v <= 15:
            errors.append(f"{ctx}: cqi must be an integer in 1..15, got {v!r}")
        else:
            cqi = v
    a = _positive(table, "a", ctx, errors)
    b = _positive(table, "b", ctx, errors)
    distance = _positive(table, "distance_m", ctx, errors)
    limit = _positive(table, "power_limit_w", ctx, errors, allow_inf=True)
    qos = _positive(table, "qos_power_w", ctx, errors)
    return UeSpec(
        id=raw_id, cqi=cqi, a=a, b=b, distance_m=distance,
        power_limit_w=limit, qos_power_w=qos,
    )


def _parse_scenario(data: dict, errors: list[str]) -> Scenario:
    allowed = {"p_total_w", "qos_target", "output_dir", "convergence", "channel", "ue"}
    _check_keys(data, allowed, "scenario", errors)

    p_total = _positive(data, "p_total_w", "scenario", errors)
    if p_total is None and "p_total_w" not in data:
        errors.append("scenario.p_total_w: required")

    qos_target = 0.95
    if "qos_target" in data:
        v = _num(data["qos_target"])
        if v is None or not 0.0 < v < 1.0:
            errors.append(f"scenario.qos_target: must be a number in (0, 1), got {data['qos_target']!r}")
        else:
            qos_target = v

    output_dir = None
    if "output_dir" in data:
        if not isinstance(data["output_dir"], str) or not data["output_dir"]:
            errors.append(f"scenario.output_dir: must be a non-empty string, got {data['output_dir']!r}")
        else:
            output_dir = data["output_dir"]

    convergence = _parse_convergence(data.get("convergence", {}), errors) \
        if isinstance(data.get("convergence", {}), dict) else ConvergenceConfig()
    if not isinstance(data.get("convergence", {}), dict):
        errors.append("convergence: must be a table")

    channel = None
    if "channel" in data:
        if not isinstance(data["channel"], dict):
            errors.append("channel: must be a table")
        else:
            channel = _parse_channel(data["channel"], errors)

    ues: list[UeSpec] = []
    raw_ues = data.get("ue")
    if not isinstance(raw_ues, list) or not raw_ues:
        errors.append("scenario: at least one [[ue]] entry is required")
    else:
        seen: set[int] = set()
        for k, entry in enumerate(raw_ues):
            spec = _parse_ue(entry, k, errors)
            if spec is None:
                continue
            if spec.id in seen:
                errors.append(f"ue[{k}]: duplicate id {spec.id}")
                continue
            seen.add(spec.id)
            if spec.distance_m is not None and (channel is None or channel.zone_map is None):
                errors.append(
                    f"ue[{k}] (id={spec.id}): distance_m needs a [channel] table "
                    "with zones or cell_radius_m"
                )
            ues.append(spec)

    scenario = Scenario(
        p_total_w=p_total if p_total is not None else 1.0,
        ues=tuple(ues),
        convergence=convergence,
        qos_target=qos_target,
        channel=channel,
        output_dir=output_dir,
    )

    if not errors:
        # Distances must land inside a zone; resolution also exercises the
        # catalog/utility constructors so bad (a, b) combos surface here.
        try:
            scenario.resolve()
        except ScenarioError as exc:
            errors.extend(exc.errors)
        except ValueError as exc:
            errors.append(str(exc))
    return scenario


def bundled_scenario_names() -> list[str]:
    """Names of the scenario files shipped inside the package."""
    root = _resource_files("powerbid").joinpath("scenarios")
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".toml"))


def _bundled_bytes(name: str) -> Optional[bytes]:
    candidates = [name] if name.endswith(".toml") else [name + ".toml"]
    root = _resource_files("powerbid").joinpath("scenarios")
    for cand in candidates:
        node = root.joinpath(cand)
        if node.is_file():
            return node.read_bytes()
    return None


def load_scenario(source: str | Path) -> Scenario:
    """Load and fully validate a scenario.

    ``source`` is a filesystem path; when no such file exists, the name is
    looked up among the bundled scenarios (``table2`` / ``table2.toml``
    style).  Raises :class:`ScenarioError` carrying every problem found.
    """
    path = Path(source)
    if path.is_file():
        data_bytes = path.read_bytes()
        origin = str(source)
    else:
        blob = _bundled_bytes(str(source))
        if blob is None:
            raise ScenarioError(
                [f"{source}: no such file or bundled scenario "
                 f"(bundled: {', '.join(bundled_scenario_names())})"]
            )
        data_bytes = blob
        origin = f"{source} (bundled)"

    try:
        data = tomllib.loads(data_bytes.decode("utf-8"))
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ScenarioError([f"{origin}: not valid TOML: {exc}"]) from None

    errors: list[str] = []
    scenario = _parse_scenario(data, errors)
    if errors:
        raise ScenarioError([f"{origin}: {e}" for e in errors])
    return scenario


def validate_for_mode(scenario: Scenario, mode: str) -> list[str]:
    """Mode-specific input checks; empty list means the scenario can run.

    The structural/schema checks happen in :func:`load_scenario`; this adds
    the one requirement that depends on how the scenario will be used: the
    power-limited auction needs every terminal to resolve a power cap.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    errors = []
    if mode in ("power-limit", "both"):
        for setup in scenario.resolve():
            if setup.power_limit_w is None:
                errors.append(
                    f"ue id={setup.id}: power limit required for power-limit mode "
                    "(set power_limit_w or qos_power_w, or identify the ue by cqi)"
                )
    return errors


def with_overrides(
    scenario: Scenario,
    *,
    delta: Optional[float] = None,
    l1: Optional[float] = None,
    l2: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> Scenario:
    """Scenario with selected convergence knobs replaced (used by the CLI)."""
    updates = {
        k: v
        for k, v in {
            "delta": delta, "l1": l1, "l2": l2, "max_iterations": max_iterations,
        }.items()
        if v is not None
    }
    if not updates:
        return scenario
    return dataclasses.replace(
        scenario, convergence=dataclasses.replace(scenario.convergence, **updates)
    )
