"""Experiment configuration: TOML files with dotted keys, full defaults.

An empty config file resolves to the default parameter set (the
reference analytical parameters: Zipf exponent 0.716, bandwidths
500kbps/800kbps/6Mbps, costs 10c and 3c per MB, per-class Gamma sizes,
video view-ratio rate 2.77, mixing ratio 80). Catalog sizes default to
values calibrated so that expected unique-content counts reproduce the
reference hit-rate regime.

Distinct error types map to distinct CLI exit codes: parse errors,
unknown keys, and out-of-domain values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .model import CostParams, ModelParams, NetworkParams, ObjectiveWeights
from .sim import PolicyKind, SimParams, SplitPolicy
from .units import UnitError, parse_bandwidth, parse_size
from .workload import ClassConfig, SizeParams, ViewParams, WorkloadConfig, ZipfParams


class ConfigError(Exception):
    """Base class; exit_code distinguishes the failure kind for the CLI."""

    exit_code = 1


class ConfigParseError(ConfigError):
    exit_code = 2


class ConfigKeyError(ConfigError):
    exit_code = 3


class ConfigValueError(ConfigError):
    exit_code = 4


# ---------------------------------------------------------------------------
# Defaults (reference parameter set)

DEFAULT_SEED = 34

ZIPF_S = 0.716
# Catalog sizes are free parameters; these values are calibrated so the
# analytic expected-unique counts match the reference workload regime
# (99,575 unique non-video contents after 120,627 requests; video
# full/partial hit rates near 12%/6% at mixing ratio 1).
CATALOG_NONVIDEO = 2_680_000
CATALOG_VIDEO = 1_300_000
# Model-side single-class catalog, calibrated for the completion-time
# sweep regime (unique fraction near 0.37 at the default request count).
MODEL_CATALOG = 75_000

N_REQUESTS = 122_045  # 120,627 non-video + 1,418 video
R_V = 80.0

GAMMA_NONVIDEO = SizeParams(shape=0.0006, scale_mb=2.102)     # 2102 KB
GAMMA_VIDEO = SizeParams(shape=0.64, scale_mb=194.061)        # 194,061 KB
LAMBDA_VIDEO = 2.77
LAMBDA_NONVIDEO = 1.0

OMEGA_U = 0.0625   # 500 kbps
OMEGA_B = 0.1      # 800 kbps
OMEGA_L = 0.75     # 6 Mbps
PHI_U = 10.0       # cents/MB
PHI_B = 3.0

SWEEP_PARAMETERS = ("x", "s", "r_v", "omega_ratio")

_DEFAULT_SWEEP_GRIDS = {
    "x": tuple(i / 20 for i in range(21)),
    "s": (0.5, 0.716, 1.0, 1.5, 2.0),
    "r_v": (1.0, 50.0, 100.0, 200.0, 400.0),
    "omega_ratio": tuple(
        float(f"{(1 / 80) * (80 ** (i / 40)):.12g}") for i in range(41)
    ),
}


def default_mean_size_mb(r_v: float = R_V) -> float:
    """Request-weighted mean content size at mixing ratio r_v, in MB."""
    video_share = 1.0 / (1.0 + r_v)
    return (video_share * GAMMA_VIDEO.mean_mb
            + (1.0 - video_share) * GAMMA_NONVIDEO.mean_mb)


def default_workload(seed: int = DEFAULT_SEED) -> WorkloadConfig:
    return WorkloadConfig(
        video=ClassConfig(ZipfParams(ZIPF_S, CATALOG_VIDEO), GAMMA_VIDEO,
                          ViewParams(LAMBDA_VIDEO)),
        nonvideo=ClassConfig(ZipfParams(ZIPF_S, CATALOG_NONVIDEO), GAMMA_NONVIDEO,
                             ViewParams(LAMBDA_NONVIDEO)),
        r_v=R_V,
        n_requests=N_REQUESTS,
        seed=seed,
    )


def default_model() -> ModelParams:
    return ModelParams(
        zipf=ZipfParams(ZIPF_S, MODEL_CATALOG),
        mean_size_mb=default_mean_size_mb(),
        lambda_e=1.0,
        n=N_REQUESTS,
        net=NetworkParams(OMEGA_U, OMEGA_B, OMEGA_L),
        cost=CostParams(PHI_U, PHI_B),
        weights=ObjectiveWeights(),
    )


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class SimOptions:
    sample_interval: int = 1000
    hit_time: str = "consumed"


@dataclass(frozen=True)
class OutputOptions:
    directory: str = "out"
    format: str = "csv"
    plots: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    workload: WorkloadConfig
    model: ModelParams
    policy: SplitPolicy
    scenarios: tuple[str, ...]
    sweep: SweepSpec | None
    sim: SimOptions
    output: OutputOptions

    def sim_params(self, stash_enabled: bool = True) -> SimParams:
        return SimParams(self.model.net, self.model.cost,
                         stash_enabled=stash_enabled, hit_time=self.sim.hit_time)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed, workload=replace(self.workload, seed=seed))


def default_config(seed: int = DEFAULT_SEED) -> ExperimentConfig:
    from .sim import SCENARIOS

    return ExperimentConfig(
        seed=seed,
        workload=default_workload(seed),
        model=default_model(),
        policy=SplitPolicy.optimal(),
        scenarios=SCENARIOS,
        sweep=None,
        sim=SimOptions(),
        output=OutputOptions(),
    )


# ---------------------------------------------------------------------------
# Loading

_SCHEMA = {
    "seed": None,
    "scenarios": None,
    "workload": {
        "n_requests": None, "r_v": None,
        "video": {"zipf_s": None, "catalog_size": None, "gamma_shape": None,
                  "gamma_scale": None, "lambda_e": None},
        "nonvideo": {"zipf_s": None, "catalog_size": None, "gamma_shape": None,
                     "gamma_scale": None, "lambda_e": None},
    },
    "model": {"zipf_s": None, "catalog_size": None, "n_requests": None,
              "mean_size": None, "lambda_e": None},
    "network": {"omega_u": None, "omega_b": None, "omega_l": None},
    "cost": {"phi_u": None, "phi_b": None},
    "objective": {"gamma_t": None, "gamma_b": None, "gamma_u": None},
    "policy": {"kind": None, "x": None, "x_min": None, "x_max": None},
    "sim": {"sample_interval": None, "hit_time": None},
    "sweep": {"parameter": None, "values": None},
    "output": {"directory": None, "format": None, "plots": None},
}


def _check_keys(data: dict, schema: dict, prefix: str = "") -> None:
    for key, value in data.items():
        path = f"{prefix}{key}"
        if key not in schema:
            raise ConfigKeyError(f"unknown config key: {path}")
        sub = schema[key]
        if isinstance(sub, dict):
            if not isinstance(value, dict):
                raise ConfigValueError(f"{path}: expected a table")
            _check_keys(value, sub, f"{path}.")


def _number(data: dict, key: str, default, path: str, *, low=None, high=None,
            integer=False, low_open=False):
    value = data.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValueError(f"{path}.{key}: expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigValueError(f"{path}.{key}: expected an integer, got {value!r}")
    if low is not None and (value <= low if low_open else value < low):
        op = ">" if low_open else ">="
        raise ConfigValueError(f"{path}.{key}: must be {op} {low}, got {value}")
    if high is not None and value > high:
        raise ConfigValueError(f"{path}.{key}: must be <= {high}, got {value}")
    return int(value) if integer else float(value)


def _quantity(data: dict, key: str, default, path: str, parser):
    raw = data.get(key, default)
    try:
        value = parser(raw)
    except UnitError as exc:
        raise ConfigValueError(f"{path}.{key}: {exc}") from exc
    if value <= 0:
        raise ConfigValueError(f"{path}.{key}: must be positive, got {raw!r}")
    return value


def _class_config(data: dict, defaults: ClassConfig, path: str) -> ClassConfig:
    try:
        zipf = ZipfParams(
            s=_number(data, "zipf_s", defaults.zipf.s, path, low=0.0),
            m=_number(data, "catalog_size", defaults.zipf.m, path, low=1, integer=True),
        )
        size = SizeParams(
            shape=_number(data, "gamma_shape", defaults.size.shape, path, low=0.0, low_open=True),
            scale_mb=_quantity(data, "gamma_scale", defaults.size.scale_mb, path, parse_size),
        )
        view = ViewParams(
            lambda_e=_number(data, "lambda_e", defaults.view.lambda_e, path, low=0.0, low_open=True)
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigValueError(f"{path}: {exc}") from exc
    return ClassConfig(zipf, size, view)


def _policy(data: dict, path: str = "policy") -> SplitPolicy:
    kind_name = data.get("kind", "optimal")
    try:
        kind = PolicyKind(kind_name)
    except ValueError:
        names = ", ".join(k.value for k in PolicyKind)
        raise ConfigValueError(f"{path}.kind: {kind_name!r} is not one of {names}")
    x = _number(data, "x", None, path, low=0.0, high=1.0)
    x_min = _number(data, "x_min", None, path, low=0.0, high=1.0)
    x_max = _number(data, "x_max", None, path, low=0.0, high=1.0)
    if kind is PolicyKind.FIXED and x is None:
        raise ConfigValueError(f"{path}.x: required for the fixed policy")
    try:
        return SplitPolicy(kind, x=x, x_min=x_min, x_max=x_max)
    except ValueError as exc:
        raise ConfigValueError(f"{path}: {exc}") from exc


def _sweep(data: dict) -> SweepSpec:
    parameter = data.get("parameter")
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigValueError(
            f"sweep.parameter: {parameter!r} is not one of {', '.join(SWEEP_PARAMETERS)}")
    raw_values = data.get("values")
    if raw_values is None:
        values = _DEFAULT_SWEEP_GRIDS[parameter]
    else:
        if not isinstance(raw_values, list) or not raw_values:
            raise ConfigValueError("sweep.values: expected a non-empty list of numbers")
        values = []
        for v in raw_values:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigValueError(f"sweep.values: expected numbers, got {v!r}")
            values.append(float(v))
        values = tuple(values)
    lo, hi = {"x": (0.0, 1.0), "s": (0.0, math.inf),
              "r_v": (0.0, math.inf), "omega_ratio": (0.0, 1.0)}[parameter]
    for v in values:
        if not (lo <= v <= hi) or (parameter in ("r_v", "omega_ratio") and v == 0.0):
            raise ConfigValueError(f"sweep.values: {v} outside the domain of {parameter}")
    return SweepSpec(parameter, tuple(values))


def build_config(data: dict) -> ExperimentConfig:
    """Resolve a parsed config mapping against the defaults."""
    from .sim import SCENARIOS

    _check_keys(data, _SCHEMA)
    seed = _number(data, "seed", DEFAULT_SEED, "", low=0, integer=True)

    wl = data.get("workload", {})
    wl_defaults = default_workload(seed)
    try:
        workload = WorkloadConfig(
            video=_class_config(wl.get("video", {}), wl_defaults.video, "workload.video"),
            nonvideo=_class_config(wl.get("nonvideo", {}), wl_defaults.nonvideo,
                                   "workload.nonvideo"),
            r_v=_number(wl, "r_v", wl_defaults.r_v, "workload", low=0.0, low_open=True),
            n_requests=_number(wl, "n_requests", wl_defaults.n_requests, "workload",
                               low=1, integer=True),
            seed=seed,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigValueError(f"workload: {exc}") from exc

    net_data = data.get("network", {})
    network = NetworkParams(
        omega_u=_quantity(net_data, "omega_u", OMEGA_U, "network", parse_bandwidth),
        omega_b=_quantity(net_data, "omega_b", OMEGA_B, "network", parse_bandwidth),
        omega_l=_quantity(net_data, "omega_l", OMEGA_L, "network", parse_bandwidth),
    )
    cost_data = data.get("cost", {})
    cost = CostParams(
        phi_u=_number(cost_data, "phi_u", PHI_U, "cost", low=0.0),
        phi_b=_number(cost_data, "phi_b", PHI_B, "cost", low=0.0),
    )
    obj = data.get("objective", {})
    weights = ObjectiveWeights(
        gamma_t=_number(obj, "gamma_t", 1.0, "objective", low=0.0),
        gamma_b=_number(obj, "gamma_b", 1.0, "objective", low=0.0),
        gamma_u=_number(obj, "gamma_u", 1.0, "objective", low=0.0),
    )
    md = data.get("model", {})
    model_defaults = default_model()
    try:
        model = ModelParams(
            zipf=ZipfParams(
                s=_number(md, "zipf_s", model_defaults.zipf.s, "model", low=0.0),
                m=_number(md, "catalog_size", model_defaults.zipf.m, "model",
                          low=1, integer=True),
            ),
            mean_size_mb=_quantity(md, "mean_size", model_defaults.mean_size_mb,
                                   "model", parse_size),
            lambda_e=_number(md, "lambda_e", model_defaults.lambda_e, "model",
                             low=0.0, low_open=True),
            n=_number(md, "n_requests", model_defaults.n, "model", low=1, integer=True),
            net=network,
            cost=cost,
            weights=weights,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigValueError(f"model: {exc}") from exc

    scenarios = data.get("scenarios", list(SCENARIOS))
    if not isinstance(scenarios, list) or not scenarios:
        raise ConfigValueError("scenarios: expected a non-empty list")
    for s in scenarios:
        if s not in SCENARIOS:
            raise ConfigValueError(f"scenarios: {s!r} is not one of {', '.join(SCENARIOS)}")

    sim_data = data.get("sim", {})
    hit_time = sim_data.get("hit_time", "consumed")
    if hit_time not in ("consumed", "full_size"):
        raise ConfigValueError(f"sim.hit_time: {hit_time!r} is not 'consumed' or 'full_size'")
    sim = SimOptions(
        sample_interval=_number(sim_data, "sample_interval", 1000, "sim", low=1, integer=True),
        hit_time=hit_time,
    )

    out_data = data.get("output", {})
    fmt = out_data.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigValueError(f"output.format: {fmt!r} is not 'csv' or 'json'")
    plots = out_data.get("plots", True)
    if not isinstance(plots, bool):
        raise ConfigValueError(f"output.plots: expected a boolean, got {plots!r}")
    output = OutputOptions(
        directory=str(out_data.get("directory", "out")),
        format=fmt,
        plots=plots,
    )

    sweep = _sweep(data["sweep"]) if "sweep" in data else None

    return ExperimentConfig(seed=seed, workload=workload, model=model,
                            policy=_policy(data.get("policy", {})),
                            scenarios=tuple(scenarios), sweep=sweep,
                            sim=sim, output=output)


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML config file; missing keys take defaults."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    return build_config(data)


# ---------------------------------------------------------------------------
# Echo (round-trippable TOML of the fully resolved config)

def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot emit {value!r}")


def config_to_toml(cfg: ExperimentConfig) -> str:
    """Emit the resolved config; loading the result reproduces the run."""
    w, m = cfg.workload, cfg.model
    lines = [
        f"seed = {cfg.seed}",
        f"scenarios = {_toml_value(list(cfg.scenarios))}",
        "",
        "[workload]",
        f"n_requests = {w.n_requests}",
        f"r_v = {_toml_value(w.r_v)}",
    ]
    for name, cc in (("video", w.video), ("nonvideo", w.nonvideo)):
        lines += [
            "",
            f"[workload.{name}]",
            f"zipf_s = {_toml_value(cc.zipf.s)}",
            f"catalog_size = {cc.zipf.m}",
            f"gamma_shape = {_toml_value(cc.size.shape)}",
            f"gamma_scale = {_toml_value(cc.size.scale_mb)}",
            f"lambda_e = {_toml_value(cc.view.lambda_e)}",
        ]
    lines += [
        "",
        "[model]",
        f"zipf_s = {_toml_value(m.zipf.s)}",
        f"catalog_size = {m.zipf.m}",
        f"n_requests = {m.n}",
        f"mean_size = {_toml_value(m.mean_size_mb)}",
        f"lambda_e = {_toml_value(m.lambda_e)}",
        "",
        "[network]",
        f"omega_u = {_toml_value(m.net.omega_u)}",
        f"omega_b = {_toml_value(m.net.omega_b)}",
        f"omega_l = {_toml_value(m.net.omega_l)}",
        "",
        "[cost]",
        f"phi_u = {_toml_value(m.cost.phi_u)}",
        f"phi_b = {_toml_value(m.cost.phi_b)}",
        "",
        "[objective]",
        f"gamma_t = {_toml_value(m.weights.gamma_t)}",
        f"gamma_b = {_toml_value(m.weights.gamma_b)}",
        f"gamma_u = {_toml_value(m.weights.gamma_u)}",
        "",
        "[policy]",
        f"kind = {_toml_value(cfg.policy.kind.value)}",
    ]
    for key in ("x", "x_min", "x_max"):
        value = getattr(cfg.policy, key)
        if value is not None:
            lines.append(f"{key} = {_toml_value(value)}")
    lines += [
        "",
        "[sim]",
        f"sample_interval = {cfg.sim.sample_interval}",
        f"hit_time = {_toml_value(cfg.sim.hit_time)}",
    ]
    if cfg.sweep is not None:
        lines += [
            "",
            "[sweep]",
            f"parameter = {_toml_value(cfg.sweep.parameter)}",
            f"values = {_toml_value(list(cfg.sweep.values))}",
        ]
    lines += [
        "",
        "[output]",
        f"directory = {_toml_value(cfg.output.directory)}",
        f"format = {_toml_value(cfg.output.format)}",
        f"plots = {_toml_value(cfg.output.plots)}",
        "",
    ]
    return "\n".join(lines)
