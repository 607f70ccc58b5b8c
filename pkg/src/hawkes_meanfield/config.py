"""Config files for experiment runs.

A run is described by one JSON document.  Example:

    {
      "experiment": "lln",
      "model": {
        "n": [100, 400, 1600],
        "p": 0.8,
        "q": 0.5,
        "kernel": {"exponential": {"rate": 1.0}},
        "transfer": {"arctan": {}},
        "scaling": "mean_field"
      },
      "run": {
        "horizon": 4.0,
        "replicates": 50,
        "seed": 20240823
      },
      "output": {"directory": "runs/lln"},
      "tolerances": {"ratio_band": [2.0, 8.0]}
    }

Validation is strict: unknown keys are rejected with the dotted path of
the offending field, so a typo like "modle" or "lamda" fails loudly
instead of silently running the wrong experiment.  `validate_config`
returns an `ExperimentConfig` whose `resolved()` form fills in every
default; feeding that form back through validation is a fixed point,
which is what makes manifests replayable.
"""

import dataclasses
import json
import math

from .analysis import DEFAULT_TOLERANCES
from .errors import ConfigError
from .kernels import (arctan_transfer, constant_transfer, exponential_kernel,
                      tabulated_kernel, tabulated_transfer)

__all__ = [
    "ExperimentConfig",
    "load_config",
    "validate_config",
    "experiment_kwargs",
]

EXPERIMENTS = ("lln", "clt", "corollary", "critical", "independence")
BACKENDS = ("thinning", "time_change")
SCALINGS = ("mean_field", "critical")

# which sizes shape each experiment expects and which option keys it takes
_LIST_SIZED = {"lln", "corollary", "independence"}
_OPTION_KEYS = {
    "lln": {},
    "clt": {"n_tracked": 2, "limit_samples": 10000},
    "corollary": {},
    "critical": {"complementary": False},
    "independence": {"m_vertices": 2},
    None: {},
}


def _fail(path, msg):
    raise ConfigError(f"{path}: {msg}")


def _mapping(obj, path):
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    return obj


def _only_keys(obj, path, allowed):
    for key in obj:
        if key not in allowed:
            _fail(f"{path}.{key}" if path else key,
                  f"unknown key (allowed: {', '.join(sorted(allowed))})")


def _number(obj, path, lo=None, hi=None):
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        _fail(path, f"expected a number, got {type(obj).__name__}")
    x = float(obj)
    if not math.isfinite(x):
        _fail(path, "must be finite")
    if lo is not None and x < lo:
        _fail(path, f"must be >= {lo}")
    if hi is not None and x > hi:
        _fail(path, f"must be <= {hi}")
    return x


def _integer(obj, path, lo=None):
    if isinstance(obj, bool) or not isinstance(obj, int):
        _fail(path, f"expected an integer, got {type(obj).__name__}")
    if lo is not None and obj < lo:
        _fail(path, f"must be >= {lo}")
    return int(obj)


def _choice(obj, path, allowed):
    if obj not in allowed:
        _fail(path, f"must be one of {', '.join(allowed)} (got {obj!r})")
    return obj


def _float_list(obj, path):
    if not isinstance(obj, list) or not obj:
        _fail(path, "expected a non-empty array of numbers")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(obj)]


def _kernel_spec(obj, path):
    obj = _mapping(obj, path)
    if len(obj) != 1:
        _fail(path, "expected exactly one of: exponential, tabulated")
    kind, params = next(iter(obj.items()))
    if kind == "exponential":
        params = _mapping(params, f"{path}.exponential")
        _only_keys(params, f"{path}.exponential", {"rate"})
        if "rate" not in params:
            _fail(f"{path}.exponential.rate", "required")
        rate = _number(params["rate"], f"{path}.exponential.rate")
        if rate <= 0:
            _fail(f"{path}.exponential.rate", "must be > 0")
        return {"exponential": {"rate": rate}}
    if kind == "tabulated":
        params = _mapping(params, f"{path}.tabulated")
        _only_keys(params, f"{path}.tabulated", {"nodes", "values"})
        for key in ("nodes", "values"):
            if key not in params:
                _fail(f"{path}.tabulated.{key}", "required")
        nodes = _float_list(params["nodes"], f"{path}.tabulated.nodes")
        values = _float_list(params["values"], f"{path}.tabulated.values")
        if len(nodes) != len(values):
            _fail(f"{path}.tabulated", "nodes and values must have equal length")
        return {"tabulated": {"nodes": nodes, "values": values}}
    _fail(f"{path}.{kind}", "unknown kernel kind "
          "(allowed: exponential, tabulated)")


def _transfer_spec(obj, path):
    obj = _mapping(obj, path)
    if len(obj) != 1:
        _fail(path, "expected exactly one of: arctan, constant, tabulated")
    kind, params = next(iter(obj.items()))
    if kind == "arctan":
        params = _mapping(params, f"{path}.arctan")
        _only_keys(params, f"{path}.arctan", set())
        return {"arctan": {}}
    if kind == "constant":
        params = _mapping(params, f"{path}.constant")
        _only_keys(params, f"{path}.constant", {"value"})
        if "value" not in params:
            _fail(f"{path}.constant.value", "required")
        value = _number(params["value"], f"{path}.constant.value", lo=0.0)
        return {"constant": {"value": value}}
    if kind == "tabulated":
        params = _mapping(params, f"{path}.tabulated")
        _only_keys(params, f"{path}.tabulated", {"nodes", "values"})
        for key in ("nodes", "values"):
            if key not in params:
                _fail(f"{path}.tabulated.{key}", "required")
        nodes = _float_list(params["nodes"], f"{path}.tabulated.nodes")
        values = _float_list(params["values"], f"{path}.tabulated.values")
        if len(nodes) != len(values):
            _fail(f"{path}.tabulated", "nodes and values must have equal length")
        return {"tabulated": {"nodes": nodes, "values": values}}
    _fail(f"{path}.{kind}", "unknown transfer kind "
          "(allowed: arctan, constant, tabulated)")


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated run description with every default filled in."""

    experiment: object  # one of EXPERIMENTS, or None for plain runs
    n: object           # int, or list of ints for multi-size experiments
    p: float
    q: float
    kernel_spec: dict
    transfer_spec: dict
    scaling: str
    horizon: float
    dt: object
    replicates: int
    tracked_vertices: tuple
    seed: int
    backend: str
    net_seed: object
    out_dir: object
    options: dict
    tolerances: dict

    def build_kernel(self):
        (kind, params), = self.kernel_spec.items()
        if kind == "exponential":
            return exponential_kernel(params["rate"])
        return tabulated_kernel(params["nodes"], params["values"])

    def build_transfer(self):
        (kind, params), = self.transfer_spec.items()
        if kind == "arctan":
            return arctan_transfer()
        if kind == "constant":
            return constant_transfer(params["value"])
        return tabulated_transfer(params["nodes"], params["values"])

    def resolved(self):
        """Canonical JSON-ready dict; validates back to an equal config."""
        doc = {
            "model": {
                "n": self.n,
                "p": self.p,
                "q": self.q,
                "kernel": self.kernel_spec,
                "transfer": self.transfer_spec,
                "scaling": self.scaling,
            },
            "run": {
                "horizon": self.horizon,
                "dt": self.dt,
                "replicates": self.replicates,
                "tracked_vertices": list(self.tracked_vertices),
                "seed": self.seed,
                "backend": self.backend,
                "net_seed": self.net_seed,
            },
            "options": dict(self.options),
            "tolerances": dict(self.tolerances),
        }
        if self.experiment is not None:
            doc["experiment"] = self.experiment
        if self.out_dir is not None:
            doc["output"] = {"directory": self.out_dir}
        return doc


def load_config(path):
    """Read a config file; a manifest.json is accepted and unwrapped."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if isinstance(raw, dict) and "resolved_config" in raw:
        raw = raw["resolved_config"]
    return raw


def validate_config(raw):
    """Check a parsed config document and fill in defaults.

    Raises ConfigError with the dotted path of the first offending field.
    """
    raw = _mapping(raw, "config")
    _only_keys(raw, "", {"experiment", "model", "run", "output", "options",
                         "tolerances"})

    experiment = raw.get("experiment")
    if experiment is not None:
        experiment = _choice(experiment, "experiment", EXPERIMENTS)

    if "model" not in raw:
        _fail("model", "required")
    model = _mapping(raw["model"], "model")
    _only_keys(model, "model", {"n", "p", "q", "kernel", "transfer", "scaling"})
    for key in ("n", "p", "q", "kernel", "transfer"):
        if key not in model:
            _fail(f"model.{key}", "required")

    if isinstance(model["n"], list):
        sizes = [_integer(v, f"model.n[{i}]", lo=1)
                 for i, v in enumerate(model["n"])]
        if sorted(sizes) != sizes or len(set(sizes)) != len(sizes):
            _fail("model.n", "sizes must be strictly increasing")
        n = sizes
    else:
        n = _integer(model["n"], "model.n", lo=1)
    if experiment in _LIST_SIZED and not isinstance(n, list):
        n = [n]
    if experiment is not None and experiment not in _LIST_SIZED \
            and isinstance(n, list):
        _fail("model.n", f"experiment {experiment!r} takes a single size")

    p = _number(model["p"], "model.p", lo=0.0, hi=1.0)
    q = _number(model["q"], "model.q", lo=0.0, hi=1.0)
    kernel_spec = _kernel_spec(model["kernel"], "model.kernel")
    transfer_spec = _transfer_spec(model["transfer"], "model.transfer")

    default_scaling = "critical" if experiment == "critical" else "mean_field"
    scaling = _choice(model.get("scaling", default_scaling), "model.scaling",
                      SCALINGS)

    # regime consistency: the critical experiment runs at p = 1/2 under
    # root-N scaling, every other experiment needs the mean-field regime
    if experiment == "critical":
        if p != 0.5:
            _fail("model.p", "the critical experiment requires p = 0.5")
        if scaling != "critical":
            _fail("model.scaling", "the critical experiment requires "
                  "scaling = 'critical'")
    elif experiment is not None:
        if p == 0.5:
            _fail("model.p", f"p = 0.5 is the balanced regime; experiment "
                  f"{experiment!r} needs p != 0.5 (or use 'critical')")
        if scaling != "mean_field":
            _fail("model.scaling", f"experiment {experiment!r} requires "
                  "scaling = 'mean_field'")
    elif scaling == "critical" and p != 0.5:
        _fail("model.scaling", "critical scaling requires p = 0.5")

    if "run" not in raw:
        _fail("run", "required")
    run = _mapping(raw["run"], "run")
    _only_keys(run, "run", {"horizon", "dt", "replicates", "tracked_vertices",
                            "seed", "backend", "net_seed"})
    for key in ("horizon", "seed"):
        if key not in run:
            _fail(f"run.{key}", "required")
    horizon = _number(run["horizon"], "run.horizon")
    if horizon <= 0:
        _fail("run.horizon", "must be > 0")
    dt = run.get("dt")
    if dt is not None:
        dt = _number(dt, "run.dt")
        if not 0 < dt <= horizon:
            _fail("run.dt", "must satisfy 0 < dt <= horizon")
    replicates = _integer(run.get("replicates", 1), "run.replicates", lo=1)
    tracked = run.get("tracked_vertices", [])
    if not isinstance(tracked, list):
        _fail("run.tracked_vertices", "expected an array of vertex indices")
    smallest = min(n) if isinstance(n, list) else n
    tracked = tuple(_integer(v, f"run.tracked_vertices[{i}]", lo=0)
                    for i, v in enumerate(tracked))
    if len(set(tracked)) != len(tracked):
        _fail("run.tracked_vertices", "indices must be distinct")
    for i, v in enumerate(tracked):
        if v >= smallest:
            _fail(f"run.tracked_vertices[{i}]",
                  f"vertex {v} out of range for n = {smallest}")
    seed = _integer(run["seed"], "run.seed", lo=0)
    backend = _choice(run.get("backend", "thinning"), "run.backend", BACKENDS)
    net_seed = run.get("net_seed")
    if net_seed is not None:
        net_seed = _integer(net_seed, "run.net_seed", lo=0)

    out_dir = None
    if "output" in raw:
        output = _mapping(raw["output"], "output")
        _only_keys(output, "output", {"directory"})
        if "directory" not in output:
            _fail("output.directory", "required")
        if not isinstance(output["directory"], str):
            _fail("output.directory", "expected a string")
        out_dir = output["directory"]

    allowed_options = _OPTION_KEYS[experiment]
    options = _mapping(raw.get("options", {}), "options")
    if options and not allowed_options:
        which = f"experiment {experiment!r}" if experiment else "a plain run"
        _fail(f"options.{next(iter(options))}",
              f"{which} takes no options")
    _only_keys(options, "options", set(allowed_options))
    merged = dict(allowed_options)
    for key, value in options.items():
        if key == "complementary":
            if not isinstance(value, bool):
                _fail("options.complementary", "expected true or false")
            merged[key] = value
        elif key == "n_tracked":
            merged[key] = _integer(value, "options.n_tracked", lo=2)
        elif key == "limit_samples":
            merged[key] = _integer(value, "options.limit_samples", lo=100)
        elif key == "m_vertices":
            merged[key] = _integer(value, "options.m_vertices", lo=2)

    tolerances = _mapping(raw.get("tolerances", {}), "tolerances")
    _only_keys(tolerances, "tolerances", set(DEFAULT_TOLERANCES))
    full_tol = dict(DEFAULT_TOLERANCES)
    for key, value in tolerances.items():
        if key == "ratio_band":
            band = _float_list(value, "tolerances.ratio_band")
            if len(band) != 2 or band[0] >= band[1]:
                _fail("tolerances.ratio_band", "expected [low, high]")
            full_tol[key] = band
        else:
            full_tol[key] = _number(value, f"tolerances.{key}", lo=0.0)

    return ExperimentConfig(
        experiment=experiment, n=n, p=p, q=q, kernel_spec=kernel_spec,
        transfer_spec=transfer_spec, scaling=scaling, horizon=horizon, dt=dt,
        replicates=replicates, tracked_vertices=tracked, seed=seed,
        backend=backend, net_seed=net_seed, out_dir=out_dir, options=merged,
        tolerances=full_tol,
    )


def experiment_kwargs(cfg):
    """Keyword arguments for run_experiment built from a validated config."""
    if cfg.experiment is None:
        raise ConfigError("experiment: required for verify runs")
    common = dict(kernel=cfg.build_kernel(), transfer=cfg.build_transfer(),
                  horizon=cfg.horizon, replicates=cfg.replicates,
                  seed=cfg.seed, backend=cfg.backend, dt=cfg.dt,
                  tolerances=cfg.tolerances)
    if cfg.experiment == "lln":
        return dict(common, sizes=cfg.n, p=cfg.p, q=cfg.q)
    if cfg.experiment == "clt":
        return dict(common, n=cfg.n, p=cfg.p, q=cfg.q,
                    n_tracked=cfg.options["n_tracked"],
                    limit_samples=cfg.options["limit_samples"])
    if cfg.experiment == "corollary":
        return dict(common, sizes=cfg.n, p=cfg.p, q=cfg.q)
    if cfg.experiment == "critical":
        return dict(common, n=cfg.n, q=cfg.q,
                    complementary=cfg.options["complementary"],
                    net_seed=cfg.net_seed)
    return dict(common, sizes=cfg.n, p=cfg.p, q=cfg.q,
                m_vertices=cfg.options["m_vertices"])
