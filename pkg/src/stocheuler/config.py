"""Run configuration: key=value files, command-line flags and their merge.

Precedence, lowest first: built-in defaults, the named problem's defaults,
the config file, then command-line flags.
"""

from __future__ import annotations

import argparse
import hashlib
import os
from dataclasses import dataclass, field, fields, replace

from .experiments import CONTACT_LITERAL_RIGHT, PROBLEM_NAMES, ProblemSpec, problem
from .fluxes import EC_ENERGY_FORMS, LLF_DISSIPATION, VOLUME_FLUXES
from .mesh import BOUNDARY_CONDITIONS
from .semidisc import SchemeOptions
from .stochastic import MonitorFloors, n_steps_for

MODES = ("run", "convergence", "table")
OUTPUT_DIR_ENV = "STOCHEULER_OUTPUT_DIR"
SURFACE_FLUX_CHOICES = ("llf", "ec")
CONTACT_DATA = ("pure", "literal")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


def _int_list(text):
    values = tuple(int(v) for v in str(text).replace(" ", "").split(",") if v)
    if not values:
        raise ValueError("empty list")
    return values


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    """Effective configuration of one CLI invocation.

    Problem-dependent entries left as ``None`` are filled from the problem
    defaults by :func:`parse_config`.  ``output_dir`` is where files go, not
    what they contain, so it takes no part in equality or the hash.
    """

    mode: str = "run"
    problem: str | None = None
    elements: int | None = None
    resolutions: tuple | None = None
    reference: int | None = None
    degree: int | None = None
    gamma: float = 1.4
    mu: float | None = None
    t_final: float | None = None
    dt: float | None = None
    samples: int = 1
    sample: int = 0
    base_seed: int = 0
    volume_flux: str = "ec"
    surface_flux: str = "llf"
    llf_dissipation: str = "state"
    ec_energy_form: str = "standard"
    bc: str | None = None
    snapshot_stride: int = 0
    rho_min: float = 1e-8
    energy_max: float = 1e8
    normalize: bool = True
    perturbation_seed: int = 0
    contact_datum: str = "pure"
    per_sample: str | None = None
    output_dir: str = field(default="output", compare=False)

    def problem_spec(self) -> ProblemSpec:
        spec = problem(self.problem)
        params = {}
        if self.problem == "kelvin_helmholtz":
            params["perturbation_seed"] = self.perturbation_seed
        if self.problem == "contact" and self.contact_datum == "literal":
            params["right"] = CONTACT_LITERAL_RIGHT
        return spec.with_overrides(
            elements=self.elements, resolutions=self.resolutions, reference=self.reference,
            degree=self.degree, gamma=self.gamma, mu=self.mu, t_final=self.t_final, dt=self.dt,
            base_seed=self.base_seed, bc=self.bc,
            params=params,
        )

    def scheme(self) -> SchemeOptions:
        return SchemeOptions(self.volume_flux, self.surface_flux, self.llf_dissipation,
                             self.ec_energy_form)

    def floors(self) -> MonitorFloors:
        return MonitorFloors(self.rho_min, self.energy_max)

    def items(self, include_output: bool = False):
        for f in fields(self):
            if f.name == "output_dir" and not include_output:
                continue
            yield f.name.replace("_", "-"), getattr(self, f.name)

    def to_text(self, include_output: bool = False) -> str:
        """``key=value`` lines that :func:`parse_config` reads back to an equal config."""
        lines = []
        for key, value in self.items(include_output):
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


# key -> converter from text
_CONVERTERS = {
    "mode": str, "problem": str, "elements": int, "resolutions": _int_list, "reference": int,
    "degree": int, "gamma": float, "mu": float, "t_final": float, "dt": float, "samples": int,
    "sample": int, "base_seed": int, "volume_flux": str, "surface_flux": str,
    "llf_dissipation": str, "ec_energy_form": str, "bc": str, "snapshot_stride": int,
    "rho_min": float, "energy_max": float, "normalize": _bool, "perturbation_seed": int,
    "contact_datum": str, "per_sample": str, "output_dir": str,
}

_CHOICES = {
    "mode": MODES, "problem": PROBLEM_NAMES, "volume_flux": tuple(VOLUME_FLUXES),
    "surface_flux": SURFACE_FLUX_CHOICES, "llf_dissipation": tuple(LLF_DISSIPATION),
    "ec_energy_form": tuple(EC_ENERGY_FORMS), "bc": BOUNDARY_CONDITIONS, "contact_datum": CONTACT_DATA,
}


def _convert(key, text):
    try:
        return _CONVERTERS[key](text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key.replace("_", "-"), f"cannot parse {text!r} ({exc})") from None


def read_config_file(path) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}", f"expected key=value, got {line!r}")
            key, text = (s.strip() for s in line.split("=", 1))
            name = key.replace("-", "_")
            if name not in _CONVERTERS:
                raise ConfigError(key, "unknown key")
            values[name] = _convert(name, text)
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stocheuler",
        description="Stochastic compressible Euler solver (DGSEM / FV with Euler-Maruyama).",
    )
    sub = parser.add_subparsers(dest="mode")
    for mode, help_text in (("run", "evolve one sample and write snapshots"),
                            ("convergence", "Monte Carlo convergence study"),
                            ("table", "rebuild an error table from a per-sample CSV")):
        p = sub.add_parser(mode, help=help_text, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="key=value config file (flags take precedence)")
        for name in _CONVERTERS:
            if name == "mode":
                continue
            flag = "--" + name.replace("_", "-")
            kwargs = {"dest": name, "type": str, "metavar": name.upper()}
            if name in _CHOICES:
                kwargs["choices"] = _CHOICES[name]
            p.add_argument(flag, **kwargs)
    return parser


def parse_config(argv=None, config_file=None) -> RunConfig:
    """Build a validated :class:`RunConfig` from flags and an optional file.

    Raises
    ------
    ConfigError
        Unknown key, unparsable value, missing problem or a ``t_final``
        that is not an integer multiple of ``dt``.
    """
    parser = build_parser()
    argv = list(argv or [])
    try:
        ns = vars(parser.parse_args(argv))
    except SystemExit as exc:
        raise ConfigError("argv", f"invalid command line {argv!r}") from exc
    mode = ns.pop("mode", None)
    path = ns.pop("config", None) or config_file
    values = read_config_file(path) if path else {}
    for key, text in ns.items():
        values[key] = _convert(key, text)
    if mode is not None:
        values["mode"] = mode
    values.setdefault("output_dir", os.environ.get(OUTPUT_DIR_ENV, "output"))
    for key, choices in _CHOICES.items():
        if key in values and values[key] not in choices:
            raise ConfigError(key.replace("_", "-"), f"{values[key]!r} not in {list(choices)}")
    cfg = RunConfig(**values)
    return resolve(cfg)


def resolve(cfg: RunConfig) -> RunConfig:
    """Fill problem defaults and check cross-key constraints."""
    if cfg.mode == "table":
        if not cfg.per_sample:
            raise ConfigError("per-sample", "table mode needs --per-sample FILE")
        return cfg
    if cfg.problem is None:
        raise ConfigError("problem", "missing required key")
    try:
        spec = problem(cfg.problem).with_overrides(
            elements=cfg.elements, resolutions=cfg.resolutions, reference=cfg.reference,
            degree=cfg.degree, mu=cfg.mu, dt=cfg.dt, bc=cfg.bc)
    except ValueError as exc:
        raise ConfigError("problem", str(exc)) from None
    t_final = spec.t_final if cfg.t_final is None else cfg.t_final
    try:
        n_steps_for(t_final, spec.dt)
    except ValueError as exc:
        raise ConfigError("t-final", str(exc)) from None
    for key, value in (("gamma", cfg.gamma - 1.0), ("samples", cfg.samples),
                       ("rho-min", cfg.rho_min), ("energy-max", cfg.energy_max)):
        if not value > 0:
            raise ConfigError(key, "must be positive" if key != "gamma" else "must exceed 1")
    if spec.degree < 0 or spec.degree > 20:
        raise ConfigError("degree", f"must be in 0..20, got {spec.degree}")
    if spec.mu < 0:
        raise ConfigError("mu", "must be non-negative")
    if cfg.surface_flux not in SURFACE_FLUX_CHOICES:
        raise ConfigError("surface-flux", f"{cfg.surface_flux!r} not in {list(SURFACE_FLUX_CHOICES)}")
    return replace(cfg, elements=spec.elements, resolutions=tuple(spec.resolutions),
                   reference=spec.reference, degree=spec.degree, mu=spec.mu, t_final=t_final,
                   dt=spec.dt, bc=spec.bc)
