"""Run configuration: a flat sectioned key-value text format.

The format is one level of ``[section]`` headers over ``key = value`` lines
(blank lines and ``#`` comments allowed), diff-friendly and trivially
parseable.  ``RunConfig.to_text`` emits a canonical, byte-reproducible
serialization of the resolved configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .envs import ENV_KINDS
from .trainer import PpoConfig

__all__ = ["RunConfig", "ConfigError", "VARIANTS", "parse_sections"]

VARIANTS = ("vanilla", "shaping", "mixing", "shaping+mixing")


class ConfigError(ValueError):
    pass


def parse_sections(text: str) -> dict[str, dict[str, str]]:
    """Parse sectioned key-value text into {section: {key: raw value}}."""
    sections: dict[str, dict[str, str]] = {}
    current: dict[str, str] | None = None
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"line {ln}: key outside any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {ln}: empty key")
        current[key] = value
    return sections


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _parse_bool(raw: str) -> bool:
    if raw.lower() in ("true", "1", "yes"):
        return True
    if raw.lower() in ("false", "0", "no"):
        return False
    raise ConfigError(f"expected boolean, got {raw!r}")


@dataclass
class RunConfig:
    # [run]
    env_kind: str = "pendulum"
    spec_path: str = ""          # empty -> packaged per-environment default
    out_dir: str = "runs"
    seeds: tuple[int, ...] = (0,)
    variants: tuple[str, ...] = ("vanilla",)
    threshold: float = 0.5
    threshold_window: int = 10
    # [env] free-form numeric overrides for the environment constructor
    env_overrides: dict[str, float] = field(default_factory=dict)
    # [ppo]
    ppo: PpoConfig = field(default_factory=PpoConfig)
    # [demos]
    demo_episodes: int = 30
    demo_controller: str = "expert"
    # [bc]
    bc_epochs: int = 40
    bc_lr: float = 1e-3
    bc_hidden: tuple[int, ...] = (32, 32)
    # [degrade]
    degrade_sigma: float = 0.5
    # [predictor]
    predictor_kind: str = "learned"
    predictor_window: int = 4
    predictor_hidden: int = 32
    predictor_epochs: int = 20
    predictor_lr: float = 1e-3
    predictor_stride: int = 1
    # [policy]
    policy_hidden: tuple[int, ...] = (32, 32)
    value_hidden: tuple[int, ...] = (64, 64)
    alpha0: float = 0.1

    def __post_init__(self):
        if self.env_kind not in ENV_KINDS:
            raise ConfigError(f"unknown env kind {self.env_kind!r}")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if self.demo_controller not in ("expert", "random"):
            raise ConfigError(f"unknown controller {self.demo_controller!r}")
        if self.predictor_kind not in ("learned", "rollout"):
            raise ConfigError(f"unknown predictor kind {self.predictor_kind!r}")
        if self.degrade_sigma < 0.0:
            raise ConfigError("degrade sigma must be >= 0")
        if self.threshold_window < 1:
            raise ConfigError("threshold_window must be >= 1")

    # --- serialization ------------------------------------------------------

    def to_text(self) -> str:
        lines = ["[run]",
                 f"env = {self.env_kind}",
                 f"spec = {self.spec_path}",
                 f"out = {self.out_dir}",
                 f"seeds = {_fmt(self.seeds)}",
                 f"variants = {_fmt(self.variants)}",
                 f"threshold = {_fmt(self.threshold)}",
                 f"threshold_window = {self.threshold_window}",
                 "", "[env]"]
        lines += [f"{k} = {_fmt(v)}" for k, v in sorted(self.env_overrides.items())]
        lines += ["", "[ppo]"]
        lines += [f"{f.name} = {_fmt(getattr(self.ppo, f.name))}"
                  for f in fields(PpoConfig)]
        lines += ["", "[demos]",
                  f"episodes = {self.demo_episodes}",
                  f"controller = {self.demo_controller}",
                  "", "[bc]",
                  f"epochs = {self.bc_epochs}",
                  f"lr = {_fmt(self.bc_lr)}",
                  f"hidden = {_fmt(self.bc_hidden)}",
                  "", "[degrade]",
                  f"sigma = {_fmt(self.degrade_sigma)}",
                  "", "[predictor]",
                  f"kind = {self.predictor_kind}",
                  f"window = {self.predictor_window}",
                  f"hidden = {self.predictor_hidden}",
                  f"epochs = {self.predictor_epochs}",
                  f"lr = {_fmt(self.predictor_lr)}",
                  f"stride = {self.predictor_stride}",
                  "", "[policy]",
                  f"hidden = {_fmt(self.policy_hidden)}",
                  f"value_hidden = {_fmt(self.value_hidden)}",
                  f"alpha0 = {_fmt(self.alpha0)}"]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        sections = parse_sections(text)
        known = {"run", "env", "ppo", "demos", "bc", "degrade", "predictor",
                 "policy"}
        unknown = set(sections) - known
        if unknown:
            raise ConfigError(f"unknown sections: {sorted(unknown)}")
        kw: dict = {}

        def ints(raw):
            return tuple(int(v) for v in raw.split(",") if v.strip())

        run = sections.get("run", {})
        _take(run, kw, "env", "env_kind", str)
        _take(run, kw, "spec", "spec_path", str)
        _take(run, kw, "out", "out_dir", str)
        _take(run, kw, "seeds", "seeds", ints)
        _take(run, kw, "variants", "variants",
              lambda raw: tuple(v.strip() for v in raw.split(",") if v.strip()))
        _take(run, kw, "threshold", "threshold", float)
        _take(run, kw, "threshold_window", "threshold_window", int)
        if run:
            raise ConfigError(f"unknown [run] keys: {sorted(run)}")

        kw["env_overrides"] = {k: float(v)
                               for k, v in sections.get("env", {}).items()}

        ppo_kw: dict = {}
        ppo_raw = sections.get("ppo", {})
        for f in fields(PpoConfig):
            if f.name in ppo_raw:
                raw = ppo_raw.pop(f.name)
                if f.type == "bool" or isinstance(getattr(PpoConfig(), f.name), bool):
                    ppo_kw[f.name] = _parse_bool(raw)
                elif isinstance(getattr(PpoConfig(), f.name), int):
                    ppo_kw[f.name] = int(raw)
                elif isinstance(getattr(PpoConfig(), f.name), float):
                    ppo_kw[f.name] = float(raw)
                else:
                    ppo_kw[f.name] = raw
        if ppo_raw:
            raise ConfigError(f"unknown [ppo] keys: {sorted(ppo_raw)}")
        try:
            kw["ppo"] = PpoConfig(**ppo_kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

        demos = sections.get("demos", {})
        _take(demos, kw, "episodes", "demo_episodes", int)
        _take(demos, kw, "controller", "demo_controller", str)
        if demos:
            raise ConfigError(f"unknown [demos] keys: {sorted(demos)}")

        bc = sections.get("bc", {})
        _take(bc, kw, "epochs", "bc_epochs", int)
        _take(bc, kw, "lr", "bc_lr", float)
        _take(bc, kw, "hidden", "bc_hidden", ints)
        if bc:
            raise ConfigError(f"unknown [bc] keys: {sorted(bc)}")

        degrade = sections.get("degrade", {})
        _take(degrade, kw, "sigma", "degrade_sigma", float)
        if degrade:
            raise ConfigError(f"unknown [degrade] keys: {sorted(degrade)}")

        pred = sections.get("predictor", {})
        _take(pred, kw, "kind", "predictor_kind", str)
        _take(pred, kw, "window", "predictor_window", int)
        _take(pred, kw, "hidden", "predictor_hidden", int)
        _take(pred, kw, "epochs", "predictor_epochs", int)
        _take(pred, kw, "lr", "predictor_lr", float)
        _take(pred, kw, "stride", "predictor_stride", int)
        if pred:
            raise ConfigError(f"unknown [predictor] keys: {sorted(pred)}")

        pol = sections.get("policy", {})
        _take(pol, kw, "hidden", "policy_hidden", ints)
        _take(pol, kw, "value_hidden", "value_hidden", ints)
        _take(pol, kw, "alpha0", "alpha0", float)
        if pol:
            raise ConfigError(f"unknown [policy] keys: {sorted(pol)}")

        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())


def _take(section: dict, kw: dict, key: str, name: str, conv) -> None:
    if key in section:
        raw = section.pop(key)
        try:
            kw[name] = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
