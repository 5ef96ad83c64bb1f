"""Experiment spec files: flat key = value sections, validation-first.

A spec file is INI-style (configparser), diff-friendly, and fully resolved
before anything runs: defaults are filled in, every parameter is checked
against the target operation's preconditions, and the resolved mapping is
echoed into the output payload so a run can be reproduced bit-exactly from
its own artifact.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .lattice import SimConfig

__all__ = ["SpecError", "PreconditionError", "ExperimentSpec", "parse_spec"]

KINDS = (
    "window_hit",
    "tau_hist",
    "annealed",
    "green",
    "displacement",
    "kernel_table",
    "oracle",
    "envelope",
)

DEFAULT_SEED = 20250810  # fixed documented default: never wall clock


class SpecError(ValueError):
    """The spec file does not parse or is structurally invalid."""


class PreconditionError(ValueError):
    """A parameter violates the target operation's preconditions."""


@dataclass
class ExperimentSpec:
    name: str
    kind: str
    config: SimConfig
    params: dict = field(default_factory=dict)
    output_json: str | None = None
    output_csv: str | None = None

    def resolved(self) -> dict:
        """Echo of every resolved setting, sufficient to reproduce the run."""
        return {
            "name": self.name,
            "kind": self.kind,
            "sim": {
                "d": self.config.d,
                "seed": self.config.seed,
                "replica_count": self.config.replica_count,
                "r_in": self.config.r_in,
                "rho": self.config.rho,
                "max_steps": self.config.max_steps,
            },
            "params": dict(sorted(self.params.items())),
            "output": {"json": self.output_json, "csv": self.output_csv},
        }


def _parse_point(raw: str) -> tuple:
    try:
        return tuple(int(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise SpecError(f"bad lattice point {raw!r}") from exc


def parse_spec(path: str) -> ExperimentSpec:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = cp.read(path)
    if not read:
        raise SpecError(f"cannot read spec file {path}")
    try:
        exp = cp["experiment"]
        name = exp.get("name", "").strip()
        kind = exp.get("kind", "").strip()
    except KeyError as exc:
        raise SpecError("missing [experiment] section") from exc
    if not name:
        raise SpecError("experiment.name is required")
    if kind not in KINDS:
        raise SpecError(f"unknown kind {kind!r}; expected one of {KINDS}")

    sim = cp["sim"] if cp.has_section("sim") else {}
    try:
        config = SimConfig(
            d=int(sim.get("d", 5)),
            seed=int(sim.get("seed", DEFAULT_SEED)),
            replica_count=int(sim.get("replica_count", 10000)),
            r_in=float(sim.get("r_in", 16.0)),
            rho=float(sim.get("rho", 8.0)),
            max_steps=int(sim.get("max_steps", 10**9)),
        )
    except ValueError as exc:
        raise SpecError(f"invalid [sim] section: {exc}") from exc

    params: dict = {}
    if cp.has_section("params"):
        for key, raw in cp["params"].items():
            if key in ("x", "target", "theta"):
                params[key] = _parse_point(raw)
            elif key in ("n", "m_max", "horizon", "bins", "functional_n"):
                params[key] = int(raw)
            elif key in ("t", "tol", "eps", "slack"):
                params[key] = float(raw)
            elif key in ("t_grid", "n_grid", "m_grid"):
                params[key] = [float(tok) for tok in raw.split()]
            elif key == "functional":
                params[key] = raw.strip()
            else:
                params[key] = raw.strip()

    out = cp["output"] if cp.has_section("output") else {}
    spec = ExperimentSpec(
        name=name,
        kind=kind,
        config=config,
        params=params,
        output_json=out.get("json") or None,
        output_csv=out.get("csv") or None,
    )
    validate_spec(spec)
    return spec


def validate_spec(spec: ExperimentSpec):
    """Check every parameter against the target operation's preconditions."""
    import math

    from .lattice import norm

    p = spec.params
    cfg = spec.config
    if spec.kind in ("window_hit", "tau_hist", "annealed", "green"):
        cfg.require_transient()
    if spec.kind == "window_hit":
        x = p.get("x")
        n = p.get("n")
        if x is None or n is None:
            raise SpecError("window_hit needs params x and n")
        if all(c == 0 for c in x):
            raise PreconditionError("x must be nonzero")
        if len(x) != cfg.d:
            raise PreconditionError("x dimension mismatch")
        if n < 1:
            raise PreconditionError("n >= 1 required")
        need = 2.0 * max(norm(x), math.sqrt(2.0 * n))
        if cfg.r_in < need:
            raise PreconditionError(
                f"r_in={cfg.r_in} below 2(|x| v sqrt(2n)) = {need:.1f}"
            )
    elif spec.kind == "tau_hist":
        x = p.get("x")
        if x is None or "n_grid" not in p:
            raise SpecError("tau_hist needs params x and n_grid (bin edges)")
        if all(c == 0 for c in x):
            raise PreconditionError("x must be nonzero")
        edges = p["n_grid"]
        if sorted(edges) != list(edges) or len(edges) < 2:
            raise PreconditionError("bin edges must increase")
    elif spec.kind == "annealed":
        x = p.get("x")
        if x is None or ("t" not in p and "t_grid" not in p):
            raise SpecError("annealed needs params x and t (or t_grid)")
        ts = p.get("t_grid", [p.get("t")])
        if any(t < 0 for t in ts):
            raise PreconditionError("t >= 0 required")
    elif spec.kind == "green":
        x = p.get("x")
        if x is None:
            raise SpecError("green needs param x")
        if all(c == 0 for c in x):
            raise PreconditionError("x must be nonzero")
        if cfg.r_in < 2.0 * norm(x):
            raise PreconditionError("need r_in >= 2|x|")
    elif spec.kind == "displacement":
        ts = p.get("t_grid")
        if not ts or len(ts) < 3:
            raise SpecError("displacement needs t_grid with >= 3 values")
        if math.log10(max(ts) / min(ts)) < 2.5:
            raise PreconditionError("t_grid must span >= 2.5 decades")
    elif spec.kind == "kernel_table":
        if "t" not in p or "m_max" not in p:
            raise SpecError("kernel_table needs t and m_max")
        tol = p.get("tol", 1e-12)
        if not 0 < tol <= 1e-6:
            raise PreconditionError("tol must lie in (0, 1e-6]")
    elif spec.kind == "oracle":
        n = p.get("functional_n")
        if n is None or "functional" not in p:
            raise SpecError("oracle needs functional and functional_n")
        if (2 * cfg.d) ** n > 10**8:
            raise PreconditionError("(2d)^N exceeds the 1e8 resource gate")
        from .oracle import FUNCTIONALS

        if p["functional"] not in FUNCTIONALS:
            raise PreconditionError(f"functional must be one of {FUNCTIONALS}")
    elif spec.kind == "envelope":
        if p.get("theorem") not in ("window-law", "annealed-kernel"):
            raise SpecError("envelope needs theorem = window-law|annealed-kernel")
