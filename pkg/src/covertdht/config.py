"""Experiment configuration: one JSON document drives every command.

The schema (all probabilities row-major):

    {
      "sources": {"u_symbols": [...], "v_symbols": [...],
                   "p_uv": [[...]], "q_uv": [[...]]},
      "channel": {"x_symbols": [...], "y_symbols": [...], "z_symbols": [...],
                   "zero_symbol": ..., "y_given_x": [[...]], "z_given_x": [[...]]},
      "scheme":  {"scheme": "A"|"B", "mu": float, "x1": ..., "x_hat": ...,
                   "y_star": ..., "k_rule": "sqrt"|"log"|"pow:a"},
      "sweep":   {"n_grid": [...], "mu_grid": [...], "trials": int, "seed": int},
      "output":  {"path": str, "format": "csv"|"json"}
    }

Parsing and serialization round-trip exactly; validation failures raise
ConfigError naming the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .channel import Dmc
from .errors import ConfigError
from .probability import Alphabet, JointPmf
from .simulation import SchemeConfig, make_k_rule


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing field {where}.{key}")
    return d[key]


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict = field(repr=False)

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        cfg = ExperimentConfig(raw=json.loads(json.dumps(data)))
        cfg.validate()
        return cfg

    @staticmethod
    def load(path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return ExperimentConfig.from_dict(data)

    def to_dict(self) -> dict:
        return json.loads(json.dumps(self.raw))

    # -- parsed accessors ---------------------------------------------------

    def source_pmfs(self) -> tuple[JointPmf, JointPmf]:
        src = _require(self.raw, "sources", "config")
        u = Alphabet(tuple(_require(src, "u_symbols", "sources")))
        v = Alphabet(tuple(_require(src, "v_symbols", "sources")))
        try:
            p = JointPmf(u, v, np.array(_require(src, "p_uv", "sources"), dtype=float))
        except ValueError as exc:
            raise ConfigError(f"sources.p_uv: {exc}") from exc
        try:
            q = JointPmf(u, v, np.array(_require(src, "q_uv", "sources"), dtype=float))
        except ValueError as exc:
            raise ConfigError(f"sources.q_uv: {exc}") from exc
        return p, q

    def dmc(self) -> Dmc:
        ch = _require(self.raw, "channel", "config")
        x = Alphabet(tuple(_require(ch, "x_symbols", "channel")))
        y = Alphabet(tuple(_require(ch, "y_symbols", "channel")))
        z = Alphabet(tuple(_require(ch, "z_symbols", "channel")))
        zero = _require(ch, "zero_symbol", "channel")
        if zero not in x.symbols:
            raise ConfigError("channel.zero_symbol: not among channel.x_symbols")
        try:
            return Dmc(
                input_alphabet=x,
                y_alphabet=y,
                z_alphabet=z,
                y_given_x=np.array(_require(ch, "y_given_x", "channel"), dtype=float),
                z_given_x=np.array(_require(ch, "z_given_x", "channel"), dtype=float),
                zero_symbol=zero,
            )
        except ValueError as exc:
            raise ConfigError(f"channel: {exc}") from exc

    def scheme(self) -> SchemeConfig:
        sc = _require(self.raw, "scheme", "config")
        kind = _require(sc, "scheme", "scheme")
        try:
            return SchemeConfig(
                scheme=kind,
                mu=float(sc.get("mu", 0.05)),
                x1=sc.get("x1"),
                x_hat=sc.get("x_hat"),
                y_star=sc.get("y_star"),
                k_spec=sc.get("k_rule", "sqrt"),
            )
        except ValueError as exc:
            raise ConfigError(f"scheme: {exc}") from exc

    def sweep(self) -> dict:
        sw = dict(self.raw.get("sweep", {}))
        sw.setdefault("n_grid", [40, 80, 120, 160, 200])
        sw.setdefault("mu_grid", [])
        sw.setdefault("trials", 0)
        sw.setdefault("seed", 1)
        return sw

    def output(self) -> dict:
        out = dict(self.raw.get("output", {}))
        out.setdefault("path", "-")
        out.setdefault("format", "csv")
        if out["format"] not in ("csv", "json"):
            raise ConfigError("output.format: must be 'csv' or 'json'")
        return out

    # -- validation ---------------------------------------------------------

    def validate(self) -> None:
        p, q = self.source_pmfs()
        dmc = self.dmc()
        scheme = self.scheme()
        # referenced symbols must exist in the declared alphabets
        if scheme.scheme == "B" and scheme.x1 not in dmc.input_alphabet.symbols:
            raise ConfigError("scheme.x1: not among channel.x_symbols")
        if scheme.scheme == "A":
            if scheme.x_hat not in dmc.input_alphabet.symbols:
                raise ConfigError("scheme.x_hat: not among channel.x_symbols")
            if scheme.y_star not in dmc.y_alphabet.symbols:
                raise ConfigError("scheme.y_star: not among channel.y_symbols")
        try:
            make_k_rule(scheme.k_spec)
        except ValueError as exc:
            raise ConfigError(f"scheme.k_rule: {exc}") from exc
        sw = self.sweep()
        if not all(isinstance(n, int) and n >= 1 for n in sw["n_grid"]):
            raise ConfigError("sweep.n_grid: blocklengths must be positive integers")
        if np.any((p.probs > 0) & (q.probs == 0)):
            raise ConfigError("sources: p_uv must vanish wherever q_uv vanishes")
        self.output()
