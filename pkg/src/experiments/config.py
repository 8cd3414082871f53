"""Experiment configuration model."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.detection import NoiseChannel
from src.models.graph import Graph, GraphFamily, build_graph, from_edge_list, load_graph
from src.models.ising import Coupling, GlauberOptions, IsingModel
from src.shared.exceptions import ConfigurationError
from src.shared.settings import get_settings

# Placeholder inverse temperature for the empty graph, whose energy ignores theta
EMPTY_GRAPH_THETA = 1.0


class ExperimentConfig(BaseModel):
    """One simulation cell: prior, channel, trial count and seed."""

    model_config = ConfigDict(frozen=True, extra="forbid", use_enum_values=False)

    graph: str = Field(..., description="Graph specifier: empty, chain, chain-pbc, complete or custom:PATH")
    n: int = Field(..., gt=0, description="Number of members (odd)")
    theta: Optional[float] = Field(default=None, gt=0, description="Inverse temperature")
    p: float = Field(..., gt=0, lt=0.5, description="Crossover probability")
    trials: int = Field(default=100_000, ge=1, description="Number of Monte Carlo trials")
    seed: int = Field(default=0, ge=0, lt=2**64, description="64-bit master seed")
    confidence: float = Field(default=0.99, gt=0, lt=1, description="Confidence level of the interval")
    coupling: Optional[Coupling] = Field(
        default=None, description="edgewise or curie-weiss; defaults to curie-weiss on the complete graph"
    )
    edges: Optional[List[Tuple[int, int]]] = Field(
        default=None, description="Inline edge list for custom graphs"
    )
    burn_in_sweeps: Optional[int] = Field(default=None, ge=0, description="Glauber burn-in sweeps")
    thinning_sweeps: Optional[int] = Field(default=None, ge=1, description="Glauber sweeps between draws")

    @model_validator(mode="after")
    def _check_consistency(self) -> "ExperimentConfig":
        family, path = GraphFamily.parse(self.graph)
        if self.n % 2 == 0:
            raise ValueError(f"n must be odd so the majority is defined, got {self.n}")
        if family is not GraphFamily.EMPTY and self.theta is None:
            raise ValueError(f"graph '{family.value}' needs theta")
        if self.coupling is Coupling.CURIE_WEISS and family is not GraphFamily.COMPLETE:
            raise ValueError("curie-weiss coupling requires the complete graph")
        if family is GraphFamily.CUSTOM and path is None and self.edges is None:
            raise ValueError("custom graph needs a path or an edge list")
        if family in (GraphFamily.CHAIN, GraphFamily.CHAIN_PBC) and self.n < 3:
            raise ValueError(f"{family.value} needs n >= 3")
        return self

    @classmethod
    def from_json_file(cls, path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> "ExperimentConfig":
        """Load a JSON config; non-None overrides replace file values."""
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read config file {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"config file {path} must hold a JSON object")
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.model_validate(data)

    @property
    def family(self) -> GraphFamily:
        return GraphFamily.parse(self.graph)[0]

    @property
    def resolved_coupling(self) -> Coupling:
        if self.coupling is not None:
            return self.coupling
        return Coupling.CURIE_WEISS if self.family is GraphFamily.COMPLETE else Coupling.EDGEWISE

    def build_graph(self) -> Graph:
        family, path = GraphFamily.parse(self.graph)
        if family is not GraphFamily.CUSTOM:
            return build_graph(family, self.n)
        graph = from_edge_list(self.n, self.edges) if self.edges is not None else load_graph(path)
        if graph.n != self.n:
            raise ConfigurationError(f"custom graph has n={graph.n}, config says n={self.n}")
        return graph

    def build_model(self) -> IsingModel:
        theta = self.theta if self.theta is not None else EMPTY_GRAPH_THETA
        return IsingModel(self.build_graph(), theta, self.resolved_coupling)

    def channel(self) -> NoiseChannel:
        return NoiseChannel(self.p)

    def glauber_options(self) -> GlauberOptions:
        defaults = GlauberOptions.from_settings()
        return GlauberOptions(
            burn_in_sweeps=self.burn_in_sweeps if self.burn_in_sweeps is not None else defaults.burn_in_sweeps,
            thinning_sweeps=self.thinning_sweeps if self.thinning_sweeps is not None else defaults.thinning_sweeps,
            chains=get_settings().GLAUBER_CHAINS,
        )

    def with_updates(self, **updates: Any) -> "ExperimentConfig":
        """Validated copy with some fields replaced."""
        data = self.model_dump()
        data.update(updates)
        return ExperimentConfig.model_validate(data)
