"""Pydantic request/response models for the service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator


class ObstacleModel(BaseModel):
    vertices: list[list[float]]
    triangles: list[list[int]]


class SceneModel(BaseModel):
    obstacles: list[ObstacleModel]


class SolveRequest(BaseModel):
    scene: SceneModel
    source: list[float] = Field(min_length=3, max_length=3)
    face: str = Field(description="face reference 'OBSTACLE:TRIANGLE', zero-based")
    epsilon: float = Field(gt=0.0, le=1.0)
    algorithm: Literal["grid_vg", "wvd", "cone"] = "cone"
    epsilon1: Optional[float] = Field(default=None, gt=0.0)
    cone_theta: Optional[float] = Field(default=None, gt=0.0)
    timing: bool = True

    @field_validator("source")
    @classmethod
    def _finite(cls, v):
        import math
        if not all(math.isfinite(c) for c in v):
            raise ValueError("source coordinates must be finite")
        return v


class BoundsModel(BaseModel):
    B: float
    D: float
    h: list[float]


class StatsModel(BaseModel):
    nodes: int
    edges: int
    visibility_tests: int
    elapsed_ms: Optional[float] = None


class SolveResponse(BaseModel):
    schema_version: int = 1
    length: float
    waypoints: list[list[float]]
    bounds: BoundsModel
    algorithm: str
    epsilon: float
    stats: StatsModel


class OracleRequest(BaseModel):
    scene: SceneModel
    source: list[float] = Field(min_length=3, max_length=3)
    face: str
    oracle: Literal["fine", "unfold", "exhaustive", "unobstructed"] = "fine"
    epsilon_oracle: float = Field(default=0.02, gt=0.0)
    edges: Optional[list[int]] = Field(
        default=None, description="edge ids for the unfold oracle, in order")
    terminal: Optional[list[float]] = Field(
        default=None, min_length=3, max_length=3,
        description="terminal point for the unfold oracle")


class OracleResponse(BaseModel):
    schema_version: int = 1
    oracle: str
    length: float
    kind: str
    eps_oracle: Optional[float] = None
    waypoints: list[list[float]]


class BenchSceneModel(BaseModel):
    label: str
    scene: SceneModel
    source: list[float] = Field(min_length=3, max_length=3)
    face: str


class BenchRequest(BaseModel):
    scenes: Optional[list[BenchSceneModel]] = None
    random: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    algorithms: list[Literal["grid_vg", "wvd", "cone"]] = ["grid_vg", "wvd", "cone"]
    epsilons: list[float] = [0.5, 0.25]
    epsilon_oracle: float = Field(default=0.05, gt=0.0)
    timing: bool = False
