"""FastAPI service wrapping the solver and oracle stack.

The service holds no state: every request carries its scene inline, gets
validated, solved and serialized back. Input problems map to 422, a
genuinely unreachable face maps to 409.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse

from .. import __version__
from ..bench import BenchCase, bench_table, random_scene
from ..errors import (
    BadFaceRef,
    Blocked,
    FacepathError,
    Infeasible,
    NoFeasibleSequence,
    ParseError,
    SourceInsideObstacle,
    Unreachable,
    ValidationError,
)
from ..oracle import (
    oracle_exhaustive_sequences,
    oracle_fine,
    oracle_unfold,
    oracle_unobstructed,
)
from ..scene import FaceRef, Scene, scene_from_dict
from ..solver import SolveConfig, solve
from .models import (
    BenchRequest,
    OracleRequest,
    OracleResponse,
    SolveRequest,
    SolveResponse,
)

_INPUT_ERRORS = (ParseError, ValidationError, BadFaceRef, SourceInsideObstacle,
                 Blocked, Infeasible, NoFeasibleSequence, ValueError)


def _error(status: int, exc: Exception) -> HTTPException:
    return HTTPException(status_code=status, detail={
        "type": type(exc).__name__, "message": str(exc)})


def _load(scene_model) -> Scene:
    return scene_from_dict(scene_model.model_dump())


def create_app() -> FastAPI:
    app = FastAPI(title="facepath", version=__version__,
                  description="Approximate point-to-face shortest paths "
                              "among 3D polyhedral obstacles.")

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__, "schema_version": 1}

    @app.post("/solve", response_model=SolveResponse)
    def solve_endpoint(req: SolveRequest) -> SolveResponse:
        try:
            scene = _load(req.scene)
            face = FaceRef.parse(req.face)
            scene.resolve_face(face)
            source = np.array(req.source, dtype=float)
            scene.validate_source(source)
            cfg = SolveConfig(epsilon=req.epsilon, algorithm=req.algorithm,
                              epsilon1=req.epsilon1, cone_theta=req.cone_theta)
            outcome = solve(source, face, scene, cfg)
        except Unreachable as exc:
            raise _error(409, exc) from None
        except _INPUT_ERRORS as exc:
            raise _error(422, exc) from None
        payload = outcome.to_dict()
        if not req.timing:
            payload["stats"]["elapsed_ms"] = None
        return SolveResponse(**payload)

    @app.post("/oracle", response_model=OracleResponse)
    def oracle_endpoint(req: OracleRequest) -> OracleResponse:
        try:
            scene = _load(req.scene)
            face = FaceRef.parse(req.face)
            scene.resolve_face(face)
            source = np.array(req.source, dtype=float)
            scene.validate_source(source)
            if req.oracle == "fine":
                est = oracle_fine(source, face, scene, req.epsilon_oracle)
            elif req.oracle == "unobstructed":
                est = oracle_unobstructed(source, face, scene)
            elif req.oracle == "exhaustive":
                est = oracle_exhaustive_sequences(source, face, scene)
            else:
                if not req.edges or req.terminal is None:
                    raise ValueError("unfold oracle needs 'edges' and 'terminal'")
                try:
                    seq = [scene.edges[i] for i in req.edges]
                except IndexError:
                    raise ValueError("edge id out of range") from None
                est = oracle_unfold(source, np.array(req.terminal, float), seq, scene)
        except Unreachable as exc:
            raise _error(409, exc) from None
        except _INPUT_ERRORS as exc:
            raise _error(422, exc) from None
        return OracleResponse(oracle=req.oracle, **est.to_dict())

    @app.post("/bench", response_class=PlainTextResponse)
    def bench_endpoint(req: BenchRequest) -> PlainTextResponse:
        try:
            cases: list[BenchCase] = []
            if req.scenes:
                for entry in req.scenes:
                    scene = _load(entry.scene)
                    face = FaceRef.parse(entry.face)
                    scene.resolve_face(face)
                    cases.append(BenchCase(label=entry.label, scene=scene,
                                           source=np.array(entry.source, float),
                                           face=face))
            if req.random:
                for i in range(req.random):
                    case = random_scene(req.seed + i)
                    case.label = f"random-{req.seed}-{i}"
                    cases.append(case)
            if not cases:
                raise ValueError("bench needs inline scenes or a random count")
            csv_text = bench_table(cases, req.algorithms, req.epsilons,
                                   req.epsilon_oracle, timing=req.timing)
        except Unreachable as exc:
            raise _error(409, exc) from None
        except _INPUT_ERRORS as exc:
            raise _error(422, exc) from None
        return PlainTextResponse(csv_text, media_type="text/csv")

    return app


app = create_app()
