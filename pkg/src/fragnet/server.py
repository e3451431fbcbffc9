"""HTTP service exposing prediction, explanation and 2D layout.

Endpoints:
    GET  /health   -> {"status": "ok", "models": [...]}
    GET  /models   -> model metadata
    POST /predict  {"smiles": ..., "model": ...} -> {"prediction": ...}
    POST /explain  {"smiles": ..., "model": ...} -> explanation + layout

Errors come back as {"error": {"code": ..., "message": ...}} with 400 for
parse/validation problems, 404 for unknown models, 500 otherwise.
Checkpoints are immutable after startup, so concurrent requests share them
freely.
"""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .chem import parse_smiles
from .chem.errors import SmilesError, SmilesSyntaxError, UnsupportedFeatureError, ValenceError
from .interpret import explain
from .layout import layout_2d
from .training import Checkpoint, TaskKind, load_checkpoint

logger = logging.getLogger(__name__)


class PredictRequest(BaseModel):
    smiles: str
    model: str | None = None


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message}})


def load_models_dir(models_dir: str) -> dict[str, Checkpoint]:
    """Model registry: every *.json in the directory, named by file stem."""
    out: dict[str, Checkpoint] = {}
    for path in sorted(Path(models_dir).glob("*.json")):
        try:
            out[path.stem] = load_checkpoint(str(path))
        except Exception as err:  # noqa: BLE001
            logger.warning("skipping %s: %s", path, err)
    return out


def create_app(models: dict[str, Checkpoint],
               cors_origin: str = "*") -> FastAPI:
    app = FastAPI(title="fragnet", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[cors_origin] if cors_origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def resolve(name: str | None) -> tuple[str, Checkpoint] | None:
        if name is None:
            if len(models) == 1:
                return next(iter(models.items()))
            return None
        if name in models:
            return name, models[name]
        return None

    @app.exception_handler(Exception)
    async def unhandled(request: Request, exc: Exception):
        logger.exception("internal error on %s", request.url.path)
        return _error(500, "internal", str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok", "models": sorted(models)}

    @app.get("/models")
    def model_info():
        return {
            name: {
                "task": ckpt.task.value,
                "hidden_dim": ckpt.model_config.hidden_dim,
                "layers_per_graph": ckpt.model_config.layers_per_graph,
                "heads": ckpt.model_config.heads,
                "n_tasks": ckpt.model_config.n_tasks,
                "metadata": ckpt.metadata,
            }
            for name, ckpt in sorted(models.items())
        }

    @app.post("/predict")
    def predict(req: PredictRequest):
        found = resolve(req.model)
        if found is None:
            return _error(404, "unknown_model",
                          f"model {req.model!r} not loaded")
        name, ckpt = found
        try:
            values = ckpt.predict_smiles(req.smiles)
        except SmilesError as err:
            return _error(400, _smiles_code(err), str(err))
        pred = values.tolist()
        return {"model": name,
                "prediction": pred[0] if len(pred) == 1 else pred}

    @app.post("/explain")
    def explain_route(req: PredictRequest):
        found = resolve(req.model)
        if found is None:
            return _error(404, "unknown_model",
                          f"model {req.model!r} not loaded")
        name, ckpt = found
        try:
            mol = parse_smiles(req.smiles)
            exp = explain(req.smiles, ckpt)
        except SmilesError as err:
            return _error(400, _smiles_code(err), str(err))
        doc = exp.to_json_dict()
        doc["model"] = name
        doc["layout"] = layout_2d(mol).to_json_dict()
        return doc

    return app


def _smiles_code(err: SmilesError) -> str:
    if isinstance(err, SmilesSyntaxError):
        return "syntax_error"
    if isinstance(err, ValenceError):
        return "valence_error"
    if isinstance(err, UnsupportedFeatureError):
        return "unsupported_feature"
    return "parse_error"


def create_app_from_dir(models_dir: str, cors_origin: str = "*") -> FastAPI:
    models = load_models_dir(models_dir)
    if not models:
        raise FileNotFoundError(f"no loadable checkpoints in {models_dir}")
    return create_app(models, cors_origin=cors_origin)
