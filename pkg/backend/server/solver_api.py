"""
FastAPI surface for running studies.

Endpoints:
- GET  /health
- POST /api/studies/convergence: uniform refinement study, one row per level
- POST /api/studies/adaptive: adaptive loop, one row per iteration
"""
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

# Load environment variables
load_dotenv(dotenv_path=os.getenv("DGCONTACT_ENV_FILE", "../.env"))

# Add backend to path
backend_path = Path(__file__).parent.parent
sys.path.insert(0, str(backend_path))

from harness.runner import run_study
from harness.studies import RunRecord
from utils.config import load_study_config, merge_overrides
from utils.errors import ConfigError, DGContactError

logger = logging.getLogger(__name__)

app = FastAPI(title="DG Contact Solver API", version="1.0")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class StudyRequest(BaseModel):
    problem: Optional[int] = None
    method: Optional[str] = None
    penalty: Optional[float] = None
    initial_n: Optional[int] = None
    quad_degree: Optional[int] = None
    problem_overrides: Dict[str, Any] = Field(default_factory=dict)


class ConvergenceRequest(StudyRequest):
    levels: Optional[int] = None


class AdaptiveRequest(StudyRequest):
    theta: Optional[float] = None
    max_dofs: Optional[int] = None
    max_iterations: Optional[int] = None


def clean_for_json(obj):
    """Replace NaN/Inf by None, recursively."""
    if isinstance(obj, dict):
        return {k: clean_for_json(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [clean_for_json(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _run(strategy: str, body: StudyRequest) -> List[RunRecord]:
    overrides = body.model_dump() if hasattr(body, "model_dump") else body.dict()
    overrides.update(strategy=strategy, output=None, emit_meshes=None)
    try:
        config = merge_overrides(load_study_config(), overrides)
        return run_study(config)
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except DGContactError as e:
        logger.error(f"{strategy} study failed: {type(e).__name__}: {e}")
        raise HTTPException(status_code=500, detail=f"{type(e).__name__}: {e}")
    except (ValueError, ArithmeticError) as e:
        logger.error(f"{strategy} study failed numerically: {type(e).__name__}: {e}")
        raise HTTPException(status_code=500, detail=f"{type(e).__name__}: {e}")


def _response(strategy: str, records: List[RunRecord]) -> JSONResponse:
    return JSONResponse(clean_for_json({
        'strategy': strategy,
        'run': records[0].run if records else None,
        'records': [r.to_dict() for r in records],
    }))


@app.get("/health")
async def health_check():
    """Health check endpoint."""
    return JSONResponse({'status': 'ok', 'service': 'DG Contact Solver API', 'version': '1.0'})


@app.post("/api/studies/convergence")
def convergence_study(body: ConvergenceRequest):
    return _response("uniform", _run("uniform", body))


@app.post("/api/studies/adaptive")
def adaptive_study(body: AdaptiveRequest):
    return _response("adaptive", _run("adaptive", body))


if __name__ == '__main__':
    import uvicorn
    uvicorn.run(app, host='0.0.0.0', port=8000)
