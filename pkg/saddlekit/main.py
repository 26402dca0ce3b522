"""Application entrypoint.

Run either:
  uvicorn saddlekit.main:app --reload
OR:
  python -m saddlekit.main
"""
import logging

from fastapi import FastAPI

from saddlekit import __version__
from saddlekit.api.solver import router as solver_router
from saddlekit.config import CONFIG

app = FastAPI(title="saddlekit", version=__version__)
app.include_router(solver_router)

__all__ = ["app"]

if __name__ == "__main__":
    import uvicorn

    logging.basicConfig(
        level=getattr(logging, CONFIG.runtime.log_level, logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    uvicorn.run(app, host="0.0.0.0", port=8000)
