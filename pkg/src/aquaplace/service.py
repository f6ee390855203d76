"""HTTP facade for the placement pipeline and live installation sessions.

Single process, file-backed. Solves run as asynchronous jobs on a bounded
thread pool; clients poll ``GET /jobs/{id}``. Session mutations take a
per-session lock and hit disk before the response, so a restarted process
sees exactly the state the last response promised. A session admits one
in-flight replan at a time.

Error mapping: malformed bodies and invalid parameters are 400 with
field-level messages, unknown ids are 404, contradictory marks and
concurrent replans are 409, and exceeding the sensor budget is 422.
"""

from __future__ import annotations

import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import centrality as centrality_mod
from .anneal import Schedule, histogram
from .errors import (
    AquaplaceError,
    InstallLimitError,
    MarkConflictError,
    ReplanInFlightError,
)
from .network import load_network, to_document as network_to_document
from .placement import (
    Hyperparams,
    create_session,
    mark,
    placement_registry,
    replan,
    report_to_document,
    result_to_document,
    session_from_document,
    session_to_document,
    solve_placement,
    unmark,
)

JOB_SCHEMA = "job/1"
HISTOGRAM_SCHEMA = "histogram/1"

STATUS_PENDING = "pending"
STATUS_RUNNING = "running"
STATUS_DONE = "done"
STATUS_FAILED = "failed"

DEFAULT_BINS = 30


class HyperparamsBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    s: int = 5
    A: float = 1.0
    B: float = 30.0
    C: float = 5.0
    D: float = 1.0
    E: float | None = None
    mode: str = "equality"
    f_model: str = "linear"


class ScheduleBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    t_hot: float | None = None
    t_cold: float | None = None
    sweeps: int = 1000
    runs: int = 100
    seed: int = 0


class SolveBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    hyperparams: HyperparamsBody = HyperparamsBody()
    schedule: ScheduleBody = ScheduleBody()


class SessionCreateBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    hyperparams: HyperparamsBody = HyperparamsBody()


class MarkBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    node: str
    status: str


class UnmarkBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    node: str


class ReplanBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    schedule: ScheduleBody = ScheduleBody()


class ServiceState:
    """Everything the handlers share: network, weights, jobs, persistence."""

    def __init__(self, network_path: Path, data_dir: Path, seed: int,
                 max_workers: int | None):
        self.net = load_network(network_path)
        self.weights = centrality_mod.tailored_centrality(self.net)
        self.seed = seed
        self.data_dir = Path(data_dir)
        for sub in ("sessions", "jobs", "results"):
            (self.data_dir / sub).mkdir(parents=True, exist_ok=True)
        self.executor = ThreadPoolExecutor(max_workers=max_workers)
        self._lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}
        self._jobs: dict[str, dict] = {}
        self._active_replans: dict[str, str] = {}  # session id -> job id
        self._recover_jobs()

    # -- persistence helpers ----------------------------------------------

    def _session_path(self, session_id: str) -> Path:
        return self.data_dir / "sessions" / f"{session_id}.json"

    def _job_path(self, job_id: str) -> Path:
        return self.data_dir / "jobs" / f"{job_id}.json"

    def _result_path(self, result_id: str) -> Path:
        return self.data_dir / "results" / f"{result_id}.json"

    @staticmethod
    def _write(path: Path, document: dict) -> None:
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n",
                       encoding="utf-8")
        tmp.replace(path)

    def _recover_jobs(self) -> None:
        # a job interrupted by a restart can never report done
        for path in sorted((self.data_dir / "jobs").glob("*.json")):
            record = json.loads(path.read_text(encoding="utf-8"))
            if record.get("status") in (STATUS_PENDING, STATUS_RUNNING):
                record["status"] = STATUS_FAILED
                record["error"] = "interrupted by service restart"
                self._write(path, record)
            self._jobs[record["id"]] = record

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._lock:
            return self._session_locks.setdefault(session_id, threading.Lock())

    # -- sessions ----------------------------------------------------------

    def load_session(self, session_id: str):
        path = self._session_path(session_id)
        if not path.exists():
            raise LookupError(f"unknown session '{session_id}'")
        return session_from_document(json.loads(path.read_text(encoding="utf-8")))

    def save_session(self, session) -> dict:
        document = session_to_document(session)
        self._write(self._session_path(session.id), document)
        return document

    # -- jobs --------------------------------------------------------------

    def create_job(self, kind: str, submitted: dict,
                   session_id: str | None = None) -> dict:
        record = {
            "schema": JOB_SCHEMA,
            "id": uuid.uuid4().hex[:12],
            "kind": kind,
            "status": STATUS_PENDING,
            "session_id": session_id,
            "submitted": submitted,
            "error": None,
            "result_id": None,
        }
        with self._lock:
            self._jobs[record["id"]] = record
            self._write(self._job_path(record["id"]), record)
        return record

    def update_job(self, job_id: str, **changes) -> dict:
        with self._lock:
            record = dict(self._jobs[job_id])
            record.update(changes)
            self._jobs[job_id] = record
            self._write(self._job_path(job_id), record)
            return record

    def get_job(self, job_id: str) -> dict:
        with self._lock:
            if job_id not in self._jobs:
                raise LookupError(f"unknown job '{job_id}'")
            return dict(self._jobs[job_id])

    def claim_replan(self, session_id: str) -> None:
        with self._lock:
            active = self._active_replans.get(session_id)
            if active is not None:
                raise ReplanInFlightError(
                    f"session '{session_id}' already has replan job '{active}' in flight"
                )
            self._active_replans[session_id] = ""  # claimed; job id follows

    def set_replan_job(self, session_id: str, job_id: str) -> None:
        with self._lock:
            self._active_replans[session_id] = job_id

    def release_replan(self, session_id: str) -> None:
        with self._lock:
            self._active_replans.pop(session_id, None)

    def load_result(self, result_id: str) -> dict:
        path = self._result_path(result_id)
        if not path.exists():
            raise LookupError(f"unknown result '{result_id}'")
        return json.loads(path.read_text(encoding="utf-8"))

    def store_result(self, result_id: str, report, result) -> None:
        self._write(self._result_path(result_id), {
            "report": report_to_document(report),
            "result": result_to_document(result, placement_registry(self.net)),
        })

    # -- work --------------------------------------------------------------

    def run_solve_job(self, job_id: str, hp: Hyperparams,
                      schedule: Schedule) -> None:
        try:
            self.update_job(job_id, status=STATUS_RUNNING)
            report, result = solve_placement(self.net, self.weights, hp, schedule)
            self.store_result(job_id, report, result)
            self.update_job(job_id, status=STATUS_DONE, result_id=job_id)
        except Exception as exc:  # job errors surface via polling, never raise
            self.update_job(job_id, status=STATUS_FAILED, error=str(exc))

    def run_replan_job(self, job_id: str, session_id: str,
                       schedule: Schedule) -> None:
        try:
            self.update_job(job_id, status=STATUS_RUNNING)
            with self.session_lock(session_id):
                session = self.load_session(session_id)
                report, result = replan(session, self.net, self.weights, schedule)
                self.save_session(session)
            self.store_result(job_id, report, result)
            self.update_job(job_id, status=STATUS_DONE, result_id=job_id)
        except Exception as exc:
            self.update_job(job_id, status=STATUS_FAILED, error=str(exc))
        finally:
            self.release_replan(session_id)


def _error_status(exc: AquaplaceError) -> int:
    if isinstance(exc, (MarkConflictError, ReplanInFlightError)):
        return 409
    if isinstance(exc, InstallLimitError):
        return 422
    return 400


def create_app(network_path: Path, data_dir: Path, seed: int = 0,
               max_workers: int | None = None) -> FastAPI:
    state = ServiceState(Path(network_path), Path(data_dir), seed, max_workers)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        state.executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="aquaplace", lifespan=lifespan)
    app.state.service = state
    # the browser client is served separately during development
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        detail = [
            {"field": ".".join(str(part) for part in err["loc"]),
             "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400,
                            content={"error": "ValidationError", "detail": detail})

    @app.exception_handler(AquaplaceError)
    async def on_domain_error(request: Request, exc: AquaplaceError):
        return JSONResponse(
            status_code=_error_status(exc),
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.exception_handler(LookupError)
    async def on_lookup_error(request: Request, exc: LookupError):
        return JSONResponse(status_code=404,
                            content={"error": "NotFound", "message": str(exc)})

    @app.get("/network")
    async def get_network():
        return network_to_document(state.net)

    @app.get("/centrality")
    async def get_centrality():
        return centrality_mod.to_document(state.weights)

    @app.post("/solve")
    async def post_solve(body: SolveBody):
        hp = Hyperparams(**body.hyperparams.model_dump())
        schedule = Schedule(**body.schedule.model_dump())
        record = state.create_job("solve", body.model_dump())
        state.executor.submit(state.run_solve_job, record["id"], hp, schedule)
        return {"job_id": record["id"]}

    @app.get("/jobs/{job_id}")
    async def get_job(job_id: str):
        record = state.get_job(job_id)
        if record["status"] == STATUS_DONE:
            record["report"] = state.load_result(record["result_id"])["report"]
        return record

    @app.post("/sessions")
    async def post_session(body: SessionCreateBody):
        hp = Hyperparams(**body.hyperparams.model_dump())
        session = create_session(hp)
        with state.session_lock(session.id):
            return state.save_session(session)

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        with state.session_lock(session_id):
            return session_to_document(state.load_session(session_id))

    @app.post("/sessions/{session_id}/mark")
    async def post_mark(session_id: str, body: MarkBody):
        with state.session_lock(session_id):
            session = state.load_session(session_id)
            mark(session, state.net, body.node, body.status)
            return state.save_session(session)

    @app.post("/sessions/{session_id}/unmark")
    async def post_unmark(session_id: str, body: UnmarkBody):
        with state.session_lock(session_id):
            session = state.load_session(session_id)
            unmark(session, body.node)
            return state.save_session(session)

    @app.post("/sessions/{session_id}/replan")
    async def post_replan(session_id: str, body: ReplanBody | None = None):
        with state.session_lock(session_id):
            state.load_session(session_id)  # 404 before claiming
        schedule_body = body.schedule if body is not None else ScheduleBody()
        schedule = Schedule(**schedule_body.model_dump())
        state.claim_replan(session_id)
        try:
            record = state.create_job("replan", schedule_body.model_dump(),
                                      session_id=session_id)
            state.set_replan_job(session_id, record["id"])
        except Exception:
            state.release_replan(session_id)
            raise
        state.executor.submit(state.run_replan_job, record["id"], session_id,
                              schedule)
        return {"job_id": record["id"]}

    @app.get("/results/{result_id}/histogram")
    async def get_result_histogram(result_id: str, bins: int = DEFAULT_BINS):
        stored = state.load_result(result_id)
        table = histogram(stored["result"]["energies"], bins)
        return {
            "schema": HISTOGRAM_SCHEMA,
            "bins": bins,
            "centers": list(table.centers),
            "densities": list(table.densities),
            "width": table.width,
        }

    return app
