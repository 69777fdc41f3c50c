"""Session-oriented HTTP API for the interactive discovery loop.

The analyst plays the candidate selector: list ranked candidates, accept one,
undo, or let auto-complete finish headlessly.  Every mutation bumps a
per-session state token; accepting against a stale token returns 409 so a
client never acts on an outdated candidate list.  Mutations on one session
are serialized by a lock, many sessions run side by side, and accepting the
top-ranked candidate until termination yields exactly the headless ruleset.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse, Response
from pydantic import BaseModel

from .boxes import Box, DiscoveryConfig, DiscoveryEngine, DiscoveryError
from .dataset import ClassLabel, LabeledDataset, NDPoint, load_csv, load_wbc
from .mapping import MappingMode, encode
from .render import BoxOverlay, RenderOptions, render_scene
from .rules import RuleSet, evaluate, from_trace, join, prune, rule_to_text, sequential_assignments
from . import storage


class MappingSpec(BaseModel):
    kind: str = "ilc2_partial_dynamic"
    offsets: list[float] | None = None
    weights: list[float] | None = None


class DiscoverySpec(BaseModel):
    pitch: float = 0.5
    max_box_cells_x: int = 40
    max_box_cells_y: int = 24
    min_pure_support: int = 8
    mini_threshold: int = 7


class InlineData(BaseModel):
    attribute_names: list[str]
    rows: list[list[float]]
    labels: list[str]
    colors: dict[str, str] | None = None


class SessionRequest(BaseModel):
    wbc: bool = False
    csv_path: str | None = None
    label_column: str = "class"
    inline: InlineData | None = None
    mapping: MappingSpec = MappingSpec()
    discovery: DiscoverySpec = DiscoverySpec()


class BoxSpec(BaseModel):
    x1: float
    x2: float
    y1: float
    y2: float


class AcceptRequest(BaseModel):
    state_token: int
    box: BoxSpec


class PruneRequest(BaseModel):
    strategy: str = "refuse"
    threshold: int | None = None


class ClassifyRequest(BaseModel):
    rows: list[list[float]]


@dataclass
class Session:
    id: str
    ds: LabeledDataset
    mode: MappingMode
    engine: DiscoveryEngine
    graphs: list
    version: int = 0
    derived: RuleSet | None = None  # join/prune product; reset by mutations
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def ruleset(self) -> RuleSet:
        if self.derived is not None:
            return self.derived
        return from_trace(self.engine.trace, self.graphs)


def _box_obj(box: Box) -> dict:
    return {"id": box.id, "x1": box.x1, "x2": box.x2, "y1": box.y1, "y2": box.y2}


def _stats_obj(stats) -> dict:
    return {
        "per_class": stats.per_class,
        "support": stats.support,
        "purity": stats.purity,
        "dominant": stats.dominant,
    }


def _rules_obj(rs: RuleSet) -> list[dict]:
    return [
        {
            "id": r.id,
            "target": r.target,
            "positive": list(r.positive),
            "negated": list(r.negated),
            "text": rule_to_text(r),
        }
        for r in rs.rules
    ]


def create_app() -> FastAPI:
    app = FastAPI(title="inline2d discovery service", version="0.1.0", openapi_url="/api/v1/spec")
    sessions: dict[str, Session] = {}
    counter = itertools.count(1)
    registry_lock = threading.Lock()

    def get_session(sid: str) -> Session:
        session = sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {sid}")
        return session

    def state(session: Session) -> dict:
        metrics = evaluate(session.ruleset, session.graphs, session.ds.labels)
        return {
            "session_id": session.id,
            "state_token": session.version,
            "cases": len(session.ds),
            "active_cases": session.engine.active.bit_count(),
            "accepted": [
                {
                    "box": _box_obj(s.box),
                    "target": s.target,
                    "phase": s.phase,
                    "stats": _stats_obj(s.stats),
                }
                for s in session.engine.trace.steps
            ],
            "rules": _rules_obj(session.ruleset),
            "metrics": {
                "covered": metrics.covered,
                "refused": metrics.refused,
                "coverage_fraction": metrics.coverage_fraction,
                "refusal_fraction": metrics.refusal_fraction,
                "accuracy_decided": metrics.accuracy_decided,
                "per_rule": metrics.per_rule,
            },
        }

    @app.post("/api/v1/sessions")
    def create_session(req: SessionRequest):
        if req.inline is not None:
            data = req.inline
            if len(data.rows) != len(data.labels):
                raise HTTPException(status_code=422, detail="rows/labels length mismatch")
            colors = data.colors or {}
            ds = LabeledDataset(
                points=[NDPoint(values=tuple(r), id=str(i)) for i, r in enumerate(data.rows)],
                labels=[ClassLabel(name=l, color=colors.get(l, "gray")) for l in data.labels],
                attribute_names=list(data.attribute_names),
            )
        elif req.wbc:
            ds = load_wbc()
        elif req.csv_path:
            ds = load_csv(req.csv_path, label_column=req.label_column)
        else:
            raise HTTPException(status_code=422, detail="provide inline data, csv_path, or wbc")
        try:
            mode = MappingMode(
                kind=req.mapping.kind,
                offsets=tuple(req.mapping.offsets) if req.mapping.offsets else None,
                weights=tuple(req.mapping.weights) if req.mapping.weights else None,
            )
            graphs = [encode(p.values, mode) for p in ds.points]
            cfg = DiscoveryConfig(
                pitch=req.discovery.pitch,
                max_box_cells_x=req.discovery.max_box_cells_x,
                max_box_cells_y=req.discovery.max_box_cells_y,
                min_pure_support=req.discovery.min_pure_support,
                mini_threshold=req.discovery.mini_threshold,
            )
            engine = DiscoveryEngine(graphs, ds.labels, cfg)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        with registry_lock:
            sid = f"s{next(counter)}"
            session = Session(id=sid, ds=ds, mode=mode, engine=engine, graphs=graphs)
            sessions[sid] = session
        return state(session)

    @app.get("/api/v1/sessions/{sid}")
    def get_state(sid: str):
        return state(get_session(sid))

    @app.get("/api/v1/sessions/{sid}/candidates")
    def candidates(sid: str, limit: int = 50):
        session = get_session(sid)
        with session.lock:
            cands = session.engine.candidates(limit=limit)
            return {
                "state_token": session.version,
                "candidates": [
                    {"box": _box_obj(c.box), "stats": _stats_obj(c.stats)} for c in cands
                ],
            }

    @app.post("/api/v1/sessions/{sid}/accept")
    def accept(sid: str, req: AcceptRequest):
        session = get_session(sid)
        with session.lock:
            if req.state_token != session.version:
                raise HTTPException(
                    status_code=409,
                    detail="stale state token; refresh the candidate list",
                )
            try:
                step = session.engine.accept(Box(req.box.x1, req.box.x2, req.box.y1, req.box.y2))
            except (DiscoveryError, ValueError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            session.version += 1
            session.derived = None
            result = state(session)
            result["accepted_step"] = {
                "box": _box_obj(step.box),
                "target": step.target,
                "phase": step.phase,
                "stats": _stats_obj(step.stats),
            }
            return result

    @app.post("/api/v1/sessions/{sid}/undo")
    def undo(sid: str):
        session = get_session(sid)
        with session.lock:
            try:
                session.engine.undo()
            except DiscoveryError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            session.version += 1
            session.derived = None
            return state(session)

    @app.post("/api/v1/sessions/{sid}/autocomplete")
    def autocomplete(sid: str):
        session = get_session(sid)
        with session.lock:
            session.engine.run()
            session.version += 1
            session.derived = None
            return state(session)

    @app.post("/api/v1/sessions/{sid}/join")
    def join_rules(sid: str):
        session = get_session(sid)
        with session.lock:
            session.derived = join(session.ruleset, session.graphs)
            session.version += 1
            return state(session)

    @app.post("/api/v1/sessions/{sid}/prune")
    def prune_rules(sid: str, req: PruneRequest):
        session = get_session(sid)
        with session.lock:
            try:
                session.derived = prune(
                    session.ruleset,
                    session.graphs,
                    session.ds.labels,
                    threshold=req.threshold,
                    strategy=req.strategy,
                )
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            session.version += 1
            return state(session)

    @app.get("/api/v1/sessions/{sid}/metrics")
    def metrics(sid: str):
        session = get_session(sid)
        return state(session)["metrics"]

    @app.post("/api/v1/sessions/{sid}/classify")
    def classify_rows(sid: str, req: ClassifyRequest):
        session = get_session(sid)
        try:
            graphs = [encode(row, session.mode) for row in req.rows]
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        preds = sequential_assignments(session.ruleset, graphs)
        return {
            "predictions": [
                {"outcome": p.outcome, "rule": p.rule_id, "refused": p.refused} for p in preds
            ]
        }

    @app.get("/api/v1/sessions/{sid}/plot")
    def plot(sid: str, mirrored: bool = True, overlays: str = "accepted"):
        session = get_session(sid)
        active_ids = set(session.engine.grid.mask_ids(session.engine.active))
        points = [p for i, p in enumerate(session.ds.points) if i in active_ids]
        labels = [l for i, l in enumerate(session.ds.labels) if i in active_ids]
        if points:
            view = LabeledDataset(
                points=points, labels=labels, attribute_names=session.ds.attribute_names
            )
        else:
            view = LabeledDataset(points=[], labels=[], attribute_names=session.ds.attribute_names)
        boxes = ()
        if overlays == "accepted":
            boxes = tuple(
                BoxOverlay(box=s.box, stroke="black", label=s.box.id)
                for s in session.engine.trace.steps
            )
        svg = render_scene(view, RenderOptions(mode=session.mode, mirrored=mirrored, boxes=boxes))
        return Response(content=svg, media_type="image/svg+xml")

    @app.get("/api/v1/sessions/{sid}/export/ruleset")
    def export_ruleset(sid: str):
        session = get_session(sid)
        return PlainTextResponse(
            storage.dumps_ruleset(session.ruleset), media_type="application/jsonl"
        )

    @app.get("/api/v1/sessions/{sid}/export/trace")
    def export_trace(sid: str):
        session = get_session(sid)
        return PlainTextResponse(
            storage.dumps_trace(session.engine.trace), media_type="application/jsonl"
        )

    return app
