"""HTTP API for the rule-annotation loop.

Candidates come from mining; annotators label each with a relation head
(NONE included) or discard it. State is an append-only JSONL event log
(last event per candidate wins) plus a periodic snapshot; replaying the
log reconstructs the store exactly. Because candidate bodies are
distinct, their hard-match sets are disjoint, so the live coverage
counter updates by exactly one rule's match count per decision.
"""

from __future__ import annotations

import base64
import binascii
import json
import threading
import time
from collections import defaultdict
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .data import Instance, RelationSchema, NONE_RELATION
from .rules import CandidateRule, LabelingRule
from .matching import stemmed_context

DISCARD = "discard"
SNAPSHOT_EVERY = 50


class AnnotationStore:
    def __init__(
        self,
        candidates: list[CandidateRule],
        corpus: list[Instance],
        schema: RelationSchema,
        log_path,
        snapshot_path=None,
    ):
        self.schema = schema
        self.candidates = sorted(candidates, key=lambda c: (-c.frequency, c.id))
        self.by_id = {c.id: c for c in self.candidates}
        self.corpus_by_id = {i.id: i for i in corpus}
        self.log_path = Path(log_path)
        self.snapshot_path = Path(snapshot_path) if snapshot_path else None
        self.decisions: dict[str, dict] = {}  # candidate id -> latest event
        self._lock = threading.Lock()
        self._events_since_snapshot = 0

        # instances grouped by candidate body; disjoint by construction
        matches = defaultdict(list)
        for inst in corpus:
            key = (inst.subj_type, stemmed_context(inst), inst.obj_type)
            matches[key].append(inst.id)
        self.match_ids = {
            c.id: matches.get((c.subj_type, c.stemmed_context, c.obj_type), [])
            for c in self.candidates
        }
        if self.log_path.exists():
            with open(self.log_path) as f:
                for line in f:
                    if line.strip():
                        self._apply(json.loads(line))

    def _apply(self, event: dict) -> None:
        self.decisions[event["candidate_id"]] = event

    def label(self, candidate_id: str, decision: str,
              annotator: str = "", note: str = "") -> dict:
        if candidate_id not in self.by_id:
            raise KeyError(candidate_id)
        if decision != DISCARD and decision not in self.schema:
            raise ValueError(f"unknown decision {decision!r}")
        event = {
            "candidate_id": candidate_id,
            "decision": decision,
            "annotator": annotator,
            "note": note,
            "ts": time.time(),
        }
        with self._lock:
            with open(self.log_path, "a") as f:
                f.write(json.dumps(event) + "\n")
            self._apply(event)
            self._events_since_snapshot += 1
            if self.snapshot_path and self._events_since_snapshot >= SNAPSHOT_EVERY:
                self.write_snapshot()
        return self.stats()

    def write_snapshot(self) -> None:
        if self.snapshot_path:
            with open(self.snapshot_path, "w") as f:
                json.dump(self.decisions, f)
            self._events_since_snapshot = 0

    def active_rules(self) -> list[LabelingRule]:
        out = []
        for c in self.candidates:
            ev = self.decisions.get(c.id)
            if ev and ev["decision"] != DISCARD:
                out.append(
                    LabelingRule(c.id, c.subj_type, c.obj_type,
                                 c.stemmed_context, ev["decision"])
                )
        return out

    def matched_count(self) -> int:
        return sum(
            len(self.match_ids[c.id])
            for c in self.candidates
            if (ev := self.decisions.get(c.id)) and ev["decision"] != DISCARD
        )

    def stats(self) -> dict:
        labeled = sum(
            1 for ev in self.decisions.values() if ev["decision"] != DISCARD
        )
        discarded = sum(
            1 for ev in self.decisions.values() if ev["decision"] == DISCARD
        )
        matched = self.matched_count()
        return {
            "total": len(self.candidates),
            "labeled": labeled,
            "discarded": discarded,
            "remaining": len(self.candidates) - labeled - discarded,
            "matched": matched,
            "unmatched": len(self.corpus_by_id) - matched,
        }

    def candidate_view(self, c: CandidateRule) -> dict:
        ev = self.decisions.get(c.id)
        examples = []
        for iid in c.example_ids:
            inst = self.corpus_by_id.get(iid)
            if inst is None:
                continue
            examples.append({
                "id": inst.id,
                "tokens": list(inst.tokens),
                "subj_span": list(inst.subj_span),
                "obj_span": list(inst.obj_span),
            })
        return {
            "id": c.id,
            "subj_type": c.subj_type,
            "obj_type": c.obj_type,
            "surface": list(c.surface_context),
            "pattern": list(c.stemmed_context),
            "frequency": c.frequency,
            "match_count": len(self.match_ids[c.id]),
            "decision": ev["decision"] if ev else None,
            "examples": examples,
        }


class LabelRequest(BaseModel):
    decision: str
    annotator: str = ""
    note: str = ""


def _encode_token(offset: int) -> str:
    return base64.urlsafe_b64encode(str(offset).encode()).decode()


def _decode_token(token: str) -> int:
    try:
        return int(base64.urlsafe_b64decode(token.encode()).decode())
    except (binascii.Error, ValueError, UnicodeDecodeError):
        raise HTTPException(status_code=400, detail="bad page token")


def create_app(store: AnnotationStore, token: str | None = None) -> FastAPI:
    app = FastAPI(title="rule annotation service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )
    app.state.store = store

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if token and request.headers.get("x-annotation-token") != token:
            return PlainTextResponse("missing or bad token", status_code=401)
        return await call_next(request)

    @app.get("/candidates")
    def candidates(status: str = "all", sort: str = "frequency",
                   page_token: str | None = None, page_size: int = 20):
        if status not in ("all", "unlabeled", "labeled", "discarded"):
            raise HTTPException(status_code=400, detail=f"bad status {status!r}")
        items = []
        for c in store.candidates:
            ev = store.decisions.get(c.id)
            state = (
                "unlabeled" if ev is None
                else "discarded" if ev["decision"] == DISCARD
                else "labeled"
            )
            if status in ("all", state):
                items.append(c)
        offset = _decode_token(page_token) if page_token else 0
        if offset < 0 or offset > len(items):
            raise HTTPException(status_code=400, detail="bad page token")
        page = items[offset : offset + page_size]
        next_token = (
            _encode_token(offset + page_size) if offset + page_size < len(items) else None
        )
        return {
            "items": [store.candidate_view(c) for c in page],
            "next_page_token": next_token,
            "total": len(items),
        }

    @app.post("/candidates/{candidate_id}/label")
    def label(candidate_id: str, req: LabelRequest):
        try:
            stats = store.label(candidate_id, req.decision, req.annotator, req.note)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no candidate {candidate_id}")
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e))
        return {"candidate_id": candidate_id, "decision": req.decision, "stats": stats}

    @app.get("/export/rules")
    def export_rules():
        lines = []
        for r in store.active_rules():
            lines.append(json.dumps({
                "id": r.id,
                "subj_type": r.subj_type,
                "obj_type": r.obj_type,
                "context": list(r.context),
                "head": r.head,
            }))
        return PlainTextResponse("\n".join(lines) + ("\n" if lines else ""))

    @app.get("/stats")
    def stats():
        return store.stats()

    @app.get("/schema")
    def schema():
        return {"relations": list(store.schema.relations),
                "none": NONE_RELATION}

    return app
