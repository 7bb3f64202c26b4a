"""Curation HTTP service.

A stateless JSON API over the manifest store: review queue, decision
endpoint, progress stats and blob serving. The CLI and the browser UI are
equivalent clients; nothing here is UI-specific.
"""

from __future__ import annotations

import io
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Query, Response
from pydantic import BaseModel

from .harvest.store import BlobStore
from .manifest.records import CurationDecision
from .manifest.store import Manifest, ManifestError, record_doc

# Inclusion criteria checked by a human, not enforced by the service: the
# judgment calls are exactly what the curator is for.
CURATION_CHECKLIST = (
    "Scene is shot from a vehicle-style viewpoint with a plausible viewport",
    "Image is level (rotated no more than a few degrees)",
    "Exactly one incident type is visible (multi-incident images are rejected)",
)

_MEDIA_TYPES = {"JPEG": "image/jpeg", "PNG": "image/png", "GIF": "image/gif", "WEBP": "image/webp"}


class DecisionRequest(BaseModel):
    record_id: str
    verdict: str
    label: str | None = None
    reason: str | None = None
    curator_id: str = "anonymous"
    expected_version: int | None = None


def create_app(manifest_path: str | Path, blob_root: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="roadwatch curation service")
    manifest_path = Path(manifest_path)
    store = BlobStore(blob_root) if blob_root else None

    def get_manifest():
        manifest = Manifest(manifest_path)
        try:
            yield manifest
        finally:
            manifest.close()

    @app.get("/queue")
    def queue(
        class_id: str | None = Query(default=None, alias="class"),
        provider: str | None = None,
        language: str | None = None,
        limit: int = 20,
        manifest: Manifest = Depends(get_manifest),
    ):
        pending = list(
            manifest.records(
                status="pending", label=class_id, provider=provider, language=language
            )
        )
        pending.sort(key=lambda r: (r.rank if r.rank is not None else 1 << 30, r.id))
        items = [
            {
                "record": record_doc(rec),
                "image_url": f"/blob/{rec.blob_checksum}",
                "checklist": list(CURATION_CHECKLIST),
                "version": rec.version,
            }
            for rec in pending[: max(0, limit)]
        ]
        return {"items": items, "pending_total": len(pending)}

    @app.post("/decisions")
    def decide(body: DecisionRequest, manifest: Manifest = Depends(get_manifest)):
        try:
            decision = CurationDecision(
                record_id=body.record_id,
                verdict=body.verdict,
                label=body.label,
                reason=body.reason,
                curator_id=body.curator_id,
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            record = manifest.submit_decision(decision, expected_version=body.expected_version)
        except ManifestError as exc:
            status = {"unknown-record": 404, "version-conflict": 409}.get(exc.code, 422)
            raise HTTPException(status_code=status, detail=str(exc))
        return {"record": record_doc(record)}

    @app.get("/stats")
    def stats(manifest: Manifest = Depends(get_manifest)):
        classes = manifest.status_counts()
        by_class_provider: dict[str, dict[str, int]] = {}
        for rec in manifest.records(status="accepted"):
            per = by_class_provider.setdefault(rec.label, {})
            per[rec.provider] = per.get(rec.provider, 0) + 1
        totals = {"pending": 0, "accepted": 0, "rejected": 0}
        for counts in classes.values():
            for key in totals:
                totals[key] += counts[key]
        return {
            "classes": classes,
            "totals": totals,
            "curators": manifest.curator_counts(),
            "by_class_provider": by_class_provider,
        }

    @app.get("/records/{record_id}")
    def record_detail(record_id: str, manifest: Manifest = Depends(get_manifest)):
        record = manifest.get(record_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no record {record_id!r}")
        history = [
            {
                "verdict": d.verdict,
                "label": d.label,
                "reason": d.reason,
                "curator_id": d.curator_id,
                "decided_at": d.decided_at,
            }
            for d in manifest.decision_history(record_id)
        ]
        return {"record": record_doc(record), "history": history}

    @app.get("/blob/{checksum}")
    def blob(checksum: str):
        if store is None:
            raise HTTPException(status_code=404, detail="no blob store configured")
        try:
            data = store.read(checksum)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no blob {checksum}")
        media_type = "application/octet-stream"
        try:
            from PIL import Image

            with Image.open(io.BytesIO(data)) as img:
                media_type = _MEDIA_TYPES.get(img.format, media_type)
        except Exception:
            pass
        return Response(content=data, media_type=media_type)

    return app
