"""HTTP service exposing the analysis, codec, and rendering pipelines.

All endpoints are stateless: each request carries the full input (PGM or
.dle bytes) and every response is computed fresh.  The CLI drives this app
in-process through an ASGI transport, so the service is also the single
place where input validation errors are mapped to status codes:

* 400 — malformed input file (PGM or container)
* 422 — invalid parameters
* 409 — container decoded but cannot be trusted to roundtrip
"""

import base64
import concurrent.futures
import os

import numpy as np
from fastapi import FastAPI, File, HTTPException, Response, UploadFile
from pydantic import BaseModel

from . import codec, delcore, formats, renderer
from .errors import (DelcodecError, DimensionError, EncodingError,
                     FormatError, UnsafeContainerError)

SCHEMA_VERSION = "delcodec-report/1"

app = FastAPI(title="delcodec", version="0.1.0")


class EntropyResponse(BaseModel):
    schema_id: str = SCHEMA_VERSION
    width: int
    height: int
    bit_depth: int
    kernel: str
    edge: str
    pgs: bool
    h_pixel: float
    h_fx: float
    h_fy: float
    h_joint: float
    h_delentropy: float
    h_quincunx_pairs: float | None
    tau: float
    support_bound_bits: float | None


class VerifyResponse(BaseModel):
    schema_id: str = SCHEMA_VERSION
    exact: bool
    max_prerounding_error: float
    bits_per_pixel: float
    payload_bits: int
    symbol_count: int


class CompareRow(BaseModel):
    name: str
    width: int
    height: int
    bit_depth: int
    h_pixel: float
    h_delentropy: float
    h_quincunx_pairs: float | None
    codec_bpp: float
    external: dict[str, float] = {}


class CompareResponse(BaseModel):
    schema_id: str = SCHEMA_VERSION
    rows: list[CompareRow]
    warnings: list[str] = []


def _read_image(data: bytes) -> delcore.ImageGrid:
    try:
        return formats.read_pgm(data)
    except FormatError as exc:
        raise HTTPException(status_code=400, detail=f"malformed image: {exc}")


def _entropy_report(image, kernel: str, edge: str, pgs: bool):
    try:
        return delcore.delentropy(image, kernel, edge, pgs)
    except (ValueError, DimensionError, DelcodecError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/entropy", response_model=EntropyResponse)
async def entropy(image: UploadFile = File(...), kernel: str = "a",
                  edge: str = "valid", pgs: bool = True):
    if kernel not in ("a", "c", "fourier"):
        raise HTTPException(status_code=422, detail=f"invalid kernel {kernel!r}")
    if edge not in ("valid", "circular"):
        raise HTTPException(status_code=422, detail=f"invalid edge mode {edge!r}")
    img = _read_image(await image.read())
    rep = _entropy_report(img, kernel, edge, pgs)
    return EntropyResponse(
        width=img.width, height=img.height, bit_depth=img.bit_depth,
        kernel=rep.kernel_id, edge=rep.edge, pgs=rep.pgs,
        h_pixel=rep.h_pixel, h_fx=rep.h_fx, h_fy=rep.h_fy,
        h_joint=rep.h_joint, h_delentropy=rep.h_delentropy,
        h_quincunx_pairs=rep.h_quincunx_pairs, tau=rep.tau,
        support_bound_bits=rep.support_bound_bits)


@app.post("/encode")
async def encode(image: UploadFile = File(...)):
    img = _read_image(await image.read())
    try:
        enc = codec.encode(img)
    except (DimensionError, EncodingError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    data = codec.serialize(enc)
    return Response(content=data, media_type="application/octet-stream",
                    headers={
                        "X-Delcodec-Bpp": f"{len(data) * 8 / (img.width * img.height):.6f}",
                        "X-Delcodec-Payload-Bits": str(enc.payload_bits),
                        "X-Delcodec-Symbols": str(enc.symbol_count),
                    })


@app.post("/decode")
async def decode(container: UploadFile = File(...)):
    data = await container.read()
    try:
        enc = codec.parse(data)
    except FormatError as exc:
        raise HTTPException(status_code=400, detail=f"malformed container: {exc}")
    try:
        img = codec.decode(enc)
    except UnsafeContainerError as exc:
        raise HTTPException(status_code=409, detail=str(exc))
    except FormatError as exc:
        raise HTTPException(status_code=400, detail=f"malformed container: {exc}")
    return Response(content=formats.write_pgm(img),
                    media_type="application/octet-stream")


@app.post("/verify", response_model=VerifyResponse)
async def verify(image: UploadFile = File(...)):
    img = _read_image(await image.read())
    try:
        enc = codec.encode(img)
    except (DimensionError, EncodingError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    dec, pre_err = codec.decode_with_diagnostics(enc)
    return VerifyResponse(
        exact=bool(np.array_equal(dec.pixels, img.pixels)),
        max_prerounding_error=pre_err,
        bits_per_pixel=codec.bits_per_pixel(enc),
        payload_bits=enc.payload_bits,
        symbol_count=enc.symbol_count)


@app.post("/density")
async def density(image: UploadFile = File(...), kernel: str = "a",
                  edge: str = "valid", method: str = "bin-bilinear",
                  size: int = 256, range_: float | None = None,
                  tone: str = "invert", gamma: float = 0.5,
                  format: str = "raw"):
    img = _read_image(await image.read())
    try:
        cfg = renderer.RenderConfig(size=size, range_=range_, method=method,
                                    tone=tone, gamma=gamma)
        grad = delcore.compute_gradient(img, kernel, edge)
        dimg = renderer.render(grad, cfg)
    except (ValueError, DimensionError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    if format == "raw":
        body = renderer.density_to_bytes(dimg)
    elif format == "pgm":
        export = renderer.tone_map_export(dimg, cfg)
        body = formats.write_pgm(delcore.ImageGrid(export, 16))
    else:
        raise HTTPException(status_code=422, detail=f"unknown format {format!r}")
    return Response(content=body, media_type="application/octet-stream",
                    headers={"X-Delcodec-Mass": f"{dimg.mass:.9f}",
                             "X-Delcodec-Range": f"{dimg.range_:.6f}"})


def _compare_one(name: str, data: bytes, kernel: str):
    img = formats.read_pgm(data)
    rep = delcore.delentropy(img, kernel, "valid", True)
    # Pair-symbol entropy uses the codec's own sampling (circular kernel c),
    # so it reflects what the container actually entropy-codes.
    from .entropy1d import shannon_entropy
    qdd = delcore.quincunx_pair_density(
        delcore.compute_gradient(img, "c", "circular"))
    h_pairs = shannon_entropy(qdd) if qdd is not None else None
    bpp = codec.bits_per_pixel(codec.encode(img))
    return CompareRow(name=name, width=img.width, height=img.height,
                      bit_depth=img.bit_depth, h_pixel=rep.h_pixel,
                      h_delentropy=rep.h_delentropy,
                      h_quincunx_pairs=h_pairs, codec_bpp=bpp)


def parse_manifest(text: str) -> tuple[dict, list[str]]:
    """Flat manifest: one "image label bpp" triple per line; '#' comments."""
    table: dict[str, dict[str, float]] = {}
    warnings = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            warnings.append(f"manifest line {lineno}: expected 'image label bpp'")
            continue
        name, label, raw = parts
        try:
            table.setdefault(name, {})[label] = float(raw)
        except ValueError:
            warnings.append(f"manifest line {lineno}: bad bpp {raw!r}")
    return table, warnings


@app.post("/compare", response_model=CompareResponse)
async def compare(images: list[UploadFile] = File(...),
                  manifest: UploadFile | None = None, kernel: str = "a"):
    named = [(up.filename or f"image{i}", await up.read())
             for i, up in enumerate(images)]
    external, warnings = ({}, [])
    if manifest is not None:
        external, warnings = parse_manifest((await manifest.read()).decode(
            "utf-8", errors="replace"))
    workers = int(os.environ.get("DELCODEC_THREADS", "0")) or None
    rows: list[CompareRow] = []
    try:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda nd: _compare_one(nd[0], nd[1], kernel),
                                 named))
    except FormatError as exc:
        raise HTTPException(status_code=400, detail=f"malformed image: {exc}")
    except (DimensionError, EncodingError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    known = {row.name for row in rows}
    for name in external:
        if name not in known:
            warnings.append(f"manifest references unknown image {name!r}")
    for row in rows:
        row.external = external.get(row.name, {})
    return CompareResponse(rows=rows, warnings=warnings)
