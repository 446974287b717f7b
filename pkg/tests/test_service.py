import warnings

import numpy as np
import pytest

from delcodec import formats, renderer
from delcodec.service import app, parse_manifest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from starlette.testclient import TestClient


@pytest.fixture(scope="module")
def client():
    return TestClient(app, raise_server_exceptions=False)


def pgm(generator, **kw):
    kw.setdefault("width", 32)
    kw.setdefault("height", 32)
    return formats.write_pgm(formats.synthesize(
        formats.SyntheticSpec(generator=generator, **kw)))


class TestEntropyEndpoint:
    def test_wedge(self, client):
        data = pgm("wedge-horizontal", width=256, height=256)
        r = client.post("/entropy", files={"image": ("w.pgm", data)})
        assert r.status_code == 200
        body = r.json()
        assert body["schema_id"] == "delcodec-report/1"
        assert body["h_pixel"] == 8.0
        assert body["h_delentropy"] == 0.0

    def test_bad_image_is_400(self, client):
        r = client.post("/entropy", files={"image": ("x", b"garbage")})
        assert r.status_code == 400

    def test_bad_kernel_is_422(self, client):
        r = client.post("/entropy", files={"image": ("w", pgm("constant"))},
                        params={"kernel": "q"})
        assert r.status_code == 422


class TestCodecEndpoints:
    def test_encode_decode_roundtrip(self, client):
        data = pgm("uniform-noise", seed=3)
        enc = client.post("/encode", files={"image": ("n.pgm", data)})
        assert enc.status_code == 200
        assert float(enc.headers["X-Delcodec-Bpp"]) > 0
        dec = client.post("/decode",
                          files={"container": ("n.dle", enc.content)})
        assert dec.status_code == 200
        assert dec.content == data

    def test_decode_garbage_is_400(self, client):
        r = client.post("/decode", files={"container": ("x", b"\x00" * 40)})
        assert r.status_code == 400

    def test_decode_tampered_is_409(self, client):
        data = pgm("uniform-noise", seed=4)
        enc = client.post("/encode", files={"image": ("n.pgm", data)}).content
        # bump a stored side-channel statistic (first i32 after the table)
        from delcodec import codec
        parsed = codec.parse(enc)
        parsed.side.row_means[0] += 7
        tampered = codec.serialize(parsed)
        r = client.post("/decode", files={"container": ("t.dle", tampered)})
        assert r.status_code == 409

    def test_odd_dims_are_422(self, client):
        data = pgm("constant", width=7, height=7)
        r = client.post("/encode", files={"image": ("c.pgm", data)})
        assert r.status_code == 422

    def test_verify(self, client):
        r = client.post("/verify",
                        files={"image": ("w.pgm", pgm("wedge-horizontal",
                                                      width=32, height=32))})
        body = r.json()
        assert body["exact"] is True
        assert body["max_prerounding_error"] < 0.5


class TestDensityEndpoint:
    def test_raw_density(self, client):
        r = client.post("/density",
                        files={"image": ("n.pgm", pgm("uniform-noise"))},
                        params={"size": 32})
        assert r.status_code == 200
        d = renderer.density_from_bytes(r.content)
        assert d.size == 32
        assert float(r.headers["X-Delcodec-Mass"]) == pytest.approx(1.0,
                                                                    abs=1e-6)

    def test_pgm_export(self, client):
        r = client.post("/density",
                        files={"image": ("n.pgm", pgm("uniform-noise"))},
                        params={"size": 32, "format": "pgm", "tone": "gamma"})
        img = formats.read_pgm(r.content)
        assert img.pixels.shape == (32, 32)

    def test_bad_method_is_422(self, client):
        r = client.post("/density",
                        files={"image": ("n.pgm", pgm("constant"))},
                        params={"method": "magic"})
        assert r.status_code == 422


class TestCompareEndpoint:
    def test_table_with_manifest(self, client):
        files = [
            ("images", ("wedge.pgm", pgm("wedge-horizontal",
                                         width=256, height=256))),
            ("images", ("noise.pgm", pgm("uniform-noise", seed=1))),
            ("manifest", ("m", b"wedge.pgm png 0.1\nghost.pgm png 9\n")),
        ]
        r = client.post("/compare", files=files)
        assert r.status_code == 200
        body = r.json()
        rows = {row["name"]: row for row in body["rows"]}
        assert rows["wedge.pgm"]["h_pixel"] == 8.0
        assert rows["wedge.pgm"]["h_delentropy"] == 0.0
        assert rows["wedge.pgm"]["external"] == {"png": 0.1}
        assert rows["noise.pgm"]["external"] == {}
        assert any("ghost.pgm" in w for w in body["warnings"])
        # input order is preserved
        assert [row["name"] for row in body["rows"]] == ["wedge.pgm",
                                                         "noise.pgm"]

    def test_empty_manifest_ok(self, client):
        r = client.post("/compare",
                        files=[("images", ("c.pgm", pgm("constant")))])
        assert r.status_code == 200
        assert r.json()["warnings"] == []


class TestManifestParsing:
    def test_comments_and_blank_lines(self):
        table, warnings_ = parse_manifest("# header\n\nimg png 1.5\n")
        assert table == {"img": {"png": 1.5}}
        assert warnings_ == []

    def test_bad_lines_warn(self):
        table, warnings_ = parse_manifest("too few\nimg png nan-ish-q\n")
        assert table == {}
        assert len(warnings_) == 2
