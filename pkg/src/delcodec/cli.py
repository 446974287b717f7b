"""Command-line client.

Every command is a thin HTTP client: by default it mounts the bundled
service in-process (no sockets, fully deterministic), and ``--server URL``
points the same commands at a remote instance instead.

Exit codes: 0 success, 1 I/O failure, 2 malformed input image,
3 invalid flags/parameters, 4 container decoded but not roundtrip-safe.
"""

import json
import os
import sys
import tempfile

import click
import httpx

from . import formats


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=300.0)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient
    from .service import app
    return TestClient(app, base_url="http://delcodec.local",
                      raise_server_exceptions=False)


def _read_file(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(1)


def _write_file(path: str, data: bytes) -> None:
    """Write atomically: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".delcodec-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        click.echo(f"error: cannot write {path}: {exc}", err=True)
        sys.exit(1)


def _fail_from_response(resp: httpx.Response) -> None:
    try:
        detail = resp.json().get("detail", resp.text)
    except ValueError:
        detail = resp.text
    click.echo(f"error: {detail}", err=True)
    if resp.status_code == 400:
        sys.exit(2)
    if resp.status_code == 409:
        sys.exit(4)
    if resp.status_code == 422:
        sys.exit(3)
    sys.exit(1)


def _post(client: httpx.Client, path: str, **kwargs) -> httpx.Response:
    try:
        resp = client.post(path, **kwargs)
    except httpx.HTTPError as exc:
        click.echo(f"error: request failed: {exc}", err=True)
        sys.exit(1)
    if resp.status_code != 200:
        _fail_from_response(resp)
    return resp


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Talk to a running service instead of the in-process app.")
@click.pass_context
def main(ctx, server):
    """Gradient-entropy analysis and lossless gradient-domain codec."""
    ctx.obj = server


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--kernel", type=click.Choice(["a", "c", "fourier"]), default="a")
@click.option("--edge", type=click.Choice(["valid", "wrap"]), default="valid")
@click.option("--no-pgs", is_flag=True, help="Report raw joint entropy, unhalved.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def entropy(server, input_path, kernel, edge, no_pgs, as_json):
    """Print entropy measures of a PGM image."""
    data = _read_file(input_path)
    with _client(server) as client:
        resp = _post(client, "/entropy",
                     files={"image": (os.path.basename(input_path), data)},
                     params={"kernel": kernel,
                             "edge": "circular" if edge == "wrap" else edge,
                             "pgs": not no_pgs})
    rep = resp.json()
    if as_json:
        click.echo(json.dumps(rep, indent=2, sort_keys=True))
        return
    click.echo(f"image: {input_path} ({rep['width']}x{rep['height']}, "
               f"{rep['bit_depth']}-bit)")
    click.echo(f"kernel={rep['kernel']} edge={rep['edge']} pgs={rep['pgs']}")
    click.echo(f"H1={rep['h_pixel']:.6f} Hdel={rep['h_delentropy']:.6f}")
    click.echo(f"Hfx={rep['h_fx']:.6f} Hfy={rep['h_fy']:.6f} "
               f"Hjoint={rep['h_joint']:.6f}")
    if rep["h_quincunx_pairs"] is not None:
        click.echo(f"Hpairs={rep['h_quincunx_pairs']:.6f}")
    if rep["support_bound_bits"] is not None:
        click.echo(f"tau={rep['tau']:.6f} "
                   f"support_bound={rep['support_bound_bits']:.6f}")


@main.command()
@click.argument("input_path", type=click.Path())
@click.argument("output_path", type=click.Path())
@click.pass_obj
def encode(server, input_path, output_path):
    """Compress a PGM image into a .dle container."""
    data = _read_file(input_path)
    with _client(server) as client:
        resp = _post(client, "/encode",
                     files={"image": (os.path.basename(input_path), data)})
    _write_file(output_path, resp.content)
    click.echo(f"bpp={float(resp.headers['X-Delcodec-Bpp']):.6f} "
               f"payload_bits={resp.headers['X-Delcodec-Payload-Bits']}")


@main.command()
@click.argument("input_path", type=click.Path())
@click.argument("output_path", type=click.Path())
@click.pass_obj
def decode(server, input_path, output_path):
    """Expand a .dle container back to PGM."""
    data = _read_file(input_path)
    with _client(server) as client:
        resp = _post(client, "/decode",
                     files={"container": (os.path.basename(input_path), data)})
    _write_file(output_path, resp.content)
    click.echo(f"wrote {output_path}")


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def verify(server, input_path, as_json):
    """Encode then decode in memory and report roundtrip exactness."""
    data = _read_file(input_path)
    with _client(server) as client:
        resp = _post(client, "/verify",
                     files={"image": (os.path.basename(input_path), data)})
    rep = resp.json()
    if as_json:
        click.echo(json.dumps(rep, indent=2, sort_keys=True))
    else:
        click.echo(f"exact={'true' if rep['exact'] else 'false'} "
                   f"max_err={rep['max_prerounding_error']:.6f} "
                   f"bpp={rep['bits_per_pixel']:.6f}")
    if not rep["exact"]:
        sys.exit(4)


def _density_common(server, input_path, output_path, method, size, range_,
                    tone, gamma, fmt):
    method_map = {"bin": "bin-nearest", "bilinear": "bin-bilinear",
                  "fourier": "fourier"}
    data = _read_file(input_path)
    params = {"method": method_map[method], "size": size, "tone": tone,
              "gamma": gamma, "format": fmt}
    if range_ is not None:
        params["range_"] = range_
    with _client(server) as client:
        resp = _post(client, "/density",
                     files={"image": (os.path.basename(input_path), data)},
                     params=params)
    _write_file(output_path, resp.content)
    click.echo(f"mass={float(resp.headers['X-Delcodec-Mass']):.6f} "
               f"range={float(resp.headers['X-Delcodec-Range']):.6f}")


_density_options = [
    click.argument("input_path", type=click.Path()),
    click.argument("output_path", type=click.Path()),
    click.option("--method", type=click.Choice(["bin", "bilinear", "fourier"]),
                 default="bilinear"),
    click.option("--size", type=int, default=256, metavar="K"),
    click.option("--range", "range_", type=float, default=None, metavar="R"),
    click.option("--tone", type=click.Choice(["linear", "invert", "gamma"]),
                 default="invert"),
    click.option("--gamma", type=float, default=0.5),
    click.option("--format", "fmt", type=click.Choice(["raw", "pgm"]),
                 default="raw"),
]


def _with_density_options(fn):
    for deco in reversed(_density_options):
        fn = deco(fn)
    return fn


@main.command()
@_with_density_options
@click.pass_obj
def density(server, **kwargs):
    """Render the gradient-pair density of a PGM image."""
    _density_common(server, **kwargs)


@main.command()
@_with_density_options
@click.pass_obj
def render(server, **kwargs):
    """Alias for `density`."""
    _density_common(server, **kwargs)


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@click.option("--external", "manifest_path", type=click.Path(), default=None,
              help="Flat manifest: one 'image label bpp' per line.")
@click.option("--format", "fmt", type=click.Choice(["table", "csv", "json"]),
              default="table")
@click.pass_obj
def compare(server, inputs, manifest_path, fmt):
    """Tabulate entropy measures and achieved rates for several images."""
    files = [("images", (os.path.basename(p), _read_file(p))) for p in inputs]
    if manifest_path is not None:
        files.append(("manifest", ("manifest", _read_file(manifest_path))))
    with _client(server) as client:
        resp = _post(client, "/compare", files=files)
    rep = resp.json()
    if fmt == "json":
        click.echo(json.dumps(rep, indent=2, sort_keys=True))
    else:
        labels = sorted({lab for row in rep["rows"] for lab in row["external"]})
        header = ["image", "dims", "depth", "H1", "Hdel", "Hpairs", "dle_bpp"]
        header += labels
        lines = [header]
        for row in rep["rows"]:
            pairs = ("" if row["h_quincunx_pairs"] is None
                     else f"{row['h_quincunx_pairs']:.6f}")
            cells = [row["name"], f"{row['width']}x{row['height']}",
                     str(row["bit_depth"]), f"{row['h_pixel']:.6f}",
                     f"{row['h_delentropy']:.6f}", pairs,
                     f"{row['codec_bpp']:.6f}"]
            cells += [("" if lab not in row["external"]
                       else f"{row['external'][lab]:.6f}") for lab in labels]
            lines.append(cells)
        if fmt == "csv":
            for cells in lines:
                click.echo(",".join(cells))
        else:
            widths = [max(len(r[i]) for r in lines) for i in range(len(header))]
            for cells in lines:
                click.echo("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    for warning in rep["warnings"]:
        click.echo(f"warning: {warning}", err=True)


@main.command()
@click.argument("kind", type=click.Choice(sorted(formats.GENERATORS)))
@click.argument("output_path", type=click.Path())
@click.option("--width", type=int, default=256)
@click.option("--height", type=int, default=256)
@click.option("--depth", type=int, default=8)
@click.option("--value", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--period", type=int, default=2)
@click.option("--radius", type=int, default=4)
def synth(kind, output_path, width, height, depth, value, seed, period, radius):
    """Generate a synthetic test image as PGM."""
    try:
        spec = formats.SyntheticSpec(generator=kind, width=width,
                                     height=height, bit_depth=depth,
                                     value=value, seed=seed, period=period,
                                     radius=radius)
        img = formats.synthesize(spec)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    _write_file(output_path, formats.write_pgm(img))
    click.echo(f"wrote {output_path}")


def entrypoint(argv=None):
    """Console entry point with the documented exit-code mapping."""
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 3
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1


if __name__ == "__main__":
    sys.exit(entrypoint())
