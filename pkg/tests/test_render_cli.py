import json
import re
import subprocess
import sys

import numpy as np
import pytest

from cornerlab import cli, render
from cornerlab.contours import trace_cycle
from cornerlab.errors import RenderRefused
from cornerlab.lattice import WindowSpec, constant_window, height_map


def _points(svg):
    return re.findall(r'<polyline class="cycle"[^>]*points="([^"]*)"', svg)


def test_four_cycle_polyline_is_closed():
    c = trace_cycle(constant_window((-4, 3), (-4, 3)), (0, 0))
    svg = render.render_cycle_svg(c, scale=10)
    (pts,) = _points(svg)
    p = pts.split()
    assert len(p) == 5 and p[0] == p[-1]
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_all_plus_window_draws_sixteen_cycles():
    svg = render.render_window_svg(constant_window((-4, 3), (-4, 3)))
    assert len(_points(svg)) == 16
    assert 'class="arcs"' not in svg


def test_height_colours_change_exactly_across_edges():
    w = WindowSpec.centered(6, 16).build()
    svg = render.render_height_svg(w, scale=4)
    faces = re.findall(r'<rect class="face" x="(\d+)" y="(\d+)"[^>]*fill="([^"]+)" data-height="(-?\d+)"',
                       svg)
    H = height_map(w)
    assert len(faces) == H.size
    colour = {}
    for _, _, fill, h in faces:
        assert colour.setdefault(int(h), fill) == fill
    assert len(set(colour.values())) == len(colour)
    # adjacent faces differ in height iff a present edge separates them
    # faces reach one cell past the vertex window; rows 1..ny-1 lie between vertex rows
    V = w.vertical_edges()
    ny = V.shape[1] + 1
    for i in range(H.shape[0] - 1):
        assert ((H[i, 1:ny] != H[i + 1, 1:ny]) == V[i]).all()


def test_rendering_is_byte_deterministic():
    a = render.render_window_svg(WindowSpec.centered(3, 24).build())
    b = render.render_window_svg(WindowSpec.centered(3, 24).build())
    assert a == b
    assert all(re.fullmatch(r"[\d, ]+", p) for p in _points(a))  # integer coordinates only


def test_render_budget_refusal():
    w = WindowSpec.centered(1, 64).build()
    with pytest.raises(RenderRefused) as ei:
        render.render_window_svg(w, scale=100, budget=10_000)
    assert "scale <=" in str(ei.value)


def test_report_json_drops_timing():
    text = render.report_json({"a": np.int64(3), "wall_time": 1.5, "b": (1, 2)})
    d = json.loads(text)
    assert d == {"a": 3, "b": [1, 2], "schema_version": 1, "version": d["version"]}
    assert "wall_time" in json.loads(render.report_json({"wall_time": 1.5}, timing=True))


def test_rle_roundtrip_2d():
    g = (np.arange(35).reshape(5, 7) % 3 == 0).astype(np.int8)
    assert (render.rle_decode(render.rle_encode(g)) == g).all()
    e = render.rle_encode(np.zeros((0,)))
    assert e["runs"] == []


# ---- CLI -------------------------------------------------------------------------

def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_exact_l_csv(capsys):
    code, out, _ = run(capsys, "exact-l", "--hmax", "16", "--exact-cutoff", "8", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "h,L,K,slope,L_rational"
    assert lines[1] == "1,4.0,4.0,,4/1"
    assert lines[2].endswith(",52/3")


def test_cli_exact_l_json_fit(capsys):
    code, out, _ = run(capsys, "exact-l", "--hmax", "64", "--h-lo", "8")
    d = json.loads(out)
    assert code == 0 and d["L"][0] == 4.0 and "fit" in d


def test_cli_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--seed", "3", "--samples", "10")
    d = json.loads(out)
    assert code == 0 and not any(d["violations"].values())
    assert d["checked"]["windows"] == 10


def test_cli_sample_svg_and_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "sample", "--size", "16", "--seed", "2", "--format", "svg")
    assert code == 0 and out.count('<polyline class="cycle"') >= 1
    code, out2, _ = run(capsys, "sample", "--size", "16", "--seed", "2", "--format", "svg")
    assert out == out2
    f = tmp_path / "s.csv"
    code, out, _ = run(capsys, "sample", "--size", "16", "--format", "csv", "--out", str(f))
    assert code == 0 and out == ""
    assert f.read_text().startswith("length,level,direction")


def test_cli_cycle_formats(capsys):
    code, out, _ = run(capsys, "cycle", "--seed", "17")
    d = json.loads(out)
    assert code == 0 and d["closed"] and len(d["vertices"]) == d["length"]
    code, out, _ = run(capsys, "cycle", "--seed", "17", "--format", "svg")
    assert code == 0 and len(_points(out)) == 1


def test_cli_estimate_reports(capsys):
    code, out, _ = run(capsys, "estimate", "L_mc", "--h", "1", "--samples", "20")
    d = json.loads(out)
    assert code == 0 and d["estimate"] == 4.0 and "wall_time" not in d
    code, out, _ = run(capsys, "estimate", "torus", "--n", "2", "--samples", "20", "--format", "csv")
    assert code == 0 and out.startswith("name,samples,estimate")
    code, out, _ = run(capsys, "estimate", "crossing", "--n", "8", "--samples", "20", "--timing")
    assert "wall_time" in json.loads(out)


def test_cli_variant(capsys):
    code, out, _ = run(capsys, "variant", "trixor", "--size", "32", "--samples", "2")
    d = json.loads(out)
    assert code == 0 and d["even_violations"] == 0
    code, out, _ = run(capsys, "variant", "2xor", "--size", "8", "--samples", "2", "--include-field")
    d = json.loads(out)
    assert code == 0 and len(d["open_fraction"]) == 2 and "horizontal" in d


@pytest.mark.parametrize("argv", [
    ["estimate", "nonsense"],
    ["exact-l", "--format", "svg"],
    ["estimate", "crossing", "--n", "1", "--samples", "5"],
    ["sample", "--size", "64", "--format", "svg", "--scale", "5000"],
    ["sample", "--bias", "1.5"],
])
def test_cli_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_cli_config_file_and_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 17, "format": "csv"}))
    code, out, _ = run(capsys, "cycle", "--config", str(cfg))
    assert code == 0 and out.startswith("x,y")
    code, out2, _ = run(capsys, "cycle", "--config", str(cfg), "--format", "json")
    assert json.loads(out2)["closed"]


def test_cli_threads_env(capsys, monkeypatch):
    code, a, _ = run(capsys, "estimate", "torus", "--n", "3", "--samples", "40")
    monkeypatch.setenv("CORNERLAB_THREADS", "2")
    args = cli.resolve(cli.build_parser().parse_args(["verify"]))
    assert args.threads == 2
    code, b, _ = run(capsys, "estimate", "torus", "--n", "3", "--samples", "40")
    assert code == 0 and a == b


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "cornerlab", "exact-l", "--hmax", "4", "--format", "csv"],
                       capture_output=True, text=True, timeout=120)
    assert r.returncode == 0 and r.stdout.splitlines()[1] == "1,4.0,4.0,,4/1"
    r = subprocess.run([sys.executable, "-m", "cornerlab", "--version"],
                       capture_output=True, text=True, timeout=120)
    assert r.returncode == 0 and "cornerlab" in r.stdout
