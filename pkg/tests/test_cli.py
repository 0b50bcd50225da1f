"""Config parsing, flag precedence, spec strings, and end-to-end pipeline
runs over a temp directory."""

import io

import numpy as np
import pytest

from htvseg import cli, imageio, metrics, phantom


def base_cfg(**overrides):
    cfg = {dest: default for _key, dest, _typ, default in cli._OPTIONS}
    cfg.update(overrides)
    return cfg


def test_read_config_forms(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# a comment\n"
        "lambda 0.25\n"
        "gamma = 2.5\n"
        "max-iter 40   # trailing comment\n"
        "unconstrained true\n"
        "out-dir results\n"
        "\n")
    cfg = cli._read_config(str(path))
    assert cfg == {"lam": 0.25, "gamma": 2.5, "max_iter": 40,
                   "unconstrained": True, "out_dir": "results"}


def test_read_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("lamda 0.1\n")
    with pytest.raises(ValueError):
        cli._read_config(str(path))


def test_read_config_rejects_malformed_line(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("lambda\n")
    with pytest.raises(ValueError):
        cli._read_config(str(path))


def test_read_config_rejects_bad_bool(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("unconstrained yes\n")
    with pytest.raises(ValueError):
        cli._read_config(str(path))


def test_flag_beats_config_beats_default(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("lambda 0.5\ngamma 3.0\n")
    args = cli._build_parser().parse_args(
        ["--config", str(path), "--gamma", "7.0"])
    cfg = cli._resolve(args)
    assert cfg["lam"] == 0.5       # from config
    assert cfg["gamma"] == 7.0     # flag wins
    assert cfg["mu1"] == 1.0       # default


def test_parse_phantom_specs():
    p = cli._parse_phantom("two,disk,16,16,0.2,0.8,5")
    assert p.image.shape == (16, 16)
    q = cli._parse_phantom("three,20,24,0.1,0.5,0.9")
    assert q.image.shape == (20, 24)
    assert set(np.unique(q.truth)) == {1, 2, 3}
    bars = cli._parse_phantom("two,bars,8,16,0.0,1.0,4")
    assert set(np.unique(bars.truth)) == {1, 2}


@pytest.mark.parametrize("spec", [
    "one,disk,8,8,0.2,0.8",
    "two,disk,8,8,0.2",
    "two,disk,8,eight,0.2,0.8",
    "",
])
def test_parse_phantom_rejects(spec):
    with pytest.raises(ValueError):
        cli._parse_phantom(spec)


def test_parse_degrade_specs():
    A, kernel = cli._parse_degrade("none", (8, 8))
    assert A.kind == "identity" and kernel is None
    A, kernel = cli._parse_degrade("gaussian,5,5", (8, 8))
    assert kernel.taps.shape == (5, 5)
    A, kernel = cli._parse_degrade("motion,7,0", (16, 16))
    assert kernel.taps.shape[0] == 1
    with pytest.raises(ValueError):
        cli._parse_degrade("box,3", (8, 8))
    with pytest.raises(ValueError):
        cli._parse_degrade("gaussian,5", (8, 8))


def test_pipeline_requires_exactly_one_source(tmp_path):
    with pytest.raises(ValueError):
        cli.run_pipeline(base_cfg(out_dir=str(tmp_path)), stdout=io.StringIO())
    both = base_cfg(input="x.pgm", phantom="two,disk,8,8,0.2,0.8",
                    out_dir=str(tmp_path))
    with pytest.raises(ValueError):
        cli.run_pipeline(both, stdout=io.StringIO())


def test_pipeline_clean_phantom_perfect_segmentation(tmp_path):
    out = tmp_path / "out"
    cfg = base_cfg(phantom="two,disk,48,48,0.2,0.8", max_iter=300,
                   out_dir=str(out))
    buf = io.StringIO()
    assert cli.run_pipeline(cfg, stdout=buf) == 0
    report = (out / "report.txt").read_text()
    assert "sa: 0\n" in report
    assert "degradation-mode: in-pipeline" in report
    for name in ("clean.rf64", "degraded.rf64", "degraded.pgm",
                 "restored.rf64", "restored.pgm", "stretched.rf64",
                 "labels.ri32", "labels.pgm", "recon.rf64", "recon.pgm",
                 "truth.ri32", "report.txt"):
        assert (out / name).exists(), name
    assert not (out / "kernel.txt").exists()  # no blur requested
    # timings go to stdout, never into the report
    assert "timings" in buf.getvalue()
    assert "timings" not in report


def test_pipeline_artifacts_recompute_reported_sa(tmp_path):
    out = tmp_path / "out"
    cfg = base_cfg(phantom="two,disk,32,32,0.2,0.8", noise_var=0.05,
                   seed=3, max_iter=150, out_dir=str(out))
    cli.run_pipeline(cfg, stdout=io.StringIO())
    labels = imageio.load_labels(out / "labels.ri32")
    truth = imageio.load_labels(out / "truth.ri32")
    reported = [line for line in (out / "report.txt").read_text().splitlines()
                if line.startswith("sa: ")][0]
    assert float(reported.split()[1]) == metrics.sa(labels, truth)


def test_pipeline_external_input_with_truth(tmp_path):
    ph = phantom.make_two_phase(24, 24, "disk", 0.2, 0.8, radius=7.0)
    img_path = tmp_path / "obs.rf64"
    truth_path = tmp_path / "truth.ri32"
    imageio.save_raw_float(ph.image, img_path)
    imageio.save_labels(ph.truth, truth_path)
    out = tmp_path / "out"
    cfg = base_cfg(input=str(img_path), truth=str(truth_path),
                   max_iter=150, out_dir=str(out))
    cli.run_pipeline(cfg, stdout=io.StringIO())
    report = (out / "report.txt").read_text()
    assert "degradation-mode: pre-applied" in report
    assert f"source: {img_path}" in report
    assert not (out / "clean.rf64").exists()  # no synthetic original
    # observation passes through untouched in pre-applied mode
    assert np.array_equal(imageio.load_image(out / "degraded.rf64"), ph.image)


def test_pipeline_apply_degrade_flag_degrades_external_input(tmp_path):
    ph = phantom.make_two_phase(16, 16, "disk", 0.2, 0.8, radius=5.0)
    img_path = tmp_path / "obs.rf64"
    imageio.save_raw_float(ph.image, img_path)
    out = tmp_path / "out"
    cfg = base_cfg(input=str(img_path), apply_degrade=True,
                   degrade="gaussian,3,1", max_iter=5, out_dir=str(out))
    cli.run_pipeline(cfg, stdout=io.StringIO())
    report = (out / "report.txt").read_text()
    assert "degradation-mode: in-pipeline" in report
    assert (out / "kernel.txt").exists()
    degraded = imageio.load_image(out / "degraded.rf64")
    assert not np.array_equal(degraded, ph.image)


def test_pipeline_truth_shape_mismatch(tmp_path):
    truth_path = tmp_path / "truth.ri32"
    imageio.save_labels(np.ones((4, 4), dtype=np.int32), truth_path)
    cfg = base_cfg(phantom="two,disk,8,8,0.2,0.8", truth=str(truth_path),
                   out_dir=str(tmp_path / "out"))
    with pytest.raises(ValueError):
        cli.run_pipeline(cfg, stdout=io.StringIO())


def test_pipeline_trace_file(tmp_path):
    out = tmp_path / "out"
    trace = tmp_path / "trace.tsv"
    cfg = base_cfg(phantom="two,disk,8,8,0.2,0.8", max_iter=6,
                   trace=str(trace), out_dir=str(out))
    cli.run_pipeline(cfg, stdout=io.StringIO())
    lines = trace.read_text().strip().splitlines()
    assert len(lines) >= 1
    assert all(len(line.split("\t")) == 8 for line in lines)


def test_main_exit_codes(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli.main(["--phantom", "two,disk,16,16,0.2,0.8",
                   "--max-iter", "5", "--out-dir", str(out)])
    assert rc == 0
    assert "report.txt" in capsys.readouterr().out
    rc = cli.main(["--out-dir", str(out)])  # no source at all
    assert rc == 1
    assert "error" in capsys.readouterr().err
    rc = cli.main(["--input", str(tmp_path / "missing.pgm"),
                   "--out-dir", str(out)])
    assert rc == 1


def test_main_reports_same_run_twice_identically(tmp_path, capsys):
    argv = ["--phantom", "two,disk,24,24,0.2,0.8", "--noise-var", "0.02",
            "--seed", "5", "--max-iter", "30"]
    rc1 = cli.main(argv + ["--out-dir", str(tmp_path / "a")])
    rc2 = cli.main(argv + ["--out-dir", str(tmp_path / "b")])
    capsys.readouterr()
    assert rc1 == rc2 == 0
    ra = (tmp_path / "a" / "report.txt").read_bytes()
    rb = (tmp_path / "b" / "report.txt").read_bytes()
    assert ra == rb
