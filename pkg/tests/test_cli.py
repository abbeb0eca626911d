import json

import numpy as np
import pytest

from brightfuse import cli
from brightfuse.crf import load_crf, make_gamma_crf, make_linear_crf, save_crf
from brightfuse.imgcore import load_image, save_png, to_u8
from brightfuse.synth import random_radiance, render_stack, save_radiance

from conftest import identity_layer, pack_weight_file


def run(argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def scene(tmp_path):
    """Rendered dark input + CRF file for pipeline commands."""
    crf = make_gamma_crf(2.2)
    crf_path = tmp_path / "crf.json"
    save_crf(crf, crf_path)
    stack = render_stack(random_radiance(3, 64, 64), crf)
    z1_path = tmp_path / "z1.png"
    save_png(stack.images[0], z1_path)
    return z1_path, crf_path, stack


class TestBrighten:
    def test_happy_path_no_cnn(self, tmp_path, scene):
        z1, crf_path, _ = scene
        out = tmp_path / "fused.png"
        code = run(["brighten", "--input", z1, "--crf", crf_path, "--no-cnn", "--out", out])
        assert code == 0
        fused = load_image(out)
        assert fused.shape == (64, 64, 3)
        # brightening: mean code goes up
        assert fused.mean() > load_image(z1).mean()

    def test_determinism_byte_identical(self, tmp_path, scene):
        z1, crf_path, _ = scene
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        assert run(["brighten", "--input", z1, "--crf", crf_path, "--no-cnn", "--out", a]) == 0
        assert run(["brighten", "--input", z1, "--crf", crf_path, "--no-cnn", "--out", b]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_tag_mismatch_is_usage_error(self, tmp_path, scene):
        z1, crf_path, _ = scene
        wpath = tmp_path / "w.bin"
        wpath.write_bytes(pack_weight_file([identity_layer()], tag="x4"))
        code = run([
            "brighten", "--input", z1, "--crf", crf_path,
            "--weights-x16", wpath, "--out", tmp_path / "o.png",
        ])
        assert code == 2

    def test_zero_weights_match_no_cnn(self, tmp_path, scene):
        z1, crf_path, _ = scene
        k = np.zeros((3, 3, 3, 3), dtype=np.float32)
        zero_layer = (k, np.zeros(3, dtype=np.float32), None)
        w4 = tmp_path / "w4.bin"
        w16 = tmp_path / "w16.bin"
        w4.write_bytes(pack_weight_file([zero_layer], tag="x4"))
        w16.write_bytes(pack_weight_file([zero_layer], tag="x16"))
        out_cnn = tmp_path / "cnn.png"
        out_plain = tmp_path / "plain.png"
        assert run([
            "brighten", "--input", z1, "--crf", crf_path,
            "--weights-x4", w4, "--weights-x16", w16, "--out", out_cnn,
        ]) == 0
        assert run([
            "brighten", "--input", z1, "--crf", crf_path, "--no-cnn", "--out", out_plain,
        ]) == 0
        assert out_cnn.read_bytes() == out_plain.read_bytes()

    def test_missing_input_is_io_error(self, tmp_path, scene):
        _, crf_path, _ = scene
        code = run([
            "brighten", "--input", tmp_path / "none.png", "--crf", crf_path,
            "--no-cnn", "--out", tmp_path / "o.png",
        ])
        assert code == 3

    def test_emit_intermediates_reproduce_fusion(self, tmp_path, scene):
        z1, crf_path, _ = scene
        out = tmp_path / "fused.png"
        inter = tmp_path / "inter"
        assert run([
            "brighten", "--input", z1, "--crf", crf_path, "--no-cnn",
            "--emit-intermediates", inter, "--out", out,
        ]) == 0
        for name in ("virtual_2.png", "virtual_3.png", "enhanced_2.png",
                     "enhanced_3.png", "weight_1.png", "weight_2.png", "weight_3.png"):
            assert (inter / name).exists()
        refused = tmp_path / "refused.png"
        assert run([
            "fuse", "--inputs", z1, inter / "enhanced_2.png", inter / "enhanced_3.png",
            "--psi1", "on", "--out", refused,
        ]) == 0
        a = load_image(out).astype(np.int16)
        b = load_image(refused).astype(np.int16)
        assert np.abs(a - b).max() <= 1


class TestVirtual:
    def test_writes_output(self, tmp_path, scene):
        z1, crf_path, _ = scene
        out = tmp_path / "v.png"
        assert run(["virtual", "--input", z1, "--crf", crf_path, "--ratio", 4, "--out", out]) == 0
        v = load_image(out)
        assert v.mean() > load_image(z1).mean()


class TestMefssim:
    def test_identity_score_printed(self, tmp_path, scene, capsys):
        z1, _, stack = scene
        paths = []
        for i, img in enumerate(stack.images):
            p = tmp_path / f"s{i}.png"
            save_png(img, p)
            paths.append(p)
        assert run(["mefssim", "--stack", *paths, "--fused", paths[0]]) == 0
        out = capsys.readouterr().out.strip()
        assert out.startswith("mefssim=")
        assert float(out.split("=")[1]) > 0.5

    def test_self_stack_near_one(self, tmp_path, scene, capsys):
        z1, _, _ = scene
        assert run(["mefssim", "--stack", z1, z1, "--fused", z1]) == 0
        score = float(capsys.readouterr().out.strip().split("=")[1])
        assert score >= 0.99

    def test_noise_lowers_cli_score(self, tmp_path, scene, capsys):
        z1, _, _ = scene
        img = load_image(z1)
        noisy = np.clip(
            img.astype(np.float64) + np.random.default_rng(0).normal(0, 12, img.shape),
            0, 255,
        ).astype(np.uint8)
        noisy_path = tmp_path / "noisy.png"
        save_png(noisy, noisy_path)
        assert run(["mefssim", "--stack", z1, z1, "--fused", z1]) == 0
        clean = float(capsys.readouterr().out.strip().split("=")[1])
        assert run(["mefssim", "--stack", z1, z1, "--fused", noisy_path]) == 0
        corrupted = float(capsys.readouterr().out.strip().split("=")[1])
        assert clean > corrupted

    def test_missing_file(self, tmp_path, capsys):
        code = run(["mefssim", "--stack", tmp_path / "a.png", tmp_path / "b.png",
                    "--fused", tmp_path / "f.png"])
        assert code == 3
        assert "error" in capsys.readouterr().err


class TestDecompose:
    def test_writes_layers(self, tmp_path, scene):
        z1, _, _ = scene
        base, detail = tmp_path / "b.png", tmp_path / "d.png"
        assert run(["decompose", "--input", z1, "--out-base", base, "--out-detail", detail]) == 0
        assert base.exists() and detail.exists()


class TestStackTools:
    def test_synth_constant_radiance_means(self, tmp_path):
        rad = np.full((24, 24, 3), 0.05, dtype=np.float32)
        rad_path = tmp_path / "r.npy"
        save_radiance(rad, rad_path)
        crf_path = tmp_path / "crf.json"
        save_crf(make_linear_crf(), crf_path)
        out_dir = tmp_path / "stack"
        assert run(["stack", "synth", "--radiance", rad_path, "--crf", crf_path,
                    "--out-dir", out_dir]) == 0
        sidecar = json.loads((out_dir / "exposures.json").read_text())
        assert sidecar["exposure_times"] == [1.0, 4.0, 16.0]
        means = [load_image(out_dir / f"exp_{i}.png").mean() for i in (1, 2, 3)]
        for got, want in zip(means, (12.75, 51.0, 204.0)):
            assert abs(got - want) <= 1.0, (got, want)

    def test_validate_ok(self, tmp_path):
        crf = make_gamma_crf(2.2)
        stack = render_stack(random_radiance(0, 32, 32), crf)
        from brightfuse.imgcore import save_stack

        save_stack(stack, tmp_path / "s")
        assert run(["stack", "validate", "--dir", tmp_path / "s"]) == 0

    def test_validate_size_mismatch(self, tmp_path):
        d = tmp_path / "s"
        d.mkdir()
        save_png(np.zeros((8, 8, 3), dtype=np.uint8), d / "exp_1.png")
        save_png(np.zeros((9, 8, 3), dtype=np.uint8), d / "exp_2.png")
        (d / "exposures.json").write_text('{"exposure_times": [1.0, 4.0]}')
        assert run(["stack", "validate", "--dir", d]) == 4

    def test_crf_estimate_recovers(self, tmp_path):
        truth = make_gamma_crf(2.2)
        rng = np.random.default_rng(2)
        radiance = np.exp(rng.uniform(np.log(1e-4), 0.0, (48, 48, 3)))
        stack = render_stack(radiance, truth)
        from brightfuse.imgcore import save_stack

        save_stack(stack, tmp_path / "s")
        out = tmp_path / "est.json"
        assert run(["crf", "estimate", "--stack-dir", tmp_path / "s",
                    "--samples", 400, "--out", out]) == 0
        est = load_crf(out)
        mid = slice(20, 236)
        for ch in range(3):
            got = est.tables[ch][mid] - est.tables[ch][128]
            want = truth.tables[ch][mid] - truth.tables[ch][128]
            assert float(np.sqrt(np.mean((got - want) ** 2))) < 0.05

    def test_synth_with_noise_differs_and_seeds(self, tmp_path):
        crf_path = tmp_path / "crf.json"
        save_crf(make_gamma_crf(2.2), crf_path)
        outs = []
        for name, seed in (("a", 1), ("b", 1), ("c", 2)):
            out_dir = tmp_path / name
            assert run(["stack", "synth", "--random-scene", 5, "--size", 32, 32,
                        "--crf", crf_path, "--noise-read", 2.0, "--seed", seed,
                        "--out-dir", out_dir]) == 0
            outs.append(load_image(out_dir / "exp_1.png"))
        assert np.array_equal(outs[0], outs[1])
        assert not np.array_equal(outs[0], outs[2])
