import numpy as np
import pytest
import torch
import torch.nn as nn

from residtrain import ResidualNet, TrainConfig, export_weights, numpy_forward, read_weights, train
from residtrain.data import TripletDataset
from residtrain.export import flatten_model, serialize, validate_chain

from conftest import make_synthetic_scene


def torch_forward(model, img):
    model.eval()
    with torch.no_grad():
        t = torch.from_numpy(np.moveaxis(img, 2, 0)[None])
        out = model(t)[0].numpy()
    return np.moveaxis(out, 0, 2)


class TestModel:
    def test_shapes(self):
        m = ResidualNet(depth=5, width=12)
        out = m(torch.rand(2, 3, 20, 24))
        assert out.shape == (2, 3, 20, 24)

    def test_depth_one(self):
        m = ResidualNet(depth=1, width=8)
        assert m(torch.rand(1, 3, 8, 8)).shape == (1, 3, 8, 8)

    def test_bn_toggle(self):
        with_bn = ResidualNet(depth=4, width=8, bn_enabled=True)
        without = ResidualNet(depth=4, width=8, bn_enabled=False)
        n_bn = sum(isinstance(m, nn.BatchNorm2d) for m in with_bn.modules())
        assert n_bn == 2  # depth-2 middle blocks
        assert sum(isinstance(m, nn.BatchNorm2d) for m in without.modules()) == 0


class TestExport:
    def test_identity_single_layer(self, tmp_path, rng=np.random.default_rng(0)):
        m = ResidualNet(depth=1)
        with torch.no_grad():
            m.body[0].weight.zero_()
            for c in range(3):
                m.body[0].weight[c, c, 1, 1] = 1.0
            m.body[0].bias.zero_()
        path = tmp_path / "id.bin"
        export_weights(m, path, "x4")
        layers, tag = read_weights(path)
        assert tag == "x4"
        img = rng.random((10, 10, 3)).astype(np.float32)
        assert np.abs(numpy_forward(layers, img) - img).max() < 1e-6

    def test_roundtrip_bit_exact(self, tmp_path):
        torch.manual_seed(3)
        m = ResidualNet(depth=4, width=8)
        m.eval()
        layers = flatten_model(m)
        path = tmp_path / "w.bin"
        path.write_bytes(serialize(layers, "x16"))
        back, tag = read_weights(path)
        assert tag == "x16"
        for a, b in zip(layers, back):
            assert np.array_equal(a.kernel, b.kernel)
            assert np.array_equal(a.bias, b.bias)
            if a.prelu is None:
                assert b.prelu is None
            else:
                assert np.array_equal(a.prelu, b.prelu)

    def test_refuses_final_activation(self, tmp_path):
        bad = nn.Sequential(nn.Conv2d(3, 3, 3, padding=1), nn.PReLU(3))
        with pytest.raises(ValueError):
            flatten_model(bad)

    def test_validate_chain_errors(self):
        torch.manual_seed(0)
        layers = flatten_model(ResidualNet(depth=3, width=4).eval())
        validate_chain(layers)
        with pytest.raises(ValueError):
            validate_chain([layers[0], layers[0]])  # 4 in != 3 out
        with pytest.raises(ValueError):
            validate_chain(layers[:2])  # ends at 4 channels

    def test_fold_matches_unfolded_after_training(self, tmp_path):
        # BN running stats must be folded correctly, not just the init
        # stats; train briefly so means/vars move.
        scene = make_synthetic_scene(tmp_path / "scene", seed=4)
        ds = TripletDataset([scene], ratio=4.0, patch_size=24, seed=0)
        cfg = TrainConfig(depth=4, width=8, batch_size=4, iterations=30,
                          seed=0, patch_size=24)
        model, _ = train(ds, cfg)
        model.eval()
        bn = [m for m in model.modules() if isinstance(m, nn.BatchNorm2d)][0]
        assert float(bn.running_mean.abs().max()) > 1e-3  # stats moved
        img = np.random.default_rng(5).random((16, 16, 3)).astype(np.float32)
        unfolded = torch_forward(model, img)
        folded = numpy_forward(flatten_model(model), img)
        assert np.abs(unfolded - folded).max() < 1e-5

    def test_export_creates_parents_and_verifies(self, tmp_path):
        torch.manual_seed(1)
        m = ResidualNet(depth=3, width=6)
        path = tmp_path / "deep" / "dir" / "w.bin"
        export_weights(m, path, "x16")
        assert path.exists()
        layers, tag = read_weights(path)
        assert tag == "x16" and len(layers) == 3
