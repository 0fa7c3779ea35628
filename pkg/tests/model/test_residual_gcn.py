import numpy as np
import pytest
import torch

from meshgcn.config import ModelConfig
from meshgcn.mesh import build_hierarchy, icosphere
from meshgcn.model import ResidualGCN, level_laplacians, count_parameters,\
    predict_proba, GraphMaxPool


CONFIG = ModelConfig(kernels_per_conv=4, K=3, n_blocks=2, fc_units=8,
                     post_resblock_units=4, precision='float64')


def test_output_shape(make_laplacians):
    model = ResidualGCN(CONFIG, make_laplacians(3), in_features=3)
    logits = model(torch.randn(5, 8, 3, dtype=torch.float64))
    assert logits.shape == (5, 2)


def test_structure(make_laplacians):
    model = ResidualGCN(CONFIG, make_laplacians(3), in_features=3)
    assert model.depth == 3
    assert model.post_level == 1
    assert len(model.blocks) == 2
    assert all(isinstance(p, GraphMaxPool) for p in model.pools)
    assert model.fc.in_features == 2 * 4
    assert model.logits.out_features == 2
    assert next(model.parameters()).dtype == torch.float64
    assert count_parameters(model) == sum(
        p.numel() for p in model.parameters()
    )


def test_laplacians_not_in_state_dict(make_laplacians):
    model = ResidualGCN(CONFIG, make_laplacians(3), in_features=3)
    assert not any(k.startswith('laplacian') for k in model.state_dict())
    assert model.laplacian(2).shape == (4, 4)


def test_probabilities_sum_to_one(make_laplacians):
    model = ResidualGCN(CONFIG, make_laplacians(3), in_features=3)
    probs = torch.softmax(model(torch.randn(4, 8, 3, dtype=torch.float64)),
                          dim=1)
    assert torch.allclose(probs.sum(dim=1),
                          torch.ones(4, dtype=torch.float64), atol=1e-7)


def test_identical_samples(make_laplacians):
    model = ResidualGCN(CONFIG, make_laplacians(3), in_features=3).eval()
    x = torch.randn(1, 8, 3, dtype=torch.float64).repeat(2, 1, 1)
    logits = model(x)
    assert torch.allclose(logits[0], logits[1], rtol=0, atol=1e-12)


def test_sibling_permutation(make_laplacians):
    torch.manual_seed(0)
    laps = make_laplacians(3)
    model = ResidualGCN(CONFIG, laps, in_features=3).eval()

    perm = torch.arange(8) ^ 1
    finest = laps[3].to_dense()[perm][:, perm].to_sparse()
    permuted = ResidualGCN(CONFIG, laps[:3] + [finest], in_features=3).eval()
    permuted.load_state_dict(model.state_dict())

    x = torch.randn(3, 8, 3, dtype=torch.float64)
    assert torch.allclose(model(x), permuted(x[:, perm]), atol=1e-12)


def _tree_permutations(depth, top, seed):
    """Random relabelings of levels ``top..depth`` that keep the pooling
    tree: the children of new vertex ``j`` are the (possibly swapped)
    children of old vertex ``perm[j]``."""
    rng = np.random.RandomState(seed)
    perms = {top: torch.arange(2 ** top)}
    for level in range(top, depth):
        parent = perms[level]
        flips = torch.from_numpy(rng.randint(2, size=len(parent)))
        child = torch.empty(2 * len(parent), dtype=torch.long)
        for b in range(2):
            child[b::2] = 2 * parent + (b ^ flips)
        perms[level + 1] = child
    return perms


def test_tree_relabeling(make_laplacians):
    torch.manual_seed(1)
    laps = make_laplacians(4)
    model = ResidualGCN(CONFIG, laps, in_features=3).eval()

    perms = _tree_permutations(4, model.post_level, seed=3)
    assert not torch.equal(perms[4], torch.arange(16))
    permuted_laps = [
        lap if level not in perms
        else lap.to_dense()[perms[level]][:, perms[level]].to_sparse()
        for level, lap in enumerate(laps)
    ]
    permuted = ResidualGCN(CONFIG, permuted_laps, in_features=3).eval()
    permuted.load_state_dict(model.state_dict())

    x = torch.randn(3, 16, 3, dtype=torch.float64)
    assert torch.allclose(model(x), permuted(x[:, perms[4]]), atol=1e-12)


def test_no_blocks(make_laplacians):
    config = ModelConfig(kernels_per_conv=4, n_blocks=0, fc_units=8,
                         post_resblock_units=4, precision='float64')
    model = ResidualGCN(config, make_laplacians(2), in_features=3)
    assert model(torch.randn(2, 4, 3, dtype=torch.float64)).shape == (2, 2)


def test_too_many_blocks(make_laplacians):
    with pytest.raises(ValueError):
        ResidualGCN(CONFIG, make_laplacians(1), in_features=3)


def test_bad_laplacian_shape(make_laplacians):
    laps = make_laplacians(3)
    with pytest.raises(ValueError):
        ResidualGCN(CONFIG, laps[:3] + [laps[2]], in_features=3)


def test_bad_input_shape(make_laplacians):
    model = ResidualGCN(CONFIG, make_laplacians(3), in_features=3)
    with pytest.raises(ValueError):
        model(torch.randn(2, 4, 3, dtype=torch.float64))
    with pytest.raises(ValueError):
        model(torch.randn(8, 3, dtype=torch.float64))


def test_predict_proba(make_laplacians):
    model = ResidualGCN(CONFIG, make_laplacians(3), in_features=3)
    model.train()
    x = torch.randn(7, 8, 3, dtype=torch.float64)
    probs = predict_proba(model, x, batch_size=3)

    assert probs.shape == (7,)
    assert ((probs >= 0) & (probs <= 1)).all()
    assert model.training

    model.eval()
    exp = torch.softmax(model(x), dim=1)[:, 1]
    assert torch.allclose(probs, exp)


def test_level_laplacians():
    h = build_hierarchy(icosphere(subdivisions=2, radius=10.0), sigma=2.0,
                        stop_distance=1e-6, max_levels=3)
    laps = level_laplacians(h, 'computed', torch.float64)
    assert [lap.shape[0] for lap in laps] == [1, 2, 4, 8]
    for lap in laps:
        assert lap.is_sparse
        eigvals = np.linalg.eigvalsh(lap.to_dense().numpy())
        assert eigvals.min() >= -1 - 1e-4
        assert eigvals.max() <= 1 + 1e-4

    fixed = level_laplacians(h, 'fixed', torch.float32)
    assert fixed[0].dtype == torch.float32

    with pytest.raises(ValueError):
        level_laplacians(h, 'unknown')
