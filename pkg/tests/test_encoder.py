import os

import pytest
import torch

from emofuse.encoder import (
    OFFLINE_ENV,
    ClsEncoder,
    EncoderConfig,
    ProjectionHead,
    resolve_checkpoint,
)
from gradcheck import max_relative_error


class TestEncoderConfig:
    def test_defaults(self):
        cfg = EncoderConfig()
        assert cfg.checkpoint == "roberta-base"
        assert cfg.max_subword_len == 100
        assert cfg.projection_dim == 768

    def test_bad_values_rejected(self):
        with pytest.raises(ValueError):
            EncoderConfig(max_subword_len=1)
        with pytest.raises(ValueError):
            EncoderConfig(dropout_p=1.0)
        with pytest.raises(ValueError):
            EncoderConfig(projection_dim=0)


class TestCheckpointResolution:
    def test_local_path_override(self, tiny_checkpoint):
        cfg = EncoderConfig(checkpoint="roberta-base", local_path=str(tiny_checkpoint))
        assert resolve_checkpoint(cfg) == str(tiny_checkpoint)

    def test_missing_local_path(self, tmp_path):
        cfg = EncoderConfig(local_path=str(tmp_path / "absent"))
        with pytest.raises(FileNotFoundError, match="local_path"):
            resolve_checkpoint(cfg)

    def test_offline_mode_requires_directory(self, monkeypatch):
        monkeypatch.setenv(OFFLINE_ENV, "1")
        cfg = EncoderConfig(checkpoint="roberta-base")
        with pytest.raises(FileNotFoundError, match="offline mode"):
            resolve_checkpoint(cfg)

    def test_offline_mode_accepts_directory(self, monkeypatch, tiny_checkpoint):
        monkeypatch.setenv(OFFLINE_ENV, "1")
        cfg = EncoderConfig(checkpoint=str(tiny_checkpoint))
        assert resolve_checkpoint(cfg) == str(tiny_checkpoint)

    def test_unavailable_checkpoint_directory(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        with pytest.raises(FileNotFoundError, match="checkpoint unavailable"):
            ClsEncoder(EncoderConfig(checkpoint=str(empty)))


class TestClsEncoder:
    def test_cls_vector_is_768(self, base_encoder):
        vec = base_encoder.encode("a short essay about joy")
        assert vec.shape == (768,)
        assert torch.isfinite(vec).all()

    def test_identical_essays_identical_vectors(self, base_encoder):
        a = base_encoder.encode("the same words every time")
        b = base_encoder.encode("the same words every time")
        assert torch.equal(a, b)

    def test_truncation_invariance_past_the_limit(self, base_encoder):
        # far beyond 100 subwords, so an appended word falls off the end
        long_text = " ".join(["sadness"] * 150)
        a = base_encoder.encode(long_text)
        b = base_encoder.encode(long_text + " extra")
        assert torch.equal(a, b)

    def test_empty_text_encodes_markers_only(self, base_encoder):
        vec = base_encoder.encode("")
        assert vec.shape == (768,)
        assert torch.isfinite(vec).all()

    def test_tokenize_respects_max_subword_len(self, base_encoder):
        ids, mask = base_encoder.tokenize(["joy " * 300, "short text"])
        assert ids.shape == (2, base_encoder.cfg.max_subword_len)
        assert mask.shape == ids.shape

    def test_tokenize_empty_list(self, base_encoder):
        ids, mask = base_encoder.tokenize([])
        assert ids.shape == (0, base_encoder.cfg.max_subword_len)

    def test_frozen_parameters_take_no_gradients(self, base_encoder):
        assert all(not p.requires_grad for p in base_encoder.transformer.parameters())

    def test_frozen_transformer_stays_in_eval_mode(self, base_encoder):
        base_encoder.train()
        try:
            assert not base_encoder.transformer.training
        finally:
            base_encoder.eval()

    def test_frozen_weights_unchanged_by_optimizer_steps(self, tiny_checkpoint):
        cfg = EncoderConfig(checkpoint=str(tiny_checkpoint), freeze_encoder=True)
        encoder = ClsEncoder(cfg)
        head = ProjectionHead(encoder.hidden_size, 8, dropout_p=0.0)
        before = {k: v.clone() for k, v in encoder.transformer.state_dict().items()}
        opt = torch.optim.AdamW([p for p in [*encoder.parameters(), *head.parameters()] if p.requires_grad], lr=1e-2)
        ids, mask = encoder.tokenize(["anger and fury", "calm words"])
        for _ in range(3):
            loss = head(encoder(ids, mask)).pow(2).sum()
            opt.zero_grad()
            loss.backward()
            opt.step()
        after = encoder.transformer.state_dict()
        assert all(torch.equal(before[k], after[k]) for k in before)


class TestProjectionHead:
    def test_eval_mode_deterministic(self):
        torch.manual_seed(0)
        head = ProjectionHead(768, 768, dropout_p=0.5).eval()
        x = torch.randn(4, 768)
        assert torch.equal(head(x), head(x))

    def test_zero_dropout_train_equals_eval(self):
        torch.manual_seed(0)
        head = ProjectionHead(32, 16, dropout_p=0.0)
        x = torch.randn(4, 32)
        head.train()
        train_out = head(x)
        head.eval()
        assert torch.equal(train_out, head(x))

    def test_output_dim_matches_config(self):
        head = ProjectionHead(768, 123)
        assert head(torch.randn(2, 768)).shape == (2, 123)
        assert head.out_dim == 123

    def test_output_bounded_by_tanh_in_eval(self):
        head = ProjectionHead(16, 8).eval()
        out = head(torch.randn(100, 16) * 50)
        assert out.abs().max() <= 1.0

    def test_dropout_statistics(self):
        torch.manual_seed(123)
        p = 0.2
        head = ProjectionHead(4, 4, dropout_p=p)
        head.train()
        x = torch.ones(10_000)
        dropped = head.dropout(x)
        zero_fraction = (dropped == 0).float().mean().item()
        assert abs(zero_fraction - p) < 0.02
        survivors = dropped[dropped != 0]
        assert torch.allclose(survivors, torch.full_like(survivors, 1.0 / (1.0 - p)))

    def test_gradients_match_finite_differences(self):
        torch.manual_seed(5)
        head = ProjectionHead(24, 12, dropout_p=0.0).double()
        x = torch.randn(24, dtype=torch.float64, requires_grad=True)
        weights = torch.randn(12, dtype=torch.float64)

        def loss_fn():
            return (head(x) * weights).sum()

        tensors = [x, head.linear.weight, head.linear.bias]
        assert max_relative_error(loss_fn, tensors, samples_per_tensor=50) < 1e-3
