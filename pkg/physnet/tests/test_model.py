"""Model shape contracts and a finite-difference gradient oracle."""

import numpy as np
import pytest
import torch

from physnet_train import build_model, neg_pearson_loss


class TestShapes:
    def test_production_shape(self):
        model = build_model(3)
        x = torch.randn(2, 3, 148, 128, 128)
        with torch.no_grad():
            out = model(x)
        assert out.shape == (2, 148)

    @pytest.mark.parametrize("frames", [16, 20, 37])
    def test_output_length_tracks_input(self, frames):
        model = build_model(3, widths=(4, 4, 4, 4))
        x = torch.randn(1, 3, frames, 16, 16)
        with torch.no_grad():
            out = model(x)
        assert out.shape == (1, frames)

    def test_single_channel_supported(self):
        model = build_model(1, widths=(4, 4, 4, 4))
        x = torch.randn(2, 1, 16, 32, 32)
        with torch.no_grad():
            out = model(x)
        assert out.shape == (2, 16)

    def test_odd_spatial_sizes_survive_pooling(self):
        model = build_model(3, widths=(4, 4, 4, 4))
        x = torch.randn(1, 3, 16, 9, 11)
        with torch.no_grad():
            out = model(x)
        assert out.shape == (1, 16)

    def test_parameters_finite_after_init(self):
        model = build_model(3)
        for p in model.parameters():
            assert torch.all(torch.isfinite(p))


class TestGradient:
    def test_finite_difference_match_on_micro_model(self):
        torch.manual_seed(3)
        model = build_model(1, widths=(2, 2, 2, 2)).double()
        model.train()
        x = torch.randn(2, 1, 16, 8, 8, dtype=torch.float64)
        y = torch.randn(2, 16, dtype=torch.float64)

        def loss_value() -> float:
            with torch.no_grad():
                return float(neg_pearson_loss(model(x), y))

        model.zero_grad()
        neg_pearson_loss(model(x), y).backward()
        h = 1e-5
        checked = 0
        for param in model.parameters():
            grad = param.grad.reshape(-1)
            flat = param.data.reshape(-1)
            for k in range(flat.numel()):
                orig = float(flat[k])
                flat[k] = orig + h
                up = loss_value()
                flat[k] = orig - h
                down = loss_value()
                flat[k] = orig
                fd = (up - down) / (2.0 * h)
                an = float(grad[k])
                scale = max(abs(fd), abs(an))
                if scale < 1e-8:
                    continue  # both effectively zero
                assert abs(fd - an) <= 1e-3 * scale, (
                    f"param element {checked}: fd {fd:.6e} vs grad {an:.6e}")
                checked += 1
        assert checked > 300

    def test_training_step_reduces_loss_on_tiny_problem(self):
        torch.manual_seed(5)
        model = build_model(1, widths=(2, 2, 2, 2))
        x = torch.randn(2, 1, 16, 8, 8)
        y = torch.randn(2, 16)
        optimizer = torch.optim.Adam(model.parameters(), lr=1e-2)
        first = None
        for _ in range(60):
            optimizer.zero_grad()
            loss = neg_pearson_loss(model(x), y)
            if first is None:
                first = float(loss.detach())
            loss.backward()
            optimizer.step()
        assert float(loss.detach()) < first
