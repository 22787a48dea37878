import pytest
import torch

from src.exceptions import ChecksumMismatch
from src.learning.checkpoint import load_checkpoint, save_checkpoint, state_checksum
from src.learning.policy import ActorCritic, PolicyConfig

SMALL = PolicyConfig(actor_widths=(8,), lstm_widths=(8,), critic_widths=(8,))


@pytest.fixture
def saved(tmp_path):
    torch.manual_seed(0)
    agent = ActorCritic(SMALL, "full")
    path = tmp_path / "ckpt" / "checkpoint.pt"
    checksum = save_checkpoint(agent, str(path), extra={"iteration": 3, "noise_mm": 1.5})
    return agent, path, checksum


def test_roundtrip_preserves_parameters(saved):
    agent, path, checksum = saved
    loaded = load_checkpoint(str(path), expected_variant="full")
    assert loaded.cfg == SMALL
    assert state_checksum(loaded.state_dict()) == checksum
    for key, value in agent.state_dict().items():
        assert torch.equal(loaded.state_dict()[key], value)
    assert loaded.checkpoint_extra == {"iteration": 3, "noise_mm": 1.5}


def test_variant_mismatch_rejected(saved):
    _, path, _ = saved
    with pytest.raises(ChecksumMismatch):
        load_checkpoint(str(path), expected_variant="pf_residual_learned_beta")


def test_corrupted_parameters_rejected(saved):
    _, path, _ = saved
    payload = torch.load(str(path), weights_only=True)
    key = next(iter(payload["state_dict"]))
    payload["state_dict"][key] = payload["state_dict"][key] + 1.0
    torch.save(payload, str(path))
    with pytest.raises(ChecksumMismatch):
        load_checkpoint(str(path))


def test_unreadable_file_rejected(tmp_path):
    path = tmp_path / "lixo.pt"
    path.write_bytes(b"nao e um checkpoint")
    with pytest.raises(ChecksumMismatch):
        load_checkpoint(str(path))


def test_missing_file_propagates(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_checkpoint(str(tmp_path / "ausente.pt"))
