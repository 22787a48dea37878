import numpy as np

from src import __version__
from src.utils import (
    escrever_manifesto,
    file_checksum,
    formatar_duracao,
    formatar_nivel_ruido,
    formatar_percentual,
    formatar_taxa_com_desvio,
    hash_configuracao,
    ler_manifesto,
    semente_episodio,
)


def test_formatters():
    assert formatar_percentual(0.9625) == "96.25%"
    assert formatar_percentual(float("nan")) == "n/a"
    assert formatar_percentual(None) == "n/a"
    assert formatar_taxa_com_desvio(0.9625, 0.0122) == "96.25±1.22%"
    assert formatar_taxa_com_desvio(0.5, None) == "50.00±0.00%"
    assert formatar_nivel_ruido(5.0) == "5mm/5°"
    assert formatar_nivel_ruido(0.5) == "0.5mm/0.5°"
    assert formatar_duracao(3725) == "1h02m05s"
    assert formatar_duracao(65) == "1m05s"


def test_episode_seeds_are_stable():
    a = np.random.default_rng(semente_episodio(1, 4)).random()
    b = np.random.default_rng(semente_episodio(1, 4)).random()
    c = np.random.default_rng(semente_episodio(1, 5)).random()
    assert a == b != c


def test_config_hash_ignores_key_order():
    assert hash_configuracao({"a": 1, "b": [1, 2]}) == hash_configuracao({"b": (1, 2), "a": 1})
    assert hash_configuracao({"a": np.float64(1.5)}) == hash_configuracao({"a": 1.5})
    assert hash_configuracao({"a": 1}) != hash_configuracao({"a": 2})


def test_manifest_roundtrip(tmp_path):
    arquivo = tmp_path / "dados.csv"
    arquivo.write_text("x\n1\n")
    escrever_manifesto(str(tmp_path), {"env": {"horizon": 256}}, 3, {"data_sha256": file_checksum(str(arquivo))})
    manifesto = ler_manifesto(str(tmp_path))
    assert manifesto["seed"] == 3
    assert manifesto["version"] == __version__
    assert manifesto["config_hash"] == hash_configuracao({"env": {"horizon": 256}})
    assert manifesto["data_sha256"] == file_checksum(str(arquivo))
