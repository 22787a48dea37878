import os

import pandas as pd
import pytest

from src.report_generator import ReportGenerator


def linha(scene, variant, noise, mean, std, successes=0, trials=600):
    return {"scene": scene, "variant": variant, "noise": noise, "noise_label": f"{noise:g}mm/{noise:g}°",
            "successes": successes, "trials": trials, "mean_rate": mean, "std_rate": std,
            "mean_steps_to_success": 40.0}


@pytest.fixture
def resultados():
    return [
        linha("easy_cylinder", "full", 0.0, 0.9625, 0.0122),
        linha("easy_cylinder", "full", 5.0, 0.85, 0.05),
        linha("easy_cylinder", "pf_only", 5.0, 0.4, 0.0),
        linha("easy_cylinder", "pf_only", 0.0, 1.0, 0.0),
    ]


def test_table_cells_are_formatted(resultados, tmp_path):
    tabela = ReportGenerator(str(tmp_path)).montar_tabela(pd.DataFrame(resultados), ["pf_only", "full"])
    assert list(tabela.index) == ["pf_only", "full"]
    assert list(tabela.columns) == ["easy_cylinder | 0mm/0°", "easy_cylinder | 5mm/5°"]
    assert tabela.loc["full", "easy_cylinder | 0mm/0°"] == "96.25±1.22%"
    assert tabela.loc["pf_only", "easy_cylinder | 5mm/5°"] == "40.00±0.00%"


def test_emit_table_writes_all_outputs(resultados, tmp_path):
    saidas = ReportGenerator(str(tmp_path)).emit_table(resultados, ["pf_only", "full"])
    for chave in ("results_csv", "table_csv", "excel"):
        assert os.path.exists(saidas[chave])

    relido = pd.read_csv(saidas["table_csv"], index_col="variant")
    assert relido.loc["full", "easy_cylinder | 5mm/5°"] == "85.00±5.00%"

    longo = pd.read_csv(saidas["results_csv"])
    assert longo["mean_rate"].tolist() == [0.9625, 0.85, 0.4, 1.0]

    with open(saidas["excel"], "rb") as f:
        assert f.read(2) == b"PK"


def test_missing_cell_shows_dash(tmp_path):
    tabela = ReportGenerator(str(tmp_path)).montar_tabela(pd.DataFrame([
        linha("easy_box", "full", 0.0, 0.9, 0.01),
        linha("easy_box", "pf_only", 1.0, 0.8, 0.02),
    ]))
    assert pd.isna(tabela.loc["full", "easy_box | 1mm/1°"])


def test_charts_are_saved_as_html(tmp_path):
    relatorios = ReportGenerator(str(tmp_path))
    log = pd.DataFrame({"iteration": [1, 2], "env_steps": [100, 200], "noise_mm": [0.0, 0.1],
                        "success_rate": [0.8, 0.9]})
    caminho = relatorios.salvar_grafico(relatorios.criar_grafico_treino(log), "training")
    assert caminho.endswith("training.html") and os.path.exists(caminho)
    assert relatorios.salvar_grafico(relatorios.criar_grafico_treino(pd.DataFrame()), "vazio") is None
