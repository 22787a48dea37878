"""
Módulo para geração de tabelas de resultados e gráficos.
"""

import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
import plotly.figure_factory as ff
import plotly.graph_objects as go
from plotly.subplots import make_subplots

from src.utils import formatar_nivel_ruido, formatar_taxa_com_desvio

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["scene", "variant", "noise", "noise_label", "successes", "trials",
                  "mean_rate", "std_rate", "mean_steps_to_success"]


class ReportGenerator:
    """Classe para geração das tabelas e gráficos de uma execução."""

    def __init__(self, reports_path: str = "reports"):
        self.reports_path = reports_path
        os.makedirs(reports_path, exist_ok=True)

    def montar_tabela(self, resultados: pd.DataFrame,
                      variantes: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """
        Tabela de sucesso: linhas = variantes, colunas = cena × nível de ruído.

        Args:
            resultados: Uma linha por célula avaliada
            variantes: Ordem das linhas (padrão: ordem de aparição)

        Returns:
            DataFrame com células no formato "96.25±1.22%"
        """
        df = resultados.copy()
        df["cell"] = [formatar_taxa_com_desvio(m, s) for m, s in zip(df["mean_rate"], df["std_rate"])]
        df["column"] = [f"{cena} | {formatar_nivel_ruido(n)}" for cena, n in zip(df["scene"], df["noise"])]

        colunas = list(dict.fromkeys(df.sort_values(["scene", "noise"], kind="stable")["column"]))
        linhas = list(variantes) if variantes else list(dict.fromkeys(df["variant"]))
        tabela = df.pivot(index="variant", columns="column", values="cell")
        tabela = tabela.reindex(index=linhas, columns=colunas)
        tabela.index.name = "variant"
        tabela.columns.name = None
        return tabela

    def emit_table(self, resultados: List[Dict[str, Any]],
                   variantes: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        """
        Grava a tabela formatada, o CSV longo com precisão total e o espelho Excel.

        Args:
            resultados: Linhas de resultado por célula
            variantes: Ordem das linhas da tabela

        Returns:
            Dicionário com a tabela e os caminhos gerados
        """
        longo = pd.DataFrame(resultados, columns=RESULT_COLUMNS)
        tabela = self.montar_tabela(longo, variantes)

        caminho_longo = os.path.join(self.reports_path, "results.csv")
        caminho_tabela = os.path.join(self.reports_path, "results_table.csv")
        longo.to_csv(caminho_longo, index=False)
        tabela.to_csv(caminho_tabela)
        caminho_excel = self.gerar_relatorio_excel(tabela, longo)

        logger.info(f"Tabela de resultados gerada: {caminho_tabela}")
        return {
            "table": tabela,
            "results_csv": caminho_longo,
            "table_csv": caminho_tabela,
            "excel": caminho_excel,
        }

    def gerar_relatorio_excel(self, tabela: pd.DataFrame, longo: pd.DataFrame,
                              nome_arquivo: str = "results.xlsx") -> Optional[str]:
        """
        Espelho Excel da tabela e dos resultados completos.

        Returns:
            Caminho do arquivo ou None em caso de erro
        """
        arquivo_path = os.path.join(self.reports_path, nome_arquivo)
        try:
            with pd.ExcelWriter(arquivo_path, engine='xlsxwriter') as writer:
                tabela.to_excel(writer, sheet_name='Tabela')
                longo.to_excel(writer, sheet_name='Resultados', index=False)
                self._aplicar_formatacao_excel(writer, longo)

            logger.info(f"Relatório Excel gerado: {arquivo_path}")
            return arquivo_path

        except Exception as e:
            logger.error(f"Erro ao gerar relatório Excel: {str(e)}")
            return None

    def _aplicar_formatacao_excel(self, writer, longo: pd.DataFrame):
        workbook = writer.book
        formato_percentual = workbook.add_format({'num_format': '0.00%'})
        formato_header = workbook.add_format({
            'bold': True,
            'bg_color': '#D3D3D3',
            'border': 1
        })

        for sheet_name in writer.sheets:
            worksheet = writer.sheets[sheet_name]
            worksheet.set_column('A:Z', 18)
            worksheet.set_row(0, None, formato_header)

        resultados = writer.sheets['Resultados']
        for coluna in ("mean_rate", "std_rate"):
            idx = longo.columns.get_loc(coluna)
            resultados.set_column(idx, idx, 14, formato_percentual)

    # ==================== GRÁFICOS ====================

    def criar_grafico_campo(self, campo: pd.DataFrame, componente: str = "pf") -> go.Figure:
        """
        Campo potencial no plano y–z do socket (setas da translação).

        Args:
            campo: Saída de export_field
            componente: 'att', 'rep' ou 'pf'
        """
        if campo.empty:
            return go.Figure()

        fig = ff.create_quiver(
            campo["y"], campo["z"], campo[f"{componente}_ty"], campo[f"{componente}_tz"],
            scale=1.0, arrow_scale=0.3, name=componente, line=dict(width=1)
        )
        fig.update_layout(
            title=f"Campo potencial ({componente}) no plano y–z do socket",
            xaxis_title="y (mm)",
            yaxis_title="z (mm)",
            yaxis=dict(scaleanchor="x", scaleratio=1),
            height=600
        )
        return fig

    def criar_grafico_treino(self, log: pd.DataFrame) -> go.Figure:
        """Nível de ruído, β e taxa de sucesso ao longo do treino."""
        if log.empty:
            return go.Figure()

        fig = make_subplots(
            rows=1, cols=2,
            subplot_titles=('Currículo ao longo do treino', 'Sucesso versus nível de ruído'),
            specs=[[{"secondary_y": True}, {}]]
        )
        fig.add_trace(
            go.Scatter(x=log['env_steps'], y=log['noise_mm'], mode='lines', name='Ruído (mm)',
                       line=dict(color='blue')),
            row=1, col=1, secondary_y=False
        )
        fig.add_trace(
            go.Scatter(x=log['env_steps'], y=log['success_rate'], mode='lines', name='Sucesso',
                       line=dict(color='green', dash='dash')),
            row=1, col=1, secondary_y=True
        )
        fig.add_trace(
            go.Scatter(x=log['noise_mm'], y=log['success_rate'], mode='markers', name='Iterações',
                       marker=dict(size=6, color=log['iteration'], colorscale='Viridis')),
            row=1, col=2
        )
        fig.update_xaxes(title_text="Passos de ambiente", row=1, col=1)
        fig.update_xaxes(title_text="Ruído (mm / °)", row=1, col=2)
        fig.update_yaxes(title_text="Ruído (mm)", row=1, col=1, secondary_y=False)
        fig.update_yaxes(title_text="Taxa de sucesso", row=1, col=1, secondary_y=True)
        fig.update_yaxes(title_text="Taxa de sucesso", row=1, col=2)
        fig.update_layout(title_text="Progresso do treinamento", height=500)
        return fig

    def criar_grafico_trajetoria(self, trace: pd.DataFrame) -> go.Figure:
        """Posição real e observada do plug ao longo de um episódio."""
        fig = go.Figure()
        if trace.empty:
            return fig
        for eixo, cor in (("x", "red"), ("y", "green"), ("z", "blue")):
            fig.add_trace(go.Scatter(x=trace['step'], y=trace[f'true_t{eixo}'], mode='lines',
                                     name=f'{eixo} real', line=dict(color=cor)))
            fig.add_trace(go.Scatter(x=trace['step'], y=trace[f'obs_t{eixo}'], mode='markers',
                                     name=f'{eixo} observado', marker=dict(color=cor, size=4)))
        fig.update_layout(
            title="Trajetória do plug",
            xaxis_title="Passo",
            yaxis_title="Posição (mm)",
            hovermode='x unified'
        )
        return fig

    def salvar_grafico(self, fig: go.Figure, nome_arquivo: str) -> Optional[str]:
        """Grava a figura em HTML (plotly.js via CDN); devolve o caminho ou None."""
        arquivo_path = os.path.join(self.reports_path, f"{nome_arquivo}.html")
        if not fig.data:
            logger.warning(f"Gráfico vazio ignorado: {nome_arquivo}")
            return None

        try:
            fig.write_html(arquivo_path, include_plotlyjs="cdn")
            logger.info(f"Gráfico salvo: {arquivo_path}")
            return arquivo_path

        except Exception as e:
            logger.error(f"Erro ao salvar gráfico {nome_arquivo}: {str(e)}")
            return None
