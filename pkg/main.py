"""
Ponto de entrada da linha de comando de inserção plug/socket.

Uso:
    python main.py train --config configs/experiment_easy.yaml --seed 0
    python main.py sweep --config configs/sweep_table.yaml
"""

import sys

from src.cli import cli_main

if __name__ == "__main__":
    sys.exit(cli_main(sys.argv[1:]))
