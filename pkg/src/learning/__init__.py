"""
Aprendizado: codificação das observações, redes, PPO recorrente e treino.
"""
