"""
tempocf - Explicações Contrafactuais com Conhecimento Temporal

Este pacote gera explicações contrafactuais para traces de atividades que, por construção,
satisfazem conhecimento de fundo temporal expresso em LTL sobre traces de processo (LTLp).
As fórmulas são compiladas em autômatos finitos determinísticos, e os operadores de
crossover e mutação de um algoritmo genético são restringidos por esses autômatos.
"""

__version__ = "1.0.0"
