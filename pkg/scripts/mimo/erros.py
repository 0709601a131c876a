#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Exceções do simulador.

A CLI traduz a família em códigos de saída: configuração → 2,
falha numérica (divergência, singularidade, pré-condição) → 3.
"""


class ErroMimo(Exception):
    """Raiz de todas as falhas do simulador."""


class ErroConfiguracao(ErroMimo, ValueError):
    """Parâmetro inválido (modulação, SimConfig, guarda de busca exaustiva)."""


class ErroDimensao(ErroMimo, ValueError):
    """Formas de matrizes/vetores incompatíveis."""


class ErroDominio(ErroMimo, ValueError):
    """Valor fora do domínio esperado (símbolo fora de Ω, bits inválidos)."""


class ErroNumerico(ErroMimo, ArithmeticError):
    """Falha numérica genérica (entrada não finita, traço negativo)."""


class ErroSingularidade(ErroNumerico):
    """Matriz com posto deficiente ou pivô não positivo."""


class ErroDivergencia(ErroNumerico):
    """Iteração de inversão com resíduo crescente."""


class ErroPrecondicao(ErroNumerico):
    """Hipótese de uma verificação estatística não satisfeita."""
