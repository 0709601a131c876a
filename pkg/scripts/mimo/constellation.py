#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Constelação M-QAM quadrada com rotulagem Gray.

Define o alfabeto Ω, o quantizador ⌈·⌋ (ponto mais próximo), o mapeamento
bits ↔ símbolos e as constantes geométricas d_min e E_s.

Convenções:
  - Pontos ordenados por (parte real, parte imaginária) crescentes; o índice
    do ponto é ``i_re * L + i_im`` com L = √M níveis por dimensão.
  - Rótulo de um ponto: Gray(i_re) seguido de Gray(i_im), MSB primeiro.
  - Empate no quantizador: menor parte real, depois menor parte imaginária.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from constants import ENERGIA_SIMBOLO_PADRAO, MODULACOES_SUPORTADAS
from erros import ErroConfiguracao, ErroDominio, ErroNumerico


@dataclass(frozen=True)
class Constellation:
    """Alfabeto M-QAM imutável (seguro para leitura concorrente)."""

    order: int
    points: np.ndarray          # (M,) complexo
    bit_labels: np.ndarray      # (M, log2 M) uint8
    d_min: float
    es: float
    levels: np.ndarray = field(repr=False)          # (L,) amplitudes por dimensão, crescentes
    indice_por_rotulo: np.ndarray = field(repr=False)  # rótulo inteiro -> índice do ponto

    @property
    def bits_per_symbol(self) -> int:
        return self.bit_labels.shape[1]

    @property
    def niveis_por_dimensao(self) -> int:
        return self.levels.shape[0]


def _gray(indice: np.ndarray) -> np.ndarray:
    return indice ^ (indice >> 1)


def _para_bits(valores: np.ndarray, largura: int) -> np.ndarray:
    deslocamentos = np.arange(largura - 1, -1, -1)
    return ((valores[:, None] >> deslocamentos) & 1).astype(np.uint8)


def _montar_pontos(niveis: np.ndarray, i_re: np.ndarray, i_im: np.ndarray) -> np.ndarray:
    pontos = np.empty(np.shape(i_re), dtype=np.complex128)
    pontos.real = niveis[i_re]
    pontos.imag = niveis[i_im]
    return pontos


def _somente_leitura(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def build_qam(M: int, es: float = ENERGIA_SIMBOLO_PADRAO) -> Constellation:
    """Constrói a QAM quadrada Gray com energia média ``es``.

    Args:
        M: Ordem da modulação (4, 16 ou 64).
        es: Energia média por símbolo (> 0).

    Returns:
        Constellation com pontos, rótulos, d_min e es.

    Raises:
        ErroConfiguracao: M não suportado ou es não positivo.
    """
    if M not in MODULACOES_SUPORTADAS:
        raise ErroConfiguracao(
            f"Modulação {M}-QAM não suportada (use uma de {MODULACOES_SUPORTADAS})"
        )
    if not es > 0:
        raise ErroConfiguracao(f"Energia média de símbolo deve ser positiva: {es!r}")

    L = int(round(np.sqrt(M)))
    bits_dim = int(np.log2(L))

    # Níveis ímpares ±1, ±3, ... ; energia média da grade não escalada = 2(M-1)/3
    escala = np.sqrt(es / (2.0 * (M - 1) / 3.0))
    niveis = escala * (2.0 * np.arange(L) - (L - 1))

    i_re, i_im = np.divmod(np.arange(M), L)
    pontos = _montar_pontos(niveis, i_re, i_im)

    rotulos = np.hstack([
        _para_bits(_gray(i_re), bits_dim),
        _para_bits(_gray(i_im), bits_dim),
    ])
    pesos = 1 << np.arange(rotulos.shape[1] - 1, -1, -1)
    rotulo_inteiro = rotulos.astype(np.int64) @ pesos
    indice_por_rotulo = np.empty(M, dtype=np.int64)
    indice_por_rotulo[rotulo_inteiro] = np.arange(M)

    return Constellation(
        order=M,
        points=_somente_leitura(pontos),
        bit_labels=_somente_leitura(rotulos),
        d_min=float(2.0 * escala),
        es=float(es),
        levels=_somente_leitura(niveis),
        indice_por_rotulo=_somente_leitura(indice_por_rotulo),
    )


def _nivel_mais_proximo(valores: np.ndarray, niveis: np.ndarray) -> np.ndarray:
    # argmin devolve o primeiro mínimo: em empate fica o nível menor
    return np.argmin(np.abs(valores[..., None] - niveis), axis=-1)


def quantize_indices(v, c: Constellation) -> np.ndarray:
    """Índices dos pontos mais próximos de cada elemento de ``v`` (qualquer forma)."""
    v = np.asarray(v, dtype=np.complex128)
    if not np.all(np.isfinite(v)):
        raise ErroNumerico("Quantização recebeu elemento não finito")
    i_re = _nivel_mais_proximo(v.real, c.levels)
    i_im = _nivel_mais_proximo(v.imag, c.levels)
    return i_re * c.niveis_por_dimensao + i_im


def quantize(v, c: Constellation) -> np.ndarray:
    """Operador ⌈·⌋: ponto de Ω mais próximo, elemento a elemento.

    Para QAM quadrada a decisão separável (real e imaginária independentes)
    é equivalente ao vizinho mais próximo em distância euclidiana.
    """
    return c.points[quantize_indices(v, c)]


def symbol_indices(s, c: Constellation) -> np.ndarray:
    """Índice em Ω de cada símbolo; exige que todos pertençam à constelação."""
    s = np.asarray(s, dtype=np.complex128)
    if not np.all(np.isfinite(s)):
        raise ErroDominio("Símbolo não finito não pertence à constelação")
    indices = quantize_indices(s, c)
    tolerancia = 1e-9 * c.d_min
    if np.any(np.abs(s - c.points[indices]) > tolerancia):
        raise ErroDominio(f"Símbolo fora da constelação {c.order}-QAM")
    return indices


def symbols_to_bits(s, c: Constellation) -> np.ndarray:
    """Símbolos → bits Gray (n símbolos geram n·log2(M) bits)."""
    indices = symbol_indices(np.ravel(s), c)
    return c.bit_labels[indices].reshape(-1)


def bits_to_symbols(b, c: Constellation) -> np.ndarray:
    """Bits Gray → símbolos; inversa de :func:`symbols_to_bits`."""
    b = np.asarray(b).reshape(-1)
    bps = c.bits_per_symbol
    if b.size % bps != 0:
        raise ErroDominio(
            f"Comprimento {b.size} não é múltiplo de {bps} bits por símbolo"
        )
    if not np.all((b == 0) | (b == 1)):
        raise ErroDominio("Vetor de bits contém valores diferentes de 0 e 1")
    pesos = 1 << np.arange(bps - 1, -1, -1)
    rotulos = b.reshape(-1, bps).astype(np.int64) @ pesos
    return c.points[c.indice_por_rotulo[rotulos]]


def random_symbols(rng: np.random.Generator, c: Constellation, size) -> np.ndarray:
    """Símbolos i.i.d. uniformes em Ω."""
    return c.points[rng.integers(0, c.order, size=size)]


def bit_errors(s_ref, s_hat, c: Constellation) -> int:
    """Número de bits diferentes entre duas sequências de símbolos de Ω."""
    i_ref = symbol_indices(s_ref, c)
    i_hat = symbol_indices(s_hat, c)
    if i_ref.shape != i_hat.shape:
        raise ErroDominio(f"Sequências com formas diferentes: {i_ref.shape} vs {i_hat.shape}")
    return int(np.count_nonzero(c.bit_labels[i_ref] != c.bit_labels[i_hat]))


def pares_adjacentes(c: Constellation) -> Tuple[np.ndarray, np.ndarray]:
    """Pares (i, j) de pontos vizinhos na grade (distância d_min)."""
    L = c.niveis_por_dimensao
    i_re, i_im = np.divmod(np.arange(c.order), L)
    horizontais = i_re < L - 1
    verticais = i_im < L - 1
    origem = np.concatenate([np.flatnonzero(horizontais), np.flatnonzero(verticais)])
    destino = np.concatenate([
        np.flatnonzero(horizontais) + L,
        np.flatnonzero(verticais) + 1,
    ])
    return origem, destino
