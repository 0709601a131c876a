#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Modelo de uplink y = Hx + n com canal e ruído gaussianos complexos i.i.d.

Convenção de ruído: N₀ é a variância total de cada elemento complexo
(N₀/2 por dimensão real). SNR por antena receptora = K·E_s/N₀, em dB.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from erros import ErroConfiguracao, ErroDimensao


@dataclass(frozen=True)
class ChannelRealization:
    H: np.ndarray   # N×K
    n_rx: int
    n_users: int


@dataclass(frozen=True)
class NoiseParams:
    n0: float
    es: float
    snr_db: float

    @classmethod
    def from_snr(cls, snr_db: float, k: int, es: float) -> 'NoiseParams':
        return cls(n0=snr_to_n0(snr_db, k, es), es=es, snr_db=snr_db)


def trial_rng(master_seed: int, indice: int) -> np.random.Generator:
    """Gerador da tentativa ``indice``: função pura de (semente mestre, índice).

    Nenhum gerador é compartilhado entre tentativas, então execuções
    seriais e paralelas produzem as mesmas amostras.
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(indice)]))


def _gaussiana_complexa(rng: np.random.Generator, forma, variancia: float) -> np.ndarray:
    desvio = np.sqrt(variancia / 2.0)
    return desvio * (rng.standard_normal(forma) + 1j * rng.standard_normal(forma))


def amostrar_ruido(rng: np.random.Generator, forma, n0: float) -> np.ndarray:
    """Ruído CN(0, n0) com a forma pedida."""
    if n0 < 0:
        raise ErroConfiguracao(f"N₀ negativo: {n0}")
    return _gaussiana_complexa(rng, forma, n0)


def sample_channel(rng: np.random.Generator, n: int, k: int) -> ChannelRealization:
    """Canal N×K com coeficientes CN(0, 1)."""
    if not (n >= k >= 1):
        raise ErroConfiguracao(f"Dimensões de canal inválidas: N={n}, K={k} (exige N >= K >= 1)")
    return ChannelRealization(H=_gaussiana_complexa(rng, (n, k), 1.0), n_rx=n, n_users=k)


def snr_to_n0(snr_db: float, k: int, es: float) -> float:
    """N₀ = K·E_s / 10^(SNR/10)."""
    if k < 1 or not es > 0:
        raise ErroConfiguracao(f"Parâmetros de SNR inválidos: K={k}, Es={es}")
    return float(k * es / 10.0 ** (snr_db / 10.0))


def transmit(
    canal: ChannelRealization,
    x,
    n0: float,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """y = Hx + n, com n ~ CN(0, n0·I). Devolve (y, n).

    Aceita um vetor x de tamanho K ou um lote (T, K); no lote cada linha é
    uma transmissão independente.
    """
    H = canal.H if isinstance(canal, ChannelRealization) else np.asarray(canal)
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-1] != H.shape[1]:
        raise ErroDimensao(f"|x| = {x.shape[-1]} incompatível com K = {H.shape[1]}")
    limpo = x @ H.T
    ruido = amostrar_ruido(rng, limpo.shape, n0)
    return limpo + ruido, ruido
