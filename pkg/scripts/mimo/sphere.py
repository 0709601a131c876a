#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Sphere decoder híbrido com raio de Babai aproximado, mais as referências
SE-SD (raio infinito, aperto adaptativo), FP-SD (raio fixo) e o oráculo ML
por força bruta.

Todas as métricas e raios são normas ao quadrado. A busca percorre as
camadas de K-1 até 0 (última linha de R primeiro) sobre Ω complexa, com os
filhos ordenados por custo crescente (empate: menor índice na constelação).
Métrica de complexidade: ``nodes_visited`` = número de métricas parciais
c_j avaliadas (M por camada expandida).
"""

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np
import scipy.linalg

from constants import (
    FOLGA_ABSOLUTA_RAIO,
    FOLGA_RELATIVA_RAIO,
    LIMITE_FORCA_BRUTA,
    TAMANHO_LOTE_FORCA_BRUTA,
    TOLERANCIA_EMPATE_RAIO,
    Esquema,
    ModoRaio,
)
from constellation import Constellation, quantize
from detect import InverseProvider
from erros import ErroConfiguracao, ErroDimensao

logger = logging.getLogger(__name__)

# Modo de raio aceito por esquema
_MODOS_PERMITIDOS = {
    Esquema.PROPOSTO: (ModoRaio.BABAI_APROX,),
    Esquema.SE_SD: (ModoRaio.INFINITO,),
    Esquema.FP_SD: (ModoRaio.BABAI_EXATO, ModoRaio.FIXO),
    Esquema.FORCA_BRUTA: (ModoRaio.INFINITO,),
}

_MODO_PADRAO = {
    Esquema.PROPOSTO: ModoRaio.BABAI_APROX,
    Esquema.SE_SD: ModoRaio.INFINITO,
    Esquema.FP_SD: ModoRaio.BABAI_EXATO,
    Esquema.FORCA_BRUTA: ModoRaio.INFINITO,
}


@dataclass(frozen=True)
class SdConfig:
    """Esquema de busca + provedor de inversa (raio de Babai) + modo de raio."""

    scheme: Esquema
    inverse: InverseProvider = field(default_factory=InverseProvider.exact)
    radius_mode: Optional[ModoRaio] = None
    radius_value: Optional[float] = None

    def __post_init__(self):
        esquema = Esquema(self.scheme)
        object.__setattr__(self, 'scheme', esquema)
        modo = ModoRaio(self.radius_mode) if self.radius_mode is not None else _MODO_PADRAO[esquema]
        object.__setattr__(self, 'radius_mode', modo)

        if modo not in _MODOS_PERMITIDOS[esquema]:
            raise ErroConfiguracao(
                f"Modo de raio {modo.value!r} incompatível com o esquema {esquema.value!r}"
            )
        if modo == ModoRaio.FIXO:
            if self.radius_value is None or not self.radius_value >= 0:
                raise ErroConfiguracao(f"Raio fixo exige valor >= 0 (recebido {self.radius_value!r})")
        if esquema == Esquema.PROPOSTO and self.inverse.is_exact:
            logger.info("SD proposto com inversa exata: raio inicial = raio de Babai exato")


@dataclass(frozen=True)
class SearchStats:
    nodes_visited: int
    leaf_updates: int
    radius_initial_sq: float
    radius_final_sq: float
    found: bool
    first_leaf_sq: float = float('inf')      # custo da primeira folha alcançada
    fallback: bool = False                   # devolveu o vetor de reserva
    historico_raio: Tuple[float, ...] = ()   # limite após cada aperto


class ResultadoSd(NamedTuple):
    x_hat: np.ndarray
    stats: SearchStats
    flops: int      # pré-processamento do raio (inversa + produto)


@dataclass
class _Busca:
    melhor: Optional[np.ndarray]
    custo: float
    nos: int
    apertos: int
    primeira_folha: float
    historico: Tuple[float, ...]


# ---------------------------------------------------------------------------
# Validação
# ---------------------------------------------------------------------------

def _validar_triangular(z, R) -> Tuple[np.ndarray, np.ndarray]:
    z = np.asarray(z, dtype=np.complex128)
    R = np.asarray(R, dtype=np.complex128)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ErroDimensao(f"R deve ser K×K (recebido {R.shape})")
    if z.shape != (R.shape[0],):
        raise ErroDimensao(f"|z| = {z.shape} incompatível com R {R.shape}")
    return z, R


# ---------------------------------------------------------------------------
# Raio de Babai
# ---------------------------------------------------------------------------

def babai_radius_sq(R, x_q, x_u) -> float:
    """||R(x_q - x_u)||².

    Com x_u = C⁻¹g é r_e²; com x_u = C_k g é r_k².
    """
    R = np.asarray(R, dtype=np.complex128)
    x_q = np.asarray(x_q, dtype=np.complex128)
    x_u = np.asarray(x_u, dtype=np.complex128)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ErroDimensao(f"R deve ser K×K (recebido {R.shape})")
    if x_q.shape != (R.shape[1],) or x_u.shape != x_q.shape:
        raise ErroDimensao(f"Formas incompatíveis: R {R.shape}, x_q {x_q.shape}, x_u {x_u.shape}")
    residuo = R @ (x_q - x_u)
    return float(np.vdot(residuo, residuo).real)


# ---------------------------------------------------------------------------
# Busca em profundidade
# ---------------------------------------------------------------------------

def _buscar(z: np.ndarray, R: np.ndarray, c: Constellation, limite_sq: float, apertar: bool) -> _Busca:
    """Percorre a árvore com limite ``limite_sq``.

    O limite inicial finito recebe uma folga relativa, para que a folha de
    Babai, cujo custo é o próprio raio, não seja podada por arredondamento.
    apertar=True: poda com custo >= limite e aperta o limite a cada folha
    (SE-SD / proposto). apertar=False: raio fixo inclusivo, sem aperto (FP-SD).
    """
    K = R.shape[0]
    pontos = c.points
    M = pontos.size
    diagonal = R.diagonal()

    escolha = np.zeros(K, dtype=np.int64)
    simbolos = np.zeros(K, dtype=np.complex128)
    custo_acumulado = np.zeros(K + 1)   # custo das camadas >= i
    ordens = [None] * K
    totais = [None] * K
    posicao = [0] * K

    limite = limite_sq
    if np.isfinite(limite_sq):
        limite = limite_sq * (1.0 + FOLGA_RELATIVA_RAIO) + FOLGA_ABSOLUTA_RAIO

    busca = _Busca(melhor=None, custo=float('inf'), nos=0, apertos=0,
                   primeira_folha=float('inf'), historico=())
    historico = []

    def expandir(i: int):
        # z̃_i: interferência das camadas já decididas
        centro = z[i] - R[i, i + 1:] @ simbolos[i + 1:]
        total = custo_acumulado[i + 1] + np.abs(centro - diagonal[i] * pontos) ** 2
        totais[i] = total
        ordens[i] = np.argsort(total, kind='stable')
        posicao[i] = 0
        busca.nos += M

    i = K - 1
    expandir(i)
    while i < K:
        if posicao[i] >= M:
            i += 1
            continue

        j = ordens[i][posicao[i]]
        posicao[i] += 1
        total = float(totais[i][j])
        dentro = total < limite if apertar else total <= limite
        if not dentro:
            # filhos ordenados: os seguintes também ficam fora
            posicao[i] = M
            continue

        escolha[i] = j
        simbolos[i] = pontos[j]
        if i > 0:
            custo_acumulado[i] = total
            i -= 1
            expandir(i)
            continue

        # folha
        if busca.primeira_folha == float('inf'):
            busca.primeira_folha = total
        if total < busca.custo:
            busca.custo = total
            busca.melhor = escolha.copy()
        if apertar:
            limite = total
            busca.apertos += 1
            historico.append(total)
            posicao[0] = M

    busca.historico = tuple(historico)
    return busca


def _reserva(z: np.ndarray, R: np.ndarray, c: Constellation) -> np.ndarray:
    return quantize(scipy.linalg.solve_triangular(R, z, lower=False), c)


def sd_proposed(
    z,
    R,
    c: Constellation,
    cost0_sq: float,
    x_fallback=None,
) -> Tuple[np.ndarray, SearchStats]:
    """SD híbrido: limite inicial r_k², aperto adaptativo a cada folha.

    Sem folha dentro de r_k², devolve ``x_fallback`` (o ZF aproximado
    quantizado); se não for informado, usa ⌈R⁻¹z⌋.
    """
    z, R = _validar_triangular(z, R)
    cost0_sq = float(cost0_sq)
    busca = _buscar(z, R, c, cost0_sq, apertar=True)

    if busca.melhor is not None:
        x_hat = c.points[busca.melhor]
        stats = SearchStats(
            nodes_visited=busca.nos,
            leaf_updates=busca.apertos,
            radius_initial_sq=cost0_sq,
            radius_final_sq=busca.custo,
            found=True,
            first_leaf_sq=busca.primeira_folha,
            historico_raio=busca.historico,
        )
        return x_hat, stats

    logger.debug("SD proposto sem folha dentro de r_k² = %.6g; usando ZF aproximado quantizado", cost0_sq)
    x_hat = _reserva(z, R, c) if x_fallback is None else np.asarray(x_fallback, dtype=np.complex128)
    stats = SearchStats(
        nodes_visited=busca.nos,
        leaf_updates=0,
        radius_initial_sq=cost0_sq,
        radius_final_sq=cost0_sq,
        found=False,
        fallback=True,
    )
    return x_hat, stats


def sd_se(z, R, c: Constellation) -> Tuple[np.ndarray, SearchStats]:
    """Schnorr–Euchner: limite inicial infinito; sempre devolve o ML."""
    z, R = _validar_triangular(z, R)
    busca = _buscar(z, R, c, float('inf'), apertar=True)
    return c.points[busca.melhor], SearchStats(
        nodes_visited=busca.nos,
        leaf_updates=busca.apertos,
        radius_initial_sq=float('inf'),
        radius_final_sq=busca.custo,
        found=True,
        first_leaf_sq=busca.primeira_folha,
        historico_raio=busca.historico,
    )


def sd_fp(z, R, c: Constellation, r_sq: float) -> Tuple[np.ndarray, SearchStats]:
    """Fincke–Pohst: enumera todas as folhas com custo <= r_sq, sem apertar.

    Esfera vazia: found=False e devolve ⌈R⁻¹z⌋.
    """
    z, R = _validar_triangular(z, R)
    r_sq = float(r_sq)
    if not r_sq >= 0:
        raise ErroConfiguracao(f"Raio do FP-SD deve ser >= 0 (recebido {r_sq})")
    busca = _buscar(z, R, c, r_sq, apertar=False)

    if busca.melhor is None:
        return _reserva(z, R, c), SearchStats(
            nodes_visited=busca.nos,
            leaf_updates=0,
            radius_initial_sq=r_sq,
            radius_final_sq=r_sq,
            found=False,
            fallback=True,
        )
    return c.points[busca.melhor], SearchStats(
        nodes_visited=busca.nos,
        leaf_updates=0,
        radius_initial_sq=r_sq,
        radius_final_sq=busca.custo,
        found=True,
        first_leaf_sq=busca.primeira_folha,
    )


def brute_force_ml(z, R, c: Constellation) -> Tuple[np.ndarray, float]:
    """argmin de ||z - Rx||² sobre Ω^K, desempate lexicográfico (primeiro mínimo).

    Raises:
        ErroConfiguracao: M^K acima de LIMITE_FORCA_BRUTA.
    """
    z, R = _validar_triangular(z, R)
    K = R.shape[0]
    M = c.order
    total = M ** K
    if total > LIMITE_FORCA_BRUTA:
        raise ErroConfiguracao(
            f"Busca exaustiva com {M}^{K} = {total} candidatos excede o limite {LIMITE_FORCA_BRUTA}"
        )

    forma = (M,) * K
    melhor_custo = float('inf')
    melhor_indice = 0
    for inicio in range(0, total, TAMANHO_LOTE_FORCA_BRUTA):
        indices = np.arange(inicio, min(inicio + TAMANHO_LOTE_FORCA_BRUTA, total))
        X = c.points[np.stack(np.unravel_index(indices, forma))]   # K×B
        residuos = z[:, None] - R @ X
        custos = np.sum(np.abs(residuos) ** 2, axis=0)
        j = int(np.argmin(custos))
        if custos[j] < melhor_custo:
            melhor_custo = float(custos[j])
            melhor_indice = int(indices[j])

    x_hat = c.points[np.array(np.unravel_index(melhor_indice, forma))]
    return x_hat, melhor_custo


# ---------------------------------------------------------------------------
# Despacho por configuração
# ---------------------------------------------------------------------------

def sd_decode(z, R, c: Constellation, cfg: SdConfig, C=None, g=None) -> ResultadoSd:
    """Executa o esquema de ``cfg`` calculando o raio inicial necessário.

    ``C`` e ``g`` (= H^H H e H^H y) são derivados de R e z quando omitidos,
    pois H = QR implica C = R^H R e g = R^H z.
    Com r_k² até TOLERANCIA_EMPATE_RAIO abaixo do custo da folha de Babai, o
    raio inicial passa a ser esse custo, para que o empate não caia na reserva.
    """
    z, R = _validar_triangular(z, R)
    K = R.shape[0]
    if C is None:
        C = R.conj().T @ R
    if g is None:
        g = R.conj().T @ z

    if cfg.scheme == Esquema.SE_SD:
        x_hat, stats = sd_se(z, R, c)
        return ResultadoSd(x_hat, stats, 0)

    if cfg.scheme == Esquema.FORCA_BRUTA:
        x_hat, custo = brute_force_ml(z, R, c)
        stats = SearchStats(
            nodes_visited=c.order ** K, leaf_updates=0,
            radius_initial_sq=float('inf'), radius_final_sq=custo,
            found=True, first_leaf_sq=custo,
        )
        return ResultadoSd(x_hat, stats, 0)

    if cfg.radius_mode == ModoRaio.FIXO:
        x_hat, stats = sd_fp(z, R, c, cfg.radius_value)
        return ResultadoSd(x_hat, stats, 0)

    provedor = cfg.inverse if cfg.radius_mode == ModoRaio.BABAI_APROX else InverseProvider.exact()
    inversa, flops, _ = provedor.apply(C)
    x_u = inversa @ g
    x_q = quantize(x_u, c)
    raio_sq = babai_radius_sq(R, x_q, x_u)
    flops += K * K
    custo_babai = float(np.sum(np.abs(z - R @ x_q) ** 2))
    if raio_sq < custo_babai <= raio_sq * (1.0 + TOLERANCIA_EMPATE_RAIO):
        # resíduo de C_k deixa a folha de Babai logo fora da esfera
        raio_sq = custo_babai

    if cfg.scheme == Esquema.FP_SD:
        x_hat, stats = sd_fp(z, R, c, raio_sq)
    else:
        x_hat, stats = sd_proposed(z, R, c, raio_sq, x_fallback=x_q)
    return ResultadoSd(x_hat, stats, flops)
